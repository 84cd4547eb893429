"""Idea-vs-execution decomposition of an AI/human research quality gap.

Thin Python surface over the compiled core: text preparation, tier
probabilities, rubric composites, the statistics toolkit, skill ratings,
simulated tournaments, and the end-to-end pipeline driver.
"""

from ._core import (
    ConfigError,
    CorpusError,
    StatsError,
    chi_square_independence,
    chisq_upper_tail,
    cohens_d,
    composite_score,
    conservative_rating,
    decompose_gap,
    dimension_names,
    draw_margin,
    extract_front_matter,
    fill_missing_tiers,
    funnel_analysis,
    mann_whitney_u,
    normal_inverse_cdf,
    normal_upper_tail,
    parse_method,
    parse_scorecard_json,
    pearson_r,
    percentile,
    run_pipeline,
    run_simulated_tournament,
    softmax_tiers,
    spearman_rho,
    strip_latex,
    tier_names,
    update_ratings,
)

__all__ = [
    "ConfigError",
    "CorpusError",
    "StatsError",
    "chi_square_independence",
    "chisq_upper_tail",
    "cohens_d",
    "composite_score",
    "conservative_rating",
    "decompose_gap",
    "dimension_names",
    "draw_margin",
    "extract_front_matter",
    "fill_missing_tiers",
    "funnel_analysis",
    "mann_whitney_u",
    "normal_inverse_cdf",
    "normal_upper_tail",
    "parse_method",
    "parse_scorecard_json",
    "pearson_r",
    "percentile",
    "run_pipeline",
    "run_simulated_tournament",
    "softmax_tiers",
    "spearman_rho",
    "strip_latex",
    "tier_names",
    "update_ratings",
]

__version__ = "0.1.0"
