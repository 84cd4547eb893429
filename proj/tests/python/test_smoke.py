"""Smoke tests for the compiled extension: a few frozen values per area."""

import math

import pytest

import ideagap


def test_strip_latex_and_front_matter():
    text, warnings = ideagap.strip_latex("\\section{Data} We use X. % note\n")
    assert text == "Data\nWe use X."
    assert warnings == []

    fm = ideagap.extract_front_matter(
        "Title\n\nAbstract\nSummary.\n\n1 Introduction\nOpening.\n\n2 Data\nStuff.\n"
    )
    assert not fm["fallback"]
    assert fm["text"].endswith("Opening.")


def test_tier_softmax_frozen():
    p = ideagap.softmax_tiers([-0.5, -1.2, -3.0, -4.5])
    assert p[0] == pytest.approx(0.62617958877173, abs=1e-9)
    assert sum(p) == pytest.approx(1.0, abs=1e-12)
    assert ideagap.tier_names() == ["Exceptional", "Strong", "Fair", "Limited"]

    lp = ideagap.fill_missing_tiers([("Strong", -1.0)], "Strong")
    assert lp == pytest.approx([-11.0, -1.0, -11.0, -11.0])


def test_rubric_composite_and_scorecard():
    assert ideagap.composite_score([3.69, 3.71, 3.91, 4.03, 3.32, 4.58]) == pytest.approx(
        3.841, abs=1e-12
    )
    card = ideagap.parse_scorecard_json(
        '{"Identification": 4, "Econometrics": 3, "Robustness": 3, '
        '"DataQuality": 5, "Mechanism": 2, "Writing": 4, "Method": "IV"}'
    )
    assert card["scores"]["Identification"] == 4
    assert card["method"] == "IV"
    assert ideagap.parse_method("difference-in-differences") == "DiD"
    assert ideagap.dimension_names()[0] == "Identification"


def test_statistics_frozen():
    assert ideagap.cohens_d([3, 4, 5], [1, 2, 3]) == pytest.approx(2.0, abs=1e-12)

    mw = ideagap.mann_whitney_u([1, 2], [3, 4], mode="exact")
    assert mw["statistic"] == 0.0
    assert mw["p_value"] == pytest.approx(1 / 3, abs=1e-12)
    assert mw["z"] is None

    chi = ideagap.chi_square_independence([209, 594, 95, 14], [30, 11, 0, 0])
    assert chi["statistic"] == pytest.approx(53.4788909716888, abs=1e-9)
    assert chi["df"] == 3

    gap = ideagap.decompose_gap(2.23, 0.90)
    assert gap["share_idea"] == pytest.approx(2.23 / 3.13, abs=1e-12)

    assert ideagap.percentile([1.0, 2.0, 3.0, 4.0], 50) == pytest.approx(2.5)
    assert ideagap.spearman_rho([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert ideagap.normal_upper_tail(0.0) == pytest.approx(0.5)
    assert ideagap.chisq_upper_tail(2.0, 2) == pytest.approx(math.exp(-1.0), abs=1e-12)

    with pytest.raises(ideagap.StatsError):
        ideagap.pearson_r([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_funnel():
    human = [(0.2, 3.0), (0.4, 4.0), (0.6, 3.5), (0.8, 4.5)]
    # One pair above everything, one clearing only the median thresholds
    # (0.5, 3.75), one below the minimum, one exactly at the idea median
    # (strict comparison fails).
    ai = [(0.9, 5.0), (0.55, 3.9), (0.1, 2.0), (0.5, 3.8)]
    f = ideagap.funnel_analysis(ai, human)
    assert f["n_ai"] == 4
    assert f["median"]["count"] == 2
    assert f["q25"]["count"] == 3
    assert f["min"]["count"] == 3
    assert f["median"]["idea_threshold"] == pytest.approx(0.5)
    assert f["q25"]["exec_threshold"] == pytest.approx(3.375)


def test_rating_updates_frozen():
    (mu_a, sigma_a), (mu_b, sigma_b) = ideagap.update_ratings(
        25.0, 25.0 / 3.0, 25.0, 25.0 / 3.0, "a_wins"
    )
    assert mu_a == pytest.approx(29.636000080444519, abs=1e-9)
    assert sigma_a == pytest.approx(7.1434913626600914, abs=1e-9)
    assert mu_b == pytest.approx(20.363999919555481, abs=1e-9)
    assert sigma_b == pytest.approx(sigma_a, abs=1e-12)

    assert ideagap.conservative_rating(30.0, 2.0, 3.0) == pytest.approx(24.0)
    assert ideagap.normal_inverse_cdf(0.55) == pytest.approx(
        0.12566134685507403, abs=1e-12
    )


def test_simulated_tournament_recovers_order():
    latent = {f"p{i:02d}": i / 15.0 for i in range(16)}
    board = ideagap.run_simulated_tournament(
        latent, accuracy_scale=11.56, n_matches=300, seed=3, concurrency=2
    )
    assert len(board) == 16
    ranks = [row["paper_id"] for row in board]
    truth = [latent[pid] for pid in ranks]
    rated = [row["conservative"] for row in board]
    assert ideagap.spearman_rho(truth, rated) >= 0.6


def test_pipeline_end_to_end(tmp_path):
    import pathlib

    fixture = pathlib.Path(__file__).resolve().parents[2] / "data" / "fixture_corpus"
    out = tmp_path / "out"
    result = ideagap.run_pipeline(str(fixture), str(out), backend="mock", seed=7,
                                  tournament_matches=20)
    assert result["ok"], result
    assert (out / "gap_report.json").exists()
    assert (out / "manifest.json").exists()

    with pytest.raises(ideagap.ConfigError):
        ideagap.run_pipeline(str(tmp_path / "missing"), str(out))
