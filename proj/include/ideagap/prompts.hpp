#pragma once

// Fixed prompt assets for the four judge calls: idea extraction, idea tier
// classification, execution scoring, and pairwise comparison.  These texts
// are part of the measurement protocol; changing them changes the measured
// quantities, so they live here as frozen strings rather than in config.

#include <string_view>

namespace ideagap::prompts {

// System prompt for summarizing a paper's core research idea from its front
// matter (abstract + introduction).  Target length 120-150 words.
std::string_view idea_extraction_system();

// System prompt for single-token tier classification of an idea summary.
// The answer must begin with one of: Exceptional, Strong, Fair, Limited.
std::string_view idea_tier_system();

// System prompt for the six-dimension execution rubric; demands a JSON
// scorecard with integer 1-5 scores and an identification-method label.
std::string_view execution_rubric_system();

// System prompt for head-to-head comparison of two papers; demands a JSON
// verdict naming the winner.
std::string_view pairwise_judge_system();

}  // namespace ideagap::prompts
