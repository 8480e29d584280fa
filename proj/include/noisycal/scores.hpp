#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "noisycal/types.hpp"

namespace noisycal {

// Checks every row of an n x K probability matrix. Rows whose sum is within
// 1e-6 of one are rescaled; anything else (negative or non-finite entries,
// larger deviations) raises InvalidProbability naming the row.
RowMatrix normalize_probabilities(RowMatrix probs);

struct ScoreMatrix {
  RowMatrix values;  // n x K, entries in [0, 1]
  bool randomized = false;
  std::uint64_t seed = 0;

  std::span<const double> row(Eigen::Index i) const {
    return {values.data() + i * values.cols(), static_cast<std::size_t>(values.cols())};
  }
};

struct ApsOptions {
  bool randomized = false;
  std::uint64_t seed = 0;
  // Adds uniform noise on [0, 1e-8] to every score so that ties have
  // probability zero.
  bool jitter = false;
};

// Generalized inverse quantile (APS) scores: the score of label k is the
// cumulative sum of the descending sorted probabilities down to and including
// k's rank. Equal probabilities are ranked by ascending label index. The
// randomized variant subtracts U * pi(x, k) with one uniform U per row.
ScoreMatrix aps_scores(const RowMatrix& probs, const ApsOptions& options = {});

// Same as aps_scores with caller-supplied per-row uniforms (one per row).
ScoreMatrix aps_scores_with_uniforms(const RowMatrix& probs, std::span<const double> uniforms);

// Plain scores 1 - pi(x, k).
ScoreMatrix complement_scores(const RowMatrix& probs);

// {k : score_row[k] <= tau}, ascending. tau = 1 returns every label.
LabelSet prediction_set(std::span<const double> score_row, double tau);

std::vector<LabelSet> prediction_sets(const ScoreMatrix& scores, double tau);

}  // namespace noisycal
