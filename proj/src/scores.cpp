#include "noisycal/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisycal/error.hpp"
#include "noisycal/parallel.hpp"
#include "noisycal/rng.hpp"

namespace noisycal {
namespace {

constexpr double kJitterWidth = 1e-8;

// Fills scores for one row. `u` is the randomization draw (0 for the
// deterministic variant).
void aps_row(const double* probs, Eigen::Index K, double u, double* out, std::vector<int>& order) {
  order.resize(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [probs](int a, int b) { return probs[a] > probs[b]; });
  double cumulative = 0.0;
  for (const int k : order) {
    cumulative += probs[k];
    out[k] = std::clamp(cumulative - u * probs[k], 0.0, 1.0);
  }
  // The last label in rank order always reaches score one.
  out[order.back()] = std::clamp(1.0 - u * probs[order.back()], 0.0, 1.0);
}

}  // namespace

RowMatrix normalize_probabilities(RowMatrix probs) {
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    auto row = probs.row(i);
    if (!row.allFinite() || (row.array() < 0.0).any() || (row.array() > 1.0 + 1e-9).any()) {
      throw Error(ErrorCode::InvalidProbability, "row " + std::to_string(i + 1) + " has entries outside [0, 1]",
                  static_cast<int>(i));
    }
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::InvalidProbability, "row " + std::to_string(i + 1) + " does not sum to one",
                  static_cast<int>(i));
    }
    if (std::abs(sum - 1.0) > 1e-9 || sum != 1.0) row /= sum;
  }
  return probs;
}

ScoreMatrix aps_scores_with_uniforms(const RowMatrix& probs, std::span<const double> uniforms) {
  if (static_cast<Eigen::Index>(uniforms.size()) != probs.rows()) {
    throw Error(ErrorCode::LengthMismatch, "need one uniform per row");
  }
  const RowMatrix checked = normalize_probabilities(probs);
  ScoreMatrix result;
  result.values.resize(checked.rows(), checked.cols());
  result.randomized = true;
  std::vector<int> order;
  for (Eigen::Index i = 0; i < checked.rows(); ++i) {
    aps_row(checked.row(i).data(), checked.cols(), uniforms[static_cast<std::size_t>(i)],
            result.values.row(i).data(), order);
  }
  return result;
}

ScoreMatrix aps_scores(const RowMatrix& probs, const ApsOptions& options) {
  const RowMatrix checked = normalize_probabilities(probs);
  const Eigen::Index n = checked.rows();
  const Eigen::Index K = checked.cols();
  ScoreMatrix result;
  result.values.resize(n, K);
  result.randomized = options.randomized;
  result.seed = options.seed;

  constexpr Eigen::Index kChunk = 4096;
  const auto chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<int> order;
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index end = std::min(n, begin + kChunk);
    for (Eigen::Index i = begin; i < end; ++i) {
      const auto row_stream = static_cast<std::uint64_t>(i);
      const double u = options.randomized ? hashed_uniform(options.seed, row_stream) : 0.0;
      double* out = result.values.row(i).data();
      aps_row(checked.row(i).data(), K, u, out, order);
      if (options.jitter) {
        Engine engine = make_engine(options.seed ^ 0x6a09e667f3bcc909ULL, row_stream);
        for (Eigen::Index k = 0; k < K; ++k) out[k] = std::min(1.0, out[k] + kJitterWidth * uniform01(engine));
      }
    }
  });
  return result;
}

ScoreMatrix complement_scores(const RowMatrix& probs) {
  const RowMatrix checked = normalize_probabilities(probs);
  ScoreMatrix result;
  result.values = (1.0 - checked.array()).matrix();
  return result;
}

LabelSet prediction_set(std::span<const double> score_row, double tau) {
  LabelSet set;
  for (std::size_t k = 0; k < score_row.size(); ++k) {
    if (score_row[k] <= tau) set.push_back(static_cast<Label>(k));
  }
  return set;
}

std::vector<LabelSet> prediction_sets(const ScoreMatrix& scores, double tau) {
  std::vector<LabelSet> sets(static_cast<std::size_t>(scores.values.rows()));
  for (Eigen::Index i = 0; i < scores.values.rows(); ++i) sets[static_cast<std::size_t>(i)] = prediction_set(scores.row(i), tau);
  return sets;
}

}  // namespace noisycal
