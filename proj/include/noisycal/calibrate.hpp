#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisycal/correction.hpp"
#include "noisycal/empirical.hpp"
#include "noisycal/types.hpp"

namespace noisycal {

enum class ThresholdMethod { Standard, Adaptive, AdaptivePlus };
std::string to_string(ThresholdMethod method);

struct ThresholdResult {
  double tau = 1.0;
  std::optional<std::size_t> index;  // 1-based position in the sorted own scores
  ThresholdMethod method = ThresholdMethod::Standard;
  std::optional<CorrectionReport> correction;
  bool set_empty = false;
  // Set for AdaptivePlus: validity also needs inf Delta >= delta(n) - (1 - alpha)/n,
  // which cannot be checked from contaminated data.
  bool optimistic_warning = false;
};

// ceil((n + 1)(1 - alpha))-th smallest own score, or 1 when that exceeds n.
ThresholdResult standard_threshold(const CalibrationSet& cal, double alpha);

// Smallest i with i/n >= 1 - alpha - Delta-hat(S_(i)) + delta(n).
ThresholdResult adaptive_threshold(const CalibrationSet& cal, const Matrix& W, double alpha,
                                   const CorrectionReport& delta);

// As adaptive, with the inner term max(Delta-hat(S_(i)) - delta(n), -(1 - alpha)/n).
ThresholdResult optimistic_threshold(const CalibrationSet& cal, const Matrix& W, double alpha,
                                     const CorrectionReport& delta);

// Membership of each i in the adaptive (or optimistic) index set, given the
// inflation curve. Exposed for auditing.
std::vector<bool> adaptive_index_set(const InflationCurve& curve, double alpha, double delta, bool optimistic);

struct Evaluation {
  double coverage = 0.0;
  double avg_size = 0.0;
};

Evaluation evaluate(const std::vector<LabelSet>& sets, std::span<const Label> true_labels);

}  // namespace noisycal
