#include "noisycal/calibrate.hpp"

#include <algorithm>
#include <cmath>

#include "noisycal/error.hpp"

namespace noisycal {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
}

ThresholdResult from_index_set(const InflationCurve& curve, const std::vector<bool>& members, ThresholdMethod method,
                               const CorrectionReport& delta) {
  ThresholdResult result;
  result.method = method;
  result.correction = delta;
  const auto it = std::find(members.begin(), members.end(), true);
  if (it == members.end()) {
    result.tau = 1.0;
    result.set_empty = true;
    return result;
  }
  const auto i = static_cast<std::size_t>(it - members.begin());
  result.index = i + 1;
  result.tau = curve.order_stats[i];
  return result;
}

ThresholdResult adaptive_like(const CalibrationSet& cal, const Matrix& W, double alpha, const CorrectionReport& delta,
                              bool optimistic) {
  check_alpha(alpha);
  if (!(delta.value >= 0.0)) throw Error(ErrorCode::InvalidArgument, "correction must be nonnegative");
  const InflationCurve curve = delta_hat(EmpiricalCdfs::build(cal), W);
  const auto members = adaptive_index_set(curve, alpha, delta.value, optimistic);
  ThresholdResult result =
      from_index_set(curve, members, optimistic ? ThresholdMethod::AdaptivePlus : ThresholdMethod::Adaptive, delta);
  result.optimistic_warning = optimistic;
  return result;
}

}  // namespace

std::string to_string(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::Standard: return "standard";
    case ThresholdMethod::Adaptive: return "adaptive";
    case ThresholdMethod::AdaptivePlus: return "adaptive-plus";
  }
  return "unknown";
}

ThresholdResult standard_threshold(const CalibrationSet& cal, double alpha) {
  check_alpha(alpha);
  const std::size_t n = cal.size();
  std::vector<double> sorted = cal.own_score;
  std::sort(sorted.begin(), sorted.end());
  // The small offset keeps exact products such as 10 * 0.9 from rounding up.
  const double raw = (static_cast<double>(n) + 1.0) * (1.0 - alpha);
  const auto index = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  ThresholdResult result;
  result.method = ThresholdMethod::Standard;
  if (index > n) {
    result.tau = 1.0;
    result.set_empty = true;
    return result;
  }
  const std::size_t i = std::max<std::size_t>(index, 1);
  result.index = i;
  result.tau = sorted[i - 1];
  return result;
}

std::vector<bool> adaptive_index_set(const InflationCurve& curve, double alpha, double delta, bool optimistic) {
  const std::size_t n = curve.values.size();
  const auto nd = static_cast<double>(n);
  std::vector<bool> members(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double position = static_cast<double>(i + 1) / nd;
    const double dh = curve.values[i];
    if (optimistic) {
      members[i] = position >= 1.0 - alpha - std::max(dh - delta, -(1.0 - alpha) / nd);
    } else {
      members[i] = position >= 1.0 - alpha - dh + delta;
    }
  }
  return members;
}

ThresholdResult adaptive_threshold(const CalibrationSet& cal, const Matrix& W, double alpha,
                                   const CorrectionReport& delta) {
  return adaptive_like(cal, W, alpha, delta, false);
}

ThresholdResult optimistic_threshold(const CalibrationSet& cal, const Matrix& W, double alpha,
                                     const CorrectionReport& delta) {
  return adaptive_like(cal, W, alpha, delta, true);
}

Evaluation evaluate(const std::vector<LabelSet>& sets, std::span<const Label> true_labels) {
  if (sets.size() != true_labels.size()) throw Error(ErrorCode::LengthMismatch, "sets and labels differ in length");
  if (sets.empty()) return {};
  std::size_t covered = 0;
  std::size_t total_size = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    total_size += sets[i].size();
    if (std::find(sets[i].begin(), sets[i].end(), true_labels[i]) != sets[i].end()) ++covered;
  }
  const auto n = static_cast<double>(sets.size());
  return {static_cast<double>(covered) / n, static_cast<double>(total_size) / n};
}

}  // namespace noisycal
