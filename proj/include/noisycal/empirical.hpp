#pragma once

#include <functional>
#include <span>
#include <vector>

#include "noisycal/scores.hpp"
#include "noisycal/types.hpp"

namespace noisycal {

// Calibration scores paired with noisy labels.
struct CalibrationSet {
  RowMatrix scores;          // n x K
  LabelVector noisy_labels;  // n, 0-based
  std::vector<double> own_score;

  static CalibrationSet make(RowMatrix scores, LabelVector noisy_labels);
  static CalibrationSet make(const ScoreMatrix& scores, LabelVector noisy_labels) {
    return make(scores.values, std::move(noisy_labels));
  }

  int num_classes() const { return static_cast<int>(scores.cols()); }
  std::size_t size() const { return noisy_labels.size(); }
};

// Empirical CDFs of the calibration scores. All queries are inclusive (<= t).
class EmpiricalCdfs {
 public:
  static EmpiricalCdfs build(const CalibrationSet& cal);

  int num_classes() const { return K_; }
  std::size_t size() const { return sorted_own_.size(); }
  const std::vector<double>& sorted_own() const { return sorted_own_; }
  const std::vector<std::size_t>& class_counts() const { return counts_; }
  const std::vector<double>& rho_hat() const { return rho_; }
  // Sorted scores s(X_i, k) over the points with noisy label l.
  const std::vector<double>& column(int l, int k) const { return columns_[static_cast<std::size_t>(l * K_ + k)]; }

  // Fraction of own scores <= t.
  double F(double t) const;
  // Fraction of points with noisy label l whose score for label k is <= t.
  // Throws EmptyClass when class l has no points.
  double F(int l, int k, double t) const;

  // First class with no calibration points, or -1.
  int first_empty_class() const;

 private:
  int K_ = 0;
  std::vector<double> sorted_own_;
  std::vector<std::size_t> counts_;
  std::vector<double> rho_;
  std::vector<std::vector<double>> columns_;  // l * K + k
};

// Inflation estimate evaluated at the own-score order statistics.
struct InflationCurve {
  std::vector<double> order_stats;  // S_(1) <= ... <= S_(n)
  std::vector<double> values;       // Delta-hat(S_(i))
};

// Delta-hat(t) = sum_l sum_k W(k,l) rho_l F_l^k(t) - F(t) at every order
// statistic. Terms are summed with l outer, k inner and Kahan compensation,
// each term formed as W(k,l) * rho_l * (count / n_l). Throws EmptyClass.
InflationCurve delta_hat(const EmpiricalCdfs& cdfs, const Matrix& W);

// Population side of the empirical process: rho-tilde and the noisy-label
// conditional CDFs F-tilde_l^k.
struct PopulationModel {
  std::vector<double> rho;
  std::function<double(int l, int k, double t)> cdf;
};

// psi-hat(t) = sum_{k,l} W(k,l) (rho-hat_l F-hat_l^k(t) - rho-tilde_l F-tilde_l^k(t)).
double psi_hat(const EmpiricalCdfs& cdfs, const Matrix& W, const PopulationModel& population, double t);

// Supremum of psi-hat over [0, 1], evaluated at 0, 1, every calibration
// score and the largest double just below each score.
double psi_sup_oracle(const CalibrationSet& cal, const Matrix& W, const PopulationModel& population);

}  // namespace noisycal
