#include "noisycal/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "noisycal/error.hpp"

namespace noisycal {
namespace {

std::size_t count_le(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

void require_square(const Matrix& W, int K) {
  if (W.rows() != K || W.cols() != K) {
    throw Error(ErrorCode::DimensionMismatch,
                "W is " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) + ", expected K = " +
                    std::to_string(K));
  }
}

void require_nonempty(const EmpiricalCdfs& cdfs) {
  const int l = cdfs.first_empty_class();
  if (l >= 0) throw Error(ErrorCode::EmptyClass, "no calibration points with label " + std::to_string(l + 1), l);
}

}  // namespace

CalibrationSet CalibrationSet::make(RowMatrix scores, LabelVector noisy_labels) {
  if (scores.rows() < 1) throw Error(ErrorCode::InvalidArgument, "calibration set is empty");
  if (static_cast<std::size_t>(scores.rows()) != noisy_labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "scores have " + std::to_string(scores.rows()) + " rows but there are " +
                                               std::to_string(noisy_labels.size()) + " labels");
  }
  const auto K = static_cast<int>(scores.cols());
  CalibrationSet cal;
  cal.own_score.resize(noisy_labels.size());
  for (std::size_t i = 0; i < noisy_labels.size(); ++i) {
    const Label y = noisy_labels[i];
    if (y < 0 || y >= K) {
      throw Error(ErrorCode::InvalidArgument, "label out of range at row " + std::to_string(i + 1),
                  static_cast<int>(i));
    }
    cal.own_score[i] = scores(static_cast<Eigen::Index>(i), y);
  }
  cal.scores = std::move(scores);
  cal.noisy_labels = std::move(noisy_labels);
  return cal;
}

EmpiricalCdfs EmpiricalCdfs::build(const CalibrationSet& cal) {
  EmpiricalCdfs cdfs;
  const int K = cal.num_classes();
  const std::size_t n = cal.size();
  cdfs.K_ = K;
  cdfs.sorted_own_ = cal.own_score;
  std::sort(cdfs.sorted_own_.begin(), cdfs.sorted_own_.end());
  cdfs.counts_.assign(static_cast<std::size_t>(K), 0);
  for (const Label y : cal.noisy_labels) ++cdfs.counts_[static_cast<std::size_t>(y)];
  cdfs.rho_.resize(static_cast<std::size_t>(K));
  for (int l = 0; l < K; ++l) {
    cdfs.rho_[static_cast<std::size_t>(l)] =
        static_cast<double>(cdfs.counts_[static_cast<std::size_t>(l)]) / static_cast<double>(n);
  }
  cdfs.columns_.assign(static_cast<std::size_t>(K * K), {});
  for (int l = 0; l < K; ++l) {
    for (int k = 0; k < K; ++k) cdfs.columns_[static_cast<std::size_t>(l * K + k)].reserve(cdfs.counts_[static_cast<std::size_t>(l)]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int l = cal.noisy_labels[i];
    for (int k = 0; k < K; ++k) {
      cdfs.columns_[static_cast<std::size_t>(l * K + k)].push_back(cal.scores(static_cast<Eigen::Index>(i), k));
    }
  }
  for (auto& column : cdfs.columns_) std::sort(column.begin(), column.end());
  return cdfs;
}

double EmpiricalCdfs::F(double t) const {
  return static_cast<double>(count_le(sorted_own_, t)) / static_cast<double>(sorted_own_.size());
}

double EmpiricalCdfs::F(int l, int k, double t) const {
  const std::size_t n_l = counts_[static_cast<std::size_t>(l)];
  if (n_l == 0) throw Error(ErrorCode::EmptyClass, "no calibration points with label " + std::to_string(l + 1), l);
  return static_cast<double>(count_le(column(l, k), t)) / static_cast<double>(n_l);
}

int EmpiricalCdfs::first_empty_class() const {
  for (int l = 0; l < K_; ++l) {
    if (counts_[static_cast<std::size_t>(l)] == 0) return l;
  }
  return -1;
}

InflationCurve delta_hat(const EmpiricalCdfs& cdfs, const Matrix& W) {
  const int K = cdfs.num_classes();
  require_square(W, K);
  require_nonempty(cdfs);
  const std::size_t n = cdfs.size();
  const auto& own = cdfs.sorted_own();

  InflationCurve curve;
  curve.order_stats = own;
  curve.values.resize(n);

  // One pointer per (l, k) column, advanced monotonically as t increases.
  std::vector<std::size_t> pointer(static_cast<std::size_t>(K * K), 0);
  std::vector<double> weight(static_cast<std::size_t>(K * K));
  for (int l = 0; l < K; ++l) {
    for (int k = 0; k < K; ++k) weight[static_cast<std::size_t>(l * K + k)] = W(k, l) * cdfs.rho_hat()[static_cast<std::size_t>(l)];
  }
  std::size_t own_pointer = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = own[i];
    while (own_pointer < n && own[own_pointer] <= t) ++own_pointer;
    double sum = 0.0;
    double compensation = 0.0;
    for (int l = 0; l < K; ++l) {
      const auto n_l = static_cast<double>(cdfs.class_counts()[static_cast<std::size_t>(l)]);
      for (int k = 0; k < K; ++k) {
        const auto idx = static_cast<std::size_t>(l * K + k);
        const auto& column = cdfs.column(l, k);
        std::size_t& p = pointer[idx];
        while (p < column.size() && column[p] <= t) ++p;
        const double term = weight[idx] * (static_cast<double>(p) / n_l);
        const double y = term - compensation;
        const double next = sum + y;
        compensation = (next - sum) - y;
        sum = next;
      }
    }
    curve.values[i] = sum - static_cast<double>(own_pointer) / static_cast<double>(n);
  }
  return curve;
}

double psi_hat(const EmpiricalCdfs& cdfs, const Matrix& W, const PopulationModel& population, double t) {
  const int K = cdfs.num_classes();
  double value = 0.0;
  for (int l = 0; l < K; ++l) {
    const double rho_hat = cdfs.rho_hat()[static_cast<std::size_t>(l)];
    const double rho_pop = population.rho[static_cast<std::size_t>(l)];
    for (int k = 0; k < K; ++k) {
      const double empirical = rho_hat > 0.0 ? rho_hat * cdfs.F(l, k, t) : 0.0;
      value += W(k, l) * (empirical - rho_pop * population.cdf(l, k, t));
    }
  }
  return value;
}

double psi_sup_oracle(const CalibrationSet& cal, const Matrix& W, const PopulationModel& population) {
  const EmpiricalCdfs cdfs = EmpiricalCdfs::build(cal);
  const int K = cdfs.num_classes();
  require_square(W, K);
  if (static_cast<int>(population.rho.size()) != K) {
    throw Error(ErrorCode::DimensionMismatch, "population frequencies do not match K");
  }
  std::vector<double> points{0.0, 1.0};
  points.reserve(2 + 2 * static_cast<std::size_t>(cal.scores.size()));
  for (Eigen::Index i = 0; i < cal.scores.size(); ++i) {
    const double s = cal.scores.data()[i];
    points.push_back(s);
    points.push_back(std::nextafter(s, -std::numeric_limits<double>::infinity()));
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double best = -std::numeric_limits<double>::infinity();
  for (const double t : points) {
    if (t < 0.0 || t > 1.0) continue;
    best = std::max(best, psi_hat(cdfs, W, population, t));
  }
  return best;
}

}  // namespace noisycal
