#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisycal/empirical.hpp"
#include "noisycal/noise_model.hpp"
#include "noisycal/types.hpp"

namespace noisycal {

// W-bar(k,l) = beta0 [k == l] + beta_k / K.
struct BetaVector {
  double beta0 = 0.0;
  Vector beta;  // length K

  double mean_sum() const { return beta0 + (beta.size() > 0 ? beta.mean() : 0.0); }
  double abs_mean_sum() const { return std::abs(beta0) + (beta.size() > 0 ? beta.cwiseAbs().mean() : 0.0); }
};

// Omega = W - W-bar(beta).
Matrix omega(const Matrix& W, const BetaVector& beta);

enum class BBranch { Massart, Chaining };
std::string to_string(BBranch branch);

struct BTerm {
  double value = 0.0;  // 2 * min over the available branches
  BBranch branch = BBranch::Massart;
  double massart = 0.0;   // max_l sum_k |Omega(k,l)| sqrt(log(K n + 1))
  double chaining = 0.0;  // 24 max|Omega| (2 log K + 1)/(2 log K - 1) sqrt(2 K log K); NaN when K < 2
  bool degenerate_k = false;
};

BTerm b_term_omega(const Matrix& Omega, long n);
BTerm b_term(int K, long n, const BetaVector& beta, const Matrix& W);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Monte-Carlo estimate of c(n) = E[max_i (i/n - U_(i))]. Uniform order
// statistics come from normalized exponential spacings. Cached per
// (n, M, seed).
McEstimate c_of_n(long n, long M = 100000, std::uint64_t seed = 20240601);

// sqrt(pi / (2 n)), an upper bound on c(n).
double c_of_n_bound(long n);

enum class CorrectionMethod { FiniteSample, Asymptotic, CnOnly };
std::string to_string(CorrectionMethod method);

enum class SupremumKind { OneSided, Absolute };

struct McDiagnostics {
  std::vector<double> h_levels;
  std::vector<int> grid_sizes;
  long M = 0;
  std::vector<double> raw;     // E[max xi] per level, not scaled by 1/sqrt(n)
  std::vector<double> raw_se;
  double extrapolated = 0.0;   // Richardson value before clamping and scaling
  int order = 1;
  double condition_number = 0.0;  // largest over levels
  double max_jitter = 0.0;
};

struct CorrectionReport {
  CorrectionMethod method = CorrectionMethod::CnOnly;
  double value = 0.0;
  double c_n = 0.0;  // the c(n) value used (finite-sample methods)
  std::optional<BetaVector> beta_star;
  std::optional<BBranch> branch;
  double b_value = 0.0;
  bool degenerate_k = false;
  std::string source;  // "lp", "closed-form", "monte-carlo", "c(n)"
  std::optional<McDiagnostics> mc;
};

nlohmann::json to_json(const CorrectionReport& report);

CorrectionReport delta_cn(double c_n);

// Minimizes c_n (beta0 + mean beta_k) + B(K, n, beta)/sqrt(n) over beta by
// solving the Massart and chaining subproblems as linear programs. The
// reported value is re-evaluated at the winning beta. Throws SolverFailure.
CorrectionReport delta_fs(long n, const Matrix& W, double c_n);

// The delta_fs objective evaluated at a fixed beta.
CorrectionReport delta_fs_at(long n, const Matrix& W, double c_n, const BetaVector& beta);

// Same objective evaluated at the family's analytic beta. InvalidSpec for
// Custom.
CorrectionReport delta_fs_special(const ContaminationSpec& spec, long n, double c_n);
BetaVector special_beta(const ContaminationSpec& spec);

// The beta that zeroes Omega under randomized response with noise epsilon.
BetaVector rr_beta(int K, double epsilon);

struct GridCovariance {
  std::vector<double> grid;
  Matrix sigma;
};

// Plug-in covariance of the generalized Brownian bridge on a sorted grid.
// With g_i(t) = sum_k W(k, y_i) [s(X_i, k) <= t], Sigma is the empirical
// covariance of (g_i(t_1), ..., g_i(t_N)). Throws EmptyClass.
GridCovariance estimate_covariance(const CalibrationSet& cal, const Matrix& W, const std::vector<double>& grid);

struct GbbSample {
  double mean = 0.0;
  double se = 0.0;
  double jitter = 0.0;
  double condition_number = 0.0;
};

// Mean and standard error of max_i xi_i (or max_i |xi_i|) over M draws of
// xi ~ N(0, Sigma). Throws CholeskyFailure.
GbbSample simulate_gbb_sup(const GridCovariance& cov, long M, std::uint64_t seed,
                           SupremumKind kind = SupremumKind::OneSided);

struct LadderPoint {
  double h = 0.0;
  double value = 0.0;
};

// Recursive Richardson elimination over a halving ladder of step sizes.
// Uses the order + 1 finest levels; exponent p for the first elimination,
// p + 1/2 for the next. Throws LadderMismatch.
double richardson(std::vector<LadderPoint> estimates, int order, double p_assumed = 0.5);

struct AsyConfig {
  std::vector<double> h_ladder{1.0 / 400, 1.0 / 800, 1.0 / 1600};
  long M = 100000;
  std::uint64_t seed = 7;
  int order = 1;
  SupremumKind kind = SupremumKind::OneSided;
};

std::vector<double> uniform_grid(double h);

CorrectionReport delta_asy(const CalibrationSet& cal, const Matrix& W, const AsyConfig& config = {});

// inf_beta sqrt(pi/(2n)) (|beta0| + mean |beta_k|) + B(K, n, beta)/sqrt(n).
double delta_star_star_bound(long n, const Matrix& W);

struct UpperBoundDiagnostics {
  double d_n = 0.0;
  double phi_n = 0.0;
  double assumption_threshold = 0.0;
  double v_term = 0.0;  // max_k (rho_k / rho-tilde_k) sum_l |V(k,l)|
  Matrix M;
  Matrix V;
};

UpperBoundDiagnostics upper_bound_diagnostics(long n, const Matrix& T, const std::vector<double>& rho,
                                              const std::vector<double>& rho_tilde, double alpha, double delta_n,
                                              double delta_star_star);

}  // namespace noisycal
