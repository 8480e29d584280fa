#include "noisycal/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "noisycal/error.hpp"
#include "noisycal/parallel.hpp"
#include "noisycal/rng.hpp"
#include "noisycal/simplex.hpp"

namespace noisycal {
namespace {

double massart_factor(int K, long n) { return std::sqrt(std::log(static_cast<double>(K) * static_cast<double>(n) + 1.0)); }

double chaining_factor(int K) {
  const double logK = std::log(static_cast<double>(K));
  return 24.0 * ((2.0 * logK + 1.0) / (2.0 * logK - 1.0)) * std::sqrt(2.0 * K * logK);
}

void require_positive_n(long n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
}

void require_square(const Matrix& W) {
  if (W.rows() != W.cols() || W.rows() < 1) throw Error(ErrorCode::DimensionMismatch, "W must be square and nonempty");
}

// Which objective multiplies beta.
enum class BetaCost { Signed, Absolute };

// Minimizes cost * g(beta) + (2/sqrt(n)) * branch_term(Omega) as an LP, where
// g is beta0 + mean beta_k (Signed) or |beta0| + mean |beta_k| (Absolute).
BetaVector solve_branch(const Matrix& W, long n, double cost, BetaCost kind, BBranch branch) {
  const int K = static_cast<int>(W.rows());
  lp::LinearProgram program;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double beta_cost0 = kind == BetaCost::Signed ? cost : 0.0;
  const double beta_costk = kind == BetaCost::Signed ? cost / K : 0.0;

  const std::size_t b0 = program.add_variable(beta_cost0, true);
  std::vector<std::size_t> bk(static_cast<std::size_t>(K));
  for (auto& v : bk) v = program.add_variable(beta_costk, true);

  if (kind == BetaCost::Absolute) {
    auto bound_abs = [&](std::size_t var, double weight) {
      const std::size_t a = program.add_variable(weight);
      program.add_constraint({{{var, 1.0}, {a, -1.0}}, lp::Sense::LessEqual, 0.0});
      program.add_constraint({{{var, -1.0}, {a, -1.0}}, lp::Sense::LessEqual, 0.0});
    };
    bound_abs(b0, cost);
    for (const auto v : bk) bound_abs(v, cost / K);
  }

  const double branch_weight =
      2.0 / sqrt_n * (branch == BBranch::Massart ? massart_factor(K, n) : chaining_factor(K));
  const std::size_t z = program.add_variable(branch_weight);

  // -Omega(k,l) <= bound and Omega(k,l) <= bound, where
  // Omega(k,l) = W(k,l) - beta0 [k == l] - beta_k / K.
  auto add_abs_pair = [&](int k, int l, std::size_t bound) {
    lp::Constraint upper;  // Omega <= bound
    lp::Constraint lower;  // -Omega <= bound
    if (k == l) {
      upper.terms.emplace_back(b0, -1.0);
      lower.terms.emplace_back(b0, 1.0);
    }
    upper.terms.emplace_back(bk[static_cast<std::size_t>(k)], -1.0 / K);
    lower.terms.emplace_back(bk[static_cast<std::size_t>(k)], 1.0 / K);
    upper.terms.emplace_back(bound, -1.0);
    lower.terms.emplace_back(bound, -1.0);
    upper.rhs = -W(k, l);
    lower.rhs = W(k, l);
    program.add_constraint(std::move(upper));
    program.add_constraint(std::move(lower));
  };

  if (branch == BBranch::Massart) {
    for (int l = 0; l < K; ++l) {
      lp::Constraint column_sum;
      for (int k = 0; k < K; ++k) {
        const std::size_t u = program.add_variable(0.0);
        add_abs_pair(k, l, u);
        column_sum.terms.emplace_back(u, 1.0);
      }
      column_sum.terms.emplace_back(z, -1.0);
      program.add_constraint(std::move(column_sum));
    }
  } else {
    for (int l = 0; l < K; ++l) {
      for (int k = 0; k < K; ++k) add_abs_pair(k, l, z);
    }
  }

  const lp::Solution solution = lp::solve(program);
  if (solution.status != lp::Status::Optimal) {
    throw Error(ErrorCode::SolverFailure,
                "beta subproblem (" + to_string(branch) + ") ended with status " + std::string(lp::to_string(solution.status)));
  }
  BetaVector beta;
  beta.beta0 = solution.x[b0];
  beta.beta.resize(K);
  for (int k = 0; k < K; ++k) beta.beta(k) = solution.x[bk[static_cast<std::size_t>(k)]];
  return beta;
}

double objective(const Matrix& W, long n, double cost, BetaCost kind, const BetaVector& beta, BTerm* term_out) {
  const BTerm term = b_term(static_cast<int>(W.rows()), n, beta, W);
  if (term_out) *term_out = term;
  const double g = kind == BetaCost::Signed ? beta.mean_sum() : beta.abs_mean_sum();
  return cost * g + term.value / std::sqrt(static_cast<double>(n));
}

struct BestBeta {
  BetaVector beta;
  BTerm term;
  double value = 0.0;
};

BestBeta minimize_over_beta(const Matrix& W, long n, double cost, BetaCost kind) {
  require_square(W);
  require_positive_n(n);
  const int K = static_cast<int>(W.rows());
  std::vector<BBranch> branches{BBranch::Massart};
  if (K >= 2) branches.push_back(BBranch::Chaining);
  BestBeta best;
  best.value = std::numeric_limits<double>::infinity();
  for (const BBranch branch : branches) {
    const BetaVector beta = solve_branch(W, n, cost, kind, branch);
    BTerm term;
    const double value = objective(W, n, cost, kind, beta, &term);
    if (!std::isfinite(value)) throw Error(ErrorCode::SolverFailure, "non-finite objective at the LP solution");
    if (value < best.value) best = {beta, term, value};
  }
  return best;
}

}  // namespace

Matrix omega(const Matrix& W, const BetaVector& beta) {
  require_square(W);
  const Eigen::Index K = W.rows();
  if (beta.beta.size() != K) throw Error(ErrorCode::DimensionMismatch, "beta has the wrong length");
  Matrix Omega = W;
  for (Eigen::Index l = 0; l < K; ++l) {
    for (Eigen::Index k = 0; k < K; ++k) Omega(k, l) -= beta.beta(k) / static_cast<double>(K);
    Omega(l, l) -= beta.beta0;
  }
  return Omega;
}

std::string to_string(BBranch branch) { return branch == BBranch::Massart ? "massart" : "chaining"; }

BTerm b_term_omega(const Matrix& Omega, long n) {
  require_square(Omega);
  require_positive_n(n);
  const int K = static_cast<int>(Omega.rows());
  BTerm term;
  term.massart = Omega.cwiseAbs().colwise().sum().maxCoeff() * massart_factor(K, n);
  if (K < 2) {
    term.degenerate_k = true;
    term.chaining = std::numeric_limits<double>::quiet_NaN();
    term.value = 2.0 * term.massart;
    term.branch = BBranch::Massart;
    return term;
  }
  term.chaining = Omega.cwiseAbs().maxCoeff() * chaining_factor(K);
  if (term.chaining < term.massart) {
    term.branch = BBranch::Chaining;
    term.value = 2.0 * term.chaining;
  } else {
    term.branch = BBranch::Massart;
    term.value = 2.0 * term.massart;
  }
  return term;
}

BTerm b_term(int K, long n, const BetaVector& beta, const Matrix& W) {
  if (W.rows() != K) throw Error(ErrorCode::DimensionMismatch, "W does not match K");
  return b_term_omega(omega(W, beta), n);
}

double c_of_n_bound(long n) {
  require_positive_n(n);
  return std::sqrt(std::numbers::pi / (2.0 * static_cast<double>(n)));
}

McEstimate c_of_n(long n, long M, std::uint64_t seed) {
  require_positive_n(n);
  if (M < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");

  static std::mutex cache_mutex;
  static std::map<std::tuple<long, long, std::uint64_t>, McEstimate> cache;
  const auto key = std::make_tuple(n, M, seed);
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  constexpr long kChunk = 1000;
  const auto chunks = static_cast<std::size_t>((M + kChunk - 1) / kChunk);
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> squares(chunks, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  parallel_for(chunks, [&](std::size_t c) {
    Engine engine = make_engine(seed, c);
    const long begin = static_cast<long>(c) * kChunk;
    const long end = std::min(M, begin + kChunk);
    Eigen::ArrayXd spacing(n + 1);
    double sum = 0.0;
    double square = 0.0;
    for (long r = begin; r < end; ++r) {
      // Exponential spacings: U_(i) = S_i / S_{n+1}.
      for (long i = 0; i <= n; ++i) {
        spacing(i) = static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
      }
      spacing = -spacing.log();
      const double total = spacing.sum();
      const double step = total * inv_n;
      double partial = 0.0;
      double best = -std::numeric_limits<double>::infinity();
      for (long i = 0; i < n; ++i) {
        partial += spacing(i);
        best = std::max(best, static_cast<double>(i + 1) * step - partial);
      }
      const double d = best / total;
      sum += d;
      square += d * d;
    }
    sums[c] = sum;
    squares[c] = square;
  });
  double sum = 0.0;
  double square = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    square += squares[c];
  }
  const double m = static_cast<double>(M);
  McEstimate estimate;
  estimate.mean = sum / m;
  const double variance = M > 1 ? std::max(0.0, (square - m * estimate.mean * estimate.mean) / (m - 1.0)) : 0.0;
  estimate.se = std::sqrt(variance / m);

  std::lock_guard lock(cache_mutex);
  cache.emplace(key, estimate);
  return estimate;
}

std::string to_string(CorrectionMethod method) {
  switch (method) {
    case CorrectionMethod::FiniteSample: return "finite-sample";
    case CorrectionMethod::Asymptotic: return "asymptotic";
    case CorrectionMethod::CnOnly: return "cn-only";
  }
  return "unknown";
}

nlohmann::json to_json(const CorrectionReport& report) {
  nlohmann::json out;
  out["method"] = to_string(report.method);
  out["value"] = report.value;
  out["source"] = report.source;
  if (report.method != CorrectionMethod::Asymptotic) out["c_n"] = report.c_n;
  if (report.beta_star) {
    nlohmann::json beta;
    beta["beta0"] = report.beta_star->beta0;
    beta["beta"] = std::vector<double>(report.beta_star->beta.begin(), report.beta_star->beta.end());
    out["beta_star"] = beta;
  } else {
    out["beta_star"] = nullptr;
  }
  out["branch"] = report.branch ? nlohmann::json(to_string(*report.branch)) : nlohmann::json(nullptr);
  if (report.beta_star) {
    out["b_value"] = report.b_value;
    out["degenerate_k"] = report.degenerate_k;
  }
  if (report.mc) {
    const McDiagnostics& mc = *report.mc;
    out["mc_diagnostics"] = {
        {"h_levels", mc.h_levels},         {"grid_sizes", mc.grid_sizes},
        {"M", mc.M},                       {"raw", mc.raw},
        {"raw_se", mc.raw_se},             {"extrapolated", mc.extrapolated},
        {"order", mc.order},               {"condition_number", mc.condition_number},
        {"max_jitter", mc.max_jitter},
    };
  } else {
    out["mc_diagnostics"] = nullptr;
  }
  return out;
}

CorrectionReport delta_cn(double c_n) {
  if (!(c_n >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c(n) must be nonnegative");
  CorrectionReport report;
  report.method = CorrectionMethod::CnOnly;
  report.value = c_n;
  report.c_n = c_n;
  report.source = "c(n)";
  return report;
}

CorrectionReport delta_fs(long n, const Matrix& W, double c_n) {
  if (!(c_n > 0.0)) throw Error(ErrorCode::InvalidArgument, "c(n) must be positive");
  const BestBeta best = minimize_over_beta(W, n, c_n, BetaCost::Signed);
  CorrectionReport report;
  report.method = CorrectionMethod::FiniteSample;
  report.value = std::max(0.0, best.value);
  report.c_n = c_n;
  report.beta_star = best.beta;
  report.branch = best.term.branch;
  report.b_value = best.term.value;
  report.degenerate_k = best.term.degenerate_k;
  report.source = "lp";
  return report;
}

BetaVector special_beta(const ContaminationSpec& spec) {
  spec.validate();
  const int K = spec.num_classes;
  const double eps = spec.epsilon;
  BetaVector beta;
  beta.beta0 = 1.0 / (1.0 - eps);
  switch (spec.family) {
    case NoiseFamily::RandomizedResponse:
      return rr_beta(K, eps);
    case NoiseFamily::BlockRR: {
      const double m = static_cast<double>(K / spec.blocks);
      beta.beta = Vector::Constant(K, -static_cast<double>(K) * eps / (m * (1.0 - eps)));
      break;
    }
    case NoiseFamily::TwoLevelRR:
      beta.beta = Vector::Constant(K, -TwoLevelDerived::compute(eps, spec.nu).p);
      break;
    case NoiseFamily::Custom:
      throw Error(ErrorCode::InvalidSpec, "no analytic beta for a custom transition matrix");
  }
  return beta;
}

CorrectionReport delta_fs_at(long n, const Matrix& W, double c_n, const BetaVector& beta) {
  require_square(W);
  require_positive_n(n);
  BTerm term;
  const double value = objective(W, n, c_n, BetaCost::Signed, beta, &term);
  CorrectionReport report;
  report.method = CorrectionMethod::FiniteSample;
  report.value = std::max(0.0, value);
  report.c_n = c_n;
  report.beta_star = beta;
  report.branch = term.branch;
  report.b_value = term.value;
  report.degenerate_k = term.degenerate_k;
  report.source = "fixed-beta";
  return report;
}

CorrectionReport delta_fs_special(const ContaminationSpec& spec, long n, double c_n) {
  const BetaVector beta = special_beta(spec);
  CorrectionReport report = delta_fs_at(n, closed_form_inverse(spec).W(), c_n, beta);
  report.source = "closed-form";
  return report;
}

BetaVector rr_beta(int K, double epsilon) {
  if (K < 1 || !(epsilon >= 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "need K >= 1 and epsilon in [0, 1)");
  BetaVector beta;
  beta.beta0 = 1.0 / (1.0 - epsilon);
  beta.beta = Vector::Constant(K, -epsilon / (1.0 - epsilon));
  return beta;
}

GridCovariance estimate_covariance(const CalibrationSet& cal, const Matrix& W, const std::vector<double>& grid) {
  const int K = cal.num_classes();
  if (W.rows() != K || W.cols() != K) throw Error(ErrorCode::DimensionMismatch, "W does not match the score matrix");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
    throw Error(ErrorCode::InvalidArgument, "grid must be nonempty and sorted");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  for (const Label y : cal.noisy_labels) ++counts[static_cast<std::size_t>(y)];
  for (int l = 0; l < K; ++l) {
    if (counts[static_cast<std::size_t>(l)] == 0) {
      throw Error(ErrorCode::EmptyClass, "no calibration points with label " + std::to_string(l + 1), l);
    }
  }

  const auto N = static_cast<Eigen::Index>(grid.size());
  const std::size_t n = cal.size();
  // jumps(p, q) accumulates W(k,y) W(k',y) over points whose label-k score
  // first counts at grid index p and label-k' score at q.
  Matrix jumps = Matrix::Zero(N, N);
  Vector first = Vector::Zero(N);
  std::vector<Eigen::Index> bin(static_cast<std::size_t>(K));
  std::vector<double> weight(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < n; ++i) {
    const int y = cal.noisy_labels[i];
    int active = 0;
    for (int k = 0; k < K; ++k) {
      const double s = cal.scores(static_cast<Eigen::Index>(i), k);
      const auto b = static_cast<Eigen::Index>(std::lower_bound(grid.begin(), grid.end(), s) - grid.begin());
      if (b >= N) continue;
      bin[static_cast<std::size_t>(active)] = b;
      weight[static_cast<std::size_t>(active)] = W(k, y);
      ++active;
    }
    for (int a = 0; a < active; ++a) {
      const auto pa = bin[static_cast<std::size_t>(a)];
      const double wa = weight[static_cast<std::size_t>(a)];
      first(pa) += wa;
      for (int b = 0; b < active; ++b) jumps(pa, bin[static_cast<std::size_t>(b)]) += wa * weight[static_cast<std::size_t>(b)];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  // Two-dimensional prefix sums give E[g(t_a) g(t_b)].
  for (Eigen::Index q = 0; q < N; ++q) {
    for (Eigen::Index p = 1; p < N; ++p) jumps(p, q) += jumps(p - 1, q);
  }
  for (Eigen::Index q = 1; q < N; ++q) jumps.col(q) += jumps.col(q - 1);
  Vector mean(N);
  double running = 0.0;
  for (Eigen::Index p = 0; p < N; ++p) {
    running += first(p);
    mean(p) = running * inv_n;
  }
  GridCovariance cov;
  cov.grid = grid;
  cov.sigma = jumps * inv_n - mean * mean.transpose();
  cov.sigma = 0.5 * (cov.sigma + cov.sigma.transpose()).eval();
  return cov;
}

GbbSample simulate_gbb_sup(const GridCovariance& cov, long M, std::uint64_t seed, SupremumKind kind) {
  const Eigen::Index N = cov.sigma.rows();
  if (N < 1 || cov.sigma.cols() != N) throw Error(ErrorCode::DimensionMismatch, "covariance must be square");
  if (M < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");
  GbbSample result;
  if ((cov.sigma.array() == 0.0).all()) return result;

  const double scale = cov.sigma.trace() / static_cast<double>(N);
  if (!(scale > 0.0)) throw Error(ErrorCode::CholeskyFailure, "covariance has a nonpositive trace");
  Matrix L;
  bool factored = false;
  for (double rel = 1e-10; rel <= 1e-6 * 1.0000001; rel *= 10.0) {
    const double lambda = rel * scale;
    Eigen::LLT<Matrix> llt(cov.sigma + lambda * Matrix::Identity(N, N));
    if (llt.info() == Eigen::Success) {
      L = llt.matrixL();
      result.jitter = lambda;
      factored = true;
      break;
    }
  }
  if (!factored) throw Error(ErrorCode::CholeskyFailure, "covariance is not positive definite after jitter");
  const Vector diag = L.diagonal();
  result.condition_number = std::pow(diag.maxCoeff() / diag.minCoeff(), 2);

  constexpr long kBatch = 256;
  const auto chunks = static_cast<std::size_t>((M + kBatch - 1) / kBatch);
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> squares(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    Engine engine = make_engine(seed, c);
    std::normal_distribution<double> normal;
    const long begin = static_cast<long>(c) * kBatch;
    const long count = std::min(M, begin + kBatch) - begin;
    Matrix Z(N, count);
    for (Eigen::Index j = 0; j < count; ++j) {
      for (Eigen::Index i = 0; i < N; ++i) Z(i, j) = normal(engine);
    }
    const Matrix X = L.triangularView<Eigen::Lower>() * Z;
    double sum = 0.0;
    double square = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) {
      const double m = kind == SupremumKind::Absolute ? X.col(j).cwiseAbs().maxCoeff() : X.col(j).maxCoeff();
      sum += m;
      square += m * m;
    }
    sums[c] = sum;
    squares[c] = square;
  });
  double sum = 0.0;
  double square = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    square += squares[c];
  }
  const double m = static_cast<double>(M);
  result.mean = sum / m;
  const double variance = M > 1 ? std::max(0.0, (square - m * result.mean * result.mean) / (m - 1.0)) : 0.0;
  result.se = std::sqrt(variance / m);
  return result;
}

double richardson(std::vector<LadderPoint> estimates, int order, double p_assumed) {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "Richardson order must be nonnegative");
  if (estimates.size() < static_cast<std::size_t>(order) + 1) {
    throw Error(ErrorCode::LadderMismatch, "need " + std::to_string(order + 1) + " ladder levels for order " +
                                               std::to_string(order));
  }
  std::sort(estimates.begin(), estimates.end(), [](const LadderPoint& a, const LadderPoint& b) { return a.h > b.h; });
  estimates.erase(estimates.begin(), estimates.end() - (order + 1));
  for (std::size_t j = 0; j + 1 < estimates.size(); ++j) {
    const double ratio = estimates[j].h / estimates[j + 1].h;
    if (!(std::abs(ratio - 2.0) <= 1e-12)) throw Error(ErrorCode::LadderMismatch, "step sizes must halve");
  }
  std::vector<double> values;
  for (const auto& e : estimates) values.push_back(e.value);
  double p = p_assumed;
  for (int round = 0; round < order; ++round) {
    const double factor = std::pow(2.0, p);
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
      values[j] = (factor * values[j + 1] - values[j]) / (factor - 1.0);
    }
    values.pop_back();
    p += 0.5;
  }
  return values.front();
}

std::vector<double> uniform_grid(double h) {
  if (!(h > 0.0 && h <= 1.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be in (0, 1]");
  const double steps = 1.0 / h;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * rounded) {
    throw Error(ErrorCode::InvalidArgument, "1/h must be an integer");
  }
  const auto count = static_cast<std::size_t>(rounded);
  std::vector<double> grid(count + 1);
  for (std::size_t j = 0; j <= count; ++j) grid[j] = static_cast<double>(j) / static_cast<double>(count);
  return grid;
}

CorrectionReport delta_asy(const CalibrationSet& cal, const Matrix& W, const AsyConfig& config) {
  if (config.h_ladder.empty()) throw Error(ErrorCode::InvalidArgument, "empty h ladder");
  if (config.M < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");
  std::vector<double> ladder = config.h_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  for (std::size_t j = 0; j + 1 < ladder.size(); ++j) {
    if (!(std::abs(ladder[j] / ladder[j + 1] - 2.0) <= 1e-12)) {
      throw Error(ErrorCode::LadderMismatch, "step sizes must halve");
    }
  }
  if (ladder.size() < static_cast<std::size_t>(config.order) + 1) {
    throw Error(ErrorCode::LadderMismatch, "ladder too short for the requested order");
  }
  // Only the finest order + 1 levels enter the extrapolation.
  ladder.erase(ladder.begin(), ladder.end() - (config.order + 1));

  McDiagnostics mc;
  mc.M = config.M;
  mc.order = config.order;
  std::vector<LadderPoint> points;
  for (std::size_t level = 0; level < ladder.size(); ++level) {
    const std::vector<double> grid = uniform_grid(ladder[level]);
    const GridCovariance cov = estimate_covariance(cal, W, grid);
    const GbbSample sample = simulate_gbb_sup(cov, config.M, derive_seed(config.seed, level), config.kind);
    mc.h_levels.push_back(ladder[level]);
    mc.grid_sizes.push_back(static_cast<int>(grid.size()));
    mc.raw.push_back(sample.mean);
    mc.raw_se.push_back(sample.se);
    mc.condition_number = std::max(mc.condition_number, sample.condition_number);
    mc.max_jitter = std::max(mc.max_jitter, sample.jitter);
    points.push_back({ladder[level], sample.mean});
  }
  mc.extrapolated = richardson(points, config.order);

  CorrectionReport report;
  report.method = CorrectionMethod::Asymptotic;
  report.value = std::max(0.0, mc.extrapolated) / std::sqrt(static_cast<double>(cal.size()));
  report.source = "monte-carlo";
  report.mc = std::move(mc);
  return report;
}

double delta_star_star_bound(long n, const Matrix& W) {
  return minimize_over_beta(W, n, c_of_n_bound(n), BetaCost::Absolute).value;
}

UpperBoundDiagnostics upper_bound_diagnostics(long n, const Matrix& T, const std::vector<double>& rho,
                                              const std::vector<double>& rho_tilde, double alpha, double delta_n,
                                              double delta_star_star) {
  require_positive_n(n);
  require_square(T);
  const Eigen::Index K = T.rows();
  if (static_cast<Eigen::Index>(rho.size()) != K || static_cast<Eigen::Index>(rho_tilde.size()) != K) {
    throw Error(ErrorCode::DimensionMismatch, "class frequencies do not match K");
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!(rho[static_cast<std::size_t>(k)] > 0.0) || !(rho_tilde[static_cast<std::size_t>(k)] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "class frequencies must be strictly positive");
    }
  }
  UpperBoundDiagnostics out;
  out.M.resize(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index l = 0; l < K; ++l) {
      out.M(k, l) = T(k, l) * rho[static_cast<std::size_t>(l)] / rho_tilde[static_cast<std::size_t>(k)];
    }
  }
  try {
    out.V = invert_partial_pivot(out.M);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularTransition) throw;
    throw Error(ErrorCode::SingularM, "M is numerically singular");
  }
  out.v_term = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < K; ++k) {
    const double row = rho[static_cast<std::size_t>(k)] / rho_tilde[static_cast<std::size_t>(k)] *
                       out.V.row(k).cwiseAbs().sum();
    out.v_term = std::max(out.v_term, row);
  }
  const auto nd = static_cast<double>(n);
  out.phi_n = 3.0 * delta_star_star + 2.0 / nd + std::pow(nd, -0.25) + (out.v_term - 1.0) / (nd + 1.0);
  const Matrix W = invert_partial_pivot(T);
  out.d_n = std::pow(nd, 0.25) * delta_star_star_bound(n, W);
  out.assumption_threshold = -alpha + delta_n + std::sqrt(std::log(2.0 * nd) / (2.0 * nd)) + out.d_n;
  return out;
}

}  // namespace noisycal
