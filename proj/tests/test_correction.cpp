#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "noisycal/correction.hpp"
#include "noisycal/error.hpp"
#include "noisycal/rng.hpp"
#include "oracles.hpp"

using namespace noisycal;

namespace {

double root_pi_over_2n(long n) { return std::sqrt(std::numbers::pi / (2.0 * n)); }

double chaining_constant(int K) {
  const double L = std::log(static_cast<double>(K));
  return 24.0 * (2 * L + 1) / (2 * L - 1) * std::sqrt(2.0 * K * L);
}

CalibrationSet uniform_scores(long n, std::uint64_t seed) {
  Engine engine = make_engine(seed, 0);
  RowMatrix s(n, 1);
  for (long i = 0; i < n; ++i) s(i, 0) = uniform01(engine);
  return CalibrationSet::make(s, LabelVector(static_cast<std::size_t>(n), 0));
}

CalibrationSet random_cal(int n, int K, std::uint64_t seed) {
  Engine engine = make_engine(seed, 3);
  RowMatrix s(n, K);
  LabelVector y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) s(i, k) = std::floor(uniform01(engine) * 16.0) / 16.0;
    y[static_cast<std::size_t>(i)] = i < K ? i : std::min(K - 1, static_cast<int>(uniform01(engine) * K));
  }
  return CalibrationSet::make(s, y);
}

std::vector<ContaminationSpec> model_matrix() {
  std::vector<ContaminationSpec> specs;
  for (int K : {2, 4, 8}) {
    for (double eps : {0.05, 0.2}) {
      specs.push_back(ContaminationSpec::randomized_response(K, eps));
      specs.push_back(ContaminationSpec::block(K, 2, eps));
      for (double nu : {0.2, 0.8}) specs.push_back(ContaminationSpec::two_level(K, eps, nu));
    }
  }
  return specs;
}

}  // namespace

TEST(CofN, SinglePointIsHalf) {
  const auto c = c_of_n(1, 20000, 3);
  EXPECT_NEAR(c.mean, 0.5, 3 * c.se);
}

TEST(CofN, WithinEnvelopeAndDeterministic) {
  const auto a = c_of_n(100, 100000, 4);
  EXPECT_LE(a.mean, root_pi_over_2n(100) + 3 * a.se);
  const auto b = c_of_n(100, 100000, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.se, b.se);
}

TEST(CofN, MatchesBirnbaumTingeyMean) {
  for (int n : {2, 5, 10, 30}) {
    const auto c = c_of_n(n, 100000, 17);
    const double exact = oracle::birnbaum_tingey_mean(n);
    EXPECT_NEAR(c.mean, exact, 4 * c.se) << "n = " << n;
    EXPECT_LE(exact, root_pi_over_2n(n));
  }
}

TEST(CofN, IndependentOfWorkerCount) {
  setenv("NOISYCAL_THREADS", "1", 1);
  const auto one = c_of_n(37, 5000, 99);
  setenv("NOISYCAL_THREADS", "3", 1);
  const auto three = c_of_n(37, 5000, 98);  // different key, fresh computation
  const auto three_again = c_of_n(37, 5000, 99);
  unsetenv("NOISYCAL_THREADS");
  EXPECT_EQ(one.mean, three_again.mean);
  EXPECT_NE(three.mean, one.mean);
}

TEST(BTerm, RandomizedResponseBetaZeroesOmega) {
  for (int K : {2, 4, 10}) {
    const auto t = build_transition(ContaminationSpec::randomized_response(K, 0.3));
    const BTerm b = b_term(K, 500, rr_beta(K, 0.3), t.W());
    EXPECT_NEAR(b.value, 0.0, 1e-14);
  }
}

TEST(BTerm, ZeroBetaBothBranches) {
  const auto t = build_transition(ContaminationSpec::randomized_response(4, 0.1));
  BetaVector zero{0.0, Vector::Zero(4)};
  const BTerm b = b_term(4, 1000, zero, t.W());
  const Matrix& W = t.W();
  double colmax = 0.0;
  for (int l = 0; l < 4; ++l) colmax = std::max(colmax, W.col(l).cwiseAbs().sum());
  const double massart = colmax * std::sqrt(std::log(4.0 * 1000 + 1));
  const double chaining = W.cwiseAbs().maxCoeff() * chaining_constant(4);
  EXPECT_NEAR(b.massart, massart, 1e-12);
  EXPECT_NEAR(b.chaining, chaining, 1e-10);
  EXPECT_NEAR(b.value, 2 * std::min(massart, chaining), 1e-12);
  EXPECT_EQ(b.branch, massart < chaining ? BBranch::Massart : BBranch::Chaining);
}

TEST(BTerm, PositivelyHomogeneous) {
  Matrix Omega(3, 3);
  Omega << 0.1, -0.2, 0.05, 0.0, 0.3, -0.1, 0.02, 0.01, -0.4;
  EXPECT_NEAR(b_term_omega(2 * Omega, 77).value, 2 * b_term_omega(Omega, 77).value, 1e-14);
  // Dense Omega with many classes favours the chaining branch.
  const BTerm t = b_term_omega(Matrix::Ones(600, 600), 1000000000);
  EXPECT_EQ(t.branch, BBranch::Chaining);
  EXPECT_NEAR(t.chaining, chaining_constant(600), 1e-9);
}

TEST(BTerm, SingleClassFallsBackToMassart) {
  const BTerm t = b_term_omega(Matrix::Constant(1, 1, 0.5), 100);
  EXPECT_TRUE(t.degenerate_k);
  EXPECT_EQ(t.branch, BBranch::Massart);
  EXPECT_NEAR(t.value, 2 * 0.5 * std::sqrt(std::log(101.0)), 1e-14);
}

TEST(Omega, Recomputable) {
  const auto t = build_transition(ContaminationSpec::two_level(4, 0.2, 0.5));
  BetaVector beta{1.3, Vector(4)};
  beta.beta << -0.1, 0.2, 0.0, -0.3;
  const Matrix O = omega(t.W(), beta);
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) {
      EXPECT_NEAR(O(k, l), t.W()(k, l) - (k == l ? beta.beta0 : 0.0) - beta.beta(k) / 4, 1e-14);
    }
  }
}

TEST(DeltaFs, RandomizedResponseRecoversCn) {
  for (int K : {2, 3, 4, 8, 16}) {
    for (long n : {50L, 1000L, 20000L}) {
      const double c = root_pi_over_2n(n) * 0.9;
      const auto t = build_transition(ContaminationSpec::randomized_response(K, 0.2));
      const CorrectionReport r = delta_fs(n, t.W(), c);
      EXPECT_NEAR(r.value, c, 1e-6) << "K=" << K << " n=" << n;
      EXPECT_NEAR(r.b_value, 0.0, 1e-9);
      ASSERT_TRUE(r.beta_star.has_value());
      EXPECT_NEAR(r.beta_star->mean_sum(), 1.0, 1e-9);
    }
  }
}

TEST(DeltaFs, NoNoise) {
  const CorrectionReport r = delta_fs(400, Matrix::Identity(5, 5), 0.05);
  EXPECT_NEAR(r.value, 0.05, 1e-9);
  EXPECT_NEAR(r.beta_star->beta0, 1.0, 1e-9);
  EXPECT_LE(r.beta_star->beta.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(DeltaFs, CertificateAndDominance) {
  for (const auto& spec : model_matrix()) {
    for (long n : {100L, 1000L, 10000L}) {
      const double c = root_pi_over_2n(n);
      const auto t = build_transition(spec);
      const CorrectionReport r = delta_fs(n, t.W(), c);
      const CorrectionReport s = delta_fs_special(spec, n, c);
      EXPECT_LE(r.value, s.value + 1e-9) << to_string(spec.family) << " K=" << spec.num_classes << " n=" << n;
      // The value is the objective evaluated at the reported beta.
      const BTerm b = b_term(spec.num_classes, n, *r.beta_star, t.W());
      EXPECT_NEAR(r.value, c * r.beta_star->mean_sum() + b.value / std::sqrt(double(n)), 1e-12);
      // No coordinate perturbation improves on the optimum.
      Engine engine = make_engine(n, spec.num_classes);
      for (int trial = 0; trial < 50; ++trial) {
        BetaVector other = *r.beta_star;
        const double step = 1e-3 * (uniform01(engine) - 0.5);
        const int which = static_cast<int>(uniform01(engine) * (spec.num_classes + 1));
        if (which == 0) other.beta0 += step;
        else other.beta(which - 1) += step;
        EXPECT_GE(delta_fs_at(n, t.W(), c, other).value, r.value - 1e-12);
      }
    }
  }
}

TEST(DeltaFs, BruteForceSearchK2) {
  // Grid search over (beta0, beta1, beta2) never beats the LP.
  const auto spec = ContaminationSpec::two_level(2, 0.3, 0.6);
  const auto t = build_transition(spec);
  const long n = 300;
  const double c = root_pi_over_2n(n);
  const double lp = delta_fs(n, t.W(), c).value;
  double best = 1e9;
  for (double b0 = 0.8; b0 <= 1.8; b0 += 0.01) {
    for (double b1 = -1.0; b1 <= 0.5; b1 += 0.02) {
      for (double b2 = -1.0; b2 <= 0.5; b2 += 0.02) {
        BetaVector beta{b0, Vector(2)};
        beta.beta << b1, b2;
        best = std::min(best, delta_fs_at(n, t.W(), c, beta).value);
      }
    }
  }
  EXPECT_LE(lp, best + 1e-12);
  EXPECT_GE(lp, best - 0.02 * c);
}

TEST(DeltaFs, ScalesLikeInverseRootN) {
  const auto t = build_transition(ContaminationSpec::randomized_response(4, 0.1));
  for (long n : {100L, 1000L}) {
    const double ratio = delta_fs(4 * n, t.W(), c_of_n(4 * n, 100000, 1).mean).value /
                         delta_fs(n, t.W(), c_of_n(n, 100000, 1).mean).value;
    EXPECT_GE(ratio, 0.45);
    EXPECT_LE(ratio, 0.55);
  }
}

TEST(DeltaFsSpecial, RandomizedResponseIsCn) {
  EXPECT_NEAR(delta_fs_special(ContaminationSpec::randomized_response(6, 0.15), 800, 0.04).value, 0.04, 1e-12);
}

TEST(DeltaFsSpecial, BlockClosedForm) {
  const int K = 4;
  const int b = 2;
  const double eps = 0.1;
  const long n = 1000;
  const double c = 0.038;
  const auto spec = ContaminationSpec::block(K, b, eps);
  const BetaVector beta = special_beta(spec);
  const double m = 2.0;  // classes per block
  EXPECT_NEAR(beta.beta0, 1 / (1 - eps), 1e-15);
  EXPECT_NEAR(beta.beta(0), -K * eps / (m * (1 - eps)), 1e-15);
  const double B = b_term_omega(omega(oracle::gauss_jordan_inverse(transition_closed_form(spec)), beta), n).value;
  const double expected = (1 - b * eps) / (1 - eps) * c + B / std::sqrt(double(n));
  const CorrectionReport r = delta_fs_special(spec, n, c);
  EXPECT_NEAR(r.value, expected, 1e-12);
  EXPECT_NEAR(r.b_value, B, 1e-12);
}

TEST(DeltaFsSpecial, TwoLevelWithoutDeviationIsRr) {
  const double c = 0.03;
  EXPECT_NEAR(delta_fs_special(ContaminationSpec::two_level(4, 0.2, 0.0), 900, c).value,
              delta_fs_special(ContaminationSpec::randomized_response(4, 0.2), 900, c).value, 1e-9);
}

TEST(DeltaFsSpecial, CustomRejected) {
  EXPECT_THROW(delta_fs_special(ContaminationSpec::custom(Matrix::Identity(2, 2)), 10, 0.1), Error);
}

TEST(Covariance, SinglePointGridIsRowSumVariance) {
  const auto cal = random_cal(60, 3, 1);
  const Matrix W = build_transition(ContaminationSpec::two_level(4, 0.3, 0.4)).W().topLeftCorner(3, 3);
  const GridCovariance cov = estimate_covariance(cal, W, {1.0});
  std::vector<double> g(60);
  for (int i = 0; i < 60; ++i) g[i] = W.col(cal.noisy_labels[i]).sum();
  double mean = 0.0;
  for (const double v : g) mean += v / 60;
  double var = 0.0;
  for (const double v : g) var += (v - mean) * (v - mean) / 60;
  EXPECT_NEAR(cov.sigma(0, 0), var, 1e-13);
}

TEST(Covariance, SingleClassIsEmpiricalBridge) {
  const auto cal = uniform_scores(300, 2);
  const std::vector<double> grid = uniform_grid(0.05);
  const GridCovariance cov = estimate_covariance(cal, Matrix::Ones(1, 1), grid);
  const auto cdfs = EmpiricalCdfs::build(cal);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const double expected = cdfs.F(std::min(grid[a], grid[b])) - cdfs.F(grid[a]) * cdfs.F(grid[b]);
      EXPECT_NEAR(cov.sigma(a, b), expected, 1e-14);
    }
  }
}

TEST(Covariance, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int K = 2 + static_cast<int>(seed % 3);
    const auto cal = random_cal(40, K, seed);
    Matrix T = Matrix::Constant(K, K, 0.1 / K) + 0.9 * Matrix::Identity(K, K);
    const Matrix W = invert_partial_pivot(T);
    const std::vector<double> grid{0.0, 0.0625, 0.2, 0.5, 0.5625, 0.9, 1.0};
    const GridCovariance cov = estimate_covariance(cal, W, grid);
    const Matrix brute = oracle::brute_covariance(cal.scores, cal.noisy_labels, W, grid);
    EXPECT_LE((cov.sigma - brute).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((cov.sigma - cov.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 0; j < cov.sigma.rows(); ++j) EXPECT_GE(cov.sigma(j, j), -1e-12);
  }
}

TEST(Covariance, EmptyClassRejected) {
  RowMatrix s(2, 2);
  s << 0.1, 0.2, 0.3, 0.4;
  try {
    estimate_covariance(CalibrationSet::make(s, {0, 0}), Matrix::Identity(2, 2), {0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyClass);
  }
}

TEST(Gbb, ZeroCovariance) {
  GridCovariance cov{{0.0, 0.5, 1.0}, Matrix::Zero(3, 3)};
  const GbbSample s = simulate_gbb_sup(cov, 1000, 1);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.se, 0.0);
}

TEST(Gbb, SingleStandardNormal) {
  GridCovariance cov{{0.5}, Matrix::Ones(1, 1)};
  const GbbSample s = simulate_gbb_sup(cov, 20000, 2);
  EXPECT_NEAR(s.mean, 0.0, 3 * s.se);
  EXPECT_NEAR(s.se, 1 / std::sqrt(20000.0), 2e-4);
}

TEST(Gbb, MaxOfIndependentPair) {
  // E[max(Z1, Z2)] = 1/sqrt(pi).
  GridCovariance cov{{0.2, 0.8}, Matrix::Identity(2, 2)};
  const GbbSample s = simulate_gbb_sup(cov, 50000, 3);
  EXPECT_NEAR(s.mean, 1 / std::sqrt(std::numbers::pi), 4 * s.se);
  EXPECT_GE(s.mean + 3 * s.se, 0.0);
}

TEST(Gbb, DeterministicAcrossThreads) {
  const auto cal = random_cal(200, 3, 4);
  const Matrix W = invert_partial_pivot(Matrix::Constant(3, 3, 0.05) + 0.85 * Matrix::Identity(3, 3));
  const GridCovariance cov = estimate_covariance(cal, W, uniform_grid(0.02));
  setenv("NOISYCAL_THREADS", "1", 1);
  const GbbSample a = simulate_gbb_sup(cov, 3000, 8);
  setenv("NOISYCAL_THREADS", "4", 1);
  const GbbSample b = simulate_gbb_sup(cov, 3000, 8);
  unsetenv("NOISYCAL_THREADS");
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.se, b.se);
}

TEST(Gbb, IndefiniteMatrixFails) {
  Matrix S(2, 2);
  S << 1.0, 2.0, 2.0, 1.0;
  try {
    simulate_gbb_sup({{0.1, 0.2}, S}, 1000, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CholeskyFailure);
    EXPECT_FALSE(is_validation_error(e.code()));
  }
}

TEST(Richardson, RemovesRootTerm) {
  const double A = 0.87;
  auto model = [&](double h) { return A - 0.58 * std::sqrt(h); };
  const double h = 1.0 / 400;
  EXPECT_NEAR(richardson({{h, model(h)}, {h / 2, model(h / 2)}}, 1), A, 1e-12);
  auto model2 = [&](double x) { return A - 0.58 * std::sqrt(x) + 0.3 * x; };
  EXPECT_NEAR(richardson({{h, model2(h)}, {h / 2, model2(h / 2)}, {h / 4, model2(h / 4)}}, 2), A, 1e-12);
}

TEST(Richardson, ConstantIsIdentity) {
  for (int order : {0, 1, 2}) {
    EXPECT_NEAR(richardson({{0.1, 0.42}, {0.05, 0.42}, {0.025, 0.42}}, order), 0.42, 1e-14);
  }
}

TEST(Richardson, UsesFinestLevels) {
  // The coarsest level is ignored by order 1.
  EXPECT_EQ(richardson({{0.1, 99.0}, {0.05, 1.0}, {0.025, 1.0}}, 1), 1.0);
}

TEST(Richardson, LadderMismatch) {
  try {
    richardson({{0.1, 1.0}, {0.04, 1.0}}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LadderMismatch);
  }
  EXPECT_THROW(richardson({{0.1, 1.0}}, 1), Error);
}

TEST(DeltaAsy, BrownianBridgeConstant) {
  const long n = 10000;
  AsyConfig config;
  config.kind = SupremumKind::Absolute;
  config.seed = 11;
  const CorrectionReport r = delta_asy(uniform_scores(n, 5), Matrix::Ones(1, 1), config);
  const double target = std::sqrt(std::numbers::pi / 2) * std::log(2.0);
  EXPECT_NEAR(r.value * std::sqrt(double(n)), target, 0.02 * target);
  ASSERT_TRUE(r.mc.has_value());
  EXPECT_EQ(r.mc->grid_sizes, (std::vector<int>{801, 1601}));
}

TEST(DeltaAsy, IdentityWithinKsEnvelope) {
  const long n = 2000;
  Engine engine = make_engine(6, 0);
  RowMatrix s(n, 4);
  LabelVector y(n);
  for (long i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) s(i, k) = uniform01(engine);
    y[i] = static_cast<Label>(i % 4);
  }
  AsyConfig config;
  config.M = 20000;
  const CorrectionReport r = delta_asy(CalibrationSet::make(s, y), Matrix::Identity(4, 4), config);
  const double se = (std::sqrt(2.0) * r.mc->raw_se[1] + r.mc->raw_se[0]) / (std::sqrt(2.0) - 1) / std::sqrt(double(n));
  EXPECT_LE(r.value, root_pi_over_2n(n) + 3 * se);
  EXPECT_GT(r.value, 0.0);
}

TEST(DeltaAsy, Deterministic) {
  const auto cal = random_cal(300, 3, 9);
  const Matrix W = invert_partial_pivot(Matrix::Constant(3, 3, 0.05) + 0.85 * Matrix::Identity(3, 3));
  AsyConfig config;
  config.M = 2000;
  config.h_ladder = {0.02, 0.01};
  const auto a = delta_asy(cal, W, config);
  const auto b = delta_asy(cal, W, config);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  config.h_ladder = {0.02, 0.011};
  EXPECT_THROW(delta_asy(cal, W, config), Error);
}

TEST(DeltaStarStar, IdentityModel) {
  EXPECT_NEAR(delta_star_star_bound(500, Matrix::Identity(3, 3)), root_pi_over_2n(500), 1e-12);
}

TEST(DeltaStarStar, RandomizedResponsePlugIn) {
  const double eps = 0.1;
  const long n = 1000;
  const auto t = build_transition(ContaminationSpec::randomized_response(4, eps));
  const double plug_in = root_pi_over_2n(n) * (1 / (1 - eps) + eps / (1 - eps));
  const double bound = delta_star_star_bound(n, t.W());
  EXPECT_NEAR(bound, plug_in, 1e-9);
}

TEST(DeltaStarStar, DominatesSignedObjective) {
  for (const auto& spec : model_matrix()) {
    const long n = 700;
    const auto t = build_transition(spec);
    const double bound = delta_star_star_bound(n, t.W());
    EXPECT_GE(bound + 1e-12, delta_fs(n, t.W(), root_pi_over_2n(n)).value);
  }
}

TEST(Diagnostics, IdentityBracketVanishes) {
  const auto d = upper_bound_diagnostics(1000, Matrix::Identity(3, 3), {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, 0.1, 0.01, 0.02);
  EXPECT_NEAR(d.v_term, 1.0, 1e-14);
  EXPECT_NEAR(d.phi_n, 3 * 0.02 + 2.0 / 1000 + std::pow(1000.0, -0.25), 1e-14);
}

TEST(Diagnostics, HandValueK2) {
  Matrix T(2, 2);
  T << 0.9, 0.1, 0.1, 0.9;
  const double dss = 1.5 * root_pi_over_2n(100);
  const auto d = upper_bound_diagnostics(100, T, {0.5, 0.5}, {0.5, 0.5}, 0.1, 0.05, dss);
  Matrix V(2, 2);
  V << 1.125, -0.125, -0.125, 1.125;
  EXPECT_LE((d.V - V).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(d.v_term, 1.25, 1e-14);
  EXPECT_NEAR(d.phi_n, 3 * dss + 0.02 + 0.31622776601683794 + 0.25 / 101, 1e-12);
  const double d_n = std::pow(100.0, 0.25) * delta_star_star_bound(100, V);
  EXPECT_NEAR(d.d_n, d_n, 1e-12);
  EXPECT_NEAR(d.assumption_threshold, -0.1 + 0.05 + std::sqrt(std::log(200.0) / 200.0) + d_n, 1e-12);
}

TEST(Diagnostics, SingularM) {
  Matrix T(2, 2);
  T << 0.5, 0.5, 0.5, 0.5;
  try {
    upper_bound_diagnostics(10, T, {0.5, 0.5}, {0.5, 0.5}, 0.1, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularM);
  }
}

TEST(Diagnostics, PhiDecreasesInN) {
  const auto t = build_transition(ContaminationSpec::randomized_response(2, 0.2));
  double previous = INFINITY;
  for (long n : {100L, 1000L, 10000L, 100000L}) {
    const double dss = delta_star_star_bound(n, t.W());
    const double phi = upper_bound_diagnostics(n, t.T(), {0.5, 0.5}, {0.5, 0.5}, 0.1, 0.0, dss).phi_n;
    EXPECT_LT(phi, previous);
    previous = phi;
  }
}

TEST(Report, JsonFields) {
  const auto t = build_transition(ContaminationSpec::randomized_response(3, 0.1));
  const auto j = to_json(delta_fs(100, t.W(), 0.1));
  EXPECT_EQ(j["method"], "finite-sample");
  EXPECT_TRUE(j["beta_star"].is_object());
  EXPECT_EQ(j["beta_star"]["beta"].size(), 3u);
  EXPECT_TRUE(j["mc_diagnostics"].is_null());
  EXPECT_TRUE(j["branch"].is_string());
}
