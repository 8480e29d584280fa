#include "noisycal/noise_model.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "noisycal/csv.hpp"
#include "noisycal/error.hpp"
#include "noisycal/rng.hpp"

namespace noisycal {
namespace {

double inf_norm(const Matrix& A) { return A.cwiseAbs().rowwise().sum().maxCoeff(); }

void check_stochastic(const Matrix& T, double tol) {
  if (T.rows() != T.cols() || T.rows() == 0) {
    throw Error(ErrorCode::InvalidSpec, "transition matrix must be square and nonempty");
  }
  if (!T.allFinite()) throw Error(ErrorCode::InvalidSpec, "transition matrix has non-finite entries");
  if ((T.array() < 0.0).any()) throw Error(ErrorCode::InvalidSpec, "transition matrix has negative entries");
  for (Eigen::Index l = 0; l < T.cols(); ++l) {
    const double sum = T.col(l).sum();
    if (std::abs(sum - 1.0) > tol) {
      throw Error(ErrorCode::InvalidSpec,
                  "column " + std::to_string(l + 1) + " sums to " + csv::format_double(sum) + ", not 1",
                  static_cast<int>(l));
    }
  }
}

// Block-diagonal matrix with `blocks` constant blocks of ones.
Matrix block_ones(int K, int blocks) {
  const int m = K / blocks;
  Matrix B = Matrix::Zero(K, K);
  for (int b = 0; b < blocks; ++b) B.block(b * m, b * m, m, m).setOnes();
  return B;
}

}  // namespace

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::RandomizedResponse: return "rr";
    case NoiseFamily::BlockRR: return "block-rr";
    case NoiseFamily::TwoLevelRR: return "two-level-rr";
    case NoiseFamily::Custom: return "custom";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "rr" || name == "randomized-response") return NoiseFamily::RandomizedResponse;
  if (name == "block-rr" || name == "block") return NoiseFamily::BlockRR;
  if (name == "two-level-rr" || name == "two-level") return NoiseFamily::TwoLevelRR;
  if (name == "custom") return NoiseFamily::Custom;
  throw Error(ErrorCode::InvalidSpec, "unknown contamination model '" + name + "'");
}

ContaminationSpec ContaminationSpec::randomized_response(int K, double epsilon) {
  ContaminationSpec spec;
  spec.family = NoiseFamily::RandomizedResponse;
  spec.num_classes = K;
  spec.epsilon = epsilon;
  return spec;
}

ContaminationSpec ContaminationSpec::block(int K, int blocks, double epsilon) {
  ContaminationSpec spec;
  spec.family = NoiseFamily::BlockRR;
  spec.num_classes = K;
  spec.blocks = blocks;
  spec.epsilon = epsilon;
  return spec;
}

ContaminationSpec ContaminationSpec::two_level(int K, double epsilon, double nu) {
  ContaminationSpec spec;
  spec.family = NoiseFamily::TwoLevelRR;
  spec.num_classes = K;
  spec.epsilon = epsilon;
  spec.nu = nu;
  return spec;
}

ContaminationSpec ContaminationSpec::custom(Matrix T) {
  ContaminationSpec spec;
  spec.family = NoiseFamily::Custom;
  spec.num_classes = static_cast<int>(T.rows());
  spec.custom_matrix = std::move(T);
  return spec;
}

void ContaminationSpec::validate() const {
  if (num_classes < 1) throw Error(ErrorCode::InvalidSpec, "number of classes must be positive");
  switch (family) {
    case NoiseFamily::Custom:
      if (!custom_matrix) throw Error(ErrorCode::InvalidSpec, "custom model requires a matrix");
      if (custom_matrix->rows() != num_classes) {
        throw Error(ErrorCode::InvalidSpec, "custom matrix size does not match the number of classes");
      }
      check_stochastic(*custom_matrix, 1e-12);
      return;
    case NoiseFamily::BlockRR:
      if (blocks < 1 || num_classes % blocks != 0) {
        throw Error(ErrorCode::InvalidSpec, "block count must divide the number of classes");
      }
      break;
    case NoiseFamily::TwoLevelRR:
      if (num_classes % 2 != 0) throw Error(ErrorCode::InvalidSpec, "two-level model needs an even K");
      if (!(nu >= 0.0 && nu <= 1.0)) throw Error(ErrorCode::InvalidSpec, "nu must lie in [0, 1]");
      break;
    case NoiseFamily::RandomizedResponse:
      break;
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidSpec, "epsilon must lie in [0, 1)");
}

TwoLevelDerived TwoLevelDerived::compute(double epsilon, double nu) {
  TwoLevelDerived d;
  const double q = 1.0 - epsilon;
  d.f = epsilon * (1.0 + nu);
  d.g = epsilon * (1.0 - nu);
  d.e = (epsilon * (1.0 + nu) - epsilon * epsilon * (1.0 - nu)) / (q + d.f / 2.0);
  d.p = (1.0 / q) * d.e / (q + d.e / 2.0);
  d.h = d.g / (q * q) * (1.0 - d.f / (2.0 * (q + d.f / 2.0))) * (1.0 - d.e / (2.0 * (q + d.e / 2.0)));
  return d;
}

Matrix invert_partial_pivot(const Matrix& A) {
  const Eigen::PartialPivLU<Matrix> lu(A);
  const double tol = 1e-12 * inf_norm(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > tol)) {
    throw Error(ErrorCode::SingularTransition,
                "matrix is numerically singular (smallest pivot " + csv::format_double(min_pivot) + ")");
  }
  return lu.inverse();
}

TransitionMatrix TransitionMatrix::from_matrix(Matrix T) {
  check_stochastic(T, 1e-10);
  Matrix W = invert_partial_pivot(T);
  return TransitionMatrix(std::move(T), std::move(W));
}

TransitionMatrix TransitionMatrix::from_pair(Matrix T, Matrix W) {
  check_stochastic(T, 1e-10);
  if (W.rows() != T.rows() || W.cols() != T.cols()) {
    throw Error(ErrorCode::InvalidSpec, "inverse has the wrong shape");
  }
  const Matrix residual = W * T - Matrix::Identity(T.rows(), T.cols());
  if (inf_norm(residual) > 1e-10 * std::max(1.0, inf_norm(W))) {
    throw Error(ErrorCode::SingularTransition, "supplied inverse does not invert T");
  }
  return TransitionMatrix(std::move(T), std::move(W));
}

double TransitionMatrix::condition_number() const { return inf_norm(T_) * inf_norm(W_); }

Matrix transition_closed_form(const ContaminationSpec& spec) {
  spec.validate();
  const int K = spec.num_classes;
  const double eps = spec.epsilon;
  const Matrix I = Matrix::Identity(K, K);
  switch (spec.family) {
    case NoiseFamily::RandomizedResponse:
      return (1.0 - eps) * I + (eps / K) * Matrix::Ones(K, K);
    case NoiseFamily::BlockRR: {
      const int m = K / spec.blocks;
      return (1.0 - eps) * I + (eps / m) * block_ones(K, spec.blocks);
    }
    case NoiseFamily::TwoLevelRR: {
      const int half = K / 2;
      const Matrix diag_block = (1.0 - eps) * Matrix::Identity(half, half) +
                                (eps / K) * (1.0 + spec.nu) * Matrix::Ones(half, half);
      const Matrix off_block = (eps / K) * (1.0 - spec.nu) * Matrix::Ones(half, half);
      Matrix T(K, K);
      T << diag_block, off_block, off_block, diag_block;
      return T;
    }
    case NoiseFamily::Custom:
      return *spec.custom_matrix;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown family");
}

TransitionMatrix build_transition(const ContaminationSpec& spec) {
  return TransitionMatrix::from_matrix(transition_closed_form(spec));
}

TransitionMatrix closed_form_inverse(const ContaminationSpec& spec) {
  spec.validate();
  const int K = spec.num_classes;
  const double eps = spec.epsilon;
  const double q = 1.0 - eps;
  const Matrix I = Matrix::Identity(K, K);
  Matrix W;
  switch (spec.family) {
    case NoiseFamily::RandomizedResponse:
      W = (1.0 / q) * I - (eps / (K * q)) * Matrix::Ones(K, K);
      break;
    case NoiseFamily::BlockRR: {
      const int m = K / spec.blocks;
      W = (1.0 / q) * I - (eps / (m * q)) * block_ones(K, spec.blocks);
      break;
    }
    case NoiseFamily::TwoLevelRR: {
      const auto d = TwoLevelDerived::compute(eps, spec.nu);
      const int half = K / 2;
      const Matrix diag_block = (1.0 / q) * Matrix::Identity(half, half) - (d.p / K) * Matrix::Ones(half, half);
      const Matrix off_block = -(d.h / K) * Matrix::Ones(half, half);
      W.resize(K, K);
      W << diag_block, off_block, off_block, diag_block;
      break;
    }
    case NoiseFamily::Custom:
      throw Error(ErrorCode::InvalidSpec, "custom models have no closed-form inverse");
  }
  return TransitionMatrix::from_pair(transition_closed_form(spec), std::move(W));
}

TransitionMatrix estimate_transition(std::span<const Label> true_labels, std::span<const Label> noisy_labels,
                                     int num_classes) {
  if (true_labels.size() != noisy_labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  }
  if (true_labels.empty()) throw Error(ErrorCode::InvalidArgument, "no labels supplied");
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const Label y = true_labels[i];
    const Label yn = noisy_labels[i];
    if (y < 0 || y >= num_classes || yn < 0 || yn >= num_classes) {
      throw Error(ErrorCode::InvalidArgument, "label out of range at position " + std::to_string(i));
    }
    ++counts(yn, y);
  }
  Matrix T(num_classes, num_classes);
  for (int l = 0; l < num_classes; ++l) {
    const int column_total = counts.col(l).sum();
    if (column_total == 0) {
      throw Error(ErrorCode::MissingClass, "class " + std::to_string(l + 1) + " never appears among true labels",
                  l);
    }
    for (int k = 0; k < num_classes; ++k) T(k, l) = static_cast<double>(counts(k, l)) / column_total;
  }
  return TransitionMatrix::from_matrix(std::move(T));
}

LabelVector sample_noisy_labels(std::span<const Label> true_labels, const TransitionMatrix& T, std::uint64_t seed) {
  const int K = T.num_classes();
  LabelVector noisy(true_labels.size());
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const Label y = true_labels[i];
    if (y < 0 || y >= K) throw Error(ErrorCode::InvalidArgument, "label out of range at position " + std::to_string(i));
    const double u = hashed_uniform(seed, i);
    double cumulative = 0.0;
    Label drawn = K - 1;
    for (int k = 0; k < K; ++k) {
      cumulative += T.T()(k, y);
      if (u < cumulative) {
        drawn = k;
        break;
      }
    }
    // Trailing zero-probability labels are never drawn through roundoff.
    while (drawn > 0 && T.T()(drawn, y) == 0.0) --drawn;
    noisy[i] = drawn;
  }
  return noisy;
}

void write_transition_csv(std::ostream& out, const TransitionMatrix& T) {
  const int K = T.num_classes();
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      if (l > 0) out << ',';
      out << csv::format_double(T.T()(k, l));
    }
    out << '\n';
  }
}

TransitionMatrix read_transition_csv(std::istream& in) {
  const auto rows = csv::read_rows(in);
  const auto K = static_cast<Eigen::Index>(rows.size());
  if (K == 0) throw Error(ErrorCode::ParseError, "transition file is empty");
  Matrix T(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (static_cast<Eigen::Index>(row.fields.size()) != K) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(row.line) + ": expected " + std::to_string(K) + " columns",
                  static_cast<int>(row.line));
    }
    for (Eigen::Index l = 0; l < K; ++l) T(k, l) = csv::parse_double(row.fields[static_cast<std::size_t>(l)], row.line);
  }
  // Decimal files carry limited precision: accept columns within 1e-6 of
  // stochastic and rescale them exactly.
  check_stochastic(T, 1e-6);
  for (Eigen::Index l = 0; l < K; ++l) T.col(l) /= T.col(l).sum();
  return TransitionMatrix::from_matrix(std::move(T));
}

TransitionMatrix read_transition_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_transition_csv(in);
}

}  // namespace noisycal
