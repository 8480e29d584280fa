#include "noisycal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "noisycal/error.hpp"
#include "noisycal/parallel.hpp"
#include "noisycal/rng.hpp"

namespace noisycal {
namespace {

constexpr std::uint64_t kCenterStream = 0xc3a5c85c97cb3127ULL;

// Row-wise softmax in place.
void softmax_rows(Matrix& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

Matrix augmented(const RowMatrix& X) {
  Matrix A(X.rows(), X.cols() + 1);
  A.leftCols(X.cols()) = X;
  A.col(X.cols()).setOnes();
  return A;
}

double loss_of(const Matrix& A, const Matrix& weights, std::span<const Label> y, double l2, Matrix* probs_out) {
  Matrix probs = A * weights;
  softmax_rows(probs);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    loss -= std::log(std::max(probs(i, y[static_cast<std::size_t>(i)]), 1e-300));
  }
  loss /= static_cast<double>(probs.rows());
  const auto d = weights.rows() - 1;
  loss += 0.5 * l2 * weights.topRows(d).squaredNorm();
  if (probs_out) *probs_out = std::move(probs);
  return loss;
}

}  // namespace

int SynthConfig::resolved_informative_dims() const {
  if (informative_dims > 0) return informative_dims;
  const int clusters = num_classes * clusters_per_class;
  int needed = 0;
  while ((1LL << needed) < clusters) ++needed;
  return std::max(1, std::min(dims, needed));
}

void SynthConfig::validate() const {
  if (num_classes < 1 || dims < 1 || clusters_per_class < 1) {
    throw Error(ErrorCode::InvalidArgument, "classes, dimensions and clusters per class must be positive");
  }
  if (n_train < 1 || n_cal < 1 || n_test < 1) throw Error(ErrorCode::InvalidArgument, "sample sizes must be positive");
  if (!(cube_side > 0.0)) throw Error(ErrorCode::InvalidArgument, "cube side must be positive");
  if (!(imbalance_mu >= 0.0)) throw Error(ErrorCode::InvalidArgument, "imbalance must be nonnegative");
  const int q = resolved_informative_dims();
  if (q > dims) throw Error(ErrorCode::InvalidArgument, "informative dimensions exceed the dimension");
  const long long clusters = static_cast<long long>(num_classes) * clusters_per_class;
  if (q < 62 && clusters > (1LL << q)) {
    throw Error(ErrorCode::InsufficientVertices, std::to_string(clusters) + " clusters need more than the " +
                                                     std::to_string(1LL << q) + " available vertices");
  }
}

std::vector<double> class_proportions(int K, double mu) {
  std::vector<double> p(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) p[static_cast<std::size_t>(k)] = std::exp(-mu * k);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  const int K = config.num_classes;
  const int q = config.resolved_informative_dims();
  const int clusters = K * config.clusters_per_class;
  const double half = config.cube_side / 2.0;

  // Distinct random vertices, then a seeded shuffle assigns them to classes.
  Engine engine = make_engine(config.seed, kCenterStream);
  std::vector<std::uint64_t> vertices;
  if (q <= 16) {
    vertices.resize(std::size_t{1} << q);
    std::iota(vertices.begin(), vertices.end(), 0);
    std::shuffle(vertices.begin(), vertices.end(), engine);
    vertices.resize(static_cast<std::size_t>(clusters));
  } else {
    std::unordered_set<std::uint64_t> seen;
    const std::uint64_t mask = q >= 64 ? ~0ULL : ((1ULL << q) - 1);
    while (static_cast<int>(vertices.size()) < clusters) {
      const std::uint64_t v = engine() & mask;
      if (seen.insert(v).second) vertices.push_back(v);
    }
  }
  std::vector<int> order(static_cast<std::size_t>(clusters));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), engine);

  SynthData data;
  data.centers = RowMatrix::Zero(clusters, config.dims);
  data.cluster_class.resize(static_cast<std::size_t>(clusters));
  for (int c = 0; c < clusters; ++c) {
    const std::uint64_t v = vertices[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
    for (int j = 0; j < q; ++j) data.centers(c, j) = ((v >> j) & 1ULL) ? half : -half;
    data.cluster_class[static_cast<std::size_t>(c)] = c / config.clusters_per_class;
  }

  const std::vector<double> proportions = class_proportions(K, config.imbalance_mu);
  std::vector<double> cumulative(proportions.size());
  std::partial_sum(proportions.begin(), proportions.end(), cumulative.begin());

  const long n = config.total();
  data.X.resize(n, config.dims);
  data.y.resize(static_cast<std::size_t>(n));
  constexpr long kChunk = 2048;
  const auto chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  parallel_for(chunks, [&](std::size_t chunk) {
    const long begin = static_cast<long>(chunk) * kChunk;
    const long end = std::min(n, begin + kChunk);
    for (long i = begin; i < end; ++i) {
      Engine row_engine = make_engine(config.seed, static_cast<std::uint64_t>(i));
      std::normal_distribution<double> normal;
      const double u = uniform01(row_engine);
      int label = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      label = std::min(label, K - 1);
      const int within = static_cast<int>(uniform01(row_engine) * config.clusters_per_class);
      const int cluster = label * config.clusters_per_class + std::min(within, config.clusters_per_class - 1);
      for (int j = 0; j < config.dims; ++j) data.X(i, j) = data.centers(cluster, j) + normal(row_engine);
      data.y[static_cast<std::size_t>(i)] = label;
    }
  });
  return data;
}

SoftmaxModel train_softmax(const RowMatrix& X, std::span<const Label> y, int num_classes,
                           const SoftmaxOptions& options) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error(ErrorCode::LengthMismatch, "X and y differ in length");
  if (X.rows() < 1) throw Error(ErrorCode::DegenerateData, "no training data");
  std::vector<char> present(static_cast<std::size_t>(num_classes), 0);
  for (const Label label : y) {
    if (label < 0 || label >= num_classes) throw Error(ErrorCode::InvalidArgument, "training label out of range");
    present[static_cast<std::size_t>(label)] = 1;
  }
  if (std::count(present.begin(), present.end(), 1) < 2) {
    throw Error(ErrorCode::DegenerateData, "training labels contain fewer than two classes");
  }

  const Matrix A = augmented(X);
  const auto n = static_cast<double>(A.rows());
  const Eigen::Index d = X.cols();
  Matrix onehot = Matrix::Zero(A.rows(), num_classes);
  for (Eigen::Index i = 0; i < A.rows(); ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;

  SoftmaxModel model;
  model.weights = Matrix::Zero(d + 1, num_classes);
  Matrix probs;
  double loss = loss_of(A, model.weights, y, options.l2, &probs);
  double lr = options.learning_rate;
  for (int it = 0; it < options.iterations; ++it) {
    Matrix grad = A.transpose() * (probs - onehot) / n;
    grad.topRows(d) += options.l2 * model.weights.topRows(d);
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Matrix candidate = model.weights - lr * grad;
      Matrix candidate_probs;
      const double candidate_loss = loss_of(A, candidate, y, options.l2, &candidate_probs);
      if (candidate_loss <= loss) {
        model.weights = candidate;
        probs = std::move(candidate_probs);
        loss = candidate_loss;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    ++model.iterations;
    if (!accepted) break;
  }
  model.final_loss = loss;
  return model;
}

RowMatrix predict_probs(const SoftmaxModel& model, const RowMatrix& X) {
  if (X.cols() != model.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.dims()) + " features, got " +
                                                  std::to_string(X.cols()));
  }
  Matrix logits = augmented(X) * model.weights;
  softmax_rows(logits);
  return logits;
}

}  // namespace noisycal
