#pragma once

#include <cstdint>
#include <span>

#include "noisycal/types.hpp"

namespace noisycal {

// Gaussian clusters centred on hypercube vertices, one group of clusters per
// class, with exponentially decaying class proportions.
struct SynthConfig {
  int num_classes = 4;
  int dims = 20;
  int clusters_per_class = 2;
  double cube_side = 2.0;
  // Coordinates that carry cluster centres; the rest are pure N(0, 1) noise.
  // 0 picks min(dims, ceil(log2(num_classes * clusters_per_class))).
  int informative_dims = 0;
  long n_train = 10000;
  long n_cal = 5000;
  long n_test = 2000;
  double imbalance_mu = 0.0;
  std::uint64_t seed = 0;

  long total() const { return n_train + n_cal + n_test; }
  int resolved_informative_dims() const;
  // Throws InvalidArgument or InsufficientVertices.
  void validate() const;
};

struct SynthData {
  RowMatrix X;
  LabelVector y;
  RowMatrix centers;            // one row per cluster
  LabelVector cluster_class;    // class of each cluster
};

// Class probabilities proportional to exp(-mu k), k = 0..K-1.
std::vector<double> class_proportions(int K, double mu);

// Draws config.total() rows. Row i depends only on (seed, i) and the centres.
SynthData generate(const SynthConfig& config);

struct SoftmaxOptions {
  double l2 = 1e-3;
  int iterations = 500;
  double learning_rate = 0.1;
};

struct SoftmaxModel {
  Matrix weights;  // (d + 1) x K, last row is the bias
  int iterations = 0;
  double final_loss = 0.0;

  int dims() const { return static_cast<int>(weights.rows()) - 1; }
  int num_classes() const { return static_cast<int>(weights.cols()); }
};

// Full-batch gradient descent on L2-regularized multinomial cross-entropy,
// starting from zero weights. A step that would raise the loss is halved
// until it does not. Throws DegenerateData when fewer than two classes occur.
SoftmaxModel train_softmax(const RowMatrix& X, std::span<const Label> y, int num_classes,
                           const SoftmaxOptions& options = {});

// Softmax of the affine scores. Throws DimensionMismatch.
RowMatrix predict_probs(const SoftmaxModel& model, const RowMatrix& X);

}  // namespace noisycal
