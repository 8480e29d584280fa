#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "noisycal/types.hpp"

namespace noisycal {

enum class NoiseFamily { RandomizedResponse, BlockRR, TwoLevelRR, Custom };

std::string to_string(NoiseFamily family);
NoiseFamily parse_noise_family(const std::string& name);

// Parameters of a label-contamination model, T(k, l) = P(noisy = k | true = l).
struct ContaminationSpec {
  NoiseFamily family = NoiseFamily::RandomizedResponse;
  int num_classes = 2;
  double epsilon = 0.0;
  double nu = 0.0;     // TwoLevelRR only
  int blocks = 1;      // BlockRR only
  std::optional<Matrix> custom_matrix;

  static ContaminationSpec randomized_response(int K, double epsilon);
  static ContaminationSpec block(int K, int blocks, double epsilon);
  static ContaminationSpec two_level(int K, double epsilon, double nu);
  static ContaminationSpec custom(Matrix T);

  // Throws Error(InvalidSpec) when an invariant is violated.
  void validate() const;
};

// Intermediate constants of the two-level model inverse.
struct TwoLevelDerived {
  double f = 0.0;
  double g = 0.0;
  double e = 0.0;
  double p = 0.0;
  double h = 0.0;

  static TwoLevelDerived compute(double epsilon, double nu);
};

// Column-stochastic transition matrix together with its inverse.
// Immutable after construction.
class TransitionMatrix {
 public:
  // Validates T (nonnegative, columns summing to 1 within 1e-10) and inverts
  // it by LU with partial pivoting.
  static TransitionMatrix from_matrix(Matrix T);
  // Pairs T with a precomputed inverse; checks ||W T - I||_inf.
  static TransitionMatrix from_pair(Matrix T, Matrix W);

  int num_classes() const { return static_cast<int>(T_.rows()); }
  const Matrix& T() const { return T_; }
  const Matrix& W() const { return W_; }

  // ||T||_inf * ||W||_inf.
  double condition_number() const;

 private:
  TransitionMatrix(Matrix T, Matrix W) : T_(std::move(T)), W_(std::move(W)) {}

  Matrix T_;
  Matrix W_;
};

// Dense inverse by LU with partial pivoting. Throws SingularTransition when a
// pivot falls below 1e-12 * ||A||_inf.
Matrix invert_partial_pivot(const Matrix& A);

// Family closed form for T (or the custom matrix).
Matrix transition_closed_form(const ContaminationSpec& spec);

TransitionMatrix build_transition(const ContaminationSpec& spec);

// W assembled from the family's analytic inverse. InvalidSpec for Custom.
TransitionMatrix closed_form_inverse(const ContaminationSpec& spec);

// Column l is the empirical distribution of the noisy label among samples
// whose true label is l. Throws MissingClass if some class never appears.
TransitionMatrix estimate_transition(std::span<const Label> true_labels, std::span<const Label> noisy_labels,
                                     int num_classes);

// Draws each noisy label from column y_i of T by inverse CDF on one uniform.
// Row i uses its own stream derived from (seed, i).
LabelVector sample_noisy_labels(std::span<const Label> true_labels, const TransitionMatrix& T, std::uint64_t seed);

// CSV: K rows by K columns, row k holds P(noisy = k | true = .), no header.
void write_transition_csv(std::ostream& out, const TransitionMatrix& T);
TransitionMatrix read_transition_csv(std::istream& in);
TransitionMatrix read_transition_csv(const std::string& path);

}  // namespace noisycal
