#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace noisycal::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Constraint {
  std::vector<std::pair<std::size_t, double>> terms;  // (variable, coefficient)
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// minimize objective . x subject to the constraints. Variables are
// nonnegative unless flagged free.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<bool> free;
  std::vector<Constraint> constraints;

  std::size_t add_variable(double cost, bool is_free = false);
  void add_constraint(Constraint c) { constraints.push_back(std::move(c)); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(Status status);

struct Solution {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

// Dense two-phase primal simplex. Dantzig pricing, switching to Bland's rule
// after a run of degenerate pivots so that cycling cannot occur. Intended for
// the small programs built by the correction module (a few hundred rows).
Solution solve(const LinearProgram& program);

}  // namespace noisycal::lp
