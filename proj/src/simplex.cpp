#include "noisycal/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace noisycal::lp {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

// Standard-form tableau: rows_ x (cols_ + 1); the last column is the rhs.
// Row `m` holds the reduced costs of the phase being solved.
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), data_((m + 1) * (n + 1), 0.0), basis_(m, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double rhs(std::size_t r) const { return at(r, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t width = n_ + 1;
    double* prow = &data_[pr * width];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * width];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

// Runs simplex iterations on the objective row until optimal. Columns with
// allowed[c] == false never enter the basis.
Status iterate(Tableau& t, const std::vector<bool>& allowed, std::size_t& iterations, std::size_t limit) {
  const std::size_t m = t.rows();
  const std::size_t n = t.cols();
  bool bland = false;
  std::size_t degenerate_run = 0;
  while (iterations < limit) {
    std::size_t entering = n;
    double best = -kPivotTol;
    for (std::size_t c = 0; c < n; ++c) {
      if (!allowed[c]) continue;
      const double rc = t.at(m, c);
      if (rc < best) {
        entering = c;
        if (bland) break;
        best = rc;
      }
    }
    if (entering == n) return Status::Optimal;

    std::size_t leaving = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = t.at(r, entering);
      if (a <= kPivotTol) continue;
      const double ratio = t.rhs(r) / a;
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && leaving < m && t.basis()[r] < t.basis()[leaving])) {
        best_ratio = std::min(ratio, best_ratio);
        leaving = r;
      }
    }
    if (leaving == m) return Status::Unbounded;

    if (best_ratio <= 1e-12) {
      if (++degenerate_run >= kDegenerateRunBeforeBland) bland = true;
    } else {
      degenerate_run = 0;
    }
    t.pivot(leaving, entering);
    ++iterations;
  }
  return Status::IterationLimit;
}

}  // namespace

std::size_t LinearProgram::add_variable(double cost, bool is_free) {
  objective.push_back(cost);
  free.push_back(is_free);
  return objective.size() - 1;
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

Solution solve(const LinearProgram& program) {
  const std::size_t num_vars = program.objective.size();
  const std::size_t m = program.constraints.size();

  // Column layout: split variables, then one slack/surplus per inequality,
  // then one artificial per row that needs it.
  std::vector<std::size_t> pos_col(num_vars), neg_col(num_vars, SIZE_MAX);
  std::size_t n = 0;
  for (std::size_t j = 0; j < num_vars; ++j) {
    pos_col[j] = n++;
    if (program.free[j]) neg_col[j] = n++;
  }

  std::vector<double> sign(m, 1.0);
  std::vector<Sense> sense(m);
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = program.constraints[i];
    sense[i] = c.sense;
    if (c.rhs < 0.0) {
      sign[i] = -1.0;
      if (c.sense == Sense::LessEqual) sense[i] = Sense::GreaterEqual;
      else if (c.sense == Sense::GreaterEqual) sense[i] = Sense::LessEqual;
    }
    if (sense[i] != Sense::Equal) slack_col[i] = n++;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (sense[i] != Sense::LessEqual) art_col[i] = n++;
  }

  Tableau t(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = program.constraints[i];
    for (const auto& [var, coef] : c.terms) {
      t.at(i, pos_col[var]) += sign[i] * coef;
      if (neg_col[var] != SIZE_MAX) t.at(i, neg_col[var]) -= sign[i] * coef;
    }
    t.rhs(i) = sign[i] * c.rhs;
    if (sense[i] == Sense::LessEqual) {
      t.at(i, slack_col[i]) = 1.0;
      t.basis()[i] = slack_col[i];
    } else {
      if (sense[i] == Sense::GreaterEqual) t.at(i, slack_col[i]) = -1.0;
      t.at(i, art_col[i]) = 1.0;
      t.basis()[i] = art_col[i];
    }
  }

  Solution solution;
  const std::size_t limit = 50 * (m + n) + 1000;
  std::vector<bool> allowed(n, true);

  // Phase 1: minimize the sum of artificials.
  bool has_artificial = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (art_col[i] == SIZE_MAX) continue;
    has_artificial = true;
    for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= t.at(i, c);
    t.at(m, art_col[i]) = 0.0;
  }
  if (has_artificial) {
    const Status s = iterate(t, allowed, solution.iterations, limit);
    if (s == Status::IterationLimit) {
      solution.status = s;
      return solution;
    }
    if (-t.rhs(m) > kFeasTol * std::max(1.0, static_cast<double>(m))) {
      solution.status = Status::Infeasible;
      return solution;
    }
    // Drive zero-level artificials out of the basis where possible. A row
    // with no usable pivot is redundant and keeps its artificial at zero.
    std::vector<bool> artificial(n, false);
    for (std::size_t i = 0; i < m; ++i) {
      if (art_col[i] != SIZE_MAX) artificial[art_col[i]] = true;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (!artificial[t.basis()[r]]) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (!artificial[c] && std::abs(t.at(r, c)) > kPivotTol) {
          t.pivot(r, c);
          break;
        }
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (artificial[c]) allowed[c] = false;
    }
  }

  // Phase 2 objective row: reduced costs of the original objective.
  for (std::size_t c = 0; c <= n; ++c) t.at(m, c) = 0.0;
  for (std::size_t j = 0; j < num_vars; ++j) {
    t.at(m, pos_col[j]) = program.objective[j];
    if (neg_col[j] != SIZE_MAX) t.at(m, neg_col[j]) = -program.objective[j];
  }
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = t.basis()[r];
    const double cost = t.at(m, b);
    if (cost == 0.0) continue;
    for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= cost * t.at(r, c);
  }

  const Status s = iterate(t, allowed, solution.iterations, limit);
  solution.status = s;
  if (s != Status::Optimal) return solution;

  std::vector<double> column_value(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) column_value[t.basis()[r]] = t.rhs(r);
  solution.x.assign(num_vars, 0.0);
  solution.objective = 0.0;
  for (std::size_t j = 0; j < num_vars; ++j) {
    double v = column_value[pos_col[j]];
    if (neg_col[j] != SIZE_MAX) v -= column_value[neg_col[j]];
    solution.x[j] = v;
    solution.objective += program.objective[j] * v;
  }
  return solution;
}

}  // namespace noisycal::lp
