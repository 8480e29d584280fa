#pragma once

// Independent reference implementations used only by the tests. They follow
// the defining formulas directly and share no code with the library beyond
// plain data types.

#include <algorithm>
#include <cmath>
#include <vector>

#include "noisycal/types.hpp"

namespace oracle {

using noisycal::Label;
using noisycal::Matrix;
using noisycal::RowMatrix;

// Gauss-Jordan inverse with partial pivoting, written out longhand.
inline Matrix gauss_jordan_inverse(const Matrix& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<std::vector<double>> m(n, std::vector<double>(2 * n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m[i][j] = A(i, j);
    m[i][n + i] = 1.0;
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    std::swap(m[col], m[pivot]);
    const double p = m[col][col];
    for (auto& v : m[col]) v /= p;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      for (int j = 0; j < 2 * n; ++j) m[r][j] -= f * m[col][j];
    }
  }
  Matrix inv(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) inv(i, j) = m[i][n + j];
  }
  return inv;
}

inline double kahan_add(double& sum, double& comp, double term) {
  const double y = term - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
  return sum;
}

// Delta-hat at every sorted own score by direct counting over all points,
// same term grouping and summation order as the definition.
inline std::vector<double> brute_delta_hat(const RowMatrix& scores, const std::vector<Label>& labels,
                                           const Matrix& W) {
  const int n = static_cast<int>(labels.size());
  const int K = static_cast<int>(scores.cols());
  std::vector<double> own(n);
  for (int i = 0; i < n; ++i) own[i] = scores(i, labels[i]);
  std::vector<double> sorted = own;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> n_l(K, 0);
  for (const Label y : labels) ++n_l[y];
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double t = sorted[i];
    double sum = 0.0;
    double comp = 0.0;
    for (int l = 0; l < K; ++l) {
      const double rho = static_cast<double>(n_l[l]) / n;
      for (int k = 0; k < K; ++k) {
        int count = 0;
        for (int j = 0; j < n; ++j) {
          if (labels[j] == l && scores(j, k) <= t) ++count;
        }
        kahan_add(sum, comp, W(k, l) * rho * (static_cast<double>(count) / n_l[l]));
      }
    }
    int below = 0;
    for (int j = 0; j < n; ++j) below += own[j] <= t;
    out[i] = sum - static_cast<double>(below) / n;
  }
  return out;
}

// Membership of i (1-based position) in the adaptive index set.
inline std::vector<bool> brute_index_set(const std::vector<double>& dh, double alpha, double delta, bool optimistic) {
  const int n = static_cast<int>(dh.size());
  std::vector<bool> in(n);
  for (int i = 1; i <= n; ++i) {
    const double lhs = static_cast<double>(i) / n;
    const double inner = optimistic ? std::max(dh[i - 1] - delta, -(1.0 - alpha) / n) : dh[i - 1] - delta;
    in[i - 1] = lhs >= 1.0 - alpha - inner;
  }
  return in;
}

// Plug-in covariance by the double sum over (l, k, k') and points, O(N^2 n K^2).
inline Matrix brute_covariance(const RowMatrix& scores, const std::vector<Label>& labels, const Matrix& W,
                               const std::vector<double>& grid) {
  const int n = static_cast<int>(labels.size());
  const int K = static_cast<int>(scores.cols());
  const int N = static_cast<int>(grid.size());
  std::vector<int> n_l(K, 0);
  for (const Label y : labels) ++n_l[y];
  auto mean_f = [&](double t) {
    double v = 0.0;
    for (int l = 0; l < K; ++l) {
      for (int k = 0; k < K; ++k) {
        int c = 0;
        for (int i = 0; i < n; ++i) c += labels[i] == l && scores(i, k) <= t;
        if (n_l[l] > 0) v += W(k, l) * (static_cast<double>(n_l[l]) / n) * c / n_l[l];
      }
    }
    return v;
  };
  std::vector<double> mu(N);
  for (int a = 0; a < N; ++a) mu[a] = mean_f(grid[a]);
  Matrix G(N, N);
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      double v = 0.0;
      for (int l = 0; l < K; ++l) {
        for (int k = 0; k < K; ++k) {
          for (int k2 = 0; k2 < K; ++k2) {
            int c = 0;
            for (int i = 0; i < n; ++i) c += labels[i] == l && scores(i, k) <= grid[a] && scores(i, k2) <= grid[b];
            if (n_l[l] > 0) v += W(k, l) * W(k2, l) * (static_cast<double>(n_l[l]) / n) * c / n_l[l];
          }
        }
      }
      G(a, b) = v - mu[a] * mu[b];
    }
  }
  return G;
}

// Exact E[D_n^+] from the Birnbaum-Tingey distribution,
// P(D_n^+ >= x) = x sum_{j <= n(1-x)} C(n,j) (1-x-j/n)^(n-j) (x+j/n)^(j-1),
// integrated over [0, 1] with composite Simpson.
inline double birnbaum_tingey_mean(int n, int panels = 20000) {
  auto tail = [n](double x) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    double s = 0.0;
    const int jmax = static_cast<int>(std::floor(n * (1.0 - x)));
    for (int j = 0; j <= jmax; ++j) {
      const double a = 1.0 - x - static_cast<double>(j) / n;
      const double b = x + static_cast<double>(j) / n;
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
      const double log_a = (n - j) == 0 ? 0.0 : (a <= 0.0 ? -INFINITY : (n - j) * std::log(a));
      s += std::exp(log_binom + log_a + (j - 1) * std::log(b));
    }
    return x * s;
  };
  const double h = 1.0 / panels;
  double total = tail(0.0) + tail(1.0);
  for (int i = 1; i < panels; ++i) total += (i % 2 ? 4.0 : 2.0) * tail(i * h);
  return total * h / 3.0;
}

}  // namespace oracle
