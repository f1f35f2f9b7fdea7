#pragma once

// Independent oracle for the chain-ladder IBNR: the maximum-likelihood
// Poisson cross-classified model mu_ij = a_i * b_j fitted by iterative
// proportional fitting to the observed incremental triangle. On a complete
// run-off triangle its IBNR equals the chain-ladder IBNR.

#include <cmath>
#include <cstdlib>
#include <vector>

#include "hidden/chainladder.hpp"

namespace oracle {

/// `y[i][j]` is the incremental count for origin period i, development j,
/// observed for j <= n - 1 - i. Returns the model IBNR (sum of the fitted
/// means of the unobserved lower-right cells).
inline double ipf_poisson_ibnr(const std::vector<std::vector<long>>& y) {
  const int n = static_cast<int>(y.size());
  std::vector<double> a(n, 1.0), b(n, 1.0);
  for (int it = 0; it < 20000; ++it) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      double num = 0.0, den = 0.0;
      for (int j = 0; j <= n - 1 - i; ++j) {
        num += static_cast<double>(y[i][j]);
        den += b[j];
      }
      const double next = num / den;
      delta = std::max(delta, std::abs(next - a[i]));
      a[i] = next;
    }
    for (int j = 0; j < n; ++j) {
      double num = 0.0, den = 0.0;
      for (int i = 0; i <= n - 1 - j; ++i) {
        num += static_cast<double>(y[i][j]);
        den += a[i];
      }
      const double next = num / den;
      delta = std::max(delta, std::abs(next - b[j]));
      b[j] = next;
    }
    if (delta < 1e-14) break;
  }
  double ibnr = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = n - i; j < n; ++j) ibnr += a[i] * b[j];
  }
  return ibnr;
}

/// Wraps the incremental triangle as a yearly AggregateTriangle with origin
/// periods `first_year` .. `first_year + n - 1`.
inline hidden::AggregateTriangle yearly_triangle(const std::vector<std::vector<long>>& y,
                                                 int first_year, const hidden::Calendar& cal) {
  const int n = static_cast<int>(y.size());
  hidden::AggregateTriangle tri;
  tri.grid = hidden::GridKind::CalendarYear;
  tri.eval_date = cal.from_civil({first_year + n - 1, 12, 31});
  for (int i = 0; i < n; ++i) {
    std::vector<long> row(y[i].begin(), y[i].begin() + (n - i));
    for (std::size_t j = 1; j < row.size(); ++j) row[j] += row[j - 1];
    tri.cum[first_year + i] = row;
  }
  return tri;
}

}  // namespace oracle
