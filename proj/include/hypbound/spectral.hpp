#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hypbound {

// Descending singular values of a (truncated) operator plus the summaries
// used for Schatten-class and decay certificates.
struct SingularValueReport {
  std::vector<double> values;  // descending, nonnegative
  double fitted_exponent = 0;  // slope of ln s_n against ln n over nonzero values
  std::size_t stable_prefix = 0;  // leading values unchanged (< tol) versus the previous truncation
  bool has_previous = false;

  // Prefix sums of s_i^p, i = 1..len.
  std::vector<double> schatten_partial(double p) const;
  double schatten_sum(double p) const;
  double norm() const { return values.empty() ? 0.0 : values.front(); }
};

// Sorts descending, clamps tiny negatives, and fits the decay exponent over
// values above `zero_tol`.
SingularValueReport make_report(std::vector<double> values, double zero_tol = 1e-12);

// Number of leading values of `current` within `tol` of `previous`.
std::size_t stable_prefix(std::span<const double> previous, std::span<const double> current, double tol);

}  // namespace hypbound
