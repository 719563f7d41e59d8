#include "hypbound/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hypbound {

std::vector<double> SingularValueReport::schatten_partial(double p) const {
  std::vector<double> out;
  out.reserve(values.size());
  double acc = 0;
  for (double s : values) {
    acc += std::pow(s, p);
    out.push_back(acc);
  }
  return out;
}

double SingularValueReport::schatten_sum(double p) const {
  double acc = 0;
  for (double s : values) acc += std::pow(s, p);
  return acc;
}

SingularValueReport make_report(std::vector<double> values, double zero_tol) {
  for (auto& v : values) v = std::max(v, 0.0);
  std::sort(values.begin(), values.end(), std::greater<>());
  SingularValueReport rep;
  rep.values = std::move(values);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t np = 0;
  for (std::size_t i = 0; i < rep.values.size() && rep.values[i] > zero_tol; ++i) {
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(rep.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++np;
  }
  if (np >= 2) {
    const auto n = static_cast<double>(np);
    const double den = n * sxx - sx * sx;
    if (den != 0) rep.fitted_exponent = (n * sxy - sx * sy) / den;
  }
  return rep;
}

std::size_t stable_prefix(std::span<const double> previous, std::span<const double> current, double tol) {
  std::size_t k = 0;
  while (k < previous.size() && k < current.size() && std::abs(previous[k] - current[k]) < tol) ++k;
  return k;
}

}  // namespace hypbound
