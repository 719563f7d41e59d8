#include "hypbound/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypbound/error.hpp"
#include "hypbound/parallel.hpp"

namespace hypbound {

namespace {

void require_probability(const StepFunction& phi, const CylinderMeasure& mu) {
  if (phi.rank() != mu.rank()) throw DomainError("function and measure live on different boundaries");
  if (!mu.is_probability()) throw DomainError("expectation needs a probability measure");
}

struct Moments {
  ComplexRational first;
  Rational second;
};

Moments moments(const StepFunction& phi, const std::vector<Word>& phi_cells, const Word& g,
                const CylinderMeasure& mu) {
  Moments m;
  for (std::size_t i = 0; i < phi_cells.size(); ++i) {
    const auto& v = phi.values()[i];
    if (v.is_zero()) continue;
    const auto w = preimage_mass(mu, g, phi_cells[i]);
    m.first += v * w;
    m.second += v.norm_sq() * w;
  }
  return m;
}

Rational variance(const Moments& m) { return m.second - m.first.norm_sq(); }

double sqrt_rational(const Rational& q) { return std::sqrt(to_double(q)); }

}  // namespace

ComplexRational expectation(const StepFunction& phi, const Word& g, const CylinderMeasure& mu) {
  require_probability(phi, mu);
  return moments(phi, cells(phi.rank(), phi.depth()), g, mu).first;
}

Deviation deviation(const StepFunction& phi, const Word& g, const CylinderMeasure& mu) {
  require_probability(phi, mu);
  const auto v = variance(moments(phi, cells(phi.rank(), phi.depth()), g, mu));
  return {v, sqrt_rational(v)};
}

Rational deviation_double_integral(const StepFunction& phi, const Word& g, const CylinderMeasure& mu) {
  require_probability(phi, mu);
  const auto cs = cells(phi.rank(), phi.depth());
  std::vector<Rational> pushed;
  pushed.reserve(cs.size());
  for (const auto& c : cs) pushed.push_back(preimage_mass(mu, g, c));
  Rational acc = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = 0; j < cs.size(); ++j) {
      const auto diff = phi.values()[i] - phi.values()[j];
      acc += diff.norm_sq() * pushed[i] * pushed[j];
    }
  }
  return acc / 2;
}

double DeviationEntry::sigma() const { return sqrt_rational(sigma_sq); }

const DeviationEntry* DeviationTable::find(const Word& g) const {
  for (const auto& e : entries) {
    if (e.g == g) return &e;
  }
  return nullptr;
}

void recompute_shell_maxima(DeviationTable& table) {
  table.shell_max_sq.assign(table.radius + 1, Rational(0));
  for (const auto& e : table.entries) {
    if (e.g.length() > table.radius) throw DomainError("table entry beyond the stated radius");
    auto& slot = table.shell_max_sq[e.g.length()];
    if (e.sigma_sq > slot) slot = e.sigma_sq;
  }
}

DeviationTable deviation_table(const StepFunction& phi, const CylinderMeasure& mu, std::size_t radius,
                               const DeviationTableOptions& options) {
  require_probability(phi, mu);
  const std::size_t n = phi.rank();
  const double ball = 1.0 + static_cast<double>(n) / (static_cast<double>(n) - 1.0) *
                                (std::pow(2.0 * n - 1.0, static_cast<double>(radius)) - 1.0);
  const double cells_needed = ball * std::pow(2.0 * n - 1.0, static_cast<double>(phi.depth() + radius));
  if (cells_needed > options.cell_cap) {
    throw CapacityError("deviation table of radius " + std::to_string(radius) + " needs ~" +
                        std::to_string(cells_needed) + " partition cells, above the configured cap");
  }

  std::vector<Word> words;
  for (std::size_t k = 0; k <= radius; ++k) {
    auto layer = words_of_length(n, k);
    words.insert(words.end(), std::make_move_iterator(layer.begin()), std::make_move_iterator(layer.end()));
  }
  const auto phi_cells = cells(n, phi.depth());

  DeviationTable table;
  table.rank = n;
  table.radius = radius;
  table.entries.resize(words.size());
  parallel_chunks(words.size(), resolve_threads(options.threads), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto m = moments(phi, phi_cells, words[i], mu);
      table.entries[i] = {words[i], m.first, variance(m)};
    }
  });
  recompute_shell_maxima(table);
  return table;
}

DecayFit decay_fit(const DeviationTable& table) {
  DecayFit fit;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 1; k < table.shell_max_sq.size(); ++k) {
    const auto& m = table.shell_max_sq[k];
    if (sgn(m) == 0) continue;
    pts.emplace_back(static_cast<double>(k), 0.5 * std::log(to_double(m)));
  }
  if (pts.empty() && std::all_of(table.shell_max_sq.begin(), table.shell_max_sq.end(),
                                 [](const Rational& q) { return sgn(q) == 0; })) {
    fit.constant = true;
    return fit;
  }
  if (pts.size() < 3) throw DomainError("decay fit needs at least 3 shells with nonzero deviation");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto np = static_cast<double>(pts.size());
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.rate = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  const double intercept = (sy - fit.rate * sx) / np;
  fit.constant_c = std::exp(intercept);
  double ss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (intercept + fit.rate * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / np);
  fit.shells_used = pts.size();
  return fit;
}

std::string to_string(SummabilityVerdict v) {
  switch (v) {
    case SummabilityVerdict::converges_geometric:
      return "converges-geometric";
    case SummabilityVerdict::diverges:
      return "diverges";
    case SummabilityVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

SummabilityCertificate lp_certificate(const DeviationTable& table, double p) {
  if (!(p > 0) || !std::isfinite(p)) throw DomainError("summability exponent p must be positive");
  if (table.radius < 4) throw DomainError("lp certificate needs a table of radius >= 4");
  SummabilityCertificate cert;
  cert.p = p;
  const std::size_t R = table.radius;
  const bool even = std::floor(p) == p && static_cast<long>(p) % 2 == 0 && p <= 64;
  cert.exact = even;
  cert.shell_sums.assign(R + 1, 0.0);
  if (even) cert.shell_sums_exact.assign(R + 1, Rational(0));
  for (const auto& e : table.entries) {
    const auto k = e.g.length();
    if (even) {
      cert.shell_sums_exact[k] += pow(e.sigma_sq, static_cast<unsigned>(p / 2));
    } else {
      cert.shell_sums[k] += std::pow(e.sigma(), p);
    }
  }
  if (even) {
    for (std::size_t k = 0; k <= R; ++k) cert.shell_sums[k] = to_double(cert.shell_sums_exact[k]);
  }

  cert.k0 = R / 2 + 1;
  cert.min_shell_sum = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= R; ++k) cert.min_shell_sum = std::min(cert.min_shell_sum, cert.shell_sums[k]);

  bool all_zero = true;
  bool all_below = true;
  bool all_above = true;
  for (std::size_t k = cert.k0; k <= R; ++k) {
    if (cert.shell_sums[k] != 0 || (even && sgn(cert.shell_sums_exact[k]) != 0)) all_zero = false;
  }
  for (std::size_t k = cert.k0; k < R; ++k) {
    double ratio;
    bool ge_one;
    if (even) {
      const auto& a = cert.shell_sums_exact[k];
      const auto& b = cert.shell_sums_exact[k + 1];
      if (sgn(a) == 0) {
        ratio = sgn(b) == 0 ? 0.0 : std::numeric_limits<double>::infinity();
        ge_one = sgn(b) != 0;
      } else {
        const Rational r = b / a;
        ratio = to_double(r);
        ge_one = r >= 1;
      }
    } else {
      const double a = cert.shell_sums[k];
      const double b = cert.shell_sums[k + 1];
      ratio = a == 0 ? (b == 0 ? 0.0 : std::numeric_limits<double>::infinity()) : b / a;
      ge_one = ratio >= 1.0;
    }
    cert.ratios.push_back(ratio);
    if (ge_one) all_below = false;
    if (!ge_one) all_above = false;
  }

  if (all_zero) {
    cert.verdict = SummabilityVerdict::converges_geometric;
    cert.ratio_bound = 0;
  } else if (all_below) {
    cert.verdict = SummabilityVerdict::converges_geometric;
    cert.ratio_bound = *std::max_element(cert.ratios.begin(), cert.ratios.end());
  } else if (all_above) {
    cert.verdict = SummabilityVerdict::diverges;
    cert.ratio_bound = *std::min_element(cert.ratios.begin(), cert.ratios.end());
  } else {
    cert.verdict = SummabilityVerdict::inconclusive;
    cert.ratio_bound = *std::max_element(cert.ratios.begin(), cert.ratios.end());
  }
  return cert;
}

ExtensionLimit extension_limit(const StepFunction& phi, const Word& xi_prefix, std::size_t radius,
                               const CylinderMeasure& mu) {
  require_probability(phi, mu);
  if (xi_prefix.length() < phi.depth()) {
    throw RefinementError("boundary point not resolvable at the step function's depth", phi.depth());
  }
  if (xi_prefix.length() < radius) {
    throw RefinementError("boundary point prefix shorter than the requested radius", radius);
  }
  ExtensionLimit out;
  out.boundary_value = phi.value_on(xi_prefix);
  const bool real = std::all_of(phi.values().begin(), phi.values().end(),
                                [](const ComplexRational& z) { return sgn(z.im) == 0; });
  const auto phi_cells = cells(phi.rank(), phi.depth());
  for (std::size_t k = 0; k <= radius; ++k) {
    const auto e = moments(phi, phi_cells, xi_prefix.prefix(k), mu).first;
    const auto diff = e - out.boundary_value;
    if (real) out.errors.push_back(abs(diff.re));
    out.errors_float.push_back(std::sqrt(to_double(diff.norm_sq())));
  }
  return out;
}

double lipschitz_norm(const StepFunction& phi, double epsilon) {
  const auto cs = cells(phi.rank(), phi.depth());
  double best = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      const double diff = std::sqrt(to_double((phi.values()[i] - phi.values()[j]).norm_sq()));
      if (diff == 0) continue;
      const auto l = common_prefix_length(cs[i], cs[j]);
      best = std::max(best, diff / std::exp(-epsilon * static_cast<double>(l)));
    }
  }
  return best;
}

ComparableInvarianceReport comparable_invariance(const StepFunction& phi, std::size_t density_depth,
                                                 std::span<const Rational> density, const Rational& c,
                                                 std::span<const double> ps, std::size_t radius,
                                                 const DeviationTableOptions& options) {
  if (c < 1) throw DomainError("comparability constant must be >= 1");
  const std::size_t n = phi.rank();
  const auto mu = CylinderMeasure::uniform(n, density_depth);
  const auto mu2 = CylinderMeasure::with_density(n, density_depth, density);
  for (std::size_t i = 0; i < mu.weights().size(); ++i) {
    const Rational ratio = mu2.weights()[i] / mu.weights()[i];
    if (ratio * c < 1 || ratio > c) {
      throw DomainError("renormalized density leaves [1/c, c]");
    }
  }

  ComparableInvarianceReport rep;
  rep.base = deviation_table(phi, mu, radius, options);
  rep.comparable = deviation_table(phi, mu2, radius, options);
  for (double p : ps) {
    rep.base_certificates.push_back(lp_certificate(rep.base, p));
    rep.comparable_certificates.push_back(lp_certificate(rep.comparable, p));
    if (rep.base_certificates.back().verdict != rep.comparable_certificates.back().verdict) {
      rep.verdicts_agree = false;
    }
  }
  const Rational c2 = c * c;
  bool first = true;
  for (std::size_t i = 0; i < rep.base.entries.size(); ++i) {
    const auto& a = rep.base.entries[i].sigma_sq;
    const auto& b = rep.comparable.entries[i].sigma_sq;
    if (sgn(a) == 0 || sgn(b) == 0) {
      if (sgn(a) != sgn(b)) rep.ratios_within_bounds = false;
      continue;
    }
    const Rational r2 = b / a;
    if (r2 * c2 < 1 || r2 > c2) rep.ratios_within_bounds = false;
    const double r = std::sqrt(to_double(r2));
    if (first) {
      rep.min_ratio = rep.max_ratio = r;
      first = false;
    }
    rep.min_ratio = std::min(rep.min_ratio, r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  const auto fit_or_none = [](const DeviationTable& t) -> std::optional<DecayFit> {
    try {
      return decay_fit(t);
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  rep.base_fit = fit_or_none(rep.base);
  rep.comparable_fit = fit_or_none(rep.comparable);
  return rep;
}

}  // namespace hypbound
