#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypbound/boundary.hpp"

namespace hypbound {

// E phi(g) = integral of phi d(g_* mu), exact. mu must be a probability
// measure.
ComplexRational expectation(const StepFunction& phi, const Word& g, const CylinderMeasure& mu);

struct Deviation {
  Rational sigma_sq;  // E(|phi|^2)(g) - |E phi(g)|^2, exact
  double sigma;       // sqrt(sigma_sq) in binary64
};

Deviation deviation(const StepFunction& phi, const Word& g, const CylinderMeasure& mu);

// Independent route: (1/2) sum over pairs of depth(phi)-cylinders of
// |phi(C) - phi(C')|^2 (g_*mu)(C) (g_*mu)(C').
Rational deviation_double_integral(const StepFunction& phi, const Word& g, const CylinderMeasure& mu);

struct DeviationEntry {
  Word g;
  ComplexRational expectation;
  Rational sigma_sq;
  double sigma() const;
};

struct DeviationTable {
  std::size_t rank = 0;
  std::size_t radius = 0;
  std::vector<DeviationEntry> entries;  // every |g| <= radius, shortlex order
  std::vector<Rational> shell_max_sq;   // max sigma^2 over |g| = k

  const DeviationEntry* find(const Word& g) const;
};

struct DeviationTableOptions {
  // Refuses radius R when m_R * (2n-1)^(depth + R) exceeds this many cells.
  double cell_cap = 1e10;
  unsigned threads = 1;
};

DeviationTable deviation_table(const StepFunction& phi, const CylinderMeasure& mu, std::size_t radius,
                               const DeviationTableOptions& options = {});

// Rebuilds shell maxima after entries were loaded from elsewhere (CSV).
void recompute_shell_maxima(DeviationTable& table);

struct DecayFit {
  bool constant = false;  // all deviations zero: no fit
  double rate = 0;        // slope of ln max_{|g|=k} sigma(g) against k
  double constant_c = 0;  // exp(intercept)
  double residual = 0;    // RMS residual
  std::size_t shells_used = 0;
};

// Least-squares fit over shells k >= 1 with nonzero maxima (zero shells are
// skipped). Needs at least 3 such shells unless every shell is zero.
DecayFit decay_fit(const DeviationTable& table);

enum class SummabilityVerdict { converges_geometric, diverges, inconclusive };
std::string to_string(SummabilityVerdict v);

struct SummabilityCertificate {
  double p = 0;
  std::vector<Rational> shell_sums_exact;  // filled when p is an even integer
  std::vector<double> shell_sums;          // sum_{|g|=k} sigma(g)^p
  std::vector<double> ratios;              // S_{k+1} / S_k for k in [k0, R-1]
  std::size_t k0 = 0;
  SummabilityVerdict verdict = SummabilityVerdict::inconclusive;
  double ratio_bound = 0;  // max tail ratio (converges) or min tail ratio (diverges)
  double min_shell_sum = 0;  // over shells 1..R
  bool exact = false;
};

// Geometric-domination certificate over the tail k >= k0 = floor(R/2) + 1:
// converges if every tail ratio is < 1 (or all tail shells vanish), diverges
// if every tail ratio is >= 1, inconclusive otherwise. Needs radius >= 4.
SummabilityCertificate lp_certificate(const DeviationTable& table, double p);

struct ExtensionLimit {
  ComplexRational boundary_value;  // phi(xi)
  std::vector<Rational> errors;    // |E phi(g_k) - phi(xi)| for k = 0..R (real phi), exact
  std::vector<double> errors_float;
};

// g_k = length-k prefix of xi. The prefix must resolve phi (length >= depth)
// and cover every g_k.
ExtensionLimit extension_limit(const StepFunction& phi, const Word& xi_prefix, std::size_t radius,
                               const CylinderMeasure& mu);

// max over distinct depth-k cylinders of |phi(C) - phi(C')| / exp(-eps lcp).
double lipschitz_norm(const StepFunction& phi, double epsilon);

struct ComparableInvarianceReport {
  DeviationTable base;
  DeviationTable comparable;
  std::vector<SummabilityCertificate> base_certificates;
  std::vector<SummabilityCertificate> comparable_certificates;
  bool verdicts_agree = true;
  double min_ratio = 0;  // over entries with sigma != 0 in both
  double max_ratio = 0;
  bool ratios_within_bounds = true;  // all sigma'/sigma in [1/c, c]
  std::optional<DecayFit> base_fit;
  std::optional<DecayFit> comparable_fit;
};

// Recomputes the deviation table and lp certificates under
// mu' = density * mu (renormalized). The renormalized density must lie in
// [1/c, c].
ComparableInvarianceReport comparable_invariance(const StepFunction& phi, std::size_t density_depth,
                                                 std::span<const Rational> density, const Rational& c,
                                                 std::span<const double> ps, std::size_t radius,
                                                 const DeviationTableOptions& options = {});

}  // namespace hypbound
