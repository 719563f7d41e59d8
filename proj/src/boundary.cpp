#include "hypbound/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hypbound/error.hpp"

namespace hypbound {

namespace {

void require_rank(std::size_t n) {
  if (n < 2) throw ElementaryGroupError("free groups of rank < 2 are elementary");
}

mpz_class int_pow(std::size_t base, std::size_t exp) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
  return out;
}

std::size_t size_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

bool is_prefix_of(const Word& u, const Word& w) {
  return u.length() <= w.length() && common_prefix_length(u, w) == u.length();
}

}  // namespace

std::size_t cell_count(std::size_t n, std::size_t depth) {
  if (depth == 0) return 1;
  return 2 * n * size_pow(2 * n - 1, depth - 1);
}

std::size_t cell_index(std::size_t n, const Word& w) {
  if (w.empty()) return 0;
  std::size_t idx = w[0];
  for (std::size_t i = 1; i < w.length(); ++i) {
    const Letter x = w[i];
    const Letter forbidden = inverse(w[i - 1]);
    idx = idx * (2 * n - 1) + (x < forbidden ? x : x - 1u);
  }
  return idx;
}

std::vector<Word> cells(std::size_t n, std::size_t depth) { return words_of_length(n, depth); }

// ---------------------------------------------------------------------------
// CylinderMeasure

CylinderMeasure::CylinderMeasure(std::size_t n, std::size_t depth, std::vector<Rational> weights)
    : n_(n), depth_(depth), weights_(std::move(weights)) {
  require_rank(n_);
  if (weights_.size() != cell_count(n_, depth_)) {
    throw DomainError("measure needs one weight per depth-" + std::to_string(depth_) + " cylinder (" +
                      std::to_string(cell_count(n_, depth_)) + ")");
  }
  total_ = 0;
  for (const auto& w : weights_) {
    if (sgn(w) < 0) throw DomainError("measure weights must be nonnegative");
    total_ += w;
  }
}

CylinderMeasure CylinderMeasure::uniform(std::size_t n, std::size_t depth) {
  require_rank(n);
  const auto count = cell_count(n, depth);
  Rational w(1, static_cast<unsigned long>(count));
  return CylinderMeasure(n, depth, std::vector<Rational>(count, w));
}

CylinderMeasure CylinderMeasure::with_density(std::size_t n, std::size_t depth, std::span<const Rational> density) {
  auto base = uniform(n, depth);
  if (density.size() != base.weights().size()) throw DomainError("density needs one value per cylinder");
  std::vector<Rational> w(density.size());
  Rational total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (sgn(density[i]) <= 0) throw DomainError("density must be bounded away from 0");
    w[i] = density[i] * base.weights()[i];
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return CylinderMeasure(n, depth, std::move(w));
}

Rational CylinderMeasure::mass(const Word& u) const {
  const std::size_t len = u.length();
  if (len >= depth_) {
    if (depth_ == 0) {
      if (len == 0) return total_;
      Rational out = total_ / Rational(mpz_class(2 * n_) * int_pow(2 * n_ - 1, len - 1));
      return out;
    }
    const auto idx = cell_index(n_, u.prefix(depth_));
    if (len == depth_) return weights_[idx];
    return weights_[idx] / Rational(int_pow(2 * n_ - 1, len - depth_));
  }
  if (len == 0) return total_;
  const std::size_t span = size_pow(2 * n_ - 1, depth_ - len);
  const std::size_t start = cell_index(n_, u) * span;
  Rational out = 0;
  for (std::size_t i = start; i < start + span; ++i) out += weights_[i];
  return out;
}

CylinderMeasure CylinderMeasure::refine(std::size_t new_depth) const {
  if (new_depth < depth_) throw DomainError("refine cannot decrease depth");
  if (new_depth == depth_) return *this;
  std::vector<Rational> w;
  w.reserve(cell_count(n_, new_depth));
  for (const auto& c : cells(n_, new_depth)) w.push_back(mass(c));
  return CylinderMeasure(n_, new_depth, std::move(w));
}

CylinderMeasure ps_measure(std::size_t n, std::size_t depth) {
  require_rank(n);
  if (depth < 1) throw DomainError("ps_measure needs depth >= 1");
  return CylinderMeasure::uniform(n, depth);
}

// ---------------------------------------------------------------------------
// StepFunction

StepFunction::StepFunction(std::size_t n, std::size_t depth, std::vector<ComplexRational> values)
    : n_(n), depth_(depth), values_(std::move(values)) {
  require_rank(n_);
  if (values_.size() != cell_count(n_, depth_)) {
    throw DomainError("step function needs one value per depth-" + std::to_string(depth_) + " cylinder (" +
                      std::to_string(cell_count(n_, depth_)) + ")");
  }
}

StepFunction StepFunction::constant(std::size_t n, ComplexRational c) {
  return StepFunction(n, 0, {std::move(c)});
}

StepFunction StepFunction::indicator(std::size_t n, const Word& prefix) {
  std::vector<ComplexRational> v(cell_count(n, prefix.length()));
  v[cell_index(n, prefix)] = ComplexRational(Rational(1));
  return StepFunction(n, prefix.length(), std::move(v));
}

const ComplexRational& StepFunction::value_on(const Word& prefix) const {
  if (prefix.length() < depth_) {
    throw RefinementError("cylinder is coarser than the step function", depth_);
  }
  return values_[cell_index(n_, prefix.prefix(depth_))];
}

StepFunction StepFunction::refine(std::size_t new_depth) const {
  if (new_depth < depth_) throw DomainError("refine cannot decrease depth");
  if (new_depth == depth_) return *this;
  std::vector<ComplexRational> v;
  v.reserve(cell_count(n_, new_depth));
  for (const auto& c : cells(n_, new_depth)) v.push_back(value_on(c));
  return StepFunction(n_, new_depth, std::move(v));
}

StepFunction StepFunction::translate(const Word& g) const {
  if (g.empty() || depth_ == 0) return *this;
  const auto ginv = g.inverse();
  const auto depth = depth_ + g.length();
  std::vector<ComplexRational> v;
  v.reserve(cell_count(n_, depth));
  for (const auto& c : cells(n_, depth)) v.push_back(value_on(ginv * c));
  return StepFunction(n_, depth, std::move(v));
}

StepFunction StepFunction::abs_squared() const {
  std::vector<ComplexRational> v;
  v.reserve(values_.size());
  for (const auto& z : values_) v.emplace_back(z.norm_sq());
  return StepFunction(n_, depth_, std::move(v));
}

StepFunction StepFunction::operator-(const ComplexRational& c) const {
  auto v = values_;
  for (auto& z : v) z -= c;
  return StepFunction(n_, depth_, std::move(v));
}

StepFunction operator*(const StepFunction& a, const StepFunction& b) {
  if (a.rank() != b.rank()) throw DomainError("step functions on different boundaries");
  const auto depth = std::max(a.depth(), b.depth());
  const auto ra = a.refine(depth);
  const auto rb = b.refine(depth);
  std::vector<ComplexRational> v(ra.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ra.values()[i] * rb.values()[i];
  return StepFunction(a.rank(), depth, std::move(v));
}

bool StepFunction::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](const auto& z) { return z == values_.front(); });
}

// ---------------------------------------------------------------------------
// Visual metric

VisualParams::VisualParams(std::size_t rank, double eps) : n(rank), epsilon(eps) {
  require_rank(n);
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw DomainError("visual parameter must be a positive finite number");
}

double VisualParams::entropy() const { return std::log(static_cast<double>(2 * n - 1)); }

double VisualParams::hausdorff_dim() const { return entropy() / epsilon; }

BoundaryProduct boundary_gromov_product(const Cylinder& c1, const Cylinder& c2) {
  const auto c = common_prefix_length(c1.prefix, c2.prefix);
  const bool contained = c == std::min(c1.depth(), c2.depth());
  return {c, !contained};
}

VisualDistance visual_distance(const Cylinder& c1, const Cylinder& c2, const VisualParams& vp) {
  const auto gp = boundary_gromov_product(c1, c2);
  if (gp.resolved) {
    return {std::exp(-vp.epsilon * static_cast<double>(gp.value)), gp.value, false};
  }
  if (c1.prefix == c2.prefix) {
    return {std::exp(-vp.epsilon * static_cast<double>(c1.depth())), c1.depth(), true};
  }
  throw RefinementError("boundary Gromov product unresolved: one cylinder contains the other",
                        std::max(c1.depth(), c2.depth()) + 1);
}

// ---------------------------------------------------------------------------
// Group action on measures

Rational preimage_mass(const CylinderMeasure& m, const Word& g, const Word& w) {
  if (w.empty()) return m.total();
  const auto c = common_prefix_length(g, w);
  if (c < w.length()) {
    // g^{-1} cyl(w) = cyl(g^{-1} w), no cancellation past the divergence.
    return m.mass(g.inverse() * w);
  }
  // w is a prefix of g: g xi lands in cyl(w) unless xi cancels more than
  // |g| - |w| letters of g.
  const auto ginv = g.inverse();
  return m.total() - m.mass(ginv.prefix(g.length() - w.length() + 1));
}

CylinderMeasure pushforward(const Word& g, const CylinderMeasure& m) {
  if (g.empty()) return m;
  const auto depth = m.depth() + g.length();
  std::vector<Rational> w;
  w.reserve(cell_count(m.rank(), depth));
  for (const auto& c : cells(m.rank(), depth)) w.push_back(preimage_mass(m, g, c));
  return CylinderMeasure(m.rank(), depth, std::move(w));
}

ComplexRational integrate(const StepFunction& phi, const CylinderMeasure& m) {
  if (phi.rank() != m.rank()) throw DomainError("function and measure live on different boundaries");
  ComplexRational acc;
  const auto cs = cells(phi.rank(), phi.depth());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& v = phi.values()[i];
    if (v.is_zero()) continue;
    acc += v * m.mass(cs[i]);
  }
  return acc;
}

AhlforsReport ahlfors_check(const CylinderMeasure& mu, const VisualParams& vp, std::size_t max_depth) {
  if (vp.n != mu.rank()) throw DomainError("visual parameters and measure have different ranks");
  if (max_depth < 1) throw DomainError("ahlfors_check needs at least one depth");
  AhlforsReport rep;
  bool first = true;
  for (std::size_t k = 1; k <= max_depth; ++k) {
    const Rational scale(int_pow(vp.growth_base(), k));
    Rational depth_min;
    bool depth_first = true;
    for (const auto& c : cells(mu.rank(), k)) {
      const Rational r = mu.mass(c) * scale;
      if (depth_first || r < depth_min) depth_min = r;
      depth_first = false;
      if (first) {
        rep.min_ratio = rep.max_ratio = r;
        first = false;
      }
      rep.min_ratio = std::min(rep.min_ratio, r);
      rep.max_ratio = std::max(rep.max_ratio, r);
    }
    rep.ratios.push_back(depth_min);
  }
  return rep;
}

Rational max_cylinder_mass(const CylinderMeasure& m, const Word& g, std::size_t depth) {
  Rational best = 0;
  for (const auto& c : cells(m.rank(), depth)) best = std::max(best, preimage_mass(m, g, c));
  return best;
}

// ---------------------------------------------------------------------------
// Exact boundary integrals

namespace {

constexpr std::size_t kExtraDepth = 48;

std::vector<Word> children(std::size_t n, const Word& u) {
  std::vector<Word> out;
  for (Letter x = 0; x < 2 * n; ++x) {
    if (!u.empty() && x == inverse(u.back())) continue;
    auto letters = u.letters();
    letters.push_back(x);
    out.push_back(Word::from_reduced(std::move(letters)));
  }
  return out;
}

}  // namespace

double double_integral_exact(const CylinderMeasure& m, const Word& g, double epsilon, double power) {
  const std::size_t n = m.rank();
  const double q = 1.0 / static_cast<double>(2 * n - 1);
  const double decay = std::exp(-power * epsilon);
  const auto ginv = g.inverse();
  const std::size_t cap = g.length() + m.depth() + kExtraDepth;

  std::function<double(const Word&, const Word&)> pair;
  std::function<double(const Word&)> diag;

  pair = [&](const Word& u, const Word& v) -> double {
    const bool valid = !is_prefix_of(u, ginv) && !is_prefix_of(v, ginv);
    const auto gu = g * u;
    const auto gv = g * v;
    const auto l = common_prefix_length(gu, gv);
    const auto mass = to_double(m.mass(u)) * to_double(m.mass(v));
    if ((valid && l < std::min(gu.length(), gv.length())) || std::max(u.length(), v.length()) >= cap) {
      return mass * std::pow(decay, static_cast<double>(l));
    }
    double acc = 0;
    const auto cu = children(n, u);
    const auto cv = children(n, v);
    for (const auto& a : cu) {
      for (const auto& b : cv) acc += pair(a, b);
    }
    return acc;
  };

  diag = [&](const Word& u) -> double {
    if (u.length() > g.length() && u.length() >= m.depth()) {
      const double mass = to_double(m.mass(u));
      const auto base = static_cast<double>((g * u).length());
      return mass * mass * std::pow(decay, base) * (1.0 - q) / (1.0 - q * decay);
    }
    double acc = 0;
    const auto cu = children(n, u);
    for (const auto& a : cu) {
      for (const auto& b : cu) acc += (a == b) ? diag(a) : pair(a, b);
    }
    return acc;
  };

  return diag(Word{});
}

double single_integral_exact(const CylinderMeasure& m, const Word& g, const Word& h, double epsilon) {
  if (g == h) return 0.0;
  const std::size_t n = m.rank();
  const auto ginv = g.inverse();
  const auto hinv = h.inverse();
  const std::size_t cap = g.length() + h.length() + kExtraDepth;

  std::function<double(const Word&)> visit = [&](const Word& u) -> double {
    const bool valid = !u.empty() && !is_prefix_of(u, ginv) && !is_prefix_of(u, hinv);
    const auto gu = g * u;
    const auto hu = h * u;
    const auto l = common_prefix_length(gu, hu);
    if ((valid && l < std::min(gu.length(), hu.length())) || u.length() >= cap) {
      return to_double(m.mass(u)) * std::exp(-epsilon * static_cast<double>(l));
    }
    double acc = 0;
    for (const auto& c : children(n, u)) acc += visit(c);
    return acc;
  };
  return visit(Word{});
}

}  // namespace hypbound
