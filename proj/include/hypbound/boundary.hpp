#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hypbound/rational.hpp"
#include "hypbound/word.hpp"

namespace hypbound {

// Exact model of the boundary of the free group F_n. Boundary points are
// never materialized: everything is computed on the cylinder algebra.
//
// Depth-k cells are the reduced words of length k, indexed in shortlex
// order; there are 2n (2n-1)^(k-1) of them (one, the empty word, at k = 0).

std::size_t cell_count(std::size_t n, std::size_t depth);
// Shortlex index of a reduced word among the cells of its own length.
std::size_t cell_index(std::size_t n, const Word& w);
std::vector<Word> cells(std::size_t n, std::size_t depth);

// {xi in boundary : xi begins with prefix}.
struct Cylinder {
  Word prefix;
  std::size_t depth() const noexcept { return prefix.length(); }
};

// A finite measure whose density against the uniform measure is locally
// constant on depth-k cylinders: weights are given per depth-k cell and each
// cell's mass splits uniformly among its 2n-1 children below depth k. Such a
// measure is defined on every cylinder, so refinement never loses exactness.
class CylinderMeasure {
 public:
  CylinderMeasure(std::size_t n, std::size_t depth, std::vector<Rational> weights);

  // The uniform (Patterson-Sullivan) probability measure written at depth k.
  static CylinderMeasure uniform(std::size_t n, std::size_t depth);
  // density * uniform, renormalized to a probability measure. Throws if a
  // density is not strictly positive.
  static CylinderMeasure with_density(std::size_t n, std::size_t depth, std::span<const Rational> density);

  std::size_t rank() const noexcept { return n_; }
  std::size_t depth() const noexcept { return depth_; }
  const std::vector<Rational>& weights() const noexcept { return weights_; }
  const Rational& total() const noexcept { return total_; }
  bool is_probability() const { return total_ == 1; }

  // Mass of the cylinder over u (u empty: the whole boundary).
  Rational mass(const Word& u) const;
  // The same measure written at depth k' >= depth.
  CylinderMeasure refine(std::size_t new_depth) const;

  friend bool operator==(const CylinderMeasure&, const CylinderMeasure&) = default;

 private:
  std::size_t n_;
  std::size_t depth_;
  std::vector<Rational> weights_;
  Rational total_;
};

// ps_measure(n, k): every depth-k cylinder gets 1 / (2n (2n-1)^(k-1)).
CylinderMeasure ps_measure(std::size_t n, std::size_t depth);

// Complex-valued function, locally constant on depth-k cylinders.
class StepFunction {
 public:
  StepFunction(std::size_t n, std::size_t depth, std::vector<ComplexRational> values);

  static StepFunction constant(std::size_t n, ComplexRational c);
  static StepFunction indicator(std::size_t n, const Word& prefix);

  std::size_t rank() const noexcept { return n_; }
  std::size_t depth() const noexcept { return depth_; }
  const std::vector<ComplexRational>& values() const noexcept { return values_; }

  // Value on any cylinder of depth >= depth().
  const ComplexRational& value_on(const Word& prefix) const;
  StepFunction refine(std::size_t new_depth) const;

  // (g.phi)(xi) = phi(g^{-1} xi); locally constant at depth + |g|.
  StepFunction translate(const Word& g) const;
  // pointwise |phi|^2
  StepFunction abs_squared() const;
  StepFunction operator-(const ComplexRational& c) const;
  // Pointwise product; depth is the larger of the two.
  friend StepFunction operator*(const StepFunction& a, const StepFunction& b);

  bool is_constant() const;

 private:
  std::size_t n_;
  std::size_t depth_;
  std::vector<ComplexRational> values_;
};

// The visual parameter epsilon of d_eps ~ exp(-eps (.,.)) on the boundary of
// F_n. Every eps > 0 is admissible on a tree.
struct VisualParams {
  std::size_t n;
  double epsilon;

  VisualParams(std::size_t rank, double eps);
  // e_X = ln(2n - 1)
  double entropy() const;
  // D_eps = e_X / eps
  double hausdorff_dim() const;
  // exp(e_X) = 2n - 1, exact
  std::size_t growth_base() const noexcept { return 2 * n - 1; }
};

// Boundary Gromov product based at e: the common-prefix length when the
// prefixes diverge (resolved). If one prefix extends the other the value is
// only a lower bound and `resolved` is false.
struct BoundaryProduct {
  std::size_t value;
  bool resolved;
};
BoundaryProduct boundary_gromov_product(const Cylinder& c1, const Cylinder& c2);

// exp(-eps * m) where m is the resolved boundary Gromov product. Equal
// cylinders give the diameter bound exp(-eps * depth) flagged as an upper
// bound; strict containment throws RefinementError.
struct VisualDistance {
  double value;
  std::size_t exponent;  // the integer m in exp(-eps m)
  bool upper_bound;
};
VisualDistance visual_distance(const Cylinder& c1, const Cylinder& c2, const VisualParams& vp);

// m(g^{-1} . cyl(w)): the mass that g_* m assigns to cyl(w). The preimage is
// a cylinder or the complement of one.
Rational preimage_mass(const CylinderMeasure& m, const Word& g, const Word& w);

// g_* m written exactly at depth k + |g|.
CylinderMeasure pushforward(const Word& g, const CylinderMeasure& m);

// Integral of phi against m.
ComplexRational integrate(const StepFunction& phi, const CylinderMeasure& m);

struct AhlforsReport {
  std::vector<Rational> ratios;  // per depth 1..K: min over cylinders of mu(B_r) / r^D
  Rational min_ratio;
  Rational max_ratio;
};
// mu(B_r) / r^{D_eps} over all cylinder balls of radius r = exp(-eps k),
// k = 1..K. Since eps * D_eps = ln(2n-1), r^{D_eps} = (2n-1)^{-k} exactly.
AhlforsReport ahlfors_check(const CylinderMeasure& mu, const VisualParams& vp, std::size_t max_depth);

// Largest mass g_* m gives to a single depth-d cylinder (the d_eps-ball of
// radius exp(-eps d)).
Rational max_cylinder_mass(const CylinderMeasure& m, const Word& g, std::size_t depth);

// Integral over pairs of exp(-power * eps * (g xi, g xi')_e) d m d m, evaluated
// on the cylinder algebra with a closed-form tail on diagonal cylinders.
double double_integral_exact(const CylinderMeasure& m, const Word& g, double epsilon, double power = 2.0);

// Integral of exp(-eps * (g xi, h xi)_e) d m(xi). Zero when g = h.
double single_integral_exact(const CylinderMeasure& m, const Word& g, const Word& h, double epsilon);

}  // namespace hypbound
