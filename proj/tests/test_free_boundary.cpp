#include <cmath>

#include "doctest.h"
#include "hypbound/boundary.hpp"
#include "hypbound/error.hpp"

using namespace hypbound;

namespace {
Word w(std::string_view s, std::size_t n = 2) { return parse_word(GeneratorSet::standard(n), s); }
Rational q(long p, long r = 1) { return ratio(p, r); }
}  // namespace

TEST_CASE("cells") {
  CHECK(cell_count(2, 0) == 1);
  CHECK(cell_count(2, 1) == 4);
  CHECK(cell_count(2, 3) == 36);
  CHECK(cell_count(3, 2) == 30);
  const auto cs = cells(2, 2);
  for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cell_index(2, cs[i]) == i);
}

TEST_CASE("uniform measure") {
  const auto mu = ps_measure(2, 2);
  CHECK(mu.is_probability());
  CHECK(mu.mass(w("a")) == q(1, 4));
  CHECK(mu.mass(w("ab")) == q(1, 12));
  CHECK(mu.mass(w("abb")) == q(1, 36));
  CHECK(mu.mass(Word{}) == 1);
  CHECK(mu.refine(4) == ps_measure(2, 4));
  CHECK_THROWS_AS(ps_measure(2, 0), DomainError);
  CHECK_THROWS_AS(ps_measure(1, 2), ElementaryGroupError);
}

TEST_CASE("pushforward by a generator") {
  const auto mu = ps_measure(2, 1);
  CHECK(preimage_mass(mu, w("a"), w("a")) == q(3, 4));
  CHECK(preimage_mass(mu, w("a"), w("A")) == q(1, 12));
  CHECK(preimage_mass(mu, w("a"), w("b")) == q(1, 12));
  const auto pushed = pushforward(w("a"), mu);
  CHECK(pushed.is_probability());
  CHECK(pushed.mass(w("a")) == q(3, 4));
  CHECK(pushed.mass(w("aa")) == q(1, 4));
}

TEST_CASE("pushforward conserves mass and is a cocycle") {
  const Rational d[] = {q(1), q(2), q(1, 2), q(3, 2)};
  const auto mu = CylinderMeasure::with_density(2, 1, d);
  for (std::size_t L = 0; L <= 3; ++L) {
    for (const auto& g : words_of_length(2, L)) {
      const auto pg = pushforward(g, mu);
      CHECK(pg.total() == 1);
      for (const auto& h : words_of_length(2, 1)) {
        const auto lhs = pushforward(h, pg);
        const auto rhs = pushforward(h * g, mu);
        for (const auto& c : cells(2, 3)) CHECK(lhs.mass(c) == rhs.mass(c));
      }
    }
  }
}

TEST_CASE("comparable densities") {
  const Rational d[] = {q(1), q(2), q(1), q(2)};
  const auto mu = CylinderMeasure::with_density(2, 1, d);
  const auto u = ps_measure(2, 1);
  CHECK(mu.mass(w("a")) == q(1, 6));
  CHECK(mu.mass(w("A")) == q(1, 3));
  for (const auto& c : cells(2, 3)) {
    const Rational r = mu.mass(c) / u.mass(c);
    CHECK(r >= q(2, 3));
    CHECK(r <= q(4, 3));
  }
  const Rational bad[] = {q(1), q(0), q(1), q(1)};
  CHECK_THROWS_AS(CylinderMeasure::with_density(2, 1, bad), DomainError);
}

TEST_CASE("step functions") {
  const auto phi = StepFunction::indicator(2, w("a"));
  CHECK(phi.depth() == 1);
  CHECK(phi.value_on(w("ab")) == ComplexRational(q(1)));
  CHECK(phi.value_on(w("Ab")) == ComplexRational(q(0)));
  CHECK_THROWS_AS(phi.value_on(Word{}), RefinementError);
  // (a.phi)(xi) = phi(A xi): equals 1 exactly on cyl(aa) at depth 2.
  const auto t = phi.translate(w("a"));
  CHECK(t.value_on(w("aa")) == ComplexRational(q(1)));
  CHECK(t.value_on(w("ab")) == ComplexRational(q(0)));
  CHECK(integrate(phi, ps_measure(2, 1)) == ComplexRational(q(1, 4)));
  CHECK(StepFunction::constant(2, q(3)).is_constant());
  CHECK_FALSE(phi.is_constant());
}

TEST_CASE("visual metric") {
  VisualParams vp(2, std::log(3.0));
  CHECK(vp.hausdorff_dim() == doctest::Approx(1.0));
  const auto bp = boundary_gromov_product({w("ab")}, {w("aB")});
  CHECK(bp.resolved);
  CHECK(bp.value == 1);
  const auto d = visual_distance({w("ab")}, {w("aB")}, vp);
  CHECK(d.value == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(d.upper_bound);
  CHECK(visual_distance({w("ab")}, {w("ab")}, vp).upper_bound);
  CHECK_THROWS_AS(visual_distance({w("a")}, {w("ab")}, vp), RefinementError);
  CHECK_THROWS_AS(VisualParams(2, 0.0), DomainError);
}

TEST_CASE("visual metric is an ultrametric on cylinders") {
  VisualParams vp(2, 0.7);
  const auto cs = cells(2, 3);
  for (const auto& x : cs) {
    for (const auto& y : cs) {
      for (const auto& z : cs) {
        if (x == y || y == z || x == z) continue;
        const double dxz = visual_distance({x}, {z}, vp).value;
        const double dxy = visual_distance({x}, {y}, vp).value;
        const double dyz = visual_distance({y}, {z}, vp).value;
        CHECK(dxz <= std::max(dxy, dyz) + 1e-15);
      }
    }
  }
}

TEST_CASE("Ahlfors regularity is exact on cylinder balls") {
  for (std::size_t n : {2u, 3u}) {
    const double e = std::log(2.0 * static_cast<double>(n) - 1.0);
    for (double eps : {e, e / 2}) {
      const auto rep = ahlfors_check(ps_measure(n, 1), VisualParams(n, eps), 6);
      const Rational expected(static_cast<long>(2 * n - 1), static_cast<long>(2 * n));
      CHECK(rep.min_ratio == expected);
      CHECK(rep.max_ratio == expected);
    }
  }
}

TEST_CASE("largest cylinder mass of pushforwards") {
  const auto mu = ps_measure(2, 1);
  CHECK(max_cylinder_mass(mu, Word{}, 1) == q(1, 4));
  CHECK(max_cylinder_mass(mu, w("aa"), 1) == q(11, 12));
  CHECK(max_cylinder_mass(mu, w("aaa"), 2) == q(11, 12));
  CHECK(max_cylinder_mass(mu, w("aaa"), 3) == q(3, 4));
}

TEST_CASE("integral over pairs") {
  // eps = ln 3, power 2: double integral of 9^{-lcp}. Under the uniform
  // measure the lcp is 0 w.p. 3/4 and >= k w.p. (1/4) 3^{-(k-1)}, so the
  // integral is 3/4 + sum_{k>=1} (1/4)3^{-(k-1)} (2/3) 9^{-k} = 3/4 + 1/52.
  const double v = double_integral_exact(ps_measure(2, 1), Word{}, std::log(3.0), 2.0);
  CHECK(v == doctest::Approx(0.75 + 1.0 / 52.0).epsilon(1e-12));
  CHECK(single_integral_exact(ps_measure(2, 1), w("a"), w("a"), 0.5) == 0.0);
  CHECK(single_integral_exact(ps_measure(2, 1), w("a"), w("b"), 0.5) > 0.0);
}
