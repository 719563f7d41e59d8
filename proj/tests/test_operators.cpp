#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "hypbound/deviation.hpp"
#include "hypbound/error.hpp"
#include "hypbound/operators.hpp"

using namespace hypbound;

namespace {
Word w(std::string_view s, std::size_t n = 2) { return parse_word(GeneratorSet::standard(n), s); }
Rational q(long p, long r = 1) { return ratio(p, r); }

TruncationSpec spec(std::size_t radius, std::size_t depth, std::size_t n = 2) {
  TruncationSpec t;
  t.n = n;
  t.radius = radius;
  t.depth = depth;
  return t;
}

// Largest |entry| of op over the marked columns.
double max_on_columns(const BlockOperator& op, const std::vector<bool>& keep) {
  double m = 0;
  for (const auto& [key, blk] : op.blocks()) {
    if (keep[key.second]) m = std::max(m, blk.max_abs());
  }
  return m;
}

const StepFunction kPhi = StepFunction::indicator(2, parse_word(GeneratorSet::standard(2), "a"));
}  // namespace

TEST_CASE("truncation dimensions") {
  const auto t = spec(3, 4);
  CHECK(t.outer_dim() == 53);
  CHECK(t.inner_dim() == 108);
  CHECK(t.dim() == 5724);
  CHECK(ball_index(2, Word{}) == 0);
  CHECK(ball_index(2, w("a")) == 1);
  CHECK(ball_index(2, w("aa")) == 5);
  CHECK(ball_index(2, w("BBB")) == 52);
}

TEST_CASE("left regular representation") {
  const auto t = spec(2, 3);
  const auto id = build_lambda(CrossedProductElement::identity(2), t);
  CHECK((id - BlockOperator::identity(t.outer_dim(), t.inner_dim())).max_abs() == 0.0);

  // A group element is a partial permutation, isometric on |h| <= R - |g|.
  const auto lg = build_lambda(CrossedProductElement::group(2, w("ab")), t);
  const auto keep = interior_mask(t, 2);
  const auto gram = lg.adjoint() * lg;
  const auto sub = gram.restricted(keep) - BlockOperator::identity(t.outer_dim(), t.inner_dim()).restricted(keep);
  CHECK(sub.max_abs() == 0.0);

  // Indicator of cyl(a) at R = 0, k = 1: the rank-one projection diag(1,0,0,0).
  const auto p = build_lambda(CrossedProductElement::function(kPhi), spec(0, 1)).to_dense();
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
  expected(0, 0) = 1;
  CHECK((p - expected).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(build_lambda(CrossedProductElement::function(kPhi), spec(3, 3)), RefinementError);
}

TEST_CASE("right regular representation and the symmetry J") {
  const auto t = spec(2, 3);
  const auto j = build_J(t);
  const auto id = BlockOperator::identity(t.outer_dim(), t.inner_dim());
  CHECK((j * j - id).max_abs() == 0.0);
  CHECK((j.adjoint() - j).max_abs() == 0.0);

  const StepFunction psi = StepFunction::indicator(2, w("b")) - ComplexRational(q(1, 3));
  const CrossedProductElement a({2, {{kPhi, w("a")}, {psi, Word{}}, {StepFunction::constant(2, q(2)), w("B")}}});
  CHECK(a.terms().size() == 3);
  const auto lhs = build_lambda_op(a, t);
  const auto rhs = j * build_lambda(a, t) * j;
  CHECK((lhs - rhs).max_abs() == 0.0);

  // Left and right actions commute on the interior for group elements and
  // for functions, but not across types.
  const auto tg = spec(3, 4);
  const auto keep = interior_mask(tg, 2);
  const auto lg = build_lambda(CrossedProductElement::group(2, w("a")), tg);
  const auto rg = build_lambda_op(CrossedProductElement::group(2, w("b")), tg);
  CHECK(max_on_columns(lg * rg - rg * lg, keep) == 0.0);
  const auto lf = build_lambda(CrossedProductElement::function(kPhi), tg);
  const auto rf = build_lambda_op(CrossedProductElement::function(psi), tg);
  CHECK(max_on_columns(lf * rf - rf * lf, keep) == 0.0);
}

TEST_CASE("covariance under conjugation") {
  const auto t = spec(2, 5);
  for (const auto& g : {w("a"), w("B"), w("ab")}) {
    const auto keep = interior_mask(t, g.length());
    const auto lhs = build_lambda(CrossedProductElement::group(2, g), t) *
                     build_lambda(CrossedProductElement::function(kPhi), t) *
                     build_lambda(CrossedProductElement::group(2, g.inverse()), t);
    const auto shifted = kPhi.translate(g);
    const auto rhs = build_lambda(CrossedProductElement::function(shifted), t);
    CHECK(max_on_columns(lhs - rhs, keep) == 0.0);
  }
}

TEST_CASE("crossed-product algebra matches operator algebra") {
  const auto t = spec(2, 4);
  const CrossedProductElement a({2, {{kPhi, w("a")}, {StepFunction::constant(2, q(1, 2)), w("b")}}});
  const CrossedProductElement b({2, {{StepFunction::indicator(2, w("B")), w("A")}}});
  const auto keep = interior_mask(t, 2);
  const auto la = build_lambda(a, t);
  const auto lb = build_lambda(b, t);
  CHECK(max_on_columns(build_lambda(a * b, t) - la * lb, keep) < 1e-15);
  const auto keep1 = interior_mask(t, 1);
  CHECK(max_on_columns(build_lambda(a.adjoint(), t) - la.adjoint(), keep1) < 1e-15);
}

TEST_CASE("projection onto constants") {
  const auto t = spec(2, 1);
  const auto p = projection_P(t);
  const auto block = p.find(0, 0)->to_dense();
  CHECK((block - Eigen::MatrixXcd::Constant(4, 4, 0.25)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(p.to_dense().trace() - std::complex<double>(17.0)) < 1e-12);
  CHECK((p * p - p).max_abs() < 1e-14);
  CHECK((p.adjoint() - p).max_abs() == 0.0);

  // P commutes with the group action on the interior.
  const auto t3 = spec(3, 4);
  const auto p3 = projection_P(t3);
  const auto lg = build_lambda(CrossedProductElement::group(2, w("ab")), t3);
  CHECK(max_on_columns(lg * p3 - p3 * lg, interior_mask(t3, 2)) < 1e-15);

  // A comparable basis measure still gives a projection.
  TruncationSpec tm = spec(2, 3);
  const Rational d[] = {q(1), q(2), q(1), q(2)};
  tm.measure = CylinderMeasure::with_density(2, 1, d);
  const auto pm = projection_P(tm);
  CHECK((pm * pm - pm).max_abs() < 1e-14);
}

TEST_CASE("compressions are multiplication by expectations") {
  const auto t = spec(2, 4);
  const auto mu = ps_measure(2, 1);
  const auto p = projection_P(t);
  for (const auto& g : {Word{}, w("a"), w("bA")}) {
    const CrossedProductElement a({2, {{kPhi, g}}});
    const auto c = p * build_lambda(a, t) * p;
    const auto pv = p.find(0, 0)->to_dense();
    for (const auto& [key, blk] : c.blocks()) {
      const std::size_t col = key.second;
      // Column word h and its image gh.
      std::vector<Word> ball;
      for (std::size_t k = 0; k <= 2; ++k) {
        for (auto& x : words_of_length(2, k)) ball.push_back(x);
      }
      const Word gh = g * ball[col];
      REQUIRE(ball_index(2, gh) == key.first);
      const double e = to_double(expectation(kPhi, gh, mu).re);
      CHECK((blk.to_dense() - e * pv).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("basic commutator against the deviation table") {
  const auto t = spec(3, 4);
  const auto rep = basic_commutator(kPhi, t);
  const auto table = deviation_table(kPhi, ps_measure(2, 1), 3);
  std::vector<double> sigma;
  for (const auto& e : table.entries) sigma.push_back(e.sigma());
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  REQUIRE(rep.pi_values.values.size() == t.dim());
  for (std::size_t i = 0; i < sigma.size(); ++i) CHECK(std::abs(rep.pi_values.values[i] - sigma[i]) < 1e-10);
  CHECK(rep.pi_values.values[sigma.size()] < 1e-10);
  CHECK(std::abs(rep.pi_values.values.front() - std::sqrt(3.0) / 4) < 1e-12);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    CHECK(std::abs(rep.commutator_values.values[2 * i] - sigma[i]) < 1e-10);
    CHECK(std::abs(rep.commutator_values.values[2 * i + 1] - sigma[i]) < 1e-10);
  }
  CHECK(rep.commutator_values.values[2 * sigma.size()] < 1e-10);

  const auto centered = basic_commutator(kPhi - ComplexRational(q(1, 4)), t);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    CHECK(std::abs(centered.pi_values.values[i] - rep.pi_values.values[i]) < 1e-12);
  }
  const auto flat = basic_commutator(StepFunction::constant(2, q(5)), spec(2, 2));
  CHECK(flat.commutator.max_abs() < 1e-14);
  CHECK(flat.commutator_values.norm() < 1e-14);
}

TEST_CASE("singular values are unchanged by a comparable basis measure") {
  const Rational d[] = {q(1), q(2), q(1), q(2)};
  auto t = spec(2, 3);
  const CrossedProductElement a({2, {{kPhi, w("a")}, {StepFunction::indicator(2, w("b")), w("bb")}}});
  const auto keep = interior_mask(t, 2);
  const auto base = singular_values(build_lambda(a, t), keep, t);
  t.measure = CylinderMeasure::with_density(2, 1, d);
  const auto other = singular_values(build_lambda(a, t), keep, t);
  REQUIRE(base.size() == other.size());
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(base[i] - other[i]) < 1e-10);
}

TEST_CASE("twisted commutators") {
  const auto mu = ps_measure(2, 1);
  const auto g = CrossedProductElement::group(2, w("a"));
  const auto h = CrossedProductElement::group(2, w("bA"));
  CHECK(twisted_commutator(g, h, 4, mu, 2.5).current.values.norm() == 0.0);
  const auto f = CrossedProductElement::function(kPhi);
  const auto f2 = CrossedProductElement::function(StepFunction::indicator(2, w("Ba")));
  CHECK(twisted_commutator(f, f2, 4, mu, 2.5).current.values.norm() == 0.0);

  const auto rep = twisted_commutator(f, g, 4, mu, 2.5);
  CHECK(rep.current.values.norm() > 0.1);
  REQUIRE(rep.previous.has_value());
  // Frozen from an exact enumeration of E phi(h a^{-1}) - E phi(h).
  CHECK(rep.current.schatten_sum == doctest::Approx(0.20768146998021766).epsilon(1e-10));
  CHECK(rep.previous->schatten_sum == doctest::Approx(0.20487616196483957).epsilon(1e-10));
  CHECK(rep.relative_change < 0.05);

  const auto diag = twisted_diagonal_check(kPhi, w("a"), 4, mu);
  CHECK(diag.diagonal);
  CHECK(diag.all_match);
  CHECK(diag.entries.size() == 53);
  CHECK(diag.entries.front().entry == ComplexRational(q(1, 12) - q(1, 4)));
}

TEST_CASE("twisted commutator compresses the full-space commutator") {
  // P [lambda(phi), P lambda^op(g) P] P = [s(phi), s^op(g)] tensor v v^T.
  const auto t = spec(2, 3);
  const auto p = projection_P(t);
  const auto lf = build_lambda(CrossedProductElement::function(kPhi), t);
  const auto q_op = p * build_lambda_op(CrossedProductElement::group(2, w("a")), t) * p;
  const auto full = p * (lf * q_op - q_op * lf) * p;
  const auto mu = ps_measure(2, 1);
  const auto sf = section(CrossedProductElement::function(kPhi), 2, mu);
  const auto sg = section_op(CrossedProductElement::group(2, w("a")), 2, mu);
  const auto comm = sf * sg - sg * sf;
  const Eigen::MatrixXcd v = p.find(0, 0)->to_dense();
  const auto keep = interior_mask(t, 1);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    if (!keep[j]) continue;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto* blk = full.find(i, j);
      const double expected = to_double(comm.entry(i, j).re);
      const Eigen::MatrixXcd got = blk ? blk->to_dense() : Eigen::MatrixXcd::Zero(v.rows(), v.cols());
      CHECK((got - expected * v).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("multiplier decay on F_2 with eps = ln 3") {
  const auto counts = free_ball_sizes(2, 10);
  CHECK(counts.back() == 118097);
  const auto rep = multiplier_decay(VisualParams(2, std::log(3.0)), counts, q(3));
  CHECK(rep.exact);
  CHECK(rep.certified);
  CHECK(rep.sup_ratio == q(2 * 59049 - 1, 59049));
  CHECK(rep.sup < 2.0);
  CHECK(rep.values.values.size() == counts.back());
  CHECK(rep.c1 == doctest::Approx(rep.sup));
  CHECK(rep.c2 >= rep.c1);
  // Brute force: s_n = 3^{-k} on shell k, so s_n * n is exact.
  Rational worst = 0;
  std::size_t prev = 0;
  Rational scale = 1;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const Rational v = Rational(static_cast<unsigned long>(counts[k])) / scale;
    if (counts[k] > prev && v > worst) worst = v;
    prev = counts[k];
    scale *= 3;
  }
  CHECK(worst == rep.sup_ratio);
  CHECK(worst <= 3);
}

TEST_CASE("multiplier decay on F_3 and large eps") {
  const auto counts = free_ball_sizes(3, 6);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    CHECK(Rational(static_cast<unsigned long>(counts[k])) ==
          1 + q(3, 2) * (pow(q(5), static_cast<unsigned>(k)) - 1));
  }
  const auto rep = multiplier_decay(VisualParams(3, std::log(5.0)), counts, q(3));
  CHECK(rep.exact);
  CHECK(rep.certified);
  const auto big = multiplier_decay(VisualParams(2, 50.0), free_ball_sizes(2, 4), q(3));
  CHECK_FALSE(big.exact);
  CHECK(std::isfinite(big.sup));
}

TEST_CASE("Fredholm axioms") {
  const auto t = spec(2, 3);
  const auto p = projection_P(t);
  const auto g = CrossedProductElement::group(2, w("a"));
  const auto trivial = fredholm_axiom_check(g, p, t, 2.5);
  CHECK(trivial.adjoint_defect.norm < 1e-14);
  CHECK(trivial.idempotent_defect.norm < 1e-14);
  CHECK(trivial.commutator.norm < 1e-14);

  // Q = P lambda^op(e) P with e the indicator of cyl(a).
  const auto e = CrossedProductElement::function(kPhi);
  std::vector<FredholmReport> reps;
  for (std::size_t r : {3u, 4u}) {
    const auto tr = spec(r, r + 1);
    reps.push_back(fredholm_axiom_check(g, compressed_op(e, tr), tr, 2.5));
  }
  CHECK(reps[1].adjoint_defect.norm < 1e-13);
  CHECK(reps[1].idempotent_defect.norm > 0.1);
  CHECK(fredholm_stable(reps[0], reps[1], 0.05));
  for (const auto& r : reps) {
    CHECK(std::is_sorted(r.idempotent_defect.schatten_partial.begin(), r.idempotent_defect.schatten_partial.end()));
  }

  // Q = P and a = phi: the commutator is the basic one.
  const auto tb = spec(2, 3);
  const auto basic = fredholm_axiom_check(CrossedProductElement::function(kPhi), projection_P(tb), tb, 2.0);
  const auto direct = basic_commutator(kPhi, tb);
  CHECK(basic.commutator.norm == doctest::Approx(direct.commutator_values.norm()));
}

TEST_CASE("index estimate") {
  const auto mu = ps_measure(2, 1);
  const std::size_t radii[] = {3, 4};
  const auto g = index_estimate(CrossedProductElement::group(2, w("ab")), radii, mu);
  REQUIRE(g.value.has_value());
  CHECK(*g.value == 0);
  const auto id = index_estimate(CrossedProductElement::identity(2), radii, mu);
  REQUIRE(id.value.has_value());
  CHECK(*id.value == 0);
  const auto f = index_estimate(CrossedProductElement::function(kPhi), radii, mu);
  CHECK(f.levels.size() == 2);
  const std::size_t one[] = {3};
  CHECK_THROWS_AS(index_estimate(CrossedProductElement::identity(2), one, mu), DomainError);
}
