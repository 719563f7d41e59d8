#include <algorithm>
#include <functional>

#include <cmath>

#include "doctest.h"
#include "hypbound/deviation.hpp"
#include "hypbound/error.hpp"

using namespace hypbound;

namespace {
Word w(std::string_view s, std::size_t n = 2) { return parse_word(GeneratorSet::standard(n), s); }
Rational q(long p, long r = 1) { return ratio(p, r); }
Word power(std::string_view letter, std::size_t k) {
  std::string s;
  for (std::size_t i = 0; i < k; ++i) s += letter;
  return w(s);
}
const StepFunction kPhi = StepFunction::indicator(2, parse_word(GeneratorSet::standard(2), "a"));
}  // namespace

TEST_CASE("expectations of the indicator of cyl(a)") {
  const auto mu = ps_measure(2, 1);
  CHECK(expectation(kPhi, Word{}, mu) == ComplexRational(q(1, 4)));
  CHECK(expectation(kPhi, w("a"), mu) == ComplexRational(q(3, 4)));
  CHECK(expectation(kPhi, w("aa"), mu) == ComplexRational(q(11, 12)));
  CHECK(expectation(kPhi, w("b"), mu) == ComplexRational(q(1, 12)));
  CHECK(expectation(kPhi, w("A"), mu) == ComplexRational(q(1, 12)));
  CHECK(deviation(kPhi, w("aa"), mu).sigma_sq == q(11, 144));
  CHECK(deviation(kPhi, Word{}, mu).sigma_sq == q(3, 16));
}

TEST_CASE("closed form along a^k") {
  const auto mu = ps_measure(2, 1);
  for (std::size_t k = 1; k <= 8; ++k) {
    const Rational p = 1 - q(1, 4) / pow(q(3), static_cast<unsigned>(k - 1));
    const auto dev = deviation(kPhi, power("a", k), mu);
    CHECK(dev.sigma_sq == p * (1 - p));
    CHECK(deviation_double_integral(kPhi, power("a", k), mu) == dev.sigma_sq);
  }
}

TEST_CASE("deviation is invariant under adding constants") {
  const auto mu = ps_measure(2, 1);
  const auto centered = kPhi - ComplexRational(q(1, 4));
  for (std::size_t L = 0; L <= 3; ++L) {
    for (const auto& g : words_of_length(2, L)) {
      CHECK(deviation(centered, g, mu).sigma_sq == deviation(kPhi, g, mu).sigma_sq);
    }
  }
}

TEST_CASE("double-integral route agrees on a complex function") {
  const auto mu = ps_measure(2, 2);
  std::vector<ComplexRational> v;
  for (std::size_t i = 0; i < cell_count(2, 2); ++i) {
    v.emplace_back(q(static_cast<long>(i % 5), 3), q(static_cast<long>(i % 3) - 1, 2));
  }
  const StepFunction f(2, 2, v);
  for (std::size_t L = 0; L <= 3; ++L) {
    for (const auto& g : words_of_length(2, L)) {
      CHECK(deviation_double_integral(f, g, mu) == deviation(f, g, mu).sigma_sq);
    }
  }
}

TEST_CASE("covariance: E(g.phi)(h) = E phi(g^{-1} h)") {
  const auto mu = ps_measure(2, 1);
  for (const auto& g : words_of_length(2, 2)) {
    const auto moved = kPhi.translate(g);
    for (std::size_t L = 0; L <= 2; ++L) {
      for (const auto& h : words_of_length(2, L)) {
        CHECK(expectation(moved, h, mu) == expectation(kPhi, g.inverse() * h, mu));
      }
    }
  }
}

TEST_CASE("Lipschitz bound on expectation differences") {
  const auto mu = ps_measure(2, 1);
  const double eps = 0.5;
  const double lip = lipschitz_norm(kPhi, eps);
  CHECK(lip == doctest::Approx(1.0));
  for (std::size_t L = 0; L <= 2; ++L) {
    for (const auto& h1 : words_of_length(2, L)) {
      for (const auto& h2 : words_of_length(2, 2)) {
        const double diff =
            std::abs(to_double(expectation(kPhi, h1, mu).re) - to_double(expectation(kPhi, h2, mu).re));
        CHECK(diff <= lip * single_integral_exact(mu, h1, h2, eps) + 1e-12);
      }
    }
  }
}

TEST_CASE("deviation table") {
  const auto table = deviation_table(kPhi, ps_measure(2, 1), 3, {1e10, 3});
  REQUIRE(table.entries.size() == 53);
  // Frozen from an independent brute-force enumeration.
  std::vector<Rational> sq;
  for (const auto& e : table.entries) sq.push_back(e.sigma_sq);
  std::sort(sq.begin(), sq.end(), std::greater<>());
  std::vector<Rational> expected;
  expected.insert(expected.end(), 2, q(3, 16));
  expected.insert(expected.end(), 6, q(11, 144));
  expected.insert(expected.end(), 18, q(35, 1296));
  expected.insert(expected.end(), 27, q(107, 11664));
  CHECK(sq == expected);
  CHECK(table.shell_max_sq.size() == 4);
  CHECK(table.find(w("aa"))->sigma_sq == q(11, 144));
  const auto serial = deviation_table(kPhi, ps_measure(2, 1), 3, {1e10, 1});
  for (std::size_t i = 0; i < serial.entries.size(); ++i) CHECK(serial.entries[i].sigma_sq == table.entries[i].sigma_sq);
  CHECK_THROWS_AS(deviation_table(kPhi, ps_measure(2, 1), 8, {1e3, 1}), CapacityError);
}

TEST_CASE("shell maxima decay like 3^{-k}") {
  const auto table = deviation_table(kPhi, ps_measure(2, 1), 6);
  for (std::size_t k = 1; k <= 6; ++k) {
    const Rational x = q(3, 4) / pow(q(3), static_cast<unsigned>(k));
    CHECK(table.shell_max_sq[k] == x * (1 - x));
  }
  const auto fit = decay_fit(table);
  CHECK_FALSE(fit.constant);
  CHECK(fit.rate == doctest::Approx(-0.5 * std::log(3.0)).epsilon(0.05));
  const auto flat = deviation_table(StepFunction::constant(2, q(2)), ps_measure(2, 1), 4);
  CHECK(decay_fit(flat).constant);
}

TEST_CASE("summability certificates") {
  const auto table = deviation_table(kPhi, ps_measure(2, 1), 8);
  for (double p : {2.2, 2.5, 3.0, 4.0}) {
    const auto c = lp_certificate(table, p);
    CHECK(c.verdict == SummabilityVerdict::converges_geometric);
    CHECK(c.ratio_bound <= std::pow(3.0, 1 - p / 2) + 0.01);
  }
  const auto two = lp_certificate(table, 2.0);
  CHECK(two.exact);
  CHECK(two.verdict == SummabilityVerdict::diverges);
  for (std::size_t k = 1; k <= 8; ++k) {
    CHECK(two.shell_sums_exact[k] == q(1, 2) - q(1, 4) / pow(q(3), static_cast<unsigned>(k)));
  }
  CHECK_THROWS_AS(lp_certificate(table, 0.0), DomainError);
  CHECK_THROWS_AS(lp_certificate(deviation_table(kPhi, ps_measure(2, 1), 3), 3.0), DomainError);
  const auto flat = deviation_table(StepFunction::constant(2, q(1)), ps_measure(2, 1), 5);
  CHECK(lp_certificate(flat, 2.0).verdict == SummabilityVerdict::converges_geometric);
}

TEST_CASE("extension to the boundary") {
  const auto lim = extension_limit(kPhi, power("a", 8), 8, ps_measure(2, 1));
  CHECK(lim.boundary_value == ComplexRational(q(1)));
  for (std::size_t k = 1; k <= 8; ++k) CHECK(lim.errors[k] == q(1, 4) / pow(q(3), static_cast<unsigned>(k - 1)));
  CHECK_THROWS(extension_limit(kPhi, power("a", 3), 8, ps_measure(2, 1)));
}

TEST_CASE("comparable measures") {
  const Rational density[] = {q(1), q(2), q(1), q(2)};
  const double ps[] = {2.0, 3.0};
  const auto rep = comparable_invariance(kPhi, 1, density, q(2), ps, 6);
  CHECK(rep.ratios_within_bounds);
  CHECK(rep.verdicts_agree);
  CHECK(rep.min_ratio >= 0.5);
  CHECK(rep.max_ratio <= 2.0);
  const Rational wild[] = {q(1), q(10), q(1), q(1)};
  CHECK_THROWS_AS(comparable_invariance(kPhi, 1, wild, q(2), ps, 6), DomainError);
}
