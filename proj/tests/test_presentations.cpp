#include <random>

#include <cmath>

#include "doctest.h"
#include "hypbound/cayley_ball.hpp"
#include "hypbound/error.hpp"
#include "hypbound/presentation.hpp"
#include "hypbound/word.hpp"

using namespace hypbound;

namespace {
Word w(std::string_view s, std::size_t n = 2) { return parse_word(GeneratorSet::standard(n), s); }
}  // namespace

TEST_CASE("free reduction") {
  const auto gens = GeneratorSet::standard(2);
  CHECK(format_word(gens, w("abBa")) == "aa");
  CHECK(format_word(gens, w("aA")) == "");
  CHECK(w("e").empty());
  CHECK(w("1").empty());
  CHECK((w("ab") * w("Ba")) == w("aa"));
  CHECK(w("abA").inverse() == w("aBA"));
  CHECK_THROWS_AS(w("ax"), ParseError);
}

TEST_CASE("reduction is a homomorphism from raw words") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> letter(0, 3), len(0, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Letter> u(len(rng)), v(len(rng));
    for (auto& x : u) x = static_cast<Letter>(letter(rng));
    for (auto& x : v) x = static_cast<Letter>(letter(rng));
    std::vector<Letter> uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    CHECK(Word::reduce(uv) == Word::reduce(u) * Word::reduce(v));
    CHECK(is_reduced(Word::reduce(uv).letters()));
  }
}

TEST_CASE("shortlex order") {
  CHECK(w("b") < w("aa"));
  CHECK(w("a") < w("A"));
  CHECK(w("A") < w("b"));
  const auto two = words_of_length(2, 2);
  REQUIRE(two.size() == 12);
  CHECK(two.front() == w("aa"));
  CHECK(std::is_sorted(two.begin(), two.end()));
}

TEST_CASE("presentation parsing") {
  const auto p = parse_presentation("# comment\ngenerators: a b c d\nrelator: abABcdCD\n");
  CHECK(p.rank() == 4);
  REQUIRE(p.relators().size() == 1);
  CHECK(p.max_relator_length() == 8);
  CHECK_THROWS_AS(parse_presentation("generators: a\n"), ElementaryGroupError);
  CHECK_THROWS_AS(parse_presentation("generators: a b\nrelator: aX\n"), ParseError);
  CHECK_THROWS_AS(parse_presentation("generators: a b\nrelator: aA\n"), ParseError);
  CHECK_THROWS_AS(GroupPresentation::free_group(1), ElementaryGroupError);
  const auto q = load_presentation(HYPBOUND_DATA_DIR "/genus2.grp");
  CHECK(q.relators() == p.relators());
}

TEST_CASE("small cancellation") {
  const auto genus2 = load_presentation(HYPBOUND_DATA_DIR "/genus2.grp");
  const auto rep = check_small_cancellation(genus2);
  CHECK(rep.passes_c16);
  CHECK(rep.max_piece_len == 1);
  CHECK(rep.min_relator_len == 8);
  CHECK(rep.euler_char == -2);
  CHECK(rep.delta_bound == 24);
  CHECK(rep.kappa == doctest::Approx(15 * std::log(7.0) * 8).epsilon(1e-14));

  const auto free = check_small_cancellation(GroupPresentation::free_group(2));
  CHECK(free.vacuous);
  CHECK(free.passes_c16);
  CHECK(free.euler_char == -1);

  // The torus relator has pieces of length 1 against length 4.
  const auto torus = parse_presentation("generators: a b\nrelator: abAB\n");
  CHECK_FALSE(check_small_cancellation(torus).passes_c16);
  // A proper power has a full-length piece from its period.
  const auto power = parse_presentation("generators: a b\nrelator: abab\n");
  CHECK(check_small_cancellation(power).max_piece_len >= 2);
}

TEST_CASE("free ball growth") {
  CayleyBall ball(GroupPresentation::free_group(2), 3);
  CHECK(growth_counts(ball) == std::vector<std::size_t>{1, 5, 17, 53});
  CayleyBall ball3(GroupPresentation::free_group(3), 2);
  CHECK(growth_counts(ball3) == std::vector<std::size_t>{1, 7, 37});
  CHECK(ball.certified_radius() == 3);
  CHECK(ball.locate(w("abA")).has_value());
  CHECK_FALSE(ball.locate(w("abAB")).has_value());
  const auto e = entropy_estimate(growth_counts(CayleyBall(GroupPresentation::free_group(2), 8)));
  CHECK(e.entropy == doctest::Approx(std::log(3.0)).epsilon(0.02));
}

TEST_CASE("genus-2 ball") {
  const auto genus2 = load_presentation(HYPBOUND_DATA_DIR "/genus2.grp");
  CayleyBall ball(genus2, 4);
  const auto counts = growth_counts(ball);
  // Spheres of the genus-2 surface group: 1, 8, 56, 392, 2648 (the first
  // relation appears at length 4: abAB = dcDC).
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 9);
  CHECK(counts[2] == 65);
  CHECK(counts[3] == 457);
  CHECK(ball.certified_radius() == 2);
  CHECK(ball.locate(w("abAB", 4)) == ball.locate(w("dcDC", 4)));
}

TEST_CASE("Gromov products on the tree equal common prefixes") {
  const auto f2 = GroupPresentation::free_group(2);
  CayleyBall ball(f2, 6);
  std::vector<Word> pts;
  for (std::size_t k = 0; k <= 3; ++k) {
    for (auto& x : words_of_length(2, k)) pts.push_back(x);
  }
  for (const auto& x : pts) {
    for (const auto& y : pts) {
      const Rational lcp(static_cast<unsigned long>(common_prefix_length(x, y)));
      CHECK(gromov_product(f2, x, y, Word{}) == lcp);
      CHECK(gromov_product(ball, x, y, Word{}) == lcp);
    }
  }
}

TEST_CASE("hyperbolicity") {
  const auto rep = check_hyperbolicity(CayleyBall(GroupPresentation::free_group(2), 6), Word{}, 2);
  CHECK(rep.delta == 0);
  CHECK(rep.point_count == 1457);
  const auto single = check_hyperbolicity(CayleyBall(GroupPresentation::free_group(2), 6), Word{}, 1);
  CHECK(single.delta == rep.delta);
  CHECK_THROWS_AS(check_hyperbolicity(CayleyBall(GroupPresentation::free_group(2), 1), Word{}), DomainError);

  const auto genus2 = load_presentation(HYPBOUND_DATA_DIR "/genus2.grp");
  const auto g = check_hyperbolicity(CayleyBall(genus2, 6), Word{}, 4);
  CHECK(g.delta > 0);
  CHECK(g.delta <= check_small_cancellation(genus2).delta_bound);
  CHECK(gromov_product(CayleyBall(genus2, 4), w("ab", 4), w("ac", 4), Word{}) == 1);
  CHECK_THROWS_AS(gromov_product(CayleyBall(genus2, 4), w("abc", 4), w("bcd", 4), Word{}), RadiusInsufficient);
}
