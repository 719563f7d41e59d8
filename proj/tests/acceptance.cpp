// Acceptance gate: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hypbound/approx_boundary.hpp"
#include "hypbound/cayley_ball.hpp"
#include "hypbound/deviation.hpp"
#include "hypbound/operators.hpp"
#include "hypbound/presentation.hpp"

using namespace hypbound;

namespace {

const GeneratorSet kF2 = GeneratorSet::standard(2);
Word w(std::string_view s) { return parse_word(kF2, s); }
Word power(char c, std::size_t k) { return w(std::string(k, c)); }
const StepFunction& phi() {
  static const StepFunction f = StepFunction::indicator(2, w("a"));
  return f;
}
// p = 1 - (1/4) 3^{-(k-1)}
Rational closed_p(std::size_t k) {
  Rational t = ratio(1, 4);
  for (std::size_t i = 1; i < k; ++i) t /= 3;
  return Rational(1) - t;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> check;
};

Outcome deviation_closed_form() {
  const auto mu = ps_measure(2, 1);
  Outcome o;
  for (std::size_t k = 1; k <= 8; ++k) {
    const Rational p = closed_p(k);
    const Rational want = p * (Rational(1) - p);
    const auto d = deviation(phi(), power('a', k), mu);
    const Rational other = deviation_double_integral(phi(), power('a', k), mu);
    if (d.sigma_sq != want || other != want) {
      o.pass = false;
      o.detail = "k=" + std::to_string(k) + " sigma^2=" + to_string(d.sigma_sq) + " want " + to_string(want);
      return o;
    }
  }
  o.detail = "sigma^2(a^k) = p(1-p) exactly for k=1..8 (two routes)";
  return o;
}

Outcome summability_threshold() {
  const auto table = deviation_table(phi(), ps_measure(2, 1), 8);
  Outcome o;
  std::ostringstream d;
  for (const double p : {2.2, 2.5, 3.0, 4.0}) {
    const auto c = lp_certificate(table, p);
    const double bound = std::pow(3.0, 1 - p / 2) + 0.01;
    const bool ok = c.verdict == SummabilityVerdict::converges_geometric && c.ratio_bound <= bound;
    d << "p=" << p << ":" << to_string(c.verdict) << " ratio " << c.ratio_bound << "<=" << bound << "; ";
    o.pass = o.pass && ok;
    if (p == 4.0) o.pass = o.pass && c.exact;
  }
  const auto c2 = lp_certificate(table, 2.0);
  bool shells = c2.exact;
  for (std::size_t k = 2; k <= 8 && shells; ++k) shells = c2.shell_sums_exact.at(k) >= ratio(1, 8);
  o.pass = o.pass && c2.verdict == SummabilityVerdict::diverges && shells;
  d << "p=2:" << to_string(c2.verdict) << ", exact shell sums 2..8 >= 1/8: " << (shells ? "yes" : "no");
  o.detail = d.str();
  return o;
}

Outcome operator_deviation_oracle() {
  TruncationSpec t;
  t.n = 2;
  t.radius = 3;
  t.depth = 4;
  const auto rep = basic_commutator(phi(), t);
  const auto table = deviation_table(phi(), ps_measure(2, 1), 3);
  std::vector<double> sigma;
  for (const auto& e : table.entries) sigma.push_back(e.sigma());
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  const auto& pi = rep.pi_values.values;
  const auto& com = rep.commutator_values.values;
  double err = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    err = std::max(err, std::abs(pi[i] - sigma[i]));
    // [lambda, P] = (1-P) lambda P - P lambda (1-P): every sigma twice.
    err = std::max(err, std::abs(com[2 * i] - sigma[i]));
    err = std::max(err, std::abs(com[2 * i + 1] - sigma[i]));
  }
  const double rest = std::max(pi[sigma.size()], com[2 * sigma.size()]);
  Outcome o;
  o.pass = rep.interior_count == sigma.size() && err <= 1e-10 && rest <= 1e-10;
  std::ostringstream d;
  d << sigma.size() << " interior sigmas; max |s - sigma| = " << err << ", largest remaining value " << rest
    << " (tol 1e-10)";
  o.detail = d.str();
  return o;
}

Outcome decay_law() {
  const auto counts = free_ball_sizes(2, 10);
  const auto rep = multiplier_decay(VisualParams(2, std::log(3.0)), counts, Rational(3));
  // Independent sweep over every n <= m_10: s_n = 3^{-k} on shell k, D = 1.
  Rational worst = 0, scale = 1;
  std::size_t prev = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t n = prev + 1; n <= counts[k]; ++n) {
      const Rational v = Rational(static_cast<long>(n)) * scale;
      if (v > worst) worst = v;
    }
    prev = counts[k];
    scale /= 3;
  }
  Outcome o;
  o.pass = rep.exact && rep.certified && worst <= 3 && worst == rep.sup_ratio;
  o.detail = "sup_n s_n n = " + to_string(worst) + " over n <= " + std::to_string(counts.back()) + " (bound 3, exact)";
  return o;
}

Outcome ahlfors() {
  Outcome o;
  std::ostringstream d;
  for (const std::size_t n : {2u, 3u}) {
    const double e = std::log(static_cast<double>(2 * n - 1));
    for (const double eps : {e, e / 2}) {
      const auto rep = ahlfors_check(ps_measure(n, 1), VisualParams(n, eps), 6);
      const Rational want = ratio(static_cast<long>(2 * n - 1), static_cast<long>(2 * n));
      bool ok = rep.min_ratio == want && rep.max_ratio == want && rep.ratios.size() == 6;
      for (const auto& r : rep.ratios) ok = ok && r == want;
      o.pass = o.pass && ok;
    }
    d << "n=" << n << ": " << (2 * n - 1) << "/" << (2 * n) << "; ";
  }
  o.detail = d.str() + "depths 1..6, both epsilons, exact";
  return o;
}

Outcome extension() {
  const auto lim = extension_limit(phi(), power('a', 9), 8, ps_measure(2, 1));
  Outcome o;
  for (std::size_t k = 1; k <= 8; ++k) {
    const Rational want = Rational(1) - closed_p(k);
    if (lim.errors.at(k) != want) {
      o.pass = false;
      o.detail = "k=" + std::to_string(k) + " error " + to_string(lim.errors.at(k)) + " want " + to_string(want);
      return o;
    }
  }
  o.detail = "|E phi(a^k) - 1| = (1/4) 3^{-(k-1)} exactly for k=1..8";
  return o;
}

Outcome twisted() {
  const auto mu = ps_measure(2, 1);
  const auto check = twisted_diagonal_check(phi(), w("a"), 4, mu);
  const auto rep = twisted_commutator(CrossedProductElement::function(phi()), CrossedProductElement::group(2, w("a")),
                                      4, mu, 2.5);
  Outcome o;
  o.pass = check.diagonal && check.all_match && !check.entries.empty() && rep.previous &&
           rep.relative_change < 0.05;
  std::ostringstream d;
  d << check.entries.size() << " interior diagonal entries exact: " << (check.all_match ? "yes" : "no")
    << "; Schatten-2.5 sums R=3 " << (rep.previous ? rep.previous->schatten_sum : NAN) << ", R=4 "
    << rep.current.schatten_sum << ", change " << 100 * rep.relative_change << "% (< 5%)";
  o.detail = d.str();
  return o;
}

Outcome hyperbolicity() {
  const CayleyBall ball(GroupPresentation::free_group(2), 6);
  const auto hyp = check_hyperbolicity(ball, Word{}, 2);
  const auto genus2 = parse_presentation("generators: a b c d\nrelator: abABcdCD\n");
  const auto sc = check_small_cancellation(genus2);
  const double kappa = 15 * std::log(7.0) * 8;
  Outcome o;
  o.pass = hyp.delta == 0 && sc.passes_c16 && sc.max_piece_len == 1 && sc.euler_char == -2 &&
           std::abs(sc.kappa - kappa) < 1e-9;
  std::ostringstream d;
  d << "F2 R=6 delta=" << to_string(hyp.delta) << " over " << hyp.point_count << " points; genus-2 C'(1/6) "
    << (sc.passes_c16 ? "passes" : "fails") << ", max piece " << sc.max_piece_len << ", euler_char "
    << sc.euler_char << ", kappa " << sc.kappa;
  o.detail = d.str();
  return o;
}

Outcome comparable() {
  const Rational density[] = {Rational(1), Rational(2), Rational(1), Rational(2)};
  const double ps[] = {2.0, 3.0};
  const auto rep = comparable_invariance(phi(), 1, density, Rational(2), ps, 8);
  Outcome o;
  o.pass = rep.ratios_within_bounds && rep.verdicts_agree && rep.min_ratio >= 0.5 && rep.max_ratio <= 2.0;
  std::ostringstream d;
  d << "sigma'/sigma in [" << rep.min_ratio << ", " << rep.max_ratio << "]; verdicts p=2: "
    << to_string(rep.base_certificates[0].verdict) << "/" << to_string(rep.comparable_certificates[0].verdict)
    << ", p=3: " << to_string(rep.base_certificates[1].verdict) << "/"
    << to_string(rep.comparable_certificates[1].verdict);
  o.detail = d.str();
  return o;
}

Outcome calibration() {
  const SphereBoundaryModel m(GroupPresentation::free_group(2), 10, 0.5, 2);
  const auto rep = calibrate_free(m, {Word{}, w("a"), w("ab"), w("aaa")},
                                  {{w("a"), w("b")}, {Word{}, w("a")}, {w("ab"), w("ba")}}, 100000, 42);
  double worst = 0;
  for (const auto& e : rep.entries) worst = std::max(worst, e.z);
  Outcome o;
  o.pass = rep.pass && rep.entries.size() == 7;
  std::ostringstream d;
  d << rep.entries.size() << " estimates at N=1e5, seed 42, R=10, eps=0.5; max |z| = " << worst << " (<= 3)";
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "deviation closed form", 10, deviation_closed_form},
      {2, "summability threshold", 30, summability_threshold},
      {3, "operator-deviation oracle", 60, operator_deviation_oracle},
      {4, "singular-value decay law", 5, decay_law},
      {5, "Ahlfors regularity", 5, ahlfors},
      {6, "boundary extension limit", 10, extension},
      {7, "twisted commutator decay", 120, twisted},
      {8, "hyperbolicity and small cancellation", 60, hyperbolicity},
      {9, "comparable-measure invariance", 30, comparable},
      {10, "approximate-model calibration", 60, calibration},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %-38s %8.3f s (limit %3.0f s)  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_seconds, o.detail.c_str(), in_time ? "" : " [over time budget]");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
