#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hypbound/cayley_ball.hpp"
#include "hypbound/presentation.hpp"

namespace hypbound {

// Heuristic boundary proxy: the sphere of radius rho = floor(R/2) inside the
// Cayley ball of radius R, with the uniform counting measure. Translates g.xi
// stay inside the ball for |g| <= R - rho. Gromov products are based at e and
// use graph distances inside the ball.
class SphereBoundaryModel {
 public:
  SphereBoundaryModel(const GroupPresentation& presentation, std::size_t radius, double epsilon,
                      unsigned threads = 1);

  const CayleyBall& ball() const noexcept { return ball_; }
  std::size_t radius() const noexcept { return ball_.radius(); }
  std::size_t proxy_radius() const noexcept { return proxy_radius_; }
  double epsilon() const noexcept { return epsilon_; }
  unsigned threads() const noexcept { return threads_; }
  // Ball indices of the proxy points (length exactly proxy_radius).
  const std::vector<std::size_t>& proxies() const noexcept { return proxies_; }
  // Graph distance between proxies i and j.
  std::uint8_t proxy_distance(std::size_t i, std::size_t j) const { return pair_distance_[i * proxies_.size() + j]; }

  // Ball index of g.xi_i for every proxy; throws RadiusInsufficient when
  // |g| > R - rho or a translate leaves the ball.
  std::vector<std::size_t> translate(const Word& g) const;
  // Graph distance inside the ball (BFS).
  std::size_t distance(std::size_t from, std::size_t to) const;

 private:
  CayleyBall ball_;
  std::size_t proxy_radius_;
  double epsilon_;
  unsigned threads_;
  std::vector<std::size_t> proxies_;
  std::vector<std::uint8_t> pair_distance_;
};

// 1/(5 delta) with delta = 3 max|r|: the visual parameter used for
// presentations with relators. Free presentations get ln(2n-1)/2.
double default_epsilon(const GroupPresentation& p);

struct MonteCarloEstimate {
  double value = 0;
  double stderr_ = 0;
  double ratio = 0;         // normalized statistic, see each estimator
  double ratio_stderr = 0;  // delta-method propagation
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

// Derived seed of sampling batch `batch`: a pure function of (seed, batch).
std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch);

// Mean of d_eps(g xi, g xi')^2 over sampled proxy pairs, where d_eps(x, y) =
// exp(-eps (x,y)_e) for x != y and 0 for x = y. ratio = value^{1/2} / exp(-eps |g|).
MonteCarloEstimate double_integral_estimate(const SphereBoundaryModel& m, const Word& g, std::size_t samples,
                                            std::uint64_t seed);

// Mean of d_eps(g xi, h xi); ratio = value / exp(-eps (g, h)_e).
MonteCarloEstimate single_integral_estimate(const SphereBoundaryModel& m, const Word& g, const Word& h,
                                            std::size_t samples, std::uint64_t seed);

struct ConvergenceScan {
  std::vector<double> concentration;  // k = 0..K, heaviest ball of radius exp(-eps k/2)
  bool nondecreasing = true;
};

// For each prefix g_k of the ray, the largest proxy mass that (g_k)_* puts in
// a d_eps-ball of radius exp(-eps k / 2), i.e. {x : (x, c)_e >= k/2}.
ConvergenceScan convergence_scan(const SphereBoundaryModel& m, const Word& ray);

struct CalibrationEntry {
  std::string kind;  // "double" or "single"
  Word g;
  Word h;  // single integrals only
  double exact = 0;
  MonteCarloEstimate estimate;
  double z = 0;  // |estimate - exact| / stderr
  bool pass = false;
};

struct CalibrationReport {
  std::vector<CalibrationEntry> entries;
  bool pass = true;
};

// On a free presentation, compares the proxy estimates with the exact
// cylinder-algebra integrals under the uniform measure; each must lie within
// `z_max` standard errors.
CalibrationReport calibrate_free(const SphereBoundaryModel& m, const std::vector<Word>& doubles,
                                 const std::vector<std::pair<Word, Word>>& singles, std::size_t samples,
                                 std::uint64_t seed, double z_max = 3.0);

struct SnowflakeReport {
  std::vector<double> alphas;
  std::vector<std::vector<double>> ratios;  // per alpha, per word
  std::vector<std::string> verdicts;        // "bounded" when max/min ratio <= spread
  bool agree = true;
};

// Recomputes the double-integral ratios at eps' = alpha eps for each alpha and
// compares the bounded/unbounded verdicts.
SnowflakeReport snowflake_check(const GroupPresentation& p, std::size_t radius, double epsilon,
                                const std::vector<double>& alphas, const std::vector<Word>& words,
                                std::size_t samples, std::uint64_t seed, double spread = 10.0, unsigned threads = 1);

}  // namespace hypbound
