#include "hypbound/approx_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "hypbound/boundary.hpp"
#include "hypbound/error.hpp"
#include "hypbound/parallel.hpp"

namespace hypbound {

namespace {

constexpr std::size_t kBatch = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Moments {
  std::size_t count = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    const double n = static_cast<double>(count), m = static_cast<double>(o.count);
    const double d = o.mean - mean;
    mean += d * m / (n + m);
    m2 += o.m2 + d * d * n * m / (n + m);
    count += o.count;
  }
};

// Samples `samples` draws of f(rng) in fixed-size batches, each with its own
// derived seed, and merges batch moments in batch order.
template <typename Draw>
Moments sample(std::size_t samples, std::uint64_t seed, unsigned threads, Draw&& draw) {
  const std::size_t batches = (samples + kBatch - 1) / kBatch;
  std::vector<Moments> parts(batches);
  parallel_chunks(batches, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      std::mt19937_64 rng(batch_seed(seed, b));
      const std::size_t count = std::min(kBatch, samples - b * kBatch);
      Moments& mo = parts[b];
      for (std::size_t s = 0; s < count; ++s) mo.add(draw(rng));
    }
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

MonteCarloEstimate finish(const Moments& mo, std::uint64_t seed) {
  MonteCarloEstimate e;
  e.samples = mo.count;
  e.seed = seed;
  e.value = mo.mean;
  if (mo.count > 1) e.stderr_ = std::sqrt(mo.m2 / static_cast<double>(mo.count - 1) / static_cast<double>(mo.count));
  return e;
}

}  // namespace

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch) {
  return splitmix64(splitmix64(seed) ^ splitmix64(batch + 0x632BE59BD9B4E019ULL));
}

SphereBoundaryModel::SphereBoundaryModel(const GroupPresentation& presentation, std::size_t radius, double epsilon,
                                         unsigned threads)
    : ball_(presentation, radius), proxy_radius_(radius / 2), epsilon_(epsilon), threads_(std::max(1u, threads)) {
  if (radius < 2) throw DomainError("sphere model needs ball radius >= 2");
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  for (std::size_t i = 0; i < ball_.size(); ++i)
    if (ball_.length(i) == proxy_radius_) proxies_.push_back(i);
  const std::size_t P = proxies_.size();
  pair_distance_.assign(P * P, 0);
  parallel_chunks(P, threads_, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = ball_.bfs_distances(proxies_[i]);
      for (std::size_t j = 0; j < P; ++j) pair_distance_[i * P + j] = row[proxies_[j]];
    }
  });
}

std::vector<std::size_t> SphereBoundaryModel::translate(const Word& g) const {
  if (g.length() + proxy_radius_ > ball_.radius())
    throw RadiusInsufficient("translate needs |g| + proxy radius within the ball", g.length() + proxy_radius_);
  const auto start = ball_.locate(g);
  if (!start) throw RadiusInsufficient("g is not in the ball", g.length());
  std::vector<std::size_t> out;
  out.reserve(proxies_.size());
  for (const std::size_t p : proxies_) {
    const auto x = ball_.follow(*start, ball_.element(p).letters());
    if (!x) throw RadiusInsufficient("translated proxy leaves the ball", g.length() + proxy_radius_);
    out.push_back(*x);
  }
  return out;
}

std::size_t SphereBoundaryModel::distance(std::size_t from, std::size_t to) const {
  if (from == to) return 0;
  std::vector<std::uint8_t> dist(ball_.size(), 0xFF);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  const std::size_t alphabet = ball_.presentation().generators().alphabet_size();
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t x = 0; x < alphabet; ++x) {
      const auto v = ball_.neighbor(u, static_cast<Letter>(x));
      if (v == CayleyBall::kNone || dist[v] != 0xFF) continue;
      dist[v] = static_cast<std::uint8_t>(dist[u] + 1);
      if (static_cast<std::size_t>(v) == to) return dist[v];
      queue.push_back(static_cast<std::size_t>(v));
    }
  }
  throw RadiusInsufficient("points are disconnected inside the ball", ball_.radius() + 1);
}

double default_epsilon(const GroupPresentation& p) {
  if (p.is_free()) return std::log(static_cast<double>(2 * p.rank() - 1)) / 2.0;
  const auto sc = check_small_cancellation(p);
  return 1.0 / (5.0 * static_cast<double>(sc.delta_bound));
}

MonteCarloEstimate double_integral_estimate(const SphereBoundaryModel& m, const Word& g, std::size_t samples,
                                            std::uint64_t seed) {
  if (samples < 2) throw DomainError("need at least 2 samples");
  const auto moved = m.translate(g);
  const std::size_t P = moved.size();
  std::vector<double> len(P);
  for (std::size_t i = 0; i < P; ++i) len[i] = static_cast<double>(m.ball().length(moved[i]));
  const double eps = m.epsilon();
  std::uniform_int_distribution<std::size_t> pick(0, P - 1);
  // d_eps(x, y)^2 = exp(-eps * 2(x,y)_e) and 2(x,y)_e = |x| + |y| - d(x,y);
  // translation preserves d.
  const Moments mo = sample(samples, seed, m.threads(), [&](std::mt19937_64& rng) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i == j) return 0.0;
    return std::exp(-eps * (len[i] + len[j] - m.proxy_distance(i, j)));
  });
  MonteCarloEstimate e = finish(mo, seed);
  const double scale = std::exp(-eps * static_cast<double>(g.length()));
  const double root = std::sqrt(std::max(0.0, e.value));
  e.ratio = root / scale;
  e.ratio_stderr = root > 0 ? e.stderr_ / (2 * root) / scale : 0.0;
  return e;
}

MonteCarloEstimate single_integral_estimate(const SphereBoundaryModel& m, const Word& g, const Word& h,
                                            std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw DomainError("need at least 2 samples");
  const auto gx = m.translate(g);
  const auto hx = m.translate(h);
  const std::size_t P = gx.size();
  std::vector<double> value(P, 0.0);
  const double eps = m.epsilon();
  parallel_chunks(P, m.threads(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (gx[i] == hx[i]) continue;
      const double twice = static_cast<double>(m.ball().length(gx[i]) + m.ball().length(hx[i])) -
                           static_cast<double>(m.distance(gx[i], hx[i]));
      value[i] = std::exp(-eps * twice / 2.0);
    }
  });
  std::uniform_int_distribution<std::size_t> pick(0, P - 1);
  const Moments mo = sample(samples, seed, m.threads(), [&](std::mt19937_64& rng) { return value[pick(rng)]; });
  MonteCarloEstimate e = finish(mo, seed);
  // (g, h)_e from the ball, with h g-positions located directly.
  const auto gi = m.ball().locate(g);
  const auto hi = m.ball().locate(h);
  double scale = 1.0;
  if (gi && hi) {
    const double twice = static_cast<double>(g.length() + h.length()) - static_cast<double>(m.distance(*gi, *hi));
    scale = std::exp(-eps * twice / 2.0);
  }
  e.ratio = e.value / scale;
  e.ratio_stderr = e.stderr_ / scale;
  return e;
}

ConvergenceScan convergence_scan(const SphereBoundaryModel& m, const Word& ray) {
  ConvergenceScan out;
  const std::size_t P = m.proxies().size();
  for (std::size_t k = 1; k <= ray.length(); ++k) {
    const auto moved = m.translate(ray.prefix(k));
    std::vector<long> len(P);
    for (std::size_t i = 0; i < P; ++i) len[i] = static_cast<long>(m.ball().length(moved[i]));
    std::size_t best = 0;
    std::vector<std::size_t> counts(P, 0);
    parallel_chunks(P, m.threads(), [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < P; ++j)
          if (len[c] + len[j] - static_cast<long>(m.proxy_distance(c, j)) >= static_cast<long>(k)) ++count;
        counts[c] = count;
      }
    });
    for (const auto c : counts) best = std::max(best, c);
    const double conc = static_cast<double>(best) / static_cast<double>(P);
    if (!out.concentration.empty() && conc < out.concentration.back() - 1e-12) out.nondecreasing = false;
    out.concentration.push_back(conc);
  }
  return out;
}

CalibrationReport calibrate_free(const SphereBoundaryModel& m, const std::vector<Word>& doubles,
                                 const std::vector<std::pair<Word, Word>>& singles, std::size_t samples,
                                 std::uint64_t seed, double z_max) {
  const auto& p = m.ball().presentation();
  if (!p.is_free()) throw DomainError("calibration needs a free presentation");
  const CylinderMeasure mu = ps_measure(p.rank(), 1);
  CalibrationReport report;
  auto judge = [&](CalibrationEntry& e) {
    const double diff = std::abs(e.estimate.value - e.exact);
    e.z = e.estimate.stderr_ > 0 ? diff / e.estimate.stderr_ : (diff == 0 ? 0.0 : INFINITY);
    e.pass = e.z <= z_max;
    report.pass = report.pass && e.pass;
    report.entries.push_back(e);
  };
  for (const auto& g : doubles) {
    CalibrationEntry e;
    e.kind = "double";
    e.g = g;
    e.exact = double_integral_exact(mu, g, m.epsilon());
    e.estimate = double_integral_estimate(m, g, samples, seed);
    judge(e);
  }
  for (const auto& [g, h] : singles) {
    CalibrationEntry e;
    e.kind = "single";
    e.g = g;
    e.h = h;
    e.exact = single_integral_exact(mu, g, h, m.epsilon());
    e.estimate = single_integral_estimate(m, g, h, samples, seed);
    judge(e);
  }
  return report;
}

SnowflakeReport snowflake_check(const GroupPresentation& p, std::size_t radius, double epsilon,
                                const std::vector<double>& alphas, const std::vector<Word>& words,
                                std::size_t samples, std::uint64_t seed, double spread, unsigned threads) {
  if (words.empty()) throw DomainError("snowflake check needs words");
  SnowflakeReport out;
  out.alphas = alphas;
  for (const double alpha : alphas) {
    const SphereBoundaryModel m(p, radius, alpha * epsilon, threads);
    std::vector<double> ratios;
    for (const auto& g : words) ratios.push_back(double_integral_estimate(m, g, samples, seed).ratio);
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    out.verdicts.push_back(*lo > 0 && *hi / *lo <= spread ? "bounded" : "unbounded");
    out.ratios.push_back(std::move(ratios));
  }
  for (const auto& v : out.verdicts) out.agree = out.agree && v == out.verdicts.front();
  return out;
}

}  // namespace hypbound
