#include "hypbound/cayley_ball.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "hypbound/error.hpp"
#include "hypbound/parallel.hpp"

namespace hypbound {

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // Keeps the smaller index as root so roots are shortlex-minimal members.
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
  std::vector<std::uint32_t> parent;
};

}  // namespace

CayleyBall::CayleyBall(const GroupPresentation& presentation, std::size_t radius)
    : presentation_(presentation), radius_(radius), alphabet_(presentation.generators().alphabet_size()) {
  build_free_ball();
  if (!presentation_.is_free()) quotient_by_relators();
  sphere_sizes_.assign(radius_ + 1, 0);
  for (const auto& w : elements_) ++sphere_sizes_[w.length()];
}

std::size_t CayleyBall::certified_radius() const noexcept {
  return presentation_.is_free() ? radius_ : radius_ / 2;
}

void CayleyBall::build_free_ball() {
  elements_.assign(1, Word{});
  adjacency_.assign(alphabet_, kNone);
  std::size_t layer_begin = 0;
  for (std::size_t k = 0; k < radius_; ++k) {
    const std::size_t layer_end = elements_.size();
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (std::size_t x = 0; x < alphabet_; ++x) {
        const auto letter = static_cast<Letter>(x);
        if (!elements_[i].empty() && letter == inverse(elements_[i].back())) continue;
        auto letters = elements_[i].letters();
        letters.push_back(letter);
        const auto child = static_cast<std::int32_t>(elements_.size());
        elements_.push_back(Word::from_reduced(std::move(letters)));
        adjacency_.resize(elements_.size() * alphabet_, kNone);
        adjacency_[i * alphabet_ + x] = child;
        adjacency_[static_cast<std::size_t>(child) * alphabet_ + inverse(letter)] = static_cast<std::int32_t>(i);
      }
    }
    layer_begin = layer_end;
  }
}

void CayleyBall::quotient_by_relators() {
  const std::size_t n = elements_.size();
  UnionFind uf(n);

  std::vector<std::vector<Letter>> loops;
  for (const auto& r : presentation_.relators()) {
    for (const auto& w : {r, r.inverse()}) {
      const auto& x = w.letters();
      for (std::size_t s = 0; s < x.size(); ++s) {
        std::vector<Letter> rot(x.begin() + static_cast<std::ptrdiff_t>(s), x.end());
        rot.insert(rot.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s));
        loops.push_back(std::move(rot));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& loop : loops) {
      if (auto end = follow(i, loop)) uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(*end));
    }
  }

  // Congruence closure: u ~ v implies u.x ~ v.x whenever both are present.
  std::vector<std::int32_t> target(n * alphabet_);
  bool changed = true;
  while (changed) {
    changed = false;
    std::fill(target.begin(), target.end(), kNone);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t x = 0; x < alphabet_; ++x) {
        const auto t = adjacency_[i * alphabet_ + x];
        if (t == kNone) continue;
        const auto root = uf.find(static_cast<std::uint32_t>(i));
        auto& slot = target[root * alphabet_ + x];
        const auto rt = uf.find(static_cast<std::uint32_t>(t));
        if (slot == kNone) {
          slot = static_cast<std::int32_t>(rt);
        } else if (uf.find(static_cast<std::uint32_t>(slot)) != rt) {
          uf.unite(static_cast<std::uint32_t>(slot), rt);
          slot = static_cast<std::int32_t>(uf.find(rt));
          changed = true;
        }
      }
    }
  }

  std::vector<std::int32_t> class_index(n, kNone);
  std::vector<Word> reps;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = uf.find(static_cast<std::uint32_t>(i));
    if (class_index[root] == kNone) {
      class_index[root] = static_cast<std::int32_t>(reps.size());
      reps.push_back(elements_[i]);
    }
  }
  std::vector<std::int32_t> adj(reps.size() * alphabet_, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = static_cast<std::size_t>(class_index[uf.find(static_cast<std::uint32_t>(i))]);
    for (std::size_t x = 0; x < alphabet_; ++x) {
      const auto t = adjacency_[i * alphabet_ + x];
      if (t == kNone) continue;
      adj[ci * alphabet_ + x] = class_index[uf.find(static_cast<std::uint32_t>(t))];
    }
  }
  elements_ = std::move(reps);
  adjacency_ = std::move(adj);
}

std::optional<std::size_t> CayleyBall::follow(std::size_t start, std::span<const Letter> w) const {
  std::size_t cur = start;
  for (Letter x : w) {
    const auto next = adjacency_[cur * alphabet_ + x];
    if (next == kNone) return std::nullopt;
    cur = static_cast<std::size_t>(next);
  }
  return cur;
}

std::vector<std::uint8_t> CayleyBall::bfs_distances(std::size_t source) const {
  std::vector<std::uint8_t> dist(elements_.size(), 0xFF);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)};
  dist[source] = 0;
  std::uint8_t d = 0;
  while (!frontier.empty()) {
    ++d;
    std::vector<std::uint32_t> next;
    for (auto u : frontier) {
      for (std::size_t x = 0; x < alphabet_; ++x) {
        const auto v = adjacency_[u * alphabet_ + x];
        if (v == kNone || dist[static_cast<std::size_t>(v)] != 0xFF) continue;
        dist[static_cast<std::size_t>(v)] = d;
        next.push_back(static_cast<std::uint32_t>(v));
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

std::vector<std::size_t> growth_counts(const CayleyBall& ball) {
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  for (auto s : ball.sphere_sizes()) {
    total += s;
    counts.push_back(total);
  }
  return counts;
}

EntropyEstimate entropy_estimate(std::span<const std::size_t> counts) {
  if (counts.size() < 3) throw DomainError("entropy estimate needs at least 3 growth counts");
  const std::size_t last = counts.size() - 1;
  const std::size_t first = last / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto npts = static_cast<double>(last - first + 1);
  for (std::size_t k = first; k <= last; ++k) {
    if (counts[k] == 0) throw DomainError("growth counts must be positive");
    const double x = static_cast<double>(k);
    const double y = std::log(static_cast<double>(counts[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / npts;
  double ss = 0;
  for (std::size_t k = first; k <= last; ++k) {
    const double r = std::log(static_cast<double>(counts[k])) - (intercept + slope * static_cast<double>(k));
    ss += r * r;
  }
  return {slope, std::sqrt(ss / npts), first};
}

namespace {

std::size_t free_distance(const Word& u, const Word& v) {
  return u.length() + v.length() - 2 * common_prefix_length(u, v);
}

}  // namespace

Rational gromov_product(const GroupPresentation& p, const Word& x, const Word& y, const Word& o) {
  if (!p.is_free()) {
    throw DomainError("gromov_product without a ball requires a free presentation");
  }
  const auto dox = free_distance(o, x);
  const auto doy = free_distance(o, y);
  const auto dxy = free_distance(x, y);
  return ratio(static_cast<long>(dox + doy) - static_cast<long>(dxy), 2);
}

Rational gromov_product(const CayleyBall& ball, const Word& x, const Word& y, const Word& o) {
  if (ball.is_free()) return gromov_product(ball.presentation(), x, y, o);
  const std::size_t required =
      std::max({x.length() + o.length(), y.length() + o.length(), x.length() + y.length()});
  if (required > ball.radius()) {
    throw RadiusInsufficient("geodesics between the query points may leave the Cayley ball", required);
  }
  auto dist = [&](const Word& u, const Word& v) -> std::size_t {
    const auto i = ball.locate(u.inverse() * v);
    if (!i) throw RadiusInsufficient("path left the Cayley ball", required);
    return ball.length(*i);
  };
  const auto dox = dist(o, x);
  const auto doy = dist(o, y);
  const auto dxy = dist(x, y);
  return ratio(static_cast<long>(dox + doy) - static_cast<long>(dxy), 2);
}

HyperbolicityReport check_hyperbolicity(const CayleyBall& ball, const Word& o, unsigned threads) {
  if (ball.size() == 0) throw DomainError("empty Cayley ball");
  if (ball.radius() < 2) throw DomainError("hyperbolicity check needs ball radius >= 2");
  const std::size_t point_radius = ball.certified_radius();

  std::vector<std::size_t> points;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    if (ball.length(i) <= point_radius) points.push_back(i);
  }
  const auto o_index = ball.locate(o);
  if (!o_index || ball.length(*o_index) > point_radius) {
    throw DomainError("basepoint lies outside the scanned ball");
  }
  const std::size_t np = points.size();
  const std::size_t o_pos = static_cast<std::size_t>(
      std::find(points.begin(), points.end(), *o_index) - points.begin());

  std::vector<std::uint8_t> dist(np * np);
  for (std::size_t a = 0; a < np; ++a) {
    const auto& wa = ball.element(points[a]);
    for (std::size_t b = a; b < np; ++b) {
      const auto& wb = ball.element(points[b]);
      std::size_t d;
      if (ball.is_free()) {
        d = free_distance(wa, wb);
      } else {
        const auto idx = ball.locate(wa.inverse() * wb);
        if (!idx) throw RadiusInsufficient("distance not certified inside the ball", wa.length() + wb.length());
        d = ball.length(*idx);
      }
      dist[a * np + b] = dist[b * np + a] = static_cast<std::uint8_t>(d);
    }
  }

  // Doubled Gromov products (integers) and threshold bitsets.
  std::vector<std::uint16_t> gp(np * np);
  std::uint16_t gmax = 0;
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < np; ++b) {
      const int v = dist[o_pos * np + a] + dist[o_pos * np + b] - dist[a * np + b];
      gp[a * np + b] = static_cast<std::uint16_t>(v);
      gmax = std::max<std::uint16_t>(gmax, gp[a * np + b]);
    }
  }
  const std::size_t words = (np + 63) / 64;
  const std::size_t levels = static_cast<std::size_t>(gmax) + 1;
  std::vector<std::uint64_t> bits(np * levels * words, 0);
  auto row = [&](std::size_t a, std::size_t t) { return bits.data() + (a * levels + t) * words; };
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < np; ++b) {
      for (std::size_t t = 0; t <= gp[a * np + b]; ++t) row(a, t)[b / 64] |= (std::uint64_t{1} << (b % 64));
    }
  }

  struct Best {
    int value = 0;
    std::size_t x = 0, y = 0, z = 0;
  };
  const unsigned nthreads = resolve_threads(threads);
  std::vector<Best> partial(std::max<std::size_t>(1, std::min<std::size_t>(nthreads, np)));
  for (auto& b : partial) b.x = b.y = b.z = o_pos;
  parallel_chunks(np, nthreads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Best best;
    best.x = best.y = best.z = o_pos;
    for (std::size_t a = begin; a < end; ++a) {
      for (std::size_t b = a; b < np; ++b) {
        const int g = gp[a * np + b];
        for (int t = gmax; t > g + best.value; --t) {
          const auto* ra = row(a, static_cast<std::size_t>(t));
          const auto* rb = row(b, static_cast<std::size_t>(t));
          std::size_t hit = words;
          for (std::size_t w = 0; w < words; ++w) {
            if (ra[w] & rb[w]) {
              hit = w;
              break;
            }
          }
          if (hit == words) continue;
          const auto mask = ra[hit] & rb[hit];
          best = {t - g, a, b, hit * 64 + static_cast<std::size_t>(__builtin_ctzll(mask))};
          break;
        }
      }
    }
    partial[chunk] = best;
  });
  Best best = partial.front();
  for (const auto& p : partial) {
    if (p.value > best.value) best = p;
  }
  HyperbolicityReport rep;
  rep.delta = ratio(best.value, 2);
  rep.delta.canonicalize();
  rep.point_radius = point_radius;
  rep.point_count = np;
  rep.witness_x = ball.element(points[best.x]);
  rep.witness_y = ball.element(points[best.y]);
  rep.witness_z = ball.element(points[best.z]);
  return rep;
}

}  // namespace hypbound
