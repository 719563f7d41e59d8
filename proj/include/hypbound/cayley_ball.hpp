#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hypbound/presentation.hpp"
#include "hypbound/rational.hpp"

namespace hypbound {

// All group elements of word length <= R, each represented by its
// shortlex-minimal word, with right-multiplication adjacency.
//
// For free presentations the elements are exactly the reduced words. For
// presentations with relators, the ball is the quotient of the free ball of
// radius R by relator loops that stay inside it, closed under right
// multiplication (congruence closure). Identifications that need a van
// Kampen diagram leaving the ball are not seen, so pairwise queries are only
// certified for points of length <= R/2.
class CayleyBall {
 public:
  static constexpr std::int32_t kNone = -1;

  CayleyBall(const GroupPresentation& presentation, std::size_t radius);

  const GroupPresentation& presentation() const noexcept { return presentation_; }
  std::size_t radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool is_free() const noexcept { return presentation_.is_free(); }

  // Radius up to which pairwise distances are certified: R for free groups,
  // floor(R/2) otherwise.
  std::size_t certified_radius() const noexcept;

  // Elements in shortlex order of their canonical words; index 0 is e.
  const std::vector<Word>& elements() const noexcept { return elements_; }
  const Word& element(std::size_t i) const { return elements_.at(i); }
  std::size_t length(std::size_t i) const { return elements_[i].length(); }

  // Index of element i * x, or kNone when it leaves the ball.
  std::int32_t neighbor(std::size_t i, Letter x) const {
    return adjacency_[i * alphabet_ + x];
  }

  // Follows the letters of w from element `start`; nullopt if the path
  // leaves the ball.
  std::optional<std::size_t> follow(std::size_t start, std::span<const Letter> w) const;
  std::optional<std::size_t> locate(const Word& w) const { return follow(0, w.letters()); }

  // m_k - m_{k-1} for k = 0..R.
  const std::vector<std::size_t>& sphere_sizes() const noexcept { return sphere_sizes_; }

  // Graph distance inside the ball from `source` to every element (BFS);
  // unreachable entries are 0xFF.
  std::vector<std::uint8_t> bfs_distances(std::size_t source) const;

 private:
  void build_free_ball();
  void quotient_by_relators();

  GroupPresentation presentation_;
  std::size_t radius_;
  std::size_t alphabet_;
  std::vector<Word> elements_;
  std::vector<std::int32_t> adjacency_;
  std::vector<std::size_t> sphere_sizes_;
};

// m_0 .. m_R: number of elements of length <= k.
std::vector<std::size_t> growth_counts(const CayleyBall& ball);

struct EntropyEstimate {
  double entropy;   // least-squares slope of ln m_k against k
  double residual;  // RMS residual of the fit
  std::size_t first_radius;  // fit window is [first_radius, last index]
};

// Fits the upper half of the available radii. Needs >= 3 counts.
EntropyEstimate entropy_estimate(std::span<const std::size_t> counts);

// (x, y)_o = (d(o,x) + d(o,y) - d(x,y)) / 2, exact.
// Free presentations: distances by free reduction, no ball needed.
Rational gromov_product(const GroupPresentation& p, const Word& x, const Word& y, const Word& o);
// Distances via the ball; throws RadiusInsufficient when the geodesics are
// not certified inside it.
Rational gromov_product(const CayleyBall& ball, const Word& x, const Word& y, const Word& o);

struct HyperbolicityReport {
  Rational delta;             // minimal four-point defect, a half-integer
  std::size_t point_radius;   // points of length <= point_radius were scanned
  std::size_t point_count;
  // A triple attaining delta: (x, y)_o = min((x,z)_o, (y,z)_o) - delta.
  Word witness_x, witness_y, witness_z;
};

// Minimal delta with (x,y)_o >= min((x,z)_o, (y,z)_o) - delta over all
// triples of scanned points. Free balls scan every element; other balls scan
// the certified half-radius ball. Throws DomainError if radius < 2 or o is
// not a scanned point.
HyperbolicityReport check_hyperbolicity(const CayleyBall& ball, const Word& o, unsigned threads = 1);

}  // namespace hypbound
