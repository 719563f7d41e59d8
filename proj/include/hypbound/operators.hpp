#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypbound/boundary.hpp"
#include "hypbound/spectral.hpp"

namespace hypbound {

// Finite truncation of l^2(F_n, L^2(boundary, mu)): group elements of length
// <= radius (outer index, shortlex) tensored with depth-k cylinders (inner
// index, shortlex). The basis vector for (g, C) is delta_g (x) 1_C / sqrt(mu(C)).
struct TruncationSpec {
  std::size_t n = 2;
  std::size_t radius = 0;
  std::size_t depth = 1;
  // Defaults to the uniform measure; otherwise any probability measure of
  // depth <= `depth` with every depth-k cylinder of positive mass.
  std::optional<CylinderMeasure> measure;
  unsigned threads = 1;
  std::size_t dim_cap = 6000;  // largest dense block an SVD may assemble

  std::size_t outer_dim() const;
  std::size_t inner_dim() const;
  std::size_t dim() const { return outer_dim() * inner_dim(); }
  CylinderMeasure basis_measure() const;
};

// Outer index of a reduced word inside the ball: shortlex rank.
std::size_t ball_index(std::size_t n, const Word& g);
// m_0 .. m_R for F_n.
std::vector<std::size_t> free_ball_sizes(std::size_t n, std::size_t radius);

// One (inner x inner) block, stored as a diagonal, a low-rank product
// U W^*, or a dense matrix. Sums and products keep the cheapest exact form.
class Block {
 public:
  enum class Kind { diagonal, low_rank, dense };

  static Block diagonal(Eigen::VectorXcd d);
  static Block identity(std::size_t dim);
  static Block low_rank(Eigen::MatrixXcd u, Eigen::MatrixXcd w);
  static Block dense(Eigen::MatrixXcd m);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const Eigen::VectorXcd& diag() const noexcept { return diag_; }
  const Eigen::MatrixXcd& u() const noexcept { return u_; }
  const Eigen::MatrixXcd& w() const noexcept { return w_; }

  Eigen::MatrixXcd to_dense() const;
  std::complex<double> entry(std::size_t i, std::size_t j) const;
  Block adjoint() const;
  double max_abs() const;

  friend Block operator+(const Block& a, const Block& b);
  friend Block operator*(const Block& a, const Block& b);
  friend Block operator*(std::complex<double> s, const Block& a);

 private:
  Kind kind_ = Kind::dense;
  std::size_t dim_ = 0;
  Eigen::VectorXcd diag_;
  Eigen::MatrixXcd u_, w_;  // low rank: u_ * w_^*
  Eigen::MatrixXcd dense_;
};

// Sparse matrix of blocks indexed by pairs of outer indices. Blocks absent
// from the map are zero.
class BlockOperator {
 public:
  using Key = std::pair<std::uint32_t, std::uint32_t>;

  BlockOperator(std::size_t outer, std::size_t inner) : outer_(outer), inner_(inner) {}

  static BlockOperator identity(std::size_t outer, std::size_t inner);

  std::size_t outer_dim() const noexcept { return outer_; }
  std::size_t inner_dim() const noexcept { return inner_; }
  std::size_t dim() const noexcept { return outer_ * inner_; }
  const std::map<Key, Block>& blocks() const noexcept { return blocks_; }

  // Adds b into block (row, col).
  void accumulate(std::size_t row, std::size_t col, const Block& b);
  const Block* find(std::size_t row, std::size_t col) const;
  std::complex<double> entry(std::size_t i, std::size_t j) const;

  BlockOperator adjoint() const;
  // Keeps only blocks whose row and column are both marked.
  BlockOperator restricted(const std::vector<bool>& keep) const;
  // Largest |entry| (0 for the zero operator).
  double max_abs() const;
  Eigen::MatrixXcd to_dense(std::size_t dim_cap = 6000) const;

  friend BlockOperator operator+(const BlockOperator& a, const BlockOperator& b);
  friend BlockOperator operator-(const BlockOperator& a, const BlockOperator& b);
  friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b);
  friend BlockOperator operator*(std::complex<double> s, const BlockOperator& a);

 private:
  std::size_t outer_;
  std::size_t inner_;
  std::map<Key, Block> blocks_;
};

// Finite sum of phi_g g, read as lambda(phi_g) lambda(g).
struct CrossedProductTerm {
  StepFunction phi;
  Word g;
};

class CrossedProductElement {
 public:
  explicit CrossedProductElement(std::size_t n) : n_(n) {}
  CrossedProductElement(std::size_t n, std::vector<CrossedProductTerm> terms);

  static CrossedProductElement identity(std::size_t n);
  static CrossedProductElement group(std::size_t n, const Word& g);
  static CrossedProductElement function(const StepFunction& phi);

  std::size_t rank() const noexcept { return n_; }
  // Terms with distinct words, sorted shortlex by word.
  const std::vector<CrossedProductTerm>& terms() const noexcept { return terms_; }
  std::size_t max_word_length() const;
  std::size_t max_depth() const;

  // (phi g)^* = (g^{-1}.conj phi) g^{-1}
  CrossedProductElement adjoint() const;
  // (phi g)(psi h) = phi (g.psi) gh
  friend CrossedProductElement operator*(const CrossedProductElement& a, const CrossedProductElement& b);
  friend CrossedProductElement operator+(const CrossedProductElement& a, const CrossedProductElement& b);

 private:
  void add_term(const StepFunction& phi, const Word& g);
  std::size_t n_;
  std::vector<CrossedProductTerm> terms_;
};

StepFunction add(const StepFunction& a, const StepFunction& b);
StepFunction conj(const StepFunction& phi);

// Throws RefinementError unless t.depth >= max_depth(a) + t.radius.
void check_admissible(const CrossedProductElement& a, const TruncationSpec& t);

// lambda(phi g): delta_h (x) psi -> delta_{gh} (x) ((gh)^{-1}.phi) psi, with
// images outside the ball dropped.
BlockOperator build_lambda(const CrossedProductElement& a, const TruncationSpec& t);
// lambda^op(phi g): delta_h (x) psi -> delta_{hg^{-1}} (x) ((hg^{-1}).phi) psi.
BlockOperator build_lambda_op(const CrossedProductElement& a, const TruncationSpec& t);
// delta_g (x) psi -> delta_{g^{-1}} (x) psi
BlockOperator build_J(const TruncationSpec& t);
// Per-block projection onto the constants vector v_C = sqrt(mu(C)).
BlockOperator projection_P(const TruncationSpec& t);

// Outer indices h with |h| <= radius - reach.
std::vector<bool> interior_mask(const TruncationSpec& t, std::size_t reach);

// Singular values of op on the marked columns (domain restricted to the
// marked outer indices, all rows kept), padded with zeros to the restricted
// dimension. Each connected block component is decomposed separately:
// diagonal components split per cylinder, low-rank ones reduce through thin
// QR factors, and anything else is assembled densely (up to t.dim_cap).
std::vector<double> singular_values(const BlockOperator& op, const std::vector<bool>& keep,
                                    const TruncationSpec& t);

struct BasicCommutator {
  BlockOperator commutator;       // [lambda(phi), P]
  SingularValueReport commutator_values;
  SingularValueReport pi_values;  // (1 - P) lambda(phi) P
  std::size_t interior_count = 0;
};

BasicCommutator basic_commutator(const StepFunction& phi, const TruncationSpec& t);

// Exact (outer x outer) operator on l^2 of the free ball of radius R, used for
// the sections s(a), s^op(a) = J s(a) J.
class SectionOperator {
 public:
  using Key = std::pair<std::uint32_t, std::uint32_t>;
  explicit SectionOperator(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  const std::map<Key, ComplexRational>& entries() const noexcept { return entries_; }
  void accumulate(std::size_t row, std::size_t col, const ComplexRational& v);
  ComplexRational entry(std::size_t row, std::size_t col) const;
  SectionOperator restricted(const std::vector<bool>& keep) const;
  Eigen::MatrixXcd to_dense(const std::vector<bool>& keep) const;

  friend SectionOperator operator*(const SectionOperator& a, const SectionOperator& b);
  friend SectionOperator operator-(const SectionOperator& a, const SectionOperator& b);

 private:
  std::size_t dim_;
  std::map<Key, ComplexRational> entries_;
};

// s(phi g): delta_h -> E phi(gh) delta_{gh}
SectionOperator section(const CrossedProductElement& a, std::size_t radius, const CylinderMeasure& mu);
// s^op(phi g): delta_h -> E phi(g h^{-1}) delta_{h g^{-1}}
SectionOperator section_op(const CrossedProductElement& a, std::size_t radius, const CylinderMeasure& mu);
std::vector<bool> section_interior(std::size_t n, std::size_t radius, std::size_t reach);

struct TwistedLevel {
  std::size_t radius = 0;
  std::size_t interior_count = 0;
  SingularValueReport values;
  double schatten_sum = 0;
};

struct TwistedReport {
  double p = 0;
  TwistedLevel current;
  std::optional<TwistedLevel> previous;  // radius - 1
  double relative_change = 0;            // |S_R - S_{R-1}| / S_R, 0 if both vanish
};

// [s(a), s^op(b)] on interior rows |h| <= R - |a| - |b|, where |.| is the
// longest word of the element. Also evaluated at R - 1 when that level still
// has interior points.
TwistedReport twisted_commutator(const CrossedProductElement& a, const CrossedProductElement& b,
                                 std::size_t radius, const CylinderMeasure& mu, double p);

struct TwistedDiagonalEntry {
  Word h;
  ComplexRational entry;
  ComplexRational expected;  // E phi(h g^{-1}) - E phi(h)
};

struct TwistedDiagonalCheck {
  std::vector<TwistedDiagonalEntry> entries;
  bool diagonal = true;  // no off-diagonal entries on the interior
  bool all_match = true;
};

// s^op(g^{-1}) [s(phi), s^op(g)] on interior |h| <= R - |g|, compared
// exactly with the deviation module's expectations.
TwistedDiagonalCheck twisted_diagonal_check(const StepFunction& phi, const Word& g, std::size_t radius,
                                            const CylinderMeasure& mu);

struct MultiplierDecayReport {
  std::vector<std::size_t> counts;        // m_0 .. m_K
  SingularValueReport values;             // exp(-eps k) with multiplicity m_k - m_{k-1}
  std::vector<Rational> shell_ratios;     // m_k / exp(e k), exact when exp(e) is an integer
  Rational sup_ratio;                     // max of shell_ratios
  double sup = 0;                         // sup_n s_n n^{1/D} = sup_ratio^{1/D}
  double c1 = 0;                          // sup_k (m_k / exp(e k))^{1/D}
  double c2 = 0;                          // c1 * sup_k ((m_{k+1} + 1) / m_k)^{1/D}
  bool exact = false;                     // D == 1 so the comparison ran in rationals
  bool certified = false;                 // sup <= bound
};

// T = multiplication by exp(-eps |g|) on l^2 of the ball.
MultiplierDecayReport multiplier_decay(const VisualParams& vp, std::span<const std::size_t> counts,
                                       const Rational& bound);

struct AxiomQuantity {
  double norm = 0;
  double schatten_sum = 0;
  std::vector<double> schatten_partial;
};

struct FredholmReport {
  std::size_t radius = 0;
  std::size_t interior_count = 0;
  double p = 0;
  AxiomQuantity adjoint_defect;      // Q^* - Q
  AxiomQuantity idempotent_defect;   // Q^2 - Q
  AxiomQuantity commutator;          // [lambda(a), Q]
};

// Q is a candidate essential projection on the truncation t; `reach` is the
// longest word Q moves by (0 for P lambda^op(e) P with e a function).
FredholmReport fredholm_axiom_check(const CrossedProductElement& a, const BlockOperator& q,
                                    const TruncationSpec& t, double p, std::size_t reach = 0);

// Relative change of each Schatten sum between two consecutive radii is below
// tol (quantities vanishing at both levels count as stable).
bool fredholm_stable(const FredholmReport& previous, const FredholmReport& current, double tol);

// P lambda^op(e) P
BlockOperator compressed_op(const CrossedProductElement& e, const TruncationSpec& t);

struct IndexLevel {
  std::size_t radius = 0;
  std::size_t dim = 0;
  std::size_t kernel = 0;          // singular values of s(a) below tol_ker
  std::size_t cokernel = 0;        // same for s(a)^*
  std::size_t in_window = 0;       // values in [tol_ker, tol_gap)
  double smallest = 0;
};

struct IndexEstimate {
  std::vector<IndexLevel> levels;
  std::optional<long> value;  // empty means unstable
};

// Index of the compression P lambda(a) P = s(a) on interior squares of each
// radius; stable when the last two levels agree and no level has values in
// the tolerance window.
IndexEstimate index_estimate(const CrossedProductElement& a, std::span<const std::size_t> radii,
                             const CylinderMeasure& mu, double tol_ker = 1e-6, double tol_gap = 1e-3);

}  // namespace hypbound
