#include "hypbound/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hypbound/deviation.hpp"
#include "hypbound/error.hpp"
#include "hypbound/parallel.hpp"

namespace hypbound {

namespace {

std::complex<double> to_complex(const ComplexRational& z) { return {to_double(z.re), to_double(z.im)}; }

std::vector<Word> ball_words(std::size_t n, std::size_t radius) {
  std::vector<Word> out;
  for (std::size_t k = 0; k <= radius; ++k) {
    auto shell = words_of_length(n, k);
    out.insert(out.end(), std::make_move_iterator(shell.begin()), std::make_move_iterator(shell.end()));
  }
  return out;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct BlockRef {
  std::size_t row;
  std::size_t col;
  const Block* block;
};

std::vector<double> svd_values(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return {};
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

// R factor of a thin QR: U = Q R with R of size min(rows, cols) x cols.
Eigen::MatrixXcd thin_r(const Eigen::MatrixXcd& u) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(u);
  const auto k = std::min(u.rows(), u.cols());
  return qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

std::vector<double> component_values(const std::vector<BlockRef>& blocks, const std::vector<std::size_t>& members,
                                     std::size_t bd, std::size_t dim_cap) {
  std::vector<std::size_t> rows, cols;
  bool all_diagonal = true, all_low_rank = true;
  std::size_t total_rank = 0;
  for (auto i : members) {
    rows.push_back(blocks[i].row);
    cols.push_back(blocks[i].col);
    const auto kind = blocks[i].block->kind();
    all_diagonal = all_diagonal && kind == Block::Kind::diagonal;
    all_low_rank = all_low_rank && kind == Block::Kind::low_rank;
    if (kind == Block::Kind::low_rank) total_rank += static_cast<std::size_t>(blocks[i].block->u().cols());
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  auto pos = [](const std::vector<std::size_t>& v, std::size_t x) {
    return static_cast<Eigen::Index>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  const auto d = static_cast<Eigen::Index>(bd);
  std::vector<double> values;

  if (all_diagonal) {
    // Diagonal blocks never mix cylinders: one small matrix per cylinder.
    for (Eigen::Index c = 0; c < d; ++c) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nr, nc);
      for (auto i : members) m(pos(rows, blocks[i].row), pos(cols, blocks[i].col)) += blocks[i].block->diag()(c);
      if (m.size() == 1) {
        values.push_back(std::abs(m(0, 0)));
      } else {
        auto s = svd_values(m);
        values.insert(values.end(), s.begin(), s.end());
      }
    }
    return values;
  }

  if (all_low_rank) {
    const auto r = static_cast<Eigen::Index>(total_rank);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(nr * d, r);
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(nc * d, r);
    Eigen::Index at = 0;
    for (auto i : members) {
      const auto& blk = *blocks[i].block;
      const auto k = blk.u().cols();
      u.block(pos(rows, blocks[i].row) * d, at, d, k) = blk.u();
      w.block(pos(cols, blocks[i].col) * d, at, d, k) = blk.w();
      at += k;
    }
    auto s = svd_values(thin_r(u) * thin_r(w).adjoint());
    values.insert(values.end(), s.begin(), s.end());
    return values;
  }

  const auto dim = static_cast<std::size_t>(std::max(nr, nc) * d);
  if (dim > dim_cap) {
    throw CapacityError("operator component of dimension " + std::to_string(dim) + " exceeds the dense cap " +
                        std::to_string(dim_cap));
  }
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(nr * d, nc * d);
  for (auto i : members) {
    dense.block(pos(rows, blocks[i].row) * d, pos(cols, blocks[i].col) * d, d, d) += blocks[i].block->to_dense();
  }
  return svd_values(dense);
}

// One decomposition per connected component of the row/column incidence
// graph; the result is padded with zeros to columns * bd values.
std::vector<double> block_singular_values(const std::vector<BlockRef>& blocks, std::size_t outer, std::size_t bd,
                                          std::size_t columns, std::size_t dim_cap) {
  UnionFind uf(2 * outer);
  for (const auto& b : blocks) uf.unite(b.row, outer + b.col);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < blocks.size(); ++i) groups[uf.find(blocks[i].row)].push_back(i);

  std::vector<double> values;
  values.reserve(columns * bd);
  for (const auto& [root, members] : groups) {
    auto s = component_values(blocks, members, bd, dim_cap);
    values.insert(values.end(), s.begin(), s.end());
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  values.resize(columns * bd, 0.0);
  return values;
}

}  // namespace

// --- truncation ---------------------------------------------------------

std::size_t TruncationSpec::outer_dim() const {
  std::size_t m = 0;
  for (std::size_t k = 0; k <= radius; ++k) m += cell_count(n, k);
  return m;
}

std::size_t TruncationSpec::inner_dim() const { return cell_count(n, depth); }

CylinderMeasure TruncationSpec::basis_measure() const {
  if (!measure) return CylinderMeasure::uniform(n, depth);
  if (measure->rank() != n) throw DomainError("basis measure has a different rank");
  if (measure->depth() > depth) throw RefinementError("basis measure is finer than the cylinder depth", measure->depth());
  if (!measure->is_probability()) throw DomainError("basis measure must be a probability measure");
  auto m = measure->refine(depth);
  for (const auto& w : m.weights()) {
    if (sgn(w) <= 0) throw DomainError("basis measure must charge every cylinder");
  }
  return m;
}

std::size_t ball_index(std::size_t n, const Word& g) {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < g.length(); ++k) offset += cell_count(n, k);
  return offset + cell_index(n, g);
}

std::vector<std::size_t> free_ball_sizes(std::size_t n, std::size_t radius) {
  std::vector<std::size_t> out;
  std::size_t m = 0;
  for (std::size_t k = 0; k <= radius; ++k) {
    m += cell_count(n, k);
    out.push_back(m);
  }
  return out;
}

// --- blocks -------------------------------------------------------------

Block Block::diagonal(Eigen::VectorXcd d) {
  Block b;
  b.kind_ = Kind::diagonal;
  b.dim_ = static_cast<std::size_t>(d.size());
  b.diag_ = std::move(d);
  return b;
}

Block Block::identity(std::size_t dim) {
  return diagonal(Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(dim)));
}

Block Block::low_rank(Eigen::MatrixXcd u, Eigen::MatrixXcd w) {
  if (u.rows() != w.rows() || u.cols() != w.cols()) throw DomainError("low-rank factors of different shapes");
  Block b;
  b.dim_ = static_cast<std::size_t>(u.rows());
  if (2 * u.cols() > u.rows()) {
    b.kind_ = Kind::dense;
    b.dense_ = u * w.adjoint();
    return b;
  }
  b.kind_ = Kind::low_rank;
  b.u_ = std::move(u);
  b.w_ = std::move(w);
  return b;
}

Block Block::dense(Eigen::MatrixXcd m) {
  if (m.rows() != m.cols()) throw DomainError("blocks must be square");
  Block b;
  b.kind_ = Kind::dense;
  b.dim_ = static_cast<std::size_t>(m.rows());
  b.dense_ = std::move(m);
  return b;
}

Eigen::MatrixXcd Block::to_dense() const {
  switch (kind_) {
    case Kind::diagonal:
      return diag_.asDiagonal();
    case Kind::low_rank:
      return u_ * w_.adjoint();
    case Kind::dense:
      break;
  }
  return dense_;
}

std::complex<double> Block::entry(std::size_t i, std::size_t j) const {
  const auto r = static_cast<Eigen::Index>(i);
  const auto c = static_cast<Eigen::Index>(j);
  switch (kind_) {
    case Kind::diagonal:
      return i == j ? diag_(r) : std::complex<double>{};
    case Kind::low_rank:
      return (u_.row(r) * w_.row(c).adjoint())(0, 0);
    case Kind::dense:
      break;
  }
  return dense_(r, c);
}

Block Block::adjoint() const {
  switch (kind_) {
    case Kind::diagonal:
      return diagonal(diag_.conjugate());
    case Kind::low_rank:
      return low_rank(w_, u_);
    case Kind::dense:
      break;
  }
  return dense(dense_.adjoint());
}

double Block::max_abs() const {
  if (dim_ == 0) return 0.0;
  if (kind_ == Kind::diagonal) return diag_.cwiseAbs().maxCoeff();
  return to_dense().cwiseAbs().maxCoeff();
}

Block operator+(const Block& a, const Block& b) {
  if (a.dim_ != b.dim_) throw DomainError("blocks of different sizes");
  using K = Block::Kind;
  if (a.kind_ == K::diagonal && b.kind_ == K::diagonal) return Block::diagonal(a.diag_ + b.diag_);
  if (a.kind_ == K::low_rank && b.kind_ == K::low_rank) {
    Eigen::MatrixXcd u(a.u_.rows(), a.u_.cols() + b.u_.cols());
    Eigen::MatrixXcd w(a.w_.rows(), a.w_.cols() + b.w_.cols());
    u << a.u_, b.u_;
    w << a.w_, b.w_;
    return Block::low_rank(std::move(u), std::move(w));
  }
  return Block::dense(a.to_dense() + b.to_dense());
}

Block operator*(const Block& a, const Block& b) {
  if (a.dim_ != b.dim_) throw DomainError("blocks of different sizes");
  using K = Block::Kind;
  if (a.kind_ == K::diagonal) {
    switch (b.kind_) {
      case K::diagonal:
        return Block::diagonal(a.diag_.cwiseProduct(b.diag_));
      case K::low_rank:
        return Block::low_rank(a.diag_.asDiagonal() * b.u_, b.w_);
      case K::dense:
        return Block::dense(a.diag_.asDiagonal() * b.dense_);
    }
  }
  if (a.kind_ == K::low_rank) {
    switch (b.kind_) {
      case K::diagonal:
        return Block::low_rank(a.u_, b.diag_.conjugate().asDiagonal() * a.w_);
      case K::low_rank:
        return Block::low_rank(a.u_ * (a.w_.adjoint() * b.u_), b.w_);
      case K::dense:
        return Block::low_rank(a.u_, b.dense_.adjoint() * a.w_);
    }
  }
  switch (b.kind_) {
    case K::diagonal:
      return Block::dense(a.dense_ * b.diag_.asDiagonal());
    case K::low_rank:
      return Block::low_rank(a.dense_ * b.u_, b.w_);
    case K::dense:
      break;
  }
  return Block::dense(a.dense_ * b.dense_);
}

Block operator*(std::complex<double> s, const Block& a) {
  switch (a.kind_) {
    case Block::Kind::diagonal:
      return Block::diagonal(s * a.diag_);
    case Block::Kind::low_rank:
      return Block::low_rank(s * a.u_, a.w_);
    case Block::Kind::dense:
      break;
  }
  return Block::dense(s * a.dense_);
}

// --- block operators ----------------------------------------------------

BlockOperator BlockOperator::identity(std::size_t outer, std::size_t inner) {
  BlockOperator out(outer, inner);
  for (std::size_t i = 0; i < outer; ++i) {
    out.blocks_.emplace(Key(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)), Block::identity(inner));
  }
  return out;
}

void BlockOperator::accumulate(std::size_t row, std::size_t col, const Block& b) {
  const Key key(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col));
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    blocks_.emplace(key, b);
  } else {
    it->second = it->second + b;
  }
}

const Block* BlockOperator::find(std::size_t row, std::size_t col) const {
  auto it = blocks_.find(Key(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col)));
  return it == blocks_.end() ? nullptr : &it->second;
}

std::complex<double> BlockOperator::entry(std::size_t i, std::size_t j) const {
  const auto* b = find(i / inner_, j / inner_);
  if (b == nullptr) return {};
  return b->entry(i % inner_, j % inner_);
}

BlockOperator BlockOperator::adjoint() const {
  BlockOperator out(outer_, inner_);
  for (const auto& [key, b] : blocks_) out.blocks_.emplace(Key(key.second, key.first), b.adjoint());
  return out;
}

BlockOperator BlockOperator::restricted(const std::vector<bool>& keep) const {
  BlockOperator out(outer_, inner_);
  for (const auto& [key, b] : blocks_) {
    if (keep.at(key.first) && keep.at(key.second)) out.blocks_.emplace(key, b);
  }
  return out;
}

double BlockOperator::max_abs() const {
  double m = 0;
  for (const auto& [key, b] : blocks_) m = std::max(m, b.max_abs());
  return m;
}

Eigen::MatrixXcd BlockOperator::to_dense(std::size_t dim_cap) const {
  if (dim() > dim_cap) {
    throw CapacityError("dense operator of dimension " + std::to_string(dim()) + " exceeds the cap " +
                        std::to_string(dim_cap));
  }
  const auto d = static_cast<Eigen::Index>(inner_);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  for (const auto& [key, b] : blocks_) out.block(key.first * d, key.second * d, d, d) = b.to_dense();
  return out;
}

namespace {
void require_same_shape(const BlockOperator& a, const BlockOperator& b) {
  if (a.outer_dim() != b.outer_dim() || a.inner_dim() != b.inner_dim()) {
    throw DomainError("operators live on different truncations");
  }
}
}  // namespace

BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b);
  BlockOperator out = a;
  for (const auto& [key, blk] : b.blocks_) out.accumulate(key.first, key.second, blk);
  return out;
}

BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b);
  BlockOperator out = a;
  for (const auto& [key, blk] : b.blocks_) out.accumulate(key.first, key.second, std::complex<double>(-1.0) * blk);
  return out;
}

BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b);
  std::vector<std::vector<std::pair<std::uint32_t, const Block*>>> rows_of_b(b.outer_);
  for (const auto& [key, blk] : b.blocks_) rows_of_b[key.first].emplace_back(key.second, &blk);
  BlockOperator out(a.outer_, a.inner_);
  for (const auto& [key, ablk] : a.blocks_) {
    for (const auto& [col, bblk] : rows_of_b[key.second]) out.accumulate(key.first, col, ablk * *bblk);
  }
  return out;
}

BlockOperator operator*(std::complex<double> s, const BlockOperator& a) {
  BlockOperator out(a.outer_, a.inner_);
  for (const auto& [key, blk] : a.blocks_) out.blocks_.emplace(key, s * blk);
  return out;
}

// --- crossed product ----------------------------------------------------

StepFunction add(const StepFunction& a, const StepFunction& b) {
  if (a.rank() != b.rank()) throw DomainError("step functions on different boundaries");
  const auto d = std::max(a.depth(), b.depth());
  auto ra = a.refine(d);
  const auto rb = b.refine(d);
  std::vector<ComplexRational> v = ra.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += rb.values()[i];
  return StepFunction(a.rank(), d, std::move(v));
}

StepFunction conj(const StepFunction& phi) {
  std::vector<ComplexRational> v;
  v.reserve(phi.values().size());
  for (const auto& z : phi.values()) v.push_back(z.conj());
  return StepFunction(phi.rank(), phi.depth(), std::move(v));
}

CrossedProductElement::CrossedProductElement(std::size_t n, std::vector<CrossedProductTerm> terms) : n_(n) {
  for (auto& t : terms) add_term(t.phi, t.g);
}

CrossedProductElement CrossedProductElement::identity(std::size_t n) {
  return group(n, Word{});
}

CrossedProductElement CrossedProductElement::group(std::size_t n, const Word& g) {
  CrossedProductElement a(n);
  a.add_term(StepFunction::constant(n, ComplexRational(Rational(1))), g);
  return a;
}

CrossedProductElement CrossedProductElement::function(const StepFunction& phi) {
  CrossedProductElement a(phi.rank());
  a.add_term(phi, Word{});
  return a;
}

void CrossedProductElement::add_term(const StepFunction& phi, const Word& g) {
  if (phi.rank() != n_) throw DomainError("crossed-product term on a different boundary");
  for (auto letter : g.letters()) {
    if (letter >= 2 * n_) throw DomainError("word uses a generator outside the group");
  }
  auto it = std::lower_bound(terms_.begin(), terms_.end(), g,
                             [](const CrossedProductTerm& t, const Word& w) { return t.g < w; });
  if (it != terms_.end() && it->g == g) {
    it->phi = add(it->phi, phi);
  } else {
    terms_.insert(it, CrossedProductTerm{phi, g});
  }
}

std::size_t CrossedProductElement::max_word_length() const {
  std::size_t m = 0;
  for (const auto& t : terms_) m = std::max(m, t.g.length());
  return m;
}

std::size_t CrossedProductElement::max_depth() const {
  std::size_t m = 0;
  for (const auto& t : terms_) m = std::max(m, t.phi.depth());
  return m;
}

CrossedProductElement CrossedProductElement::adjoint() const {
  CrossedProductElement out(n_);
  for (const auto& t : terms_) {
    const auto gi = t.g.inverse();
    out.add_term(conj(t.phi).translate(gi), gi);
  }
  return out;
}

CrossedProductElement operator*(const CrossedProductElement& a, const CrossedProductElement& b) {
  if (a.n_ != b.n_) throw DomainError("crossed-product elements over different groups");
  CrossedProductElement out(a.n_);
  for (const auto& s : a.terms_) {
    for (const auto& t : b.terms_) out.add_term(s.phi * t.phi.translate(s.g), s.g * t.g);
  }
  return out;
}

CrossedProductElement operator+(const CrossedProductElement& a, const CrossedProductElement& b) {
  if (a.n_ != b.n_) throw DomainError("crossed-product elements over different groups");
  CrossedProductElement out = a;
  for (const auto& t : b.terms_) out.add_term(t.phi, t.g);
  return out;
}

// --- representations ----------------------------------------------------

void check_admissible(const CrossedProductElement& a, const TruncationSpec& t) {
  if (a.rank() != t.n) throw DomainError("element and truncation have different ranks");
  const auto need = a.max_depth() + t.radius;
  if (t.depth < need) {
    throw RefinementError("cylinder depth " + std::to_string(t.depth) + " cannot express the element on the ball; need " +
                              std::to_string(need),
                          need);
  }
}

namespace {

// Shared assembly: for each term and column h, the target x = target(g, h)
// and the multiplier function acting on block x.
template <typename Target, typename Multiplier>
BlockOperator assemble(const CrossedProductElement& a, const TruncationSpec& t, Target target, Multiplier mult) {
  check_admissible(a, t);
  const auto words = ball_words(t.n, t.radius);
  const auto inner = cells(t.n, t.depth);
  const auto d = static_cast<Eigen::Index>(inner.size());
  BlockOperator out(words.size(), inner.size());
  const unsigned threads = resolve_threads(t.threads);

  for (const auto& term : a.terms()) {
    std::vector<std::vector<std::tuple<std::size_t, std::size_t, Block>>> parts(
        std::max<std::size_t>(1, std::min<std::size_t>(threads, words.size())));
    parallel_chunks(words.size(), threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        const Word x = target(term.g, words[j]);
        if (x.length() > t.radius) continue;
        const StepFunction f = mult(term.phi, x);
        Eigen::VectorXcd diag(d);
        for (Eigen::Index c = 0; c < d; ++c) diag(c) = to_complex(f.value_on(inner[c]));
        parts[chunk].emplace_back(ball_index(t.n, x), j, Block::diagonal(std::move(diag)));
      }
    });
    for (auto& part : parts) {
      for (auto& [row, col, blk] : part) out.accumulate(row, col, blk);
    }
  }
  return out;
}

}  // namespace

BlockOperator build_lambda(const CrossedProductElement& a, const TruncationSpec& t) {
  return assemble(
      a, t, [](const Word& g, const Word& h) { return g * h; },
      [](const StepFunction& phi, const Word& x) { return phi.translate(x.inverse()); });
}

BlockOperator build_lambda_op(const CrossedProductElement& a, const TruncationSpec& t) {
  return assemble(
      a, t, [](const Word& g, const Word& h) { return h * g.inverse(); },
      [](const StepFunction& phi, const Word& x) { return phi.translate(x); });
}

BlockOperator build_J(const TruncationSpec& t) {
  const auto words = ball_words(t.n, t.radius);
  BlockOperator out(words.size(), t.inner_dim());
  const Block id = Block::identity(t.inner_dim());
  for (std::size_t j = 0; j < words.size(); ++j) out.accumulate(ball_index(t.n, words[j].inverse()), j, id);
  return out;
}

namespace {
Eigen::VectorXd constants_vector(const TruncationSpec& t) {
  const auto mu = t.basis_measure();
  Eigen::VectorXd v(static_cast<Eigen::Index>(mu.weights().size()));
  for (std::size_t c = 0; c < mu.weights().size(); ++c) v(static_cast<Eigen::Index>(c)) = std::sqrt(to_double(mu.weights()[c]));
  return v;
}
}  // namespace

BlockOperator projection_P(const TruncationSpec& t) {
  const Eigen::VectorXd v = constants_vector(t);
  const Eigen::MatrixXcd vc = v.cast<std::complex<double>>();
  const Block blk = Block::low_rank(vc, vc);
  BlockOperator out(t.outer_dim(), t.inner_dim());
  for (std::size_t i = 0; i < out.outer_dim(); ++i) out.accumulate(i, i, blk);
  return out;
}

std::vector<bool> interior_mask(const TruncationSpec& t, std::size_t reach) {
  const auto sizes = free_ball_sizes(t.n, t.radius);
  std::vector<bool> keep(sizes.back(), false);
  if (reach > t.radius) return keep;
  for (std::size_t i = 0; i < sizes[t.radius - reach]; ++i) keep[i] = true;
  return keep;
}

std::vector<double> singular_values(const BlockOperator& op, const std::vector<bool>& keep, const TruncationSpec& t) {
  if (keep.size() != op.outer_dim()) throw DomainError("interior mask does not match the operator");
  const std::size_t columns = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  std::vector<BlockRef> refs;
  for (const auto& [key, blk] : op.blocks()) {
    if (keep[key.second]) refs.push_back({key.first, key.second, &blk});
  }
  return block_singular_values(refs, op.outer_dim(), op.inner_dim(), columns, t.dim_cap);
}

BasicCommutator basic_commutator(const StepFunction& phi, const TruncationSpec& t) {
  const auto a = CrossedProductElement::function(phi);
  const auto lam = build_lambda(a, t);
  const auto p = projection_P(t);
  const auto keep = interior_mask(t, 0);
  BasicCommutator out{lam * p - p * lam, {}, {}, 0};
  out.interior_count = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  if (out.interior_count == 0) throw RadiusInsufficient("truncation has no interior rows", 0);
  const auto lp = lam * p;
  const auto pi = lp - p * lp;
  out.commutator_values = make_report(singular_values(out.commutator, keep, t));
  out.pi_values = make_report(singular_values(pi, keep, t));
  return out;
}

// --- sections -----------------------------------------------------------

void SectionOperator::accumulate(std::size_t row, std::size_t col, const ComplexRational& v) {
  if (v.is_zero()) return;
  const Key key(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col));
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_.emplace(key, v);
  } else {
    it->second += v;
    if (it->second.is_zero()) entries_.erase(it);
  }
}

ComplexRational SectionOperator::entry(std::size_t row, std::size_t col) const {
  auto it = entries_.find(Key(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col)));
  return it == entries_.end() ? ComplexRational{} : it->second;
}

SectionOperator SectionOperator::restricted(const std::vector<bool>& keep) const {
  SectionOperator out(dim_);
  for (const auto& [key, v] : entries_) {
    if (keep.at(key.first) && keep.at(key.second)) out.entries_.emplace(key, v);
  }
  return out;
}

Eigen::MatrixXcd SectionOperator::to_dense(const std::vector<bool>& keep) const {
  std::vector<std::size_t> pos(dim_, 0);
  std::size_t cols = 0;
  for (std::size_t i = 0; i < dim_; ++i) {
    if (keep.at(i)) pos[i] = cols++;
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(cols));
  for (const auto& [key, v] : entries_) {
    if (keep[key.second]) out(key.first, static_cast<Eigen::Index>(pos[key.second])) = to_complex(v);
  }
  return out;
}

SectionOperator operator*(const SectionOperator& a, const SectionOperator& b) {
  if (a.dim_ != b.dim_) throw DomainError("section operators of different sizes");
  std::vector<std::vector<std::pair<std::uint32_t, const ComplexRational*>>> rows_of_b(b.dim_);
  for (const auto& [key, v] : b.entries_) rows_of_b[key.first].emplace_back(key.second, &v);
  SectionOperator out(a.dim_);
  for (const auto& [key, v] : a.entries_) {
    for (const auto& [col, w] : rows_of_b[key.second]) out.accumulate(key.first, col, v * *w);
  }
  return out;
}

SectionOperator operator-(const SectionOperator& a, const SectionOperator& b) {
  if (a.dim_ != b.dim_) throw DomainError("section operators of different sizes");
  SectionOperator out = a;
  for (const auto& [key, v] : b.entries_) {
    ComplexRational neg(-v.re, -v.im);
    out.accumulate(key.first, key.second, neg);
  }
  return out;
}

SectionOperator section(const CrossedProductElement& a, std::size_t radius, const CylinderMeasure& mu) {
  const auto words = ball_words(a.rank(), radius);
  SectionOperator out(words.size());
  for (const auto& term : a.terms()) {
    for (std::size_t j = 0; j < words.size(); ++j) {
      const Word x = term.g * words[j];
      if (x.length() > radius) continue;
      out.accumulate(ball_index(a.rank(), x), j, expectation(term.phi, x, mu));
    }
  }
  return out;
}

SectionOperator section_op(const CrossedProductElement& a, std::size_t radius, const CylinderMeasure& mu) {
  const auto words = ball_words(a.rank(), radius);
  SectionOperator out(words.size());
  for (const auto& term : a.terms()) {
    for (std::size_t j = 0; j < words.size(); ++j) {
      const Word x = words[j] * term.g.inverse();
      if (x.length() > radius) continue;
      out.accumulate(ball_index(a.rank(), x), j, expectation(term.phi, x.inverse(), mu));
    }
  }
  return out;
}

std::vector<bool> section_interior(std::size_t n, std::size_t radius, std::size_t reach) {
  TruncationSpec t;
  t.n = n;
  t.radius = radius;
  return interior_mask(t, reach);
}

namespace {

std::vector<double> dense_singular_values(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return {};
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  out.resize(static_cast<std::size_t>(m.cols()), 0.0);
  return out;
}

TwistedLevel twisted_level(const CrossedProductElement& a, const CrossedProductElement& b, std::size_t radius,
                           const CylinderMeasure& mu, double p) {
  const auto sa = section(a, radius, mu);
  const auto sb = section_op(b, radius, mu);
  const auto comm = sa * sb - sb * sa;
  const auto keep = section_interior(a.rank(), radius, a.max_word_length() + b.max_word_length());
  TwistedLevel level;
  level.radius = radius;
  level.interior_count = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  level.values = make_report(dense_singular_values(comm.to_dense(keep)));
  level.schatten_sum = level.values.schatten_sum(p);
  return level;
}

}  // namespace

TwistedReport twisted_commutator(const CrossedProductElement& a, const CrossedProductElement& b, std::size_t radius,
                                 const CylinderMeasure& mu, double p) {
  if (a.rank() != b.rank() || a.rank() != mu.rank()) throw DomainError("elements and measure have different ranks");
  if (!(p > 0)) throw DomainError("Schatten exponent must be positive");
  const auto reach = a.max_word_length() + b.max_word_length();
  if (radius < reach) {
    throw RadiusInsufficient("ball of radius " + std::to_string(radius) + " has no interior for this commutator",
                             reach);
  }
  TwistedReport out;
  out.p = p;
  out.current = twisted_level(a, b, radius, mu, p);
  if (radius >= reach + 1) {
    out.previous = twisted_level(a, b, radius - 1, mu, p);
    out.current.values.has_previous = true;
    out.current.values.stable_prefix = stable_prefix(out.previous->values.values, out.current.values.values, 1e-10);
    const double s1 = out.current.schatten_sum;
    const double s0 = out.previous->schatten_sum;
    out.relative_change = s1 == 0 && s0 == 0 ? 0.0 : std::abs(s1 - s0) / std::max(std::abs(s1), std::abs(s0));
  }
  return out;
}

TwistedDiagonalCheck twisted_diagonal_check(const StepFunction& phi, const Word& g, std::size_t radius,
                                            const CylinderMeasure& mu) {
  const auto n = phi.rank();
  if (g.length() > radius) throw RadiusInsufficient("generator word longer than the ball", g.length());
  const auto f = CrossedProductElement::function(phi);
  const auto gg = CrossedProductElement::group(n, g);
  const auto sf = section(f, radius, mu);
  const auto sg = section_op(gg, radius, mu);
  const auto sgi = section_op(CrossedProductElement::group(n, g.inverse()), radius, mu);
  const auto prod = sgi * (sf * sg - sg * sf);
  const auto keep = section_interior(n, radius, g.length());
  const auto words = ball_words(n, radius);

  TwistedDiagonalCheck out;
  for (const auto& [key, v] : prod.entries()) {
    if (keep[key.second] && key.first != key.second) out.diagonal = false;
  }
  for (std::size_t j = 0; j < words.size(); ++j) {
    if (!keep[j]) continue;
    const auto& h = words[j];
    TwistedDiagonalEntry e{h, prod.entry(j, j), expectation(phi, h * g.inverse(), mu) - expectation(phi, h, mu)};
    if (!(e.entry == e.expected)) out.all_match = false;
    out.entries.push_back(std::move(e));
  }
  return out;
}

// --- multiplier decay ---------------------------------------------------

MultiplierDecayReport multiplier_decay(const VisualParams& vp, std::span<const std::size_t> counts,
                                       const Rational& bound) {
  if (counts.empty() || counts.front() != 1) throw DomainError("ball counts must start with m_0 = 1");
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] < counts[k - 1]) throw DomainError("ball counts must be nondecreasing");
  }
  MultiplierDecayReport out;
  out.counts.assign(counts.begin(), counts.end());
  const double dim = vp.hausdorff_dim();
  out.exact = dim == 1.0;

  const Rational base(static_cast<unsigned long>(vp.growth_base()));
  Rational power = 1;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out.shell_ratios.push_back(Rational(static_cast<unsigned long>(counts[k])) / power);
    power *= base;
    if (k == 0 || out.shell_ratios.back() > out.sup_ratio) out.sup_ratio = out.shell_ratios.back();
  }
  out.sup = std::pow(to_double(out.sup_ratio), 1.0 / dim);
  out.c1 = out.sup;
  double growth = 0;
  for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
    growth = std::max(growth, static_cast<double>(counts[k + 1] + 1) / static_cast<double>(counts[k]));
  }
  out.c2 = out.c1 * std::pow(growth, 1.0 / dim);
  out.certified = out.exact ? out.sup_ratio <= bound : out.sup <= to_double(bound);

  std::vector<double> values;
  values.reserve(counts.back());
  std::size_t prev = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    values.insert(values.end(), counts[k] - prev, std::exp(-vp.epsilon * static_cast<double>(k)));
    prev = counts[k];
  }
  out.values = make_report(std::move(values), 0.0);
  return out;
}

// --- Fredholm axioms ----------------------------------------------------

namespace {
AxiomQuantity quantity(const BlockOperator& op, const std::vector<bool>& keep, const TruncationSpec& t, double p) {
  const auto rep = make_report(singular_values(op, keep, t));
  AxiomQuantity q;
  q.norm = rep.norm();
  q.schatten_partial = rep.schatten_partial(p);
  q.schatten_sum = q.schatten_partial.empty() ? 0.0 : q.schatten_partial.back();
  return q;
}
}  // namespace

FredholmReport fredholm_axiom_check(const CrossedProductElement& a, const BlockOperator& q, const TruncationSpec& t,
                                    double p, std::size_t reach) {
  if (!(p > 0)) throw DomainError("Schatten exponent must be positive");
  if (q.outer_dim() != t.outer_dim() || q.inner_dim() != t.inner_dim()) {
    throw DomainError("candidate projection does not match the truncation");
  }
  const auto lam = build_lambda(a, t);
  const auto keep = interior_mask(t, a.max_word_length() + reach);
  FredholmReport out;
  out.radius = t.radius;
  out.p = p;
  out.interior_count = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  if (out.interior_count == 0) {
    throw RadiusInsufficient("truncation has no interior rows", a.max_word_length() + reach);
  }
  out.adjoint_defect = quantity(q.adjoint() - q, keep, t, p);
  out.idempotent_defect = quantity(q * q - q, keep, t, p);
  out.commutator = quantity(lam * q - q * lam, keep, t, p);
  return out;
}

bool fredholm_stable(const FredholmReport& previous, const FredholmReport& current, double tol) {
  auto close = [tol](double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale < 1e-20 || std::abs(a - b) <= tol * scale;
  };
  return close(previous.adjoint_defect.schatten_sum, current.adjoint_defect.schatten_sum) &&
         close(previous.idempotent_defect.schatten_sum, current.idempotent_defect.schatten_sum) &&
         close(previous.commutator.schatten_sum, current.commutator.schatten_sum);
}

BlockOperator compressed_op(const CrossedProductElement& e, const TruncationSpec& t) {
  const auto p = projection_P(t);
  return p * build_lambda_op(e, t) * p;
}

// --- index --------------------------------------------------------------

IndexEstimate index_estimate(const CrossedProductElement& a, std::span<const std::size_t> radii,
                             const CylinderMeasure& mu, double tol_ker, double tol_gap) {
  if (radii.size() < 2) throw DomainError("index estimate needs at least two truncation levels");
  if (!(tol_ker > 0) || !(tol_gap > tol_ker)) throw DomainError("need 0 < tol_ker < tol_gap");
  IndexEstimate out;
  bool window_clean = true;
  for (auto radius : radii) {
    const auto keep = section_interior(a.rank(), radius, a.max_word_length());
    const auto s = section(a, radius, mu).restricted(keep);
    const Eigen::MatrixXcd full = s.to_dense(keep);
    // Square compression: interior rows of interior columns.
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()), full.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = full.row(rows[i]);

    IndexLevel level;
    level.radius = radius;
    level.dim = rows.size();
    const auto sv = dense_singular_values(m);
    const auto sv_adj = dense_singular_values(m.adjoint());
    for (double x : sv) {
      if (x < tol_ker) ++level.kernel;
      if (x >= tol_ker && x < tol_gap) ++level.in_window;
    }
    for (double x : sv_adj) {
      if (x < tol_ker) ++level.cokernel;
    }
    level.smallest = sv.empty() ? 0.0 : *std::min_element(sv.begin(), sv.end());
    out.levels.push_back(level);
  }
  const auto& last = out.levels[out.levels.size() - 1];
  const auto& prev = out.levels[out.levels.size() - 2];
  window_clean = last.in_window == 0 && prev.in_window == 0;
  const long i1 = static_cast<long>(last.kernel) - static_cast<long>(last.cokernel);
  const long i0 = static_cast<long>(prev.kernel) - static_cast<long>(prev.cokernel);
  if (window_clean && i1 == i0) out.value = i1;
  return out;
}

}  // namespace hypbound
