#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hypbound/word.hpp"

namespace hypbound {

// A finite presentation <S | R>. Relators are stored freely and cyclically
// reduced; rank must be at least 2 (elementary groups are rejected).
class GroupPresentation {
 public:
  GroupPresentation(GeneratorSet generators, std::vector<Word> relators);

  // Free group of rank n with no relators.
  static GroupPresentation free_group(std::size_t n);

  const GeneratorSet& generators() const noexcept { return generators_; }
  const std::vector<Word>& relators() const noexcept { return relators_; }
  std::size_t rank() const noexcept { return generators_.rank(); }
  bool is_free() const noexcept { return relators_.empty(); }
  std::size_t max_relator_length() const noexcept;

 private:
  GeneratorSet generators_;
  std::vector<Word> relators_;
};

// Presentation file format:
//   generators: a b c d
//   relator: abABcdCD
// Lowercase letters are generators, uppercase their inverses; blank lines and
// '#' comments are ignored.
GroupPresentation parse_presentation(std::string_view text);
GroupPresentation load_presentation(const std::filesystem::path& path);

struct Piece {
  Word subword;
  std::size_t length;
  friend bool operator==(const Piece&, const Piece&) = default;
};

struct SmallCancellationReport {
  std::vector<Piece> pieces;  // distinct maximal pieces, shortlex order
  std::size_t max_piece_len = 0;
  std::size_t min_relator_len = 0;
  std::size_t max_relator_len = 0;
  bool passes_c16 = true;
  bool vacuous = false;  // no relators: free group, passes vacuously
  std::int64_t delta_bound = 0;  // 3 * max|r|
  double kappa = 0.0;            // 15 * ln(2|S| - 1) * max|r|
  std::int64_t euler_char = 0;   // 1 - |S| + |R|
};

// Exhaustive piece enumeration over ordered pairs of distinct cyclic
// rotations of R and R^{-1}.
SmallCancellationReport check_small_cancellation(const GroupPresentation& p);

}  // namespace hypbound
