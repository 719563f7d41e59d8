#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypbound {

// A letter of the symmetric alphabet. Generator i is encoded as 2i and its
// inverse as 2i + 1, so inversion flips the low bit and the natural integer
// order (a < A < b < B < ...) is the letter order used by shortlex.
using Letter = std::uint8_t;

constexpr Letter inverse(Letter x) noexcept { return x ^ Letter{1}; }

// Ordered list of distinct lowercase single-letter generator names.
class GeneratorSet {
 public:
  // Throws ParseError on empty, duplicate or non-lowercase names.
  explicit GeneratorSet(std::string names);

  // The first n letters of the alphabet: a, b, c, ...
  static GeneratorSet standard(std::size_t n);

  std::size_t rank() const noexcept { return names_.size(); }
  std::size_t alphabet_size() const noexcept { return 2 * names_.size(); }
  const std::string& names() const noexcept { return names_; }

  // Lowercase name for generators, uppercase for inverses.
  char symbol(Letter x) const;
  // Throws ParseError naming the offending symbol.
  Letter letter(char symbol) const;

  friend bool operator==(const GeneratorSet&, const GeneratorSet&) = default;

 private:
  std::string names_;
};

// A freely reduced word; the empty word is the identity.
class Word {
 public:
  Word() = default;

  // Freely reduces the raw letter sequence.
  static Word reduce(std::span<const Letter> raw);
  // Wraps letters known to be reduced (checked in debug builds).
  static Word from_reduced(std::vector<Letter> letters);

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  std::size_t length() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  Letter back() const { return letters_.back(); }

  Word inverse() const;
  Word prefix(std::size_t len) const;

  // Group product: reduced concatenation.
  friend Word operator*(const Word& u, const Word& v);

  friend bool operator==(const Word&, const Word&) = default;

  // Shortlex: shorter words first, then lexicographic in letter order.
  friend std::strong_ordering operator<=>(const Word& u, const Word& v);

 private:
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  std::vector<Letter> letters_;
};

bool is_reduced(std::span<const Letter> raw);

// Length of the longest common prefix.
std::size_t common_prefix_length(const Word& u, const Word& v);

// Cyclic reduction: strips matching first/last letter pairs.
Word cyclic_reduce(const Word& w);

// Parses letters, ignoring whitespace. "e", "1" and "" denote the identity.
// Throws ParseError on unknown symbols.
std::vector<Letter> parse_letters(const GeneratorSet& gens, std::string_view text);
Word parse_word(const GeneratorSet& gens, std::string_view text);

std::string format_word(const GeneratorSet& gens, const Word& w);

// All reduced words of length exactly `length` over `rank` generators, in
// shortlex order.
std::vector<Word> words_of_length(std::size_t rank, std::size_t length);

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

}  // namespace hypbound
