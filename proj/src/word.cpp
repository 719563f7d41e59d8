#include "hypbound/word.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>

#include "hypbound/error.hpp"

namespace hypbound {

GeneratorSet::GeneratorSet(std::string names) : names_(std::move(names)) {
  if (names_.empty()) throw ParseError("generator set is empty");
  if (names_.size() > 26) throw ParseError("at most 26 generators are supported");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const char c = names_[i];
    if (c < 'a' || c > 'z') {
      throw ParseError(std::string("generator name '") + c + "' is not a lowercase letter");
    }
    if (names_.find(c) != i) throw ParseError(std::string("duplicate generator '") + c + "'");
  }
}

GeneratorSet GeneratorSet::standard(std::size_t n) {
  if (n == 0 || n > 26) throw DomainError("rank must be in 1..26");
  std::string names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(static_cast<char>('a' + i));
  return GeneratorSet(std::move(names));
}

char GeneratorSet::symbol(Letter x) const {
  const char c = names_.at(x / 2);
  return (x & 1) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
}

Letter GeneratorSet::letter(char symbol) const {
  const bool inv = std::isupper(static_cast<unsigned char>(symbol)) != 0;
  const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(symbol)));
  const auto pos = names_.find(lower);
  if (pos == std::string::npos || !std::isalpha(static_cast<unsigned char>(symbol))) {
    throw ParseError(std::string("unknown symbol '") + symbol + "'");
  }
  return static_cast<Letter>(2 * pos + (inv ? 1 : 0));
}

bool is_reduced(std::span<const Letter> raw) {
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (raw[i] == inverse(raw[i - 1])) return false;
  }
  return true;
}

Word Word::reduce(std::span<const Letter> raw) {
  std::vector<Letter> out;
  out.reserve(raw.size());
  for (Letter x : raw) {
    if (!out.empty() && out.back() == hypbound::inverse(x)) {
      out.pop_back();
    } else {
      out.push_back(x);
    }
  }
  return Word(std::move(out));
}

Word Word::from_reduced(std::vector<Letter> letters) {
  assert(is_reduced(letters));
  return Word(std::move(letters));
}

Word Word::inverse() const {
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (auto& x : out) x = hypbound::inverse(x);
  return Word(std::move(out));
}

Word Word::prefix(std::size_t len) const {
  len = std::min(len, letters_.size());
  return Word(std::vector<Letter>(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(len)));
}

Word operator*(const Word& u, const Word& v) {
  std::size_t c = 0;
  const auto& a = u.letters_;
  const auto& b = v.letters_;
  while (c < a.size() && c < b.size() && a[a.size() - 1 - c] == inverse(b[c])) ++c;
  std::vector<Letter> out;
  out.reserve(a.size() + b.size() - 2 * c);
  out.insert(out.end(), a.begin(), a.end() - static_cast<std::ptrdiff_t>(c));
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(c), b.end());
  return Word(std::move(out));
}

std::strong_ordering operator<=>(const Word& u, const Word& v) {
  if (auto c = u.length() <=> v.length(); c != 0) return c;
  return std::lexicographical_compare_three_way(u.letters_.begin(), u.letters_.end(),
                                                v.letters_.begin(), v.letters_.end());
}

std::size_t common_prefix_length(const Word& u, const Word& v) {
  const auto n = std::min(u.length(), v.length());
  std::size_t i = 0;
  while (i < n && u[i] == v[i]) ++i;
  return i;
}

Word cyclic_reduce(const Word& w) {
  const auto& x = w.letters();
  std::size_t lo = 0;
  std::size_t hi = x.size();
  while (hi - lo >= 2 && x[hi - 1] == inverse(x[lo])) {
    ++lo;
    --hi;
  }
  return Word::from_reduced(std::vector<Letter>(x.begin() + static_cast<std::ptrdiff_t>(lo),
                                                x.begin() + static_cast<std::ptrdiff_t>(hi)));
}

std::vector<Letter> parse_letters(const GeneratorSet& gens, std::string_view text) {
  std::vector<Letter> out;
  std::string compact;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  if (compact.empty() || compact == "1" || (compact == "e" && gens.names().find('e') == std::string::npos)) {
    return out;
  }
  out.reserve(compact.size());
  for (char c : compact) out.push_back(gens.letter(c));
  return out;
}

Word parse_word(const GeneratorSet& gens, std::string_view text) {
  return Word::reduce(parse_letters(gens, text));
}

std::string format_word(const GeneratorSet& gens, const Word& w) {
  std::string out;
  out.reserve(w.length());
  for (Letter x : w.letters()) out.push_back(gens.symbol(x));
  return out;
}

std::vector<Word> words_of_length(std::size_t rank, std::size_t length) {
  std::vector<Word> layer{Word{}};
  const auto alphabet = static_cast<Letter>(2 * rank);
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<Word> next;
    next.reserve(layer.size() * (k == 0 ? alphabet : alphabet - 1));
    for (const auto& w : layer) {
      for (Letter x = 0; x < alphabet; ++x) {
        if (!w.empty() && x == inverse(w.back())) continue;
        auto letters = w.letters();
        letters.push_back(x);
        next.push_back(Word::from_reduced(std::move(letters)));
      }
    }
    layer = std::move(next);
  }
  return layer;
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (Letter x : w.letters()) {
    h ^= x;
    h *= 1099511628211ULL;
  }
  return h ^ w.length();
}

}  // namespace hypbound
