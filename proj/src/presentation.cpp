#include "hypbound/presentation.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "hypbound/error.hpp"

namespace hypbound {

GroupPresentation::GroupPresentation(GeneratorSet generators, std::vector<Word> relators)
    : generators_(std::move(generators)) {
  if (generators_.rank() < 2) {
    throw ElementaryGroupError("presentations need at least two generators (elementary groups are excluded)");
  }
  relators_.reserve(relators.size());
  for (const auto& r : relators) {
    auto c = cyclic_reduce(r);
    if (c.empty()) throw ParseError("relator reduces to the empty word");
    for (Letter x : c.letters()) {
      if (x >= generators_.alphabet_size()) throw ParseError("relator uses a letter outside the alphabet");
    }
    relators_.push_back(std::move(c));
  }
}

GroupPresentation GroupPresentation::free_group(std::size_t n) {
  if (n < 2) throw ElementaryGroupError("free groups of rank < 2 are elementary");
  return GroupPresentation(GeneratorSet::standard(n), {});
}

std::size_t GroupPresentation::max_relator_length() const noexcept {
  std::size_t m = 0;
  for (const auto& r : relators_) m = std::max(m, r.length());
  return m;
}

namespace {

std::string_view strip(std::string_view s) {
  const auto hash = s.find('#');
  if (hash != std::string_view::npos) s = s.substr(0, hash);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

GroupPresentation parse_presentation(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::optional<GeneratorSet> gens;
  std::vector<std::string> raw_relators;
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = strip(line);
    if (s.empty()) continue;
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'generators:' or 'relator:'");
    }
    const auto key = strip(s.substr(0, colon));
    const auto value = s.substr(colon + 1);
    if (key == "generators") {
      if (gens) throw ParseError("line " + std::to_string(lineno) + ": duplicate generators line");
      std::string names;
      for (char c : value) {
        if (!std::isspace(static_cast<unsigned char>(c))) names.push_back(c);
      }
      gens.emplace(std::move(names));
    } else if (key == "relator") {
      if (!gens) throw ParseError("line " + std::to_string(lineno) + ": relator before generators line");
      raw_relators.emplace_back(value);
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!gens) throw ParseError("missing 'generators:' line");
  std::vector<Word> relators;
  for (const auto& r : raw_relators) relators.push_back(parse_word(*gens, r));
  return GroupPresentation(*gens, std::move(relators));
}

GroupPresentation load_presentation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open presentation file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_presentation(buf.str());
}

SmallCancellationReport check_small_cancellation(const GroupPresentation& p) {
  SmallCancellationReport rep;
  const auto& rels = p.relators();
  rep.euler_char = 1 - static_cast<std::int64_t>(p.rank()) + static_cast<std::int64_t>(rels.size());
  if (rels.empty()) {
    rep.vacuous = true;
    return rep;
  }

  // Every cyclic rotation of every r and r^{-1}, each listed once per
  // position so that equal words at distinct positions still pair up.
  std::vector<std::vector<Letter>> rotations;
  rep.min_relator_len = rels.front().length();
  for (const auto& r : rels) {
    rep.min_relator_len = std::min(rep.min_relator_len, r.length());
    rep.max_relator_len = std::max(rep.max_relator_len, r.length());
    for (const auto& w : {r, r.inverse()}) {
      const auto& x = w.letters();
      for (std::size_t s = 0; s < x.size(); ++s) {
        std::vector<Letter> rot(x.begin() + static_cast<std::ptrdiff_t>(s), x.end());
        rot.insert(rot.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s));
        rotations.push_back(std::move(rot));
      }
    }
  }

  std::set<Word> pieces;
  for (std::size_t i = 0; i < rotations.size(); ++i) {
    for (std::size_t j = 0; j < rotations.size(); ++j) {
      if (i == j) continue;
      const auto& u = rotations[i];
      const auto& v = rotations[j];
      const auto n = std::min(u.size(), v.size());
      std::size_t c = 0;
      while (c < n && u[c] == v[c]) ++c;
      if (c == 0) continue;
      rep.max_piece_len = std::max(rep.max_piece_len, c);
      pieces.insert(Word::from_reduced(std::vector<Letter>(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(c))));
    }
  }
  for (const auto& w : pieces) rep.pieces.push_back({w, w.length()});

  rep.passes_c16 = 6 * rep.max_piece_len < rep.min_relator_len;
  rep.delta_bound = 3 * static_cast<std::int64_t>(rep.max_relator_len);
  rep.kappa = 15.0 * std::log(2.0 * static_cast<double>(p.rank()) - 1.0) *
              static_cast<double>(rep.max_relator_len);
  return rep;
}

}  // namespace hypbound
