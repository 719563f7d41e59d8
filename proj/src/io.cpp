#include "hypbound/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "hypbound/error.hpp"

namespace hypbound {

namespace {

std::string word_text(const GeneratorSet& gens, const Word& w) { return w.empty() ? "e" : format_word(gens, w); }

std::string complex_text(const ComplexRational& z) {
  if (sgn(z.im) == 0) return to_string(z.re);
  return to_string(z.re) + "," + to_string(z.im);
}

std::size_t rank_of(const Json& j, std::optional<std::size_t> rank) {
  if (j.contains("n")) {
    if (!j["n"].is_number_unsigned()) throw ParseError("\"n\" must be a positive integer");
    const auto n = j["n"].get<std::size_t>();
    if (rank && *rank != n) throw ParseError("rank mismatch: expected " + std::to_string(*rank) + ", got " + std::to_string(n));
    return n;
  }
  if (!rank) throw ParseError("missing \"n\" (rank)");
  return *rank;
}

std::string value_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError("values must be \"p/q\" strings or integers");
}

// Reads the shared cell schema into per-cell texts at the declared depth.
template <typename Value, typename Parse>
std::vector<Value> read_cells(const Json& j, std::size_t n, std::size_t& depth, Parse&& parse) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  if (!j.contains("depth") || !j["depth"].is_number_unsigned()) throw ParseError("missing \"depth\"");
  depth = j["depth"].get<std::size_t>();
  std::vector<Value> out(cell_count(n, depth));
  std::vector<bool> seen(out.size(), false);
  const GeneratorSet gens = GeneratorSet::standard(n);
  if (!j.contains("entries") || !j["entries"].is_array()) throw ParseError("missing \"entries\" array");
  for (const auto& e : j["entries"]) {
    if (!e.contains("prefix") || !e["prefix"].is_string() || !e.contains("value"))
      throw ParseError("each entry needs \"prefix\" and \"value\"");
    const std::string text = e["prefix"].get<std::string>();
    const auto letters = parse_letters(gens, text);
    if (!is_reduced(letters)) throw ParseError("prefix \"" + text + "\" is not a reduced word");
    const Word w = Word::from_reduced(letters);
    if (w.length() != depth)
      throw ParseError("prefix \"" + text + "\" has length " + std::to_string(w.length()) + ", expected depth " +
                       std::to_string(depth));
    const std::size_t i = cell_index(n, w);
    if (seen[i]) throw ParseError("duplicate prefix \"" + text + "\"");
    seen[i] = true;
    out[i] = parse(value_text(e["value"]));
  }
  return out;
}

}  // namespace

StepFunction step_function_from_json(const Json& j, std::optional<std::size_t> rank) {
  const std::size_t n = rank_of(j, rank);
  std::size_t depth = 0;
  auto values = read_cells<ComplexRational>(j, n, depth, [](const std::string& s) { return parse_complex_rational(s); });
  return StepFunction(n, depth, std::move(values));
}

CylinderMeasure measure_from_json(const Json& j, std::optional<std::size_t> rank) {
  const std::size_t n = rank_of(j, rank);
  std::size_t depth = 0;
  auto weights = read_cells<Rational>(j, n, depth, [](const std::string& s) { return parse_rational(s); });
  return CylinderMeasure(n, depth, std::move(weights));
}

Json to_json(const StepFunction& phi) {
  const auto gens = GeneratorSet::standard(phi.rank());
  Json entries = Json::array();
  const auto cs = cells(phi.rank(), phi.depth());
  for (std::size_t i = 0; i < cs.size(); ++i)
    entries.push_back({{"prefix", format_word(gens, cs[i])}, {"value", complex_text(phi.values()[i])}});
  return {{"n", phi.rank()}, {"depth", phi.depth()}, {"entries", entries}};
}

Json to_json(const CylinderMeasure& mu) {
  const auto gens = GeneratorSet::standard(mu.rank());
  Json entries = Json::array();
  const auto cs = cells(mu.rank(), mu.depth());
  for (std::size_t i = 0; i < cs.size(); ++i)
    entries.push_back({{"prefix", format_word(gens, cs[i])}, {"value", to_string(mu.weights()[i])}});
  return {{"n", mu.rank()}, {"depth", mu.depth()}, {"entries", entries}};
}

CrossedProductElement element_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  const std::size_t n = rank_of(j, std::nullopt);
  const GeneratorSet gens = GeneratorSet::standard(n);
  if (j.contains("entries")) return CrossedProductElement::function(step_function_from_json(j, n));
  if (j.contains("word") && !j.contains("terms"))
    return CrossedProductElement::group(n, parse_word(gens, j["word"].get<std::string>()));
  if (!j.contains("terms") || !j["terms"].is_array()) throw ParseError("missing \"terms\" array");
  std::vector<CrossedProductTerm> terms;
  for (const auto& t : j["terms"]) {
    const Word g = t.contains("word") ? parse_word(gens, t["word"].get<std::string>()) : Word{};
    const StepFunction phi = t.contains("phi") ? step_function_from_json(t["phi"], n)
                                               : StepFunction::constant(n, ComplexRational(Rational(1)));
    terms.push_back({phi, g});
  }
  return CrossedProductElement(n, std::move(terms));
}

Json to_json(const CrossedProductElement& a) {
  const auto gens = GeneratorSet::standard(a.rank());
  Json terms = Json::array();
  for (const auto& t : a.terms()) terms.push_back({{"word", word_text(gens, t.g)}, {"phi", to_json(t.phi)}});
  return {{"n", a.rank()}, {"terms", terms}};
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_deviation_csv(std::ostream& out, const DeviationTable& table) {
  const auto gens = GeneratorSet::standard(table.rank);
  out << "word,E_re,E_im,sigma_sq,sigma\n";
  for (const auto& e : table.entries) {
    std::ostringstream sigma;
    sigma << std::setprecision(17) << e.sigma();
    out << word_text(gens, e.g) << ',' << to_string(e.expectation.re) << ',' << to_string(e.expectation.im) << ','
        << to_string(e.sigma_sq) << ',' << sigma.str() << '\n';
  }
}

DeviationTable read_deviation_csv(std::istream& in, std::optional<std::size_t> rank) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty deviation table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "word,E_re,E_im,sigma_sq,sigma") throw ParseError("unexpected deviation table header: " + line);
  std::vector<std::vector<std::string>> rows;
  std::size_t max_letter = 0;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 5) throw ParseError("line " + std::to_string(lineno) + ": expected 5 columns");
    if (cols[0] != "e")
      for (char ch : cols[0]) {
        if (!std::isalpha(static_cast<unsigned char>(ch)))
          throw ParseError("line " + std::to_string(lineno) + ": bad word " + cols[0]);
        max_letter = std::max<std::size_t>(max_letter, static_cast<std::size_t>(std::tolower(ch) - 'a'));
      }
    rows.push_back(std::move(cols));
  }
  DeviationTable table;
  table.rank = rank.value_or(std::max<std::size_t>(2, max_letter + 1));
  const auto gens = GeneratorSet::standard(table.rank);
  for (const auto& cols : rows) {
    DeviationEntry e;
    e.g = parse_word(gens, cols[0]);
    e.expectation = ComplexRational(parse_rational(cols[1]), parse_rational(cols[2]));
    e.sigma_sq = parse_rational(cols[3]);
    if (sgn(e.sigma_sq) < 0) throw ParseError("negative sigma_sq for " + cols[0]);
    table.radius = std::max(table.radius, e.g.length());
    table.entries.push_back(std::move(e));
  }
  std::sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) { return a.g < b.g; });
  recompute_shell_maxima(table);
  return table;
}

void write_singular_csv(std::ostream& out, std::span<const double> values, double p) {
  out << "n,s_n,schatten_partial\n";
  out << std::setprecision(17);
  double sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += std::pow(values[i], p);
    out << i + 1 << ',' << values[i] << ',' << sum << '\n';
  }
}

Json exact(const Rational& q) { return {{"value", to_string(q)}, {"mode", "exact-rational"}}; }
Json exact(const ComplexRational& z) {
  return {{"value", {{"re", to_string(z.re)}, {"im", to_string(z.im)}}}, {"mode", "exact-rational"}};
}
Json exact_int(long long v) { return {{"value", v}, {"mode", "exact-rational"}}; }
Json exact_ints(std::span<const std::size_t> v) {
  return {{"value", std::vector<std::size_t>(v.begin(), v.end())}, {"mode", "exact-rational"}};
}
Json exact_list(std::span<const Rational> v) {
  Json arr = Json::array();
  for (const auto& q : v) arr.push_back(to_string(q));
  return {{"value", arr}, {"mode", "exact-rational"}};
}
Json float64(double v) { return {{"value", v}, {"mode", "float64"}}; }
Json float64_list(std::span<const double> v) {
  return {{"value", std::vector<double>(v.begin(), v.end())}, {"mode", "float64"}};
}
Json monte_carlo(double v) { return {{"value", v}, {"mode", "monte-carlo"}}; }

}  // namespace hypbound
