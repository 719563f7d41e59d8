#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

#include "hypbound/boundary.hpp"
#include "hypbound/deviation.hpp"
#include "hypbound/operators.hpp"

namespace hypbound {

using Json = nlohmann::ordered_json;

// Step functions and measures share one schema:
//   {"n": 2, "depth": 2, "entries": [{"prefix": "ab", "value": "1/12"}, ...]}
// Values are "p/q" strings (or "re,im" for complex values); cells without an
// entry are 0. "n" may be omitted when the caller supplies the rank.
StepFunction step_function_from_json(const Json& j, std::optional<std::size_t> rank = std::nullopt);
CylinderMeasure measure_from_json(const Json& j, std::optional<std::size_t> rank = std::nullopt);
Json to_json(const StepFunction& phi);
Json to_json(const CylinderMeasure& mu);

// {"n": 2, "terms": [{"word": "a", "phi": {...}}, ...]}. A bare step function
// is read as the single term phi * e, and {"n": 2, "word": "ab"} as a group
// element.
CrossedProductElement element_from_json(const Json& j);
Json to_json(const CrossedProductElement& a);

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);

// Deviation table CSV: word,E_re,E_im,sigma_sq,sigma with exact "p/q" columns.
void write_deviation_csv(std::ostream& out, const DeviationTable& table);
// Rank is inferred from the letters unless given.
DeviationTable read_deviation_csv(std::istream& in, std::optional<std::size_t> rank = std::nullopt);

// Singular value CSV: n,s_n,schatten_partial (1-based n).
void write_singular_csv(std::ostream& out, std::span<const double> values, double p);

// Arithmetic mode tags attached to every reported number.
Json exact(const Rational& q);
Json exact(const ComplexRational& z);
Json exact_int(long long v);
Json exact_ints(std::span<const std::size_t> v);
Json exact_list(std::span<const Rational> v);
Json float64(double v);
Json float64_list(std::span<const double> v);
Json monte_carlo(double v);

}  // namespace hypbound
