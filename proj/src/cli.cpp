#include "hypbound/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"

#include "hypbound/approx_boundary.hpp"
#include "hypbound/cayley_ball.hpp"
#include "hypbound/deviation.hpp"
#include "hypbound/error.hpp"
#include "hypbound/io.hpp"
#include "hypbound/operators.hpp"
#include "hypbound/parallel.hpp"
#include "hypbound/presentation.hpp"

namespace hypbound::cli {

namespace {

struct Outcome {
  Json config;
  Json result;
  bool certificate_ok = true;
};

struct Options {
  std::string file;
  std::size_t n = 0;
  unsigned threads = 0;
  std::string json;
  std::size_t radius = 0;
  std::size_t depth = 0;
  std::string phi;
  std::string measure;
  std::string out;
  std::string table;
  std::vector<double> ps;
  std::string expect;
  std::string csv;
  std::string a;
  std::string b;
  std::vector<std::size_t> radii;
  std::optional<double> epsilon;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::vector<std::string> words;
  std::vector<std::string> pairs;
  std::string ray;
  bool snowflake = false;
  std::string xi;
  std::string basepoint = "e";
  std::optional<std::string> max_delta;
  std::optional<double> max_change;
  bool require_stable = false;
  double tol_ker = 1e-6;
  double tol_gap = 1e-3;
  double cell_cap = 1e10;
  std::size_t dim_cap = 6000;
};

std::string word_text(const GeneratorSet& gens, const Word& w) { return w.empty() ? "e" : format_word(gens, w); }

GroupPresentation presentation_of(const Options& o) {
  if (!o.file.empty()) return load_presentation(o.file);
  if (o.n >= 2) return GroupPresentation::free_group(o.n);
  throw DomainError("give a presentation with --file or a free rank with --n (>= 2)");
}

Json presentation_config(const Options& o, const GroupPresentation& p) {
  Json j;
  if (!o.file.empty()) j["file"] = o.file;
  j["generators"] = p.generators().names();
  Json rel = Json::array();
  for (const auto& r : p.relators()) rel.push_back(format_word(p.generators(), r));
  j["relators"] = rel;
  return j;
}

std::size_t require_rank(const Options& o) {
  if (o.n < 2) throw DomainError("--n must be at least 2");
  return o.n;
}

CylinderMeasure measure_of(const Options& o, std::size_t n) {
  if (o.measure.empty()) return ps_measure(n, 1);
  auto mu = measure_from_json(load_json(o.measure), n);
  if (!mu.is_probability()) throw DomainError("measure in " + o.measure + " does not have total mass 1");
  return mu;
}

Json measure_config(const Options& o) { return o.measure.empty() ? Json("uniform") : Json(o.measure); }

Json report_json(const SingularValueReport& r, double p) {
  return {{"count", exact_int(static_cast<long long>(r.values.size()))},
          {"norm", float64(r.norm())},
          {"schatten_sum", float64(r.schatten_sum(p))},
          {"fitted_exponent", float64(r.fitted_exponent)},
          {"stable_prefix", exact_int(static_cast<long long>(r.stable_prefix))},
          {"has_previous", r.has_previous}};
}

Json certificate_json(const SummabilityCertificate& c) {
  Json j{{"p", float64(c.p)},
         {"verdict", to_string(c.verdict)},
         {"k0", exact_int(static_cast<long long>(c.k0))},
         {"shell_sums", float64_list(c.shell_sums)},
         {"tail_ratios", float64_list(c.ratios)},
         {"ratio_bound", float64(c.ratio_bound)},
         {"min_shell_sum", float64(c.min_shell_sum)},
         {"exact", c.exact}};
  if (c.exact) j["shell_sums_exact"] = exact_list(c.shell_sums_exact);
  return j;
}

void write_csv(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  body(f);
}

// --- subcommands -----------------------------------------------------------

Outcome cmd_check_hyp(const Options& o) {
  const auto p = presentation_of(o);
  const unsigned threads = resolve_threads(o.threads);
  const CayleyBall ball(p, o.radius);
  const Word base = parse_word(p.generators(), o.basepoint);
  const auto rep = check_hyperbolicity(ball, base, threads);
  Outcome out;
  out.config = {{"presentation", presentation_config(o, p)},
                {"radius", o.radius},
                {"basepoint", o.basepoint},
                {"threads", threads}};
  if (o.max_delta) out.config["max_delta"] = *o.max_delta;
  const auto& g = p.generators();
  out.result = {{"delta", exact(rep.delta)},
                {"point_radius", exact_int(static_cast<long long>(rep.point_radius))},
                {"point_count", exact_int(static_cast<long long>(rep.point_count))},
                {"certified_radius", exact_int(static_cast<long long>(ball.certified_radius()))},
                {"ball_size", exact_int(static_cast<long long>(ball.size()))},
                {"witness", {word_text(g, rep.witness_x), word_text(g, rep.witness_y), word_text(g, rep.witness_z)}}};
  if (o.max_delta) {
    out.certificate_ok = rep.delta <= parse_rational(*o.max_delta);
    out.result["within_max_delta"] = out.certificate_ok;
  }
  return out;
}

Outcome cmd_check_c16(const Options& o) {
  const auto p = presentation_of(o);
  const auto rep = check_small_cancellation(p);
  Outcome out;
  out.config = {{"presentation", presentation_config(o, p)}};
  Json pieces = Json::array();
  for (const auto& piece : rep.pieces) pieces.push_back(format_word(p.generators(), piece.subword));
  out.result = {{"passes_C16", rep.passes_c16},
                {"vacuous", rep.vacuous},
                {"pieces", pieces},
                {"max_piece_len", exact_int(static_cast<long long>(rep.max_piece_len))},
                {"min_relator_len", exact_int(static_cast<long long>(rep.min_relator_len))},
                {"max_relator_len", exact_int(static_cast<long long>(rep.max_relator_len))},
                {"delta_bound", exact_int(rep.delta_bound)},
                {"kappa", float64(rep.kappa)},
                {"euler_char", exact_int(rep.euler_char)}};
  out.certificate_ok = rep.passes_c16;
  return out;
}

Outcome cmd_growth(const Options& o) {
  const auto p = presentation_of(o);
  const CayleyBall ball(p, o.radius);
  const auto counts = growth_counts(ball);
  Outcome out;
  out.config = {{"presentation", presentation_config(o, p)}, {"radius", o.radius}};
  out.result = {{"counts", exact_ints(counts)},
                {"sphere_sizes", exact_ints(ball.sphere_sizes())},
                {"certified_radius", exact_int(static_cast<long long>(ball.certified_radius()))}};
  if (counts.size() >= 3) {
    const auto fit = entropy_estimate(counts);
    out.result["entropy"] = float64(fit.entropy);
    out.result["entropy_residual"] = float64(fit.residual);
    out.result["entropy_fit_from"] = exact_int(static_cast<long long>(fit.first_radius));
  }
  return out;
}

Outcome cmd_deviation(const Options& o) {
  const std::size_t n = require_rank(o);
  const auto phi = step_function_from_json(load_json(o.phi), n);
  const auto mu = measure_of(o, n);
  DeviationTableOptions opts;
  opts.threads = resolve_threads(o.threads);
  opts.cell_cap = o.cell_cap;
  const auto table = deviation_table(phi, mu, o.radius, opts);
  if (!o.out.empty()) write_csv(o.out, [&](std::ostream& f) { write_deviation_csv(f, table); });
  Outcome out;
  out.config = {{"n", n},     {"phi", o.phi},           {"measure", measure_config(o)}, {"radius", o.radius},
                {"out", o.out}, {"cell_cap", o.cell_cap}, {"threads", opts.threads}};
  out.result = {{"entries", exact_int(static_cast<long long>(table.entries.size()))},
                {"shell_max_sigma_sq", exact_list(table.shell_max_sq)}};
  try {
    const auto fit = decay_fit(table);
    out.result["decay_fit"] = {{"constant", fit.constant},
                               {"rate", float64(fit.rate)},
                               {"constant_c", float64(fit.constant_c)},
                               {"residual", float64(fit.residual)},
                               {"shells_used", exact_int(static_cast<long long>(fit.shells_used))}};
  } catch (const DomainError& e) {
    out.result["decay_fit"] = {{"unavailable", e.what()}};
  }
  return out;
}

Outcome cmd_lp(const Options& o) {
  std::ifstream in(o.table);
  if (!in) throw ParseError("cannot open " + o.table);
  const auto table = read_deviation_csv(in, o.n >= 2 ? std::optional<std::size_t>(o.n) : std::nullopt);
  if (!o.expect.empty() && o.expect != "converges" && o.expect != "diverges")
    throw DomainError("--expect must be 'converges' or 'diverges'");
  Outcome out;
  out.config = {{"table", o.table}, {"p", o.ps}, {"rank", table.rank}, {"radius", table.radius}};
  if (!o.expect.empty()) out.config["expect"] = o.expect;
  Json certs = Json::array();
  for (const double p : o.ps) {
    const auto c = lp_certificate(table, p);
    certs.push_back(certificate_json(c));
    if (o.expect == "converges" && c.verdict != SummabilityVerdict::converges_geometric) out.certificate_ok = false;
    if (o.expect == "diverges" && c.verdict != SummabilityVerdict::diverges) out.certificate_ok = false;
  }
  out.result = {{"certificates", certs}};
  return out;
}

Outcome cmd_kcycle(const Options& o) {
  const std::size_t n = require_rank(o);
  const auto phi = step_function_from_json(load_json(o.phi), n);
  TruncationSpec t;
  t.n = n;
  t.radius = o.radius;
  t.depth = o.depth;
  t.threads = resolve_threads(o.threads);
  t.dim_cap = o.dim_cap;
  if (!o.measure.empty()) t.measure = measure_of(o, n);
  const double p = o.ps.empty() ? 2.5 : o.ps.front();
  auto rep = basic_commutator(phi, t);
  if (o.radius >= 2) {
    TruncationSpec prev = t;
    prev.radius = o.radius - 1;
    const auto before = basic_commutator(phi, prev);
    rep.commutator_values.stable_prefix =
        stable_prefix(before.commutator_values.values, rep.commutator_values.values, 1e-10);
    rep.commutator_values.has_previous = true;
  }
  const auto table = deviation_table(phi, t.measure ? *t.measure : ps_measure(n, 1), o.radius);
  std::vector<double> sigma;
  for (const auto& e : table.entries) sigma.push_back(e.sigma());
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  double mismatch = 0;
  for (std::size_t i = 0; i < sigma.size() && i < rep.pi_values.values.size(); ++i)
    mismatch = std::max(mismatch, std::abs(sigma[i] - rep.pi_values.values[i]));
  if (!o.csv.empty())
    write_csv(o.csv, [&](std::ostream& f) { write_singular_csv(f, rep.commutator_values.values, p); });
  Outcome out;
  out.config = {{"n", n},          {"phi", o.phi},       {"measure", measure_config(o)},
                {"radius", o.radius}, {"depth", o.depth}, {"p", p},
                {"csv", o.csv},    {"dim_cap", o.dim_cap}, {"threads", t.threads}};
  out.result = {{"dim", exact_int(static_cast<long long>(t.dim()))},
                {"interior_count", exact_int(static_cast<long long>(rep.interior_count))},
                {"commutator", report_json(rep.commutator_values, p)},
                {"pi", report_json(rep.pi_values, p)},
                {"deviation_max_mismatch", float64(mismatch)}};
  return out;
}

Outcome cmd_twisted(const Options& o) {
  const auto a = element_from_json(load_json(o.a));
  const auto b = element_from_json(load_json(o.b));
  if (a.rank() != b.rank()) throw DomainError("elements have different ranks");
  const std::size_t n = a.rank();
  const auto mu = measure_of(o, n);
  const double p = o.ps.empty() ? 2.5 : o.ps.front();
  const auto rep = twisted_commutator(a, b, o.radius, mu, p);
  if (!o.csv.empty())
    write_csv(o.csv, [&](std::ostream& f) { write_singular_csv(f, rep.current.values.values, p); });
  Outcome out;
  out.config = {{"a", o.a}, {"b", o.b}, {"measure", measure_config(o)}, {"radius", o.radius}, {"p", p}, {"csv", o.csv}};
  if (o.max_change) out.config["max_change"] = *o.max_change;
  auto level = [&](const TwistedLevel& l) {
    Json j = report_json(l.values, p);
    j["radius"] = exact_int(static_cast<long long>(l.radius));
    j["interior_count"] = exact_int(static_cast<long long>(l.interior_count));
    return j;
  };
  out.result = {{"current", level(rep.current)}, {"relative_change", float64(rep.relative_change)}};
  if (rep.previous) out.result["previous"] = level(*rep.previous);
  const bool a_function = a.terms().size() == 1 && a.terms()[0].g.empty();
  const bool b_group = b.terms().size() == 1 && b.terms()[0].phi.is_constant() &&
                       b.terms()[0].phi.values().front() == ComplexRational(Rational(1));
  if (a_function && b_group) {
    const auto check = twisted_diagonal_check(a.terms()[0].phi, b.terms()[0].g, o.radius, mu);
    out.result["diagonal_check"] = {{"entries", exact_int(static_cast<long long>(check.entries.size()))},
                                    {"diagonal", check.diagonal},
                                    {"all_match", check.all_match}};
    out.certificate_ok = check.diagonal && check.all_match;
  }
  if (o.max_change) out.certificate_ok = out.certificate_ok && rep.relative_change < *o.max_change;
  return out;
}

Outcome cmd_index(const Options& o) {
  const auto a = element_from_json(load_json(o.a));
  const auto mu = measure_of(o, a.rank());
  const auto est = index_estimate(a, o.radii, mu, o.tol_ker, o.tol_gap);
  Outcome out;
  out.config = {{"a", o.a},           {"measure", measure_config(o)}, {"radii", o.radii},
                {"tol_ker", o.tol_ker}, {"tol_gap", o.tol_gap},       {"require_stable", o.require_stable}};
  Json levels = Json::array();
  for (const auto& l : est.levels)
    levels.push_back({{"radius", exact_int(static_cast<long long>(l.radius))},
                      {"dim", exact_int(static_cast<long long>(l.dim))},
                      {"kernel", exact_int(static_cast<long long>(l.kernel))},
                      {"cokernel", exact_int(static_cast<long long>(l.cokernel))},
                      {"in_window", exact_int(static_cast<long long>(l.in_window))},
                      {"smallest", float64(l.smallest)}});
  out.result = {{"levels", levels}, {"stable", est.value.has_value()}};
  out.result["index"] = est.value ? exact_int(*est.value) : Json("unstable");
  if (o.require_stable) out.certificate_ok = est.value.has_value();
  return out;
}

Json estimate_json(const MonteCarloEstimate& e) {
  return {{"value", monte_carlo(e.value)},
          {"stderr", monte_carlo(e.stderr_)},
          {"ratio", monte_carlo(e.ratio)},
          {"ratio_stderr", monte_carlo(e.ratio_stderr)},
          {"samples", exact_int(static_cast<long long>(e.samples))},
          {"seed", e.seed}};
}

Outcome cmd_integrals(const Options& o) {
  const auto p = presentation_of(o);
  const auto& gens = p.generators();
  const unsigned threads = resolve_threads(o.threads);
  const double eps = o.epsilon.value_or(default_epsilon(p));
  const SphereBoundaryModel m(p, o.radius, eps, threads);
  const std::size_t reach = o.radius - m.proxy_radius();

  std::vector<Word> words;
  if (o.words.empty()) {
    words.push_back(Word{});
    std::string alt, pow;
    for (std::size_t k = 0; k < reach; ++k) {
      alt.push_back(gens.symbol(static_cast<Letter>(2 * (k % 2))));
      pow.push_back(gens.symbol(0));
      words.push_back(parse_word(gens, pow));
      if (k >= 1) words.push_back(parse_word(gens, alt));
    }
  } else {
    for (const auto& w : o.words) words.push_back(parse_word(gens, w));
  }
  std::vector<std::pair<Word, Word>> pairs;
  auto pair_of = [&](const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ParseError("pair '" + s + "' must look like g:h");
    return std::pair{parse_word(gens, s.substr(0, colon)), parse_word(gens, s.substr(colon + 1))};
  };
  if (o.pairs.empty()) {
    for (const char* s : {"a:b", "e:a", "ab:ba"}) {
      auto pr = pair_of(s);
      if (std::max(pr.first.length(), pr.second.length()) <= reach) pairs.push_back(pr);
    }
  } else {
    for (const auto& s : o.pairs) pairs.push_back(pair_of(s));
  }
  const Word ray = o.ray.empty() ? parse_word(gens, std::string(reach, gens.symbol(0))) : parse_word(gens, o.ray);

  Outcome out;
  out.config = {{"presentation", presentation_config(o, p)},
                {"radius", o.radius},
                {"proxy_radius", m.proxy_radius()},
                {"epsilon", eps},
                {"epsilon_source", o.epsilon ? "flag" : "default"},
                {"samples", o.samples},
                {"seed", o.seed},
                {"ray", word_text(gens, ray)},
                {"snowflake", o.snowflake},
                {"threads", threads}};
  Json wl = Json::array(), pl = Json::array();
  for (const auto& w : words) wl.push_back(word_text(gens, w));
  for (const auto& [g, h] : pairs) pl.push_back(word_text(gens, g) + ":" + word_text(gens, h));
  out.config["words"] = wl;
  out.config["pairs"] = pl;

  const auto counts = growth_counts(m.ball());
  out.result["model"] = "heuristic proxy";
  out.result["proxy_count"] = exact_int(static_cast<long long>(m.proxies().size()));
  if (counts.size() >= 3) out.result["dimension_proxy"] = float64(entropy_estimate(counts).entropy / eps);

  std::optional<CylinderMeasure> exact_mu;
  if (p.is_free()) exact_mu = ps_measure(p.rank(), 1);
  bool calibrated = true;
  auto attach_exact = [&](Json& j, const MonteCarloEstimate& e, double exact_value) {
    const double z = e.stderr_ > 0 ? std::abs(e.value - exact_value) / e.stderr_
                                   : (e.value == exact_value ? 0.0 : INFINITY);
    j["exact"] = float64(exact_value);
    j["z"] = monte_carlo(z);
    j["within_3se"] = z <= 3.0;
    calibrated = calibrated && z <= 3.0;
  };
  Json doubles = Json::array();
  for (const auto& g : words) {
    const auto e = double_integral_estimate(m, g, o.samples, o.seed);
    Json j = estimate_json(e);
    j["g"] = word_text(gens, g);
    if (exact_mu) attach_exact(j, e, double_integral_exact(*exact_mu, g, eps));
    doubles.push_back(j);
  }
  Json singles = Json::array();
  for (const auto& [g, h] : pairs) {
    const auto e = single_integral_estimate(m, g, h, o.samples, o.seed);
    Json j = estimate_json(e);
    j["g"] = word_text(gens, g);
    j["h"] = word_text(gens, h);
    if (exact_mu) attach_exact(j, e, single_integral_exact(*exact_mu, g, h, eps));
    singles.push_back(j);
  }
  out.result["double_integrals"] = doubles;
  out.result["single_integrals"] = singles;
  if (!ray.empty()) {
    const auto scan = convergence_scan(m, ray);
    out.result["convergence"] = {{"concentration", float64_list(scan.concentration)},
                                 {"nondecreasing", scan.nondecreasing}};
  }
  if (o.snowflake) {
    const auto sf = snowflake_check(p, o.radius, eps, {0.5, 1.0}, words, o.samples, o.seed, 10.0, threads);
    Json ratios = Json::array();
    for (const auto& r : sf.ratios) ratios.push_back({{"value", r}, {"mode", "monte-carlo"}});
    out.result["snowflake"] = {{"alphas", float64_list(sf.alphas)},
                               {"ratios", ratios},
                               {"verdicts", sf.verdicts},
                               {"agree", sf.agree}};
  }
  if (exact_mu) {
    out.result["calibration_pass"] = calibrated;
    out.certificate_ok = calibrated;
  }
  return out;
}

Outcome cmd_extension_limit(const Options& o) {
  const std::size_t n = require_rank(o);
  const auto phi = step_function_from_json(load_json(o.phi), n);
  const auto mu = measure_of(o, n);
  const Word xi = parse_word(GeneratorSet::standard(n), o.xi);
  const auto lim = extension_limit(phi, xi, o.radius, mu);
  Outcome out;
  out.config = {{"n", n}, {"phi", o.phi}, {"measure", measure_config(o)}, {"xi", o.xi}, {"radius", o.radius}};
  out.result = {{"boundary_value", exact(lim.boundary_value)},
                {"errors", exact_list(lim.errors)},
                {"errors_float", float64_list(lim.errors_float)}};
  return out;
}

Outcome cmd_ahlfors(const Options& o) {
  const std::size_t n = require_rank(o);
  const double eps = o.epsilon.value_or(std::log(static_cast<double>(2 * n - 1)));
  const VisualParams vp(n, eps);
  const auto mu = measure_of(o, n);
  const auto rep = ahlfors_check(mu, vp, o.depth);
  Outcome out;
  out.config = {{"n", n}, {"epsilon", eps}, {"measure", measure_config(o)}, {"depth", o.depth}};
  out.result = {{"hausdorff_dim", float64(vp.hausdorff_dim())},
                {"ratios", exact_list(rep.ratios)},
                {"min_ratio", exact(rep.min_ratio)},
                {"max_ratio", exact(rep.max_ratio)},
                {"constant", rep.min_ratio == rep.max_ratio}};
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hypbound: boundary extensions of hyperbolic groups, finite certificates", "hypbound"};
  app.require_subcommand(1);
  Options o;

  auto threads = [&](CLI::App* s) {
    s->add_option("--threads", o.threads, "worker threads (0: HYPBOUND_THREADS, else 1)");
  };
  auto json = [&](CLI::App* s) { s->add_option("--json", o.json, "write the JSON report here instead of stdout"); };
  auto presentation = [&](CLI::App* s) {
    s->add_option("--file", o.file, "presentation file");
    s->add_option("--n", o.n, "free group rank (when no --file)");
  };
  auto measure = [&](CLI::App* s) { s->add_option("--measure", o.measure, "measure JSON (default: uniform)"); };

  std::map<std::string, std::function<Outcome(const Options&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, std::function<Outcome(const Options&)> h) {
    handlers[name] = std::move(h);
    auto* s = app.add_subcommand(name, help);
    json(s);
    return s;
  };

  auto* hyp = sub("check-hyp", "minimal four-point delta on a Cayley ball", cmd_check_hyp);
  presentation(hyp);
  hyp->add_option("--radius", o.radius, "ball radius")->required();
  hyp->add_option("--basepoint", o.basepoint, "basepoint word");
  hyp->add_option("--max-delta", o.max_delta, "fail (exit 2) when delta exceeds this");
  threads(hyp);

  auto* c16 = sub("check-c16", "C'(1/6) small cancellation check", cmd_check_c16);
  presentation(c16);

  auto* growth = sub("growth", "ball growth counts and entropy", cmd_growth);
  presentation(growth);
  growth->add_option("--radius", o.radius, "ball radius")->required();

  auto* dev = sub("deviation", "exact deviation table", cmd_deviation);
  dev->add_option("--n", o.n, "free group rank")->required();
  dev->add_option("--phi", o.phi, "step function JSON")->required();
  measure(dev);
  dev->add_option("--radius", o.radius, "word length bound")->required();
  dev->add_option("--out", o.out, "deviation CSV path");
  dev->add_option("--cell-cap", o.cell_cap, "largest admissible cell count");
  threads(dev);

  auto* lp = sub("lp", "l^p summability certificates from a deviation table", cmd_lp);
  lp->add_option("--table", o.table, "deviation CSV")->required();
  lp->add_option("--p", o.ps, "exponent(s)")->required()->delimiter(',');
  lp->add_option("--n", o.n, "rank (default: inferred from the words)");
  lp->add_option("--expect", o.expect, "converges | diverges; exit 2 on a different verdict");

  auto* kc = sub("kcycle", "singular values of [lambda(phi), P]", cmd_kcycle);
  kc->add_option("--n", o.n, "free group rank")->required();
  kc->add_option("--phi", o.phi, "step function JSON")->required();
  measure(kc);
  kc->add_option("--radius", o.radius, "ball radius")->required();
  kc->add_option("--depth", o.depth, "cylinder depth of the truncation")->required();
  kc->add_option("--p", o.ps, "Schatten exponent (default 2.5)");
  kc->add_option("--csv", o.csv, "singular value CSV path");
  kc->add_option("--dim-cap", o.dim_cap, "largest dense block for the SVD");
  threads(kc);

  auto* tw = sub("twisted", "twisted commutator [s(a), s^op(b)]", cmd_twisted);
  tw->add_option("--a", o.a, "element JSON")->required();
  tw->add_option("--b", o.b, "element JSON")->required();
  measure(tw);
  o.radius = 0;
  tw->add_option("--radius", o.radius, "ball radius (default 4)");
  tw->add_option("--p", o.ps, "Schatten exponent (default 2.5)");
  tw->add_option("--csv", o.csv, "singular value CSV path");
  tw->add_option("--max-change", o.max_change, "fail (exit 2) when the relative change reaches this");

  auto* idx = sub("index", "index of the compression s(a) across radii", cmd_index);
  idx->add_option("--a", o.a, "element JSON")->required();
  idx->add_option("--radii", o.radii, "radii, comma separated")->required()->delimiter(',');
  measure(idx);
  idx->add_option("--tol-ker", o.tol_ker, "kernel threshold");
  idx->add_option("--tol-gap", o.tol_gap, "spectral gap threshold");
  idx->add_flag("--require-stable", o.require_stable, "exit 2 when the estimate is unstable");

  auto* in = sub("integrals", "Monte-Carlo boundary integrals on sphere proxies", cmd_integrals);
  presentation(in);
  in->add_option("--radius", o.radius, "ball radius")->required();
  in->add_option("--epsilon", o.epsilon, "visual parameter (default 1/(5 delta), free: ln(2n-1)/2)");
  in->add_option("--samples", o.samples, "samples per estimate");
  in->add_option("--seed", o.seed, "64-bit seed");
  in->add_option("--words", o.words, "translates g for double integrals")->delimiter(',');
  in->add_option("--pairs", o.pairs, "g:h pairs for single integrals")->delimiter(',');
  in->add_option("--ray", o.ray, "geodesic word for the convergence scan");
  in->add_flag("--snowflake", o.snowflake, "compare verdicts at eps/2 and eps");
  threads(in);

  auto* ext = sub("extension-limit", "E phi(g_k) along a boundary ray", cmd_extension_limit);
  ext->add_option("--n", o.n, "free group rank")->required();
  ext->add_option("--phi", o.phi, "step function JSON")->required();
  measure(ext);
  ext->add_option("--xi", o.xi, "prefix of the boundary point")->required();
  ext->add_option("--radius", o.radius, "largest k")->required();

  auto* ahl = sub("ahlfors", "mu(B_r) / r^D over cylinder balls", cmd_ahlfors);
  ahl->add_option("--n", o.n, "free group rank")->required();
  ahl->add_option("--epsilon", o.epsilon, "visual parameter (default ln(2n-1))");
  measure(ahl);
  ahl->add_option("--depth", o.depth, "largest ball depth")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (auto* s : app.get_subcommands()) target = s;
    out << target->help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    CLI::App* target = &app;
    for (auto* s : app.get_subcommands()) target = s;
    err << target->help();
    return kError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  if (name == "twisted" && o.radius == 0) o.radius = 4;
  try {
    const auto start = std::chrono::steady_clock::now();
    Outcome res = handlers.at(name)(o);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json report{{"command", name},
                {"config", res.config},
                {"result", res.result},
                {"status", res.certificate_ok ? "ok" : "certificate-failure"},
                {"meta", {{"wall_seconds", float64(seconds)}}}};
    if (o.json.empty()) {
      out << report.dump(2) << '\n';
    } else {
      save_json(o.json, report);
    }
    return res.certificate_ok ? kOk : kCertificateFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

}  // namespace hypbound::cli
