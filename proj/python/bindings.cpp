#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hypbound/approx_boundary.hpp"
#include "hypbound/cayley_ball.hpp"
#include "hypbound/cli.hpp"
#include "hypbound/deviation.hpp"
#include "hypbound/error.hpp"
#include "hypbound/io.hpp"
#include "hypbound/operators.hpp"
#include "hypbound/presentation.hpp"

namespace py = pybind11;
using namespace hypbound;

namespace {

GroupPresentation presentation(const std::string& text, std::size_t n) {
  if (!text.empty()) return parse_presentation(text);
  return GroupPresentation::free_group(n);
}

CylinderMeasure measure(const std::string& json, std::size_t n) {
  return json.empty() ? ps_measure(n, 1) : measure_from_json(Json::parse(json), n);
}

py::dict sv_dict(const SingularValueReport& r, double p) {
  py::dict d;
  d["values"] = r.values;
  d["norm"] = r.norm();
  d["schatten_sum"] = r.schatten_sum(p);
  d["fitted_exponent"] = r.fitted_exponent;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact and sampled certificates for boundary extensions of hyperbolic groups.";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RadiusInsufficient>(m, "RadiusInsufficient", PyExc_ValueError);
  py::register_exception<RefinementError>(m, "RefinementError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);

  m.def(
      "growth",
      [](std::size_t radius, const std::string& presentation_text, std::size_t n) {
        return growth_counts(CayleyBall(presentation(presentation_text, n), radius));
      },
      py::arg("radius"), py::arg("presentation") = "", py::arg("n") = 2);

  m.def(
      "check_c16",
      [](const std::string& presentation_text) {
        const auto r = check_small_cancellation(parse_presentation(presentation_text));
        py::dict d;
        d["passes_c16"] = r.passes_c16;
        d["max_piece_len"] = r.max_piece_len;
        d["delta_bound"] = r.delta_bound;
        d["kappa"] = r.kappa;
        d["euler_char"] = r.euler_char;
        return d;
      },
      py::arg("presentation"));

  m.def(
      "hyperbolicity_delta",
      [](std::size_t radius, const std::string& presentation_text, std::size_t n, unsigned threads) {
        const CayleyBall ball(presentation(presentation_text, n), radius);
        return to_string(check_hyperbolicity(ball, Word{}, threads).delta);
      },
      py::arg("radius"), py::arg("presentation") = "", py::arg("n") = 2, py::arg("threads") = 1);

  m.def(
      "deviation_table",
      [](const std::string& phi, std::size_t radius, const std::string& mu, unsigned threads) {
        const auto f = step_function_from_json(Json::parse(phi));
        DeviationTableOptions opts;
        opts.threads = threads;
        const auto table = deviation_table(f, measure(mu, f.rank()), radius, opts);
        std::ostringstream out;
        write_deviation_csv(out, table);
        return out.str();
      },
      py::arg("phi"), py::arg("radius"), py::arg("measure") = "", py::arg("threads") = 1,
      "Deviation table as CSV text (word,E_re,E_im,sigma_sq,sigma).");

  m.def(
      "lp_verdict",
      [](const std::string& table_csv, double p) {
        std::istringstream in(table_csv);
        const auto c = lp_certificate(read_deviation_csv(in), p);
        return py::make_tuple(to_string(c.verdict), c.ratio_bound, c.shell_sums);
      },
      py::arg("table_csv"), py::arg("p"));

  m.def(
      "kcycle_values",
      [](const std::string& phi, std::size_t radius, std::size_t depth, double p) {
        const auto f = step_function_from_json(Json::parse(phi));
        TruncationSpec t;
        t.n = f.rank();
        t.radius = radius;
        t.depth = depth;
        return sv_dict(basic_commutator(f, t).commutator_values, p);
      },
      py::arg("phi"), py::arg("radius"), py::arg("depth"), py::arg("p") = 2.5);

  m.def(
      "twisted",
      [](const std::string& a, const std::string& b, std::size_t radius, double p) {
        const auto ea = element_from_json(Json::parse(a));
        const auto eb = element_from_json(Json::parse(b));
        const auto r = twisted_commutator(ea, eb, radius, ps_measure(ea.rank(), 1), p);
        py::dict d = sv_dict(r.current.values, p);
        d["relative_change"] = r.relative_change;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("radius") = 4, py::arg("p") = 2.5);

  m.def(
      "double_integral",
      [](const std::string& g, std::size_t radius, double epsilon, std::size_t samples, std::uint64_t seed,
         const std::string& presentation_text, std::size_t n) {
        const SphereBoundaryModel model(presentation(presentation_text, n), radius, epsilon);
        const auto e = double_integral_estimate(model, parse_word(model.ball().presentation().generators(), g),
                                                samples, seed);
        return py::make_tuple(e.value, e.stderr_, e.ratio);
      },
      py::arg("g"), py::arg("radius"), py::arg("epsilon"), py::arg("samples") = 100000, py::arg("seed") = 1,
      py::arg("presentation") = "", py::arg("n") = 2);

  m.def(
      "double_integral_exact",
      [](const std::string& g, double epsilon, std::size_t n) {
        return double_integral_exact(ps_measure(n, 1), parse_word(GeneratorSet::standard(n), g), epsilon);
      },
      py::arg("g"), py::arg("epsilon"), py::arg("n") = 2);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a hypbound subcommand; returns (exit_code, stdout, stderr).");
}
