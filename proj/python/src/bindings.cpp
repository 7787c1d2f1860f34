#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "latticelab/cli.hpp"
#include "latticelab/counterexamples.hpp"
#include "latticelab/witnesses.hpp"

namespace py = pybind11;
using namespace latticelab;

namespace {

// Points as rows of coordinates, or a square matrix when `matrix` is set.
std::shared_ptr<const FiniteMetricSpace> make_space(const std::vector<std::vector<double>>& rows, bool matrix) {
  return std::make_shared<const FiniteMetricSpace>(matrix ? FiniteMetricSpace::from_matrix(rows)
                                                          : FiniteMetricSpace::from_coordinates(rows));
}

py::dict envelope_dict(const EnvelopeResult& e) {
  py::dict d;
  d["n"] = e.n;
  d["g_n"] = e.g_n.values();
  d["alpha_n"] = e.alpha_n;
  d["achieved_error"] = e.achieved_error;
  d["lipschitz_constant"] = e.lipschitz_constant;
  d["alpha_method"] = e.alpha_method;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "latticelab core bindings";
  m.attr("__version__") = LATTICELAB_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);
  py::register_exception<LimitInLp>(m, "LimitInLp", PyExc_RuntimeError);
  py::register_exception<HorizonExhausted>(m, "HorizonExhausted", PyExc_RuntimeError);

  m.def("discreteness_constant",
        [](const std::vector<std::vector<double>>& rows, bool matrix) { return discreteness_constant(*make_space(rows, matrix)); },
        py::arg("points"), py::arg("matrix") = false, "Minimum isolation radius of a finite metric space.");

  m.def("isolation_radii",
        [](const std::vector<std::vector<double>>& rows, bool matrix) { return isolation_profile(*make_space(rows, matrix)).radius; },
        py::arg("points"), py::arg("matrix") = false);

  m.def("inf_convolution",
        [](const std::vector<std::vector<double>>& rows, const std::vector<double>& g, std::size_t n, bool matrix) {
          const auto sp = make_space(rows, matrix);
          return envelope_dict(inf_convolution(LatticeElement(Carrier::metric(sp), g), n));
        },
        py::arg("points"), py::arg("g"), py::arg("n"), py::arg("matrix") = false,
        "g_n(x) = min_y g(y) + n d(x, y) with its error and Lipschitz constant.");

  m.def("hat_check",
        [](std::uint64_t N, std::uint64_t horizon) {
          const auto lvl = build_refinement(RefinementKind::CaseA, N);
          CheckOptions o;
          o.horizon = horizon;
          const auto v = check_buo_cauchy(hat_family(lvl, horizon), BuoCauchyPolicy::certificate(), o);
          const auto lim = pointwise_limit(hat_family(lvl, 10000));
          py::dict d;
          d["outcome"] = to_string(v.outcome);
          d["certificate"] = v.monotone_certificate ? "monotone" : v.uniform_certificate ? "uniform" : "none";
          d["limit"] = lim.limit ? py::cast(lim.limit->values()) : py::none();
          d["x0"] = lvl.x0;
          return d;
        },
        py::arg("N") = 100, py::arg("horizon") = 50);

  m.def("lip_counterexample",
        [](const std::string& kind, std::uint64_t N, std::size_t n_max) {
          const auto c = lip_counterexample(build_refinement(parse_refinement_kind(kind), N), n_max);
          py::dict d;
          d["lipschitz_g"] = c.lipschitz_g;
          d["t"] = c.t;
          d["ratios"] = c.ratios;
          d["n_star"] = c.n_star;
          d["escape_scale"] = c.level.escape_scale;
          d["delta"] = c.level.delta;
          d["model"] = c.model;
          return d;
        },
        py::arg("kind") = "caseA", py::arg("N") = 100, py::arg("n_max") = 20);

  m.def("jump_witness",
        [](double height, std::size_t prefix, std::uint64_t horizon, double eps, std::size_t count) {
          const auto fam = step_family(height, prefix, horizon);
          CheckOptions o;
          o.horizon = horizon;
          const auto w = extract_big_jump_witness(fam, {}, eps, count, {}, o);
          py::dict d;
          d["indices"] = w.indices;
          d["coordinates"] = w.coordinates;
          d["jumps"] = w.jump_values;
          d["verified"] = verify_jump_witness(fam, w).ok;
          return d;
        },
        py::arg("height") = 4.0, py::arg("prefix") = 64, py::arg("horizon") = 200, py::arg("eps") = 1.0,
        py::arg("count") = 20, "Big-jump witness on the step family x_n(k) = height for k <= n.");

  m.def("block_witness",
        [](double exponent, double p, std::size_t count, std::uint64_t horizon) {
          const auto fam = harmonic_truncation(exponent, 16, horizon);
          CheckOptions o;
          o.horizon = horizon;
          const auto w = extract_lp_block_witness(fam, p, count, {}, o);
          py::dict d;
          d["blocks"] = w.blocks;
          d["block_norms"] = w.block_norms;
          d["limit_norms"] = w.limit_norms;
          d["verified"] = verify_block_witness(fam, w).ok;
          return d;
        },
        py::arg("exponent") = 1.0, py::arg("p") = 1.0, py::arg("count") = 5, py::arg("horizon") = 1000000000000ULL,
        "Disjoint l_p block witness on the truncations of j^-exponent.");

  m.def("buo_equals_order",
        [](const std::vector<std::vector<double>>& members, const std::vector<double>& limit, double tolerance) {
          if (members.empty()) throw InputError("buo_equals_order: empty family");
          const Carrier c = Carrier::index_set(limit.size());
          std::vector<LatticeElement> xs;
          for (const auto& v : members) {
            if (v.size() != limit.size()) throw InputError("buo_equals_order: member size differs from the limit");
            xs.emplace_back(c, v);
          }
          CheckOptions o;
          o.tolerance = tolerance;
          const auto eq = buo_equals_order(SequenceFamily::extensional(std::move(xs)), LatticeElement(c, limit), o);
          return py::make_tuple(eq.equal, to_string(eq.order.outcome), to_string(eq.buo.outcome));
        },
        py::arg("members"), py::arg("limit"), py::arg("tolerance") = 1e-9);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = cli::run(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line front end in-process: (exit code, stdout, stderr).");
}
