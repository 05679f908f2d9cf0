#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bfbf/acceptance.hpp"
#include "bfbf/capacity.hpp"
#include "bfbf/core_model.hpp"
#include "bfbf/errors.hpp"
#include "bfbf/experiments.hpp"
#include "bfbf/scheme.hpp"
#include "bfbf/spectral.hpp"

namespace py = pybind11;
using namespace bfbf;

namespace
{

NetworkConfig make_config(std::size_t n, std::uint64_t seed, std::optional<double> power, std::optional<double> gamma)
{
    if (power && gamma)
        throw invalid_config("give either power or gamma, not both");
    if (gamma)
        return NetworkConfig::with_gamma(n, *gamma, seed);
    return NetworkConfig::with_power(n, power.value_or(1.0 / static_cast<double>(n)), seed);
}

py::array_t<double> to_array(const NodePlacement &p)
{
    py::array_t<double> a({static_cast<py::ssize_t>(p.size()), py::ssize_t{2}});
    auto m = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        m(i, 0) = p.positions[i].x;
        m(i, 1) = p.positions[i].y;
    }
    return a;
}

NodePlacement from_array(const py::array_t<double, py::array::c_style | py::array::forcecast> &a)
{
    if (a.ndim() != 2 || a.shape(1) != 2)
        throw std::invalid_argument("points must have shape (n, 2)");
    auto r = a.unchecked<2>();
    std::vector<Point> pts(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        pts[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1)};
    return placement_from_points(std::move(pts));
}

py::dict trace_dict(const RecursionTrace &t)
{
    py::dict d;
    d["exponent_sequence"] = t.exponent_sequence;
    d["chosen_M_sequence"] = t.chosen_M_sequence;
    d["levels_used"] = t.levels_used;
    d["window_blocks"] = t.window_blocks;
    d["measured_blocks"] = t.measured_blocks;
    d["final_bound"] = t.final_bound;
    return d;
}

} // namespace

PYBIND11_MODULE(_bfbf, m)
{
    m.doc() = "Spectral norms, capacity bounds and the back-and-forth beamforming scheme for line-of-sight networks";

    py::register_exception<invalid_config>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<layout_infeasible>(m, "LayoutInfeasible", PyExc_RuntimeError);
    py::register_exception<convergence_failure>(m, "ConvergenceFailure", PyExc_RuntimeError);
    py::register_exception<degenerate_placement>(m, "DegeneratePlacement", PyExc_RuntimeError);
    py::register_exception<window_violation>(m, "WindowViolation", PyExc_ValueError);

    m.def(
        "place_nodes",
        [](std::size_t n, std::uint64_t seed) {
            return to_array(place_nodes(NetworkConfig::with_power(n, 1.0, seed)));
        },
        py::arg("n"), py::arg("seed") = 0, "Uniform node positions in the sqrt(n) x sqrt(n) square, shape (n, 2).");

    m.def("los_gain", &los_gain, py::arg("r"));

    m.def(
        "channel_matrix", [](const py::array_t<double> &pts) { return build_channel_matrix(from_array(pts)).entries; },
        py::arg("points"));

    m.def(
        "spectral_norm",
        [](const Eigen::MatrixXcd &a, double tol) {
            const auto r = spectral_norm(a, tol);
            return py::make_tuple(r.value, r.iterations);
        },
        py::arg("matrix"), py::arg("tol") = 1e-8, "Power-iteration estimate of ||A||; returns (value, iterations).");

    m.def("exact_norm", &exact_norm, py::arg("matrix"));

    m.def(
        "gershgorin_m1", [](const py::array_t<double> &pts) { return gershgorin_m1_bound(from_array(pts)); },
        py::arg("points"));

    m.def(
        "block_gershgorin",
        [](const py::array_t<double> &pts, std::size_t blocks_per_side) {
            const auto p = from_array(pts);
            const auto part = BlockPartition::from_layout(partition_grid(p, p.side() / static_cast<double>(blocks_per_side)));
            return block_gershgorin_bound(build_channel_matrix(p), part);
        },
        py::arg("points"), py::arg("blocks_per_side") = 4);

    m.def(
        "recursive_norm_bound",
        [](const py::array_t<double> &pts, std::size_t depth, double epsilon, double area_scale) {
            RecursionOptions o;
            o.depth = depth;
            o.epsilon = epsilon;
            o.area_scale = area_scale;
            const auto [v, t] = recursive_norm_bound(from_array(pts), o);
            return py::make_tuple(v, trace_dict(t));
        },
        py::arg("points"), py::arg("depth") = 8, py::arg("epsilon") = 0.05, py::arg("area_scale") = 1.0);

    m.def("exponent_map", &exponent_map, py::arg("b"));
    m.def("exponent_sequence", &exponent_sequence, py::arg("b0"), py::arg("count"));
    m.def("offdiag_block_bound", &offdiag_block_bound, py::arg("M"), py::arg("d"), py::arg("epsilon"), py::arg("c"));

    m.def(
        "trace_moment", [](const Eigen::MatrixXcd &f, std::size_t ell) {
            const auto r = trace_moment(f, ell);
            return py::make_tuple(r.trace_value, r.root_value);
        },
        py::arg("matrix"), py::arg("ell"));

    m.def("delta_plus", &delta_plus, py::arg("delta"));
    m.def("occupancy_bound", &occupancy_bound, py::arg("n"), py::arg("cluster_area"), py::arg("delta"));

    m.def("capacity_upper_bound", py::overload_cast<double, double>(&capacity_upper_bound), py::arg("P"),
          py::arg("norm"));
    m.def(
        "tdma_baseline_rate",
        [](const py::array_t<double> &pts, double P) {
            const auto p = from_array(pts);
            return tdma_baseline_rate(NetworkConfig::with_power(p.size(), P, 0), p);
        },
        py::arg("points"), py::arg("P"));
    m.def("theorem1_predicted_rate", &theorem1_predicted_rate, py::arg("n"), py::arg("P"), py::arg("epsilon"));

    m.def(
        "pair_layout",
        [](std::size_t n, std::uint64_t seed, double c1, double c2, double epsilon) {
            SchemeParams sp;
            sp.c1 = c1;
            sp.c2 = c2;
            sp.epsilon = epsilon;
            const auto cfg = NetworkConfig::with_power(n, 1.0 / static_cast<double>(n), seed);
            const auto L = build_pair_layout(cfg, sp, place_nodes(cfg));
            py::dict d;
            d["width"] = L.width;
            d["length"] = L.length;
            d["d"] = L.d;
            d["vertical_gap"] = L.vertical_gap;
            d["M"] = L.M;
            d["pair_count"] = L.pair_count;
            d["rounds_to_serve_all"] = L.rounds_to_serve_all;
            d["tx"] = L.tx;
            d["rx"] = L.rx;
            return d;
        },
        py::arg("n"), py::arg("seed") = 0, py::arg("c1") = 2.0, py::arg("c2") = 1.0, py::arg("epsilon") = 0.05);

    m.def(
        "measure_scheme_rate",
        [](std::size_t n, std::uint64_t seed, std::optional<double> power, std::optional<double> gamma,
           std::size_t sources, std::size_t noise_realizations, std::size_t t) {
            SchemeParams sp;
            sp.sources = sources;
            sp.noise_realizations = noise_realizations;
            sp.t = t;
            const auto cfg = make_config(n, seed, power, gamma);
            const auto r = measure_scheme_rate(cfg, sp, place_nodes(cfg));
            py::dict d;
            d["n"] = r.report.n;
            d["P"] = r.report.P;
            d["scheme_rate"] = r.report.scheme_rate;
            d["scheme_rate_optimistic"] = r.report.scheme_rate_optimistic;
            d["tdma_rate"] = r.report.tdma_rate;
            d["upper_bound"] = r.report.upper_bound;
            d["upper_bound_is_floor"] = r.norm_is_lower_bound;
            d["t"] = r.schedule.t;
            d["tau"] = r.schedule.tau;
            d["amplification"] = r.schedule.amplification;
            d["min_sinr"] = r.min_sinr;
            d["decodable_fraction"] = r.decodable_fraction;
            d["max_noise_power"] = r.max_noise_power;
            d["average_power"] = r.average_power;
            return d;
        },
        py::arg("n"), py::arg("seed") = 0, py::arg("power") = py::none(), py::arg("gamma") = py::none(),
        py::arg("sources") = 8, py::arg("noise_realizations") = 32, py::arg("t") = 0);

    m.def(
        "fit_loglog",
        [](const std::vector<double> &x, const std::vector<double> &y) {
            const auto f = fit_loglog(x, y);
            return py::make_tuple(f.slope, f.intercept, f.stderr_slope);
        },
        py::arg("x"), py::arg("y"), "Least-squares slope of log y on log x; returns (slope, intercept, stderr).");

    m.def(
        "run_sweep",
        [](const std::string &config_json) {
            const auto rep = run_sweep(SweepConfig::from_json(nlohmann::json::parse(config_json)));
            py::dict fits;
            for (const auto &[k, f] : rep.fits)
                fits[py::str(k)] = py::make_tuple(f.slope, f.intercept, f.stderr_slope);
            py::dict d;
            d["rows"] = rep.rows.size();
            d["fits"] = fits;
            d["passed"] = rep.all_passed();
            return d;
        },
        py::arg("config_json"), "Runs a sweep from a JSON string; writes into its output_dir.");

    m.def("criterion_ids", &criterion_ids);
    m.def(
        "run_criterion",
        [](const std::string &id, std::size_t seeds) {
            AcceptanceOptions o;
            o.seeds = seeds;
            CriterionResult r;
            {
                py::gil_scoped_release release;
                r = run_criterion(id, o);
            }
            py::dict d;
            d["id"] = r.id;
            d["passed"] = r.passed;
            d["assertions"] = r.assertions;
            d["diagnostics"] = r.diagnostics;
            d["line"] = r.line();
            return d;
        },
        py::arg("id"), py::arg("seeds") = 0);
}
