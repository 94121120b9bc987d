#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tcfou/caputo.hpp"
#include "tcfou/cli.hpp"
#include "tcfou/errors.hpp"
#include "tcfou/fou_stats.hpp"
#include "tcfou/fpe.hpp"
#include "tcfou/simulate.hpp"
#include "tcfou/stable_kernels.hpp"
#include "tcfou/subordination.hpp"

namespace py = pybind11;
using namespace tcfou;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw ContractError("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Tail make_tail(const std::string& kind, std::optional<double> level, double tolerance, double exponent,
               const std::vector<double>& values) {
    if (kind == "constant") return Tail::constant(level.value_or(values.back()), tolerance);
    if (kind == "power") return Tail::power(exponent);
    if (kind == "forbidden") return Tail::forbidden();
    throw ContractError("tail must be 'constant', 'power' or 'forbidden'");
}

TimeGridFunction make_function(const Array& grid, const Array& values, const std::string& tail,
                               std::optional<double> level, double tolerance, double exponent,
                               std::optional<Array> derivative) {
    auto g = to_vector(grid);
    auto v = to_vector(values);
    const auto t = make_tail(tail, level, tolerance, exponent, v);
    return {std::move(g), std::move(v), t, derivative ? to_vector(*derivative) : std::vector<double>{}};
}

py::dict ensemble_dict(const PathEnsemble& e) {
    py::dict d;
    d["t"] = to_array(e.time_grid);
    d["paths"] = to_matrix(e.values, e.n_paths, e.n_times());
    d["process"] = to_string(e.tag);
    d["seed"] = e.seed;
    d["cholesky_fallback"] = e.cholesky_fallback;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tcfou, m) {
    m.doc() = "Time-changed fractional Ornstein-Uhlenbeck processes";

    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<BernsteinSpec>(m, "BernsteinSpec")
        .def_static("stable", &BernsteinSpec::stable, py::arg("alpha"))
        .def_static("tempered", &BernsteinSpec::tempered, py::arg("alpha"), py::arg("mu"))
        .def_static("parse", [](const std::string& s) { return BernsteinSpec::parse(s); })
        .def_property_readonly("alpha", &BernsteinSpec::alpha)
        .def_property_readonly("mu", &BernsteinSpec::mu)
        .def_property_readonly("is_stable", &BernsteinSpec::is_stable)
        .def("token", &BernsteinSpec::token)
        .def("__repr__", [](const BernsteinSpec& s) { return "BernsteinSpec('" + s.token() + "')"; })
        .def(py::self == py::self);

    auto spec_of = [](const py::object& o) {
        if (py::isinstance<py::str>(o)) return BernsteinSpec::parse(o.cast<std::string>());
        return o.cast<BernsteinSpec>();
    };

    m.def("phi", [=](const py::object& spec, double lam) { return phi_eval(spec_of(spec), lam); });
    m.def("levy_tail", [=](const py::object& spec, double t) { return levy_tail(spec_of(spec), t); });
    m.def("phi_inverse", [=](const py::object& spec, double eta) { return phi_inverse_real(spec_of(spec), eta); });

    m.def("stable_density", py::vectorize(stable_density_g), py::arg("alpha"), py::arg("x"));
    m.def("stable_cdf", py::vectorize(stable_cdf), py::arg("alpha"), py::arg("x"));
    m.def("inverse_stable_density", py::vectorize(inverse_stable_density_f), py::arg("alpha"), py::arg("s"),
          py::arg("t"));
    m.def("laplace_identity_residual", [=](const py::object& spec, double s, double lam) {
        return laplace_identity_residual(spec_of(spec), s, lam, {});
    });

    m.def("variance", py::vectorize(variance_v2), py::arg("hurst"), py::arg("theta"), py::arg("t"));
    m.def("variance_prime", py::vectorize(variance_v2_prime), py::arg("hurst"), py::arg("theta"), py::arg("t"));
    m.def("stationary_variance", [](double h, double th) { return VarianceEvaluator(h, th).stationary_variance(); });
    m.def("gaussian_density", py::vectorize(gaussian_density_pH), py::arg("hurst"), py::arg("theta"), py::arg("x"),
          py::arg("t"));
    m.def(
        "moment",
        [=](int n, double h, double th, const py::object& spec, double t) {
            return moments_subordinated(n, h, th, spec_of(spec), t);
        },
        py::arg("n"), py::arg("hurst"), py::arg("theta"), py::arg("phi"), py::arg("t"));
    m.def("moment_limit", &moments_subordinated_limit, py::arg("n"), py::arg("hurst"), py::arg("theta"));

    m.def("uniform_grid", [](double t_max, std::size_t n) { return to_array(uniform_grid(t_max, n)); });
    m.def(
        "sample_fbm",
        [](double h, const Array& grid, std::size_t n, std::uint64_t seed) {
            const auto g = to_vector(grid);
            py::gil_scoped_release release;
            auto e = sample_fbm(h, g, n, seed);
            py::gil_scoped_acquire acquire;
            return ensemble_dict(e);
        },
        py::arg("hurst"), py::arg("grid"), py::arg("n_paths"), py::arg("seed"));
    m.def(
        "sample_fou",
        [](double h, double th, const Array& grid, std::size_t n, std::uint64_t seed) {
            const auto g = to_vector(grid);
            py::gil_scoped_release release;
            auto e = sample_fou(h, th, g, n, seed);
            py::gil_scoped_acquire acquire;
            return ensemble_dict(e);
        },
        py::arg("hurst"), py::arg("theta"), py::arg("grid"), py::arg("n_paths"), py::arg("seed"));
    m.def(
        "sample_inverse_subordinator",
        [=](const py::object& spec, const Array& grid, std::size_t n, std::uint64_t seed, double y_step) {
            const auto s = spec_of(spec);
            const auto g = to_vector(grid);
            py::gil_scoped_release release;
            auto e = sample_inverse_subordinator(s, g, n, seed, y_step);
            py::gil_scoped_acquire acquire;
            return ensemble_dict(e);
        },
        py::arg("phi"), py::arg("grid"), py::arg("n_paths"), py::arg("seed"), py::arg("y_step") = 1e-3);
    m.def(
        "sample_tcfou",
        [=](double h, double th, const py::object& spec, const Array& grid, std::size_t n, std::uint64_t seed,
            double y_step, double aux_step) {
            const auto s = spec_of(spec);
            const auto g = to_vector(grid);
            py::gil_scoped_release release;
            auto e = sample_tcfou(h, th, s, g, n, seed, {y_step, aux_step, nullptr});
            py::gil_scoped_acquire acquire;
            return ensemble_dict(e);
        },
        py::arg("hurst"), py::arg("theta"), py::arg("phi"), py::arg("grid"), py::arg("n_paths"), py::arg("seed"),
        py::arg("y_step") = 1e-3, py::arg("aux_step") = 2e-3);

    m.def(
        "subordinate",
        [=](const Array& grid, const Array& values, const py::object& spec, const Array& times, const std::string& tail,
            std::optional<double> level, double tolerance, double exponent) {
            const auto v = make_function(grid, values, tail, level, tolerance, exponent, std::nullopt);
            const auto s = spec_of(spec);
            std::vector<double> out;
            for (double t : to_vector(times)) out.push_back(subordinate(v, s, t));
            return to_array(out);
        },
        py::arg("grid"), py::arg("values"), py::arg("phi"), py::arg("times"), py::arg("tail") = "constant",
        py::arg("level") = py::none(), py::arg("tolerance") = 1e-8, py::arg("exponent") = 0.0);
    m.def(
        "caputo",
        [=](const Array& grid, const Array& values, const Array& derivative, const py::object& spec, const Array& times,
            const std::string& tail, std::optional<double> level) {
            const auto u = make_function(grid, values, tail, level, 1e-8, 0.0, derivative);
            const auto s = spec_of(spec);
            std::vector<double> out;
            for (double t : to_vector(times)) out.push_back(caputo_phi_derivative(u, s, t));
            return to_array(out);
        },
        py::arg("grid"), py::arg("values"), py::arg("derivative"), py::arg("phi"), py::arg("times"),
        py::arg("tail") = "forbidden", py::arg("level") = py::none());

    m.def(
        "solve_fp",
        [](double h, double th, const std::function<double(double)>& init, const Array& x, const Array& t) {
            const auto f = solve_fp(h, th, init, BoundaryCondition::decay(), to_vector(x), to_vector(t));
            return to_matrix(f.values(), f.n_t(), f.n_x());
        },
        py::arg("hurst"), py::arg("theta"), py::arg("init"), py::arg("x"), py::arg("t"),
        "Crank-Nicolson solution on decaying boundaries; returns an (n_t, n_x) array.");
    m.def("gaussian_fp_oracle", py::vectorize(gaussian_fp_oracle), py::arg("v0"), py::arg("hurst"), py::arg("theta"),
          py::arg("x"), py::arg("t"));
    m.def(
        "genfp_residual",
        [=](double h, double th, const py::object& spec, const Array& x, const Array& t, int level) {
            const auto xs = to_vector(x), ts = to_vector(t);
            if (xs.size() != ts.size()) throw ContractError("x and t must have the same length");
            std::vector<ProbePoint> probes;
            for (std::size_t i = 0; i < xs.size(); ++i) probes.push_back({xs[i], ts[i]});
            const auto s = spec_of(spec);
            std::vector<double> out;
            for (const auto& r : generalized_fp_residual(pH_model(h, th), s, h, th, probes, GenFpOptions{}.refined(level)))
                out.push_back(r.residual);
            return to_array(out);
        },
        py::arg("hurst"), py::arg("theta"), py::arg("phi"), py::arg("x"), py::arg("t"), py::arg("level") = 0);
    m.def(
        "max_principle",
        [=](double h, double th, const py::object& spec, const Array& x, const Array& t) {
            const auto xs = to_vector(x), ts = to_vector(t);
            const auto f = subordinated_pH_field(h, th, spec_of(spec), xs, ts);
            const auto r = max_principle_check(f, xs.front(), xs.back(), ts.back());
            py::dict d;
            d["interior_max"] = r.interior_max;
            d["boundary_max"] = r.boundary_max;
            d["pass"] = r.pass;
            return d;
        },
        py::arg("hurst"), py::arg("theta"), py::arg("phi"), py::arg("x"), py::arg("t"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            const auto config = cli::parse_config(args);
            const int code = cli::run(config, out);
            return py::make_tuple(code, out.str());
        },
        py::arg("args"), "Runs a tcfou command in-process; returns (exit_code, stdout_text).");
}
