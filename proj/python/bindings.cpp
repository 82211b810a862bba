#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nlslab/effective.hpp"
#include "nlslab/experiments.hpp"
#include "nlslab/fit.hpp"
#include "nlslab/pde.hpp"
#include "nlslab/soliton.hpp"

namespace py = pybind11;
using namespace nls;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const RVec& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<cplx> to_numpy(const ComplexField& f) {
    if (f.grid.dim == 1) return py::array_t<cplx>(f.values.size(), f.values.data());
    const auto n = static_cast<py::ssize_t>(f.grid.n);
    return py::array_t<cplx>({n, n}, f.values.data());
}

ComplexField from_numpy(const CArray& a, double length) {
    if (a.ndim() != 1 && a.ndim() != 2) throw std::invalid_argument("field must be 1D or 2D");
    if (a.ndim() == 2 && a.shape(0) != a.shape(1)) throw std::invalid_argument("2D field must be square");
    ComplexField f{make_grid(a.shape(0), length, a.ndim()), {}};
    f.values.assign(a.data(), a.data() + a.size());
    return f;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

PotentialSpec potential(double eps, double a_minus, double a_plus, double steepness) {
    PotentialSpec p;
    p.epsilon = eps;
    p.a_minus = a_minus;
    p.a_plus = a_plus;
    p.steepness = steepness;
    p.direction = a_plus >= a_minus ? Direction::Increasing : Direction::Decreasing;
    return p;
}

py::dict params_dict(const SolitonParams& p) {
    py::dict d;
    d["c"] = p.c;
    d["v"] = p.v;
    d["rho"] = p.rho;
    d["gamma"] = p.gamma;
    d["amp"] = p.amp;
    return d;
}

}  // namespace

PYBIND11_MODULE(_nlslab, mod) {
    mod.attr("__version__") = kVersion;

    mod.def("grid", [](std::size_t n, double length) { return to_numpy(make_grid(n, length).coords()); },
            py::arg("n"), py::arg("length"));

    mod.def(
        "soliton_profile",
        [](double m, double c, py::array_t<double, py::array::forcecast> x) {
            auto out = py::array_t<double>(x.request().shape);
            double* o = out.mutable_data();
            const double* xi = x.data();
            for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = soliton_profile(m, c, xi[i]);
            return out;
        },
        py::arg("m"), py::arg("c"), py::arg("x"));

    mod.def(
        "scaling_exponents",
        [](double m) {
            const auto s = scaling_exponents(m);
            py::dict d;
            d["theta"] = s.theta;
            d["lambda0"] = s.lambda0;
            d["p_m"] = s.p_m;
            return d;
        },
        py::arg("m"));

    mod.def(
        "traveling_wave",
        [](double m, double c, double v, double rho, double gamma, std::size_t n, double length, double t) {
            SolitonParams p;
            p.m = m;
            p.c = c;
            p.v = v;
            p.rho = rho;
            p.gamma = gamma;
            return to_numpy(traveling_wave(p, make_grid(n, length), t));
        },
        py::arg("m"), py::arg("c"), py::arg("v"), py::arg("rho") = 0.0, py::arg("gamma") = 0.0, py::arg("n") = 2048,
        py::arg("length") = 200.0, py::arg("t") = 0.0);

    mod.def(
        "observables",
        [](const CArray& u, double length, double m, double eps, double a_minus, double a_plus, double steepness) {
            const auto o = observables(from_numpy(u, length), potential(eps, a_minus, a_plus, steepness), m);
            py::dict d;
            d["mass"] = o.mass;
            d["energy"] = o.energy;
            d["momentum"] = py::make_tuple(o.momentum[0], o.momentum[1]);
            return d;
        },
        py::arg("u"), py::arg("length"), py::arg("m"), py::arg("eps") = 0.05, py::arg("a_minus") = 1.0,
        py::arg("a_plus") = 2.0, py::arg("steepness") = 1.0);

    mod.def(
        "evolve",
        [](const CArray& u, double length, double m, double dt, double t1, double eps, double a_minus, double a_plus,
           double steepness) {
            SolverConfig cfg;
            cfg.m = m;
            cfg.dt = dt;
            cfg.t1 = t1;
            cfg.pot = potential(eps, a_minus, a_plus, steepness);
            cfg.observer_stride = std::max<std::size_t>(1, static_cast<std::size_t>(t1 / dt / 10.0));
            EvolveResult r;
            {
                py::gil_scoped_release release;
                r = evolve(from_numpy(u, length), cfg);
            }
            if (r.aborted) throw std::runtime_error("evolution aborted: " + r.reason);
            return to_numpy(r.field);
        },
        py::arg("u"), py::arg("length"), py::arg("m"), py::arg("dt"), py::arg("t1"), py::arg("eps") = 0.05,
        py::arg("a_minus") = 1.0, py::arg("a_plus") = 2.0, py::arg("steepness") = 1.0);

    mod.def(
        "fit",
        [](const CArray& u, double length, double m, double c, double v, double rho, double gamma, double eps,
           double a_minus, double a_plus, double steepness) {
            SolitonParams g;
            g.m = m;
            g.c = c;
            g.v = v;
            g.rho = rho;
            g.gamma = gamma;
            const auto f = fit_modulation(from_numpy(u, length), g, potential(eps, a_minus, a_plus, steepness));
            py::dict d = params_dict(f.params);
            d["residual"] = f.residual;
            d["iterations"] = f.iterations;
            return d;
        },
        py::arg("u"), py::arg("length"), py::arg("m"), py::arg("c"), py::arg("v"), py::arg("rho"),
        py::arg("gamma") = 0.0, py::arg("eps") = 0.05, py::arg("a_minus") = 1.0, py::arg("a_plus") = 2.0,
        py::arg("steepness") = 1.0);

    mod.def(
        "predict",
        [](double m, double v0, double eps, double a_minus, double a_plus, double steepness) {
            const auto p = predict_outcome(m, v0, potential(eps, a_minus, a_plus, steepness));
            py::dict d;
            d["kind"] = to_string(p.kind);
            d["c_inf"] = p.c_inf;
            d["v_inf"] = p.v_inf;
            d["lambda_inf"] = p.lambda_inf;
            d["c0"] = p.c0;
            d["threshold"] = p.threshold;
            return d;
        },
        py::arg("m"), py::arg("v0"), py::arg("eps") = 0.05, py::arg("a_minus") = 1.0, py::arg("a_plus") = 2.0,
        py::arg("steepness") = 1.0);

    mod.def(
        "check_identities", [](double m, double c) { return json_to_py(to_json(check_identities(m, c))); },
        py::arg("m"), py::arg("c") = 4.0);
    mod.def(
        "operator_suite",
        [](double m, double c, double v) {
            OperatorSuiteReport r;
            {
                py::gil_scoped_release release;
                r = operator_suite(m, c, v);
            }
            return json_to_py(to_json(r));
        },
        py::arg("m"), py::arg("c") = 1.0, py::arg("v") = 1.0);

    mod.def("load_scenario", [](const std::filesystem::path& p) { return json_to_py(to_json(load_scenario(p))); },
            py::arg("path"));
    mod.def(
        "run_scenario",
        [](const std::filesystem::path& config, const std::filesystem::path& output_dir) {
            Scenario s = load_scenario(config);
            s.output_dir = output_dir;
            ScenarioResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(s);
            }
            py::dict d;
            d["pass"] = r.pass;
            d["failures"] = r.failures;
            d["comparison"] = json_to_py(r.comparison);
            d["output_dir"] = r.output_dir.string();
            return d;
        },
        py::arg("config"), py::arg("output_dir"));
}
