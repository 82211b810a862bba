#include "nlslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <toml.hpp>

#include "nlslab/fit.hpp"
#include "nlslab/profiles.hpp"

#ifndef NLSLAB_VERSION
#define NLSLAB_VERSION "0.0.0"
#endif

namespace nls {

const char* const kVersion = NLSLAB_VERSION;

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::pair<ScenarioKind, const char*> kKindNames[] = {
    {ScenarioKind::FreeSoliton, "free_soliton"},
    {ScenarioKind::Interaction1D, "interaction_1d"},
    {ScenarioKind::Reflection1D, "reflection_1d"},
    {ScenarioKind::Interaction2D, "interaction_2d"},
    {ScenarioKind::Refraction2D, "refraction_2d"},
    {ScenarioKind::IdentitySuite, "identity_suite"},
    {ScenarioKind::OperatorSuite, "operator_suite"},
    {ScenarioKind::ResidualScaling, "residual_scaling"},
    {ScenarioKind::ConvergenceStudy, "convergence_study"},
};

bool is_1d_run(ScenarioKind k) {
    return k == ScenarioKind::FreeSoliton || k == ScenarioKind::Interaction1D || k == ScenarioKind::Reflection1D;
}

bool is_2d_run(ScenarioKind k) { return k == ScenarioKind::Interaction2D || k == ScenarioKind::Refraction2D; }

bool is_study(ScenarioKind k) { return k == ScenarioKind::ResidualScaling || k == ScenarioKind::ConvergenceStudy; }

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// runs the tasks with at most thread_budget() in flight, results in input order
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& task) {
    std::vector<T> out(count);
    const std::size_t width = std::max<std::size_t>(1, thread_budget());
    for (std::size_t start = 0; start < count; start += width) {
        const std::size_t stop = std::min(count, start + width);
        std::vector<std::future<T>> jobs;
        for (std::size_t i = start; i < stop; ++i) jobs.push_back(std::async(std::launch::async, task, i));
        for (std::size_t i = start; i < stop; ++i) out[i] = jobs[i - start].get();
    }
    return out;
}

template <class T>
T get_or(const toml::table& t, const char* key, T fallback) {
    if (const auto* node = t.get(key)) {
        if constexpr (std::is_same_v<T, double>) {
            if (auto v = node->value<double>()) return *v;
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto v = node->value<std::string>()) return *v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (auto v = node->value<bool>()) return *v;
        } else {
            if (auto v = node->value<int64_t>()) {
                if (*v < 0) throw std::invalid_argument(std::string("config key '") + key + "' must be non-negative");
                return static_cast<T>(*v);
            }
        }
        throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
    }
    return fallback;
}

std::vector<double> get_list(const toml::table& t, const char* key) {
    std::vector<double> out;
    if (const auto* arr = t.get_as<toml::array>(key)) {
        for (const auto& el : *arr) {
            auto v = el.value<double>();
            if (!v) throw std::invalid_argument(std::string("config key '") + key + "' must be a list of numbers");
            out.push_back(*v);
        }
    } else if (t.contains(key)) {
        throw std::invalid_argument(std::string("config key '") + key + "' must be a list");
    }
    return out;
}

const toml::table& section(const toml::table& root, const char* name) {
    static const toml::table empty;
    if (const auto* node = root.get(name)) {
        if (const auto* tbl = node->as_table()) return *tbl;
        throw std::invalid_argument(std::string("config section [") + name + "] must be a table");
    }
    return empty;
}

void check_keys(const toml::table& t, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : t) {
        const std::string key(k.str());
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
            throw std::invalid_argument("unknown config key '" + key + "' in " + where);
    }
}

}  // namespace

std::string to_string(ScenarioKind k) {
    for (const auto& [kind, name] : kKindNames)
        if (kind == k) return name;
    return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kKindNames)
        if (s == name) return kind;
    throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

Scenario parse_scenario(const std::string& text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config parse error: " << e.description() << " at line " << e.source().begin.line;
        throw std::invalid_argument(msg.str());
    }
    check_keys(root, "config", {"scenario", "soliton", "potential", "grid", "time", "study", "checks", "output"});
    Scenario s;
    const auto& sc = section(root, "scenario");
    check_keys(sc, "[scenario]", {"name", "kind", "m", "output"});
    s.name = get_or<std::string>(sc, "name", s.name);
    if (!sc.contains("kind")) throw std::invalid_argument("config needs [scenario].kind");
    s.kind = scenario_kind_from_string(get_or<std::string>(sc, "kind", ""));
    s.m = get_or<double>(sc, "m", s.m);
    s.output_dir = get_or<std::string>(sc, "output", "out/" + s.name);

    const auto& so = section(root, "soliton");
    check_keys(so, "[soliton]", {"c", "v", "v2", "rho", "gamma"});
    s.c0 = get_or<double>(so, "c", s.c0);
    s.v0 = get_or<double>(so, "v", s.v0);
    s.v_transverse = get_or<double>(so, "v2", s.v_transverse);
    if (so.contains("rho")) s.rho0 = get_or<double>(so, "rho", 0.0);
    s.gamma0 = get_or<double>(so, "gamma", s.gamma0);

    const auto& po = section(root, "potential");
    check_keys(po, "[potential]", {"direction", "epsilon", "a_minus", "a_plus", "steepness"});
    s.pot.epsilon = get_or<double>(po, "epsilon", s.pot.epsilon);
    s.pot.a_minus = get_or<double>(po, "a_minus", s.pot.a_minus);
    s.pot.a_plus = get_or<double>(po, "a_plus", s.pot.a_plus);
    s.pot.steepness = get_or<double>(po, "steepness", s.pot.steepness);
    if (po.contains("direction")) {
        s.pot.direction = direction_from_string(get_or<std::string>(po, "direction", ""));
    } else {
        s.pot.direction = s.pot.a_plus < s.pot.a_minus ? Direction::Decreasing : Direction::Increasing;
    }

    const auto& gr = section(root, "grid");
    check_keys(gr, "[grid]", {"n", "length"});
    s.n = get_or<std::size_t>(gr, "n", s.n);
    s.length = get_or<double>(gr, "length", s.length);

    const auto& ti = section(root, "time");
    check_keys(ti, "[time]", {"dt", "horizon", "t0", "t1", "ode_t1", "diagnostics_stride", "fit_stride"});
    s.dt = get_or<double>(ti, "dt", s.dt);
    const std::string hz = get_or<std::string>(ti, "horizon", "auto");
    if (hz == "auto") {
        s.horizon.automatic = true;
    } else if (hz == "explicit") {
        s.horizon.automatic = false;
        if (!ti.contains("t0") || !ti.contains("t1")) throw std::invalid_argument("explicit horizon needs t0 and t1");
        s.horizon.t0 = get_or<double>(ti, "t0", 0.0);
        s.horizon.t1 = get_or<double>(ti, "t1", 0.0);
    } else {
        throw std::invalid_argument("horizon must be 'auto' or 'explicit'");
    }
    if (ti.contains("ode_t1")) s.ode_t1 = get_or<double>(ti, "ode_t1", 0.0);
    s.diagnostics_stride = get_or<std::size_t>(ti, "diagnostics_stride", s.diagnostics_stride);
    s.fit_stride = get_or<std::size_t>(ti, "fit_stride", s.fit_stride);

    const auto& st = section(root, "study");
    check_keys(st, "[study]", {"epsilons", "order", "m_values"});
    s.epsilons = get_list(st, "epsilons");
    s.ms = get_list(st, "m_values");
    if (st.contains("order")) {
        const auto* node = st.get("order");
        auto v = node->value<int64_t>();
        if (!v) throw std::invalid_argument("config key 'order' must be an integer");
        s.ansatz_order = static_cast<int>(*v);
    }

    const auto& ch = section(root, "checks");
    check_keys(ch, "[checks]", {"rel_tol", "sup_tol"});
    s.rel_tol = get_or<double>(ch, "rel_tol", s.rel_tol);
    s.sup_tol = get_or<double>(ch, "sup_tol", s.sup_tol);

    const auto& ou = section(root, "output");
    check_keys(ou, "[output]", {"snapshot"});
    s.write_snapshot = get_or<bool>(ou, "snapshot", s.write_snapshot);

    validate(s);
    return s;
}

Scenario load_scenario(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open config " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate(const Scenario& s) {
    const bool two_d = is_2d_run(s.kind);
    if (two_d) {
        if (!(s.m >= 2.0 && s.m < 3.0)) throw std::invalid_argument("2D scenarios need m in [2,3)");
    } else if (!(s.m > 1.0 && s.m < 5.0)) {
        throw std::invalid_argument("exponent m must lie in (1,5)");
    }
    if (!(s.pot.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(s.pot.a_minus > 0.0 && s.pot.a_plus > 0.0)) throw std::invalid_argument("potential limits must be positive");
    if (!(s.pot.steepness > 0.0)) throw std::invalid_argument("potential steepness must be positive");
    if (s.pot.a_minus != s.pot.a_plus) {
        const bool inc = s.pot.a_plus > s.pot.a_minus;
        if (inc != (s.pot.direction == Direction::Increasing))
            throw std::invalid_argument("potential direction disagrees with its limits");
    }
    if (!(s.c0 > 0.0)) throw std::invalid_argument("soliton scaling c must be positive");
    if (!(s.dt > 0.0 && s.dt <= 0.1)) throw std::invalid_argument("dt must lie in (0, 0.1]");
    if (s.diagnostics_stride == 0 || s.fit_stride == 0) throw std::invalid_argument("strides must be positive");
    if (s.rel_tol <= 0.0 || s.sup_tol <= 0.0) throw std::invalid_argument("check tolerances must be positive");
    if (is_1d_run(s.kind) || two_d || s.kind == ScenarioKind::ConvergenceStudy) make_grid(s.n, s.length, two_d ? 2 : 1);
    if (s.kind == ScenarioKind::FreeSoliton && s.pot.a_minus != s.pot.a_plus)
        throw std::invalid_argument("free soliton scenario needs a constant potential (a_minus == a_plus)");
    if (s.kind == ScenarioKind::FreeSoliton && s.horizon.automatic)
        throw std::invalid_argument("free soliton scenario needs an explicit horizon");
    if (s.horizon.automatic && (is_1d_run(s.kind) || two_d || s.kind == ScenarioKind::ConvergenceStudy)) {
        if (!(s.v0 > 0.0)) throw std::invalid_argument("automatic horizon requires v0 > 0");
        const double emin = s.epsilons.empty() ? s.pot.epsilon : *std::min_element(s.epsilons.begin(), s.epsilons.end());
        if (emin < 0.0125) throw std::invalid_argument("automatic horizon needs epsilon >= 0.0125; use an explicit horizon");
    }
    if (!s.horizon.automatic && !(s.horizon.t1 > s.horizon.t0)) throw std::invalid_argument("horizon needs t1 > t0");
    if (s.ode_t1 && !(*s.ode_t1 >= resolve_horizon(s).second))
        throw std::invalid_argument("ode_t1 must not precede the PDE horizon end");
    if ((s.kind == ScenarioKind::Interaction1D || s.kind == ScenarioKind::Reflection1D) && !(s.m >= 2.0))
        throw std::invalid_argument("interaction scenarios need m in [2,5)");
    if ((s.kind == ScenarioKind::Interaction1D || s.kind == ScenarioKind::Reflection1D || two_d) && !(s.v0 > 0.0))
        throw std::invalid_argument("interaction scenarios need v0 > 0");
    if (is_study(s.kind)) {
        if (s.epsilons.size() < 3) throw std::invalid_argument("studies need at least 3 epsilons");
        for (double e : s.epsilons)
            if (!(e > 0.0)) throw std::invalid_argument("study epsilons must be positive");
        if (!(s.m >= 2.0 && s.m < 5.0)) throw std::invalid_argument("studies need m in [2,5)");
        if (s.ansatz_order > scaling_exponents(s.m).p_m)
            throw std::invalid_argument("ansatz order exceeds p_m for this m");
    }
    if (s.ansatz_order < -1 || s.ansatz_order > 2) throw std::invalid_argument("ansatz order must be -1, 0, 1 or 2");
    if (s.ansatz_order == 2 && s.m < 3.0) throw std::invalid_argument("second order undefined for m<3");
}

json to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["kind"] = to_string(s.kind);
    j["m"] = s.m;
    j["soliton"] = {{"c", s.c0}, {"v", s.v0}, {"v2", s.v_transverse}, {"gamma", s.gamma0}};
    if (s.rho0) j["soliton"]["rho"] = *s.rho0;
    j["potential"] = {{"direction", to_string(s.pot.direction)}, {"epsilon", s.pot.epsilon},
                      {"a_minus", s.pot.a_minus},                 {"a_plus", s.pot.a_plus},
                      {"steepness", s.pot.steepness}};
    j["grid"] = {{"n", s.n}, {"length", s.length}};
    j["time"] = {{"dt", s.dt},
                 {"horizon", s.horizon.automatic ? "auto" : "explicit"},
                 {"diagnostics_stride", s.diagnostics_stride},
                 {"fit_stride", s.fit_stride}};
    if (!s.horizon.automatic) {
        j["time"]["t0"] = s.horizon.t0;
        j["time"]["t1"] = s.horizon.t1;
    }
    if (s.ode_t1) j["time"]["ode_t1"] = *s.ode_t1;
    j["study"] = {{"epsilons", s.epsilons}, {"order", s.ansatz_order}, {"m_values", s.ms}};
    j["checks"] = {{"rel_tol", s.rel_tol}, {"sup_tol", s.sup_tol}};
    j["output"] = {{"dir", s.output_dir.string()}, {"snapshot", s.write_snapshot}};
    return j;
}

std::pair<double, double> resolve_horizon(const Scenario& s) {
    if (!s.horizon.automatic) return {s.horizon.t0, s.horizon.t1};
    const double T = interaction_time(s.v0, s.pot.epsilon);
    return {-T, T};
}

ExtendedState initial_state(const Scenario& s) {
    const double t0 = resolve_horizon(s).first;
    ExtendedState y;
    y.s.C = s.c0;
    y.s.V = s.v0;
    y.s.U = s.rho0 ? *s.rho0 : s.v0 * t0;
    y.s.H = s.gamma0;
    return y;
}

EffectiveModel effective_model(const Scenario& s) {
    EffectiveModel model;
    model.m = s.m;
    model.pot = s.pot;
    model.kind = s.pot.direction == Direction::Increasing ? EffectiveKind::Increasing1D : EffectiveKind::Decreasing1D;
    if (s.m >= 3.0) model.corrections = second_order_coefficients(s.m);
    return model;
}

unsigned thread_budget() {
    if (const char* env = std::getenv("NLS_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

json manifest(const Scenario& s, const json& extra) {
    json j;
    j["version"] = kVersion;
    j["scenario"] = to_json(s);
    const auto [t0, t1] = resolve_horizon(s);
    j["resolved"] = {{"t0", t0}, {"t1", t1}, {"threads", thread_budget()}};
    j["resolved"].update(extra);
    return j;
}

json to_json(const OutcomePrediction& p) {
    return {{"kind", to_string(p.kind)}, {"c_inf", p.c_inf},  {"v_inf", p.v_inf},
            {"lambda_inf", p.lambda_inf}, {"c0", p.c0}, {"threshold", p.threshold}};
}

Trajectory effective_run(const EffectiveModel& model, const ExtendedState& init, double t0, double t1) {
    const double h = std::min(default_ode_step(model.pot.epsilon), (t1 - t0) / 100.0);
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / h));
    const std::size_t stride = std::max<std::size_t>(1, steps / 4000);
    return integrate_effective(model, init, t0, t1, h, stride);
}

void write_trajectory(const fs::path& path, const Trajectory& tr) {
    CsvWriter w(path, {"t", "C", "V", "U", "H", "int_c", "int_v2", "invariant_drift"});
    for (const auto& p : tr.points)
        w.row({p.t, p.y.s.C, p.y.s.V, p.y.s.U, p.y.s.H, p.y.int_c, p.y.int_v2, p.invariant_drift});
}

void write_diagnostics(const fs::path& path, const Diagnostics& d, bool two_d) {
    std::vector<std::string> header{"t", "M", "Ea", "P"};
    if (two_d) header.push_back("P2");
    for (const char* h : {"law_rhs", "dPdt", "law_residual", "tail_fraction"}) header.push_back(h);
    CsvWriter w(path, header);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        std::vector<double> row{d.times[i], d.mass[i], d.energy[i], d.momentum[i]};
        if (two_d) row.push_back(d.momentum2[i]);
        row.push_back(d.law_rhs[i]);
        row.push_back(i < d.dPdt.size() ? d.dPdt[i] : nan);
        row.push_back(i < d.law_residual.size() ? d.law_residual[i] : nan);
        row.push_back(d.tail_fraction[i]);
        w.row(row);
    }
}

void write_track(const fs::path& path, const ModulationTrack& tr) {
    CsvWriter w(path, {"t", "c", "v", "rho", "gamma", "fit_residual", "remainder_h1"});
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& p = tr.params[i];
        w.row({tr.times[i], p.c, p.v, p.rho, p.gamma, tr.fit_residuals[i], tr.remainder_h1[i]});
    }
}

// throws when the trajectory leaves the region 10 e-folds inside the boundary
void check_trajectory_fits(const Grid& g, const Trajectory& tr, double t1) {
    for (const auto& p : tr.points) {
        if (p.t > t1 + 1e-12) break;
        const double margin = 10.0 / std::sqrt(p.y.s.C);
        if (std::abs(p.y.s.U) > 0.5 * g.length - margin) {
            std::ostringstream msg;
            msg << "predicted trajectory reaches x=" << p.y.s.U << " at t=" << p.t
                << ", closer than 10 e-folds to the boundary of [" << -0.5 * g.length << ", " << 0.5 * g.length << ")";
            throw std::domain_error(msg.str());
        }
    }
}

ExtendedState state_at(const EffectiveModel& model, const Trajectory& tr, double t) {
    const auto& pts = tr.points;
    std::size_t k = 0;
    while (k + 1 < pts.size() && pts[k + 1].t <= t) ++k;
    return advance(model, pts[k].y, t - pts[k].t, 8);
}

std::vector<std::string> common_files() { return {"manifest.json", "trajectory.csv", "prediction.json"}; }

ScenarioResult finish(const Scenario& s, json comparison, std::vector<std::string> failures) {
    ScenarioResult r;
    r.pass = failures.empty();
    comparison["pass"] = r.pass;
    comparison["failures"] = failures;
    r.failures = std::move(failures);
    r.comparison = comparison;
    r.output_dir = s.output_dir;
    write_json(s.output_dir / "comparison.json", comparison);
    return r;
}

ScenarioResult run_free(const Scenario& s) {
    const Grid g = make_grid(s.n, s.length, 1);
    const auto [t0, t1] = resolve_horizon(s);
    const double a0 = s.pot.a_minus;
    SolitonParams p;
    p.m = s.m;
    p.c = s.c0;
    p.v = s.v0;
    p.rho = s.rho0.value_or(0.0);
    p.gamma = s.gamma0;
    p.amp = std::pow(a0, 1.0 / (s.m - 1.0));
    const ComplexField u0 = traveling_wave(p, g, 0.0);
    check_boundary_margin(g, p.rho + p.v * (t1 - t0), p.c);
    SolverConfig cfg;
    cfg.dt = s.dt;
    cfg.t0 = t0;
    cfg.t1 = t1;
    cfg.observer_stride = s.diagnostics_stride;
    cfg.m = s.m;
    cfg.pot = s.pot;
    TrackOptions topts;
    Tracker tracker(s.m, s.pot, p, topts);
    std::size_t k = 0;
    auto res = evolve(u0, cfg, [&](double t, const ComplexField& u) {
        if (k++ % s.fit_stride == 0) tracker.add(t, u);
    });
    const ComplexField exact = traveling_wave(p, g, t1 - t0);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) sup = std::max(sup, std::abs(res.field.values[i] - exact.values[i]));
    const auto& d = res.diag;
    const double mass_drift = std::abs(d.mass.back() - d.mass.front()) / d.mass.front();
    const double energy_drift = std::abs(d.energy.back() - d.energy.front()) / std::abs(d.energy.front());
    const auto& tr = tracker.track();
    double dc = 0.0, dv = 0.0;
    for (const auto& q : tr.params) {
        dc = std::max(dc, std::abs(q.c - p.c));
        dv = std::max(dv, std::abs(q.v - p.v));
    }
    write_diagnostics(s.output_dir / "diagnostics.csv", d, false);
    write_track(s.output_dir / "track.csv", tr);
    if (s.write_snapshot) write_snapshot((s.output_dir / "final.bin").string(), res.field);
    write_json(s.output_dir / "manifest.json",
               manifest(s, {{"outputs", {"manifest.json", "diagnostics.csv", "track.csv", "comparison.json"}}}));
    json cmp = {{"sup_error", sup},
                {"mass_drift", mass_drift},
                {"energy_drift", energy_drift},
                {"fit_c_max_dev", dc},
                {"fit_v_max_dev", dv},
                {"track_truncated", tr.truncated},
                {"aborted", res.aborted}};
    std::vector<std::string> fails;
    if (res.aborted) fails.push_back("run aborted: " + res.reason);
    if (!(sup < s.sup_tol)) fails.push_back("sup error " + label(sup) + " above " + label(s.sup_tol));
    return finish(s, cmp, fails);
}

ScenarioResult run_interaction(const Scenario& s) {
    const Grid g = make_grid(s.n, s.length, 1);
    const auto [t0, t1] = resolve_horizon(s);
    const double ode_end = s.ode_t1.value_or(t1);
    const EffectiveModel model = effective_model(s);
    const ExtendedState y0 = initial_state(s);
    const auto pred = predict_outcome(s.m, s.v0, s.pot);
    const Trajectory traj = effective_run(model, y0, t0, ode_end);
    write_trajectory(s.output_dir / "trajectory.csv", traj);
    write_json(s.output_dir / "prediction.json", to_json(pred));
    check_trajectory_fits(g, traj, t1);

    const int p_m = scaling_exponents(s.m).p_m;
    const int order = s.ansatz_order >= 0 ? s.ansatz_order : (s.m >= 2.0 ? p_m : 0);
    SolitonParams p;
    p.m = s.m;
    p.c = y0.s.C;
    p.v = y0.s.V;
    p.rho = y0.s.U;
    p.gamma = y0.s.H;
    const ComplexField u0 = reference_profile(p, s.pot, g);

    SolverConfig cfg;
    cfg.dt = s.dt;
    cfg.t0 = t0;
    cfg.t1 = t1;
    cfg.observer_stride = s.diagnostics_stride;
    cfg.m = s.m;
    cfg.pot = s.pot;
    TrackOptions topts;
    topts.ansatz_order = order;
    Tracker tracker(s.m, s.pot, p, topts);
    std::size_t k = 0;
    auto res = evolve(u0, cfg, [&](double t, const ComplexField& u) {
        if (k++ % s.fit_stride == 0) tracker.add(t, u);
    });
    auto& d = res.diag;
    MomentumLawReport law;
    const bool have_law = d.times.size() >= 3;
    if (have_law) law = momentum_law_residual(d);
    write_diagnostics(s.output_dir / "diagnostics.csv", d, false);
    const auto& tr = tracker.track();
    write_track(s.output_dir / "track.csv", tr);
    if (s.write_snapshot) write_snapshot((s.output_dir / "final.bin").string(), res.field);

    // frozen profiles where the trajectory crosses the transition centre
    {
        const TrajectoryPoint* centre = &traj.points.front();
        for (const auto& q : traj.points)
            if (std::abs(q.y.s.U) < std::abs(centre->y.s.U)) centre = &q;
        const Grid pg = make_grid(2048, 80.0, 1);
        const ProfileState ps{centre->y.s.C, centre->y.s.V, centre->y.s.U, s.pot};
        CorrectionProfiles cp = correction_profiles(s.m >= 3.0 ? 2 : 1, s.m, ps, pg);
        CsvWriter w(s.output_dir / "profiles.csv", {"y", "A1", "B1", "A2", "B2"});
        for (std::size_t i = 0; i < pg.n; ++i)
            w.row({pg.x(i), cp.A1[i], cp.B1[i], cp.A2.empty() ? 0.0 : cp.A2[i], cp.B2.empty() ? 0.0 : cp.B2[i]});
    }

    // final fit: warm from the track, or from the effective state after a lock loss
    SolitonParams guess;
    if (!tr.truncated && !tr.params.empty() && tr.times.back() == res.diag.times.back()) {
        guess = tr.params.back();
    } else {
        const ExtendedState ye = state_at(model, traj, res.diag.times.back());
        guess.m = s.m;
        guess.c = ye.s.C;
        guess.v = ye.s.V;
        guess.rho = ye.s.U;
        guess.gamma = ye.int_c - 0.25 * ye.int_v2 + ye.s.H;
    }
    json final_fit;
    std::vector<std::string> fails;
    double fc = std::numeric_limits<double>::quiet_NaN(), fv = fc;
    try {
        FitOptions fo;
        fo.basin = 1.0;
        const FitResult f = fit_modulation(res.field, guess, s.pot, fo);
        fc = f.params.c;
        fv = f.params.v;
        final_fit = {{"t", res.diag.times.back()}, {"c", fc}, {"v", fv}, {"rho", f.params.rho},
                     {"gamma", f.params.gamma}, {"residual", f.residual}};
    } catch (const FitLostLock& e) {
        fails.push_back(std::string("final ") + e.what());
    }
    double max_rem = 0.0;
    for (double r : tr.remainder_h1)
        if (std::isfinite(r)) max_rem = std::max(max_rem, r);
    const auto& last = traj.back().y.s;
    json cmp;
    cmp["prediction"] = to_json(pred);
    cmp["final_fit"] = final_fit;
    cmp["c_rel_err"] = rel_err(fc, pred.c_inf);
    cmp["v_rel_err"] = rel_err(fv, pred.v_inf);
    cmp["max_remainder_h1"] = max_rem;
    cmp["ansatz_order"] = order;
    cmp["ode_endpoint"] = {{"t", traj.back().t}, {"C", last.C}, {"V", last.V}, {"U", last.U},
                           {"C_rel_err", rel_err(last.C, pred.c_inf)}, {"V_rel_err", rel_err(last.V, pred.v_inf)}};
    cmp["mass_drift"] = std::abs(d.mass.back() - d.mass.front()) / d.mass.front();
    cmp["max_tail_fraction"] = *std::max_element(d.tail_fraction.begin(), d.tail_fraction.end());
    if (have_law)
        cmp["momentum_law"] = {{"min_dPdt", law.min_dPdt}, {"max_abs_dPdt", law.max_abs_dPdt},
                               {"max_residual", law.max_residual}};
    cmp["track"] = {{"points", tr.times.size()}, {"truncated", tr.truncated}, {"reason", tr.reason}};
    cmp["aborted"] = res.aborted;
    if (s.kind == ScenarioKind::Reflection1D) {
        const auto tp = find_turning_point(model, traj);
        cmp["turning_point"] = {{"sign_changes", tp.sign_changes}, {"t", tp.t}, {"C", tp.s.C}, {"U", tp.s.U},
                                {"c0_predicted", pred.c0}, {"c0_abs_err", std::abs(tp.s.C - pred.c0)}};
        if (pred.kind != OutcomeKind::Reflected) fails.push_back("prediction is not a reflection");
        if (tp.sign_changes == 0) fails.push_back("horizon exhausted before the turning point");
    } else if (pred.kind != OutcomeKind::Transmitted) {
        fails.push_back("prediction is not a transmission");
    }
    if (res.aborted) fails.push_back("run aborted: " + res.reason);
    if (!(rel_err(fc, pred.c_inf) <= s.rel_tol)) fails.push_back("final c off by more than rel_tol");
    if (!(rel_err(fv, pred.v_inf) <= s.rel_tol)) fails.push_back("final v off by more than rel_tol");
    write_json(s.output_dir / "manifest.json",
               manifest(s, {{"ode_t1", ode_end},
                            {"ansatz_order", order},
                            {"outputs",
                             {"manifest.json", "trajectory.csv", "prediction.json", "diagnostics.csv", "track.csv",
                              "profiles.csv", "comparison.json"}}}));
    return finish(s, cmp, fails);
}

struct Moments2D {
    double mass = 0.0;
    double centre[2] = {0.0, 0.0};
    double v[2] = {0.0, 0.0};
    double c = 0.0;
};

Moments2D moments_2d(const ComplexField& u, const Observables& ob, const PotentialSpec& pot, double m, double qmax) {
    const Grid& g = u.grid;
    const std::size_t n = g.n;
    Moments2D r;
    double peak = 0.0, sx = 0.0, sy = 0.0, mass = 0.0;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double w = std::norm(u.values[i * n + j]);
            mass += w;
            r.centre[0] += w * g.x(i);
            // circular mean along the periodic transverse axis
            sx += w * std::cos(two_pi * g.x(j) / g.length);
            sy += w * std::sin(two_pi * g.x(j) / g.length);
            peak = std::max(peak, std::sqrt(w));
        }
    r.mass = ob.mass;
    r.centre[0] /= mass;
    r.centre[1] = std::atan2(sy, sx) * g.length / two_pi;
    r.v[0] = 4.0 * ob.momentum[0] / ob.mass;
    r.v[1] = 4.0 * ob.momentum[1] / ob.mass;
    const double at = std::pow(eval_potential(pot, pot.epsilon * r.centre[0], 0), 1.0 / (m - 1.0));
    r.c = std::pow(at * peak / qmax, m - 1.0);
    return r;
}

ScenarioResult run_2d(const Scenario& s) {
    const Grid g = make_grid(s.n, s.length, 2);
    const auto [t0, t1] = resolve_horizon(s);
    const double ode_end = s.ode_t1.value_or(t1);
    const GroundState2D q = ground_state_2d(s.m, g, s.c0);
    const Pohozaev2D poh = pohozaev_2d(q);
    const GroundState2D q1 = s.c0 == 1.0 ? q : ground_state_2d(s.m, g, 1.0);
    const double qmax = *std::max_element(q1.Q.begin(), q1.Q.end());
    EffectiveModel model;
    model.kind = EffectiveKind::TwoD;
    model.m = s.m;
    model.pot = s.pot;
    model.kappa = poh.kappa / s.c0;
    const double vin[2] = {s.v0, s.v_transverse};
    const auto pred = predict_outcome_2d(s.m, s.v0, s.pot, model.kappa);
    const auto angles = refraction_angles(vin, s.m, s.pot, model.kappa);
    ExtendedState y0;
    y0.s.C = s.c0;
    y0.s.V = s.v0;
    y0.s.U = s.rho0 ? *s.rho0 : s.v0 * t0;
    y0.s.H = s.gamma0;
    const Trajectory traj = effective_run(model, y0, t0, ode_end);
    write_trajectory(s.output_dir / "trajectory.csv", traj);
    json pj = to_json(pred);
    pj["v_out"] = {angles.v_out[0], angles.v_out[1]};
    pj["theta_minus"] = angles.theta_minus;
    pj["theta_plus"] = angles.theta_plus;
    pj["law_residual"] = angles.law_residual;
    write_json(s.output_dir / "prediction.json", pj);
    check_trajectory_fits(g, traj, t1);

    SolitonParams2D p;
    p.m = s.m;
    p.c = s.c0;
    p.v[0] = s.v0;
    p.v[1] = s.v_transverse;
    p.rho[0] = y0.s.U;
    p.gamma = s.gamma0;
    p.amp = std::pow(eval_potential(s.pot, s.pot.epsilon * p.rho[0], 0), 1.0 / (s.m - 1.0));
    const ComplexField u0 = traveling_wave_2d(p, q, 0.0);
    SolverConfig cfg;
    cfg.dt = s.dt;
    cfg.t0 = t0;
    cfg.t1 = t1;
    cfg.observer_stride = s.diagnostics_stride;
    cfg.m = s.m;
    cfg.pot = s.pot;
    cfg.boundary_guard = false;
    std::vector<std::vector<double>> rows;
    auto res = evolve(u0, cfg, [&](double t, const ComplexField& u) {
        const auto ob = observables(u, s.pot, s.m);
        const auto mo = moments_2d(u, ob, s.pot, s.m, qmax);
        rows.push_back({t, mo.c, mo.v[0], mo.v[1], mo.centre[0], mo.centre[1]});
    });
    auto& d = res.diag;
    if (d.times.size() >= 3) momentum_law_residual(d);
    write_diagnostics(s.output_dir / "diagnostics.csv", d, true);
    {
        CsvWriter w(s.output_dir / "moments.csv", {"t", "c", "v1", "v2", "x1", "x2"});
        for (const auto& r : rows) w.row(r);
    }
    if (s.write_snapshot) write_snapshot((s.output_dir / "final.bin").string(), res.field);
    const auto& fin = rows.back();
    const double vscale = std::hypot(angles.v_out[0], angles.v_out[1]);
    json cmp;
    cmp["prediction"] = pj;
    cmp["ground_state"] = {{"iterations", q.iterations}, {"residual", q.residual}, {"kappa", poh.kappa},
                           {"pohozaev_rel_err", poh.rel_err}};
    cmp["final_moments"] = {{"t", fin[0]}, {"c", fin[1]}, {"v1", fin[2]}, {"v2", fin[3]}, {"x1", fin[4]}, {"x2", fin[5]}};
    cmp["c_rel_err"] = rel_err(fin[1], pred.c_inf);
    cmp["v1_rel_err"] = rel_err(fin[2], angles.v_out[0]);
    cmp["v2_err"] = std::abs(fin[3] - angles.v_out[1]) / vscale;
    cmp["theta_plus_measured"] = std::atan2(fin[3], fin[2]);
    cmp["mass_drift"] = std::abs(d.mass.back() - d.mass.front()) / d.mass.front();
    cmp["aborted"] = res.aborted;
    std::vector<std::string> fails;
    if (res.aborted) fails.push_back("run aborted: " + res.reason);
    if (pred.kind != OutcomeKind::Transmitted) fails.push_back("prediction is not a transmission");
    if (!(cmp["c_rel_err"].get<double>() <= s.rel_tol)) fails.push_back("final c off by more than rel_tol");
    if (!(cmp["v1_rel_err"].get<double>() <= s.rel_tol)) fails.push_back("final v1 off by more than rel_tol");
    if (!(cmp["v2_err"].get<double>() <= s.rel_tol)) fails.push_back("transverse velocity not preserved");
    write_json(s.output_dir / "manifest.json",
               manifest(s, {{"ode_t1", ode_end},
                            {"outputs",
                             {"manifest.json", "trajectory.csv", "prediction.json", "diagnostics.csv", "moments.csv",
                              "comparison.json"}}}));
    return finish(s, cmp, fails);
}

std::vector<double> suite_ms(const Scenario& s) {
    return s.ms.empty() ? std::vector<double>{2.0, 3.0, 4.0} : s.ms;
}

ScenarioResult run_identities(const Scenario& s) {
    json arr = json::array();
    std::vector<std::string> fails;
    for (double m : suite_ms(s)) {
        const auto rep = check_identities(m);
        arr.push_back(to_json(rep));
        if (!rep.pass) fails.push_back("identity suite fails for m=" + label(m));
    }
    write_json(s.output_dir / "manifest.json", manifest(s, {{"outputs", {"manifest.json", "comparison.json"}}}));
    return finish(s, {{"reports", arr}}, fails);
}

std::vector<std::string> operator_failures(const OperatorSuiteReport& r) {
    std::vector<std::string> f;
    const std::string tag = " (m=" + label(r.m) + ")";
    if (!(r.spectral.kernel_plus < 1e-9 && r.spectral.kernel_minus < 1e-9)) f.push_back("kernel residual" + tag);
    if (!(r.spectral.lambda_identity < 1e-8)) f.push_back("L+ Lambda Q identity" + tag);
    if (r.m == 3.0 && !(std::abs(r.spectral.lambda_m - 3.0 * r.c) < 1e-6)) f.push_back("lambda_3 eigenvalue" + tag);
    if (!(r.a1_sup_err < 1e-6 && r.b1_sup_err < 1e-6)) f.push_back("first-order solve vs closed form" + tag);
    if (!(r.or1 < 1e-8)) f.push_back("first-order orthogonality" + tag);
    if (r.second_order) {
        if (!(r.proj_F2 < 1e-8 && r.proj_G2 < 1e-8)) f.push_back("second-order projections" + tag);
        if (!(r.or2 < 1e-7)) f.push_back("second-order orthogonality" + tag);
        if (!(r.parity_A2 < 1e-8 && r.parity_B2 < 1e-8)) f.push_back("second-order parity" + tag);
        if (!(r.alpha[0] > 0.0 && r.alpha[1] < 0.0 && r.beta[0] > 0.0)) f.push_back("counterterm signs" + tag);
    }
    return f;
}

ScenarioResult run_operators(const Scenario& s) {
    json arr = json::array();
    std::vector<std::string> fails;
    for (double m : suite_ms(s)) {
        const auto rep = operator_suite(m, s.c0, s.v0);
        arr.push_back(to_json(rep));
        for (auto& f : operator_failures(rep)) fails.push_back(f);
    }
    write_json(s.output_dir / "manifest.json", manifest(s, {{"outputs", {"manifest.json", "comparison.json"}}}));
    return finish(s, {{"reports", arr}}, fails);
}

void write_rates(const Scenario& s, const RateReport& r) {
    CsvWriter w(s.output_dir / "residual_scaling.csv", {"epsilon", "residual", "remainder_h1"});
    for (std::size_t i = 0; i < r.epsilons.size(); ++i)
        w.row({r.epsilons[i], r.residuals[i],
               r.remainders.empty() ? std::numeric_limits<double>::quiet_NaN() : r.remainders[i]});
}

ScenarioResult run_rates(const Scenario& s) {
    const RateReport r = s.kind == ScenarioKind::ResidualScaling ? residual_scaling(s) : convergence_study(s);
    write_rates(s, r);
    json cmp = to_json(r);
    const double expected = r.order + 1.0;
    cmp["expected_residual_slope"] = expected;
    std::vector<std::string> fails;
    if (!(std::abs(r.residual_slope.slope - expected) <= 0.3))
        fails.push_back("residual slope " + label(r.residual_slope.slope) + " differs from " + label(expected) + " by > 0.3");
    write_json(s.output_dir / "manifest.json",
               manifest(s, {{"outputs", {"manifest.json", "residual_scaling.csv", "comparison.json"}}}));
    return finish(s, cmp, fails);
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s) {
    validate(s);
    fs::create_directories(s.output_dir);
    try {
        switch (s.kind) {
            case ScenarioKind::FreeSoliton: return run_free(s);
            case ScenarioKind::Interaction1D:
            case ScenarioKind::Reflection1D: return run_interaction(s);
            case ScenarioKind::Interaction2D:
            case ScenarioKind::Refraction2D: return run_2d(s);
            case ScenarioKind::IdentitySuite: return run_identities(s);
            case ScenarioKind::OperatorSuite: return run_operators(s);
            case ScenarioKind::ResidualScaling:
            case ScenarioKind::ConvergenceStudy: return run_rates(s);
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("scenario '" + s.name + "': " + e.what());
    }
    throw std::logic_error("unhandled scenario kind");
}

ScenarioResult run_effective(const Scenario& s) {
    validate(s);
    if (!is_1d_run(s.kind) || s.kind == ScenarioKind::FreeSoliton)
        throw std::invalid_argument("effective runs need an interaction or reflection scenario");
    fs::create_directories(s.output_dir);
    const auto [t0, t1] = resolve_horizon(s);
    const double end = s.ode_t1.value_or(t1);
    const EffectiveModel model = effective_model(s);
    const auto pred = predict_outcome(s.m, s.v0, s.pot);
    const Trajectory traj = effective_run(model, initial_state(s), t0, end);
    write_trajectory(s.output_dir / "trajectory.csv", traj);
    write_json(s.output_dir / "prediction.json", to_json(pred));
    write_json(s.output_dir / "manifest.json", manifest(s, {{"ode_t1", end}, {"outputs", common_files()}}));
    const auto& last = traj.back().y.s;
    double drift = 0.0;
    for (const auto& p : traj.points) drift = std::max(drift, p.invariant_drift);
    json cmp = {{"prediction", to_json(pred)},
                {"endpoint", {{"t", traj.back().t}, {"C", last.C}, {"V", last.V}, {"U", last.U}, {"H", last.H}}},
                {"C_rel_err", rel_err(last.C, pred.c_inf)},
                {"V_rel_err", rel_err(last.V, pred.v_inf)},
                {"max_invariant_drift", drift}};
    std::vector<std::string> fails;
    if (s.kind == ScenarioKind::Reflection1D) {
        const auto tp = find_turning_point(model, traj);
        cmp["turning_point"] = {{"sign_changes", tp.sign_changes}, {"t", tp.t}, {"C", tp.s.C}, {"U", tp.s.U},
                                {"c0_abs_err", std::abs(tp.s.C - pred.c0)}};
        if (tp.sign_changes == 0) fails.push_back("horizon exhausted before the turning point");
        if (tp.sign_changes > 1) fails.push_back("more than one turning point");
    }
    return finish(s, cmp, fails);
}

OperatorSuiteReport operator_suite(double m, double c, double v) {
    OperatorSuiteReport r;
    r.m = m;
    r.c = c;
    const Grid g = make_grid(4096, 80.0 / std::sqrt(std::min(c, 1.0)), 1);
    r.spectral = spectral_checks(m, c, g);
    PotentialSpec pot;
    const ProfileState st{c, v, 0.0, pot};
    SolveOptions opts;
    opts.tol = 1e-11;
    const auto closed = first_order_profiles(m, st, g);
    const auto numer = first_order_profiles_numeric(m, st, g, opts);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        ea = std::max(ea, std::abs(closed.A1[i] - numer.A1[i]));
        eb = std::max(eb, std::abs(closed.B1[i] - numer.B1[i]));
    }
    r.a1_sup_err = ea;
    r.b1_sup_err = eb;
    RVec Q(g.n), dQ(g.n), LQ(g.n), yQ(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        Q[i] = soliton_profile(m, c, y);
        dQ[i] = soliton_derivative(m, c, y);
        LQ[i] = lambda_Q(m, c, y);
        yQ[i] = y * Q[i];
    }
    r.or1 = std::max({std::abs(inner(g, closed.A1, Q)), std::abs(inner(g, closed.A1, dQ)),
                      std::abs(inner(g, closed.B1, Q)), std::abs(inner(g, closed.B1, dQ))});
    const auto src = first_order_sources(m, st, g);
    LinearizedOperator Lp(OpSign::Plus, m, c, g), Lm(OpSign::Minus, m, c, g);
    const RVec la = Lp.apply(closed.A1), lb = Lm.apply(closed.B1);
    double o1 = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        o1 = std::max({o1, std::abs(la[i] - src.F[i]), std::abs(lb[i] - src.G[i])});
    r.omega1_residual = o1;
    if (m >= 3.0) {
        r.second_order = true;
        const auto s2 = second_order_sources(m, st, g);
        r.alpha = s2.alpha;
        r.beta = s2.beta;
        r.proj_F2 = std::abs(inner(g, s2.F2t, LQ));
        r.proj_G2 = std::abs(inner(g, s2.G2t, yQ));
        const auto p2 = second_order_profiles(m, st, g, opts);
        r.parity_A2 = sup_norm(odd_part(g, p2.A2)) / sup_norm(p2.A2);
        r.parity_B2 = sup_norm(even_part(g, p2.B2)) / sup_norm(p2.B2);
        r.or2 = std::max(std::abs(inner(g, p2.A2, Q)), std::abs(inner(g, p2.B2, dQ)));
    } else {
        const auto k = profile_constants(m);
        r.alpha = k.alpha;
        r.beta = k.beta;
    }
    return r;
}

json to_json(const OperatorSuiteReport& r) {
    json j = {{"m", r.m},
              {"c", r.c},
              {"kernel_plus", r.spectral.kernel_plus},
              {"kernel_minus", r.spectral.kernel_minus},
              {"lambda_identity", r.spectral.lambda_identity},
              {"lambda_m", r.spectral.lambda_m},
              {"eigen_residual", r.spectral.eigen_residual},
              {"minus_gap", r.spectral.minus_gap},
              {"a1_sup_err", r.a1_sup_err},
              {"b1_sup_err", r.b1_sup_err},
              {"or1", r.or1},
              {"omega1_residual", r.omega1_residual},
              {"alpha", r.alpha},
              {"beta", r.beta}};
    if (r.second_order) {
        j["proj_F2"] = r.proj_F2;
        j["proj_G2"] = r.proj_G2;
        j["parity_A2"] = r.parity_A2;
        j["parity_B2"] = r.parity_B2;
        j["or2"] = r.or2;
    }
    j["failures"] = operator_failures(r);
    return j;
}

json to_json(const IdentityReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"rel_err", c.rel_err},
                          {"required", c.required}, {"pass", c.pass}});
    return {{"m", r.m}, {"c", r.c}, {"checks", checks}, {"max_rel_err", r.max_rel_err}, {"pass", r.pass}};
}

SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n) throw std::invalid_argument("slope fit needs at least 3 paired points");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("slope fit needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs distinct x values");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - f.intercept - f.slope * lx[i];
        ss += e * e;
    }
    f.stderr_slope = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    return f;
}

double residual_at_centre(double m, double v0, const PotentialSpec& pot, int order, std::size_t n, double length) {
    const auto ex = scaling_exponents(m);
    const double a0 = eval_potential(pot, 0.0, 0);
    const double C = std::pow(a0 / pot.a_minus, 4.0 / (5.0 - m));
    const double V2 = v0 * v0 + 4.0 * ex.lambda0 * (C - 1.0);
    if (!(V2 > 0.0)) throw std::domain_error("trajectory turns before reaching the transition centre");
    EffectiveModel model;
    model.m = m;
    model.pot = pot;
    model.kind = pot.direction == Direction::Increasing ? EffectiveKind::Increasing1D : EffectiveKind::Decreasing1D;
    ExtendedState y;
    y.s.C = C;
    y.s.V = std::sqrt(V2);
    return residual_norm(model, y, make_grid(n, length, 1), order);
}

namespace {

int study_order(const Scenario& s) {
    return s.ansatz_order >= 0 ? s.ansatz_order : scaling_exponents(s.m).p_m;
}

}  // namespace

RateReport residual_scaling(const Scenario& s) {
    validate(s);
    RateReport r;
    r.order = study_order(s);
    r.epsilons = s.epsilons;
    const std::size_t n = s.n > 0 ? s.n : 2048;
    r.residuals = parallel_map<double>(s.epsilons.size(), [&](std::size_t i) {
        PotentialSpec pot = s.pot;
        pot.epsilon = s.epsilons[i];
        return residual_at_centre(s.m, s.v0, pot, r.order, n, s.length);
    });
    r.residual_slope = loglog_slope(r.epsilons, r.residuals);
    return r;
}

RateReport convergence_study(const Scenario& s) {
    Scenario rs = s;
    rs.kind = ScenarioKind::ResidualScaling;
    rs.n = 2048;
    rs.length = 100.0;
    RateReport r = residual_scaling(rs);
    const double e0 = s.epsilons.front();
    r.remainders = parallel_map<double>(s.epsilons.size(), [&](std::size_t i) {
        Scenario run = s;
        const double eps = s.epsilons[i];
        const double ratio = e0 / eps;
        run.kind = ScenarioKind::Interaction1D;
        run.pot.epsilon = eps;
        run.epsilons.clear();
        run.name = s.name + "_eps" + label(eps);
        run.output_dir = s.output_dir / ("eps_" + label(eps));
        run.ansatz_order = r.order;
        // lengths and times scale with 1/eps from the first entry
        if (!s.horizon.automatic) {
            run.horizon.t0 = s.horizon.t0 * ratio;
            run.horizon.t1 = s.horizon.t1 * ratio;
            if (s.ode_t1) run.ode_t1 = *s.ode_t1 * ratio;
        }
        if (s.rho0) run.rho0 = *s.rho0 * ratio;
        run.length = s.length * ratio;
        std::size_t n = s.n;
        while (static_cast<double>(n) < static_cast<double>(s.n) * ratio - 0.5) n *= 2;
        run.n = n;
        fs::create_directories(run.output_dir);
        const ScenarioResult res = run_scenario(run);
        return res.comparison.at("max_remainder_h1").get<double>();
    });
    r.remainder_slope = loglog_slope(r.epsilons, r.remainders);
    return r;
}

json to_json(const RateReport& r) {
    json j = {{"epsilons", r.epsilons},
              {"residuals", r.residuals},
              {"order", r.order},
              {"residual_slope", {{"slope", r.residual_slope.slope}, {"stderr", r.residual_slope.stderr_slope},
                                  {"intercept", r.residual_slope.intercept}}}};
    if (r.remainder_slope) {
        j["remainders"] = r.remainders;
        j["remainder_slope"] = {{"slope", r.remainder_slope->slope}, {"stderr", r.remainder_slope->stderr_slope},
                                {"intercept", r.remainder_slope->intercept}};
    }
    return j;
}

}  // namespace nls
