#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "nlslab/effective.hpp"
#include "nlslab/experiments.hpp"
#include "nlslab/soliton.hpp"

namespace {

int report(const nls::ScenarioResult& r) {
    std::cout << r.comparison.dump(2) << '\n';
    std::cerr << (r.pass ? "PASS" : "FAIL") << "  bundle: " << r.output_dir.string() << '\n';
    for (const auto& f : r.failures) std::cerr << "  - " << f << '\n';
    return r.pass ? 0 : 1;
}

nls::Scenario load_as(const std::string& path, std::initializer_list<nls::ScenarioKind> kinds, const char* what) {
    nls::Scenario s = nls::load_scenario(path);
    for (auto k : kinds)
        if (s.kind == k) return s;
    throw std::invalid_argument(std::string(what) + " needs a config of kind " + nls::to_string(*kinds.begin()) +
                                ", got " + nls::to_string(s.kind));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NLS soliton dynamics in slowly varying media"};
    app.set_version_flag("--version", std::string(nls::kVersion));
    app.require_subcommand(1);

    std::string config;
    auto* simulate = app.add_subcommand("simulate", "run a scenario and write its bundle");
    simulate->add_option("config", config, "scenario TOML")->required()->check(CLI::ExistingFile);

    auto* effective = app.add_subcommand("effective", "integrate the effective system only");
    effective->add_option("config", config, "scenario TOML")->required()->check(CLI::ExistingFile);

    double m = 3.0, v0 = 1.0, eps = 0.05, am = 1.0, ap = 2.0, mu = 1.0;
    auto* predict = app.add_subcommand("predict", "asymptotic outcome of an incoming soliton");
    predict->add_option("--m", m, "nonlinearity exponent")->required();
    predict->add_option("--v0", v0, "incoming velocity")->required();
    predict->add_option("--a-minus", am, "left limit of a")->capture_default_str();
    predict->add_option("--a-plus", ap, "right limit of a")->capture_default_str();
    predict->add_option("--epsilon", eps, "slow scale")->capture_default_str();
    predict->add_option("--steepness", mu, "tanh steepness")->capture_default_str();

    std::vector<double> ms{2.0, 3.0, 4.0};
    double c = 4.0;
    auto* ids = app.add_subcommand("verify-identities", "soliton integral identities");
    ids->add_option("--m", ms, "exponents")->capture_default_str();
    ids->add_option("--c", c, "scaling")->capture_default_str();

    double oc = 1.0;
    auto* ops = app.add_subcommand("verify-operators", "linearized operator and correction profile checks");
    ops->add_option("--m", ms, "exponents")->capture_default_str();
    ops->add_option("--c", oc, "scaling")->capture_default_str();

    auto* scaling = app.add_subcommand("residual-scaling", "residual norm against epsilon at the transition centre");
    scaling->add_option("config", config, "scenario TOML")->required()->check(CLI::ExistingFile);

    auto* converge = app.add_subcommand("converge", "residual and remainder rates over an epsilon list");
    converge->add_option("config", config, "scenario TOML")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        using K = nls::ScenarioKind;
        if (*simulate) return report(nls::run_scenario(nls::load_scenario(config)));
        if (*effective)
            return report(nls::run_effective(load_as(config, {K::Interaction1D, K::Reflection1D}, "effective")));
        if (*scaling) return report(nls::run_scenario(load_as(config, {K::ResidualScaling}, "residual-scaling")));
        if (*converge) return report(nls::run_scenario(load_as(config, {K::ConvergenceStudy}, "converge")));
        if (*predict) {
            nls::PotentialSpec pot;
            pot.a_minus = am;
            pot.a_plus = ap;
            pot.epsilon = eps;
            pot.steepness = mu;
            pot.direction = ap < am ? nls::Direction::Decreasing : nls::Direction::Increasing;
            const auto p = nls::predict_outcome(m, v0, pot);
            nlohmann::json j = {{"m", m},           {"v0", v0},          {"kind", nls::to_string(p.kind)},
                                {"c_inf", p.c_inf}, {"v_inf", p.v_inf},  {"lambda_inf", p.lambda_inf},
                                {"c0", p.c0},       {"threshold", p.threshold},
                                {"T_eps", nls::interaction_time(v0, eps)}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (*ids) {
            bool ok = true;
            nlohmann::json arr = nlohmann::json::array();
            for (double mm : ms) {
                const auto r = nls::check_identities(mm, c);
                ok = ok && r.pass;
                arr.push_back(nls::to_json(r));
                for (const auto& ch : r.checks)
                    std::cerr << "m=" << mm << "  " << (ch.required ? (ch.pass ? "ok  " : "FAIL") : "info") << "  "
                              << ch.name << "  rel_err=" << ch.rel_err << '\n';
            }
            std::cout << arr.dump(2) << '\n';
            return ok ? 0 : 1;
        }
        if (*ops) {
            bool ok = true;
            nlohmann::json arr = nlohmann::json::array();
            for (double mm : ms) {
                const auto j = nls::to_json(nls::operator_suite(mm, oc));
                ok = ok && j["failures"].empty();
                arr.push_back(j);
            }
            std::cout << arr.dump(2) << '\n';
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
