#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlslab/effective.hpp"
#include "nlslab/linear_ops.hpp"
#include "nlslab/pde.hpp"
#include "nlslab/potential.hpp"
#include "nlslab/soliton.hpp"

namespace nls {

extern const char* const kVersion;

enum class ScenarioKind {
    FreeSoliton,
    Interaction1D,
    Reflection1D,
    Interaction2D,
    Refraction2D,
    IdentitySuite,
    OperatorSuite,
    ResidualScaling,
    ConvergenceStudy
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct Horizon {
    bool automatic = true;  // [-T_eps, T_eps]
    double t0 = 0.0;
    double t1 = 0.0;
};

struct Scenario {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::Interaction1D;
    double m = 3.0;
    double c0 = 1.0;
    double v0 = 1.0;
    double v_transverse = 0.0;  // 2D
    std::optional<double> rho0;  // default v0 * t0
    double gamma0 = 0.0;
    std::vector<double> epsilons;  // studies
    PotentialSpec pot;
    std::size_t n = 4096;
    double length = 300.0;
    double dt = 1e-3;
    Horizon horizon;
    std::optional<double> ode_t1;  // effective trajectory end, default t1
    std::size_t diagnostics_stride = 100;
    std::size_t fit_stride = 1;  // in diagnostic snapshots
    int ansatz_order = -1;       // -1: p_m for 1D interaction runs
    double rel_tol = 0.05;
    double sup_tol = 1e-6;  // free soliton
    std::vector<double> ms;  // suites
    bool write_snapshot = true;
    std::filesystem::path output_dir = "out";
};

Scenario parse_scenario(const std::string& toml_text);
Scenario load_scenario(const std::filesystem::path& file);
void validate(const Scenario& s);
nlohmann::json to_json(const Scenario& s);

// resolved [t0, t1]
std::pair<double, double> resolve_horizon(const Scenario& s);
// initial centre and effective state at t0
ExtendedState initial_state(const Scenario& s);
EffectiveModel effective_model(const Scenario& s);

// scenario-level parallelism: NLS_LAB_THREADS, else hardware concurrency
unsigned thread_budget();

struct ScenarioResult {
    bool pass = false;
    std::vector<std::string> failures;
    nlohmann::json comparison;
    std::filesystem::path output_dir;
};

ScenarioResult run_scenario(const Scenario& s);
// effective trajectory and prediction only
ScenarioResult run_effective(const Scenario& s);

struct OperatorSuiteReport {
    double m = 3.0;
    double c = 1.0;
    SpectralReport spectral;
    double a1_sup_err = 0.0;  // numerical solve vs closed form
    double b1_sup_err = 0.0;
    double or1 = 0.0;  // max |int A1 Q_c|, |int A1 Q_c'|, |int B1 Q_c|, |int B1 Q_c'|
    double omega1_residual = 0.0;  // sup |L+ A1 - F1|, |L- B1 - G1|
    bool second_order = false;
    double proj_F2 = 0.0;  // |int F2t Lambda Q_c|
    double proj_G2 = 0.0;  // |int G2t y Q_c|
    double parity_A2 = 0.0;  // sup of odd part / sup
    double parity_B2 = 0.0;  // sup of even part / sup
    double or2 = 0.0;  // max |int A2 Q_c|, |int B2 Q_c'|
    std::array<double, 4> alpha{0, 0, 0, 0};
    std::array<double, 2> beta{0, 0};
};

OperatorSuiteReport operator_suite(double m, double c = 1.0, double v = 1.0);
nlohmann::json to_json(const OperatorSuiteReport& r);
nlohmann::json to_json(const IdentityReport& r);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};

// least squares of log y against log x
SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ResidualPoint {
    double epsilon = 0.0;
    double residual = 0.0;
};

// residual at rho = 0 on the trajectory through the transition centre
double residual_at_centre(double m, double v0, const PotentialSpec& pot, int order, std::size_t n = 2048,
                          double length = 100.0);

struct RateReport {
    std::vector<double> epsilons;
    std::vector<double> residuals;
    std::vector<double> remainders;  // empty when no PDE runs were made
    SlopeFit residual_slope;
    std::optional<SlopeFit> remainder_slope;
    int order = 0;
};

RateReport residual_scaling(const Scenario& s);
// residual slope plus the PDE remainder slope over the epsilon list (parallel runs)
RateReport convergence_study(const Scenario& s);
nlohmann::json to_json(const RateReport& r);

}  // namespace nls
