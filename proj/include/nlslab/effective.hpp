#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/potential.hpp"

namespace nls {

enum class EffectiveKind { Increasing1D, Decreasing1D, TwoD };

struct EffectiveState {
    double C = 1.0;
    double V = 0.0;
    double U = 0.0;
    double H = 0.0;
};

// second-order phase/position counterterms (m >= 3):
// f3 = (a_I + a_II V^2/C) a''/a + (a_III + a_IV V^2/C) a'^2/a^2,  f4 = (b_I a''/a + b_II a'^2/a^2) V/C
struct SecondOrderCoefficients {
    std::array<double, 4> alpha{0, 0, 0, 0};
    std::array<double, 2> beta{0, 0};
};

struct EffectiveModel {
    EffectiveKind kind = EffectiveKind::Increasing1D;
    double m = 3.0;
    PotentialSpec pot;
    double kappa = 0.0;  // 2D only: int Q^{m+1} / int Q^2
    std::optional<SecondOrderCoefficients> corrections;
};

// state plus the phase accumulators int C dt and int V^2 dt
struct ExtendedState {
    EffectiveState s;
    double int_c = 0.0;
    double int_v2 = 0.0;
};

struct EffectiveDerivative {
    double dC = 0, dV = 0, dU = 0, dH = 0, dIc = 0, dIv2 = 0;
};

void validate(const EffectiveModel& model);
EffectiveDerivative ode_rhs(const EffectiveModel& model, const ExtendedState& y);
// f1, f2 at the given state
std::array<double, 2> drift_coefficients(const EffectiveModel& model, const EffectiveState& s);
// f3, f4 at the given state (zero without corrections)
std::array<double, 2> counterterms(const EffectiveModel& model, const EffectiveState& s);

// V^2 - 4 lambda0 C (1D) or V^2 - alpha0 C (2D)
double effective_invariant(const EffectiveModel& model, const EffectiveState& s);

// one classical RK4 step (dt may be negative)
ExtendedState rk4_step(const EffectiveModel& model, const ExtendedState& y, double dt);
ExtendedState advance(const EffectiveModel& model, const ExtendedState& y, double dt, int substeps);

struct TrajectoryPoint {
    double t = 0.0;
    ExtendedState y;
    double invariant_drift = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    const TrajectoryPoint& back() const { return points.back(); }
};

// RK4 step resolving the transition with about 400 steps
double default_ode_step(double eps);

// classical RK4 from t0 to t1; throws if the invariant drifts by more than 1e-6
Trajectory integrate_effective(const EffectiveModel& model, const ExtendedState& init, double t0, double t1, double dt,
                               std::size_t stride = 1);

struct TurningPoint {
    int sign_changes = 0;
    double t = 0.0;
    EffectiveState s;
};

// locates V = 0 by bracketing on the stored trajectory and refining with RK4
TurningPoint find_turning_point(const EffectiveModel& model, const Trajectory& tr);

enum class OutcomeKind { Transmitted, Reflected, Critical };
std::string to_string(OutcomeKind k);

struct OutcomePrediction {
    OutcomeKind kind = OutcomeKind::Transmitted;
    double c_inf = 1.0;
    double v_inf = 0.0;
    double lambda_inf = 1.0;
    double c0 = 0.0;         // reflected: scaling at the turning point
    double threshold = 0.0;  // decreasing case: 4 lambda0 (1 - (a_plus/a_minus)^{4/(5-m)})
};

OutcomePrediction predict_outcome(double m, double v0, const PotentialSpec& pot);
// 2D transmission along x1 with transverse velocity preserved
OutcomePrediction predict_outcome_2d(double m, double v1, const PotentialSpec& pot, double kappa);
double alpha0_2d(double m, double kappa);

ComplexField galilean_boost(const ComplexField& u, double v2, double t);

struct RefractionAngles {
    double theta_minus = 0.0;
    double theta_plus = 0.0;
    double v_out[2] = {0.0, 0.0};
    double law_residual = 0.0;
};

RefractionAngles refraction_angles(const double v_in[2], double m, const PotentialSpec& pot, double kappa);

}  // namespace nls
