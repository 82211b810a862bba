#pragma once

#include <array>

#include "nlslab/effective.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/linear_ops.hpp"
#include "nlslab/potential.hpp"

namespace nls {

struct ProfileConstants {
    double m = 3.0;
    double Q2 = 0.0;   // int Q^2
    double chi = 0.0;  // -int y^2 Q^2 / int Q^2
    double xi = 0.0;   // -(m+7)/(2(m-1)) + chi
    std::array<double, 4> alpha{0, 0, 0, 0};
    std::array<double, 2> beta{0, 0};
};

// chi, xi and the counterterm coefficients by quadrature on the reference grid
ProfileConstants profile_constants(double m);
SecondOrderCoefficients second_order_coefficients(double m);

// unit-scale (c = 1, no potential prefactor) profiles and sources
namespace unit {
double A1(const ProfileConstants& k, double z);
double dA1(const ProfileConstants& k, double z);
double B1(const ProfileConstants& k, double z);
double dB1(const ProfileConstants& k, double z);
// which = 1..4 for F2^I..F2^IV, 1..2 for G2^I, G2^II
double F2(const ProfileConstants& k, int which, double z);
double G2(const ProfileConstants& k, int which, double z);
}  // namespace unit

// frozen modulation parameters at one instant; profiles live on a grid centred at y = 0
struct ProfileState {
    double c = 1.0;
    double v = 0.0;
    double rho = 0.0;
    PotentialSpec pot;
};

struct SourcePair {
    RVec F;
    RVec G;
};

SourcePair first_order_sources(double m, const ProfileState& st, const Grid& g);

struct FirstOrderProfiles {
    RVec A1, B1;
    double xi = 0.0, chi = 0.0;
};

FirstOrderProfiles first_order_profiles(double m, const ProfileState& st, const Grid& g);
// the same object through the constrained solves
FirstOrderProfiles first_order_profiles_numeric(double m, const ProfileState& st, const Grid& g,
                                                const SolveOptions& opts = {});

struct SecondOrderSources {
    RVec F2t, G2t;
    double f3 = 0.0, f4 = 0.0;
    std::array<double, 4> alpha{0, 0, 0, 0};
    std::array<double, 2> beta{0, 0};
};

SecondOrderSources second_order_sources(double m, const ProfileState& st, const Grid& g);

struct SecondOrderProfiles {
    RVec A2, B2;
};

SecondOrderProfiles second_order_profiles(double m, const ProfileState& st, const Grid& g, const SolveOptions& opts = {});

struct CorrectionProfiles {
    int order = 1;
    RVec A1, B1, A2, B2;
    double xi = 0.0, chi = 0.0;
    std::array<double, 4> alphas{0, 0, 0, 0};
    std::array<double, 2> betas{0, 0};
};

CorrectionProfiles correction_profiles(int order, double m, const ProfileState& st, const Grid& g,
                                       const SolveOptions& opts = {});

struct AnsatzState {
    double m = 3.0;
    int order = 0;  // 0: soliton only, 1: + eps w1, 2: + eps^2 w2 (m >= 3)
    PotentialSpec pot;
    double c = 1.0, v = 0.0, rho = 0.0, gamma = 0.0;
    double int_c = 0.0, int_v2 = 0.0;  // Theta = int_c - int_v2/4 + v x/2 + gamma
};

AnsatzState ansatz_from_trajectory(double m, int order, const PotentialSpec& pot, const ExtendedState& y);

ComplexField assemble_approximate_solution(const AnsatzState& st, const Grid& g, const SolveOptions& opts = {});

// H^1 norm of i u_t + u_xx + a(eps x)|u|^{m-1}u for the ansatz driven by the effective model;
// u_t by centred differences at +-delta along the ODE flow with one Richardson step
double residual_norm(const EffectiveModel& model, const ExtendedState& y, const Grid& g, int order,
                     double delta = 1e-4);

}  // namespace nls
