#pragma once

#include <string>
#include <vector>

#include "nlslab/grid.hpp"

namespace nls {

struct ScalingExponents {
    double theta = 0.0;    // 1/(m-1) - 1/4
    double lambda0 = 0.0;  // (5-m)/(m+3)
    int p_m = 1;
};

ScalingExponents scaling_exponents(double m);

// Q_c(x), its derivatives and the scaling derivative d/dc Q_c
double soliton_profile(double m, double c, double x);
double soliton_derivative(double m, double c, double x);
double soliton_second_derivative(double m, double c, double x);
double lambda_Q(double m, double c, double x);
// d/dx of lambda_Q
double lambda_Q_derivative(double m, double c, double x);

// interaction time (1/v0) eps^{-1-1/100}
double interaction_time(double v0, double eps);

struct SolitonParams {
    double m = 3.0;
    double c = 1.0;
    double v = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    double amp = 1.0;
};

struct SolitonParams2D {
    double m = 2.0;
    double c = 1.0;
    double v[2] = {0.0, 0.0};
    double rho[2] = {0.0, 0.0};
    double gamma = 0.0;
    double amp = 1.0;
};

void validate(const SolitonParams& p);
void validate(const SolitonParams2D& p);

// throws when the soliton centre sits within 10 e-folds of the boundary
void check_boundary_margin(const Grid& g, double centre, double c);

// (Q_c(y)/amp) e^{i(ct + vx/2 - v^2 t/4 + gamma)}, y = x - rho - v t
ComplexField traveling_wave(const SolitonParams& p, const Grid& g, double t);

struct GroundState2D {
    Grid grid;
    double m = 2.0;
    double c = 1.0;
    RVec Q;
    int iterations = 0;
    double residual = 0.0;  // L2 norm of Laplacian(Q) - cQ + Q^m
};

// Petviashvili iteration for Laplacian(Q) - cQ + Q^m = 0, centred at the origin
GroundState2D ground_state_2d(double m, const Grid& g, double c = 1.0, double tol = 1e-11, int max_iter = 2000);

// ground state (same c) translated to rho + v t with the Galilean phase
ComplexField traveling_wave_2d(const SolitonParams2D& p, const GroundState2D& q, double t);

struct Pohozaev2D {
    double mass = 0.0;      // int Q^2
    double grad2 = 0.0;     // int |grad Q|^2
    double power = 0.0;     // int Q^{m+1}
    double kappa = 0.0;     // power / mass
    double rel_err = 0.0;   // |c int Q^2 - 2/(m+1) int Q^{m+1}| / (c int Q^2)
    double virial_err = 0.0;  // |int |grad Q|^2 + c int Q^2 - int Q^{m+1}| / int Q^{m+1}
};

Pohozaev2D pohozaev_2d(const GroundState2D& q);

struct SolitonIntegrals {
    double m = 0.0;
    double Q1 = 0.0;      // int Q
    double Q2 = 0.0;      // int Q^2
    double dQ2 = 0.0;     // int Q'^2
    double Qm1 = 0.0;     // int Q^{m+1}
    double y2Q2 = 0.0;
    double y4Q2 = 0.0;
    double y2Qm1 = 0.0;
    double y4Qm1 = 0.0;
    double y2dQ2 = 0.0;
};

// reference quadrature grid for integrals of Q (L = 80, n = 8192)
Grid quadrature_grid();
SolitonIntegrals soliton_integrals(double m);

struct IdentityCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_err = 0.0;
    bool required = true;
    bool pass = false;
};

struct IdentityReport {
    double m = 0.0;
    double c = 0.0;
    std::vector<IdentityCheck> checks;
    double max_rel_err = 0.0;  // over required checks
    bool pass = false;
};

IdentityReport check_identities(double m, double c = 4.0, double tol = 1e-8);

}  // namespace nls
