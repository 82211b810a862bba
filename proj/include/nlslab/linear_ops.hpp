#pragma once

#include <cstddef>

#include "nlslab/grid.hpp"

namespace nls {

enum class OpSign { Plus, Minus };

// L+ w = -w'' + c w - m Q_c^{m-1} w,  L- w = -w'' + c w - Q_c^{m-1} w  (Q_c centred at 0)
class LinearizedOperator {
public:
    LinearizedOperator(OpSign sign, double m, double c, const Grid& grid);

    RVec apply(const RVec& w) const;
    // Q_c' for Plus, Q_c for Minus
    const RVec& kernel() const { return kernel_; }
    // (c - d^2)^{-1}
    RVec precondition(const RVec& r) const;

    OpSign sign() const { return sign_; }
    double m() const { return m_; }
    double c() const { return c_; }
    const Grid& grid() const { return grid_; }

private:
    OpSign sign_;
    double m_, c_;
    Grid grid_;
    RVec well_;  // coefficient of the multiplicative term
    RVec kernel_;
};

struct SolveOptions {
    double tol = 1e-10;          // relative residual
    std::size_t max_iter = 0;    // 0 -> 10 n
    double ortho_tol = 1e-8;     // compatibility of the source with the kernel
};

struct SolveReport {
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

// Solve op(h) = source with <h, orthogonal_to> = 0 by preconditioned MINRES on the
// complement of the kernel. Throws "incompatible source" if the source has a kernel component.
RVec solve_constrained(const LinearizedOperator& op, const RVec& source, const RVec& orthogonal_to,
                       const SolveOptions& opts = {}, SolveReport* report = nullptr);

struct SpectralReport {
    double kernel_plus = 0.0;      // sup |L+ Q_c'|
    double kernel_minus = 0.0;     // sup |L- Q_c|
    double lambda_identity = 0.0;  // sup |L+ LambdaQ_c + Q_c|
    double rayleigh = 0.0;         // <phi, L+ phi>/<phi, phi>, phi = Q_c^{(m+1)/2}
    double eigen_residual = 0.0;   // sup |L+ phi - rayleigh phi| / sup |phi|
    double lambda_m = 0.0;         // -rayleigh
    double minus_gap = 0.0;        // informational: lowest value of L- on the complement of Q_c
};

SpectralReport spectral_checks(double m, double c, const Grid& grid);

}  // namespace nls
