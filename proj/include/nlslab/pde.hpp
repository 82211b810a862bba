#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/potential.hpp"

namespace nls {

struct SolverConfig {
    double dt = 1e-3;
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t observer_stride = 100;
    double m = 3.0;
    PotentialSpec pot;
    // abort when the peak comes within 10 e-folds of the boundary (1D)
    bool boundary_guard = true;
};

void validate(const SolverConfig& cfg);

struct Observables {
    double mass = 0.0;
    double energy = 0.0;
    double momentum[2] = {0.0, 0.0};
};

Observables observables(const ComplexField& u, const PotentialSpec& pot, double m);
// (eps/(m+1)) int a'(eps x1)|u|^{m+1}
double momentum_law_rhs(const ComplexField& u, const PotentialSpec& pot, double m);

struct Diagnostics {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> momentum;    // x1 component
    std::vector<double> momentum2;   // x2 component (2D)
    std::vector<double> law_rhs;
    std::vector<double> tail_fraction;
    // filled by momentum_law_residual, aligned with times (NaN at the ends)
    std::vector<double> dPdt;
    std::vector<double> law_residual;
};

struct MomentumLawReport {
    double min_dPdt = 0.0;
    double max_abs_dPdt = 0.0;
    double max_residual = 0.0;
};

// centred differences of P against the stored right-hand side
MomentumLawReport momentum_law_residual(Diagnostics& diag);

// Strang splitting with exact nonlinear phase and exact linear propagator.
// Not safe to share one instance between threads.
class SplitStepSolver {
public:
    SplitStepSolver(const Grid& g, const SolverConfig& cfg);

    void half_nonlinear(CVec& u) const;
    void full_nonlinear(CVec& u) const;
    void linear(CVec& u) const;
    // one full Strang step
    void step(CVec& u) const;
    // n steps with the inner nonlinear half steps fused
    void steps(CVec& u, std::size_t n) const;

    const Grid& grid() const { return grid_; }
    double dt() const { return dt_; }

private:
    Grid grid_;
    double dt_;
    double m_;
    RVec coef_;        // a(eps x1)
    CVec propagator_;  // exp(-i |k|^2 dt)
    mutable long double gain_ = 1.0L;  // pending roundoff correction of the linear steps
};

ComplexField step_strang(const ComplexField& u, const SolverConfig& cfg);

struct EvolveResult {
    ComplexField field;
    Diagnostics diag;
    bool aborted = false;
    std::string reason;
    std::size_t steps_taken = 0;
};

using Observer = std::function<void(double t, const ComplexField& u)>;

EvolveResult evolve(const ComplexField& u0, const SolverConfig& cfg, const Observer& observer = {});

}  // namespace nls
