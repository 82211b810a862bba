#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/potential.hpp"
#include "nlslab/soliton.hpp"

namespace nls {

// raised on Newton divergence or a singular Jacobian
class FitLostLock : public std::runtime_error {
public:
    FitLostLock(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct FitOptions {
    double tol = 1e-10;  // relative to ||u||_{L2}
    int max_iter = 50;
    // reject guesses with ||u - R(guess)|| > basin * ||R(guess)||
    double basin = 0.3;
};

struct FitResult {
    SolitonParams params;  // amp = a(eps rho)^{1/(m-1)}; gamma is the phase at x = 0 of e^{i(vx/2 + gamma)}
    double residual = 0.0;  // max of the four projections
    int iterations = 0;
};

// Q_c(x - rho)/amp e^{i(v x/2 + gamma)} with amp taken from the potential at rho
ComplexField reference_profile(const SolitonParams& p, const PotentialSpec& pot, const Grid& g);

// the four real projections Re/Im int (u - R) Q_c(y) e^{-i Theta}, Re/Im int (u - R) Q_c'(y) e^{-i Theta}
std::vector<double> fit_projections(const ComplexField& u, const SolitonParams& p, const PotentialSpec& pot);

FitResult fit_modulation(const ComplexField& u, const SolitonParams& guess, const PotentialSpec& pot,
                         const FitOptions& opts = {});

struct ModulationTrack {
    std::vector<double> times;
    std::vector<SolitonParams> params;
    std::vector<double> fit_residuals;
    std::vector<double> remainder_h1;  // NaN when no ansatz order was requested
    bool truncated = false;
    std::string reason;
};

struct TrackOptions {
    FitOptions fit;
    int ansatz_order = -1;  // -1 skips the remainder report
};

// sequential warm-started fits; gamma unwrapped, guesses extrapolated from the last two fits
class Tracker {
public:
    Tracker(double m, const PotentialSpec& pot, const SolitonParams& init, const TrackOptions& opts = {});

    // returns false once lock is lost; later calls are ignored
    bool add(double t, const ComplexField& u);
    const ModulationTrack& track() const { return track_; }

private:
    double m_;
    PotentialSpec pot_;
    SolitonParams init_;
    TrackOptions opts_;
    ModulationTrack track_;
};

ModulationTrack track(const std::vector<double>& times, const std::vector<ComplexField>& snapshots,
                      const PotentialSpec& pot, const SolitonParams& init, const TrackOptions& opts = {});

double wrap_phase(double x);

}  // namespace nls
