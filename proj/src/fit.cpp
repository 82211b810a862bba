#include "nlslab/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlslab/profiles.hpp"

namespace nls {

double wrap_phase(double x) {
    const double tp = 2.0 * std::numbers::pi;
    double r = std::fmod(x + std::numbers::pi, tp);
    if (r < 0.0) r += tp;
    return r - std::numbers::pi;
}

namespace {

double amp_at(const SolitonParams& p, const PotentialSpec& pot) {
    return std::pow(eval_potential(pot, pot.epsilon * p.rho, 0), 1.0 / (p.m - 1.0));
}

// internal phase: Theta = v (x - rho)/2 + phi
struct Unknowns {
    double c, v, rho, phi;
};

Unknowns to_internal(const SolitonParams& p) { return {p.c, p.v, p.rho, p.gamma + 0.5 * p.v * p.rho}; }

SolitonParams to_params(double m, const Unknowns& q, const PotentialSpec& pot) {
    SolitonParams p;
    p.m = m;
    p.c = q.c;
    p.v = q.v;
    p.rho = q.rho;
    p.gamma = q.phi - 0.5 * q.v * q.rho;
    p.amp = amp_at(p, pot);
    return p;
}

struct Evaluation {
    Eigen::Vector4d g;
    Eigen::Matrix4d J;
};

Evaluation evaluate(const ComplexField& u, double m, const Unknowns& q, const PotentialSpec& pot, bool jacobian) {
    const Grid& g = u.grid;
    const double eps = pot.epsilon;
    const auto ar = eval_potential_all(pot, eps * q.rho);
    const double at = std::pow(ar[0], 1.0 / (m - 1.0));
    const double inv_at = 1.0 / at;
    const double dinv_at = -eps * ar[1] / ((m - 1.0) * ar[0] * at);
    const cplx I(0.0, 1.0);

    cplx P1 = 0.0, P2 = 0.0;
    cplx P1c = 0.0, P1v = 0.0, P1r = 0.0, P2c = 0.0, P2v = 0.0, P2r = 0.0;
    double N = 0.0, Nc = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i) - q.rho;
        const double Q = soliton_profile(m, q.c, y);
        if (Q == 0.0) continue;
        const double dQ = soliton_derivative(m, q.c, y);
        const cplx w = u.values[i] * std::polar(1.0, -(0.5 * q.v * y + q.phi));
        P1 += w * Q;
        P2 += w * dQ;
        N += Q * Q;
        if (!jacobian) continue;
        const double LQ = lambda_Q(m, q.c, y);
        const double dLQ = lambda_Q_derivative(m, q.c, y);
        const double ddQ = soliton_second_derivative(m, q.c, y);
        Nc += 2.0 * Q * LQ;
        P1c += w * LQ;
        P2c += w * dLQ;
        P1v += -0.5 * I * y * w * Q;
        P2v += -0.5 * I * y * w * dQ;
        P1r += 0.5 * I * q.v * w * Q - w * dQ;
        P2r += 0.5 * I * q.v * w * dQ - w * ddQ;
    }
    const double dx = g.dx;
    Evaluation e;
    const cplx g1 = (P1 - N * inv_at) * dx;
    const cplx g2 = P2 * dx;
    e.g << g1.real(), g1.imag(), g2.real(), g2.imag();
    if (jacobian) {
        const cplx c1 = (P1c - Nc * inv_at) * dx, c2 = P2c * dx;
        const cplx v1 = P1v * dx, v2 = P2v * dx;
        const cplx r1 = (P1r - N * dinv_at) * dx, r2 = P2r * dx;
        const cplx f1 = -I * P1 * dx, f2 = -I * P2 * dx;
        const cplx cols[4][2] = {{c1, c2}, {v1, v2}, {r1, r2}, {f1, f2}};
        for (int k = 0; k < 4; ++k) {
            e.J(0, k) = cols[k][0].real();
            e.J(1, k) = cols[k][0].imag();
            e.J(2, k) = cols[k][1].real();
            e.J(3, k) = cols[k][1].imag();
        }
    }
    return e;
}

std::string describe(const char* what, double r) {
    std::ostringstream s;
    s << "fit lost lock: " << what << " (residual " << r << ")";
    return s.str();
}

}  // namespace

ComplexField reference_profile(const SolitonParams& p_in, const PotentialSpec& pot, const Grid& g) {
    SolitonParams p = p_in;
    p.amp = amp_at(p, pot);
    return traveling_wave(p, g, 0.0);
}

std::vector<double> fit_projections(const ComplexField& u, const SolitonParams& p, const PotentialSpec& pot) {
    const auto e = evaluate(u, p.m, to_internal(p), pot, false);
    return {e.g[0], e.g[1], e.g[2], e.g[3]};
}

FitResult fit_modulation(const ComplexField& u, const SolitonParams& guess, const PotentialSpec& pot,
                         const FitOptions& opts) {
    const Grid& g = u.grid;
    if (g.dim != 1) throw std::invalid_argument("modulation fit is 1D");
    validate(guess);
    const double m = guess.m;
    const double unorm = l2_norm(g, u.values);
    if (!(unorm > 0.0)) throw std::invalid_argument("cannot fit a zero field");
    const double target = opts.tol * unorm;

    {
        ComplexField r;
        try {
            r = reference_profile(guess, pot, g);
        } catch (const std::domain_error&) {
            throw FitLostLock(describe("guess centre outside the safe region", std::numeric_limits<double>::infinity()),
                              std::numeric_limits<double>::infinity());
        }
        CVec d(g.n);
        for (std::size_t i = 0; i < g.n; ++i) d[i] = u.values[i] - r.values[i];
        const double dist = l2_norm(g, d), rn = l2_norm(g, r.values);
        if (dist > opts.basin * rn) throw FitLostLock(describe("guess outside the basin", dist / rn), dist / rn);
    }

    Unknowns q = to_internal(guess);
    Evaluation e = evaluate(u, m, q, pot, true);
    double res = e.g.cwiseAbs().maxCoeff();
    int it = 0;
    while (res >= target) {
        if (++it > opts.max_iter) throw FitLostLock(describe("no convergence", res), res);
        Eigen::FullPivLU<Eigen::Matrix4d> lu(e.J);
        if (!lu.isInvertible()) throw FitLostLock(describe("singular Jacobian", res), res);
        const Eigen::Vector4d step = lu.solve(-e.g);
        double lam = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            Unknowns t{q.c + lam * step[0], q.v + lam * step[1], q.rho + lam * step[2], q.phi + lam * step[3]};
            const double half = 0.5 * g.length;
            if (t.c > 0.0 && std::abs(t.rho) < half) {
                Evaluation et = evaluate(u, m, t, pot, true);
                const double rt = et.g.cwiseAbs().maxCoeff();
                if (std::isfinite(rt) && rt < res) {
                    q = t;
                    e = et;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!accepted) throw FitLostLock(describe("Newton diverged", res), res);
    }
    FitResult out;
    out.params = to_params(m, q, pot);
    out.residual = res;
    out.iterations = it;
    return out;
}

Tracker::Tracker(double m, const PotentialSpec& pot, const SolitonParams& init, const TrackOptions& opts)
    : m_(m), pot_(pot), init_(init), opts_(opts) {
    init_.m = m;
}

bool Tracker::add(double t, const ComplexField& u) {
    if (track_.truncated) return false;
    if (!track_.times.empty() && !(t > track_.times.back()))
        throw std::invalid_argument("track times must be strictly increasing");
    SolitonParams guess = init_;
    const std::size_t k = track_.params.size();
    if (k >= 1) {
        const SolitonParams& p = track_.params.back();
        const double dt = t - track_.times.back();
        guess = p;
        guess.rho = p.rho + p.v * dt;
        guess.gamma = p.gamma + (p.c - 0.25 * p.v * p.v) * dt;
        if (k >= 2) {
            const SolitonParams& o = track_.params[k - 2];
            const double r = dt / (track_.times.back() - track_.times[k - 2]);
            guess.c = p.c + r * (p.c - o.c);
            guess.v = p.v + r * (p.v - o.v);
            if (!(guess.c > 0.0)) guess.c = p.c;
        }
    }
    FitResult f;
    try {
        f = fit_modulation(u, guess, pot_, opts_.fit);
    } catch (const FitLostLock& e) {
        track_.truncated = true;
        track_.reason = std::string(e.what()) + " at t=" + std::to_string(t);
        return false;
    }
    SolitonParams p = f.params;
    p.gamma = guess.gamma + wrap_phase(p.gamma - guess.gamma);
    double rem = std::numeric_limits<double>::quiet_NaN();
    if (opts_.ansatz_order >= 0) {
        AnsatzState st;
        st.m = m_;
        st.order = opts_.ansatz_order;
        st.pot = pot_;
        st.c = p.c;
        st.v = p.v;
        st.rho = p.rho;
        st.gamma = p.gamma;
        const ComplexField a = assemble_approximate_solution(st, u.grid);
        CVec d(u.values.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = u.values[i] - a.values[i];
        rem = h1_norm(u.grid, d);
    }
    track_.times.push_back(t);
    track_.params.push_back(p);
    track_.fit_residuals.push_back(f.residual);
    track_.remainder_h1.push_back(rem);
    return true;
}

ModulationTrack track(const std::vector<double>& times, const std::vector<ComplexField>& snapshots,
                      const PotentialSpec& pot, const SolitonParams& init, const TrackOptions& opts) {
    if (times.size() != snapshots.size()) throw std::invalid_argument("times and snapshots differ in length");
    Tracker tr(init.m, pot, init, opts);
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!tr.add(times[i], snapshots[i])) break;
    return tr.track();
}

}  // namespace nls
