#include "nlslab/linear_ops.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nlslab/soliton.hpp"

namespace nls {

LinearizedOperator::LinearizedOperator(OpSign sign, double m, double c, const Grid& grid)
    : sign_(sign), m_(m), c_(c), grid_(grid) {
    if (grid.dim != 1) throw std::invalid_argument("linearized operators are 1D");
    if (!(c > 0.0)) throw std::invalid_argument("scaling c must be positive");
    const double coef = sign == OpSign::Plus ? m : 1.0;
    well_.resize(grid.n);
    kernel_.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double q = soliton_profile(m, c, x);
        well_[i] = coef * std::pow(q, m - 1.0);
        kernel_[i] = sign == OpSign::Plus ? soliton_derivative(m, c, x) : q;
    }
}

RVec LinearizedOperator::apply(const RVec& w) const {
    if (w.size() != grid_.n) throw std::invalid_argument("field does not live on the operator grid");
    RVec out = second_derivative(grid_, w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] + (c_ - well_[i]) * w[i];
    return out;
}

RVec LinearizedOperator::precondition(const RVec& r) const {
    CVec h = to_complex(r);
    fft_forward(grid_, h);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] /= c_ + grid_.k(i) * grid_.k(i);
    fft_backward(grid_, h);
    return real_part(h);
}

namespace {

double dot(const RVec& a, const RVec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double a, const RVec& x, RVec& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

struct Projector {
    const RVec& k;
    double kk;
    explicit Projector(const RVec& kern) : k(kern), kk(dot(kern, kern)) {}
    void operator()(RVec& v) const { axpy(-dot(v, k) / kk, k, v); }
};

enum class Parity { None, Even, Odd };

}  // namespace

RVec solve_constrained(const LinearizedOperator& op, const RVec& source, const RVec& orthogonal_to,
                       const SolveOptions& opts, SolveReport* report) {
    const Grid& g = op.grid();
    if (source.size() != g.n || orthogonal_to.size() != g.n) throw std::invalid_argument("field does not live on the operator grid");
    const RVec& kern = op.kernel();
    const double snorm = std::sqrt(dot(source, source));
    const double knorm = std::sqrt(dot(kern, kern));
    if (snorm == 0.0) return RVec(g.n, 0.0);
    if (std::abs(dot(source, kern)) > opts.ortho_tol * snorm * knorm) throw std::domain_error("incompatible source");

    Parity par = Parity::None;
    RVec b = source;
    {
        RVec e = even_part(g, source), o = odd_part(g, source);
        const double ne = std::sqrt(dot(e, e)), no = std::sqrt(dot(o, o));
        if (no <= 1e-8 * snorm) {
            par = Parity::Even;
            b = e;
        } else if (ne <= 1e-8 * snorm) {
            par = Parity::Odd;
            b = o;
        }
    }
    auto symmetrize = [&](RVec& v) {
        if (par == Parity::Even) v = even_part(g, v);
        if (par == Parity::Odd) v = odd_part(g, v);
    };

    Projector proj(kern);
    proj(b);
    const double bnorm = std::sqrt(dot(b, b));
    auto A = [&](const RVec& v) {
        RVec w = v;
        proj(w);
        w = op.apply(w);
        proj(w);
        symmetrize(w);
        return w;
    };
    auto Minv = [&](const RVec& v) {
        RVec w = v;
        proj(w);
        w = op.precondition(w);
        proj(w);
        symmetrize(w);
        return w;
    };

    const std::size_t n = g.n;
    const std::size_t max_iter = opts.max_iter ? opts.max_iter : 10 * n;
    RVec x(n, 0.0);
    RVec r1 = b;
    RVec y = Minv(r1);
    double beta1 = dot(r1, y);
    if (!(beta1 > 0.0)) throw std::runtime_error("preconditioner is not positive definite");
    beta1 = std::sqrt(beta1);
    double beta = beta1, oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
    RVec r2 = r1, w(n, 0.0), w1(n, 0.0), w2(n, 0.0), v(n);
    double rel = 1.0;
    std::size_t it = 0;
    auto true_residual = [&]() {
        RVec r = A(x);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return std::sqrt(dot(r, r)) / bnorm;
    };
    while (it < max_iter) {
        ++it;
        const double s = 1.0 / beta;
        for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
        y = A(v);
        if (it >= 2) axpy(-beta / oldb, r1, y);
        const double alfa = dot(v, y);
        axpy(-alfa / beta, r2, y);
        r1.swap(r2);
        r2 = y;
        y = Minv(r2);
        oldb = beta;
        beta = dot(r2, y);
        // the Lanczos basis has lost orthogonality past the attainable accuracy
        if (beta < 0.0) {
            rel = true_residual();
            break;
        }
        beta = std::sqrt(beta);
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gamma = std::max(std::hypot(gbar, beta), 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        w1.swap(w2);
        w2.swap(w);
        for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        axpy(phi, w, x);
        // phibar tracks the preconditioned residual; confirm with the true one
        if (phibar / beta1 < 0.1 * opts.tol || beta == 0.0) {
            rel = true_residual();
            // stagnation: the recurrence is far below what the true residual can show
            if (rel < opts.tol || beta == 0.0 || phibar / beta1 < 1e-6 * opts.tol) break;
        }
    }
    if (it >= max_iter) rel = true_residual();
    if (!(rel < opts.tol)) {
        std::ostringstream msg;
        msg << "constrained solve did not converge, relative residual " << std::scientific << rel << " (tol " << opts.tol << ")";
        throw std::runtime_error(msg.str());
    }

    proj(x);
    symmetrize(x);
    const double ko = dot(kern, orthogonal_to);
    if (std::abs(ko) < 1e-14 * knorm * std::sqrt(dot(orthogonal_to, orthogonal_to)))
        throw std::invalid_argument("orthogonality constraint does not fix the kernel component");
    axpy(-dot(x, orthogonal_to) / ko, kern, x);
    if (report) {
        report->iterations = it;
        report->rel_residual = rel;
    }
    return x;
}

SpectralReport spectral_checks(double m, double c, const Grid& grid) {
    LinearizedOperator Lp(OpSign::Plus, m, c, grid), Lm(OpSign::Minus, m, c, grid);
    SpectralReport rep;
    rep.kernel_plus = sup_norm(Lp.apply(Lp.kernel()));
    rep.kernel_minus = sup_norm(Lm.apply(Lm.kernel()));
    RVec lq(grid.n), q(grid.n), phi(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        lq[i] = lambda_Q(m, c, x);
        q[i] = soliton_profile(m, c, x);
        phi[i] = std::pow(q[i], 0.5 * (m + 1.0));
    }
    RVec t = Lp.apply(lq);
    for (std::size_t i = 0; i < grid.n; ++i) t[i] += q[i];
    rep.lambda_identity = sup_norm(t);
    RVec lphi = Lp.apply(phi);
    rep.rayleigh = dot(phi, lphi) / dot(phi, phi);
    rep.lambda_m = -rep.rayleigh;
    for (std::size_t i = 0; i < grid.n; ++i) lphi[i] -= rep.rayleigh * phi[i];
    rep.eigen_residual = sup_norm(lphi) / sup_norm(phi);

    // a few inverse-iteration sweeps of L- on the complement of Q_c, starting from y Q_c + Q_c''
    RVec u(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) u[i] = grid.x(i) * q[i] + soliton_second_derivative(m, c, grid.x(i));
    Projector proj(Lm.kernel());
    proj(u);
    SolveOptions o;
    o.tol = 1e-8;
    for (int s = 0; s < 8; ++s) {
        const double nu = std::sqrt(dot(u, u));
        for (double& z : u) z /= nu;
        u = solve_constrained(Lm, u, Lm.kernel(), o);
    }
    const RVec lu = Lm.apply(u);
    rep.minus_gap = dot(u, lu) / dot(u, u);
    return rep;
}

}  // namespace nls
