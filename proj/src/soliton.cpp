#include "nlslab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nls {

ScalingExponents scaling_exponents(double m) {
    if (!(m > 1.0 && m < 5.0)) throw std::invalid_argument("exponent m must lie in (1,5)");
    ScalingExponents e;
    e.theta = 1.0 / (m - 1.0) - 0.25;
    e.lambda0 = (5.0 - m) / (m + 3.0);
    e.p_m = m < 3.0 ? 1 : 2;
    return e;
}

namespace {

double log_cosh(double z) {
    const double a = std::abs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// unit-scale Q
double q1(double m, double x) {
    const double kappa = 1.0 / (m - 1.0);
    const double z = 0.5 * (m - 1.0) * x;
    return std::exp(kappa * (std::log(0.5 * (m + 1.0)) - 2.0 * log_cosh(z)));
}

}  // namespace

double soliton_profile(double m, double c, double x) {
    return std::pow(c, 1.0 / (m - 1.0)) * q1(m, std::sqrt(c) * x);
}

double soliton_derivative(double m, double c, double x) {
    const double sc = std::sqrt(c);
    const double z = sc * x;
    return -std::pow(c, 1.0 / (m - 1.0) + 0.5) * std::tanh(0.5 * (m - 1.0) * z) * q1(m, z);
}

double soliton_second_derivative(double m, double c, double x) {
    const double q = soliton_profile(m, c, x);
    return c * q - std::pow(q, m);
}

double lambda_Q(double m, double c, double x) {
    return (soliton_profile(m, c, x) / (m - 1.0) + 0.5 * x * soliton_derivative(m, c, x)) / c;
}

double lambda_Q_derivative(double m, double c, double x) {
    const double kappa = 1.0 / (m - 1.0);
    return ((kappa + 0.5) * soliton_derivative(m, c, x) + 0.5 * x * soliton_second_derivative(m, c, x)) / c;
}

double interaction_time(double v0, double eps) {
    if (!(v0 > 0.0)) throw std::invalid_argument("interaction time needs v0 > 0");
    if (!(eps > 0.0)) throw std::invalid_argument("interaction time needs eps > 0");
    return std::pow(eps, -1.0 - 0.01) / v0;
}

void validate(const SolitonParams& p) {
    if (!(p.m >= 2.0 && p.m < 5.0)) throw std::invalid_argument("1D exponent m must lie in [2,5)");
    if (!(p.c > 0.0)) throw std::invalid_argument("soliton scaling c must be positive");
    if (!(p.amp > 0.0)) throw std::invalid_argument("soliton amplitude divisor must be positive");
}

void validate(const SolitonParams2D& p) {
    if (!(p.m >= 2.0 && p.m < 3.0)) throw std::invalid_argument("2D exponent m must lie in [2,3)");
    if (!(p.c > 0.0)) throw std::invalid_argument("soliton scaling c must be positive");
    if (!(p.amp > 0.0)) throw std::invalid_argument("soliton amplitude divisor must be positive");
}

void check_boundary_margin(const Grid& g, double centre, double c) {
    const double margin = 10.0 / std::sqrt(c);
    const double half = 0.5 * g.length;
    if (centre - margin < -half || centre + margin > half)
        throw std::domain_error("soliton within 10 e-folds of the boundary (centre " + std::to_string(centre) + ")");
}

ComplexField traveling_wave(const SolitonParams& p, const Grid& g, double t) {
    validate(p);
    if (g.dim != 1) throw std::invalid_argument("traveling_wave needs a 1D grid");
    const double centre = p.rho + p.v * t;
    check_boundary_margin(g, centre, p.c);
    ComplexField f{g, CVec(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        const double th = p.c * t + 0.5 * p.v * x - 0.25 * p.v * p.v * t + p.gamma;
        f.values[i] = std::polar(soliton_profile(p.m, p.c, x - centre) / p.amp, th);
    }
    return f;
}

GroundState2D ground_state_2d(double m, const Grid& g, double c, double tol, int max_iter) {
    if (g.dim != 2) throw std::invalid_argument("ground_state_2d needs a 2D grid");
    if (!(m >= 2.0 && m < 3.0)) throw std::invalid_argument("2D exponent m must lie in [2,3)");
    if (!(c > 0.0)) throw std::invalid_argument("scaling c must be positive");
    const std::size_t n = g.n;
    const std::size_t N = g.size();
    RVec symbol(N);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) symbol[i * n + j] = c + g.k(i) * g.k(i) + g.k(j) * g.k(j);

    CVec q(N);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double r2 = g.x(i) * g.x(i) + g.x(j) * g.x(j);
            q[i * n + j] = std::exp(-r2);
        }

    const double gexp = m / (m - 1.0);
    auto nonlin = [&](const CVec& u) {
        CVec out(N);
        for (std::size_t i = 0; i < N; ++i) {
            const double v = u[i].real();
            out[i] = std::pow(std::abs(v), m - 1.0) * v;
        }
        return out;
    };
    auto residual_of = [&](const CVec& u) {
        CVec lap = laplacian(g, u);
        CVec nl = nonlin(u);
        RVec r(N);
        for (std::size_t i = 0; i < N; ++i) r[i] = lap[i].real() - c * u[i].real() + nl[i].real();
        return l2_norm(g, r);
    };

    GroundState2D out;
    out.grid = g;
    out.m = m;
    out.c = c;
    double res = residual_of(q);
    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        CVec qh = q;
        fft_forward(g, qh);
        CVec nh = nonlin(q);
        fft_forward(g, nh);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            num += symbol[i] * std::norm(qh[i]);
            den += (std::conj(qh[i]) * nh[i]).real();
        }
        if (!(den > 0.0)) throw std::runtime_error("Petviashvili iteration degenerated");
        const double s = std::pow(num / den, gexp);
        for (std::size_t i = 0; i < N; ++i) qh[i] = s * nh[i] / symbol[i];
        fft_backward(g, qh);
        for (auto& z : qh) z = z.real();
        q.swap(qh);
        const double prev = res;
        res = residual_of(q);
        // stagnation at roundoff level
        if (res < 1e3 * tol && std::abs(prev - res) < 1e-3 * res) break;
    }
    out.iterations = it;
    out.residual = res;
    out.Q = real_part(q);
    if (!(res <= 1e-8)) throw std::runtime_error("Petviashvili did not converge, residual " + std::to_string(res));
    return out;
}

ComplexField traveling_wave_2d(const SolitonParams2D& p, const GroundState2D& q, double t) {
    validate(p);
    if (std::abs(p.c - q.c) > 1e-14 * q.c || p.m != q.m)
        throw std::invalid_argument("ground state does not match the soliton parameters");
    const Grid& g = q.grid;
    const double cx = p.rho[0] + p.v[0] * t;
    const double cy = p.rho[1] + p.v[1] * t;
    check_boundary_margin(g, cx, p.c);
    check_boundary_margin(g, cy, p.c);
    CVec f = to_complex(q.Q);
    f = spectral_shift(g, f, cx, 0);
    f = spectral_shift(g, f, cy, 1);
    const std::size_t n = g.n;
    const double v2 = p.v[0] * p.v[0] + p.v[1] * p.v[1];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double th = p.c * t + 0.5 * (p.v[0] * g.x(i) + p.v[1] * g.x(j)) - 0.25 * v2 * t + p.gamma;
            f[i * n + j] = f[i * n + j].real() / p.amp * std::polar(1.0, th);
        }
    return {g, f};
}

Pohozaev2D pohozaev_2d(const GroundState2D& q) {
    const Grid& g = q.grid;
    const double cell = g.dx * g.dx;
    const CVec f = to_complex(q.Q);
    const CVec d0 = derivative(g, f, 0), d1 = derivative(g, f, 1);
    Pohozaev2D p;
    for (std::size_t i = 0; i < q.Q.size(); ++i) {
        const double v = q.Q[i];
        p.mass += v * v;
        p.grad2 += std::norm(d0[i]) + std::norm(d1[i]);
        p.power += std::pow(std::abs(v), q.m + 1.0);
    }
    p.mass *= cell;
    p.grad2 *= cell;
    p.power *= cell;
    p.kappa = p.power / p.mass;
    p.rel_err = std::abs(q.c * p.mass - 2.0 * p.power / (q.m + 1.0)) / (q.c * p.mass);
    p.virial_err = std::abs(p.grad2 + q.c * p.mass - p.power) / p.power;
    return p;
}

Grid quadrature_grid() { return make_grid(8192, 80.0, 1); }

SolitonIntegrals soliton_integrals(double m) {
    const Grid g = quadrature_grid();
    SolitonIntegrals s;
    s.m = m;
    double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        const double q = soliton_profile(m, 1.0, y);
        const double dq = soliton_derivative(m, 1.0, y);
        const double qm1 = std::pow(q, m + 1.0);
        const double y2 = y * y;
        acc[0] += q;
        acc[1] += q * q;
        acc[2] += dq * dq;
        acc[3] += qm1;
        acc[4] += y2 * q * q;
        acc[5] += y2 * y2 * q * q;
        acc[6] += y2 * qm1;
        acc[7] += y2 * y2 * qm1;
        acc[8] += y2 * dq * dq;
    }
    for (double& a : acc) a *= g.dx;
    s.Q1 = acc[0];
    s.Q2 = acc[1];
    s.dQ2 = acc[2];
    s.Qm1 = acc[3];
    s.y2Q2 = acc[4];
    s.y4Q2 = acc[5];
    s.y2Qm1 = acc[6];
    s.y4Qm1 = acc[7];
    s.y2dQ2 = acc[8];
    return s;
}

IdentityReport check_identities(double m, double c, double tol) {
    const auto ex = scaling_exponents(m);
    const double th = ex.theta;
    const SolitonIntegrals I = soliton_integrals(m);
    const Grid g = quadrature_grid();

    double qc1 = 0, qc2 = 0, qcm1 = 0, lqq = 0, lq = 0, dqc2 = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        const double q = soliton_profile(m, c, y);
        const double l = lambda_Q(m, c, y);
        const double dq = soliton_derivative(m, c, y);
        qc1 += q;
        qc2 += q * q;
        qcm1 += std::pow(q, m + 1.0);
        lqq += l * q;
        lq += l;
        dqc2 += dq * dq;
    }
    qc1 *= g.dx;
    qc2 *= g.dx;
    qcm1 *= g.dx;
    lqq *= g.dx;
    lq *= g.dx;
    dqc2 *= g.dx;

    IdentityReport rep;
    rep.m = m;
    rep.c = c;
    auto add = [&](const std::string& name, double lhs, double rhs, double scale, bool required) {
        IdentityCheck ch;
        ch.name = name;
        ch.lhs = lhs;
        ch.rhs = rhs;
        ch.rel_err = std::abs(lhs - rhs) / std::max(std::abs(rhs), scale);
        ch.required = required;
        ch.pass = ch.rel_err < tol;
        rep.checks.push_back(ch);
    };
    const double e1 = 0.5 * I.dQ2 - I.Qm1 / (m + 1.0);
    add("energy E1[Q] = -lambda0/2 int Q^2", e1, -0.5 * ex.lambda0 * I.Q2, 0.0, true);
    add("int Q'^2 = (m-1)/(m+3) int Q^2", I.dQ2, (m - 1.0) / (m + 3.0) * I.Q2, 0.0, true);
    add("int Q_c^{m+1} = 2(m+1)c^{2theta+1}/(m+3) int Q^2", qcm1,
        2.0 * (m + 1.0) * std::pow(c, 2.0 * th + 1.0) / (m + 3.0) * I.Q2, 0.0, true);
    add("int Q_c^2 = c^{2theta} int Q^2", qc2, std::pow(c, 2.0 * th) * I.Q2, 0.0, true);
    add("int LambdaQ_c Q_c = theta c^{2theta-1} int Q^2", lqq, th * std::pow(c, 2.0 * th - 1.0) * I.Q2, 0.0, true);
    add("int y^2 Q^{m+1} = (m+1)/(m+3) (2 int y^2Q^2 - int Q^2)", I.y2Qm1,
        (m + 1.0) / (m + 3.0) * (2.0 * I.y2Q2 - I.Q2), 0.0, true);
    add("int y^4 Q^{m+1} = (m+1)/(m+3) (2 int y^4Q^2 - 6 int y^2Q^2)", I.y4Qm1,
        (m + 1.0) / (m + 3.0) * (2.0 * I.y4Q2 - 6.0 * I.y2Q2), 0.0, true);
    add("int y^2 Q'^2 = 2/(m+3) int Q^2 + (m-1)/(m+3) int y^2Q^2", I.y2dQ2,
        2.0 / (m + 3.0) * I.Q2 + (m - 1.0) / (m + 3.0) * I.y2Q2, 0.0, true);
    add("int Q_c = c^{theta-1/4} int Q", qc1, std::pow(c, th - 0.25) * I.Q1, 0.0, false);
    add("int LambdaQ_c = (theta-1/4) c^{theta-5/4} int Q", lq, (th - 0.25) * std::pow(c, th - 1.25) * I.Q1,
        std::pow(c, th - 1.25) * I.Q1, false);
    const double e1c = 0.5 * dqc2 - qcm1 / (m + 1.0);
    add("E1[Q_c] = c^{2theta+1} E1[Q]", e1c, std::pow(c, 2.0 * th + 1.0) * e1, 0.0, false);

    rep.pass = true;
    for (const auto& ch : rep.checks) {
        if (!ch.required) continue;
        rep.max_rel_err = std::max(rep.max_rel_err, ch.rel_err);
        rep.pass = rep.pass && ch.pass;
    }
    return rep;
}

}  // namespace nls
