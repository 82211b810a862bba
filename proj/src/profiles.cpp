#include "nlslab/profiles.hpp"

#include <cmath>
#include <stdexcept>

#include "nlslab/soliton.hpp"

namespace nls {

namespace unit {

namespace {
double q(const ProfileConstants& k, double z) { return soliton_profile(k.m, 1.0, z); }
double dq(const ProfileConstants& k, double z) { return soliton_derivative(k.m, 1.0, z); }
double ddq(const ProfileConstants& k, double z) { return soliton_second_derivative(k.m, 1.0, z); }
}  // namespace

double A1(const ProfileConstants& k, double z) {
    return (z * (z * dq(k, z) - q(k, z)) + k.xi * dq(k, z)) / (k.m + 3.0);
}

double dA1(const ProfileConstants& k, double z) {
    return (z * dq(k, z) + z * z * ddq(k, z) - q(k, z) + k.xi * ddq(k, z)) / (k.m + 3.0);
}

double B1(const ProfileConstants& k, double z) { return -(z * z + k.chi) * q(k, z) / (2.0 * (5.0 - k.m)); }

double dB1(const ProfileConstants& k, double z) {
    return -(2.0 * z * q(k, z) + (z * z + k.chi) * dq(k, z)) / (2.0 * (5.0 - k.m));
}

double F2(const ProfileConstants& k, int which, double z) {
    const double m = k.m;
    const double Q = q(k, z);
    const double a1 = A1(k, z), b1 = B1(k, z);
    switch (which) {
        case 1: return 0.5 * z * z * std::pow(Q, m);
        case 2: return -b1;
        case 3:
            return (m * std::pow(Q, m - 1.0) - 4.0 / (m + 3.0)) * z * a1 +
                   0.5 * m * (m - 1.0) * std::pow(Q, m - 2.0) * a1 * a1 - 8.0 / (m + 3.0) * b1;
        case 4:
            return 0.5 * (m - 1.0) * std::pow(Q, m - 2.0) * b1 * b1 - 2.0 / (5.0 - m) * z * dB1(k, z) -
                   (m - 8.0) / (5.0 - m) * b1;
        default: throw std::invalid_argument("F2 index must be 1..4");
    }
}

double G2(const ProfileConstants& k, int which, double z) {
    const double m = k.m;
    const double Q = q(k, z);
    const double a1 = A1(k, z), b1 = B1(k, z);
    switch (which) {
        case 1: return a1;
        case 2:
            return (m - 6.0) / (5.0 - m) * a1 + (std::pow(Q, m - 1.0) - 4.0 / (m + 3.0)) * z * b1 +
                   2.0 / (5.0 - m) * z * dA1(k, z) + (m - 1.0) * std::pow(Q, m - 2.0) * a1 * b1;
        default: throw std::invalid_argument("G2 index must be 1..2");
    }
}

}  // namespace unit

ProfileConstants profile_constants(double m) {
    if (!(m >= 2.0 && m < 5.0)) throw std::invalid_argument("profiles need m in [2,5)");
    ProfileConstants k;
    k.m = m;
    const Grid g = quadrature_grid();
    double q2 = 0.0, y2q2 = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        const double Q = soliton_profile(m, 1.0, y);
        q2 += Q * Q;
        y2q2 += y * y * Q * Q;
    }
    k.Q2 = q2 * g.dx;
    k.chi = -y2q2 / q2;
    k.xi = -(m + 7.0) / (2.0 * (m - 1.0)) + k.chi;
    const double theta = scaling_exponents(m).theta;
    std::array<double, 4> fa{0, 0, 0, 0};
    std::array<double, 2> gb{0, 0};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        const double lq = lambda_Q(m, 1.0, y);
        const double yq = y * soliton_profile(m, 1.0, y);
        for (int j = 0; j < 4; ++j) fa[j] += lq * unit::F2(k, j + 1, y);
        for (int j = 0; j < 2; ++j) gb[j] += yq * unit::G2(k, j + 1, y);
    }
    for (int j = 0; j < 4; ++j) k.alpha[j] = fa[j] * g.dx / (theta * k.Q2);
    for (int j = 0; j < 2; ++j) k.beta[j] = -2.0 * gb[j] * g.dx / k.Q2;
    return k;
}

SecondOrderCoefficients second_order_coefficients(double m) {
    const auto k = profile_constants(m);
    SecondOrderCoefficients s;
    s.alpha = k.alpha;
    s.beta = k.beta;
    return s;
}

namespace {

struct Prefactors {
    double a, a1, a2;
    double at;   // a^{1/(m-1)}
    double p1;   // a'/at^m
    double p2;   // a''/at^m
    double p11;  // a'^2/at^{2m-1}
};

Prefactors prefactors(double m, const ProfileState& st) {
    const auto a = eval_potential_all(st.pot, st.pot.epsilon * st.rho);
    Prefactors p;
    p.a = a[0];
    p.a1 = a[1];
    p.a2 = a[2];
    p.at = std::pow(a[0], 1.0 / (m - 1.0));
    p.p1 = a[1] / std::pow(p.at, m);
    p.p2 = a[2] / std::pow(p.at, m);
    p.p11 = a[1] * a[1] / std::pow(p.at, 2.0 * m - 1.0);
    return p;
}

void check_state(double m, const ProfileState& st, const Grid& g) {
    if (g.dim != 1) throw std::invalid_argument("correction profiles are 1D");
    if (!(m >= 2.0 && m < 5.0)) throw std::invalid_argument("profiles need m in [2,5)");
    if (!(st.c > 0.0)) throw std::invalid_argument("scaling c must be positive");
}

}  // namespace

SourcePair first_order_sources(double m, const ProfileState& st, const Grid& g) {
    check_state(m, st, g);
    const auto p = prefactors(m, st);
    const double c = st.c;
    SourcePair s{RVec(g.n), RVec(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        const double Q = soliton_profile(m, c, y);
        s.F[i] = p.p1 * y * Q * (std::pow(Q, m - 1.0) - 4.0 * c / (m + 3.0));
        s.G[i] = p.p1 * st.v * (4.0 * c / (5.0 - m) * lambda_Q(m, c, y) - Q / (m - 1.0));
    }
    return s;
}

FirstOrderProfiles first_order_profiles(double m, const ProfileState& st, const Grid& g) {
    check_state(m, st, g);
    const auto k = profile_constants(m);
    const auto p = prefactors(m, st);
    const double c = st.c, sc = std::sqrt(c), kap = 1.0 / (m - 1.0);
    FirstOrderProfiles out{RVec(g.n), RVec(g.n), k.xi, k.chi};
    const double sa = p.p1 * std::pow(c, kap - 0.5);
    const double sb = p.p1 * st.v * std::pow(c, kap - 1.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double z = sc * g.x(i);
        out.A1[i] = sa * unit::A1(k, z);
        out.B1[i] = sb * unit::B1(k, z);
    }
    return out;
}

FirstOrderProfiles first_order_profiles_numeric(double m, const ProfileState& st, const Grid& g, const SolveOptions& opts) {
    const auto src = first_order_sources(m, st, g);
    LinearizedOperator Lp(OpSign::Plus, m, st.c, g), Lm(OpSign::Minus, m, st.c, g);
    const auto k = profile_constants(m);
    FirstOrderProfiles out;
    out.A1 = solve_constrained(Lp, src.F, Lp.kernel(), opts);
    out.B1 = solve_constrained(Lm, src.G, Lm.kernel(), opts);
    out.xi = k.xi;
    out.chi = k.chi;
    return out;
}

SecondOrderSources second_order_sources(double m, const ProfileState& st, const Grid& g) {
    check_state(m, st, g);
    if (m < 3.0) throw std::domain_error("second order undefined for m<3");
    const auto k = profile_constants(m);
    const auto p = prefactors(m, st);
    const double c = st.c, v = st.v, sc = std::sqrt(c), kap = 1.0 / (m - 1.0);
    const double w = v * v / c;
    SecondOrderSources s;
    s.alpha = k.alpha;
    s.beta = k.beta;
    const double r2 = p.a2 / p.a, r11 = (p.a1 / p.a) * (p.a1 / p.a);
    s.f3 = (k.alpha[0] + k.alpha[1] * w) * r2 + (k.alpha[2] + k.alpha[3] * w) * r11;
    s.f4 = (k.beta[0] * r2 + k.beta[1] * r11) * v / c;
    s.F2t.resize(g.n);
    s.G2t.resize(g.n);
    const double cf = std::pow(c, kap), cg = std::pow(c, kap - 0.5);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = g.x(i);
        const double z = sc * y;
        const double fI = unit::F2(k, 1, z), fII = unit::F2(k, 2, z), fIII = unit::F2(k, 3, z), fIV = unit::F2(k, 4, z);
        s.F2t[i] = p.p2 * cf * (fI + w * fII) + p.p11 * cf * (fIII + w * fIV) - s.f3 / p.at * soliton_profile(m, c, y);
        s.G2t[i] = p.p2 * v * cg * unit::G2(k, 1, z) + p.p11 * v * cg * unit::G2(k, 2, z) -
                   s.f4 / p.at * soliton_derivative(m, c, y);
    }
    return s;
}

SecondOrderProfiles second_order_profiles(double m, const ProfileState& st, const Grid& g, const SolveOptions& opts) {
    const auto s = second_order_sources(m, st, g);
    LinearizedOperator Lp(OpSign::Plus, m, st.c, g), Lm(OpSign::Minus, m, st.c, g);
    SecondOrderProfiles out;
    out.A2 = solve_constrained(Lp, s.F2t, Lp.kernel(), opts);
    out.B2 = solve_constrained(Lm, s.G2t, Lm.kernel(), opts);
    return out;
}

CorrectionProfiles correction_profiles(int order, double m, const ProfileState& st, const Grid& g, const SolveOptions& opts) {
    if (order != 1 && order != 2) throw std::invalid_argument("correction order must be 1 or 2");
    CorrectionProfiles cp;
    cp.order = order;
    const auto k = profile_constants(m);
    cp.alphas = k.alpha;
    cp.betas = k.beta;
    auto first = first_order_profiles(m, st, g);
    cp.A1 = std::move(first.A1);
    cp.B1 = std::move(first.B1);
    cp.xi = first.xi;
    cp.chi = first.chi;
    if (order == 2) {
        auto second = second_order_profiles(m, st, g, opts);
        cp.A2 = std::move(second.A2);
        cp.B2 = std::move(second.B2);
    }
    return cp;
}

AnsatzState ansatz_from_trajectory(double m, int order, const PotentialSpec& pot, const ExtendedState& y) {
    AnsatzState a;
    a.m = m;
    a.order = order;
    a.pot = pot;
    a.c = y.s.C;
    a.v = y.s.V;
    a.rho = y.s.U;
    a.gamma = y.s.H;
    a.int_c = y.int_c;
    a.int_v2 = y.int_v2;
    return a;
}

ComplexField assemble_approximate_solution(const AnsatzState& st, const Grid& g, const SolveOptions& opts) {
    if (g.dim != 1) throw std::invalid_argument("approximate solution is 1D");
    if (st.order < 0 || st.order > 2) throw std::invalid_argument("ansatz order must be 0, 1 or 2");
    if (st.order == 2 && st.m < 3.0) throw std::domain_error("second order undefined for m<3");
    check_boundary_margin(g, st.rho, st.c);
    const double m = st.m, c = st.c, eps = st.pot.epsilon;
    const double at = std::pow(eval_potential(st.pot, eps * st.rho, 0), 1.0 / (m - 1.0));
    const ProfileState ps{c, st.v, st.rho, st.pot};
    RVec A(g.n, 0.0), B(g.n, 0.0);
    if (st.order >= 1) {
        const auto k = profile_constants(m);
        const auto p = prefactors(m, ps);
        const double sc = std::sqrt(c), kap = 1.0 / (m - 1.0);
        const double sa = p.p1 * std::pow(c, kap - 0.5), sb = p.p1 * st.v * std::pow(c, kap - 1.0);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double z = sc * (g.x(i) - st.rho);
            A[i] = eps * sa * unit::A1(k, z);
            B[i] = eps * sb * unit::B1(k, z);
        }
    }
    if (st.order == 2) {
        const auto second = second_order_profiles(m, ps, g, opts);
        const RVec A2 = spectral_shift(g, second.A2, st.rho);
        const RVec B2 = spectral_shift(g, second.B2, st.rho);
        for (std::size_t i = 0; i < g.n; ++i) {
            A[i] += eps * eps * A2[i];
            B[i] += eps * eps * B2[i];
        }
    }
    ComplexField u{g, CVec(g.n)};
    const double th0 = st.int_c - 0.25 * st.int_v2 + st.gamma;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        const double base = soliton_profile(m, c, x - st.rho) / at;
        u.values[i] = cplx(base + A[i], B[i]) * std::polar(1.0, th0 + 0.5 * st.v * x);
    }
    return u;
}

double residual_norm(const EffectiveModel& model_in, const ExtendedState& y, const Grid& g, int order, double delta) {
    if (g.dim != 1) throw std::invalid_argument("residual is 1D");
    if (!(delta > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    if (model_in.kind == EffectiveKind::TwoD) throw std::invalid_argument("missing 1D trajectory context");
    EffectiveModel model = model_in;
    if (order == 2) {
        if (!model.corrections) model.corrections = second_order_coefficients(model.m);
    } else {
        model.corrections.reset();
    }
    const double m = model.m;
    SolveOptions opts;
    opts.tol = 1e-12;
    auto field = [&](const ExtendedState& s) {
        return assemble_approximate_solution(ansatz_from_trajectory(m, order, model.pot, s), g, opts).values;
    };
    const CVec u0 = field(y);
    auto centred = [&](double h) {
        const CVec up = field(advance(model, y, h, 2));
        const CVec um = field(advance(model, y, -h, 2));
        CVec d(g.n);
        for (std::size_t i = 0; i < g.n; ++i) d[i] = (up[i] - um[i]) / (2.0 * h);
        return d;
    };
    const CVec d1 = centred(delta);
    const CVec d2 = centred(0.5 * delta);
    const CVec lap = laplacian(g, u0);
    CVec S(g.n);
    const double eps = model.pot.epsilon;
    for (std::size_t i = 0; i < g.n; ++i) {
        const cplx ut = (4.0 * d2[i] - d1[i]) / 3.0;
        const double a = eval_potential(model.pot, eps * g.x(i), 0);
        const double mod = std::abs(u0[i]);
        S[i] = cplx(0.0, 1.0) * ut + lap[i] + a * std::pow(mod, m - 1.0) * u0[i];
    }
    return h1_norm(g, S);
}

}  // namespace nls
