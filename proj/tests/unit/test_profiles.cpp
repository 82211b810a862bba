#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlslab/effective.hpp"
#include "nlslab/profiles.hpp"
#include "nlslab/soliton.hpp"

using namespace nls;

namespace {

Grid pg() { return make_grid(2048, 80.0); }

ProfileState state(double c = 1.3, double v = 0.7, double rho = 0.0) {
    ProfileState s;
    s.c = c;
    s.v = v;
    s.rho = rho;
    return s;
}

RVec sampled(const Grid& g, double (*f)(double, double, double), double m, double c) {
    RVec out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) out[i] = f(m, c, g.x(i));
    return out;
}

double sup_diff(const RVec& a, const RVec& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

}  // namespace

TEST(Constants, CubicChi) {
    const auto k = profile_constants(3.0);
    EXPECT_NEAR(k.chi, -std::numbers::pi * std::numbers::pi / 12.0, 1e-6);
    EXPECT_NEAR(k.xi, -2.5 + k.chi, 1e-14);
    EXPECT_NEAR(k.Q2, 4.0, 1e-12);
}

TEST(Constants, SecondOrderSigns) {
    const auto k = profile_constants(3.0);
    EXPECT_GT(k.alpha[0], 0.0);
    EXPECT_LT(k.alpha[1], 0.0);
    EXPECT_GT(k.beta[0], 0.0);
}

TEST(Constants, AlphaIFromTheMomentIdentity) {
    // int y^2 Q^{m+1} = (m+1)/(m+3)(2 int y^2 Q^2 - int Q^2) turns alpha_I into (-2 chi - 1)/(m+3)
    for (double m : {3.0, 3.5, 4.0}) {
        const auto k = profile_constants(m);
        EXPECT_NEAR(k.alpha[0], (-2.0 * k.chi - 1.0) / (m + 3.0), 1e-9) << "m=" << m;
    }
}

TEST(Constants, AlphaIIClosedForm) {
    for (double m : {2.0, 2.5, 3.0, 4.0}) {
        const auto k = profile_constants(m);
        EXPECT_NEAR(k.alpha[1], (m - 1.0) * k.chi / std::pow(5.0 - m, 2), 1e-9) << "m=" << m;
    }
}

TEST(Constants, RejectsExponent) {
    EXPECT_THROW(profile_constants(5.0), std::invalid_argument);
    EXPECT_THROW(profile_constants(1.5), std::invalid_argument);
}

TEST(FirstOrder, SourceParityAndCompatibility) {
    const Grid g = pg();
    for (double m : {2.0, 3.0, 4.0}) {
        const auto st = state();
        const auto s = first_order_sources(m, st, g);
        EXPECT_LT(sup_norm(even_part(g, s.F)), 1e-15 * sup_norm(s.F) + 1e-300);
        EXPECT_LT(sup_norm(odd_part(g, s.G)), 1e-15 * sup_norm(s.G) + 1e-300);
        EXPECT_NEAR(inner(g, s.F, sampled(g, soliton_derivative, m, st.c)), 0.0, 1e-9);
        EXPECT_NEAR(inner(g, s.G, sampled(g, soliton_profile, m, st.c)), 0.0, 1e-9);
    }
}

TEST(FirstOrder, ClosedFormSolvesTheSystem) {
    const Grid g = pg();
    for (double m : {2.0, 3.0, 4.0}) {
        const auto st = state();
        const auto s = first_order_sources(m, st, g);
        const auto p = first_order_profiles(m, st, g);
        LinearizedOperator Lp(OpSign::Plus, m, st.c, g), Lm(OpSign::Minus, m, st.c, g);
        EXPECT_LT(sup_diff(Lp.apply(p.A1), s.F), 1e-7) << "m=" << m;
        EXPECT_LT(sup_diff(Lm.apply(p.B1), s.G), 1e-7) << "m=" << m;
    }
}

TEST(FirstOrder, Orthogonality) {
    const Grid g = pg();
    for (double m : {2.0, 3.0, 4.0}) {
        const auto st = state();
        const auto p = first_order_profiles(m, st, g);
        const RVec q = sampled(g, soliton_profile, m, st.c), dq = sampled(g, soliton_derivative, m, st.c);
        EXPECT_NEAR(inner(g, p.A1, q), 0.0, 1e-8);
        EXPECT_NEAR(inner(g, p.A1, dq), 0.0, 1e-8);
        EXPECT_NEAR(inner(g, p.B1, q), 0.0, 1e-8);
        EXPECT_NEAR(inner(g, p.B1, dq), 0.0, 1e-8);
    }
}

TEST(FirstOrder, NumericSolveMatchesClosedForm) {
    const Grid g = pg();
    for (double m : {2.0, 3.0, 4.0})
        for (double c : {1.0, 2.5}) {
            const auto st = state(c, -0.4);
            const auto a = first_order_profiles(m, st, g);
            const auto b = first_order_profiles_numeric(m, st, g);
            EXPECT_LT(sup_diff(a.A1, b.A1), 1e-6) << "m=" << m << " c=" << c;
            EXPECT_LT(sup_diff(a.B1, b.B1), 1e-6) << "m=" << m << " c=" << c;
        }
}

TEST(FirstOrder, Parity) {
    const Grid g = pg();
    const auto p = first_order_profiles(3.0, state(), g);
    EXPECT_LT(sup_norm(even_part(g, p.A1)), 1e-10 * sup_norm(p.A1));
    EXPECT_LT(sup_norm(odd_part(g, p.B1)), 1e-10 * sup_norm(p.B1));
}

TEST(FirstOrder, VanishesWithoutGradient) {
    const Grid g = pg();
    ProfileState st = state();
    st.pot = constant_potential(1.0);
    const auto p = first_order_profiles(3.0, st, g);
    EXPECT_EQ(sup_norm(p.A1), 0.0);
    EXPECT_EQ(sup_norm(p.B1), 0.0);
}

TEST(FirstOrder, DecayClass) {
    // |A1| <= C (1+|y|)^2 e^{-sqrt(c)|y|/2} with C fitted at the centre region
    const Grid g = pg();
    const auto st = state(2.0);
    const auto p = first_order_profiles(3.0, st, g);
    double C = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double y = std::abs(g.x(i));
        const double env = std::pow(1.0 + y, 2) * std::exp(-std::sqrt(st.c) * y / 2.0);
        C = std::max(C, std::max(std::abs(p.A1[i]), std::abs(p.B1[i])) / env);
    }
    EXPECT_TRUE(std::isfinite(C));
    EXPECT_LT(C, 10.0 * std::max(sup_norm(p.A1), sup_norm(p.B1)));
}

TEST(SecondOrder, UndefinedBelowCubic) {
    try {
        second_order_sources(2.5, state(), pg());
        FAIL();
    } catch (const std::domain_error& e) {
        EXPECT_STREQ(e.what(), "second order undefined for m<3");
    }
}

TEST(SecondOrder, CountertermsKillProjections) {
    const Grid g = pg();
    for (double m : {3.0, 4.0})
        for (double rho : {0.0, 15.0}) {
            const auto st = state(1.3, 0.7, rho);
            const auto s = second_order_sources(m, st, g);
            EXPECT_NEAR(inner(g, s.F2t, sampled(g, lambda_Q, m, st.c)), 0.0, 1e-8) << "m=" << m;
            RVec yq(g.n);
            for (std::size_t i = 0; i < g.n; ++i) yq[i] = g.x(i) * soliton_profile(m, st.c, g.x(i));
            EXPECT_NEAR(inner(g, s.G2t, yq), 0.0, 1e-8) << "m=" << m;
        }
}

TEST(SecondOrder, CountertermValues) {
    // f3, f4 from the coefficient table at a(0) = 1.5, a'(0) = 0.5, a''(0) = 0
    const Grid g = pg();
    const auto st = state(1.3, 0.7, 0.0);
    const auto s = second_order_sources(3.0, st, g);
    const double r11 = std::pow(0.5 / 1.5, 2), w = 0.49 / 1.3;
    EXPECT_NEAR(s.f3, (s.alpha[2] + s.alpha[3] * w) * r11, 1e-14);
    EXPECT_NEAR(s.f4, s.beta[1] * r11 * 0.7 / 1.3, 1e-14);
}

TEST(SecondOrder, ProfilesParityAndOrthogonality) {
    const Grid g = pg();
    ProfileState st = state(1.3, 0.7, 10.0);
    const auto p = second_order_profiles(3.0, st, g);
    const auto s = second_order_sources(3.0, st, g);
    EXPECT_LT(sup_norm(odd_part(g, p.A2)), 1e-10 * sup_norm(p.A2));
    EXPECT_LT(sup_norm(even_part(g, p.B2)), 1e-10 * sup_norm(p.B2));
    const RVec q = sampled(g, soliton_profile, 3.0, st.c), dq = sampled(g, soliton_derivative, 3.0, st.c);
    EXPECT_NEAR(inner(g, p.A2, q), 0.0, 1e-7);
    EXPECT_NEAR(inner(g, p.B2, dq), 0.0, 1e-7);
    EXPECT_NEAR(inner(g, p.A2, dq), 0.0, 1e-12);
    EXPECT_NEAR(inner(g, p.B2, q), 0.0, 1e-12);
    LinearizedOperator Lp(OpSign::Plus, 3.0, st.c, g), Lm(OpSign::Minus, 3.0, st.c, g);
    EXPECT_LT(sup_diff(Lp.apply(p.A2), s.F2t), 1e-7 * sup_norm(s.F2t) + 1e-12);
    EXPECT_LT(sup_diff(Lm.apply(p.B2), s.G2t), 1e-7 * sup_norm(s.G2t) + 1e-12);
}

TEST(SecondOrder, BundleMatchesPieces) {
    const Grid g = pg();
    const auto st = state(1.0, 1.0, 5.0);
    const auto cp = correction_profiles(2, 3.0, st, g);
    const auto f = first_order_profiles(3.0, st, g);
    const auto s = second_order_profiles(3.0, st, g);
    EXPECT_EQ(cp.A1, f.A1);
    EXPECT_EQ(cp.B2, s.B2);
    EXPECT_EQ(cp.order, 2);
    EXPECT_TRUE(correction_profiles(1, 2.0, st, g).A2.empty());
    EXPECT_THROW(correction_profiles(3, 3.0, st, g), std::invalid_argument);
}

TEST(Ansatz, ZeroEpsilonIsTheSoliton) {
    const Grid g = pg();
    AnsatzState a;
    a.order = 2;
    a.pot.epsilon = 0.0;
    a.c = 1.2;
    a.v = 0.5;
    a.rho = 3.0;
    a.gamma = 0.4;
    const auto u = assemble_approximate_solution(a, g);
    SolitonParams p;
    p.c = 1.2;
    p.v = 0.5;
    p.rho = 3.0;
    p.gamma = 0.4;
    p.amp = std::pow(1.5, 0.5);
    const auto r = traveling_wave(p, g, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) EXPECT_EQ(u.values[i], r.values[i]);
}

TEST(Ansatz, FarFromTheTransition) {
    const Grid g = make_grid(2048, 80.0);
    AnsatzState a;
    a.order = 2;
    a.c = 1.0;
    a.v = 1.0;
    a.rho = -25.0;
    a.pot.epsilon = 0.5;  // eps * rho = -12.5: a' ~ 1e-11
    AnsatzState b = a;
    b.order = 0;
    const auto u = assemble_approximate_solution(a, g), r = assemble_approximate_solution(b, g);
    CVec d(g.n);
    for (std::size_t i = 0; i < g.n; ++i) d[i] = u.values[i] - r.values[i];
    EXPECT_LT(h1_norm(g, d), 1e-6);
}

TEST(Ansatz, CorrectionIsOrthogonal) {
    const Grid g = pg();
    AnsatzState a;
    a.order = 2;
    a.c = 1.4;
    a.v = 0.8;
    a.rho = 4.0;
    a.gamma = 1.1;
    a.int_c = 0.3;
    a.int_v2 = 0.2;
    a.pot.epsilon = 0.1;
    AnsatzState b = a;
    b.order = 0;
    const auto u = assemble_approximate_solution(a, g), r = assemble_approximate_solution(b, g);
    cplx p1 = 0.0, p2 = 0.0;
    double wn = 0.0;
    const double th0 = a.int_c - 0.25 * a.int_v2 + a.gamma;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i), y = x - a.rho;
        const cplx w = (u.values[i] - r.values[i]) * std::polar(1.0, -(th0 + 0.5 * a.v * x));
        p1 += w * soliton_profile(3.0, a.c, y);
        p2 += w * soliton_derivative(3.0, a.c, y);
        wn = std::max(wn, std::abs(w));
    }
    ASSERT_GT(wn, 1e-4);
    EXPECT_LT(std::abs(p1 * g.dx), 1e-7);
    EXPECT_LT(std::abs(p2 * g.dx), 1e-7);
}

TEST(Ansatz, Errors) {
    const Grid g = pg();
    AnsatzState a;
    a.m = 2.5;
    a.order = 2;
    EXPECT_THROW(assemble_approximate_solution(a, g), std::domain_error);
    a.order = 3;
    EXPECT_THROW(assemble_approximate_solution(a, g), std::invalid_argument);
    a.order = 0;
    a.rho = 35.0;
    EXPECT_THROW(assemble_approximate_solution(a, g), std::domain_error);
}

TEST(Ansatz, FromTrajectory) {
    ExtendedState y;
    y.s = {2.0, 0.5, -3.0, 0.25};
    y.int_c = 7.0;
    y.int_v2 = 1.5;
    const auto a = ansatz_from_trajectory(3.0, 1, PotentialSpec{}, y);
    EXPECT_EQ(a.c, 2.0);
    EXPECT_EQ(a.v, 0.5);
    EXPECT_EQ(a.rho, -3.0);
    EXPECT_EQ(a.gamma, 0.25);
    EXPECT_EQ(a.int_c, 7.0);
    EXPECT_EQ(a.int_v2, 1.5);
    EXPECT_EQ(a.order, 1);
}

TEST(Residual, ExactSolitonInFlatMedium) {
    EffectiveModel model;
    model.m = 3.0;
    model.pot = constant_potential(1.0, 0.05);
    ExtendedState y;
    y.s = {1.0, 1.0, 0.0, 0.0};
    EXPECT_LT(residual_norm(model, y, make_grid(2048, 100.0), 0), 1e-8);
}

namespace {

double residual_at_centre(double m, double eps, int order) {
    EffectiveModel model;
    model.m = m;
    model.pot.epsilon = eps;
    const double lam0 = scaling_exponents(m).lambda0;
    const double C = std::pow(1.5, 4.0 / (5.0 - m));
    ExtendedState y;
    y.s = {C, std::sqrt(1.0 + 4.0 * lam0 * (C - 1.0)), 0.0, 0.0};
    return residual_norm(model, y, make_grid(2048, 100.0), order);
}

}  // namespace

TEST(Residual, OrderLadderCubic) {
    const double r0 = residual_at_centre(3.0, 0.05, 0);
    const double r1 = residual_at_centre(3.0, 0.05, 1);
    const double r2 = residual_at_centre(3.0, 0.05, 2);
    EXPECT_LT(r2, r1);
    EXPECT_LT(r1, r0);
}

TEST(Residual, HalvingEpsilonQuadratic) {
    const double ratio = residual_at_centre(2.0, 0.05, 1) / residual_at_centre(2.0, 0.025, 1);
    EXPECT_NEAR(ratio, 4.0, 1.0);
}

TEST(Residual, HalvingEpsilonCubic) {
    const double ratio = residual_at_centre(3.0, 0.05, 2) / residual_at_centre(3.0, 0.025, 2);
    EXPECT_NEAR(ratio, 8.0, 2.4);
}

TEST(Residual, Errors) {
    EffectiveModel model;
    model.kind = EffectiveKind::TwoD;
    model.m = 2.0;
    model.kappa = 1.5;
    EXPECT_THROW(residual_norm(model, ExtendedState{}, pg(), 1), std::invalid_argument);
    model.kind = EffectiveKind::Increasing1D;
    EXPECT_THROW(residual_norm(model, ExtendedState{}, pg(), 1, 0.0), std::invalid_argument);
}
