#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlslab/soliton.hpp"

using namespace nls;

namespace {

// closed form written independently of the library
double closed_q(double m, double c, double x) {
    const double s = 1.0 / std::cosh(0.5 * (m - 1.0) * std::sqrt(c) * x);
    return std::pow(c * 0.5 * (m + 1.0) * s * s, 1.0 / (m - 1.0));
}

}  // namespace

TEST(Exponents, Values) {
    const auto e3 = scaling_exponents(3.0);
    EXPECT_DOUBLE_EQ(e3.theta, 0.25);
    EXPECT_DOUBLE_EQ(e3.lambda0, 1.0 / 3.0);
    EXPECT_EQ(e3.p_m, 2);
    const auto e2 = scaling_exponents(2.0);
    EXPECT_DOUBLE_EQ(e2.theta, 0.75);
    EXPECT_DOUBLE_EQ(e2.lambda0, 0.6);
    EXPECT_EQ(e2.p_m, 1);
    EXPECT_EQ(scaling_exponents(2.99).p_m, 1);
    EXPECT_THROW(scaling_exponents(5.0), std::invalid_argument);
    EXPECT_THROW(scaling_exponents(1.0), std::invalid_argument);
}

TEST(Profile, PeakValues) {
    EXPECT_NEAR(soliton_profile(3.0, 1.0, 0.0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(soliton_profile(2.0, 1.0, 0.0), 1.5, 1e-15);
    EXPECT_NEAR(soliton_profile(3.0, 4.0, 0.0), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Profile, MatchesClosedForm) {
    for (double m : {2.0, 2.5, 3.0, 4.0})
        for (double c : {0.5, 1.0, 4.0})
            for (double x : {-7.0, -1.3, 0.0, 0.4, 2.2, 15.0})
                EXPECT_NEAR(soliton_profile(m, c, x), closed_q(m, c, x), 1e-13 * (1.0 + closed_q(m, c, 0.0)));
}

TEST(Profile, NoUnderflowInTheFarTail) {
    const double q = soliton_profile(3.0, 1.0, 300.0);
    EXPECT_GT(q, 0.0);
    EXPECT_NEAR(std::log(q), std::log(2.0 * std::sqrt(2.0)) - 300.0, 1e-9);
}

TEST(Profile, DerivativesAgainstFiniteDifferences) {
    const double h = 1e-5;
    for (double m : {2.0, 3.0, 4.0})
        for (double x : {-2.0, -0.3, 0.5, 3.0}) {
            const double fd1 = (closed_q(m, 1.7, x + h) - closed_q(m, 1.7, x - h)) / (2.0 * h);
            EXPECT_NEAR(soliton_derivative(m, 1.7, x), fd1, 1e-8);
            const double fd2 = (closed_q(m, 1.7, x + h) - 2.0 * closed_q(m, 1.7, x) + closed_q(m, 1.7, x - h)) / (h * h);
            EXPECT_NEAR(soliton_second_derivative(m, 1.7, x), fd2, 1e-4);
        }
}

TEST(Profile, ExactnessOnTheGrid) {
    // spectral residual of Q'' - cQ + Q^m
    for (double m : {2.0, 2.5, 3.0, 4.0})
        for (double c : {0.5, 1.0, 4.0}) {
            const Grid g = make_grid(4096, 160.0 / std::sqrt(c));
            RVec q(g.n);
            for (std::size_t i = 0; i < g.n; ++i) q[i] = soliton_profile(m, c, g.x(i));
            const RVec d2 = second_derivative(g, q);
            double err = 0.0;
            for (std::size_t i = 0; i < g.n; ++i) err = std::max(err, std::abs(d2[i] - c * q[i] + std::pow(q[i], m)));
            EXPECT_LT(err, 1e-9) << "m=" << m << " c=" << c;
        }
}

TEST(ScalingDerivative, CentreValue) {
    EXPECT_NEAR(lambda_Q(3.0, 1.0, 0.0), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(ScalingDerivative, Even) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(0.0, 10.0);
    for (int k = 0; k < 20; ++k) {
        const double x = ud(rng);
        EXPECT_DOUBLE_EQ(lambda_Q(2.5, 1.3, x), lambda_Q(2.5, 1.3, -x));
    }
}

TEST(ScalingDerivative, FiniteDifferenceInC) {
    for (double m : {2.0, 3.0, 4.0})
        for (double x : {0.0, 0.7, -2.5}) {
            double prev = 0.0;
            for (double h : {1e-2, 5e-3}) {
                const double fd = (closed_q(m, 1.0 + h, x) - closed_q(m, 1.0 - h, x)) / (2.0 * h);
                const double err = std::abs(fd - lambda_Q(m, 1.0, x));
                if (prev > 1e-10) EXPECT_NEAR(prev / err, 4.0, 0.2);
                prev = err;
            }
            EXPECT_LT(prev, 1e-4);
        }
}

TEST(ScalingDerivative, SpatialDerivative) {
    const double h = 1e-5;
    for (double x : {-1.5, 0.2, 2.0}) {
        const double fd = (lambda_Q(3.0, 2.0, x + h) - lambda_Q(3.0, 2.0, x - h)) / (2.0 * h);
        EXPECT_NEAR(lambda_Q_derivative(3.0, 2.0, x), fd, 1e-8);
    }
}

TEST(InteractionTime, Formula) {
    EXPECT_NEAR(interaction_time(1.0, 0.05), std::pow(0.05, -1.01), 1e-12);
    EXPECT_NEAR(interaction_time(2.0, 0.1), 0.5 * std::pow(0.1, -1.01), 1e-12);
    EXPECT_THROW(interaction_time(0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(interaction_time(1.0, 0.0), std::invalid_argument);
}

TEST(TravelingWave, CentreValueAndPhase) {
    const Grid g = make_grid(1024, 100.0);
    SolitonParams p;
    auto f = traveling_wave(p, g, 0.0);
    const std::size_t mid = g.n / 2;
    ASSERT_DOUBLE_EQ(g.x(mid), 0.0);
    EXPECT_NEAR(f.values[mid].real(), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(f.values[mid].imag(), 0.0, 1e-15);
    p.gamma = std::numbers::pi / 2.0;
    f = traveling_wave(p, g, 0.0);
    EXPECT_NEAR(f.values[mid].real(), 0.0, 1e-15);
    EXPECT_NEAR(f.values[mid].imag(), std::sqrt(2.0), 1e-15);
}

TEST(TravelingWave, Translates) {
    const Grid g = make_grid(1024, 100.0);
    SolitonParams p;
    p.v = 1.0;
    p.rho = -3.0;
    const auto f = traveling_wave(p, g, 5.0);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < g.n; ++i)
        if (std::abs(f.values[i]) > std::abs(f.values[arg])) arg = i;
    EXPECT_LE(std::abs(g.x(arg) - 2.0), g.dx);
}

TEST(TravelingWave, ModulusIndependentOfPhase) {
    const Grid g = make_grid(512, 60.0);
    SolitonParams p;
    p.m = 2.5;
    p.c = 1.4;
    p.v = -0.6;
    p.amp = 1.3;
    const auto a = traveling_wave(p, g, 1.5);
    p.gamma = 2.1;
    const auto b = traveling_wave(p, g, 1.5);
    for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(std::abs(a.values[i]), std::abs(b.values[i]), 1e-15);
}

TEST(TravelingWave, PhaseMatchesDefinition) {
    const Grid g = make_grid(512, 60.0);
    SolitonParams p;
    p.c = 2.0;
    p.v = 0.8;
    p.gamma = 0.3;
    const double t = 0.7;
    const auto f = traveling_wave(p, g, t);
    for (std::size_t i : {200u, 256u, 300u}) {
        const double x = g.x(i);
        const cplx want = std::polar(closed_q(3.0, 2.0, x - 0.8 * t), 2.0 * t + 0.4 * x - 0.16 * t + 0.3);
        EXPECT_NEAR(std::abs(f.values[i] - want), 0.0, 1e-13);
    }
}

TEST(TravelingWave, BoundaryGuard) {
    const Grid g = make_grid(512, 40.0);
    SolitonParams p;
    p.rho = 12.0;
    EXPECT_THROW(traveling_wave(p, g, 0.0), std::domain_error);
    p.rho = 9.0;
    EXPECT_NO_THROW(traveling_wave(p, g, 0.0));
}

TEST(TravelingWave, RejectsBadParams) {
    const Grid g = make_grid(512, 40.0);
    SolitonParams p;
    p.c = 0.0;
    EXPECT_THROW(traveling_wave(p, g, 0.0), std::invalid_argument);
    p.c = 1.0;
    p.m = 5.0;
    EXPECT_THROW(traveling_wave(p, g, 0.0), std::invalid_argument);
    EXPECT_THROW(traveling_wave(SolitonParams{}, make_grid(64, 40.0, 2), 0.0), std::invalid_argument);
}

TEST(Identities, SuitePassesForPaperExponents) {
    for (double m : {2.0, 3.0, 4.0}) {
        const auto r = check_identities(m);
        EXPECT_TRUE(r.pass) << "m=" << m << " max_rel_err=" << r.max_rel_err;
        int required = 0;
        for (const auto& ch : r.checks) required += ch.required ? 1 : 0;
        EXPECT_EQ(required, 8);
        EXPECT_LT(r.max_rel_err, 1e-8);
    }
}

TEST(Identities, CubicIntegralsByHand) {
    const auto I = soliton_integrals(3.0);
    EXPECT_NEAR(I.Q2, 4.0, 1e-12);
    EXPECT_NEAR(I.dQ2, 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(I.Qm1, 16.0 / 3.0, 1e-12);
    EXPECT_NEAR(I.Q1, std::sqrt(2.0) * std::numbers::pi, 1e-12);
    // int y^2 sech^2 = pi^2/6
    EXPECT_NEAR(I.y2Q2, std::numbers::pi * std::numbers::pi / 3.0, 1e-10);
}

TEST(Identities, QuadraticEnergyRatio) {
    const auto I = soliton_integrals(2.0);
    const double e1 = 0.5 * I.dQ2 - I.Qm1 / 3.0;
    EXPECT_NEAR(e1 / I.Q2, -0.3, 1e-8);
}

TEST(Identities, ScalingUnderFourC) {
    for (double m : {2.0, 2.5, 3.0, 4.0}) {
        const auto a = check_identities(m, 1.0);
        const auto b = check_identities(m, 4.0);
        EXPECT_TRUE(a.pass);
        EXPECT_TRUE(b.pass);
        for (const auto& ch : b.checks) EXPECT_LT(ch.rel_err, 1e-8) << ch.name << " m=" << m;
    }
}

TEST(GroundState2D, PetviashviliQuadratic) {
    const Grid g = make_grid(256, 40.0, 2);
    const auto q = ground_state_2d(2.0, g);
    EXPECT_LT(q.residual, 1e-8);
    double asym = 0.0, peak = 0.0;
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = q.Q[i * n + j];
            peak = std::max(peak, v);
            asym = std::max(asym, std::abs(v - q.Q[g.mirror(i) * n + g.mirror(j)]));
            asym = std::max(asym, std::abs(v - q.Q[j * n + i]));
            EXPECT_GT(v, -1e-12);
        }
    EXPECT_LT(asym, 1e-8);
    EXPECT_DOUBLE_EQ(peak, q.Q[(n / 2) * n + n / 2]);

    const auto poh = pohozaev_2d(q);
    EXPECT_LT(poh.rel_err, 1e-6);
    EXPECT_LT(poh.virial_err, 1e-6);
    // int grad^2 = c int Q^2 (m-1)/2 from the two identities combined
    EXPECT_NEAR(poh.grad2, 0.5 * poh.mass, 1e-6 * poh.mass);
    EXPECT_NEAR(poh.kappa, 1.5, 1e-6);
}

TEST(GroundState2D, ScaledProblem) {
    const Grid g = make_grid(128, 30.0, 2);
    const auto q = ground_state_2d(2.5, g, 2.0);
    EXPECT_LT(q.residual, 1e-8);
    const auto poh = pohozaev_2d(q);
    EXPECT_LT(poh.rel_err, 1e-6);
}

TEST(GroundState2D, Rejections) {
    EXPECT_THROW(ground_state_2d(2.0, make_grid(64, 20.0, 1)), std::invalid_argument);
    EXPECT_THROW(ground_state_2d(3.0, make_grid(64, 20.0, 2)), std::invalid_argument);
    EXPECT_THROW(ground_state_2d(2.0, make_grid(64, 20.0, 2), 1.0, 1e-11, 2), std::runtime_error);
}

TEST(TravelingWave2D, PhaseAndCentre) {
    const Grid g = make_grid(128, 30.0, 2);
    const auto q = ground_state_2d(2.0, g);
    SolitonParams2D p;
    p.v[0] = 0.5;
    p.v[1] = -0.25;
    p.rho[0] = -2.0;
    const auto f = traveling_wave_2d(p, q, 4.0);
    // centre moves to (0, -1), a grid node
    const std::size_t n = g.n;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (std::abs(f.values[k]) > std::abs(f.values[arg])) arg = k;
    EXPECT_NEAR(g.x(arg / n), 0.0, 1e-12);
    EXPECT_NEAR(g.x(arg % n), -1.0, 0.5 * g.dx + 1e-12);
    EXPECT_NEAR(l2_norm(g, f.values), l2_norm(g, q.Q), 1e-12 * l2_norm(g, q.Q));
    const std::size_t k = (n / 2) * n + n / 2 + 7;
    const double th = 0.5 * (0.5 * g.x(n / 2) - 0.25 * g.x(n / 2 + 7)) + 4.0 - 0.25 * (0.25 + 0.0625) * 4.0;
    EXPECT_NEAR(std::arg(f.values[k] * std::polar(1.0, -th)), 0.0, 1e-10);

    SolitonParams2D bad = p;
    bad.c = 2.0;
    EXPECT_THROW(traveling_wave_2d(bad, q, 0.0), std::invalid_argument);
}
