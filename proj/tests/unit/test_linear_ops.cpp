#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlslab/linear_ops.hpp"
#include "nlslab/soliton.hpp"

using namespace nls;

namespace {

Grid op_grid() { return make_grid(2048, 80.0); }

RVec sample(const Grid& g, double (*f)(double, double, double), double m, double c) {
    RVec out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) out[i] = f(m, c, g.x(i));
    return out;
}

double sup_diff(const RVec& a, const RVec& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

double dotg(const Grid& g, const RVec& a, const RVec& b) { return inner(g, a, b); }

// random smooth decaying field of the requested parity (0 none, 1 even, -1 odd)
RVec random_decayed(const Grid& g, unsigned seed, int parity) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double a[6];
    for (double& z : a) z = nd(rng);
    RVec out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        double even = a[0] + a[2] * x * x + a[4] * x * x * x * x;
        double odd = a[1] * x + a[3] * x * x * x + a[5] * std::sin(x);
        if (parity == 1) odd = 0.0;
        if (parity == -1) even = 0.0;
        out[i] = (even + odd) * std::exp(-0.3 * x * x);
    }
    if (parity == 1) out = even_part(g, out);
    if (parity == -1) out = odd_part(g, out);
    return out;
}

}  // namespace

TEST(Operators, Kernels) {
    const Grid g = op_grid();
    for (double m : {2.0, 3.0, 4.0})
        for (double c : {1.0, 4.0}) {
            LinearizedOperator Lp(OpSign::Plus, m, c, g), Lm(OpSign::Minus, m, c, g);
            EXPECT_LT(sup_norm(Lp.apply(sample(g, soliton_derivative, m, c))), 1e-9);
            EXPECT_LT(sup_norm(Lm.apply(sample(g, soliton_profile, m, c))), 1e-9);
        }
}

TEST(Operators, CubicNegativeDirection) {
    // L+ sech^2 = -3 sech^2 for m = 3, c = 1
    const Grid g = op_grid();
    LinearizedOperator Lp(OpSign::Plus, 3.0, 1.0, g);
    RVec q2(g.n);
    for (std::size_t i = 0; i < g.n; ++i) q2[i] = std::pow(std::sqrt(2.0) / std::cosh(g.x(i)), 2);
    const RVec r = Lp.apply(q2);
    RVec want(g.n);
    for (std::size_t i = 0; i < g.n; ++i) want[i] = -3.0 * q2[i];
    EXPECT_LT(sup_diff(r, want), 1e-8);
}

TEST(Operators, ScalingDerivativeIdentity) {
    const Grid g = op_grid();
    for (double m : {2.0, 3.0, 4.0})
        for (double c : {1.0, 4.0}) {
            LinearizedOperator Lp(OpSign::Plus, m, c, g);
            RVec r = Lp.apply(sample(g, lambda_Q, m, c));
            const RVec q = sample(g, soliton_profile, m, c);
            for (std::size_t i = 0; i < g.n; ++i) r[i] += q[i];
            EXPECT_LT(sup_norm(r), 1e-8) << "m=" << m << " c=" << c;
        }
}

TEST(Operators, SelfAdjoint) {
    const Grid g = op_grid();
    const RVec u = random_decayed(g, 1, 0), w = random_decayed(g, 2, 0);
    for (OpSign s : {OpSign::Plus, OpSign::Minus}) {
        LinearizedOperator L(s, 2.5, 1.5, g);
        const double a = dotg(g, L.apply(u), w), b = dotg(g, u, L.apply(w));
        EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
    }
}

TEST(Operators, PreserveParity) {
    const Grid g = op_grid();
    for (OpSign s : {OpSign::Plus, OpSign::Minus}) {
        LinearizedOperator L(s, 3.0, 1.0, g);
        const RVec e = L.apply(random_decayed(g, 5, 1));
        const RVec o = L.apply(random_decayed(g, 6, -1));
        EXPECT_LT(sup_norm(odd_part(g, e)), 1e-12 * sup_norm(e));
        EXPECT_LT(sup_norm(even_part(g, o)), 1e-12 * sup_norm(o));
    }
}

TEST(Operators, GridMismatch) {
    LinearizedOperator L(OpSign::Plus, 3.0, 1.0, op_grid());
    EXPECT_THROW(L.apply(RVec(1024, 0.0)), std::invalid_argument);
    EXPECT_THROW(LinearizedOperator(OpSign::Plus, 3.0, 1.0, make_grid(64, 10.0, 2)), std::invalid_argument);
    EXPECT_THROW(LinearizedOperator(OpSign::Minus, 3.0, 0.0, op_grid()), std::invalid_argument);
}

TEST(Operators, PreconditionerInvertsFreePart) {
    const Grid g = op_grid();
    LinearizedOperator L(OpSign::Plus, 3.0, 2.0, g);
    const RVec f = random_decayed(g, 9, 0);
    const RVec p = L.precondition(f);
    RVec back = second_derivative(g, p);
    for (std::size_t i = 0; i < g.n; ++i) back[i] = -back[i] + 2.0 * p[i];
    EXPECT_LT(sup_diff(back, f), 1e-11 * sup_norm(f));
}

TEST(Solve, RecoversScalingDerivative) {
    const Grid g = op_grid();
    for (double m : {2.0, 3.0, 4.0}) {
        const double c = 1.3;
        LinearizedOperator Lp(OpSign::Plus, m, c, g);
        RVec src = sample(g, soliton_profile, m, c);
        for (double& z : src) z = -z;
        SolveReport rep;
        const RVec h = solve_constrained(Lp, src, Lp.kernel(), {}, &rep);
        EXPECT_LT(sup_diff(h, sample(g, lambda_Q, m, c)), 1e-7) << "m=" << m;
        EXPECT_LT(rep.rel_residual, 1e-10);
        EXPECT_GT(rep.iterations, 0u);
    }
}

TEST(Solve, RecoversYQ) {
    const Grid g = op_grid();
    for (double m : {2.0, 3.0}) {
        LinearizedOperator Lm(OpSign::Minus, m, 1.0, g);
        RVec src = sample(g, soliton_derivative, m, 1.0);
        for (double& z : src) z *= -2.0;
        const RVec h = solve_constrained(Lm, src, Lm.kernel());
        RVec yq(g.n);
        for (std::size_t i = 0; i < g.n; ++i) yq[i] = g.x(i) * soliton_profile(m, 1.0, g.x(i));
        EXPECT_LT(sup_diff(h, yq), 1e-7);
    }
}

TEST(Solve, ApplyReproducesSource) {
    const Grid g = op_grid();
    LinearizedOperator Lp(OpSign::Plus, 3.0, 1.0, g);
    // odd source orthogonal to Q' by construction
    RVec src = random_decayed(g, 21, -1);
    const RVec& k = Lp.kernel();
    const double s = inner(g, src, k) / inner(g, k, k);
    for (std::size_t i = 0; i < g.n; ++i) src[i] -= s * k[i];
    const RVec h = solve_constrained(Lp, src, k);
    EXPECT_NEAR(inner(g, h, k), 0.0, 1e-12);
    const RVec back = Lp.apply(h);
    RVec d(g.n);
    for (std::size_t i = 0; i < g.n; ++i) d[i] = back[i] - src[i];
    EXPECT_LT(l2_norm(g, d), 1e-9 * l2_norm(g, src));
}

TEST(Solve, AlternativeConstraint) {
    // the kernel component is fixed by the requested orthogonality, not by the kernel itself
    const Grid g = op_grid();
    LinearizedOperator Lm(OpSign::Minus, 3.0, 1.0, g);
    RVec e(g.n);
    for (std::size_t i = 0; i < g.n; ++i) e[i] = std::exp(-g.x(i) * g.x(i)) * (1.0 - g.x(i) * g.x(i));
    const RVec& k = Lm.kernel();
    const double s = inner(g, e, k) / inner(g, k, k);
    for (std::size_t i = 0; i < g.n; ++i) e[i] -= s * k[i];
    RVec other(g.n);
    for (std::size_t i = 0; i < g.n; ++i) other[i] = std::exp(-0.5 * g.x(i) * g.x(i));
    const RVec h = solve_constrained(Lm, e, other);
    EXPECT_NEAR(inner(g, h, other), 0.0, 1e-12);
    const RVec back = Lm.apply(h);
    double err = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) err = std::max(err, std::abs(back[i] - e[i]));
    EXPECT_LT(err, 1e-8);
}

TEST(Solve, IncompatibleSource) {
    const Grid g = op_grid();
    LinearizedOperator Lp(OpSign::Plus, 3.0, 1.0, g);
    try {
        solve_constrained(Lp, Lp.kernel(), Lp.kernel());
        FAIL() << "expected an error";
    } catch (const std::domain_error& e) {
        EXPECT_STREQ(e.what(), "incompatible source");
    }
}

TEST(Solve, ZeroSource) {
    const Grid g = op_grid();
    LinearizedOperator Lp(OpSign::Plus, 3.0, 1.0, g);
    const RVec h = solve_constrained(Lp, RVec(g.n, 0.0), Lp.kernel());
    EXPECT_EQ(sup_norm(h), 0.0);
}

TEST(Spectral, CubicEigenvalue) {
    const auto r = spectral_checks(3.0, 1.0, op_grid());
    EXPECT_NEAR(r.lambda_m, 3.0, 1e-6);
    EXPECT_LT(r.eigen_residual, 1e-8);
    EXPECT_LT(r.kernel_plus, 1e-9);
    EXPECT_LT(r.kernel_minus, 1e-9);
    EXPECT_LT(r.lambda_identity, 1e-8);
    EXPECT_GT(r.minus_gap, 0.0);
}

TEST(Spectral, QuadraticNegativeDirection) {
    const auto r = spectral_checks(2.0, 1.0, op_grid());
    EXPECT_LT(r.rayleigh, 0.0);
    EXPECT_GT(r.lambda_m, 0.0);
    EXPECT_GT(r.minus_gap, 0.0);
}

TEST(Spectral, IdentityAcrossScalings) {
    for (double m : {2.0, 3.0, 4.0})
        for (double c : {1.0, 4.0}) EXPECT_LT(spectral_checks(m, c, op_grid()).lambda_identity, 1e-8);
}
