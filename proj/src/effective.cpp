#include "nlslab/effective.hpp"

#include <cmath>
#include <stdexcept>

#include "nlslab/soliton.hpp"

namespace nls {

void validate(const EffectiveModel& model) {
    const double m = model.m;
    if (model.kind == EffectiveKind::TwoD) {
        if (!(m >= 2.0 && m < 3.0)) throw std::invalid_argument("2D effective system needs m in [2,3)");
        if (!(model.kappa > 0.0)) throw std::invalid_argument("2D effective system needs kappa > 0");
    } else if (!(m >= 2.0 && m < 5.0)) {
        throw std::invalid_argument("1D effective system needs m in [2,5)");
    }
    if (model.corrections && (model.kind == EffectiveKind::TwoD || m < 3.0))
        throw std::invalid_argument("second-order counterterms are defined for 1D, m >= 3 only");
    const bool flat = model.pot.a_minus == model.pot.a_plus;
    if (!flat) {
        if (model.kind == EffectiveKind::Increasing1D && model.pot.direction != Direction::Increasing)
            throw std::invalid_argument("Increasing1D system needs an increasing potential");
        if (model.kind == EffectiveKind::Decreasing1D && model.pot.direction != Direction::Decreasing)
            throw std::invalid_argument("Decreasing1D system needs a decreasing potential");
    }
}

std::array<double, 2> drift_coefficients(const EffectiveModel& model, const EffectiveState& s) {
    const double m = model.m;
    const auto a = eval_potential_all(model.pot, model.pot.epsilon * s.U);
    const double ratio = a[1] / a[0];
    if (model.kind == EffectiveKind::TwoD) {
        return {4.0 * model.kappa / (m + 1.0) * ratio * s.C, 2.0 / (3.0 - m) * ratio * s.C * s.V};
    }
    return {8.0 / (m + 3.0) * ratio * s.C, 4.0 / (5.0 - m) * ratio * s.C * s.V};
}

std::array<double, 2> counterterms(const EffectiveModel& model, const EffectiveState& s) {
    if (!model.corrections) return {0.0, 0.0};
    const auto& k = *model.corrections;
    const auto a = eval_potential_all(model.pot, model.pot.epsilon * s.U);
    const double r2 = a[2] / a[0];
    const double r11 = (a[1] / a[0]) * (a[1] / a[0]);
    const double w = s.V * s.V / s.C;
    const double f3 = (k.alpha[0] + k.alpha[1] * w) * r2 + (k.alpha[2] + k.alpha[3] * w) * r11;
    const double f4 = (k.beta[0] * r2 + k.beta[1] * r11) * s.V / s.C;
    return {f3, f4};
}

EffectiveDerivative ode_rhs(const EffectiveModel& model, const ExtendedState& y) {
    validate(model);
    const double eps = model.pot.epsilon;
    const auto f = drift_coefficients(model, y.s);
    const auto g = counterterms(model, y.s);
    EffectiveDerivative d;
    d.dV = eps * f[0];
    d.dC = eps * f[1];
    d.dU = y.s.V + eps * eps * g[1];
    d.dH = -0.5 * d.dV * y.s.U + eps * eps * g[0];
    d.dIc = y.s.C;
    d.dIv2 = y.s.V * y.s.V;
    return d;
}

double alpha0_2d(double m, double kappa) { return 4.0 * (3.0 - m) * kappa / (m + 1.0); }

double effective_invariant(const EffectiveModel& model, const EffectiveState& s) {
    if (model.kind == EffectiveKind::TwoD) return s.V * s.V - alpha0_2d(model.m, model.kappa) * s.C;
    return s.V * s.V - 4.0 * scaling_exponents(model.m).lambda0 * s.C;
}

namespace {

ExtendedState axpy(const ExtendedState& y, double h, const EffectiveDerivative& d) {
    ExtendedState o = y;
    o.s.C += h * d.dC;
    o.s.V += h * d.dV;
    o.s.U += h * d.dU;
    o.s.H += h * d.dH;
    o.int_c += h * d.dIc;
    o.int_v2 += h * d.dIv2;
    return o;
}

}  // namespace

ExtendedState rk4_step(const EffectiveModel& model, const ExtendedState& y, double dt) {
    const auto k1 = ode_rhs(model, y);
    const auto k2 = ode_rhs(model, axpy(y, 0.5 * dt, k1));
    const auto k3 = ode_rhs(model, axpy(y, 0.5 * dt, k2));
    const auto k4 = ode_rhs(model, axpy(y, dt, k3));
    ExtendedState o = y;
    const double w = dt / 6.0;
    o.s.C += w * (k1.dC + 2 * k2.dC + 2 * k3.dC + k4.dC);
    o.s.V += w * (k1.dV + 2 * k2.dV + 2 * k3.dV + k4.dV);
    o.s.U += w * (k1.dU + 2 * k2.dU + 2 * k3.dU + k4.dU);
    o.s.H += w * (k1.dH + 2 * k2.dH + 2 * k3.dH + k4.dH);
    o.int_c += w * (k1.dIc + 2 * k2.dIc + 2 * k3.dIc + k4.dIc);
    o.int_v2 += w * (k1.dIv2 + 2 * k2.dIv2 + 2 * k3.dIv2 + k4.dIv2);
    return o;
}

ExtendedState advance(const EffectiveModel& model, const ExtendedState& y, double dt, int substeps) {
    ExtendedState o = y;
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) o = rk4_step(model, o, h);
    return o;
}

double default_ode_step(double eps) { return std::min(0.0025 / eps, 0.125); }

Trajectory integrate_effective(const EffectiveModel& model, const ExtendedState& init, double t0, double t1, double dt,
                               std::size_t stride) {
    validate(model);
    if (!(dt > 0.0)) throw std::invalid_argument("ODE step must be positive");
    if (!(t1 >= t0)) throw std::invalid_argument("ODE horizon must satisfy t1 >= t0");
    if (!(init.s.C > 0.0)) throw std::invalid_argument("initial scaling C must be positive");
    if (stride == 0) stride = 1;
    const double inv0 = effective_invariant(model, init.s);
    Trajectory tr;
    tr.points.push_back({t0, init, 0.0});
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-12));
    ExtendedState y = init;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double ta = t0 + static_cast<double>(i - 1) * dt;
        const double tb = i == steps ? t1 : t0 + static_cast<double>(i) * dt;
        y = rk4_step(model, y, tb - ta);
        const double drift = effective_invariant(model, y.s) - inv0;
        if (std::abs(drift) > 1e-6 || !std::isfinite(drift))
            throw std::runtime_error("effective invariant drifted by " + std::to_string(drift) + " at t=" +
                                     std::to_string(tb) + "; step too large");
        if (!(y.s.C > 0.0)) throw std::runtime_error("effective scaling C left (0, inf)");
        if (i % stride == 0 || i == steps) tr.points.push_back({tb, y, drift});
    }
    return tr;
}

TurningPoint find_turning_point(const EffectiveModel& model, const Trajectory& tr) {
    TurningPoint tp;
    std::size_t first = 0;
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
        const double va = tr.points[i - 1].y.s.V, vb = tr.points[i].y.s.V;
        if ((va > 0.0 && vb <= 0.0) || (va < 0.0 && vb >= 0.0)) {
            if (tp.sign_changes == 0) first = i;
            ++tp.sign_changes;
        }
    }
    if (tp.sign_changes == 0) return tp;
    const auto& pa = tr.points[first - 1];
    const double span = tr.points[first].t - pa.t;
    auto vel = [&](double h) { return advance(model, pa.y, h, 4).s.V; };
    // bisection then secant polish on the step length
    double lo = 0.0, hi = span, vlo = pa.y.s.V;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, span); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = vel(mid);
        if ((vm > 0.0) == (vlo > 0.0)) {
            lo = mid;
            vlo = vm;
        } else {
            hi = mid;
        }
        if (vm == 0.0) {
            lo = hi = mid;
            break;
        }
    }
    const double h = 0.5 * (lo + hi);
    tp.t = pa.t + h;
    tp.s = advance(model, pa.y, h, 4).s;
    return tp;
}

std::string to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Transmitted: return "transmitted";
        case OutcomeKind::Reflected: return "reflected";
        case OutcomeKind::Critical: return "critical";
    }
    return "unknown";
}

namespace {

OutcomePrediction classify(double v0, double ratio, double exponent, double coef, double kappa_amp, const PotentialSpec& pot) {
    OutcomePrediction p;
    const double cinf = std::pow(ratio, exponent);
    if (ratio >= 1.0) {
        p.kind = OutcomeKind::Transmitted;
        p.c_inf = cinf;
        p.v_inf = std::sqrt(v0 * v0 + coef * (cinf - 1.0));
        p.lambda_inf = std::pow(pot.a_plus, -kappa_amp);
        return p;
    }
    p.threshold = coef * (1.0 - cinf);
    p.c0 = 1.0 - v0 * v0 / coef;
    const double d = v0 * v0 - p.threshold;
    if (std::abs(d) <= 1e-12) {
        p.kind = OutcomeKind::Critical;
        p.c_inf = p.c0;
        p.v_inf = 0.0;
        p.lambda_inf = std::pow(pot.a_plus, -kappa_amp);
    } else if (d < 0.0) {
        p.kind = OutcomeKind::Reflected;
        p.c_inf = 1.0;
        p.v_inf = -v0;
        p.lambda_inf = std::pow(pot.a_minus, -kappa_amp);
    } else {
        p.kind = OutcomeKind::Transmitted;
        p.c_inf = cinf;
        p.v_inf = std::sqrt(d);
        p.lambda_inf = std::pow(pot.a_plus, -kappa_amp);
    }
    return p;
}

}  // namespace

OutcomePrediction predict_outcome(double m, double v0, const PotentialSpec& pot) {
    if (!(v0 > 0.0)) throw std::invalid_argument("prediction needs v0 > 0");
    const auto ex = scaling_exponents(m);
    return classify(v0, pot.a_plus / pot.a_minus, 4.0 / (5.0 - m), 4.0 * ex.lambda0, 1.0 / (m - 1.0), pot);
}

OutcomePrediction predict_outcome_2d(double m, double v1, const PotentialSpec& pot, double kappa) {
    if (!(v1 > 0.0)) throw std::invalid_argument("prediction needs a positive x1 velocity");
    if (!(m >= 2.0 && m < 3.0)) throw std::invalid_argument("2D prediction needs m in [2,3)");
    return classify(v1, pot.a_plus / pot.a_minus, 2.0 / (3.0 - m), alpha0_2d(m, kappa), 1.0 / (m - 1.0), pot);
}

ComplexField galilean_boost(const ComplexField& u, double v2, double t) {
    if (u.grid.dim != 2) throw std::invalid_argument("galilean_boost needs a 2D field");
    if (v2 == 0.0) return u;
    const Grid& g = u.grid;
    CVec f = spectral_shift(g, u.values, v2 * t, 1);
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) f[i * n + j] *= std::polar(1.0, 0.5 * g.x(j) * v2 - 0.25 * v2 * v2 * t);
    return {g, f};
}

RefractionAngles refraction_angles(const double v_in[2], double m, const PotentialSpec& pot, double kappa) {
    if (!(v_in[0] > 0.0)) throw std::invalid_argument("incident x1 velocity must be positive");
    const auto pred = predict_outcome_2d(m, v_in[0], pot, kappa);
    RefractionAngles r;
    r.v_out[0] = pred.v_inf;
    r.v_out[1] = v_in[1];
    r.theta_minus = std::atan2(v_in[1], v_in[0]);
    r.theta_plus = std::atan2(r.v_out[1], r.v_out[0]);
    const double nin = std::hypot(v_in[0], v_in[1]);
    const double nout = std::hypot(r.v_out[0], r.v_out[1]);
    r.law_residual = std::abs(nin * std::sin(r.theta_minus) - nout * std::sin(r.theta_plus));
    return r;
}

}  // namespace nls
