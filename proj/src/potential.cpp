#include "nlslab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nls {

PotentialSpec constant_potential(double value, double epsilon) {
    PotentialSpec p;
    p.epsilon = epsilon;
    p.a_minus = value;
    p.a_plus = value;
    return p;
}

std::array<double, 4> eval_potential_all(const PotentialSpec& spec, double r) {
    const double mu = spec.steepness;
    const double h = 0.5 * (spec.a_plus - spec.a_minus);
    const double t = std::tanh(mu * r);
    const double ch = std::cosh(mu * r);
    const double s = 1.0 / (ch * ch);  // sech^2 without the cancellation of 1 - tanh^2
    return {
        0.5 * (spec.a_minus + spec.a_plus) + h * t,
        h * mu * s,
        -2.0 * h * mu * mu * t * s,
        -2.0 * h * mu * mu * mu * s * (s - 2.0 * t * t),
    };
}

double eval_potential(const PotentialSpec& spec, double r, int order) {
    if (order < 0 || order > 3) throw std::invalid_argument("potential derivative order must be 0..3");
    return eval_potential_all(spec, r)[static_cast<std::size_t>(order)];
}

std::string to_string(Direction d) { return d == Direction::Increasing ? "increasing" : "decreasing"; }

Direction direction_from_string(const std::string& s) {
    if (s == "increasing") return Direction::Increasing;
    if (s == "decreasing") return Direction::Decreasing;
    throw std::invalid_argument("unknown potential direction: " + s);
}

namespace {

// least-squares slope of log|f| against |r| over the tail samples
double tail_rate(const std::vector<double>& r, const std::vector<double>& f) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double y = std::abs(f[i]);
        if (!(y > 0.0) || !std::isfinite(std::log(y))) continue;
        const double x = std::abs(r[i]);
        const double ly = std::log(y);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
        ++cnt;
    }
    if (cnt < 2) return 0.0;
    const double den = cnt * sxx - sx * sx;
    if (den == 0.0) return 0.0;
    return -(cnt * sxy - sx * sy) / den;
}

}  // namespace

HypothesisReport validate_hypotheses(const PotentialSpec& spec, double r_min, double r_max, int samples) {
    HypothesisReport rep;
    const double mu = spec.steepness;
    rep.expected_rate = 2.0 * mu;
    auto fail = [&](const std::string& msg) {
        rep.valid = false;
        rep.violations.push_back(msg);
    };
    if (!(mu > 0.0)) {
        fail("steepness must be positive");
        return rep;
    }
    if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) fail("epsilon must lie in (0,1)");
    if (r_min > -20.0 / mu || r_max < 20.0 / mu) fail("sample range must cover [-20/mu0, 20/mu0]");
    const bool inc = spec.direction == Direction::Increasing;
    if (inc && !(spec.a_minus < spec.a_plus)) fail("increasing potential needs a_minus < a_plus");
    if (!inc && !(spec.a_plus < spec.a_minus)) fail("decreasing potential needs a_plus < a_minus");
    if (!(std::min(spec.a_minus, spec.a_plus) > 0.0)) fail("potential must stay positive");

    const double lo = std::min(spec.a_minus, spec.a_plus);
    const double hi = std::max(spec.a_minus, spec.a_plus);
    bool sign_ok = true, bounds_ok = true;
    for (int i = 0; i < samples; ++i) {
        const double r = r_min + (r_max - r_min) * i / (samples - 1);
        const auto a = eval_potential_all(spec, r);
        // tanh saturates in double precision for |mu r| > ~19, so the bound check is closed
        if (a[0] < lo || a[0] > hi) bounds_ok = false;
        if (inc ? !(a[1] > 0.0) : !(a[1] < 0.0)) sign_ok = false;
    }
    if (!sign_ok) fail(inc ? "a' > 0 violated" : "a' < 0 violated");
    if (!bounds_ok) fail("a leaves the interval spanned by its limits");

    // decay rates over |r| in [5/mu, 15/mu], both tails
    for (int order = 1; order <= 3; ++order) {
        double rate = 1e300;
        for (int side : {-1, 1}) {
            std::vector<double> rs, fs;
            for (int i = 0; i <= 200; ++i) {
                const double r = side * (5.0 + 10.0 * i / 200.0) / mu;
                rs.push_back(r);
                fs.push_back(eval_potential(spec, r, order));
            }
            rate = std::min(rate, tail_rate(rs, fs));
        }
        rep.decay_rate[order - 1] = rate;
        if (!(rate >= 0.9 * rep.expected_rate)) fail("a^(" + std::to_string(order) + ") does not decay exponentially fast enough");
    }
    return rep;
}

}  // namespace nls
