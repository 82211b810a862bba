#pragma once

#include <array>
#include <string>
#include <vector>

namespace nls {

enum class Direction { Increasing, Decreasing };

// a(r) = (a_minus + a_plus)/2 + (a_plus - a_minus)/2 * tanh(steepness * r), evaluated at r = eps * x
struct PotentialSpec {
    Direction direction = Direction::Increasing;
    double epsilon = 0.05;
    double a_minus = 1.0;
    double a_plus = 2.0;
    double steepness = 1.0;
};

// a == value everywhere; derivatives vanish
PotentialSpec constant_potential(double value, double epsilon = 0.05);

double eval_potential(const PotentialSpec& spec, double r, int order);
// a, a', a'', a''' at r
std::array<double, 4> eval_potential_all(const PotentialSpec& spec, double r);

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct HypothesisReport {
    bool valid = true;
    std::vector<std::string> violations;
    double expected_rate = 0.0;
    // fitted exponential decay rates of |a'|, |a''|, |a'''| in the tails
    std::array<double, 3> decay_rate{0.0, 0.0, 0.0};
};

HypothesisReport validate_hypotheses(const PotentialSpec& spec, double r_min, double r_max, int samples = 4001);

}  // namespace nls
