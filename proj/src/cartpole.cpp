#include "satenq/cartpole.hpp"

#include <cmath>

#include "satenq/errors.hpp"

namespace satenq {

namespace {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kLength = 0.5;  // half the pole
constexpr double kPoleMassLength = kMassPole * kLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * M_PI / 360.0;
constexpr double kXLimit = 2.4;
}  // namespace

CartPole::CartPole(int max_steps) : max_steps_(max_steps), state_(4, 0.0) {
    if (max_steps <= 0) throw ContractError("CartPole: max_steps must be positive");
}

std::vector<double> CartPole::reset(Rng& rng) {
    for (auto& v : state_) v = rng.uniform(-0.05, 0.05);
    steps_ = 0;
    done_ = false;
    return state_;
}

EnvStepResult CartPole::step(int action, Rng&) {
    if (done_) throw ContractError("CartPole::step: episode already done");
    if (action < 0 || action >= 2) throw ContractError("CartPole::step: invalid action");

    double x = state_[0], x_dot = state_[1], theta = state_[2], theta_dot = state_[3];
    const double force = action == 1 ? kForceMag : -kForceMag;
    const double costheta = std::cos(theta);
    const double sintheta = std::sin(theta);

    const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sintheta) / kTotalMass;
    const double theta_acc = (kGravity * sintheta - costheta * temp) /
                             (kLength * (4.0 / 3.0 - kMassPole * costheta * costheta / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * costheta / kTotalMass;

    x += kTau * x_dot;
    x_dot += kTau * x_acc;
    theta += kTau * theta_dot;
    theta_dot += kTau * theta_acc;
    state_ = {x, x_dot, theta, theta_dot};
    ++steps_;

    EnvStepResult res;
    res.reward = 1.0;
    if (std::abs(x) > kXLimit || std::abs(theta) > kThetaLimit) {
        res.done = true;
    } else if (steps_ >= max_steps_) {
        res.done = true;
        res.truncated = true;
    }
    done_ = res.done;
    res.next_state = state_;
    return res;
}

}  // namespace satenq
