#include "satenq/acrobot.hpp"

#include <array>
#include <cmath>

#include "satenq/errors.hpp"

namespace satenq {

namespace {

constexpr double kLink1 = 1.0, kLink2 = 1.0;
constexpr double kMass1 = 1.0, kMass2 = 1.0;
constexpr double kCom1 = 0.5, kCom2 = 0.5;  // centers of mass
constexpr double kInertia1 = 1.0, kInertia2 = 1.0;
constexpr double kGravity = 9.8;
constexpr double kDt = 0.2;
constexpr double kMaxVel1 = 4.0 * M_PI;
constexpr double kMaxVel2 = 9.0 * M_PI;

using State4 = std::array<double, 4>;

// Equations of motion of the two-link pendulum (Sutton & Barto formulation).
State4 dynamics(const State4& s, double torque) {
    const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
    const double d1 = kMass1 * kCom1 * kCom1 +
                      kMass2 * (kLink1 * kLink1 + kCom2 * kCom2 +
                                2.0 * kLink1 * kCom2 * std::cos(theta2)) +
                      kInertia1 + kInertia2;
    const double d2 = kMass2 * (kCom2 * kCom2 + kLink1 * kCom2 * std::cos(theta2)) + kInertia2;
    const double phi2 = kMass2 * kCom2 * kGravity * std::cos(theta1 + theta2 - M_PI / 2.0);
    const double phi1 = -kMass2 * kLink1 * kCom2 * dtheta2 * dtheta2 * std::sin(theta2) -
                        2.0 * kMass2 * kLink1 * kCom2 * dtheta2 * dtheta1 * std::sin(theta2) +
                        (kMass1 * kCom1 + kMass2 * kLink1) * kGravity *
                            std::cos(theta1 - M_PI / 2.0) +
                        phi2;
    const double ddtheta2 =
        (torque + d2 / d1 * phi1 -
         kMass2 * kLink1 * kCom2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
        (kMass2 * kCom2 * kCom2 + kInertia2 - d2 * d2 / d1);
    const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

State4 rk4_step(const State4& s, double torque, double h) {
    auto add = [](const State4& a, const State4& b, double scale) {
        State4 out;
        for (int i = 0; i < 4; ++i) out[i] = a[i] + scale * b[i];
        return out;
    };
    const State4 k1 = dynamics(s, torque);
    const State4 k2 = dynamics(add(s, k1, h / 2.0), torque);
    const State4 k3 = dynamics(add(s, k2, h / 2.0), torque);
    const State4 k4 = dynamics(add(s, k3, h), torque);
    State4 out;
    for (int i = 0; i < 4; ++i)
        out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

double wrap_pi(double x) {
    const double two_pi = 2.0 * M_PI;
    x = std::fmod(x + M_PI, two_pi);
    if (x < 0.0) x += two_pi;
    return x - M_PI;
}

}  // namespace

Acrobot::Acrobot(int max_steps) : max_steps_(max_steps), state_(4, 0.0) {
    if (max_steps <= 0) throw ContractError("Acrobot: max_steps must be positive");
}

std::vector<double> Acrobot::observation() const {
    return {std::cos(state_[0]), std::sin(state_[0]), std::cos(state_[1]),
            std::sin(state_[1]), state_[2], state_[3]};
}

std::vector<double> Acrobot::reset(Rng& rng) {
    for (auto& v : state_) v = rng.uniform(-0.1, 0.1);
    steps_ = 0;
    done_ = false;
    return observation();
}

EnvStepResult Acrobot::step(int action, Rng&) {
    if (done_) throw ContractError("Acrobot::step: episode already done");
    if (action < 0 || action >= 3) throw ContractError("Acrobot::step: invalid action");

    const double torque = static_cast<double>(action - 1);
    State4 s = {state_[0], state_[1], state_[2], state_[3]};
    s = rk4_step(s, torque, kDt);
    s[0] = wrap_pi(s[0]);
    s[1] = wrap_pi(s[1]);
    s[2] = std::clamp(s[2], -kMaxVel1, kMaxVel1);
    s[3] = std::clamp(s[3], -kMaxVel2, kMaxVel2);
    state_ = {s[0], s[1], s[2], s[3]};
    ++steps_;

    // Tip height above the pivot: -l1 cos(t1) - l2 cos(t1 + t2).
    const bool reached =
        -kLink1 * std::cos(s[0]) - kLink2 * std::cos(s[0] + s[1]) > kLink1;

    EnvStepResult res;
    res.reward = reached ? 0.0 : -1.0;
    if (reached) {
        res.done = true;
    } else if (steps_ >= max_steps_) {
        res.done = true;
        res.truncated = true;
    }
    done_ = res.done;
    res.next_state = observation();
    return res;
}

}  // namespace satenq
