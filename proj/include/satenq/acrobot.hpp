#pragma once

#include "satenq/env.hpp"

namespace satenq {

// Two-link underactuated swing-up with unit links and masses, torque in
// {-1, 0, +1} on the elbow, RK4 at dt=0.2. Reward -1 per step until the tip
// rises a link length above the pivot (that step pays 0); cap 500 steps.
// Observation is (cos t1, sin t1, cos t2, sin t2, w1, w2).
class Acrobot : public Env {
public:
    explicit Acrobot(int max_steps = 500);

    int observation_dim() const override { return 6; }
    int action_count() const override { return 3; }

    std::vector<double> reset(Rng& rng) override;
    EnvStepResult step(int action, Rng& rng) override;
    bool episode_done() const override { return done_; }
    int steps_taken() const override { return steps_; }
    int max_steps() const override { return max_steps_; }

    // Internal state (theta1, theta2, omega1, omega2).
    const std::vector<double>& raw_state() const { return state_; }

private:
    std::vector<double> observation() const;

    int max_steps_;
    std::vector<double> state_;
    int steps_ = 0;
    bool done_ = true;
};

}  // namespace satenq
