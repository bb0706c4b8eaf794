#pragma once

#include "satenq/env.hpp"

namespace satenq {

// Canonical pole balancer: cart mass 1.0, pole mass 0.1, half-length 0.5,
// force 10 N, explicit Euler at dt=0.02. Reward +1 per step; terminates when
// |angle| > 12 deg or |x| > 2.4, truncates at max_steps (default 500).
class CartPole : public Env {
public:
    explicit CartPole(int max_steps = 500);

    int observation_dim() const override { return 4; }
    int action_count() const override { return 2; }

    std::vector<double> reset(Rng& rng) override;
    EnvStepResult step(int action, Rng& rng) override;
    bool episode_done() const override { return done_; }
    int steps_taken() const override { return steps_; }
    int max_steps() const override { return max_steps_; }

    // State is (x, x_dot, theta, theta_dot).
    const std::vector<double>& raw_state() const { return state_; }

private:
    int max_steps_;
    std::vector<double> state_;
    int steps_ = 0;
    bool done_ = true;
};

}  // namespace satenq
