#pragma once

#include <memory>
#include <string>
#include <vector>

#include "satenq/rng.hpp"

namespace satenq {

struct EnvStepResult {
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;       // terminal or step cap
    bool truncated = false;  // step cap only
};

// One stepping contract for all environments. Instances hold no RNG; the
// caller owns the stream and passes it in, so the same (seed, action
// sequence) always reproduces the same trajectory.
class Env {
public:
    virtual ~Env() = default;

    virtual int observation_dim() const = 0;
    virtual int action_count() const = 0;

    virtual std::vector<double> reset(Rng& rng) = 0;
    // Stepping a finished episode is a contract error.
    virtual EnvStepResult step(int action, Rng& rng) = 0;

    virtual bool episode_done() const = 0;
    virtual int steps_taken() const = 0;
    virtual int max_steps() const = 0;
};

enum class EnvKind { gridworld, cartpole, acrobot };

struct GridWorldConfig {
    int size = 8;
    double slip_prob = 0.2;
    double step_penalty = -0.01;
    double goal_reward = 1.0;
    int max_steps = 200;
};

// Environment selection + parameters; comes from the harness config.
struct EnvSpec {
    EnvKind kind = EnvKind::cartpole;
    GridWorldConfig gridworld;
    double action_noise_prob = 0.0;  // i.i.d. per step, replaces the action
    int max_steps_override = 0;      // 0 = environment default
};

std::unique_ptr<Env> make_env(const EnvSpec& spec);

std::string env_kind_name(EnvKind kind);
EnvKind env_kind_from_name(const std::string& name);

// Wraps another environment: with probability noise_prob the executed action
// is replaced by a uniformly random action before the dynamics run.
class ActionNoiseEnv : public Env {
public:
    ActionNoiseEnv(std::unique_ptr<Env> inner, double noise_prob);

    int observation_dim() const override { return inner_->observation_dim(); }
    int action_count() const override { return inner_->action_count(); }
    std::vector<double> reset(Rng& rng) override { return inner_->reset(rng); }
    EnvStepResult step(int action, Rng& rng) override;
    bool episode_done() const override { return inner_->episode_done(); }
    int steps_taken() const override { return inner_->steps_taken(); }
    int max_steps() const override { return inner_->max_steps(); }

private:
    std::unique_ptr<Env> inner_;
    double noise_prob_;
};

}  // namespace satenq
