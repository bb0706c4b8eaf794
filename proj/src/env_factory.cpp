#include "satenq/env.hpp"

#include "satenq/acrobot.hpp"
#include "satenq/cartpole.hpp"
#include "satenq/errors.hpp"
#include "satenq/gridworld.hpp"

namespace satenq {

std::unique_ptr<Env> make_env(const EnvSpec& spec) {
    std::unique_ptr<Env> env;
    switch (spec.kind) {
        case EnvKind::gridworld: {
            GridWorldConfig cfg = spec.gridworld;
            if (spec.max_steps_override > 0) cfg.max_steps = spec.max_steps_override;
            env = std::make_unique<GridWorld>(cfg);
            break;
        }
        case EnvKind::cartpole:
            env = std::make_unique<CartPole>(spec.max_steps_override > 0 ? spec.max_steps_override
                                                                         : 500);
            break;
        case EnvKind::acrobot:
            env = std::make_unique<Acrobot>(spec.max_steps_override > 0 ? spec.max_steps_override
                                                                        : 500);
            break;
    }
    if (!env) throw ConfigError("make_env: unknown environment kind");
    if (spec.action_noise_prob > 0.0)
        env = std::make_unique<ActionNoiseEnv>(std::move(env), spec.action_noise_prob);
    return env;
}

std::string env_kind_name(EnvKind kind) {
    switch (kind) {
        case EnvKind::gridworld: return "gridworld";
        case EnvKind::cartpole: return "cartpole";
        case EnvKind::acrobot: return "acrobot";
    }
    throw ConfigError("env_kind_name: unknown environment kind");
}

EnvKind env_kind_from_name(const std::string& name) {
    if (name == "gridworld") return EnvKind::gridworld;
    if (name == "cartpole") return EnvKind::cartpole;
    if (name == "acrobot") return EnvKind::acrobot;
    throw ConfigError("unknown environment name: " + name);
}

ActionNoiseEnv::ActionNoiseEnv(std::unique_ptr<Env> inner, double noise_prob)
    : inner_(std::move(inner)), noise_prob_(noise_prob) {
    if (noise_prob < 0.0 || noise_prob > 1.0)
        throw ConfigError("ActionNoiseEnv: noise_prob must lie in [0, 1]");
}

EnvStepResult ActionNoiseEnv::step(int action, Rng& rng) {
    // The factory only wraps when noise_prob > 0, so an unwrapped run and a
    // noise-0 run consume identical random streams.
    if (noise_prob_ > 0.0 && rng.uniform() < noise_prob_)
        action = rng.uniform_int(inner_->action_count());
    return inner_->step(action, rng);
}

}  // namespace satenq
