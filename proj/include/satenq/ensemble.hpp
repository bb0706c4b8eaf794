#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "satenq/baseline.hpp"
#include "satenq/env.hpp"
#include "satenq/satcore.hpp"

namespace satenq {

struct EnsembleConfig {
    int k = 4;
    std::vector<int> weak_layer_sizes;  // full architecture, input to output
    std::size_t buffer_capacity = 10000;
    int batch_size = 64;
    SatConfig sat;
    AdamConfig opt;
    double eps_start = 1.0;
    double eps_end = 0.05;
    long long eps_decay_steps = 1;  // ensemble env steps to reach eps_end
};

// Phase 1: K weak learners, each with its own environment instance, private
// replay buffer and random streams, sharing only the aspiration baseline.
// One call to phase1_episode() runs one episode per learner (round-robin)
// with one gradient step per environment step.
class WeakEnsemble {
public:
    WeakEnsemble(const EnsembleConfig& cfg, std::vector<std::unique_ptr<Env>> envs,
                 Baseline* baseline, Rng& master);

    // Runs one episode for every learner; returns the per-learner episode
    // returns for this round. Syncs targets after rounds divisible by
    // target_sync_interval.
    std::vector<double> phase1_episode();

    // Mean over the K online nets, per action.
    std::vector<double> q_ens(const std::vector<double>& state) const;

    // Mean across states and actions of the across-learner population
    // standard deviation of Q values.
    double diversity(const std::vector<std::vector<double>>& states) const;

    int k() const { return static_cast<int>(learners_.size()); }
    long long env_steps() const { return env_steps_; }
    int episodes() const { return episodes_; }
    double current_epsilon() const;

    const std::vector<LearnerState>& learners() const { return learners_; }
    std::vector<const ReplayBuffer*> buffers() const;

    nlohmann::json checkpoint() const;

private:
    void run_learner_episode(int i, double& episode_return);

    EnsembleConfig cfg_;
    std::vector<LearnerState> learners_;
    std::vector<std::unique_ptr<Env>> envs_;
    Baseline* baseline_;
    std::vector<Rng> env_rngs_, action_rngs_, batch_rngs_;
    Rng baseline_rng_;
    long long env_steps_ = 0;
    int episodes_ = 0;
};

}  // namespace satenq
