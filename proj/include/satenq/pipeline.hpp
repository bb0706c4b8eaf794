#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "satenq/ensemble.hpp"
#include "satenq/env.hpp"

namespace satenq {

enum class Algorithm { sat_enq, dqn, double_dqn };

std::string algorithm_name(Algorithm a);

// Target formula used by the student / baseline trainers.
enum class TdFlavor { dqn, double_dqn };

// Everything one training run needs. `label` names the record (ablations
// keep kind=sat_enq but carry their own label, e.g. "sat_enq_k1").
struct RunConfig {
    Algorithm kind = Algorithm::sat_enq;
    std::string label = "sat_enq";
    EnvSpec env;
    std::uint64_t seed = 0;

    long long total_steps = 20000;  // environment-step budget
    double phase1_fraction = 0.5;   // share of the budget spent on weak learners
    // Each weak learner steps its own environment, so Phase 1's allocation can
    // be read per learner (each gets the full share) or split across the
    // ensemble. Per-learner is the default; the record's env_steps field keeps
    // the comparison honest either way.
    bool phase1_per_learner = true;
    int n_distill = 2000;           // distillation gradient steps
    bool do_polish = true;

    int k = 4;
    int batch_size = 64;
    SatConfig sat;
    AdamConfig opt;

    int weak_hidden = 32;
    int weak_hidden_layers = 1;
    int student_hidden = 64;
    int student_hidden_layers = 2;

    std::size_t weak_buffer_capacity = 10000;
    std::size_t student_buffer_capacity = 20000;

    double baseline_decay = 0.99;
    int baseline_hidden = 32;
    int baseline_buffer_capacity = 5000;
    int baseline_batch = 64;
    // Regression steps per finished episode for the learned baseline. One
    // step lets the aspiration lag far behind fast-improving learners, which
    // keeps the clip binding longer than the ratchet intends.
    int baseline_train_steps = 1;

    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_fraction = 0.5;  // share of the phase over which to decay
    double polish_eps_start = 0.2;
    double polish_eps_end = 0.05;
    double polish_eps_decay_fraction = 0.5;
    double polish_lr = 1e-3;  // fine-tuning rate, decoupled from Phase 1
    // Seed the polish replay buffer with the pooled Phase-1 experience, so
    // early fine-tuning batches mix stale-but-diverse data with fresh
    // on-policy transitions instead of churning on a near-empty buffer.
    bool polish_warm_buffer = true;

    int eval_episodes = 100;
    int diversity_probe_states = 256;
};

void validate(const RunConfig& cfg);

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

// FNV-1a over the canonical config document; part of the record identity.
std::uint64_t run_config_hash(const RunConfig& cfg);

// Full result record for one (algorithm, env, seed) cell.
struct RunMetrics {
    std::string algorithm;
    std::string env_name;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    double eval_return_mean = 0.0;
    double eval_return_std = 0.0;
    double success_rate = 0.0;  // fraction of greedy eval episodes succeeding
    std::vector<double> eval_returns;

    bool failed = false;             // catastrophic-failure flag (threshold rule)
    std::string failure_reason;      // nonempty when a numeric abort ended the run

    std::vector<double> train_curve;  // per-episode training returns
    long long env_steps = 0;
    long long phase1_env_steps = 0;
    int phase1_rounds = 0;

    double diversity = 0.0;  // ensemble spread at Phase-1 end
    bool has_diversity = false;
    double distill_first_window = 0.0;  // mean loss over the first 10% of steps
    double distill_final_window = 0.0;  // mean loss over the last 10%

    double wall_seconds = 0.0;
    long long student_params = 0;
    long long weak_params_total = 0;
    long long baseline_params = 0;

    nlohmann::json final_policy;  // greedy-net checkpoint, null if the run aborted
    bool has_policy = false;

    nlohmann::json to_json() const;
    static RunMetrics from_json(const nlohmann::json& j);
};

// Environment-specific success / failure conventions.
bool episode_success(EnvKind kind, bool terminal, bool truncated);
double optimal_reference(const EnvSpec& spec);
double worst_case_return(const EnvSpec& spec);
// Below this final evaluation return a run counts as a catastrophic failure.
double failure_threshold(const EnvSpec& spec);

struct EvalResult {
    std::vector<double> returns;
    double mean = 0.0;
    double stddev = 0.0;
    double success_rate = 0.0;
};

// Greedy rollouts (no exploration); rng drives environment dynamics only.
EvalResult evaluate_policy(const MlpParams& net, const EnvSpec& spec, int episodes, Rng& rng);

// The Phase-2 student: same structure as a weak learner, larger net.
struct StudentState {
    MlpParams online;
    MlpParams target;
    AdamState opt;
    ReplayBuffer buffer;
};

StudentState make_student(const std::vector<int>& layer_sizes, std::size_t buffer_capacity,
                          Rng& rng, AdamConfig opt_cfg = {});

// Per-sample TD target; done transitions return r without bootstrapping.
double td_target(const Transition& t, const MlpParams& online, const MlpParams& target,
                 double gamma, TdFlavor flavor);

std::pair<double, MlpGrads> td_loss_and_grad(const std::vector<Transition>& batch,
                                             StudentState& student, double gamma,
                                             TdFlavor flavor);

// Regresses the student onto the ensemble mean over pooled states: mean over
// batch states and all actions of (Q_student - Q_ens)^2. Returns the per-step
// loss curve.
std::vector<double> distill(StudentState& student, const PooledView& pool,
                            const WeakEnsemble& ensemble, int steps, int batch_size, Rng& rng);

struct TrainLoopConfig {
    TdFlavor flavor = TdFlavor::double_dqn;
    long long steps = 0;  // environment-step budget
    double gamma = 0.99;
    int batch_size = 64;
    double eps_start = 1.0;
    double eps_end = 0.05;
    long long eps_decay_steps = 1;
    int target_sync_interval = 10;  // episodes
};

// epsilon-greedy collection + one gradient step per environment step. Stops
// when the step budget runs out, mid-episode if necessary; returns the
// returns of completed episodes.
std::vector<double> dqn_train_loop(StudentState& student, Env& env, const TrainLoopConfig& cfg,
                                   Rng& env_rng, Rng& action_rng, Rng& batch_rng);

RunMetrics run_sat_enq(const RunConfig& cfg);
RunMetrics run_baseline(const RunConfig& cfg);

// Dispatch + wall time + numeric-failure capture. Never throws on training
// divergence: the record carries the failure instead.
RunMetrics execute_run(const RunConfig& cfg);

}  // namespace satenq
