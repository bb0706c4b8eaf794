#include "satenq/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "satenq/errors.hpp"
#include "satenq/serialize.hpp"

namespace satenq {

namespace {

int argmax_action(const std::vector<double>& q) {
    return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

}  // namespace

WeakEnsemble::WeakEnsemble(const EnsembleConfig& cfg, std::vector<std::unique_ptr<Env>> envs,
                           Baseline* baseline, Rng& master)
    : cfg_(cfg), envs_(std::move(envs)), baseline_(baseline), baseline_rng_(master.stream(4)) {
    if (cfg.k < 1) throw ConfigError("WeakEnsemble: k must be >= 1");
    if (static_cast<int>(envs_.size()) != cfg.k)
        throw ContractError("WeakEnsemble: need one environment per learner");
    if (baseline_ == nullptr) throw ContractError("WeakEnsemble: baseline is required");
    if (cfg.weak_layer_sizes.size() < 2)
        throw ConfigError("WeakEnsemble: weak_layer_sizes must have input and output");
    if (cfg.eps_decay_steps <= 0)
        throw ConfigError("WeakEnsemble: eps_decay_steps must be positive");
    validate(cfg.sat);

    const int in = cfg.weak_layer_sizes.front();
    const int out = cfg.weak_layer_sizes.back();
    learners_.reserve(cfg.k);
    for (int i = 0; i < cfg.k; ++i) {
        if (envs_[i]->observation_dim() != in || envs_[i]->action_count() != out)
            throw ShapeError("WeakEnsemble: net shape does not match environment");
        Rng init = master.stream(0, static_cast<std::uint64_t>(i));
        learners_.push_back(make_learner(cfg.weak_layer_sizes, cfg.buffer_capacity, init, cfg.opt));
        env_rngs_.push_back(master.stream(1, static_cast<std::uint64_t>(i)));
        action_rngs_.push_back(master.stream(2, static_cast<std::uint64_t>(i)));
        batch_rngs_.push_back(master.stream(3, static_cast<std::uint64_t>(i)));
    }
}

double WeakEnsemble::current_epsilon() const {
    const double frac =
        std::min(1.0, static_cast<double>(env_steps_) / static_cast<double>(cfg_.eps_decay_steps));
    return cfg_.eps_start + (cfg_.eps_end - cfg_.eps_start) * frac;
}

void WeakEnsemble::run_learner_episode(int i, double& episode_return) {
    LearnerState& learner = learners_[i];
    Env& env = *envs_[i];
    std::vector<double> state = env.reset(env_rngs_[i]);
    std::vector<std::vector<double>> visited;
    visited.push_back(state);
    episode_return = 0.0;
    while (!env.episode_done()) {
        learner.epsilon = current_epsilon();
        int action;
        if (action_rngs_[i].uniform() < learner.epsilon) {
            action = action_rngs_[i].uniform_int(env.action_count());
        } else {
            action = argmax_action(forward(learner.online, state));
        }
        const EnvStepResult res = env.step(action, env_rngs_[i]);
        episode_return += res.reward;
        // Truncation is not a real terminal: keep bootstrapping through it.
        learner.buffer.push(
            Transition{state, res.next_state, action, res.reward, res.done && !res.truncated});
        const std::size_t n =
            std::min<std::size_t>(cfg_.batch_size, learner.buffer.size());
        const auto batch = learner.buffer.sample(n, batch_rngs_[i]);
        auto [loss, grads] = sat_loss_and_grad(batch, learner, *baseline_, cfg_.sat);
        (void)loss;
        adam_step(learner.online, grads, learner.opt);
        state = res.next_state;
        visited.push_back(state);
        ++env_steps_;
    }
    baseline_->on_episode_end(visited, episode_return, baseline_rng_);
}

std::vector<double> WeakEnsemble::phase1_episode() {
    std::vector<double> returns(learners_.size(), 0.0);
    for (int i = 0; i < k(); ++i) run_learner_episode(i, returns[i]);
    ++episodes_;
    if (episodes_ % cfg_.sat.target_sync_interval == 0)
        for (auto& learner : learners_) sync_target(learner);
    return returns;
}

std::vector<double> WeakEnsemble::q_ens(const std::vector<double>& state) const {
    const int out = learners_.front().online.output_dim();
    std::vector<double> mean(out, 0.0);
    for (const auto& learner : learners_) {
        const auto q = forward(learner.online, state);
        for (int a = 0; a < out; ++a) mean[a] += q[a];
    }
    const double inv_k = 1.0 / static_cast<double>(k());
    for (double& v : mean) v *= inv_k;
    return mean;
}

double WeakEnsemble::diversity(const std::vector<std::vector<double>>& states) const {
    if (states.empty()) throw ContractError("WeakEnsemble::diversity: empty probe batch");
    const int out = learners_.front().online.output_dim();
    const double inv_k = 1.0 / static_cast<double>(k());
    double total = 0.0;
    std::vector<std::vector<double>> per_learner(k());
    for (const auto& state : states) {
        for (int i = 0; i < k(); ++i) per_learner[i] = forward(learners_[i].online, state);
        for (int a = 0; a < out; ++a) {
            double s1 = 0.0, s2 = 0.0;
            for (int i = 0; i < k(); ++i) {
                const double v = per_learner[i][a];
                s1 += v;
                s2 += v * v;
            }
            const double mean = s1 * inv_k;
            total += std::sqrt(std::max(0.0, s2 * inv_k - mean * mean));
        }
    }
    return total / (static_cast<double>(states.size()) * out);
}

std::vector<const ReplayBuffer*> WeakEnsemble::buffers() const {
    std::vector<const ReplayBuffer*> out;
    out.reserve(learners_.size());
    for (const auto& learner : learners_) out.push_back(&learner.buffer);
    return out;
}

nlohmann::json WeakEnsemble::checkpoint() const {
    nlohmann::json learners = nlohmann::json::array();
    for (std::size_t i = 0; i < learners_.size(); ++i) {
        learners.push_back({{"online", mlp_to_json(learners_[i].online)},
                            {"target", mlp_to_json(learners_[i].target)},
                            {"opt", adam_to_json(learners_[i].opt)},
                            {"buffer_size", learners_[i].buffer.size()},
                            {"epsilon", learners_[i].epsilon},
                            {"env_rng", env_rngs_[i].state_string()},
                            {"action_rng", action_rngs_[i].state_string()},
                            {"batch_rng", batch_rngs_[i].state_string()}});
    }
    return {{"schema_version", 1},
            {"phase", 1},
            {"episodes", episodes_},
            {"env_steps", env_steps_},
            {"learners", learners},
            {"baseline", baseline_->to_json()},
            {"baseline_rng", baseline_rng_.state_string()}};
}

}  // namespace satenq
