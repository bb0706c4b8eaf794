#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "satenq/mlp.hpp"
#include "satenq/rng.hpp"

namespace satenq {

// Dynamic aspiration level B(s): a per-state threshold of "good enough"
// return that rises as the agent improves. Shared read-mostly across weak
// learners; writes happen only at episode boundaries (single writer).
class Baseline {
public:
    virtual ~Baseline() = default;

    virtual double query(const std::vector<double>& state) const = 0;
    // Called once per finished episode with the visited states (in order,
    // duplicates allowed) and the undiscounted episode return G.
    virtual void on_episode_end(const std::vector<std::vector<double>>& visited, double episode_return,
                                Rng& rng) = 0;
    virtual long long parameter_count() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

// Moving-average table for discrete states. The state key is the index of
// the largest observation component (the lit cell of a one-hot vector).
class EpisodicBaseline : public Baseline {
public:
    explicit EpisodicBaseline(double decay, double default_value = 0.0);

    double query(const std::vector<double>& state) const override;
    double query_key(int key) const;

    void on_episode_end(const std::vector<std::vector<double>>& visited, double episode_return,
                        Rng& rng) override;
    // Keyed form: every distinct key gets B <- decay*B + (1-decay)*G once.
    void update(const std::vector<int>& visited_keys, double episode_return);
    // Direct assignment; used by checkpoint restore.
    void set(int key, double value);

    long long parameter_count() const override { return static_cast<long long>(table_.size()); }
    nlohmann::json to_json() const override;

    double decay() const { return decay_; }
    const std::unordered_map<int, double>& table() const { return table_; }

private:
    double decay_;
    double default_value_;
    std::unordered_map<int, double> table_;
};

// Regression network B_phi(s) for continuous states, trained on recent
// (state, G) pairs with squared error. One gradient step per episode.
class LearnedBaseline : public Baseline {
public:
    LearnedBaseline(int state_dim, Rng& rng, int hidden = 32, double lr = 1e-3,
                    int buffer_capacity = 5000, int batch_size = 64, int episode_train_steps = 1);
    // Restore path: takes ownership of an existing net + optimizer.
    LearnedBaseline(MlpParams net, AdamState opt, int buffer_capacity, int batch_size,
                    int episode_train_steps = 1);

    double query(const std::vector<double>& state) const override;
    void on_episode_end(const std::vector<std::vector<double>>& visited, double episode_return,
                        Rng& rng) override;

    // One Adam step on mean (B(s) - G)^2 over the batch; returns the
    // pre-step loss.
    double train_step(const std::vector<std::vector<double>>& states,
                      const std::vector<double>& returns);

    long long parameter_count() const override { return count_parameters(net_); }
    nlohmann::json to_json() const override;

    const MlpParams& net() const { return net_; }
    int stored_pairs() const { return static_cast<int>(states_.size()); }

private:
    MlpParams net_;
    AdamState opt_;
    int buffer_capacity_;
    int batch_size_;
    int episode_train_steps_;  // regression steps per finished episode
    // Ring of recent (state, return) training pairs.
    std::vector<std::vector<double>> states_;
    std::vector<double> returns_;
    std::size_t next_slot_ = 0;
};

std::unique_ptr<Baseline> baseline_from_json(const nlohmann::json& j);

int one_hot_key(const std::vector<double>& state);

}  // namespace satenq
