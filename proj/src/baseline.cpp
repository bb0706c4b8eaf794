#include "satenq/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "satenq/errors.hpp"
#include "satenq/serialize.hpp"

namespace satenq {

int one_hot_key(const std::vector<double>& state) {
    if (state.empty()) throw ShapeError("one_hot_key: empty state");
    return static_cast<int>(std::max_element(state.begin(), state.end()) - state.begin());
}

EpisodicBaseline::EpisodicBaseline(double decay, double default_value)
    : decay_(decay), default_value_(default_value) {
    if (decay < 0.0 || decay > 1.0)
        throw ConfigError("EpisodicBaseline: decay must lie in [0, 1]");
    if (!std::isfinite(default_value))
        throw ConfigError("EpisodicBaseline: default value must be finite");
}

double EpisodicBaseline::query_key(int key) const {
    auto it = table_.find(key);
    return it == table_.end() ? default_value_ : it->second;
}

double EpisodicBaseline::query(const std::vector<double>& state) const {
    return query_key(one_hot_key(state));
}

void EpisodicBaseline::update(const std::vector<int>& visited_keys, double episode_return) {
    if (!std::isfinite(episode_return))
        throw NumericError("EpisodicBaseline::update: non-finite episode return");
    // First-visit convention: each distinct state moves once per episode.
    std::set<int> seen;
    for (int key : visited_keys) {
        if (!seen.insert(key).second) continue;
        const double old = query_key(key);
        table_[key] = decay_ * old + (1.0 - decay_) * episode_return;
    }
}

void EpisodicBaseline::set(int key, double value) {
    if (!std::isfinite(value)) throw NumericError("EpisodicBaseline::set: non-finite value");
    table_[key] = value;
}

void EpisodicBaseline::on_episode_end(const std::vector<std::vector<double>>& visited,
                                      double episode_return, Rng&) {
    std::vector<int> keys;
    keys.reserve(visited.size());
    for (const auto& s : visited) keys.push_back(one_hot_key(s));
    update(keys, episode_return);
}

nlohmann::json EpisodicBaseline::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    // Sorted for a stable document.
    std::vector<std::pair<int, double>> sorted(table_.begin(), table_.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [k, v] : sorted) entries.push_back({k, v});
    return {{"type", "episodic"},
            {"decay", decay_},
            {"default_value", default_value_},
            {"entries", entries}};
}

LearnedBaseline::LearnedBaseline(int state_dim, Rng& rng, int hidden, double lr,
                                 int buffer_capacity, int batch_size, int episode_train_steps)
    : net_(make_mlp({state_dim, hidden, 1}, rng)),
      opt_(make_adam(net_, AdamConfig{lr})),
      buffer_capacity_(buffer_capacity),
      batch_size_(batch_size),
      episode_train_steps_(episode_train_steps) {
    if (buffer_capacity <= 0 || batch_size <= 0 || episode_train_steps <= 0)
        throw ConfigError("LearnedBaseline: capacity, batch size, train steps must be positive");
}

LearnedBaseline::LearnedBaseline(MlpParams net, AdamState opt, int buffer_capacity, int batch_size,
                                 int episode_train_steps)
    : net_(std::move(net)),
      opt_(std::move(opt)),
      buffer_capacity_(buffer_capacity),
      batch_size_(batch_size),
      episode_train_steps_(episode_train_steps) {
    if (net_.output_dim() != 1)
        throw ShapeError("LearnedBaseline: net must have scalar output");
    if (buffer_capacity <= 0 || batch_size <= 0 || episode_train_steps <= 0)
        throw ConfigError("LearnedBaseline: capacity, batch size, train steps must be positive");
}

double LearnedBaseline::query(const std::vector<double>& state) const {
    const double out = forward(net_, state)[0];
    if (!std::isfinite(out)) throw NumericError("LearnedBaseline::query: non-finite output");
    return out;
}

double LearnedBaseline::train_step(const std::vector<std::vector<double>>& states,
                                   const std::vector<double>& returns) {
    if (states.empty() || states.size() != returns.size())
        throw ContractError("LearnedBaseline::train_step: bad batch");
    MlpGrads grads = zero_grads_like(net_);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(states.size());
    ForwardCache cache;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto out = forward_cached(net_, states[i], cache);
        const double err = out[0] - returns[i];
        loss += err * err * inv_n;
        backward(net_, cache, {2.0 * err * inv_n}, grads);
    }
    adam_step(net_, grads, opt_);
    return loss;
}

void LearnedBaseline::on_episode_end(const std::vector<std::vector<double>>& visited,
                                     double episode_return, Rng& rng) {
    if (!std::isfinite(episode_return))
        throw NumericError("LearnedBaseline::on_episode_end: non-finite episode return");
    for (const auto& s : visited) {
        if (states_.size() < static_cast<std::size_t>(buffer_capacity_)) {
            states_.push_back(s);
            returns_.push_back(episode_return);
        } else {
            states_[next_slot_] = s;
            returns_[next_slot_] = episode_return;
            next_slot_ = (next_slot_ + 1) % buffer_capacity_;
        }
    }
    if (states_.empty()) return;
    const int n = std::min<int>(batch_size_, static_cast<int>(states_.size()));
    std::vector<std::vector<double>> batch_s(n);
    std::vector<double> batch_g(n);
    for (int step = 0; step < episode_train_steps_; ++step) {
        for (int i = 0; i < n; ++i) {
            const int idx = rng.uniform_int(static_cast<int>(states_.size()));
            batch_s[i] = states_[idx];
            batch_g[i] = returns_[idx];
        }
        train_step(batch_s, batch_g);
    }
}

nlohmann::json LearnedBaseline::to_json() const {
    return {{"type", "learned"},
            {"net", mlp_to_json(net_)},
            {"opt", adam_to_json(opt_)},
            {"buffer_capacity", buffer_capacity_},
            {"batch_size", batch_size_},
            {"episode_train_steps", episode_train_steps_}};
}

std::unique_ptr<Baseline> baseline_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "episodic") {
        auto b = std::make_unique<EpisodicBaseline>(j.at("decay").get<double>(),
                                                    j.at("default_value").get<double>());
        for (const auto& e : j.at("entries")) b->set(e.at(0).get<int>(), e.at(1).get<double>());
        return b;
    }
    if (type == "learned") {
        MlpParams net = mlp_from_json(j.at("net"));
        AdamState opt = adam_from_json(j.at("opt"), net);
        return std::make_unique<LearnedBaseline>(std::move(net), std::move(opt),
                                                 j.at("buffer_capacity").get<int>(),
                                                 j.at("batch_size").get<int>(),
                                                 j.at("episode_train_steps").get<int>());
    }
    throw IoError("baseline_from_json: unknown type '" + type + "'");
}

}  // namespace satenq
