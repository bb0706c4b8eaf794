#include "satenq/satcore.hpp"

#include <algorithm>
#include <cmath>

#include "satenq/errors.hpp"

namespace satenq {

void validate(const SatConfig& cfg) {
    if (cfg.margin < 0.0) throw ConfigError("SatConfig: margin must be >= 0");
    if (cfg.hinge_weight < 0.0) throw ConfigError("SatConfig: hinge_weight must be >= 0");
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0) throw ConfigError("SatConfig: gamma must lie in [0, 1)");
    if (cfg.target_sync_interval <= 0)
        throw ConfigError("SatConfig: target_sync_interval must be positive");
}

LearnerState make_learner(const std::vector<int>& layer_sizes, std::size_t buffer_capacity,
                          Rng& rng, AdamConfig opt_cfg) {
    MlpParams online = make_mlp(layer_sizes, rng);
    MlpParams target = online;  // starts as an exact copy
    AdamState opt = make_adam(online, opt_cfg);
    return LearnerState{std::move(online), std::move(target), std::move(opt),
                        ReplayBuffer(buffer_capacity), 1.0};
}

double sat_target(const Transition& t, const MlpParams& target_net, const Baseline& baseline,
                  const SatConfig& cfg) {
    if (t.done) return t.reward;
    const std::vector<double> q_next = forward(target_net, t.next_state);
    const double q_max = *std::max_element(q_next.begin(), q_next.end());
    if (!std::isfinite(q_max)) throw NumericError("sat_target: non-finite target-net output");
    double boot = q_max;
    if (cfg.satisficing) {
        const double threshold = baseline.query(t.next_state) + cfg.margin;
        boot = std::min(q_max, threshold);
    }
    return t.reward + cfg.gamma * boot;
}

std::pair<double, MlpGrads> sat_loss_and_grad(const std::vector<Transition>& batch,
                                              LearnerState& learner, const Baseline& baseline,
                                              const SatConfig& cfg) {
    if (batch.empty()) throw ContractError("sat_loss_and_grad: empty batch");
    MlpGrads grads = zero_grads_like(learner.online);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const int n_actions = learner.online.output_dim();
    double loss = 0.0;
    ForwardCache cache;
    std::vector<double> dout(n_actions);
    for (const Transition& t : batch) {
        if (t.action < 0 || t.action >= n_actions)
            throw ContractError("sat_loss_and_grad: action out of range");
        const double y = sat_target(t, learner.target, baseline, cfg);
        const auto q_all = forward_cached(learner.online, t.state, cache);
        const double q = q_all[t.action];
        const double td = q - y;
        double example_loss = td * td;
        double dq = 2.0 * td;
        if (cfg.satisficing && cfg.hinge_weight > 0.0) {
            const double threshold = baseline.query(t.state) + cfg.margin;
            if (cfg.hinge_direction == HingeDirection::as_printed) {
                const double h = std::max(0.0, threshold - q);
                example_loss += cfg.hinge_weight * h * h;
                dq -= cfg.hinge_weight * 2.0 * h;
            } else {
                const double h = std::max(0.0, q - threshold);
                example_loss += cfg.hinge_weight * h * h;
                dq += cfg.hinge_weight * 2.0 * h;
            }
        }
        if (!std::isfinite(example_loss)) throw NumericError("sat_loss_and_grad: non-finite loss");
        loss += example_loss * inv_n;
        std::fill(dout.begin(), dout.end(), 0.0);
        dout[t.action] = dq * inv_n;
        backward(learner.online, cache, dout, grads);
    }
    return {loss, std::move(grads)};
}

void sync_target(LearnerState& learner) { learner.target = learner.online; }

void validate(const TabularMdp& mdp, double tol) {
    if (mdp.n_states <= 0 || mdp.n_actions <= 0)
        throw ContractError("TabularMdp: empty state or action space");
    if (static_cast<int>(mdp.transition.size()) != mdp.n_states ||
        static_cast<int>(mdp.reward.size()) != mdp.n_states)
        throw ShapeError("TabularMdp: table shapes do not match n_states");
    for (int s = 0; s < mdp.n_states; ++s) {
        if (static_cast<int>(mdp.transition[s].size()) != mdp.n_actions ||
            static_cast<int>(mdp.reward[s].size()) != mdp.n_actions)
            throw ShapeError("TabularMdp: table shapes do not match n_actions");
        for (int a = 0; a < mdp.n_actions; ++a) {
            const auto& row = mdp.transition[s][a];
            if (static_cast<int>(row.size()) != mdp.n_states)
                throw ShapeError("TabularMdp: transition row has wrong length");
            double total = 0.0;
            for (double p : row) {
                if (p < -tol) throw ContractError("TabularMdp: negative transition probability");
                total += p;
            }
            if (std::abs(total - 1.0) > tol)
                throw ContractError("TabularMdp: transition row does not sum to 1");
        }
    }
}

std::vector<std::vector<double>> tabular_sat_backup(const TabularMdp& mdp,
                                                    const std::vector<std::vector<double>>& q,
                                                    const std::vector<double>& b,
                                                    const SatConfig& cfg) {
    if (static_cast<int>(q.size()) != mdp.n_states ||
        static_cast<int>(b.size()) != mdp.n_states)
        throw ShapeError("tabular_sat_backup: Q or B shape mismatch");
    // Clipped state values min{max_a Q(s,a), B(s)+m}, shared by all (s,a).
    std::vector<double> clipped(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        if (static_cast<int>(q[s].size()) != mdp.n_actions)
            throw ShapeError("tabular_sat_backup: Q row has wrong length");
        const double v = *std::max_element(q[s].begin(), q[s].end());
        clipped[s] = cfg.satisficing ? std::min(v, b[s] + cfg.margin) : v;
    }
    std::vector<std::vector<double>> out(mdp.n_states, std::vector<double>(mdp.n_actions));
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double acc = 0.0;
            const auto& row = mdp.transition[s][a];
            for (int sp = 0; sp < mdp.n_states; ++sp) acc += row[sp] * clipped[sp];
            out[s][a] = mdp.reward[s][a] + cfg.gamma * acc;
        }
    return out;
}

}  // namespace satenq
