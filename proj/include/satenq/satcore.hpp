#pragma once

#include <utility>
#include <vector>

#include "satenq/baseline.hpp"
#include "satenq/mlp.hpp"
#include "satenq/replay.hpp"
#include "satenq/rng.hpp"

namespace satenq {

// Which side of the threshold the hinge penalizes. as_printed,
// ReLU(B(s)+m - Q)^2, pushes Q *up* toward the aspiration level; as_prose,
// ReLU(Q - B(s)-m)^2, discourages Q from exceeding it. The prose form is
// the default: the upward pull of the printed form levels Q across actions
// and collapses the greedy policy (measured, not hypothesized), while the
// prose form is the variant that actually behaves as the method intends.
enum class HingeDirection { as_printed, as_prose };

struct SatConfig {
    double margin = 0.5;
    double hinge_weight = 0.1;
    double gamma = 0.99;
    int target_sync_interval = 10;  // episodes between hard target syncs
    bool satisficing = true;        // false = plain max target, hinge off
    HingeDirection hinge_direction = HingeDirection::as_prose;
};

void validate(const SatConfig& cfg);

// One weak learner: online/target nets, optimizer, private replay buffer,
// and its current exploration rate.
struct LearnerState {
    MlpParams online;
    MlpParams target;
    AdamState opt;
    ReplayBuffer buffer;
    double epsilon = 1.0;
};

LearnerState make_learner(const std::vector<int>& layer_sizes, std::size_t buffer_capacity,
                          Rng& rng, AdamConfig opt_cfg = {});

// Sample-form satisficing target:
//   r + gamma * min{ max_a' Q_target(s',a'), B(s') + m }
// Terminal transitions return r alone. With cfg.satisficing=false the clip
// is dropped (standard Q-learning target).
double sat_target(const Transition& t, const MlpParams& target_net, const Baseline& baseline,
                  const SatConfig& cfg);

// Mean over the batch of (sat_target - Q(s,a))^2 + lambda * hinge^2, with
// the targets held constant (semi-gradient). Gradient accumulates into a
// fresh MlpGrads, returned with the scalar loss.
std::pair<double, MlpGrads> sat_loss_and_grad(const std::vector<Transition>& batch,
                                              LearnerState& learner, const Baseline& baseline,
                                              const SatConfig& cfg);

void sync_target(LearnerState& learner);

// Explicit finite MDP for the exact-operator checks. transition[s][a] is a
// dense row over next states; reward[s][a] is deterministic.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<std::vector<double>>> transition;
    std::vector<std::vector<double>> reward;
};

void validate(const TabularMdp& mdp, double tol = 1e-9);

// One exact application of the satisficing operator:
//   (T_sat Q)(s,a) = R(s,a) + gamma * sum_s' P(s'|s,a) min{max_a' Q(s',a'), B(s') + m}
std::vector<std::vector<double>> tabular_sat_backup(const TabularMdp& mdp,
                                                    const std::vector<std::vector<double>>& q,
                                                    const std::vector<double>& b,
                                                    const SatConfig& cfg);

}  // namespace satenq
