#pragma once

#include <vector>

#include "satenq/env.hpp"

namespace satenq {

// Stochastic grid: fixed start at (0,0), goal at the opposite corner. With
// probability slip_prob the executed move is replaced by one of the three
// other directions, uniformly. Walls clamp. Observation is a one-hot vector
// over cells; tabular consumers use cell_index().
class GridWorld : public Env {
public:
    explicit GridWorld(const GridWorldConfig& cfg);

    int observation_dim() const override { return cfg_.size * cfg_.size; }
    int action_count() const override { return 4; }  // up, right, down, left

    std::vector<double> reset(Rng& rng) override;
    EnvStepResult step(int action, Rng& rng) override;
    bool episode_done() const override { return done_; }
    int steps_taken() const override { return steps_; }
    int max_steps() const override { return cfg_.max_steps; }

    int cell_index() const { return row_ * cfg_.size + col_; }
    int goal_index() const { return cfg_.size * cfg_.size - 1; }
    const GridWorldConfig& config() const { return cfg_; }

    std::vector<double> one_hot(int cell) const;

private:
    GridWorldConfig cfg_;
    int row_ = 0, col_ = 0;
    int steps_ = 0;
    bool done_ = true;
};

struct GridWorldSolution {
    double optimal_return = 0.0;        // expected undiscounted return from start
    std::vector<double> values;         // per cell
    std::vector<int> greedy_policy;     // per cell
    int sweeps = 0;
};

// Undiscounted value iteration on the exact slip kernel, solved to `tol` in
// the sup norm. The goal is absorbing; the step cap is ignored here (optimal
// play finishes far below the cap).
GridWorldSolution gridworld_optimal(const GridWorldConfig& cfg, double tol = 1e-10,
                                    int max_sweeps = 1000000);

// Exact transition kernel row for (cell, action): pairs of (next cell, prob).
// Used by the value-iteration oracle and the kernel sanity checks.
std::vector<std::pair<int, double>> gridworld_kernel_row(const GridWorldConfig& cfg, int cell,
                                                         int action);

}  // namespace satenq
