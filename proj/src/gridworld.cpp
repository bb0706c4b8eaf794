#include "satenq/gridworld.hpp"

#include <array>
#include <cmath>

#include "satenq/errors.hpp"

namespace satenq {

namespace {
// row/col deltas for up, right, down, left
constexpr std::array<int, 4> kDr = {-1, 0, 1, 0};
constexpr std::array<int, 4> kDc = {0, 1, 0, -1};
}  // namespace

GridWorld::GridWorld(const GridWorldConfig& cfg) : cfg_(cfg) {
    if (cfg.size < 2) throw ContractError("GridWorld: size must be >= 2");
    if (cfg.slip_prob < 0.0 || cfg.slip_prob >= 1.0)
        throw ContractError("GridWorld: slip_prob must be in [0,1)");
    if (cfg.max_steps <= 0) throw ContractError("GridWorld: max_steps must be positive");
}

std::vector<double> GridWorld::one_hot(int cell) const {
    std::vector<double> v(static_cast<std::size_t>(cfg_.size) * cfg_.size, 0.0);
    v[static_cast<std::size_t>(cell)] = 1.0;
    return v;
}

std::vector<double> GridWorld::reset(Rng&) {
    row_ = 0;
    col_ = 0;
    steps_ = 0;
    done_ = false;
    return one_hot(cell_index());
}

EnvStepResult GridWorld::step(int action, Rng& rng) {
    if (done_) throw ContractError("GridWorld::step: episode already done");
    if (action < 0 || action >= 4) throw ContractError("GridWorld::step: invalid action");

    int executed = action;
    if (cfg_.slip_prob > 0.0 && rng.uniform() < cfg_.slip_prob) {
        // one of the three *other* directions, uniformly
        int k = rng.uniform_int(3);
        executed = (action + 1 + k) % 4;
    }
    row_ = std::min(cfg_.size - 1, std::max(0, row_ + kDr[executed]));
    col_ = std::min(cfg_.size - 1, std::max(0, col_ + kDc[executed]));
    ++steps_;

    EnvStepResult res;
    res.reward = cfg_.step_penalty;
    if (cell_index() == goal_index()) {
        res.reward += cfg_.goal_reward;
        res.done = true;
    } else if (steps_ >= cfg_.max_steps) {
        res.done = true;
        res.truncated = true;
    }
    done_ = res.done;
    res.next_state = one_hot(cell_index());
    return res;
}

std::vector<std::pair<int, double>> gridworld_kernel_row(const GridWorldConfig& cfg, int cell,
                                                         int action) {
    const int n = cfg.size;
    const int row = cell / n, col = cell % n;
    std::vector<double> prob(static_cast<std::size_t>(n) * n, 0.0);
    for (int executed = 0; executed < 4; ++executed) {
        double p = executed == action ? 1.0 - cfg.slip_prob : cfg.slip_prob / 3.0;
        if (p == 0.0) continue;
        const int r = std::min(n - 1, std::max(0, row + kDr[executed]));
        const int c = std::min(n - 1, std::max(0, col + kDc[executed]));
        prob[static_cast<std::size_t>(r) * n + c] += p;
    }
    std::vector<std::pair<int, double>> out;
    for (int s = 0; s < n * n; ++s)
        if (prob[static_cast<std::size_t>(s)] > 0.0) out.emplace_back(s, prob[static_cast<std::size_t>(s)]);
    return out;
}

GridWorldSolution gridworld_optimal(const GridWorldConfig& cfg, double tol, int max_sweeps) {
    const int n_cells = cfg.size * cfg.size;
    const int goal = n_cells - 1;

    // Precompute kernel rows once.
    std::vector<std::vector<std::pair<int, double>>> kernel(
        static_cast<std::size_t>(n_cells) * 4);
    for (int s = 0; s < n_cells; ++s)
        for (int a = 0; a < 4; ++a) kernel[static_cast<std::size_t>(s) * 4 + a] = gridworld_kernel_row(cfg, s, a);

    GridWorldSolution sol;
    sol.values.assign(static_cast<std::size_t>(n_cells), 0.0);
    sol.greedy_policy.assign(static_cast<std::size_t>(n_cells), 0);

    // Undiscounted stochastic-shortest-path sweep: the goal is absorbing with
    // value 0, every move pays step_penalty, landing on the goal pays
    // goal_reward and stops.
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (int s = 0; s < n_cells; ++s) {
            if (s == goal) continue;
            double best = -1e300;
            int best_a = 0;
            for (int a = 0; a < 4; ++a) {
                double q = cfg.step_penalty;
                for (const auto& [s2, p] : kernel[static_cast<std::size_t>(s) * 4 + a]) {
                    if (s2 == goal)
                        q += p * cfg.goal_reward;
                    else
                        q += p * sol.values[static_cast<std::size_t>(s2)];
                }
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            max_delta = std::max(max_delta, std::abs(best - sol.values[static_cast<std::size_t>(s)]));
            sol.values[static_cast<std::size_t>(s)] = best;
            sol.greedy_policy[static_cast<std::size_t>(s)] = best_a;
        }
        if (max_delta < tol) {
            sol.sweeps = sweep;
            sol.optimal_return = sol.values[0];
            return sol;
        }
    }
    throw NumericError("gridworld_optimal: value iteration did not converge");
}

}  // namespace satenq
