#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "satenq/rng.hpp"
#include "satenq/satcore.hpp"

namespace satenq {

// Scalar law standing in for X = R(s,a) + gamma * max_a' Q(s',a'). Exact
// first/second moments are available for every kind (the capability flag is
// part of the contract should a kind without them appear).
struct ScalarDistribution {
    enum class Kind { two_point, uniform, gaussian, gaussian_mixture, empirical };

    Kind kind = Kind::gaussian;
    double a = 0.0, b = 1.0, p_a = 0.5;       // two_point
    double lo = 0.0, hi = 1.0;                // uniform
    double mu = 0.0, sigma = 1.0;             // gaussian / mixture component 1
    double mu2 = 0.0, sigma2 = 1.0, w1 = 0.5; // mixture component 2 + weight
    std::vector<double> values;               // empirical

    static ScalarDistribution two_point(double a, double b, double p_a);
    static ScalarDistribution uniform(double lo, double hi);
    static ScalarDistribution gaussian(double mu, double sigma);
    static ScalarDistribution gaussian_mixture(double mu1, double sigma1, double mu2,
                                               double sigma2, double w1);
    static ScalarDistribution empirical(std::vector<double> values);

    double sample(Rng& rng) const;
    bool has_exact_moments() const { return true; }
    double exact_mean() const;
    double exact_variance() const;
    std::string describe() const;
};

ScalarDistribution random_distribution(Rng& rng);
// A clip threshold in (and occasionally far above) the distribution's range.
double random_threshold_for(const ScalarDistribution& dist, Rng& rng);

// Empirical statistics of X and Y = min(X, c) from one shared sample, plus
// the conditional statistics below/above the threshold. All variances are
// population variances so the decomposition identities are exact.
struct VarianceReport {
    long long n = 0;
    double c = 0.0;
    double p = 0.0;  // empirical Pr(X > c)
    double mean_x = 0.0, var_x = 0.0;
    double mean_y = 0.0, var_y = 0.0;
    bool below_defined = false;
    bool above_defined = false;
    double mu_below = 0.0, var_below = 0.0;  // conditional on X <= c
    double mu_above = 0.0, var_above = 0.0;  // conditional on X > c
};

VarianceReport clip_variance_mc(const ScalarDistribution& dist, double c, long long n, Rng& rng);

struct DecompositionResult {
    double var_y = 0.0;      // (1-p) s_below + p(1-p)(mu_below - c)^2
    double var_x = 0.0;      // (1-p) s_below + p s_above + p(1-p)(mu_below - mu_above)^2
    double reduction = 0.0;  // p s_above + p(1-p)[(mu_below-mu_above)^2 - (mu_below-c)^2]
};

DecompositionResult variance_decomposition(double p, double mu_below, double var_below,
                                           double mu_above, double var_above, double c);

// Random row-stochastic MDP: transition rows uniform on the simplex
// (Dirichlet with unit concentration), rewards uniform on [-1, 1].
TabularMdp random_mdp(int n_states, int n_actions, Rng& rng);

// Max over trials of ||T q1 - T q2||_inf / ||q1 - q2||_inf for random Q
// pairs under a constant baseline. Identical pairs are skipped.
double check_contraction(const TabularMdp& mdp, double b_const, double margin, double gamma,
                         int trials, Rng& rng);

struct FixedPointResult {
    std::vector<std::vector<double>> q;
    int iterations = 0;
    double final_gap = 0.0;
    double initial_gap = 0.0;
};

FixedPointResult iterate_sat_backup(const TabularMdp& mdp, const std::vector<double>& b,
                                    const SatConfig& cfg, double tol = 1e-10,
                                    int max_iters = 100000);

struct TheorySummary {
    // Variance non-increase over random (distribution, threshold) pairs.
    int variance_pairs = 0;
    int variance_violations = 0;        // var_y > var_x * (1 + 3/sqrt(n))
    int strictness_violations = 0;      // p > 0.01 yet no strict reduction
    int equality_violations = 0;        // p == 0 yet var_y != var_x
    double max_variance_ratio = 0.0;

    // Decomposition identities on the same samples.
    double max_eq3_rel_err = 0.0;
    double max_eq4_rel_err = 0.0;
    double max_reduction_abs_err = 0.0;

    // Contraction + boundedness + convergence over random MDPs.
    int mdp_count = 0;
    double max_contraction_ratio = 0.0;
    int convergence_failures = 0;
    int bound_violations = 0;
    double gamma = 0.0;

    bool theorem1_pass = false;
    bool corollary1_pass = false;
    bool proposition1_pass = false;
    bool all_pass = false;

    // The printed boundedness display drops the reward and discount factor;
    // the executable check asserts the literal clip consequence instead.
    std::string bound_note;

    nlohmann::json to_json() const;
};

struct TheoryConfig {
    int variance_pairs = 1000;
    long long samples_per_pair = 100000;
    int mdp_count = 1000;
    int max_states = 20;
    int max_actions = 4;
    double gamma = 0.99;
    double margin = 0.5;
    std::uint64_t seed = 12345;
};

TheorySummary run_theory_suite(const TheoryConfig& cfg);

}  // namespace satenq
