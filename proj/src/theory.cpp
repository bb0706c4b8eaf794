#include "satenq/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "satenq/errors.hpp"

namespace satenq {

ScalarDistribution ScalarDistribution::two_point(double a, double b, double p_a) {
    if (p_a < 0.0 || p_a > 1.0) throw ContractError("two_point: p_a must lie in [0, 1]");
    ScalarDistribution d;
    d.kind = Kind::two_point;
    d.a = a;
    d.b = b;
    d.p_a = p_a;
    return d;
}

ScalarDistribution ScalarDistribution::uniform(double lo, double hi) {
    if (!(lo < hi)) throw ContractError("uniform: need lo < hi");
    ScalarDistribution d;
    d.kind = Kind::uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

ScalarDistribution ScalarDistribution::gaussian(double mu, double sigma) {
    if (sigma <= 0.0) throw ContractError("gaussian: sigma must be positive");
    ScalarDistribution d;
    d.kind = Kind::gaussian;
    d.mu = mu;
    d.sigma = sigma;
    return d;
}

ScalarDistribution ScalarDistribution::gaussian_mixture(double mu1, double sigma1, double mu2,
                                                        double sigma2, double w1) {
    if (sigma1 <= 0.0 || sigma2 <= 0.0)
        throw ContractError("gaussian_mixture: sigmas must be positive");
    if (w1 < 0.0 || w1 > 1.0) throw ContractError("gaussian_mixture: w1 must lie in [0, 1]");
    ScalarDistribution d;
    d.kind = Kind::gaussian_mixture;
    d.mu = mu1;
    d.sigma = sigma1;
    d.mu2 = mu2;
    d.sigma2 = sigma2;
    d.w1 = w1;
    return d;
}

ScalarDistribution ScalarDistribution::empirical(std::vector<double> values) {
    if (values.empty()) throw ContractError("empirical: need at least one value");
    ScalarDistribution d;
    d.kind = Kind::empirical;
    d.values = std::move(values);
    return d;
}

double ScalarDistribution::sample(Rng& rng) const {
    switch (kind) {
        case Kind::two_point: return rng.uniform() < p_a ? a : b;
        case Kind::uniform: return rng.uniform(lo, hi);
        case Kind::gaussian: return mu + sigma * rng.normal();
        case Kind::gaussian_mixture:
            return rng.uniform() < w1 ? mu + sigma * rng.normal() : mu2 + sigma2 * rng.normal();
        case Kind::empirical:
            return values[rng.uniform_int(static_cast<int>(values.size()))];
    }
    throw ContractError("ScalarDistribution::sample: unknown kind");
}

double ScalarDistribution::exact_mean() const {
    switch (kind) {
        case Kind::two_point: return p_a * a + (1.0 - p_a) * b;
        case Kind::uniform: return 0.5 * (lo + hi);
        case Kind::gaussian: return mu;
        case Kind::gaussian_mixture: return w1 * mu + (1.0 - w1) * mu2;
        case Kind::empirical: {
            double acc = 0.0;
            for (double v : values) acc += v;
            return acc / static_cast<double>(values.size());
        }
    }
    throw ContractError("ScalarDistribution::exact_mean: unknown kind");
}

double ScalarDistribution::exact_variance() const {
    switch (kind) {
        case Kind::two_point: {
            const double m = exact_mean();
            return p_a * (a - m) * (a - m) + (1.0 - p_a) * (b - m) * (b - m);
        }
        case Kind::uniform: return (hi - lo) * (hi - lo) / 12.0;
        case Kind::gaussian: return sigma * sigma;
        case Kind::gaussian_mixture: {
            const double m = exact_mean();
            const double second = w1 * (mu * mu + sigma * sigma) +
                                  (1.0 - w1) * (mu2 * mu2 + sigma2 * sigma2);
            return second - m * m;
        }
        case Kind::empirical: {
            const double m = exact_mean();
            double acc = 0.0;
            for (double v : values) acc += (v - m) * (v - m);
            return acc / static_cast<double>(values.size());
        }
    }
    throw ContractError("ScalarDistribution::exact_variance: unknown kind");
}

std::string ScalarDistribution::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::two_point: os << "two_point(" << a << ", " << b << "; " << p_a << ")"; break;
        case Kind::uniform: os << "uniform(" << lo << ", " << hi << ")"; break;
        case Kind::gaussian: os << "gaussian(" << mu << ", " << sigma << ")"; break;
        case Kind::gaussian_mixture:
            os << "mixture(" << mu << "," << sigma << " | " << mu2 << "," << sigma2 << "; " << w1
               << ")";
            break;
        case Kind::empirical: os << "empirical(n=" << values.size() << ")"; break;
    }
    return os.str();
}

ScalarDistribution random_distribution(Rng& rng) {
    switch (rng.uniform_int(5)) {
        case 0: {
            const double a = rng.uniform(-5.0, 5.0);
            return ScalarDistribution::two_point(a, a + rng.uniform(0.1, 10.0),
                                                 rng.uniform(0.05, 0.95));
        }
        case 1: {
            const double lo = rng.uniform(-5.0, 5.0);
            return ScalarDistribution::uniform(lo, lo + rng.uniform(0.1, 10.0));
        }
        case 2:
            return ScalarDistribution::gaussian(rng.uniform(-5.0, 5.0), rng.uniform(0.1, 3.0));
        case 3:
            return ScalarDistribution::gaussian_mixture(
                rng.uniform(-5.0, 5.0), rng.uniform(0.1, 3.0), rng.uniform(-5.0, 5.0),
                rng.uniform(0.1, 3.0), rng.uniform(0.1, 0.9));
        default: {
            const int n = 5 + rng.uniform_int(46);
            std::vector<double> vals(n);
            for (double& v : vals) v = rng.uniform(-5.0, 5.0);
            return ScalarDistribution::empirical(std::move(vals));
        }
    }
}

double random_threshold_for(const ScalarDistribution& dist, Rng& rng) {
    const double m = dist.exact_mean();
    const double sd = std::sqrt(std::max(dist.exact_variance(), 1e-12));
    // One draw in ten puts c far above the support so the p=0 equality
    // branch of the theorem gets exercised.
    if (rng.uniform() < 0.1) return m + 20.0 * sd;
    return m + rng.uniform(-3.0, 3.0) * sd;
}

namespace {

// Streaming mean/variance accumulator (Welford); population variance.
struct Welford {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
};

}  // namespace

VarianceReport clip_variance_mc(const ScalarDistribution& dist, double c, long long n, Rng& rng) {
    if (n < 1000) throw ContractError("clip_variance_mc: need n >= 1000 samples");
    Welford wx, wy, wbelow, wabove;
    for (long long i = 0; i < n; ++i) {
        const double x = dist.sample(rng);
        wx.add(x);
        wy.add(std::min(x, c));
        if (x > c)
            wabove.add(x);
        else
            wbelow.add(x);
    }
    VarianceReport r;
    r.n = n;
    r.c = c;
    r.p = static_cast<double>(wabove.n) / static_cast<double>(n);
    r.mean_x = wx.mean;
    r.var_x = wx.variance();
    r.mean_y = wy.mean;
    r.var_y = wy.variance();
    r.below_defined = wbelow.n > 0;
    r.above_defined = wabove.n > 0;
    if (r.below_defined) {
        r.mu_below = wbelow.mean;
        r.var_below = wbelow.variance();
    }
    if (r.above_defined) {
        r.mu_above = wabove.mean;
        r.var_above = wabove.variance();
    }
    return r;
}

DecompositionResult variance_decomposition(double p, double mu_below, double var_below,
                                           double mu_above, double var_above, double c) {
    if (p < 0.0 || p > 1.0) throw ContractError("variance_decomposition: p must lie in [0, 1]");
    const double q = 1.0 - p;
    DecompositionResult r;
    r.var_y = q * var_below + p * q * (mu_below - c) * (mu_below - c);
    r.var_x = q * var_below + p * var_above + p * q * (mu_below - mu_above) * (mu_below - mu_above);
    r.reduction = p * var_above + p * q * ((mu_below - mu_above) * (mu_below - mu_above) -
                                           (mu_below - c) * (mu_below - c));
    return r;
}

TabularMdp random_mdp(int n_states, int n_actions, Rng& rng) {
    if (n_states < 1 || n_actions < 1) throw ContractError("random_mdp: empty MDP");
    TabularMdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.transition.assign(n_states, std::vector<std::vector<double>>(
                                        n_actions, std::vector<double>(n_states, 0.0)));
    mdp.reward.assign(n_states, std::vector<double>(n_actions, 0.0));
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            // Unit-concentration Dirichlet row via normalized exponentials.
            double total = 0.0;
            auto& row = mdp.transition[s][a];
            for (int sp = 0; sp < n_states; ++sp) {
                double u;
                do {
                    u = rng.uniform();
                } while (u == 0.0);
                row[sp] = -std::log(u);
                total += row[sp];
            }
            for (double& v : row) v /= total;
            mdp.reward[s][a] = rng.uniform(-1.0, 1.0);
        }
    return mdp;
}

double check_contraction(const TabularMdp& mdp, double b_const, double margin, double gamma,
                         int trials, Rng& rng) {
    if (trials < 1) throw ContractError("check_contraction: need at least one trial");
    SatConfig cfg;
    cfg.margin = margin;
    cfg.gamma = gamma;
    const std::vector<double> b(mdp.n_states, b_const);
    double max_ratio = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::vector<double>> q1(mdp.n_states, std::vector<double>(mdp.n_actions));
        std::vector<std::vector<double>> q2 = q1;
        double diff = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a) {
                q1[s][a] = rng.uniform(-10.0, 10.0);
                q2[s][a] = rng.uniform(-10.0, 10.0);
                diff = std::max(diff, std::abs(q1[s][a] - q2[s][a]));
            }
        if (diff == 0.0) continue;  // identical pair carries no information
        const auto t1 = tabular_sat_backup(mdp, q1, b, cfg);
        const auto t2 = tabular_sat_backup(mdp, q2, b, cfg);
        double out_diff = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                out_diff = std::max(out_diff, std::abs(t1[s][a] - t2[s][a]));
        max_ratio = std::max(max_ratio, out_diff / diff);
    }
    return max_ratio;
}

FixedPointResult iterate_sat_backup(const TabularMdp& mdp, const std::vector<double>& b,
                                    const SatConfig& cfg, double tol, int max_iters) {
    FixedPointResult res;
    res.q.assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
    for (int it = 0; it < max_iters; ++it) {
        const auto next = tabular_sat_backup(mdp, res.q, b, cfg);
        double gap = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                gap = std::max(gap, std::abs(next[s][a] - res.q[s][a]));
        res.q = next;
        ++res.iterations;
        if (it == 0) res.initial_gap = gap;
        res.final_gap = gap;
        if (gap < tol) return res;
    }
    throw NumericError("iterate_sat_backup: no convergence within max_iters");
}

nlohmann::json TheorySummary::to_json() const {
    return {{"theorem1",
             {{"pairs", variance_pairs},
              {"violations", variance_violations},
              {"strictness_violations", strictness_violations},
              {"equality_violations", equality_violations},
              {"max_variance_ratio", max_variance_ratio},
              {"pass", theorem1_pass}}},
            {"corollary1",
             {{"max_eq3_rel_err", max_eq3_rel_err},
              {"max_eq4_rel_err", max_eq4_rel_err},
              {"max_reduction_abs_err", max_reduction_abs_err},
              {"pass", corollary1_pass}}},
            {"proposition1",
             {{"mdp_count", mdp_count},
              {"gamma", gamma},
              {"max_contraction_ratio", max_contraction_ratio},
              {"convergence_failures", convergence_failures},
              {"bound_violations", bound_violations},
              {"note", bound_note},
              {"pass", proposition1_pass}}},
            {"all_pass", all_pass}};
}

TheorySummary run_theory_suite(const TheoryConfig& cfg) {
    TheorySummary sum;
    sum.gamma = cfg.gamma;
    Rng master(cfg.seed);

    // --- Variance non-increase + decomposition identities ---
    Rng dist_rng = master.stream(1);
    Rng mc_rng = master.stream(2);
    const double slack = 1.0 + 3.0 / std::sqrt(static_cast<double>(cfg.samples_per_pair));
    sum.variance_pairs = cfg.variance_pairs;
    for (int i = 0; i < cfg.variance_pairs; ++i) {
        const ScalarDistribution dist = random_distribution(dist_rng);
        const double c = random_threshold_for(dist, dist_rng);
        const VarianceReport r = clip_variance_mc(dist, c, cfg.samples_per_pair, mc_rng);

        if (r.var_y > r.var_x * slack) ++sum.variance_violations;
        if (r.var_x > 0.0)
            sum.max_variance_ratio = std::max(sum.max_variance_ratio, r.var_y / r.var_x);
        if (r.p > 0.01 && !(r.var_y < r.var_x)) ++sum.strictness_violations;
        if (r.p == 0.0 && std::abs(r.var_y - r.var_x) > 1e-12) ++sum.equality_violations;

        const DecompositionResult d = variance_decomposition(
            r.p, r.below_defined ? r.mu_below : 0.0, r.below_defined ? r.var_below : 0.0,
            r.above_defined ? r.mu_above : 0.0, r.above_defined ? r.var_above : 0.0, r.c);
        const double scale_y = std::max(1e-12, std::abs(r.var_y));
        const double scale_x = std::max(1e-12, std::abs(r.var_x));
        sum.max_eq3_rel_err = std::max(sum.max_eq3_rel_err, std::abs(d.var_y - r.var_y) / scale_y);
        sum.max_eq4_rel_err = std::max(sum.max_eq4_rel_err, std::abs(d.var_x - r.var_x) / scale_x);
        sum.max_reduction_abs_err = std::max(sum.max_reduction_abs_err,
                                             std::abs((d.var_x - d.var_y) - d.reduction));
    }
    sum.theorem1_pass = sum.variance_violations == 0 && sum.strictness_violations == 0 &&
                        sum.equality_violations == 0;
    sum.corollary1_pass = sum.max_eq3_rel_err < 1e-9 && sum.max_eq4_rel_err < 1e-9 &&
                          sum.max_reduction_abs_err <= 1e-12;

    // --- Contraction, convergence, boundedness on random MDPs ---
    Rng mdp_rng = master.stream(3);
    Rng trial_rng = master.stream(4);
    sum.mdp_count = cfg.mdp_count;
    SatConfig sat;
    sat.margin = cfg.margin;
    sat.gamma = cfg.gamma;
    for (int i = 0; i < cfg.mdp_count; ++i) {
        const int n_states = 2 + mdp_rng.uniform_int(cfg.max_states - 1);
        const int n_actions = 2 + mdp_rng.uniform_int(cfg.max_actions - 1);
        const TabularMdp mdp = random_mdp(n_states, n_actions, mdp_rng);
        const double b_const = mdp_rng.uniform(-2.0, 2.0);

        sum.max_contraction_ratio =
            std::max(sum.max_contraction_ratio,
                     check_contraction(mdp, b_const, cfg.margin, cfg.gamma, 2, trial_rng));

        const std::vector<double> b(n_states, b_const);
        try {
            const FixedPointResult fp = iterate_sat_backup(mdp, b, sat, 1e-10);
            // Geometric decay bound on the iteration count.
            if (fp.initial_gap > 1e-10) {
                const int allowed = static_cast<int>(std::ceil(
                                        std::log(1e-10 / fp.initial_gap) / std::log(cfg.gamma))) +
                                    1;
                if (fp.iterations > allowed + 1) ++sum.convergence_failures;
            }
            // Literal consequence of the clip: one more backup stays under
            // r_max + gamma*(B_max + m); iterates also respect the standard
            // r_max/(1-gamma) envelope.
            double r_max = 0.0;
            for (const auto& row : mdp.reward)
                for (double v : row) r_max = std::max(r_max, std::abs(v));
            const double clip_bound = r_max + cfg.gamma * (b_const + cfg.margin);
            const double vi_bound = r_max / (1.0 - cfg.gamma) + 1e-9;
            const auto once_more = tabular_sat_backup(mdp, fp.q, b, sat);
            for (int s = 0; s < n_states; ++s)
                for (int a = 0; a < n_actions; ++a) {
                    if (once_more[s][a] > clip_bound + 1e-9) ++sum.bound_violations;
                    if (std::abs(fp.q[s][a]) > vi_bound) ++sum.bound_violations;
                }
        } catch (const NumericError&) {
            ++sum.convergence_failures;
        }
    }
    sum.bound_note =
        "printed bound B_max + m omits the reward term and discount; the check asserts "
        "T_sat Q <= r_max + gamma*(B_max + m), the literal consequence of the clip";
    sum.proposition1_pass = sum.max_contraction_ratio <= cfg.gamma + 1e-12 &&
                            sum.convergence_failures == 0 && sum.bound_violations == 0;

    sum.all_pass = sum.theorem1_pass && sum.corollary1_pass && sum.proposition1_pass;
    return sum;
}

}  // namespace satenq
