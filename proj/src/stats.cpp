#include "satenq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "satenq/errors.hpp"

namespace satenq {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw ContractError("mean: empty sample");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw ContractError("sample_variance: need at least 2 observations");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double sample_stddev(const std::vector<double>& xs) { return std::sqrt(sample_variance(xs)); }

double median(std::vector<double> xs) {
    if (xs.empty()) throw ContractError("median: empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

LeveneResult levene_brown_forsythe(const std::vector<std::vector<double>>& groups) {
    const int k = static_cast<int>(groups.size());
    if (k < 2) throw ContractError("levene: need at least 2 groups");
    int n_total = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw ContractError("levene: every group needs >= 2 observations");
        n_total += static_cast<int>(g.size());
    }

    // Absolute deviations from each group's median.
    std::vector<std::vector<double>> z(k);
    std::vector<double> z_group_mean(k);
    double z_grand = 0.0;
    for (int j = 0; j < k; ++j) {
        const double med = median(groups[j]);
        z[j].reserve(groups[j].size());
        for (double x : groups[j]) z[j].push_back(std::abs(x - med));
        z_group_mean[j] = mean(z[j]);
        z_grand += z_group_mean[j] * static_cast<double>(z[j].size());
    }
    z_grand /= static_cast<double>(n_total);

    double between = 0.0, within = 0.0;
    for (int j = 0; j < k; ++j) {
        const double d = z_group_mean[j] - z_grand;
        between += static_cast<double>(z[j].size()) * d * d;
        for (double v : z[j]) within += (v - z_group_mean[j]) * (v - z_group_mean[j]);
    }

    LeveneResult res;
    res.df1 = k - 1;
    res.df2 = n_total - k;
    if (within == 0.0) {
        res.degenerate = true;
        if (between == 0.0) {
            res.w = 0.0;  // all deviations identical across groups
            res.p_value = 1.0;
        } else {
            res.w = std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
        }
        return res;
    }
    res.w = (static_cast<double>(res.df2) / res.df1) * (between / within);
    res.p_value = f_sf(res.w, res.df1, res.df2);
    return res;
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double incbeta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 3e-14;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw NumericError("incomplete_beta: continued fraction failed to converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw ContractError("incomplete_beta: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw ContractError("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    // Same prefactor serves both the direct and the reflected expansion.
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * incbeta_cf(a, b, x) / a;
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

double f_cdf(double x, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw ContractError("f_cdf: degrees of freedom must be positive");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_sf(double x, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw ContractError("f_sf: degrees of freedom must be positive");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    // Complement computed directly for accuracy in the tail.
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

}  // namespace satenq
