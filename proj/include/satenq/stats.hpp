#pragma once

#include <vector>

namespace satenq {

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // n-1 denominator
double sample_stddev(const std::vector<double>& xs);
double median(std::vector<double> xs);  // by value: sorts its copy

struct LeveneResult {
    double w = 0.0;
    double p_value = 1.0;
    int df1 = 0;
    int df2 = 0;
    bool degenerate = false;  // zero within-group spread
};

// Brown-Forsythe variant: absolute deviations from the group medians, then a
// one-way F statistic. Every group needs >= 2 observations.
LeveneResult levene_brown_forsythe(const std::vector<std::vector<double>>& groups);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);

}  // namespace satenq
