#pragma once

#include <span>
#include <vector>

namespace agora::stats {

double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), evaluated with the continued
/// fraction of Lentz's method. Accurate to ~1e-15 over the whole domain.
double regularized_incomplete_beta(double x, double a, double b);

/// Upper-tail probability P(F >= f) of the F distribution with (df1, df2)
/// degrees of freedom: I_{df2/(df2 + df1*f)}(df2/2, df1/2).
double f_upper_tail(double f, double df1, double df2);

/// Quantile by linear interpolation between closest ranks over a sorted
/// sample; q in [0,1].
double quantile_linear(const std::vector<double>& sorted, double q);

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

/// Q1/median/Q3 of an arbitrary sample (sorted internally).
Quartiles quartiles(std::vector<double> values);

double mean(std::span<const double> values);

/// Ordinary least-squares slope of y over x = 0..n-1. Throws
/// InsufficientPoints for fewer than two points.
double ols_slope(std::span<const double> y);

}  // namespace agora::stats
