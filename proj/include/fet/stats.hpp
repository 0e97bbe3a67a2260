#pragma once

// Small descriptive statistics used by the harness and the acceptance checks.

#include <cstdint>
#include <vector>

namespace fet {

double mean(const std::vector<double>& xs);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(const std::vector<double>& xs);

// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::vector<double> xs, double q);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y = intercept + slope x. R^2 = 1 when y has no spread.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Total variation distance between two histograms, each normalised by its own total.
double tv_distance(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b);

}  // namespace fet
