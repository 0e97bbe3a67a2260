#pragma once

// Deterministic layer of the FET dynamics: per-agent flip probabilities given the
// pair (x_t, x_{t+1}), the expectation map g, and its fixed point in y.

namespace fet {

struct GridPoint;

// Conditional probabilities of holding opinion 1 two rounds later.
struct FlipProbs {
    double p_keep_one = 0.0;  // agent currently holds 1
    double p_gain_one = 0.0;  // agent currently holds 0
};

// Constants of the domain analysis for a given population size.
struct AnalysisConstants {
    double delta = 0.05;     // margin, in (0, 1/2)
    double lambda_n = 0.0;   // 1 / ln(n)^(1/2 + delta)
    double gamma = 0.0;      // (1 - 1/e) exp(-2c) / 2
    double K = 0.0;          // c exp(-2c) / 2
    double alpha = 9.0;      // constant of the converse duel bound
    double c_sample = 3.0;   // ell = ceil(c_sample * ln n)
    double log_n = 0.0;      // ln n

    // Throws DomainError unless n >= 3, 0 < delta < 1/2, c_sample > 0.
    static AnalysisConstants make(int n, double delta, double c_sample);
};

// ceil(c_sample * ln n), at least 1.
int sample_size(int n, double c_sample);

FlipProbs flip_probs(double x_t, double x_t1, int ell);

// g(x, y) = P(B(y) > B(x)) + y P(B(y) = B(x)) + (1 - P(B(y) >= B(x))) / n.
double expected_next_fraction(double x_t, double x_t1, int n, int ell);

struct FixedPoint {
    double value = 0.0;
    bool is_root = false;  // false: no root in the interval, value = x + 1/sqrt(ell)
};

// Fixed point of y -> g(x, y) on [x, x + 1/sqrt(ell)], for x in [1/2 + 4/n, 1/2 + 4 delta].
// Bisection to 1e-12; the returned value always satisfies g(x, value) <= value.
FixedPoint fixed_point(double x, int ell, int n, double delta);
double fixed_point_f(double x, int ell, int n, double delta);

// |x_{t+1} - x_t|.
double speed(const GridPoint& point);

}  // namespace fet
