#include "fet/dynamics.hpp"

#include <cmath>
#include <string>

#include "fet/duel.hpp"
#include "fet/errors.hpp"
#include "fet/grid.hpp"

namespace fet {

AnalysisConstants AnalysisConstants::make(int n, double delta, double c_sample) {
    if (n < 3) throw DomainError("analysis constants need n >= 3 (ln n > 1)");
    if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)");
    if (!(c_sample > 0.0)) throw DomainError("c_sample must be positive");
    AnalysisConstants c;
    c.delta = delta;
    c.c_sample = c_sample;
    c.log_n = std::log(static_cast<double>(n));
    c.lambda_n = 1.0 / std::pow(c.log_n, 0.5 + delta);
    c.gamma = (1.0 - std::exp(-1.0)) * std::exp(-2.0 * c_sample) / 2.0;
    c.K = c_sample * std::exp(-2.0 * c_sample) / 2.0;
    c.alpha = 9.0;
    return c;
}

int sample_size(int n, double c_sample) {
    if (n < 2) throw DomainError("population must be >= 2");
    if (!(c_sample > 0.0)) throw DomainError("c_sample must be positive");
    const int ell = static_cast<int>(std::ceil(c_sample * std::log(static_cast<double>(n))));
    return ell < 1 ? 1 : ell;
}

FlipProbs flip_probs(double x_t, double x_t1, int ell) {
    // p_lt of the (x_t, x_t1) duel is P(B(x_t1) > B(x_t)).
    const DuelProbs duel = exact_duel(ell, x_t, x_t1);
    return {duel.p_lt + duel.p_eq, duel.p_lt};
}

double expected_next_fraction(double x_t, double x_t1, int n, int ell) {
    if (n < 1) throw DomainError("population must be positive");
    const DuelProbs duel = exact_duel(ell, x_t, x_t1);
    const double rises = duel.p_lt;
    const double ties = duel.p_eq;
    return rises + x_t1 * ties + (1.0 - (rises + ties)) / static_cast<double>(n);
}

FixedPoint fixed_point(double x, int ell, int n, double delta) {
    constexpr double kTol = 1e-12;
    if (ell < 1) throw DomainError("ell must be >= 1");
    if (n < 1) throw DomainError("population must be positive");
    const double lo_x = 0.5 + 4.0 / n;
    const double hi_x = 0.5 + 4.0 * delta;
    if (x < lo_x - kTol || x > hi_x + kTol) {
        throw DomainError("fixed point defined only for x in [1/2 + 4/n, 1/2 + 4 delta], got " +
                          std::to_string(x));
    }
    const double width = 1.0 / std::sqrt(static_cast<double>(ell));
    if (x + width > 1.0) {
        throw DomainError("interval [x, x + 1/sqrt(ell)] leaves [0,1]; ell too small");
    }
    const auto h = [&](double y) { return expected_next_fraction(x, y, n, ell) - y; };

    double lo = x;
    double hi = x + width;
    if (h(lo) >= 0.0) return {lo, true};
    if (h(hi) < 0.0) return {hi, false};
    // Invariant: h(lo) < 0 <= h(hi).
    while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, true};
}

double fixed_point_f(double x, int ell, int n, double delta) {
    return fixed_point(x, ell, n, delta).value;
}

double speed(const GridPoint& point) { return std::abs(point.x_t1 - point.x_t); }

}  // namespace fet
