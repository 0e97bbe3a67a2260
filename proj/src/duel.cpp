#include "fet/duel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fet/errors.hpp"

namespace fet {

namespace {

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(p));
    }
}

void require_trials(int k, int min_k) {
    if (k < min_k) {
        throw DomainError("sample count must be >= " + std::to_string(min_k) + ", got " +
                          std::to_string(k));
    }
}

double log_binomial_coefficient(int k, int i) {
    return std::lgamma(k + 1.0) - std::lgamma(i + 1.0) - std::lgamma(k - i + 1.0);
}

}  // namespace

double binomial_pmf(int k, double p, int i) {
    require_trials(k, 0);
    require_probability(p, "p");
    if (i < 0 || i > k) {
        throw DomainError("outcome " + std::to_string(i) + " outside [0," + std::to_string(k) + "]");
    }
    if (p == 0.0) return i == 0 ? 1.0 : 0.0;
    if (p == 1.0) return i == k ? 1.0 : 0.0;
    const double log_pmf =
        log_binomial_coefficient(k, i) + i * std::log(p) + (k - i) * std::log1p(-p);
    return std::exp(log_pmf);
}

std::vector<double> binomial_pmf_vector(int k, double p) {
    require_trials(k, 0);
    require_probability(p, "p");
    std::vector<double> pmf(static_cast<std::size_t>(k) + 1, 0.0);
    if (p == 0.0) {
        pmf.front() = 1.0;
        return pmf;
    }
    if (p == 1.0) {
        pmf.back() = 1.0;
        return pmf;
    }
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_k_fact = std::lgamma(k + 1.0);
    for (int i = 0; i <= k; ++i) {
        pmf[i] = std::exp(log_k_fact - std::lgamma(i + 1.0) - std::lgamma(k - i + 1.0) +
                          i * log_p + (k - i) * log_q);
    }
    // The shared lgamma(k+1) rounding error is a common factor; renormalising removes it.
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (double& v : pmf) v /= total;
    return pmf;
}

DuelProbs exact_duel(int k, double p, double q) {
    require_trials(k, 1);
    require_probability(p, "p");
    require_probability(q, "q");
    const std::vector<double> a = binomial_pmf_vector(k, p);
    const std::vector<double> b = binomial_pmf_vector(k, q);

    // above_a[i] = P(B(p) > i), above_b[i] = P(B(q) > i), accumulated from the top.
    std::vector<double> above_a(a.size(), 0.0), above_b(b.size(), 0.0);
    for (int i = k - 1; i >= 0; --i) {
        above_a[i] = above_a[i + 1] + a[i + 1];
        above_b[i] = above_b[i + 1] + b[i + 1];
    }

    DuelProbs out;
    for (int i = 0; i <= k; ++i) {
        out.p_eq += a[i] * b[i];
        out.p_lt += a[i] * above_b[i];
        out.p_gt += b[i] * above_a[i];
    }
    out.p_lt = std::clamp(out.p_lt, 0.0, 1.0);
    out.p_eq = std::clamp(out.p_eq, 0.0, 1.0);
    out.p_gt = std::clamp(out.p_gt, 0.0, 1.0);
    return out;
}

double hoeffding_duel_bound(int k, double p, double q) {
    require_trials(k, 1);
    require_probability(p, "p");
    require_probability(q, "q");
    if (!(p < q)) throw DomainError("hoeffding_duel_bound requires p < q");
    const double gap = q - p;
    return -std::expm1(-0.5 * k * gap * gap);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double underdog_lower_bound(int k, double p, double q) {
    require_trials(k, 1);
    require_probability(p, "p");
    require_probability(q, "q");
    if (!(p < q)) throw DomainError("underdog_lower_bound requires p < q");
    const double sigma = std::sqrt(p * (1.0 - p) + q * (1.0 - q));
    // Both coins deterministic: the underdog never wins.
    if (sigma == 0.0) return 0.0;
    const double root_k = std::sqrt(static_cast<double>(k));
    const double bound =
        1.0 - normal_cdf(root_k * (q - p) / sigma) - kBerryEsseenC / (sigma * root_k);
    return std::max(0.0, bound);
}

double advantage(int d, double p, double q) {
    if (d < 1) throw DomainError("advantage requires d >= 1");
    require_probability(p, "p");
    require_probability(q, "q");
    if (p > q) throw DomainError("advantage requires p <= q");
    const double favourite = q * (1.0 - p);
    const double underdog = p * (1.0 - q);
    if (favourite == 0.0) {
        throw DomainError("advantage undefined: both coins are deterministic and equal");
    }
    // ratio = (1 - r^d) / (1 + r^d), r = underdog / favourite in [0, 1].
    const double rd = std::pow(underdog / favourite, d);
    return (1.0 - rd) / (1.0 + rd);
}

double converse_duel_upper(int k, double p, double q, double alpha) {
    const DuelProbs duel = exact_duel(k, p, q);
    return 0.5 + alpha * (q - p) * std::sqrt(static_cast<double>(k)) - 0.5 * duel.p_eq;
}

double near_half_duel_lower(int k, double p, double q, double lambda) {
    const DuelProbs duel = exact_duel(k, p, q);
    return 0.5 + lambda * (q - p) - 0.5 * duel.p_eq;
}

}  // namespace fet
