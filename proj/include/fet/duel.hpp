#pragma once

// Competitions between two independent binomial variables with the same
// number of trials. B_k(p) denotes a Binomial(k, p) draw.

#include <vector>

namespace fet {

struct DuelProbs {
    double p_lt = 0.0;  // P(B_k(p) < B_k(q))
    double p_eq = 0.0;  // P(B_k(p) = B_k(q))
    double p_gt = 0.0;  // P(B_k(p) > B_k(q))

    // Probabilities seen from the other coin: swaps p_lt and p_gt.
    DuelProbs swapped() const { return {p_gt, p_eq, p_lt}; }
};

// P(B_k(p) = i). Evaluated in log space; exact at p in {0, 1}.
double binomial_pmf(int k, double p, int i);

// Full pmf vector [P(B_k(p) = 0), ..., P(B_k(p) = k)].
std::vector<double> binomial_pmf_vector(int k, double p);

// Exact (<, =, >) triple for B_k(p) versus B_k(q), O(k) via tail sums.
DuelProbs exact_duel(int k, double p, double q);

// 1 - exp(-k (q-p)^2 / 2): Hoeffding lower bound on P(B_k(p) < B_k(q)), p < q.
double hoeffding_duel_bound(int k, double p, double q);

// Berry-Esseen constant used by the underdog bound.
inline constexpr double kBerryEsseenC = 0.4748;

// Standard normal CDF.
double normal_cdf(double x);

// max(0, 1 - Phi(sqrt(k)(q-p)/sigma) - C/(sigma sqrt(k))), sigma^2 = p(1-p) + q(1-q):
// a lower bound on P(B_k(p) > B_k(q)) for p < q.
double underdog_lower_bound(int k, double p, double q);

// ((q(1-p))^d - (p(1-q))^d) / ((q(1-p))^d + (p(1-q))^d) for p <= q:
// the edge the better coin gets once the two counts are known to differ by d.
double advantage(int d, double p, double q);

// Right-hand side of the converse duel bound
//   P(B_k(p) < B_k(q)) < 1/2 + alpha (q-p) sqrt(k) - P(B_k(p) = B_k(q)) / 2,
// stated for p, q in [1/3, 2/3], p < q, q - p <= 1/sqrt(k).
double converse_duel_upper(int k, double p, double q, double alpha);

// Right-hand side of the near-1/2 lower bound
//   P(B_k(p) < B_k(q)) > 1/2 + lambda (q-p) - P(B_k(p) = B_k(q)) / 2,
// which holds for k above some K(lambda) and p, q within eps(lambda) of 1/2.
double near_half_duel_lower(int k, double p, double q, double lambda);

}  // namespace fet
