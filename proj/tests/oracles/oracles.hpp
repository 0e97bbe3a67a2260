#pragma once

// Independent reference implementations used only by tests. Deliberately slow
// and naive: none of them shares code with the library.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// C(k, i) p^i (1-p)^(k-i) by plain multiplication in long double.
inline long double product_pmf(int k, long double p, int i) {
    if (i < 0 || i > k) return 0.0L;
    long double binom = 1.0L;
    for (int j = 1; j <= i; ++j) binom = binom * (k - i + j) / j;
    long double prob = binom;
    for (int j = 0; j < i; ++j) prob *= p;
    for (int j = 0; j < k - i; ++j) prob *= (1.0L - p);
    return prob;
}

struct Triple {
    long double lt = 0.0L, eq = 0.0L, gt = 0.0L;
};

// All (k+1)^2 outcome pairs of B_k(p) versus B_k(q).
inline Triple enumerate_duel(int k, long double p, long double q) {
    std::vector<long double> a(k + 1), b(k + 1);
    for (int i = 0; i <= k; ++i) {
        a[i] = product_pmf(k, p, i);
        b[i] = product_pmf(k, q, i);
    }
    Triple t;
    for (int i = 0; i <= k; ++i) {
        for (int j = 0; j <= k; ++j) {
            const long double w = a[i] * b[j];
            if (i < j) t.lt += w;
            else if (i == j) t.eq += w;
            else t.gt += w;
        }
    }
    return t;
}

// P(|B_k(q) - B_k(p)| = d) for d = 0..k by enumeration.
inline std::vector<long double> abs_difference_pmf(int k, long double p, long double q) {
    std::vector<long double> out(k + 1, 0.0L);
    for (int i = 0; i <= k; ++i) {
        for (int j = 0; j <= k; ++j) {
            out[std::abs(i - j)] += product_pmf(k, p, i) * product_pmf(k, q, j);
        }
    }
    return out;
}

// Paired Monte-Carlo duel.
inline Triple monte_carlo_duel(int k, double p, double q, std::int64_t draws, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::binomial_distribution<int> bp(k, p), bq(k, q);
    std::int64_t lt = 0, eq = 0, gt = 0;
    for (std::int64_t d = 0; d < draws; ++d) {
        const int x = bp(gen), y = bq(gen);
        if (x < y) ++lt;
        else if (x == y) ++eq;
        else ++gt;
    }
    const long double n = static_cast<long double>(draws);
    return {lt / n, eq / n, gt / n};
}

// Exact next-count law for n = 2, ell = 1 by listing every sample outcome.
// Agent 0 is the source (opinion 1), agent 1 the other agent. Round t holds
// k_t ones, round t+1 holds k_t1 ones (the source counts as one of them when
// k_t1 >= 1). Returns P(k_t2 = 0), P(k_t2 = 1), P(k_t2 = 2).
inline std::array<long double, 3> two_agent_kernel_row(int k_t, int k_t1) {
    // Which agents hold 1: the source first.
    const std::array<int, 2> round_t{k_t >= 1 ? 1 : 0, k_t >= 2 ? 1 : 0};
    const std::array<int, 2> round_t1{k_t1 >= 1 ? 1 : 0, k_t1 >= 2 ? 1 : 0};
    std::array<long double, 3> row{0.0L, 0.0L, 0.0L};
    // The other agent drew one agent at round t (its stored c'') and one at t+1 (c').
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const int stored = round_t[a];
            const int fresh = round_t1[b];
            int opinion = round_t1[1];
            if (fresh > stored) opinion = 1;
            else if (fresh < stored) opinion = 0;
            row[1 + opinion] += 0.25L;
        }
    }
    return row;
}

}  // namespace oracle
