#pragma once

// Exact pair-state chain for small populations (source opinion 1): transition
// kernel, absorption times, and a Monte-Carlo cross-check of both simulators.
//
// The chain lives on (k_t, k_{t+1}) and ignores the counters an adversary may
// plant before round 0; the first agent-level round bridges that gap.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fet/protocol.hpp"
#include "json.hpp"

namespace fet {

inline constexpr int kMaxKernelN = 256;
inline constexpr double kPruneBelow = 1e-15;

struct PairState {
    std::int64_t k_t = 0;
    std::int64_t k_t1 = 0;

    friend bool operator==(const PairState&, const PairState&) = default;
};

struct KernelRow {
    PairState from;
    std::vector<std::pair<std::int64_t, double>> next;  // (k_{t+2}, probability), pruned
    double pruned_mass = 0.0;
};

// States are (k_t, k_t1) with 0 <= k_t <= n and 1 <= k_t1 <= n.
struct Kernel {
    int n = 0;
    int ell = 0;
    std::vector<KernelRow> rows;
    double pruned_mass = 0.0;  // total over rows

    std::size_t index(std::int64_t k_t, std::int64_t k_t1) const {
        return static_cast<std::size_t>(k_t * n + (k_t1 - 1));
    }
    std::size_t state_count() const { return rows.size(); }
    KernelRow& row(std::int64_t k_t, std::int64_t k_t1) { return rows[index(k_t, k_t1)]; }
    const KernelRow& row(std::int64_t k_t, std::int64_t k_t1) const { return rows[index(k_t, k_t1)]; }
};

// Throws UsageError when n > kMaxKernelN or n < 2, DomainError on bad ell.
Kernel build_kernel(int n, int ell);

struct RowIssue {
    PairState state;
    double row_sum = 0.0;
    double mean = 0.0;
    double expected_mean = 0.0;  // n g(k_t/n, k_t1/n)
};

// Rows whose sum differs from 1 by more than tol, or whose mean differs from n g by more than tol.
std::vector<RowIssue> audit_kernel(const Kernel& kernel, double tol = 1e-9);

// States with self-transition probability 1.
std::vector<PairState> absorbing_states(const Kernel& kernel);

struct AbsorptionTimes {
    std::vector<double> tau;  // indexed like Kernel::rows; tau(n, n) = 0
    double relative_residual = 0.0;
    std::string solver;
    int n = 0;

    double at(std::int64_t k_t, std::int64_t k_t1) const {
        return tau[static_cast<std::size_t>(k_t * n + (k_t1 - 1))];
    }
};

// Expected rounds to reach (n, n). Throws StructuralError listing states that
// cannot reach (n, n), or when the sparse solve misses the 1e-10 residual target.
AbsorptionTimes absorption_times(const Kernel& kernel);

// Exact law of the 1-count after one FET round from an explicit population
// (entry j = P(k_1 = j)). Agents are independent given the population.
std::vector<double> first_round_distribution(const Population& population, int ell,
                                             int source_opinion);

// E[rounds to consensus] from a population: sum_j P(k_1 = j) tau(k_0, j).
double expected_consensus_time(const Kernel& kernel, const AbsorptionTimes& times,
                               const Population& population);

struct BackendSummary {
    std::string backend;
    std::int64_t trials = 0;
    std::int64_t converged = 0;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    double z = 0.0;        // (mean - exact) / se
    double rel_error = 0.0;
    bool pass = false;      // |z| <= 3 and every trial converged
};

struct ExactCheckReport {
    int n = 0;
    int ell = 0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::string preset = "all_wrong";
    double exact_mean = 0.0;
    double pruned_mass = 0.0;
    double solver_residual = 0.0;
    std::vector<RowIssue> bad_rows;
    BackendSummary agent;
    BackendSummary aggregate;
    double backend_z = 0.0;  // two-sample z between the backends
    bool pass = false;
};

// Runs `trials` agent-level and aggregate trials from all_wrong, compares both
// hitting-time means to the exact value at 3 sigma and to each other, and audits
// the kernel rows. n <= 64.
ExactCheckReport simulate_exact_check(int n, int ell, std::int64_t trials, std::uint64_t seed);
// Same, with a caller-supplied kernel (e.g. a deliberately corrupted one).
ExactCheckReport simulate_exact_check(const Kernel& kernel, std::int64_t trials, std::uint64_t seed);

nlohmann::json to_json(const ExactCheckReport& report);

// Chain summary for the CLI: sizes, pruned mass, absorbing states, solver residual,
// and either tau at `from` or the full tau table.
nlohmann::json chain_report(int n, int ell, const std::optional<PairState>& from);

inline constexpr const char* kChainHeader =
    "pair-state chain on (k_t, k_t+1) with source opinion 1; adversarial counters before "
    "round 0 are not represented, the first agent-level round bridges them";

}  // namespace fet
