#pragma once

// Agent-level and aggregate simulation of the FET protocol, adversarial
// initial conditions, and full trials with domain-labelled trajectories.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fet/domains.hpp"
#include "fet/rng.hpp"

namespace fet {

enum class Backend { AgentLevel, Aggregate };
// Fet compares a fresh half-sample against the stored other half of the previous
// round. Naive (comparison only) compares the whole sample against the previous
// round's whole sample; it is not covered by the analysis.
enum class Variant { Fet, Naive };

struct SimConfig {
    int n = 64;
    int ell = 8;
    double delta = 0.05;
    double c_sample = 3.0;     // only used to build AnalysisConstants for labels
    int source_opinion = 1;
    std::int64_t max_rounds = 10000;
    std::uint64_t seed = 1;
    Backend backend = Backend::AgentLevel;
    Variant variant = Variant::Fet;
    int persistence_rounds = 2;  // rounds of consensus checked after the first hit

    // Throws DomainError on n < 2, ell outside [1, n], max_rounds < 1, bad source bit.
    void validate() const;
};

std::string to_string(Backend backend);
std::string to_string(Variant variant);
Backend parse_backend(const std::string& text);
Variant parse_variant(const std::string& text);

struct AgentState {
    std::uint8_t opinion = 0;
    int prev_count = 0;  // c'' stored from the previous round, in [0, ell]
    bool is_source = false;

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

using Population = std::vector<AgentState>;

// One FET update of a single agent. first_half is S'_t, second_half is S''_t.
// Throws DomainError unless both halves hold exactly ell bits.
AgentState agent_round(const AgentState& state, std::span<const std::uint8_t> first_half,
                       std::span<const std::uint8_t> second_half, int ell, int source_opinion);

// One update of the naive variant with a single sample of ell bits.
AgentState naive_agent_round(const AgentState& state, std::span<const std::uint8_t> sample,
                             int ell, int source_opinion);

// Synchronous round: every agent draws its samples (uniform with replacement,
// itself included) from the pre-round opinions. Streams keyed by (seed, trial, round, agent).
Population step_agent_level(const Population& population, const SimConfig& config,
                            std::uint64_t trial, std::uint64_t round);

// Number of agents holding opinion 1.
std::int64_t count_ones(const Population& population);

// Next 1-count after the pair (k_t, k_t1): source plus two independent binomials.
// Throws DomainError when the pair is inconsistent with the source's opinion.
std::int64_t step_aggregate_counts(std::int64_t k_t, std::int64_t k_t1, const SimConfig& config,
                                   Rng& rng);

// Fraction form. Throws DomainError on off-grid inputs.
double step_aggregate(double x_t, double x_t1, const SimConfig& config, Rng& rng);

// Population whose round-(t+1) opinions hold k_t1 ones and whose counters are
// Count(S''_t) of samples drawn from a round-t population with k_t ones: the
// exact conditional law of the agent state given the pair.
Population plant_pair_state(std::int64_t k_t, std::int64_t k_t1, const SimConfig& config,
                            std::uint64_t trial);

enum class PresetKind {
    AllWrong,
    AllWrongMaxCounters,
    HalfHalf,
    YellowCenter,
    CyanCorner,
    Fraction,
    Explicit,
};

struct Preset {
    PresetKind kind = PresetKind::AllWrong;
    double fraction = 0.0;          // Fraction: share of the correct opinion, source included
    Population explicit_state;      // Explicit: full state, agent 0 is the source

    // Names: all_wrong, all_wrong_max_counters, half_half, yellow_center, cyan_corner,
    // fraction(X), explicit(o:c,o:c,...). Throws UsageError on anything else.
    static Preset parse(const std::string& text);
    std::string name() const;
};

struct InitialCondition {
    Population agents;  // agent 0 is the source
};

// Presets are stated relative to the source: "wrong" means 1 - source_opinion.
// Random counters are uniform on [0, ell]. For source_opinion = 0 the counters
// of the counter-bearing presets are mirrored (c -> ell - c).
InitialCondition init_adversarial(const Preset& preset, const SimConfig& config,
                                  std::uint64_t trial);

struct TrajectoryRow {
    std::int64_t round = 0;
    double x_t = 0.0;
    double x_t1 = 0.0;
    DomainLabel domain = DomainLabel::Unclassified;
    YellowLabel yellow = YellowLabel::OutsideYellowPrime;
};

struct Trajectory {
    std::vector<std::int64_t> ones;  // 1-count at rounds 0..T
    std::vector<TrajectoryRow> rows;  // pairs (x_t, x_{t+1}), t = 0..T-1
    std::optional<std::int64_t> converged_round;
    bool source_invariant_held = true;
};

// Runs the configured backend (the aggregate backend always takes its first round
// at agent level, since the adversary also sets the counters). Stops once consensus
// on the source opinion has persisted for persistence_rounds, or at max_rounds.
Trajectory run_trial(const SimConfig& config, const InitialCondition& initial, std::uint64_t trial);

// Labels (x_t, x_{t+1}) pairs of a count sequence; Unclassified throughout when n < 3.
std::vector<TrajectoryRow> label_rows(const std::vector<std::int64_t>& ones, const SimConfig& config);

}  // namespace fet
