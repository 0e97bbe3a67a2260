#include "fet/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "fet/dynamics.hpp"
#include "fet/errors.hpp"

namespace fet {

void SimConfig::validate() const {
    if (n < 2) throw DomainError("n must be >= 2");
    if (ell < 1 || ell > n) throw DomainError("ell must lie in [1, n]");
    if (max_rounds < 1) throw DomainError("max_rounds must be >= 1");
    if (source_opinion != 0 && source_opinion != 1) throw DomainError("source_opinion must be 0 or 1");
    if (persistence_rounds < 0) throw DomainError("persistence_rounds must be >= 0");
    if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)");
}

std::string to_string(Backend backend) {
    return backend == Backend::AgentLevel ? "agent" : "aggregate";
}

std::string to_string(Variant variant) { return variant == Variant::Fet ? "fet" : "naive"; }

Backend parse_backend(const std::string& text) {
    if (text == "agent" || text == "agent_level" || text == "AgentLevel") return Backend::AgentLevel;
    if (text == "aggregate" || text == "Aggregate") return Backend::Aggregate;
    throw UsageError("unknown backend '" + text + "' (agent|aggregate)");
}

Variant parse_variant(const std::string& text) {
    if (text == "fet") return Variant::Fet;
    if (text == "naive") return Variant::Naive;
    throw UsageError("unknown variant '" + text + "' (fet|naive)");
}

namespace {

int count_bits(std::span<const std::uint8_t> bits) {
    int ones = 0;
    for (std::uint8_t b : bits) ones += b;
    return ones;
}

std::uint8_t compare_rule(int fresh, int stored, std::uint8_t current) {
    if (fresh > stored) return 1;
    if (fresh < stored) return 0;
    return current;
}

}  // namespace

AgentState agent_round(const AgentState& state, std::span<const std::uint8_t> first_half,
                       std::span<const std::uint8_t> second_half, int ell, int source_opinion) {
    if (static_cast<int>(first_half.size()) != ell || static_cast<int>(second_half.size()) != ell) {
        throw DomainError("both half-samples must hold exactly ell bits");
    }
    AgentState next = state;
    next.prev_count = count_bits(second_half);
    if (state.is_source) {
        next.opinion = static_cast<std::uint8_t>(source_opinion);
        return next;
    }
    next.opinion = compare_rule(count_bits(first_half), state.prev_count, state.opinion);
    return next;
}

AgentState naive_agent_round(const AgentState& state, std::span<const std::uint8_t> sample,
                             int ell, int source_opinion) {
    if (static_cast<int>(sample.size()) != ell) throw DomainError("sample must hold exactly ell bits");
    AgentState next = state;
    const int count = count_bits(sample);
    next.prev_count = count;
    next.opinion = state.is_source ? static_cast<std::uint8_t>(source_opinion)
                                   : compare_rule(count, state.prev_count, state.opinion);
    return next;
}

std::int64_t count_ones(const Population& population) {
    std::int64_t ones = 0;
    for (const AgentState& a : population) ones += a.opinion;
    return ones;
}

Population step_agent_level(const Population& population, const SimConfig& config,
                            std::uint64_t trial, std::uint64_t round) {
    const int n = static_cast<int>(population.size());
    const int ell = config.ell;
    std::vector<std::uint8_t> snapshot(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) snapshot[i] = population[i].opinion;

    const int draws = config.variant == Variant::Fet ? 2 * ell : ell;
    std::vector<std::uint8_t> sample(static_cast<std::size_t>(draws));
    std::uniform_int_distribution<int> pick(0, n - 1);
    Population next(population.size());
    for (int i = 0; i < n; ++i) {
        Rng rng = make_stream(config.seed, trial, round, static_cast<std::uint64_t>(i));
        for (int j = 0; j < draws; ++j) sample[j] = snapshot[pick(rng)];
        const std::span<const std::uint8_t> all(sample);
        if (config.variant == Variant::Fet) {
            std::shuffle(sample.begin(), sample.end(), rng);
            next[i] = agent_round(population[i], all.first(ell), all.last(ell), ell,
                                  config.source_opinion);
        } else {
            next[i] = naive_agent_round(population[i], all, ell, config.source_opinion);
        }
    }
    return next;
}

std::int64_t step_aggregate_counts(std::int64_t k_t, std::int64_t k_t1, const SimConfig& config,
                                   Rng& rng) {
    const std::int64_t n = config.n;
    if (k_t < 0 || k_t > n || k_t1 < 0 || k_t1 > n) throw DomainError("counts must lie in [0, n]");
    if (config.variant != Variant::Fet) {
        throw UsageError("the aggregate backend exists only for the fet variant");
    }
    // Work in "correct-opinion" counts; the dynamics are symmetric in the labels.
    const bool flip = config.source_opinion == 0;
    const std::int64_t c_t = flip ? n - k_t : k_t;
    const std::int64_t c_t1 = flip ? n - k_t1 : k_t1;
    if (c_t1 < 1) throw DomainError("pair inconsistent with the source holding its opinion");

    const double dn = static_cast<double>(n);
    const FlipProbs probs = flip_probs(static_cast<double>(c_t) / dn, static_cast<double>(c_t1) / dn,
                                       config.ell);
    std::binomial_distribution<std::int64_t> keep(c_t1 - 1, std::clamp(probs.p_keep_one, 0.0, 1.0));
    std::binomial_distribution<std::int64_t> gain(n - c_t1, std::clamp(probs.p_gain_one, 0.0, 1.0));
    const std::int64_t c_next = 1 + keep(rng) + gain(rng);
    return flip ? n - c_next : c_next;
}

double step_aggregate(double x_t, double x_t1, const SimConfig& config, Rng& rng) {
    const GridPoint point{x_t, x_t1};
    if (!point.on_grid(config.n, 1e-9)) throw DomainError("aggregate step needs grid inputs");
    const auto k_t = static_cast<std::int64_t>(std::llround(x_t * config.n));
    const auto k_t1 = static_cast<std::int64_t>(std::llround(x_t1 * config.n));
    return static_cast<double>(step_aggregate_counts(k_t, k_t1, config, rng)) / config.n;
}

namespace {

// Population with the source at index 0 and `ones` agents holding 1 in total.
Population population_with_ones(std::int64_t ones, const SimConfig& config) {
    const std::int64_t n = config.n;
    const std::int64_t source_one = config.source_opinion;
    if (ones < source_one || ones > n - 1 + source_one) {
        throw DomainError("1-count inconsistent with the source opinion");
    }
    Population pop(static_cast<std::size_t>(n));
    pop[0].is_source = true;
    pop[0].opinion = static_cast<std::uint8_t>(config.source_opinion);
    std::int64_t remaining = ones - source_one;
    for (std::int64_t i = 1; i < n && remaining > 0; ++i, --remaining) pop[i].opinion = 1;
    return pop;
}

}  // namespace

Population plant_pair_state(std::int64_t k_t, std::int64_t k_t1, const SimConfig& config,
                            std::uint64_t trial) {
    config.validate();
    if (config.variant != Variant::Fet) throw UsageError("pair planting is defined for fet only");
    const Population round_t = population_with_ones(k_t, config);
    Population planted = population_with_ones(k_t1, config);
    std::vector<std::uint8_t> sample(static_cast<std::size_t>(2 * config.ell));
    std::uniform_int_distribution<int> pick(0, config.n - 1);
    for (int i = 0; i < config.n; ++i) {
        Rng rng = make_stream(config.seed, trial, kPlantRound, static_cast<std::uint64_t>(i));
        for (auto& bit : sample) bit = round_t[pick(rng)].opinion;
        std::shuffle(sample.begin(), sample.end(), rng);
        planted[i].prev_count = count_bits(std::span<const std::uint8_t>(sample).last(config.ell));
    }
    return planted;
}

Preset Preset::parse(const std::string& text) {
    Preset p;
    if (text == "all_wrong") {
        p.kind = PresetKind::AllWrong;
    } else if (text == "all_wrong_max_counters") {
        p.kind = PresetKind::AllWrongMaxCounters;
    } else if (text == "half_half") {
        p.kind = PresetKind::HalfHalf;
    } else if (text == "yellow_center") {
        p.kind = PresetKind::YellowCenter;
    } else if (text == "cyan_corner") {
        p.kind = PresetKind::CyanCorner;
    } else if (text.rfind("fraction(", 0) == 0 && text.back() == ')') {
        p.kind = PresetKind::Fraction;
        const std::string inner = text.substr(9, text.size() - 10);
        try {
            std::size_t used = 0;
            p.fraction = std::stod(inner, &used);
            if (used != inner.size()) throw std::invalid_argument(inner);
        } catch (const std::exception&) {
            throw UsageError("bad fraction preset '" + text + "'");
        }
        if (!(p.fraction >= 0.0 && p.fraction <= 1.0)) throw UsageError("fraction must lie in [0,1]");
    } else if (text.rfind("explicit(", 0) == 0 && text.back() == ')') {
        p.kind = PresetKind::Explicit;
        std::stringstream items(text.substr(9, text.size() - 10));
        std::string item;
        bool first = true;
        while (std::getline(items, item, ',')) {
            const auto colon = item.find(':');
            AgentState a;
            try {
                a.opinion = static_cast<std::uint8_t>(std::stoi(item.substr(0, colon)));
                a.prev_count = colon == std::string::npos ? 0 : std::stoi(item.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("bad explicit agent '" + item + "'");
            }
            if (a.opinion > 1) throw UsageError("explicit opinions must be 0 or 1");
            a.is_source = first;
            first = false;
            p.explicit_state.push_back(a);
        }
        if (p.explicit_state.empty()) throw UsageError("explicit preset needs at least one agent");
    } else {
        throw UsageError("unknown preset '" + text + "'");
    }
    return p;
}

std::string Preset::name() const {
    switch (kind) {
        case PresetKind::AllWrong: return "all_wrong";
        case PresetKind::AllWrongMaxCounters: return "all_wrong_max_counters";
        case PresetKind::HalfHalf: return "half_half";
        case PresetKind::YellowCenter: return "yellow_center";
        case PresetKind::CyanCorner: return "cyan_corner";
        case PresetKind::Fraction: {
            std::ostringstream os;
            os << "fraction(" << fraction << ")";
            return os.str();
        }
        case PresetKind::Explicit: return "explicit";
    }
    return "unknown";
}

InitialCondition init_adversarial(const Preset& preset, const SimConfig& config,
                                  std::uint64_t trial) {
    config.validate();
    const std::int64_t n = config.n;
    const int ell = config.ell;
    Rng rng = make_stream(config.seed, trial, kInitRound, 0);
    std::uniform_int_distribution<int> counter(0, ell);

    // Built for source opinion 1 ("correct" = 1), mirrored at the end if needed.
    Population pop(static_cast<std::size_t>(n));
    pop[0].is_source = true;
    pop[0].opinion = 1;
    std::int64_t correct = 1;  // agents with the correct opinion, source included
    bool random_counters = false;
    int fixed_counter = 0;
    switch (preset.kind) {
        case PresetKind::AllWrong: break;
        case PresetKind::AllWrongMaxCounters:
        case PresetKind::CyanCorner: fixed_counter = ell; break;
        case PresetKind::HalfHalf:
            correct = n / 2 + 1;
            random_counters = true;
            break;
        case PresetKind::YellowCenter:
            correct = std::llround(static_cast<double>(n) / 2.0);
            random_counters = true;
            break;
        case PresetKind::Fraction:
            correct = std::max<std::int64_t>(1, std::llround(preset.fraction * static_cast<double>(n)));
            random_counters = true;
            break;
        case PresetKind::Explicit: {
            if (static_cast<std::int64_t>(preset.explicit_state.size()) != n) {
                throw UsageError("explicit preset must list exactly n agents");
            }
            InitialCondition ic{preset.explicit_state};
            for (AgentState& a : ic.agents) {
                if (a.prev_count < 0 || a.prev_count > ell) {
                    throw UsageError("explicit counters must lie in [0, ell]");
                }
                a.is_source = false;
            }
            ic.agents[0].is_source = true;
            ic.agents[0].opinion = static_cast<std::uint8_t>(config.source_opinion);
            return ic;
        }
    }
    correct = std::min(correct, n);
    for (std::int64_t i = 0; i < n; ++i) {
        if (i > 0) pop[i].opinion = i < correct ? 1 : 0;
        pop[i].prev_count = random_counters ? counter(rng) : fixed_counter;
    }
    if (config.source_opinion == 0) {
        for (AgentState& a : pop) {
            a.opinion = static_cast<std::uint8_t>(1 - a.opinion);
            a.prev_count = ell - a.prev_count;
        }
    }
    return {std::move(pop)};
}

std::vector<TrajectoryRow> label_rows(const std::vector<std::int64_t>& ones, const SimConfig& config) {
    std::vector<TrajectoryRow> rows;
    if (ones.size() < 2) return rows;
    rows.reserve(ones.size() - 1);
    std::optional<AnalysisConstants> constants;
    if (config.n >= 3) constants = AnalysisConstants::make(config.n, config.delta, config.c_sample);
    for (std::size_t t = 0; t + 1 < ones.size(); ++t) {
        TrajectoryRow row;
        row.round = static_cast<std::int64_t>(t);
        const GridPoint p = GridPoint::from_counts(ones[t], ones[t + 1], config.n);
        row.x_t = p.x_t;
        row.x_t1 = p.x_t1;
        if (constants) {
            row.domain = classify(p, *constants);
            row.yellow = classify_yellow(p, *constants);
        }
        rows.push_back(row);
    }
    return rows;
}

Trajectory run_trial(const SimConfig& config, const InitialCondition& initial, std::uint64_t trial) {
    config.validate();
    if (static_cast<int>(initial.agents.size()) != config.n) {
        throw DomainError("initial condition must hold exactly n agents");
    }
    if (config.backend == Backend::Aggregate && config.variant != Variant::Fet) {
        throw UsageError("the aggregate backend exists only for the fet variant");
    }
    const std::int64_t n = config.n;
    const std::int64_t target = config.source_opinion == 1 ? n : 0;

    Trajectory traj;
    Population pop = initial.agents;
    traj.ones.push_back(count_ones(pop));
    std::optional<std::int64_t> first_hit;
    if (traj.ones.back() == target) first_hit = 0;

    Rng aggregate_rng = make_stream(config.seed, trial, 0, kAggregateAgent);
    bool agent_level = true;
    std::int64_t t = 0;
    while (t < config.max_rounds) {
        if (first_hit && t - *first_hit >= config.persistence_rounds) break;
        std::int64_t next = 0;
        if (agent_level) {
            pop = step_agent_level(pop, config, trial, static_cast<std::uint64_t>(t));
            if (pop[0].opinion != config.source_opinion) traj.source_invariant_held = false;
            next = count_ones(pop);
            if (config.backend == Backend::Aggregate) agent_level = false;
        } else {
            const std::size_t m = traj.ones.size();
            next = step_aggregate_counts(traj.ones[m - 2], traj.ones[m - 1], config, aggregate_rng);
        }
        traj.ones.push_back(next);
        ++t;
        if (next == target) {
            if (!first_hit) first_hit = t;
        } else {
            first_hit.reset();
        }
    }
    traj.converged_round = first_hit;
    traj.rows = label_rows(traj.ones, config);
    return traj;
}

}  // namespace fet
