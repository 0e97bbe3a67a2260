#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/protocol.hpp"

using namespace fet;

namespace {

SimConfig small_config(int n, int ell, std::uint64_t seed = 3) {
    SimConfig cfg;
    cfg.n = n;
    cfg.ell = ell;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("agent_round update rule") {
    const std::array<std::uint8_t, 3> two_ones{1, 1, 0};
    const std::array<std::uint8_t, 3> no_ones{0, 0, 0};
    const AgentState a{0, 1, false};
    const AgentState next = agent_round(a, two_ones, no_ones, 3, 1);
    CHECK(next.opinion == 1);
    CHECK(next.prev_count == 0);

    // tie keeps the opinion
    const AgentState tied{1, 2, false};
    CHECK(agent_round(tied, two_ones, two_ones, 3, 1).opinion == 1);
    const AgentState tied0{0, 2, false};
    CHECK(agent_round(tied0, two_ones, two_ones, 3, 1).opinion == 0);

    // fewer ones than stored -> 0
    CHECK(agent_round({1, 3, false}, two_ones, two_ones, 3, 1).opinion == 0);

    // the source never moves
    const AgentState src{1, 0, true};
    CHECK(agent_round(src, no_ones, no_ones, 3, 1).opinion == 1);
    CHECK(agent_round({0, 3, true}, two_ones, two_ones, 3, 0).opinion == 0);

    const std::array<std::uint8_t, 2> short_sample{1, 0};
    CHECK_THROWS_AS(agent_round(a, short_sample, no_ones, 3, 1), DomainError);
}

TEST_CASE("naive_agent_round compares with the previous whole-sample count") {
    const std::array<std::uint8_t, 4> three{1, 1, 1, 0};
    const AgentState a{0, 2, false};
    const AgentState next = naive_agent_round(a, three, 4, 1);
    CHECK(next.opinion == 1);
    CHECK(next.prev_count == 3);
    CHECK(naive_agent_round({1, 4, false}, three, 4, 1).opinion == 0);
}

TEST_CASE("all-correct is absorbing whatever the counters") {
    SimConfig cfg = small_config(50, 6);
    Population pop(50);
    for (int i = 0; i < 50; ++i) pop[i] = {1, i % 7, i == 0};
    for (std::uint64_t r = 0; r < 20; ++r) {
        pop = step_agent_level(pop, cfg, 0, r);
        CHECK(count_ones(pop) == 50);
    }
    Rng rng = make_stream(1, 2, 3, 4);
    CHECK(step_aggregate_counts(50, 50, cfg, rng) == 50);
    CHECK(step_aggregate(1.0, 1.0, cfg, rng) == 1.0);
}

TEST_CASE("two agents reach consensus") {
    SimConfig cfg = small_config(2, 1);
    cfg.max_rounds = 1000;
    Preset p = Preset::parse("explicit(1:0,0:1)");
    int converged = 0;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const Trajectory t = run_trial(cfg, init_adversarial(p, cfg, trial), trial);
        if (t.converged_round) ++converged;
        CHECK(t.source_invariant_held);
    }
    CHECK(converged == 200);
}

TEST_CASE("per-agent flip rates match flip_probs") {
    const int n = 100000, ell = 8;
    SimConfig cfg = small_config(n, ell, 11);
    const std::int64_t k_t = 35000, k_t1 = 52000;
    const Population planted = plant_pair_state(k_t, k_t1, cfg, 0);
    CHECK(count_ones(planted) == k_t1);
    const Population next = step_agent_level(planted, cfg, 0, 1);
    std::int64_t ones_before = 0, kept = 0, zeros_before = 0, gained = 0;
    for (int i = 1; i < n; ++i) {
        if (planted[i].opinion) {
            ++ones_before;
            kept += next[i].opinion;
        } else {
            ++zeros_before;
            gained += next[i].opinion;
        }
    }
    const FlipProbs f = flip_probs(double(k_t) / n, double(k_t1) / n, ell);
    const double keep_rate = double(kept) / ones_before;
    const double gain_rate = double(gained) / zeros_before;
    CHECK(std::abs(keep_rate - f.p_keep_one) <= 3 * std::sqrt(f.p_keep_one * (1 - f.p_keep_one) / ones_before));
    CHECK(std::abs(gain_rate - f.p_gain_one) <= 3 * std::sqrt(f.p_gain_one * (1 - f.p_gain_one) / zeros_before));
}

TEST_CASE("aggregate mean at (1/2, 1/2)") {
    SimConfig cfg = small_config(100, 2);
    Rng rng = make_stream(99, 0, 0, 0);
    const int draws = 1000000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += step_aggregate(0.5, 0.5, cfg, rng);
    const FlipProbs f = flip_probs(0.5, 0.5, 2);
    const double var_k = 49 * f.p_keep_one * (1 - f.p_keep_one) + 50 * f.p_gain_one * (1 - f.p_gain_one);
    const double se = std::sqrt(var_k) / 100 / std::sqrt(double(draws));
    CHECK(std::abs(sum / draws - 0.503125) <= 3 * se);
    CHECK_THROWS_AS(step_aggregate(0.505, 0.5, cfg, rng), DomainError);
    CHECK_THROWS_AS(step_aggregate_counts(10, 0, cfg, rng), DomainError);
}

TEST_CASE("preset initial fractions") {
    SimConfig cfg = small_config(100, 14);
    const auto corner = init_adversarial(Preset::parse("cyan_corner"), cfg, 0);
    CHECK(count_ones(corner.agents) == 1);
    for (const auto& a : corner.agents) CHECK(a.prev_count == 14);

    const auto wrong = init_adversarial(Preset::parse("all_wrong"), cfg, 0);
    CHECK(count_ones(wrong.agents) == 1);
    CHECK(wrong.agents[0].is_source);
    CHECK(wrong.agents[0].opinion == 1);

    SimConfig c64 = small_config(64, 8);
    CHECK(count_ones(init_adversarial(Preset::parse("half_half"), c64, 0).agents) == 33);
    CHECK(count_ones(init_adversarial(Preset::parse("yellow_center"), c64, 0).agents) == 32);
    CHECK(count_ones(init_adversarial(Preset::parse("fraction(0.25)"), c64, 0).agents) == 16);

    c64.source_opinion = 0;
    const auto mirrored = init_adversarial(Preset::parse("all_wrong_max_counters"), c64, 0);
    CHECK(count_ones(mirrored.agents) == 63);
    for (const auto& a : mirrored.agents) CHECK(a.prev_count == 0);

    CHECK_THROWS_AS(Preset::parse("sideways"), UsageError);
    CHECK_THROWS_AS(Preset::parse("fraction(2)"), UsageError);
    CHECK(Preset::parse("fraction(0.25)").name() == Preset::parse(Preset::parse("fraction(0.25)").name()).name());
}

TEST_CASE("all-correct start converges at round 0") {
    SimConfig cfg = small_config(64, 8);
    const auto ic = init_adversarial(Preset::parse("fraction(1)"), cfg, 0);
    const Trajectory t = run_trial(cfg, ic, 0);
    REQUIRE(t.converged_round.has_value());
    CHECK(*t.converged_round == 0);
    CHECK(t.ones.size() == static_cast<std::size_t>(cfg.persistence_rounds + 1));
}

TEST_CASE("trials are deterministic and mirror-symmetric") {
    for (Backend backend : {Backend::AgentLevel, Backend::Aggregate}) {
        SimConfig cfg = small_config(64, 8, 42);
        cfg.backend = backend;
        const Preset preset = Preset::parse("half_half");
        const Trajectory a = run_trial(cfg, init_adversarial(preset, cfg, 5), 5);
        const Trajectory b = run_trial(cfg, init_adversarial(preset, cfg, 5), 5);
        CHECK(a.ones == b.ones);

        SimConfig zero = cfg;
        zero.source_opinion = 0;
        const Trajectory m = run_trial(zero, init_adversarial(preset, zero, 5), 5);
        REQUIRE(m.ones.size() == a.ones.size());
        for (std::size_t i = 0; i < a.ones.size(); ++i) CHECK(m.ones[i] == 64 - a.ones[i]);
        CHECK(a.converged_round.has_value());
    }
}

TEST_CASE("trajectory rows label consecutive pairs") {
    SimConfig cfg = small_config(64, 8);
    const Trajectory t = run_trial(cfg, init_adversarial(Preset::parse("all_wrong"), cfg, 1), 1);
    REQUIRE(t.rows.size() + 1 == t.ones.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(t.rows[i].round == static_cast<std::int64_t>(i));
        CHECK(t.rows[i].x_t == doctest::Approx(t.ones[i] / 64.0));
        CHECK(t.rows[i].x_t1 == doctest::Approx(t.ones[i + 1] / 64.0));
        CHECK(t.rows[i].domain != DomainLabel::Unclassified);
    }
    CHECK(label_rows({1, 2, 2}, small_config(2, 1))[0].domain == DomainLabel::Unclassified);
}

TEST_CASE("config validation") {
    SimConfig cfg = small_config(10, 11);
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.ell = 3;
    cfg.source_opinion = 2;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK(parse_backend("aggregate") == Backend::Aggregate);
    CHECK(parse_variant("naive") == Variant::Naive);
    CHECK_THROWS_AS(parse_backend("gpu"), UsageError);
    SimConfig naive = small_config(10, 3);
    naive.variant = Variant::Naive;
    naive.backend = Backend::Aggregate;
    CHECK_THROWS_AS(run_trial(naive, init_adversarial(Preset::parse("all_wrong"), naive, 0), 0), UsageError);
}
