#include <cmath>
#include <string>

#include "doctest.h"
#include "fet/errors.hpp"
#include "fet/markov.hpp"
#include "oracles.hpp"

using namespace fet;

namespace {

double row_probability(const KernelRow& row, std::int64_t k) {
    for (const auto& [next, p] : row.next) {
        if (next == k) return p;
    }
    return 0.0;
}

}  // namespace

TEST_CASE("two-agent kernel matches outcome enumeration") {
    const Kernel kernel = build_kernel(2, 1);
    CHECK(kernel.state_count() == 6);
    for (int k_t = 0; k_t <= 2; ++k_t) {
        for (int k_t1 = 1; k_t1 <= 2; ++k_t1) {
            const auto expected = oracle::two_agent_kernel_row(k_t, k_t1);
            const KernelRow& row = kernel.row(k_t, k_t1);
            CHECK(row.from.k_t == k_t);
            CHECK(row.from.k_t1 == k_t1);
            CHECK(row_probability(row, 0) == 0.0);
            for (int k = 1; k <= 2; ++k) {
                CHECK(std::abs(row_probability(row, k) - static_cast<double>(expected[k])) < 1e-15);
            }
        }
    }
}

TEST_CASE("kernel rows are distributions with mean n g") {
    const Kernel kernel = build_kernel(64, 8);
    CHECK(kernel.state_count() == 65 * 64);
    CHECK(audit_kernel(kernel).empty());
    double worst = 0.0;
    for (const KernelRow& row : kernel.rows) {
        double sum = row.pruned_mass;
        for (const auto& [k, p] : row.next) sum += p;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    CHECK(worst < 1e-10);
    CHECK(kernel.pruned_mass < 1e-9);

    const KernelRow& top = kernel.row(64, 64);
    REQUIRE(top.next.size() == 1);
    CHECK(top.next[0].first == 64);
    CHECK(top.next[0].second == 1.0);
    const auto absorbing = absorbing_states(kernel);
    REQUIRE(absorbing.size() == 1);
    CHECK(absorbing[0] == PairState{64, 64});

    CHECK_THROWS_AS(build_kernel(kMaxKernelN + 1, 8), UsageError);
    CHECK_THROWS_AS(build_kernel(1, 1), UsageError);
}

TEST_CASE("absorption times") {
    const Kernel kernel = build_kernel(32, 6);
    const AbsorptionTimes times = absorption_times(kernel);
    CHECK(times.at(32, 32) == 0.0);
    CHECK(times.relative_residual <= 1e-10);
    // one round short of consensus beats the cyan corner...
    CHECK(times.at(31, 32) < times.at(1, 1));
    // ...but a stalled pair next to consensus does not: with x_t = x_t+1 about 1/7 of
    // the 1-holders see c' < c'' and the chain first follows that downward trend.
    CHECK(times.at(31, 31) > times.at(1, 1));
    CHECK(times.at(30, 31) > times.at(1, 1));
    CHECK(times.at(5, 32) == doctest::Approx(1.0));
    for (double t : times.tau) CHECK(t >= 0.0);
}

TEST_CASE("absorption times satisfy the first-step equations") {
    const Kernel kernel = build_kernel(12, 3);
    const AbsorptionTimes times = absorption_times(kernel);
    for (const KernelRow& row : kernel.rows) {
        if (row.from == PairState{12, 12}) continue;
        double rhs = 1.0;
        for (const auto& [k, p] : row.next) rhs += p * times.at(row.from.k_t1, k);
        CHECK(times.at(row.from.k_t, row.from.k_t1) == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("a kernel that cannot reach consensus is rejected with its states") {
    Kernel kernel = build_kernel(8, 2);
    KernelRow& row = kernel.row(3, 3);
    row.next = {{3, 1.0}};
    try {
        absorption_times(kernel);
        FAIL("expected StructuralError");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("(3,3)") != std::string::npos);
    }
}

TEST_CASE("first_round_distribution is a distribution with the right mean") {
    SimConfig cfg;
    cfg.n = 20;
    cfg.ell = 4;
    const auto ic = init_adversarial(Preset::parse("half_half"), cfg, 3);
    const auto dist = first_round_distribution(ic.agents, 4, 1);
    double total = 0.0, mean = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        total += dist[j];
        mean += j * dist[j];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dist[0] == 0.0);  // the source holds 1

    // per-agent probabilities summed by hand
    const double x0 = 11.0 / 20;
    double expected = 1.0;
    for (std::size_t i = 1; i < ic.agents.size(); ++i) {
        const auto& a = ic.agents[i];
        for (int c = 0; c <= 4; ++c) {
            const double pc = static_cast<double>(oracle::product_pmf(4, x0, c));
            if (c > a.prev_count || (c == a.prev_count && a.opinion == 1)) expected += pc;
        }
    }
    CHECK(mean == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("exact check: smoke and corrupted kernel") {
    const ExactCheckReport small = simulate_exact_check(2, 1, 2000, 5);
    CHECK(small.pass);
    CHECK(small.bad_rows.empty());

    Kernel kernel = build_kernel(8, 2);
    KernelRow& row = kernel.row(4, 5);
    row.next.front().second += 0.05;
    const ExactCheckReport broken = simulate_exact_check(kernel, 200, 5);
    CHECK_FALSE(broken.pass);
    REQUIRE(broken.bad_rows.size() == 1);
    CHECK(broken.bad_rows[0].state == PairState{4, 5});
    CHECK(to_json(broken)["pass"] == false);
}

TEST_CASE("chain report") {
    const auto full = chain_report(6, 2, std::nullopt);
    CHECK(full["states"] == 42);
    const auto one = chain_report(6, 2, PairState{1, 1});
    CHECK(one["expected_rounds"].get<double>() > 0.0);
    CHECK_THROWS_AS(chain_report(6, 2, PairState{1, 0}), DomainError);
}
