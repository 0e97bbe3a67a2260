#include "doctest.h"
#include "fet/domains.hpp"
#include "fet/errors.hpp"

using namespace fet;

TEST_CASE("classify documented points") {
    CHECK(classify({0.2, 0.5}, 4096, 0.1) == DomainLabel::Green1);
    CHECK(classify({0.8, 0.5}, 4096, 0.1) == DomainLabel::Green0);
    for (int n : {64, 128, 4096}) {
        for (double delta : {0.05, 0.1, 0.2}) {
            CHECK(classify(GridPoint::from_counts(1, 1, n), n, delta) == DomainLabel::Cyan1);
            CHECK(classify(GridPoint::from_counts(n, n, n), n, delta) == DomainLabel::Cyan0);
        }
    }
}

TEST_CASE("classify is mirror-equivariant") {
    const int n = 200;
    const auto c = AnalysisConstants::make(n, 0.05, 3.0);
    for (int a = 0; a <= n; ++a) {
        for (int b = 0; b <= n; ++b) {
            const GridPoint p = GridPoint::from_counts(a, b, n);
            const DomainLabel l = classify(p, c);
            const DomainLabel m = classify(p.mirrored(), c);
            // Precedence puts 1-variants first, so compare raw membership instead.
            for (DomainLabel label : kDomainPrecedence) {
                CHECK(in_domain(label, p, c) == in_domain(mirror(label), p.mirrored(), c));
            }
            if (l != DomainLabel::Unclassified) CHECK(m != DomainLabel::Unclassified);
        }
    }
}

TEST_CASE("label strings round-trip") {
    for (DomainLabel label : kDomainPrecedence) {
        const auto parsed = parse_domain_label(to_string(label));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == label);
        CHECK(mirror(mirror(label)) == label);
    }
    CHECK_FALSE(parse_domain_label("Magenta").has_value());
}

TEST_CASE("classify_yellow documented points") {
    const auto c = AnalysisConstants::make(4096, 0.1, 3.0);
    CHECK(classify_yellow({0.5, 0.5}, c) == YellowLabel::A1);
    CHECK(classify_yellow({0.52, 0.53}, c) == YellowLabel::B1);
    CHECK(classify_yellow({0.45, 0.47}, c) == YellowLabel::C1);
    CHECK(classify_yellow({0.48, 0.47}, c) == YellowLabel::B0);
    CHECK(classify_yellow({0.05, 0.5}, c) == YellowLabel::OutsideYellowPrime);
    CHECK(classify_yellow({0.5, 0.95}, c) == YellowLabel::OutsideYellowPrime);
}

TEST_CASE("Yellow sits inside Yellow' and A/B/C only inside the box") {
    for (int n : {64, 128, 300}) {
        for (double delta : {0.02, 0.05, 0.1}) {
            const auto c = AnalysisConstants::make(n, delta, 3.0);
            for (int a = 0; a <= n; ++a) {
                for (int b = 0; b <= n; ++b) {
                    const GridPoint p = GridPoint::from_counts(a, b, n);
                    if (in_domain(DomainLabel::Yellow, p, c)) CHECK(in_yellow_prime(p, c));
                    const YellowLabel y = classify_yellow(p, c);
                    CHECK((y == YellowLabel::OutsideYellowPrime) == !in_yellow_prime(p, c));
                }
            }
        }
    }
}

TEST_CASE("audit_partition small and documented sizes") {
    const auto a8 = audit_partition(8, AnalysisConstants::make(8, 0.05, 3.0));
    CHECK(a8.total_points == 81);

    const auto c64 = AnalysisConstants::make(64, 0.05, 3.0);
    const auto a64 = audit_partition(64, c64);
    CHECK(a64.total_points == 65 * 65);
    CHECK(a64.mirror_coverage_mismatches == 0);
    CHECK(a64.yellow_outside_prime == 0);
    std::int64_t labelled = 0;
    for (auto v : a64.label_counts) labelled += v;
    CHECK(labelled == a64.total_points);
    CHECK(static_cast<std::int64_t>(a64.uncovered.size()) ==
          a64.label_counts[static_cast<std::size_t>(DomainLabel::Unclassified)]);
    CHECK(a64.covered_once + static_cast<std::int64_t>(a64.uncovered.size() + a64.overlapping.size()) ==
          a64.total_points);
    // (1, 1) must be covered.
    CHECK(classify(GridPoint{1.0, 1.0}, c64) != DomainLabel::Unclassified);

    CHECK_THROWS_AS(audit_partition(2, c64), UsageError);
}
