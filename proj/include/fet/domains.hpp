#pragma once

// Partition of the pair grid into Green/Purple/Red/Cyan/Yellow domains, the
// Yellow' box with its A/B/C split, and an exhaustive coverage audit.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fet/dynamics.hpp"
#include "fet/grid.hpp"

namespace fet {

enum class DomainLabel : std::uint8_t {
    Green1,
    Green0,
    Purple1,
    Purple0,
    Red1,
    Red0,
    Cyan1,
    Cyan0,
    Yellow,
    Unclassified,
};

enum class YellowLabel : std::uint8_t { A1, A0, B1, B0, C1, C0, OutsideYellowPrime };

inline constexpr std::array<DomainLabel, 9> kDomainPrecedence = {
    DomainLabel::Green1, DomainLabel::Green0, DomainLabel::Purple1,
    DomainLabel::Purple0, DomainLabel::Red1,  DomainLabel::Red0,
    DomainLabel::Cyan1,  DomainLabel::Cyan0,  DomainLabel::Yellow,
};

std::string_view to_string(DomainLabel label);
std::string_view to_string(YellowLabel label);
std::optional<DomainLabel> parse_domain_label(std::string_view text);

// The label of the reflected point: Green1 <-> Green0, ..., Yellow and Unclassified fixed.
DomainLabel mirror(DomainLabel label);
YellowLabel mirror(YellowLabel label);

// Raw set membership, no precedence. Boundaries follow the definitions literally
// (strict vs non-strict); comparisons absorb 1e-12 of floating-point noise so that
// rational grid points land on the side their exact value dictates.
bool in_domain(DomainLabel label, const GridPoint& point, const AnalysisConstants& constants);
bool in_yellow_prime(const GridPoint& point, const AnalysisConstants& constants);

// First matching definition under Green -> Purple -> Red -> Cyan -> Yellow (1 before 0).
DomainLabel classify(const GridPoint& point, const AnalysisConstants& constants);
// Convenience overload building the constants from (n, delta, c_sample).
DomainLabel classify(const GridPoint& point, int n, double delta, double c_sample = 3.0);

YellowLabel classify_yellow(const GridPoint& point, const AnalysisConstants& constants);

struct AuditPoint {
    std::int64_t k_t = 0;
    std::int64_t k_t1 = 0;
    std::vector<DomainLabel> matches;
};

struct PartitionAudit {
    int n = 0;
    AnalysisConstants constants;
    std::int64_t total_points = 0;
    std::int64_t covered_once = 0;
    std::vector<AuditPoint> uncovered;
    std::vector<AuditPoint> overlapping;
    std::array<std::int64_t, 10> label_counts{};   // by DomainLabel after precedence
    std::array<std::int64_t, 7> yellow_counts{};   // by YellowLabel
    std::int64_t yellow_outside_prime = 0;          // Yellow-labelled points outside Yellow'
    std::int64_t mirror_coverage_mismatches = 0;    // P uncovered xor mirror(P) uncovered
};

// Enumerates all (n+1)^2 grid points (n <= 4096).
PartitionAudit audit_partition(int n, const AnalysisConstants& constants);

// Reading of the Yellow definition used by the classifier.
inline constexpr std::string_view kYellowReading =
    "Yellow: 1/2 - 3 delta <= x_t <= 1/2 + 3 delta, 1/2 - 4 delta <= x_t1 <= 1/2 + 4 delta, "
    "|x_t1 - x_t| < delta";

}  // namespace fet
