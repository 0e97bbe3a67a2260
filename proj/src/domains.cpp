#include "fet/domains.hpp"

#include <cmath>

#include "fet/errors.hpp"

namespace fet {

namespace {

constexpr double kEps = 1e-12;

bool le(double a, double b) { return a <= b + kEps; }
bool lt(double a, double b) { return a < b - kEps; }

bool green1(double x, double y, const AnalysisConstants& c) { return le(x + c.delta, y); }

bool purple1(double x, double y, const AnalysisConstants& c) {
    return le(1.0 / c.log_n, x) && lt(x, 0.5 - 3.0 * c.delta) && le((1.0 - c.lambda_n) * x, y) &&
           lt(y, x + c.delta);
}

bool red1(double x, double y, const AnalysisConstants& c) {
    return le(1.0 / c.log_n, y) && lt(x, 0.5 - 3.0 * c.delta) && le(x - c.delta, y) &&
           lt(y, (1.0 - c.lambda_n) * x);
}

bool cyan1(double x, double y, const AnalysisConstants& c) {
    const double lowest = std::min(x, y);
    return le(0.0, lowest) && lt(lowest, 1.0 / c.log_n) && lt(x - c.delta, y) &&
           lt(y, x + c.delta);
}

bool yellow(double x, double y, const AnalysisConstants& c) {
    return le(0.5 - 3.0 * c.delta, x) && le(x, 0.5 + 3.0 * c.delta) &&
           le(0.5 - 4.0 * c.delta, y) && le(y, 0.5 + 4.0 * c.delta) &&
           lt(std::abs(y - x), c.delta);
}

bool a1(double x, double y) { return le(0.5, y) && le(x - 0.5, y - x); }
bool b1(double x, double y) { return le(x, y) && lt(y - x, x - 0.5); }
bool c1(double x, double y) { return lt(y, 0.5) && le(x, y); }

}  // namespace

std::string_view to_string(DomainLabel label) {
    switch (label) {
        case DomainLabel::Green1: return "Green1";
        case DomainLabel::Green0: return "Green0";
        case DomainLabel::Purple1: return "Purple1";
        case DomainLabel::Purple0: return "Purple0";
        case DomainLabel::Red1: return "Red1";
        case DomainLabel::Red0: return "Red0";
        case DomainLabel::Cyan1: return "Cyan1";
        case DomainLabel::Cyan0: return "Cyan0";
        case DomainLabel::Yellow: return "Yellow";
        case DomainLabel::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

std::string_view to_string(YellowLabel label) {
    switch (label) {
        case YellowLabel::A1: return "A1";
        case YellowLabel::A0: return "A0";
        case YellowLabel::B1: return "B1";
        case YellowLabel::B0: return "B0";
        case YellowLabel::C1: return "C1";
        case YellowLabel::C0: return "C0";
        case YellowLabel::OutsideYellowPrime: return "OutsideYellowPrime";
    }
    return "OutsideYellowPrime";
}

std::optional<DomainLabel> parse_domain_label(std::string_view text) {
    for (DomainLabel label : kDomainPrecedence) {
        if (to_string(label) == text) return label;
    }
    if (text == "Unclassified") return DomainLabel::Unclassified;
    return std::nullopt;
}

DomainLabel mirror(DomainLabel label) {
    switch (label) {
        case DomainLabel::Green1: return DomainLabel::Green0;
        case DomainLabel::Green0: return DomainLabel::Green1;
        case DomainLabel::Purple1: return DomainLabel::Purple0;
        case DomainLabel::Purple0: return DomainLabel::Purple1;
        case DomainLabel::Red1: return DomainLabel::Red0;
        case DomainLabel::Red0: return DomainLabel::Red1;
        case DomainLabel::Cyan1: return DomainLabel::Cyan0;
        case DomainLabel::Cyan0: return DomainLabel::Cyan1;
        default: return label;
    }
}

YellowLabel mirror(YellowLabel label) {
    switch (label) {
        case YellowLabel::A1: return YellowLabel::A0;
        case YellowLabel::A0: return YellowLabel::A1;
        case YellowLabel::B1: return YellowLabel::B0;
        case YellowLabel::B0: return YellowLabel::B1;
        case YellowLabel::C1: return YellowLabel::C0;
        case YellowLabel::C0: return YellowLabel::C1;
        default: return label;
    }
}

bool in_domain(DomainLabel label, const GridPoint& p, const AnalysisConstants& c) {
    const GridPoint m = p.mirrored();
    switch (label) {
        case DomainLabel::Green1: return green1(p.x_t, p.x_t1, c);
        case DomainLabel::Green0: return green1(m.x_t, m.x_t1, c);
        case DomainLabel::Purple1: return purple1(p.x_t, p.x_t1, c);
        case DomainLabel::Purple0: return purple1(m.x_t, m.x_t1, c);
        case DomainLabel::Red1: return red1(p.x_t, p.x_t1, c);
        case DomainLabel::Red0: return red1(m.x_t, m.x_t1, c);
        case DomainLabel::Cyan1: return cyan1(p.x_t, p.x_t1, c);
        case DomainLabel::Cyan0: return cyan1(m.x_t, m.x_t1, c);
        case DomainLabel::Yellow: return yellow(p.x_t, p.x_t1, c);
        case DomainLabel::Unclassified: return false;
    }
    return false;
}

bool in_yellow_prime(const GridPoint& p, const AnalysisConstants& c) {
    const double lo = 0.5 - 4.0 * c.delta;
    const double hi = 0.5 + 4.0 * c.delta;
    return le(lo, p.x_t) && le(p.x_t, hi) && le(lo, p.x_t1) && le(p.x_t1, hi);
}

DomainLabel classify(const GridPoint& point, const AnalysisConstants& constants) {
    for (DomainLabel label : kDomainPrecedence) {
        if (in_domain(label, point, constants)) return label;
    }
    return DomainLabel::Unclassified;
}

DomainLabel classify(const GridPoint& point, int n, double delta, double c_sample) {
    return classify(point, AnalysisConstants::make(n, delta, c_sample));
}

YellowLabel classify_yellow(const GridPoint& p, const AnalysisConstants& c) {
    if (!in_yellow_prime(p, c)) return YellowLabel::OutsideYellowPrime;
    const GridPoint m = p.mirrored();
    if (a1(p.x_t, p.x_t1)) return YellowLabel::A1;
    if (b1(p.x_t, p.x_t1)) return YellowLabel::B1;
    if (c1(p.x_t, p.x_t1)) return YellowLabel::C1;
    if (a1(m.x_t, m.x_t1)) return YellowLabel::A0;
    if (b1(m.x_t, m.x_t1)) return YellowLabel::B0;
    if (c1(m.x_t, m.x_t1)) return YellowLabel::C0;
    // Unreachable for points in the box: the 1-variants cover x_t1 >= x_t.
    return YellowLabel::OutsideYellowPrime;
}

PartitionAudit audit_partition(int n, const AnalysisConstants& constants) {
    if (n < 3 || n > 4096) throw UsageError("audit_partition supports 3 <= n <= 4096");
    PartitionAudit audit;
    audit.n = n;
    audit.constants = constants;

    std::vector<std::uint8_t> uncovered_flag(static_cast<std::size_t>(n + 1) * (n + 1), 0);
    for (std::int64_t kt = 0; kt <= n; ++kt) {
        for (std::int64_t kt1 = 0; kt1 <= n; ++kt1) {
            const GridPoint point = GridPoint::from_counts(kt, kt1, n);
            AuditPoint record{kt, kt1, {}};
            for (DomainLabel label : kDomainPrecedence) {
                if (in_domain(label, point, constants)) record.matches.push_back(label);
            }
            ++audit.total_points;
            const DomainLabel label =
                record.matches.empty() ? DomainLabel::Unclassified : record.matches.front();
            ++audit.label_counts[static_cast<std::size_t>(label)];
            ++audit.yellow_counts[static_cast<std::size_t>(classify_yellow(point, constants))];
            if (label == DomainLabel::Yellow && !in_yellow_prime(point, constants)) {
                ++audit.yellow_outside_prime;
            }
            if (record.matches.empty()) {
                uncovered_flag[kt * (n + 1) + kt1] = 1;
                audit.uncovered.push_back(std::move(record));
            } else if (record.matches.size() > 1) {
                audit.overlapping.push_back(std::move(record));
            } else {
                ++audit.covered_once;
            }
        }
    }
    for (std::int64_t kt = 0; kt <= n; ++kt) {
        for (std::int64_t kt1 = 0; kt1 <= n; ++kt1) {
            if (uncovered_flag[kt * (n + 1) + kt1] != uncovered_flag[(n - kt) * (n + 1) + (n - kt1)]) {
                ++audit.mirror_coverage_mismatches;
            }
        }
    }
    return audit;
}

}  // namespace fet
