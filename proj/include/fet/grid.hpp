#pragma once

#include <cmath>
#include <cstdint>

namespace fet {

// A pair (x_t, x_{t+1}) of opinion-1 fractions. Points produced by simulation sit
// on the grid {0, 1/n, ..., 1}^2; analysis code may pass arbitrary reals.
struct GridPoint {
    double x_t = 0.0;
    double x_t1 = 0.0;

    static GridPoint from_counts(std::int64_t k_t, std::int64_t k_t1, std::int64_t n) {
        return {static_cast<double>(k_t) / static_cast<double>(n),
                static_cast<double>(k_t1) / static_cast<double>(n)};
    }

    // Point reflection through (1/2, 1/2).
    GridPoint mirrored() const { return {1.0 - x_t, 1.0 - x_t1}; }

    bool on_grid(std::int64_t n, double tol = 1e-12) const {
        const auto near_multiple = [&](double v) {
            const double scaled = v * static_cast<double>(n);
            return v >= -tol && v <= 1.0 + tol && std::abs(scaled - std::round(scaled)) <= tol * n;
        };
        return near_multiple(x_t) && near_multiple(x_t1);
    }

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

}  // namespace fet
