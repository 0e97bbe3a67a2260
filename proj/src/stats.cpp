#include "fet/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fet/errors.hpp"

namespace fet {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw DomainError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0,1]");
    std::sort(xs.begin(), xs.end());
    const double h = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit needs >= 2 paired points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("linear_fit needs spread in x");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.slope * x[i]);
            ss_res += r * r;
        }
        fit.r2 = 1.0 - ss_res / syy;
    }
    return fit;
}

double tv_distance(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    const std::size_t size = std::max(a.size(), b.size());
    double ta = 0.0, tb = 0.0;
    for (auto v : a) ta += static_cast<double>(v);
    for (auto v : b) tb += static_cast<double>(v);
    if (ta == 0.0 || tb == 0.0) throw DomainError("tv_distance of an empty histogram");
    double tv = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double pa = i < a.size() ? static_cast<double>(a[i]) / ta : 0.0;
        const double pb = i < b.size() ? static_cast<double>(b[i]) / tb : 0.0;
        tv += std::abs(pa - pb);
    }
    return 0.5 * tv;
}

}  // namespace fet
