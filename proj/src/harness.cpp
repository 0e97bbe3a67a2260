#include "fet/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fet/domains.hpp"
#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/parallel.hpp"
#include "fet/stats.hpp"

namespace fet {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seed of an independent experiment inside a report, keyed by a stable name.
std::uint64_t sub_seed(std::uint64_t seed, const std::string& key) {
    return splitmix64(seed ^ fnv1a(key));
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SimConfig lemma_config(const LemmaParams& p) {
    SimConfig cfg;
    cfg.n = p.n;
    cfg.ell = p.resolved_ell();
    cfg.delta = p.delta;
    cfg.c_sample = p.c_sample;
    cfg.max_rounds = p.max_rounds;
    cfg.backend = Backend::Aggregate;
    cfg.seed = p.seed;
    cfg.validate();
    return cfg;
}

nlohmann::json params_json(const LemmaParams& p) {
    return {{"n", p.n},         {"ell", p.resolved_ell()}, {"delta", p.delta},
            {"c_sample", p.c_sample}, {"trials", p.trials}, {"seed", p.seed},
            {"epsilon", p.epsilon}, {"max_rounds", p.max_rounds}};
}

nlohmann::json params_json(const SweepParams& p) {
    return {{"n_list", p.n_list},   {"c_sample", p.c_sample}, {"delta", p.delta},
            {"trials", p.trials},   {"seed", p.seed},         {"presets", p.presets},
            {"max_rounds", p.max_rounds}, {"min_converged_fraction", p.min_converged_fraction},
            {"min_r2", p.min_r2},   {"max_exponent", p.max_exponent}};
}

// Classifier guard on planted states: a mismatch means the requested domain is
// empty or shifted at these (n, delta), and the run must not proceed.
void require_label(std::int64_t k_t, std::int64_t k_t1, int n, const AnalysisConstants& c,
                   DomainLabel expected) {
    const DomainLabel got = classify(GridPoint::from_counts(k_t, k_t1, n), c);
    if (got != expected) {
        throw UsageError("planted point (" + std::to_string(k_t) + "/" + std::to_string(n) + ", " +
                         std::to_string(k_t1) + "/" + std::to_string(n) + ") classifies as " +
                         std::string(to_string(got)) + ", expected " + std::string(to_string(expected)));
    }
}

std::int64_t to_count(double x, int n) { return std::llround(x * static_cast<double>(n)); }

PointResult make_point(DomainLabel label, std::int64_t k_t, std::int64_t k_t1, int n, bool gating) {
    PointResult r;
    r.label = std::string(to_string(label));
    r.k_t = k_t;
    r.k_t1 = k_t1;
    r.point_x = static_cast<double>(k_t) / n;
    r.point_y = static_cast<double>(k_t1) / n;
    r.gating = gating;
    return r;
}

void finish_point(PointResult& r) {
    const double fraction = r.trials > 0 ? static_cast<double>(r.failures) / r.trials : 0.0;
    const bool ok = fraction <= r.allowed_fraction;
    r.verdict = r.gating ? (ok ? "PASS" : "FAIL") : "INFO";
    r.detail["failure_fraction"] = fraction;
    r.detail["within_threshold"] = ok;
}

double empirical_exponent(std::int64_t failures, std::int64_t trials, int n) {
    if (failures == 0 || trials == 0) return INFINITY;
    return -std::log(static_cast<double>(failures) / trials) / std::log(static_cast<double>(n));
}

bool gating_points_pass(const std::vector<PointResult>& points) {
    for (const PointResult& p : points) {
        if (p.gating && p.verdict != "PASS") return false;
    }
    return true;
}

bool all_checks_pass(const std::vector<CheckResult>& checks) {
    for (const CheckResult& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

// One aggregate round from a planted pair per trial; failure decided on k_{t+2}.
template <typename Fails>
void run_one_step_point(PointResult& point, const SimConfig& base, std::int64_t trials,
                        const std::string& key, Fails fails) {
    SimConfig cfg = base;
    cfg.seed = sub_seed(base.seed, key);
    std::vector<char> failed(static_cast<std::size_t>(trials), 0);
    std::vector<std::int64_t> next(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, [&](std::int64_t i) {
        Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(i), 0, kAggregateAgent);
        next[i] = step_aggregate_counts(point.k_t, point.k_t1, cfg, rng);
        failed[i] = fails(next[i]) ? 1 : 0;
    });
    point.trials = trials;
    point.failures = 0;
    for (char f : failed) point.failures += f;
    double sum = 0.0;
    for (std::int64_t v : next) sum += static_cast<double>(v);
    point.detail["mean_next_fraction"] = sum / static_cast<double>(trials) / cfg.n;
    point.detail["expected_next_fraction"] =
        expected_next_fraction(point.point_x, point.point_y, cfg.n, cfg.ell);
}

}  // namespace

int LemmaParams::resolved_ell() const { return ell > 0 ? ell : sample_size(n, c_sample); }

double whp_allowed_fraction(int n, double epsilon, std::int64_t trials) {
    const double thr = std::pow(static_cast<double>(n), -epsilon);
    const double sigma = trials > 0 ? std::sqrt(thr * (1.0 - thr) / static_cast<double>(trials)) : 0.0;
    return thr + 3.0 * sigma;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

// ---------------------------------------------------------------- green

LemmaReport verify_green(const LemmaParams& params) {
    const auto start = Clock::now();
    LemmaReport report;
    report.lemma = "green";
    report.params = params_json(params);
    const SimConfig cfg = lemma_config(params);
    const int n = cfg.n;
    const int need = static_cast<int>(std::ceil(2.0 / (params.delta * params.delta) * std::log(n)));
    if (cfg.ell < need) {
        throw DomainError("verify_green needs ell >= ceil((2/delta^2) ln n) = " + std::to_string(need) +
                          ", got " + std::to_string(cfg.ell));
    }
    report.params["ell_required"] = need;
    const auto constants = AnalysisConstants::make(n, params.delta, params.c_sample);
    const double allowed = whp_allowed_fraction(n, params.epsilon, params.trials);

    const std::vector<std::pair<double, double>> seeds{
        {0.0, 1.0}, {0.1, 0.35}, {0.2, 0.5}, {0.4, 0.65}, {0.6, 0.85}};
    for (const auto& [x, y] : seeds) {
        const std::int64_t k_t = to_count(x, n);
        const std::int64_t k_t1 = to_count(y, n);
        require_label(k_t, k_t1, n, constants, DomainLabel::Green1);
        PointResult p = make_point(DomainLabel::Green1, k_t, k_t1, n, true);
        p.allowed_fraction = allowed;
        p.note = "failure: some non-source agent does not hold 1 after one round";
        run_one_step_point(p, cfg, params.trials, "green1/" + std::to_string(k_t) + "/" + std::to_string(k_t1),
                           [n](std::int64_t next) { return next != n; });
        p.detail["empirical_exponent"] = empirical_exponent(p.failures, p.trials, n);
        finish_point(p);
        report.points.push_back(p);

        // Mirror; the source still holds 1, so it needs n - k_t1 >= 1.
        if (n - k_t1 >= 1) {
            const std::int64_t m_t = n - k_t, m_t1 = n - k_t1;
            require_label(m_t, m_t1, n, constants, DomainLabel::Green0);
            PointResult q = make_point(DomainLabel::Green0, m_t, m_t1, n, true);
            q.allowed_fraction = allowed;
            q.note = "failure: some non-source agent does not hold 0 after one round";
            run_one_step_point(q, cfg, params.trials, "green0/" + std::to_string(m_t) + "/" + std::to_string(m_t1),
                               [](std::int64_t next) { return next != 1; });
            q.detail["empirical_exponent"] = empirical_exponent(q.failures, q.trials, n);
            finish_point(q);
            report.points.push_back(q);
        }
    }
    report.pass = gating_points_pass(report.points);
    report.runtime_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------- purple

LemmaReport verify_purple(const LemmaParams& params) {
    const auto start = Clock::now();
    LemmaReport report;
    report.lemma = "purple";
    report.params = params_json(params);
    const SimConfig cfg = lemma_config(params);
    const int n = cfg.n;
    const auto constants = AnalysisConstants::make(n, params.delta, params.c_sample);
    const double allowed = whp_allowed_fraction(n, params.epsilon, params.trials);
    const double delta = params.delta;
    report.params["lambda_n"] = constants.lambda_n;
    report.params["inv_log_n"] = 1.0 / constants.log_n;

    struct Candidate {
        std::int64_t k_t, k_t1;
        bool gating;
        bool mirror;
        std::string note;
    };
    std::vector<Candidate> candidates;
    candidates.push_back({to_count(0.1, n), to_count(0.1 + delta / 2.0, n), true, true,
                          "documented point (0.1, 0.1 + delta/2)"});
    const auto boundary = static_cast<std::int64_t>(std::ceil(n / constants.log_n - 1e-9));
    candidates.push_back({boundary, boundary + to_count(delta / 2.0, n), true, true,
                          "boundary x_t = 1/ln n"});
    // Exploration rows: stationary and downward-drifting Purple points.
    const std::int64_t k02 = to_count(0.2, n);
    candidates.push_back({k02, k02, false, false, "zero speed"});
    // Lowest y still labelled Purple1: (1 - lambda_n) x, or just above x - delta where
    // Green0 overlaps the band and wins by precedence.
    auto edge = static_cast<std::int64_t>(std::ceil((1.0 - constants.lambda_n) * k02 - 1e-9));
    while (edge < k02 && classify(GridPoint::from_counts(k02, edge, n), constants) != DomainLabel::Purple1) ++edge;
    candidates.push_back({k02, edge, false, false, "lowest Purple1 y at x_t = 0.2"});
    candidates.push_back({to_count(0.3, n), to_count(0.3 + delta / 2.0, n), false, false,
                          "upper x range"});

    for (const Candidate& c : candidates) {
        require_label(c.k_t, c.k_t1, n, constants, DomainLabel::Purple1);
        PointResult p = make_point(DomainLabel::Purple1, c.k_t, c.k_t1, n, c.gating);
        p.allowed_fraction = allowed;
        p.note = c.note + "; failure: (x_t+1, x_t+2) not in Green1";
        run_one_step_point(p, cfg, params.trials,
                           "purple1/" + std::to_string(c.k_t) + "/" + std::to_string(c.k_t1),
                           [&, k_t1 = c.k_t1](std::int64_t next) {
                               return classify(GridPoint::from_counts(k_t1, next, n), constants) !=
                                      DomainLabel::Green1;
                           });
        p.detail["empirical_exponent"] = empirical_exponent(p.failures, p.trials, n);
        finish_point(p);
        report.points.push_back(p);
        if (!c.mirror) continue;
        const std::int64_t m_t = n - c.k_t, m_t1 = n - c.k_t1;
        require_label(m_t, m_t1, n, constants, DomainLabel::Purple0);
        PointResult q = make_point(DomainLabel::Purple0, m_t, m_t1, n, c.gating);
        q.allowed_fraction = allowed;
        q.note = "mirror of " + c.note + "; failure: (x_t+1, x_t+2) not in Green0";
        run_one_step_point(q, cfg, params.trials, "purple0/" + std::to_string(m_t) + "/" + std::to_string(m_t1),
                           [&, m_t1](std::int64_t next) {
                               return classify(GridPoint::from_counts(m_t1, next, n), constants) !=
                                      DomainLabel::Green0;
                           });
        q.detail["empirical_exponent"] = empirical_exponent(q.failures, q.trials, n);
        finish_point(q);
        report.points.push_back(q);
    }
    report.pass = gating_points_pass(report.points);
    report.runtime_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------- red

std::vector<std::pair<std::int64_t, std::int64_t>> red1_grid_points(int n, double delta, double c_sample) {
    const auto constants = AnalysisConstants::make(n, delta, c_sample);
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    const auto x_max = static_cast<std::int64_t>(std::ceil((0.5 - 3.0 * delta) * n)) + 1;
    for (std::int64_t k_t = 0; k_t <= std::min<std::int64_t>(x_max, n); ++k_t) {
        for (std::int64_t k_t1 = 1; k_t1 <= k_t; ++k_t1) {
            if (classify(GridPoint::from_counts(k_t, k_t1, n), constants) == DomainLabel::Red1) {
                out.emplace_back(k_t, k_t1);
            }
        }
    }
    return out;
}

LemmaReport verify_red(const LemmaParams& params) {
    const auto start = Clock::now();
    LemmaReport report;
    report.lemma = "red";
    report.params = params_json(params);
    const SimConfig base = lemma_config(params);
    const int n = base.n;
    const auto constants = AnalysisConstants::make(n, params.delta, params.c_sample);
    const double bound = std::pow(constants.log_n, 0.5 + 2.0 * params.delta);
    report.params["exit_bound_rounds"] = bound;
    report.params["lambda_n"] = constants.lambda_n;

    const auto grid = red1_grid_points(n, params.delta, params.c_sample);
    report.extra["red1_grid_points"] = grid.size();
    if (grid.empty()) {
        throw UsageError("Red1 is empty at n = " + std::to_string(n) + ", delta = " +
                         format_number(params.delta) + "; choose a larger delta or n");
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> chosen;
    const int want = std::max(1, params.red_points);
    for (int i = 0; i < want; ++i) {
        const std::size_t idx =
            want == 1 ? 0 : static_cast<std::size_t>(i) * (grid.size() - 1) / static_cast<std::size_t>(want - 1);
        if (chosen.empty() || chosen.back() != grid[idx]) chosen.push_back(grid[idx]);
    }

    const auto run_from = [&](DomainLabel start_label, std::int64_t k_t, std::int64_t k_t1) {
        require_label(k_t, k_t1, n, constants, start_label);
        PointResult p = make_point(start_label, k_t, k_t1, n, true);
        p.allowed_fraction = 0.0;  // every exit must be fast and land outside Yellow and Red
        p.note = "failure: exit takes >= ln^(1/2+2 delta) n rounds or lands in Yellow or Red";
        SimConfig cfg = base;
        cfg.seed = sub_seed(base.seed, std::string(to_string(start_label)) + "/" + std::to_string(k_t) + "/" +
                                           std::to_string(k_t1));
        const std::int64_t trials = params.trials;
        std::vector<std::int64_t> exit_steps(static_cast<std::size_t>(trials), 0);
        std::vector<DomainLabel> exit_label(static_cast<std::size_t>(trials), DomainLabel::Unclassified);
        parallel_for(trials, [&](std::int64_t i) {
            Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(i), 0, kAggregateAgent);
            std::int64_t a = k_t, b = k_t1, steps = 0;
            DomainLabel label = start_label;
            while (label == start_label && steps < cfg.max_rounds) {
                const std::int64_t c = step_aggregate_counts(a, b, cfg, rng);
                a = b;
                b = c;
                ++steps;
                label = classify(GridPoint::from_counts(a, b, n), constants);
            }
            exit_steps[i] = steps;
            exit_label[i] = label;
        });
        std::map<std::string, std::int64_t> tally;
        std::int64_t slow = 0, bad_target = 0, max_steps = 0;
        for (std::int64_t i = 0; i < trials; ++i) {
            const DomainLabel l = exit_label[i];
            ++tally[std::string(to_string(l))];
            const bool is_slow = static_cast<double>(exit_steps[i]) >= bound || l == start_label;
            const bool is_bad = l == DomainLabel::Yellow || l == DomainLabel::Red1 || l == DomainLabel::Red0;
            slow += is_slow;
            bad_target += is_bad;
            if (is_slow || is_bad) ++p.failures;
            max_steps = std::max(max_steps, exit_steps[i]);
        }
        p.trials = trials;
        p.detail["exit_targets"] = tally;
        p.detail["slow_exits"] = slow;
        p.detail["exits_into_yellow_or_red"] = bad_target;
        p.detail["max_exit_rounds"] = max_steps;
        finish_point(p);
        report.points.push_back(p);
        return bad_target;
    };

    std::int64_t total_bad_target = 0;
    for (const auto& [k_t, k_t1] : chosen) {
        total_bad_target += run_from(DomainLabel::Red1, k_t, k_t1);
        total_bad_target += run_from(DomainLabel::Red0, n - k_t, n - k_t1);
    }
    report.checks.push_back({"red_exit_never_in_yellow_or_red", total_bad_target == 0,
                             std::to_string(total_bad_target) + " exits into Yellow or Red"});
    report.pass = gating_points_pass(report.points) && all_checks_pass(report.checks);
    report.runtime_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------- cyan

namespace {

nlohmann::json cyan_expectation_json(const CyanExpectationCheck& a) {
    return {{"points_checked", a.checked},
            {"violations", a.violations},
            {"min_margin", a.min_margin},
            {"min_margin_at", {a.worst_k_t, a.worst_k_t1}}};
}

}  // namespace

CyanExpectationCheck cyan_expectation_check(int n, int ell, const AnalysisConstants& c) {
    CyanExpectationCheck out;
    out.min_margin = INFINITY;
    const auto y_max = static_cast<std::int64_t>(std::floor(static_cast<double>(n) / ell + 1e-9));
    for (std::int64_t k_t = 0; k_t <= n; ++k_t) {
        for (std::int64_t k_t1 = 1; k_t1 <= y_max; ++k_t1) {
            const GridPoint p = GridPoint::from_counts(k_t, k_t1, n);
            if (classify(p, c) != DomainLabel::Cyan1) continue;
            ++out.checked;
            const double lhs = expected_next_fraction(p.x_t, p.x_t1, n, ell);
            const double rhs = c.K * p.x_t1 * c.log_n - 1.0 / n;
            const double margin = lhs - rhs;
            if (margin < out.min_margin) {
                out.min_margin = margin;
                out.worst_k_t = k_t;
                out.worst_k_t1 = k_t1;
            }
            if (margin < 0.0) ++out.violations;
        }
    }
    return out;
}

LemmaReport verify_cyan(const LemmaParams& params) {
    const auto start = Clock::now();
    LemmaReport report;
    report.lemma = "cyan";
    report.params = params_json(params);
    SimConfig cfg = lemma_config(params);
    const int n = cfg.n;
    const auto constants = AnalysisConstants::make(n, params.delta, params.c_sample);
    const double bound = constants.log_n / std::log(constants.log_n);
    report.params["exit_bound_rounds"] = bound;
    report.params["K"] = constants.K;
    report.params["gamma"] = constants.gamma;

    // (i) simulation from the cyan corner.
    cfg.seed = sub_seed(params.seed, "cyan/corner");
    const Preset corner = Preset::parse("cyan_corner");
    const std::int64_t trials = params.trials;
    struct Outcome {
        bool has_start = false, exited = false, converged = false, visited_gp = false;
        std::int64_t exit_rounds = 0;
        DomainLabel exit_label = DomainLabel::Unclassified;
        std::int64_t x0 = 0, x1 = 0;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](std::int64_t i) {
        const InitialCondition init = init_adversarial(corner, cfg, static_cast<std::uint64_t>(i));
        const Trajectory traj = run_trial(cfg, init, static_cast<std::uint64_t>(i));
        Outcome o;
        o.converged = traj.converged_round.has_value();
        o.x0 = traj.ones[0];
        o.x1 = traj.ones.size() > 1 ? traj.ones[1] : -1;
        std::size_t t0 = traj.rows.size();
        for (std::size_t t = 0; t < traj.rows.size(); ++t) {
            if (traj.rows[t].domain == DomainLabel::Cyan1) {
                t0 = t;
                break;
            }
        }
        if (t0 < traj.rows.size()) {
            o.has_start = true;
            for (std::size_t t = t0 + 1; t < traj.rows.size(); ++t) {
                if (traj.rows[t].domain != DomainLabel::Cyan1) {
                    o.exited = true;
                    o.exit_rounds = static_cast<std::int64_t>(t - t0);
                    o.exit_label = traj.rows[t].domain;
                    break;
                }
            }
        }
        for (const TrajectoryRow& row : traj.rows) {
            if (row.domain == DomainLabel::Green1 || row.domain == DomainLabel::Purple1) o.visited_gp = true;
        }
        outcomes[i] = o;
    });

    PointResult sim = make_point(DomainLabel::Cyan1, 1, 1, n, true);
    sim.allowed_fraction = whp_allowed_fraction(n, params.epsilon, trials);
    sim.note = "cyan_corner start; failure: no exit within ln n / ln ln n rounds into Green1 or Purple1";
    std::map<std::string, std::int64_t> tally;
    std::int64_t converged = 0, gp_exit_converged = 0, visited_gp_converged = 0, max_exit = 0,
                 off_corner_start = 0;
    for (const Outcome& o : outcomes) {
        const bool gp = o.exit_label == DomainLabel::Green1 || o.exit_label == DomainLabel::Purple1;
        const bool ok = o.has_start && o.exited && static_cast<double>(o.exit_rounds) < bound && gp;
        if (!ok) ++sim.failures;
        if (o.x0 != 1 || o.x1 != 1) ++off_corner_start;
        ++tally[o.exited ? std::string(to_string(o.exit_label)) : "none"];
        max_exit = std::max(max_exit, o.exit_rounds);
        if (o.converged) {
            ++converged;
            gp_exit_converged += gp;
            visited_gp_converged += o.visited_gp;
        }
    }
    sim.trials = trials;
    sim.detail["exit_targets"] = tally;
    sim.detail["max_exit_rounds"] = max_exit;
    sim.detail["starts_not_at_corner"] = off_corner_start;
    sim.detail["empirical_exponent"] = empirical_exponent(sim.failures, trials, n);
    finish_point(sim);
    report.points.push_back(sim);

    const double gp_fraction = converged > 0 ? static_cast<double>(gp_exit_converged) / converged : 0.0;
    const double visit_fraction = converged > 0 ? static_cast<double>(visited_gp_converged) / converged : 0.0;
    report.checks.push_back({"cyan_exit_into_green1_or_purple1_ge_99pct_of_converging", gp_fraction >= 0.99,
                             std::to_string(gp_exit_converged) + " of " + std::to_string(converged) +
                                 " converging trials exit into Green1/Purple1"});
    report.checks.push_back({"visits_green1_or_purple1_before_consensus_ge_95pct", visit_fraction >= 0.95,
                             std::to_string(visited_gp_converged) + " of " + std::to_string(converged) +
                                 " converging trials visit Green1/Purple1"});

    // (ii) analytic expectation step.
    const CyanExpectationCheck analytic = cyan_expectation_check(n, cfg.ell, constants);
    report.extra["expectation_check"] = cyan_expectation_json(analytic);
    report.checks.push_back({"expectation_ge_K_y_log_n_minus_1_over_n", analytic.violations == 0,
                             std::to_string(analytic.violations) + " violations over " +
                                 std::to_string(analytic.checked) + " Cyan1 points"});

    // (iii) the large-x_t+1 branch: y just above gamma, expect x_t+2 > 1/2. Only
    // informative at desk scale, where gamma < 1/ln n.
    const auto k_gamma = static_cast<std::int64_t>(std::floor(constants.gamma * n)) + 1;
    if (k_gamma <= n && classify(GridPoint::from_counts(1, k_gamma, n), constants) == DomainLabel::Cyan1) {
        PointResult probe = make_point(DomainLabel::Cyan1, 1, k_gamma, n, false);
        probe.allowed_fraction = whp_allowed_fraction(n, params.epsilon, trials);
        probe.note = "x_t+1 just above gamma; failure: x_t+2 <= 1/2";
        run_one_step_point(probe, cfg, trials, "cyan/gamma",
                           [n](std::int64_t next) { return 2 * next <= n; });
        finish_point(probe);
        report.points.push_back(probe);
    }

    report.pass = gating_points_pass(report.points) && all_checks_pass(report.checks);
    report.runtime_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------- sweeps

namespace {

ScalingFit fit_sweep(const std::string& preset, std::vector<SweepRow*> rows, const SweepParams& p) {
    ScalingFit fit;
    fit.preset = preset;
    std::vector<double> xs, ys;
    for (SweepRow* row : rows) {
        const double log_n = std::log(static_cast<double>(row->n));
        xs.push_back(std::log(log_n));
        ys.push_back(std::log(std::max(row->quantile99, 0.5)));
        fit.C = std::max(fit.C, row->quantile99 / std::pow(log_n, 2.5));
    }
    if (rows.size() >= 2) {
        const LinearFit lf = linear_fit(xs, ys);
        fit.slope = lf.slope;
        fit.intercept = lf.intercept;
        fit.r2 = lf.r2;
    }
    fit.within_C_fraction = 1.0;
    bool completion_ok = true;
    for (SweepRow* row : rows) {
        const double limit = fit.C * std::pow(std::log(static_cast<double>(row->n)), 2.5);
        std::int64_t within = 0;
        for (std::size_t i = 0; i < row->raw.size(); ++i) {
            if (static_cast<double>(row->raw[i]) <= limit + 1e-9 && row->raw[i] < p.max_rounds) ++within;
        }
        const double frac = row->trials > 0 ? static_cast<double>(within) / row->trials : 0.0;
        fit.within_C_fraction = std::min(fit.within_C_fraction, frac);
        if (row->completed != row->trials) completion_ok = false;
        row->fit_C = fit.C;
        row->fit_r2 = fit.r2;
    }
    fit.pass = rows.size() >= 2 && fit.r2 >= p.min_r2 && fit.slope <= p.max_exponent &&
               fit.within_C_fraction >= p.min_converged_fraction && completion_ok;
    return fit;
}

nlohmann::json fit_json(const ScalingFit& f) {
    return {{"preset", f.preset}, {"slope", f.slope},       {"intercept", f.intercept},
            {"r2", f.r2},         {"C", f.C},               {"within_C_fraction", f.within_C_fraction},
            {"pass", f.pass}};
}

void fill_quantiles(SweepRow& row, const std::vector<std::int64_t>& times) {
    std::vector<double> values(times.begin(), times.end());
    row.quantile50 = quantile(values, 0.5);
    row.quantile99 = quantile(values, 0.99);
}

}  // namespace

LemmaReport verify_yellow(const SweepParams& params) {
    const auto start = Clock::now();
    LemmaReport report;
    report.lemma = "yellow";
    report.params = params_json(params);
    const Preset preset = Preset::parse("yellow_center");
    nlohmann::json dwell = nlohmann::json::object();
    for (int n : params.n_list) {
        SimConfig cfg;
        cfg.n = n;
        cfg.ell = sample_size(n, params.c_sample);
        cfg.delta = params.delta;
        cfg.c_sample = params.c_sample;
        cfg.max_rounds = params.max_rounds;
        cfg.backend = Backend::Aggregate;
        cfg.seed = sub_seed(params.seed, "yellow/" + std::to_string(n));
        cfg.validate();
        std::vector<std::int64_t> escape(static_cast<std::size_t>(params.trials), params.max_rounds);
        std::vector<std::int64_t> b_dwell(static_cast<std::size_t>(params.trials), 0);
        std::vector<char> escaped(static_cast<std::size_t>(params.trials), 0);
        parallel_for(params.trials, [&](std::int64_t i) {
            const InitialCondition init = init_adversarial(preset, cfg, static_cast<std::uint64_t>(i));
            const Trajectory traj = run_trial(cfg, init, static_cast<std::uint64_t>(i));
            for (const TrajectoryRow& row : traj.rows) {
                if (row.yellow == YellowLabel::OutsideYellowPrime) {
                    escape[i] = row.round;
                    escaped[i] = 1;
                    break;
                }
                if (row.yellow == YellowLabel::B1 || row.yellow == YellowLabel::B0) ++b_dwell[i];
            }
        });
        SweepRow row;
        row.preset = "yellow_center";
        row.n = n;
        row.ell = cfg.ell;
        row.trials = params.trials;
        for (char e : escaped) row.completed += e;
        row.raw = escape;
        fill_quantiles(row, escape);
        report.sweep.push_back(row);
        std::map<std::int64_t, std::int64_t> hist;
        for (std::int64_t d : b_dwell) ++hist[d];
        nlohmann::json h = nlohmann::json::array();
        for (const auto& [d, count] : hist) h.push_back({d, count});
        dwell[std::to_string(n)] = {{"b_dwell_histogram", h},
                                    {"log_n_pow_1_5", std::pow(std::log(static_cast<double>(n)), 1.5)}};
    }
    std::vector<SweepRow*> rows;
    for (SweepRow& r : report.sweep) rows.push_back(&r);
    report.fits.push_back(fit_sweep("yellow_center", rows, params));
    report.extra["b_area_dwell"] = dwell;
    report.pass = report.fits.back().pass;
    report.runtime_seconds = seconds_since(start);
    return report;
}

LemmaReport verify_convergence(const SweepParams& params) {
    const auto start = Clock::now();
    LemmaReport report;
    report.lemma = "convergence";
    report.params = params_json(params);
    for (const std::string& preset_name : params.presets) {
        const Preset preset = Preset::parse(preset_name);
        for (int n : params.n_list) {
            SimConfig cfg;
            cfg.n = n;
            cfg.ell = sample_size(n, params.c_sample);
            cfg.delta = params.delta;
            cfg.c_sample = params.c_sample;
            cfg.max_rounds = params.max_rounds;
            cfg.backend = Backend::Aggregate;
            cfg.seed = sub_seed(params.seed, "convergence/" + preset_name + "/" + std::to_string(n));
            cfg.validate();
            std::vector<std::int64_t> rounds(static_cast<std::size_t>(params.trials), params.max_rounds);
            std::vector<char> done(static_cast<std::size_t>(params.trials), 0);
            parallel_for(params.trials, [&](std::int64_t i) {
                const InitialCondition init = init_adversarial(preset, cfg, static_cast<std::uint64_t>(i));
                const Trajectory traj = run_trial(cfg, init, static_cast<std::uint64_t>(i));
                if (traj.converged_round) {
                    rounds[i] = *traj.converged_round;
                    done[i] = 1;
                }
            });
            SweepRow row;
            row.preset = preset_name;
            row.n = n;
            row.ell = cfg.ell;
            row.trials = params.trials;
            for (char d : done) row.completed += d;
            row.raw = rounds;
            fill_quantiles(row, rounds);
            report.sweep.push_back(row);
        }
        std::vector<SweepRow*> rows;
        for (SweepRow& r : report.sweep) {
            if (r.preset == preset_name) rows.push_back(&r);
        }
        report.fits.push_back(fit_sweep(preset_name, rows, params));
        double worst = 1.0;
        for (SweepRow* r : rows) worst = std::min(worst, static_cast<double>(r->completed) / r->trials);
        report.checks.push_back({preset_name + "_converged_fraction_ge_" + format_number(params.min_converged_fraction),
                                 worst >= params.min_converged_fraction,
                                 "worst-n converged fraction " + format_number(worst)});
    }
    bool fits_ok = true;
    for (const ScalingFit& f : report.fits) fits_ok = fits_ok && f.pass;
    report.pass = fits_ok && all_checks_pass(report.checks);
    report.runtime_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------- config / dispatch

VerifyConfig VerifyConfig::from(const Config& config) {
    VerifyConfig v;
    const std::uint64_t seed = config.get_uint("seed", 20240917);
    const double epsilon = config.get_double("epsilon", 1.0);

    v.green.n = 4096;
    v.green.delta = 0.2;
    v.green.c_sample = 50.0;
    v.green.trials = 2000;
    v.purple.n = 32768;
    v.purple.delta = 0.05;
    v.purple.c_sample = 3.0;
    v.purple.trials = 2000;
    v.red.n = 4096;
    v.red.delta = 0.1;
    v.red.c_sample = 3.0;
    v.red.trials = 1000;
    v.cyan.n = 4096;
    v.cyan.delta = 0.05;
    v.cyan.c_sample = 3.0;
    v.cyan.trials = 1000;

    const auto lemma = [&](const std::string& name, LemmaParams& p) {
        p.n = static_cast<int>(config.get_int(name + ".n", p.n));
        p.ell = static_cast<int>(config.get_int(name + ".ell", 0));
        p.delta = config.get_double(name + ".delta", p.delta);
        p.c_sample = config.get_double(name + ".c_sample", p.c_sample);
        p.trials = config.get_int(name + ".trials", p.trials);
        p.seed = sub_seed(config.get_uint(name + ".seed", seed), name);
        p.epsilon = config.get_double(name + ".epsilon", epsilon);
        p.max_rounds = config.get_int(name + ".max_rounds", p.max_rounds);
        p.red_points = static_cast<int>(config.get_int(name + ".points", p.red_points));
        if (p.trials < 1) throw UsageError(name + ".trials must be >= 1");
    };
    lemma("green", v.green);
    lemma("purple", v.purple);
    lemma("red", v.red);
    lemma("cyan", v.cyan);

    const auto sweep = [&](const std::string& name, SweepParams& p) {
        std::vector<std::int64_t> fallback(p.n_list.begin(), p.n_list.end());
        p.n_list.clear();
        for (std::int64_t n : config.get_int_list(name + ".n_list", fallback)) p.n_list.push_back(static_cast<int>(n));
        p.c_sample = config.get_double(name + ".c_sample", p.c_sample);
        p.delta = config.get_double(name + ".delta", p.delta);
        p.trials = config.get_int(name + ".trials", p.trials);
        p.seed = sub_seed(config.get_uint(name + ".seed", seed), name);
        p.presets = config.get_list(name + ".presets", p.presets);
        p.max_rounds = config.get_int(name + ".max_rounds", p.max_rounds);
        p.min_converged_fraction = config.get_double(name + ".min_converged_fraction", p.min_converged_fraction);
        p.min_r2 = config.get_double(name + ".min_r2", p.min_r2);
        p.max_exponent = config.get_double(name + ".max_exponent", p.max_exponent);
        if (p.trials < 1) throw UsageError(name + ".trials must be >= 1");
        if (p.n_list.empty()) throw UsageError(name + ".n_list must not be empty");
    };
    sweep("yellow", v.yellow);
    sweep("convergence", v.convergence);
    return v;
}

std::vector<LemmaReport> run_verify(const std::string& lemma, const VerifyConfig& config) {
    std::vector<LemmaReport> out;
    const bool all = lemma == "all";
    bool known = all;
    for (const std::string& name : kLemmaNames) known = known || name == lemma;
    if (!known) throw UsageError("unknown lemma '" + lemma + "'");
    if (all || lemma == "green") out.push_back(verify_green(config.green));
    if (all || lemma == "purple") out.push_back(verify_purple(config.purple));
    if (all || lemma == "red") out.push_back(verify_red(config.red));
    if (all || lemma == "cyan") out.push_back(verify_cyan(config.cyan));
    if (all || lemma == "yellow") out.push_back(verify_yellow(config.yellow));
    if (all || lemma == "convergence") out.push_back(verify_convergence(config.convergence));
    return out;
}

// ---------------------------------------------------------------- emission

nlohmann::json to_json(const LemmaReport& report) {
    nlohmann::json points = nlohmann::json::array();
    for (const PointResult& p : report.points) {
        points.push_back({{"label", p.label},
                          {"k_t", p.k_t},
                          {"k_t1", p.k_t1},
                          {"point_x", p.point_x},
                          {"point_y", p.point_y},
                          {"trials", p.trials},
                          {"failures", p.failures},
                          {"allowed_fraction", p.allowed_fraction},
                          {"gating", p.gating},
                          {"verdict", p.verdict},
                          {"note", p.note},
                          {"detail", p.detail}});
    }
    nlohmann::json sweep = nlohmann::json::array();
    for (const SweepRow& r : report.sweep) {
        sweep.push_back({{"preset", r.preset},
                         {"n", r.n},
                         {"ell", r.ell},
                         {"trials", r.trials},
                         {"completed", r.completed},
                         {"quantile50", r.quantile50},
                         {"quantile99", r.quantile99},
                         {"fit_C", r.fit_C},
                         {"fit_r2", r.fit_r2},
                         {"raw", r.raw}});
    }
    nlohmann::json fits = nlohmann::json::array();
    for (const ScalingFit& f : report.fits) fits.push_back(fit_json(f));
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckResult& c : report.checks) {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    return {{"lemma", report.lemma}, {"params", report.params}, {"points", points},
            {"sweep", sweep},       {"fits", fits},             {"checks", checks},
            {"extra", report.extra}, {"verdict", report.pass ? "PASS" : "FAIL"}};
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << content;
}

std::string sweep_csv(const std::vector<const SweepRow*>& rows) {
    std::ostringstream os;
    os << "n,quantile50,quantile99,fit_C,fit_r2\n";
    for (const SweepRow* r : rows) {
        os << r->n << ',' << format_number(r->quantile50) << ',' << format_number(r->quantile99) << ','
           << format_number(r->fit_C) << ',' << format_number(r->fit_r2) << '\n';
    }
    return os.str();
}

}  // namespace

std::vector<std::string> emit(const LemmaReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    const fs::path dir(out_dir);
    write_file(dir / (report.lemma + ".json"), to_json(report).dump(2) + "\n");
    written.push_back(report.lemma + ".json");
    if (!report.points.empty()) {
        std::ostringstream os;
        os << "point_x,point_y,trials,failures,verdict\n";
        for (const PointResult& p : report.points) {
            os << format_number(p.point_x) << ',' << format_number(p.point_y) << ',' << p.trials << ','
               << p.failures << ',' << p.verdict << '\n';
        }
        write_file(dir / (report.lemma + ".csv"), os.str());
        written.push_back(report.lemma + ".csv");
    }
    if (!report.sweep.empty()) {
        if (report.lemma == "convergence") {
            std::map<std::string, std::vector<const SweepRow*>> by_preset;
            for (const SweepRow& r : report.sweep) by_preset[r.preset].push_back(&r);
            for (const auto& [preset, rows] : by_preset) {
                const std::string name = "convergence_" + preset + ".csv";
                write_file(dir / name, sweep_csv(rows));
                written.push_back(name);
            }
        } else {
            std::vector<const SweepRow*> rows;
            for (const SweepRow& r : report.sweep) rows.push_back(&r);
            write_file(dir / (report.lemma + ".csv"), sweep_csv(rows));
            written.push_back(report.lemma + ".csv");
        }
    }
    return written;
}

std::vector<std::string> emit_all(const std::vector<LemmaReport>& reports, const std::string& out_dir) {
    std::vector<std::string> written;
    nlohmann::json summary = nlohmann::json::object();
    std::ostringstream timings;
    for (const LemmaReport& r : reports) {
        for (const std::string& f : emit(r, out_dir)) written.push_back(f);
        summary[r.lemma] = r.pass ? "PASS" : "FAIL";
        timings << r.lemma << ' ' << format_number(r.runtime_seconds) << "\n";
    }
    const std::filesystem::path dir(out_dir);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    written.push_back("summary.json");
    write_file(dir / "timings.txt", timings.str());
    written.push_back("timings.txt");
    return written;
}

// ---------------------------------------------------------------- simulate

SimulationSummary run_simulation(const SimConfig& config, const Preset& preset, std::int64_t trials,
                                 const std::string& out_dir) {
    config.validate();
    if (trials < 1) throw UsageError("trials must be >= 1");
    SimulationSummary result;
    result.trajectories.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](std::int64_t i) {
        const InitialCondition init = init_adversarial(preset, config, static_cast<std::uint64_t>(i));
        result.trajectories[i] = run_trial(config, init, static_cast<std::uint64_t>(i));
    });

    nlohmann::json per_trial = nlohmann::json::array();
    std::vector<double> converged_rounds;
    std::map<std::string, std::int64_t> visits;
    std::int64_t unclassified = 0;
    bool source_ok = true;
    for (std::int64_t i = 0; i < trials; ++i) {
        const Trajectory& t = result.trajectories[i];
        std::map<std::string, std::int64_t> trial_visits;
        for (const TrajectoryRow& row : t.rows) {
            ++trial_visits[std::string(to_string(row.domain))];
            ++visits[std::string(to_string(row.domain))];
            if (row.domain == DomainLabel::Unclassified) ++unclassified;
        }
        source_ok = source_ok && t.source_invariant_held;
        nlohmann::json entry = {{"trial", i},
                                {"rounds", static_cast<std::int64_t>(t.ones.size()) - 1},
                                {"final_x", static_cast<double>(t.ones.back()) / config.n},
                                {"domain_visits", trial_visits}};
        entry["converged_round"] = t.converged_round ? nlohmann::json(*t.converged_round) : nlohmann::json(nullptr);
        per_trial.push_back(entry);
        if (t.converged_round) converged_rounds.push_back(static_cast<double>(*t.converged_round));
    }
    nlohmann::json quantiles = nullptr;
    if (!converged_rounds.empty()) {
        quantiles = {{"q50", quantile(converged_rounds, 0.5)},
                     {"q90", quantile(converged_rounds, 0.9)},
                     {"q99", quantile(converged_rounds, 0.99)},
                     {"mean", mean(converged_rounds)},
                     {"max", quantile(converged_rounds, 1.0)}};
    }
    result.summary = {{"config",
                       {{"n", config.n},
                        {"ell", config.ell},
                        {"delta", config.delta},
                        {"c_sample", config.c_sample},
                        {"source_opinion", config.source_opinion},
                        {"max_rounds", config.max_rounds},
                        {"seed", config.seed},
                        {"backend", to_string(config.backend)},
                        {"variant", to_string(config.variant)},
                        {"persistence_rounds", config.persistence_rounds},
                        {"preset", preset.name()},
                        {"trials", trials}}},
                      {"converged", static_cast<std::int64_t>(converged_rounds.size())},
                      {"converged_round_quantiles", quantiles},
                      {"domain_visits", visits},
                      {"unclassified_points", unclassified},
                      {"source_invariant_held", source_ok},
                      {"trials", per_trial}};

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        for (std::int64_t i = 0; i < trials; ++i) {
            std::ostringstream os;
            os << "round,x_t,domain,yellow_label\n";
            for (const TrajectoryRow& row : result.trajectories[i].rows) {
                os << row.round << ',' << format_number(row.x_t) << ',' << to_string(row.domain) << ','
                   << to_string(row.yellow) << '\n';
            }
            write_file(fs::path(out_dir) / ("trial_" + std::to_string(i) + ".csv"), os.str());
        }
        write_file(fs::path(out_dir) / "summary.json", result.summary.dump(2) + "\n");
    }
    return result;
}

// ---------------------------------------------------------------- audit

nlohmann::json audit_to_json(const PartitionAudit& audit) {
    const auto points = [](const std::vector<AuditPoint>& list) {
        nlohmann::json out = nlohmann::json::array();
        for (const AuditPoint& p : list) {
            nlohmann::json labels = nlohmann::json::array();
            for (DomainLabel l : p.matches) labels.push_back(std::string(to_string(l)));
            out.push_back({{"k_t", p.k_t}, {"k_t1", p.k_t1}, {"matches", labels}});
        }
        return out;
    };
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < audit.label_counts.size(); ++i) {
        labels[std::string(to_string(static_cast<DomainLabel>(i)))] = audit.label_counts[i];
    }
    nlohmann::json yellow = nlohmann::json::object();
    for (std::size_t i = 0; i < audit.yellow_counts.size(); ++i) {
        yellow[std::string(to_string(static_cast<YellowLabel>(i)))] = audit.yellow_counts[i];
    }
    const int n = audit.n;
    const DomainLabel absorbing = classify(GridPoint::from_counts(n, n, n), audit.constants);
    const DomainLabel cyan_corner = classify(GridPoint::from_counts(1, 1, n), audit.constants);
    return {{"yellow_reading", std::string(kYellowReading)},
            {"precedence", "Green1, Green0, Purple1, Purple0, Red1, Red0, Cyan1, Cyan0, Yellow"},
            {"n", n},
            {"delta", audit.constants.delta},
            {"lambda_n", audit.constants.lambda_n},
            {"inv_log_n", 1.0 / audit.constants.log_n},
            {"total_points", audit.total_points},
            {"covered_once", audit.covered_once},
            {"uncovered_count", audit.uncovered.size()},
            {"overlapping_count", audit.overlapping.size()},
            {"label_counts", labels},
            {"yellow_counts", yellow},
            {"yellow_outside_prime", audit.yellow_outside_prime},
            {"mirror_coverage_mismatches", audit.mirror_coverage_mismatches},
            {"absorbing_corner", {{"point", {1.0, 1.0}}, {"label", std::string(to_string(absorbing))}}},
            {"cyan_corner", {{"point", {1.0 / n, 1.0 / n}}, {"label", std::string(to_string(cyan_corner))}}},
            {"uncovered", points(audit.uncovered)},
            {"overlapping", points(audit.overlapping)}};
}

}  // namespace fet
