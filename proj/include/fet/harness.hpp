#pragma once

// Lemma verification suite and experiment runner. Each check plants exact
// integer-count states, re-validates them with the classifier, observes the
// simulator, and records raw counts next to every verdict.

#include <cstdint>
#include <string>
#include <vector>

#include "fet/config.hpp"
#include "fet/domains.hpp"
#include "fet/dynamics.hpp"
#include "fet/protocol.hpp"
#include "json.hpp"

namespace fet {

struct LemmaParams {
    int n = 4096;
    int ell = 0;  // 0: derive from c_sample
    double delta = 0.05;
    double c_sample = 3.0;
    std::int64_t trials = 1000;
    std::uint64_t seed = 1;
    double epsilon = 1.0;           // w.h.p. threshold n^-epsilon
    std::int64_t max_rounds = 10000;
    int red_points = 6;             // Red1 grid points planted (plus mirrors)

    int resolved_ell() const;
};

struct SweepParams {
    std::vector<int> n_list{1024, 2048, 4096, 8192};
    double c_sample = 3.0;
    double delta = 0.05;
    std::int64_t trials = 200;
    std::uint64_t seed = 1;
    std::vector<std::string> presets{"all_wrong_max_counters", "yellow_center", "cyan_corner"};
    std::int64_t max_rounds = 10000;
    double min_converged_fraction = 0.99;
    double min_r2 = 0.9;
    double max_exponent = 2.5;
};

struct PointResult {
    std::string label;  // classifier label of the planted point
    std::int64_t k_t = 0;
    std::int64_t k_t1 = 0;
    double point_x = 0.0;
    double point_y = 0.0;
    std::int64_t trials = 0;
    std::int64_t failures = 0;
    double allowed_fraction = 0.0;  // failure fraction at or below this passes
    bool gating = true;             // INFO rows are reported but never decide the verdict
    std::string verdict;            // PASS, FAIL or INFO
    std::string note;
    nlohmann::json detail = nlohmann::json::object();
};

struct SweepRow {
    std::string preset;
    int n = 0;
    int ell = 0;
    std::int64_t trials = 0;
    std::int64_t completed = 0;  // trials that converged / escaped within max_rounds
    double quantile50 = 0.0;
    double quantile99 = 0.0;
    double fit_C = 0.0;
    double fit_r2 = 0.0;
    std::vector<std::int64_t> raw;  // per-trial times (max_rounds when not completed)
};

struct ScalingFit {
    std::string preset;
    double slope = 0.0;      // d ln(q99) / d ln(ln n)
    double intercept = 0.0;
    double r2 = 0.0;
    double C = 0.0;          // max_n q99 / ln^{5/2} n
    double within_C_fraction = 0.0;  // worst-n fraction of trials finishing within C ln^{5/2} n
    bool pass = false;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct LemmaReport {
    std::string lemma;
    nlohmann::json params = nlohmann::json::object();
    std::vector<PointResult> points;
    std::vector<SweepRow> sweep;
    std::vector<ScalingFit> fits;
    std::vector<CheckResult> checks;
    nlohmann::json extra = nlohmann::json::object();
    bool pass = false;
    double runtime_seconds = 0.0;  // emitted to timings.txt only
};

// Allowed failure fraction n^-eps + 3 sqrt(thr (1 - thr) / trials).
double whp_allowed_fraction(int n, double epsilon, std::int64_t trials);

LemmaReport verify_green(const LemmaParams& params);
LemmaReport verify_purple(const LemmaParams& params);
LemmaReport verify_red(const LemmaParams& params);
LemmaReport verify_cyan(const LemmaParams& params);
LemmaReport verify_yellow(const SweepParams& params);
LemmaReport verify_convergence(const SweepParams& params);

struct CyanExpectationCheck {
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    double min_margin = 0.0;
    std::int64_t worst_k_t = 0;
    std::int64_t worst_k_t1 = 0;
};

// E[x_t+2] >= K x_t+1 ln n - 1/n over every Cyan1 grid point with 0 < x_t+1 <= 1/ell.
CyanExpectationCheck cyan_expectation_check(int n, int ell, const AnalysisConstants& constants);

// Red1 grid points (classifier-confirmed), ordered by (k_t, k_t1).
std::vector<std::pair<std::int64_t, std::int64_t>> red1_grid_points(int n, double delta, double c_sample);

struct VerifyConfig {
    LemmaParams green, purple, red, cyan;
    SweepParams yellow, convergence;

    // Defaults are the documented parameter points; keys are "<lemma>.<field>"
    // plus global "seed" and "epsilon".
    static VerifyConfig from(const Config& config);
};

inline const std::vector<std::string> kLemmaNames{"green", "purple", "red", "cyan", "yellow", "convergence"};

// lemma is one of kLemmaNames or "all". Throws UsageError otherwise.
std::vector<LemmaReport> run_verify(const std::string& lemma, const VerifyConfig& config);

nlohmann::json to_json(const LemmaReport& report);

// Writes <lemma>.json and the CSV(s): point rows as point_x,point_y,trials,failures,verdict;
// sweep rows as n,quantile50,quantile99,fit_C,fit_r2 (one file per preset for convergence).
// Returns the written file names.
std::vector<std::string> emit(const LemmaReport& report, const std::string& out_dir);
// emit() for every report plus summary.json (verdicts) and timings.txt (runtimes).
std::vector<std::string> emit_all(const std::vector<LemmaReport>& reports, const std::string& out_dir);

struct SimulationSummary {
    std::vector<Trajectory> trajectories;
    nlohmann::json summary;
};

// simulate subcommand: runs `trials` trials and, when out_dir is non-empty, writes
// trial_<k>.csv (round,x_t,domain,yellow_label) and summary.json.
SimulationSummary run_simulation(const SimConfig& config, const Preset& preset, std::int64_t trials,
                                 const std::string& out_dir);

// Partition audit as JSON: the Yellow reading, coverage statistics, every
// uncovered and multiply-matched point, and the labels of the two corners.
nlohmann::json audit_to_json(const PartitionAudit& audit);

// Formats a double for CSV output ("%.10g").
std::string format_number(double value);

}  // namespace fet
