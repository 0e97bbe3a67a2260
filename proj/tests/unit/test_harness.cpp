#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fet/errors.hpp"
#include "fet/harness.hpp"

using namespace fet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("fet_unit_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("w.h.p. allowance") {
    CHECK(whp_allowed_fraction(4096, 1.0, 1000) ==
          doctest::Approx(1.0 / 4096 + 3 * std::sqrt((1.0 / 4096) * (1 - 1.0 / 4096) / 1000)));
    CHECK(whp_allowed_fraction(100, 2.0, 1) > whp_allowed_fraction(100, 2.0, 100));
}

TEST_CASE("format_number") {
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(1.0 / 3) == "0.3333333333");
    CHECK(format_number(12345678) == "12345678");
}

TEST_CASE("green check on a small population") {
    LemmaParams p;
    p.n = 1024;
    p.delta = 0.2;
    p.c_sample = 50;
    p.trials = 200;
    p.seed = 3;
    const LemmaReport r = verify_green(p);
    CHECK(r.pass);
    CHECK(r.points.size() == 9);
    for (const auto& pt : r.points) {
        CHECK(pt.trials == 200);
        CHECK((pt.label == "Green1" || pt.label == "Green0"));
    }
    // the degenerate (0, 1) point: everyone holds 1 next round
    CHECK(r.points[0].k_t == 0);
    CHECK(r.points[0].k_t1 == 1024);
    CHECK(r.points[0].failures == 0);

    LemmaParams thin = p;
    thin.c_sample = 3;
    CHECK_THROWS_AS(verify_green(thin), DomainError);
}

TEST_CASE("red grid points are classifier-confirmed") {
    const auto pts = red1_grid_points(4096, 0.1, 3.0);
    REQUIRE_FALSE(pts.empty());
    const auto c = AnalysisConstants::make(4096, 0.1, 3.0);
    for (const auto& [a, b] : pts) CHECK(classify(GridPoint::from_counts(a, b, 4096), c) == DomainLabel::Red1);
    CHECK(red1_grid_points(4096, 0.05, 3.0).empty());
}

TEST_CASE("cyan expectation inequality at n = 4096") {
    const auto c = AnalysisConstants::make(4096, 0.05, 3.0);
    const auto check = cyan_expectation_check(4096, sample_size(4096, 3.0), c);
    CHECK(check.checked > 0);
    CHECK(check.violations == 0);
    // the documented (1/n, 1/n) point is among them
    const double lhs = expected_next_fraction(1.0 / 4096, 1.0 / 4096, 4096, 25);
    CHECK(lhs >= c.K * (1.0 / 4096) * c.log_n - 1.0 / 4096);
}

TEST_CASE("verify config keys") {
    const Config cfg = Config::parse("seed = 5\ngreen.trials = 7\nconvergence.n_list = 64, 128\n"
                                     "yellow.presets = yellow_center\n");
    const VerifyConfig v = VerifyConfig::from(cfg);
    CHECK(v.green.trials == 7);
    CHECK(v.green.n == 4096);
    CHECK(v.purple.n == 32768);
    CHECK(v.convergence.n_list == std::vector<int>{64, 128});
    CHECK(v.green.seed != v.purple.seed);
    CHECK(VerifyConfig::from(cfg).red.seed == v.red.seed);
    CHECK_THROWS_AS(VerifyConfig::from(Config::parse("red.trials = 0\n")), UsageError);
    CHECK_THROWS_AS(run_verify("blue", v), UsageError);
}

TEST_CASE("emit writes the documented schema") {
    LemmaReport r;
    r.lemma = "green";
    PointResult p;
    p.label = "Green1";
    p.k_t = 1;
    p.k_t1 = 3;
    p.point_x = 0.25;
    p.point_y = 0.75;
    p.trials = 10;
    p.failures = 1;
    p.verdict = "FAIL";
    r.points.push_back(p);
    r.pass = false;
    r.runtime_seconds = 1.5;

    LemmaReport s;
    s.lemma = "convergence";
    SweepRow row;
    row.preset = "yellow_center";
    row.n = 1024;
    row.quantile50 = 12;
    row.quantile99 = 30.5;
    row.fit_C = 0.9;
    row.fit_r2 = 0.95;
    row.raw = {1, 2};
    s.sweep.push_back(row);
    s.pass = true;

    const fs::path dir = fresh_dir("emit");
    const auto files = emit_all({r, s}, dir.string());
    CHECK(files == std::vector<std::string>{"green.json", "green.csv", "convergence.json",
                                            "convergence_yellow_center.csv", "summary.json", "timings.txt"});
    CHECK(slurp(dir / "green.csv") == "point_x,point_y,trials,failures,verdict\n0.25,0.75,10,1,FAIL\n");
    CHECK(slurp(dir / "convergence_yellow_center.csv") ==
          "n,quantile50,quantile99,fit_C,fit_r2\n1024,12,30.5,0.9,0.95\n");
    CHECK(slurp(dir / "timings.txt") == "green 1.5\nconvergence 0\n");

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["green"] == "FAIL");
    CHECK(summary["convergence"] == "PASS");

    const auto doc = nlohmann::json::parse(slurp(dir / "green.json"));
    for (const char* key : {"lemma", "params", "points", "sweep", "fits", "checks", "extra", "verdict"}) {
        CHECK(doc.contains(key));
    }
    for (const char* key : {"label", "k_t", "k_t1", "point_x", "point_y", "trials", "failures",
                            "allowed_fraction", "gating", "verdict", "note", "detail"}) {
        CHECK(doc["points"][0].contains(key));
    }
    fs::remove_all(dir);
}

TEST_CASE("simulate writes trajectories and a summary") {
    SimConfig cfg;
    cfg.n = 64;
    cfg.ell = 8;
    cfg.seed = 2;
    const fs::path dir = fresh_dir("simulate");
    const auto result = run_simulation(cfg, Preset::parse("all_wrong"), 3, dir.string());
    CHECK(result.trajectories.size() == 3);
    for (const char* key : {"config", "converged", "converged_round_quantiles", "domain_visits",
                            "unclassified_points", "source_invariant_held", "trials"}) {
        CHECK(result.summary.contains(key));
    }
    const std::string csv = slurp(dir / "trial_0.csv");
    CHECK(csv.rfind("round,x_t,domain,yellow_label\n", 0) == 0);
    CHECK(fs::exists(dir / "trial_2.csv"));
    CHECK(nlohmann::json::parse(slurp(dir / "summary.json")) == result.summary);
    fs::remove_all(dir);
}

TEST_CASE("audit json lists the corners") {
    const auto c = AnalysisConstants::make(32, 0.05, 3.0);
    const auto doc = audit_to_json(audit_partition(32, c));
    CHECK(doc["absorbing_corner"]["label"] == "Cyan0");
    CHECK(doc["cyan_corner"]["label"] == "Cyan1");
    CHECK(doc.contains("yellow_reading"));
    CHECK(doc.contains("overlapping"));
    CHECK(doc.contains("uncovered"));
}
