// fet: command-line front end for the FET workbench.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fet/config.hpp"
#include "fet/domains.hpp"
#include "fet/duel.hpp"
#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/harness.hpp"
#include "fet/markov.hpp"
#include "fet/protocol.hpp"

namespace {

void write_json(const nlohmann::json& doc, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw fet::UsageError("cannot write '" + path + "'");
    out << doc.dump(2) << "\n";
}

std::optional<fet::PairState> parse_pair(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw fet::UsageError("--from expects KT,KT1");
    try {
        return fet::PairState{std::stoll(text.substr(0, comma)), std::stoll(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw fet::UsageError("--from expects two integers, got '" + text + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FET bit-dissemination workbench"};
    app.require_subcommand(1);

    // duel
    int duel_k = 1;
    double duel_p = 0.0, duel_q = 0.0;
    bool duel_bounds = false;
    auto* duel = app.add_subcommand("duel", "Exact binomial duel triple, optionally with bounds");
    duel->add_option("--k", duel_k, "sample count")->required();
    duel->add_option("--p", duel_p, "first coin")->required();
    duel->add_option("--q", duel_q, "second coin")->required();
    duel->add_flag("--bounds", duel_bounds, "add Hoeffding and underdog bounds (p < q)");

    // dynamics
    double dyn_x = 0.0, dyn_y = 0.0, dyn_delta = 0.05;
    int dyn_n = 0, dyn_ell = 0;
    auto* dynamics = app.add_subcommand("dynamics", "Expectation map, flip probabilities, fixed point");
    dynamics->add_option("--x", dyn_x, "x_t")->required();
    dynamics->add_option("--y", dyn_y, "x_t+1")->required();
    dynamics->add_option("--n", dyn_n, "population size")->required();
    dynamics->add_option("--ell", dyn_ell, "half-sample size")->required();
    dynamics->add_option("--delta", dyn_delta, "margin for the fixed-point range");

    // classify
    double cls_x = 0.0, cls_y = 0.0, cls_delta = 0.05, cls_c = 3.0;
    int cls_n = 0;
    auto* classify_cmd = app.add_subcommand("classify", "Domain label of a grid point");
    classify_cmd->add_option("--x", cls_x, "x_t")->required();
    classify_cmd->add_option("--y", cls_y, "x_t+1")->required();
    classify_cmd->add_option("--n", cls_n, "population size")->required();
    classify_cmd->add_option("--delta", cls_delta, "margin");
    classify_cmd->add_option("--c-sample", cls_c, "c in ell = ceil(c ln n)");

    // audit
    int audit_n = 0;
    double audit_delta = 0.05, audit_c = 3.0;
    std::string audit_out;
    auto* audit = app.add_subcommand("audit", "Exhaustive partition coverage audit");
    audit->add_option("--n", audit_n, "population size (<= 4096)")->required();
    audit->add_option("--delta", audit_delta, "margin");
    audit->add_option("--c-sample", audit_c, "c in ell = ceil(c ln n)");
    audit->add_option("--out", audit_out, "report path (stdout when omitted)");

    // simulate
    std::string sim_config, sim_preset, sim_out;
    std::int64_t sim_trials = 0;
    auto* simulate = app.add_subcommand("simulate", "Run protocol trials from an adversarial preset");
    simulate->add_option("--config", sim_config, "key = value config file")->required();
    simulate->add_option("--preset", sim_preset, "overrides the config's preset");
    simulate->add_option("--trials", sim_trials, "overrides the config's trials");
    simulate->add_option("--out", sim_out, "directory for trial_<k>.csv and summary.json");

    // chain
    int chain_n = 0, chain_ell = 0;
    std::string chain_from, chain_out;
    auto* chain = app.add_subcommand("chain", "Exact pair-state chain and absorption times");
    chain->add_option("--n", chain_n, "population size (<= 256)")->required();
    chain->add_option("--ell", chain_ell, "half-sample size")->required();
    chain->add_option("--from", chain_from, "start pair KT,KT1");
    chain->add_option("--out", chain_out, "report path (stdout when omitted)");

    // verify
    std::string verify_lemma = "all", verify_config, verify_out = "verify_out";
    auto* verify = app.add_subcommand("verify", "Lemma verification suite");
    verify->add_option("--lemma", verify_lemma, "green|purple|red|cyan|yellow|convergence|all");
    verify->add_option("--config", verify_config, "key = value config file");
    verify->add_option("--out", verify_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*duel) {
            const fet::DuelProbs d = fet::exact_duel(duel_k, duel_p, duel_q);
            nlohmann::json out = {{"k", duel_k}, {"p", duel_p}, {"q", duel_q},
                                  {"p_lt", d.p_lt}, {"p_eq", d.p_eq}, {"p_gt", d.p_gt}};
            if (duel_bounds) {
                if (duel_p < duel_q) {
                    out["hoeffding_lower_p_lt"] = fet::hoeffding_duel_bound(duel_k, duel_p, duel_q);
                    out["underdog_lower_p_gt"] = fet::underdog_lower_bound(duel_k, duel_p, duel_q);
                } else {
                    out["bounds"] = "bounds need p < q";
                }
            }
            write_json(out, "");
        } else if (*dynamics) {
            const fet::FlipProbs f = fet::flip_probs(dyn_x, dyn_y, dyn_ell);
            nlohmann::json out = {{"x_t", dyn_x},
                                  {"x_t1", dyn_y},
                                  {"n", dyn_n},
                                  {"ell", dyn_ell},
                                  {"g", fet::expected_next_fraction(dyn_x, dyn_y, dyn_n, dyn_ell)},
                                  {"p_keep_one", f.p_keep_one},
                                  {"p_gain_one", f.p_gain_one},
                                  {"speed", fet::speed({dyn_x, dyn_y})}};
            try {
                const fet::FixedPoint fp = fet::fixed_point(dyn_x, dyn_ell, dyn_n, dyn_delta);
                out["f"] = fp.value;
                out["f_is_root"] = fp.is_root;
            } catch (const fet::DomainError& e) {
                out["f"] = nullptr;
                out["f_note"] = e.what();
            }
            write_json(out, "");
        } else if (*classify_cmd) {
            const auto c = fet::AnalysisConstants::make(cls_n, cls_delta, cls_c);
            const fet::GridPoint p{cls_x, cls_y};
            write_json({{"x_t", cls_x},
                        {"x_t1", cls_y},
                        {"n", cls_n},
                        {"delta", cls_delta},
                        {"on_grid", p.on_grid(cls_n, 1e-9)},
                        {"label", std::string(fet::to_string(fet::classify(p, c)))},
                        {"yellow_label", std::string(fet::to_string(fet::classify_yellow(p, c)))}},
                       "");
        } else if (*audit) {
            const auto c = fet::AnalysisConstants::make(audit_n, audit_delta, audit_c);
            write_json(fet::audit_to_json(fet::audit_partition(audit_n, c)), audit_out);
        } else if (*simulate) {
            const fet::Config cfg = fet::Config::load(sim_config);
            const fet::SimConfig sim = fet::sim_config_from(cfg);
            const fet::Preset preset =
                fet::Preset::parse(sim_preset.empty() ? cfg.get_string("preset", "all_wrong") : sim_preset);
            const std::int64_t trials = sim_trials > 0 ? sim_trials : cfg.get_int("trials", 1);
            const auto result = fet::run_simulation(sim, preset, trials, sim_out);
            std::cout << "trials=" << trials << " converged=" << result.summary["converged"]
                      << (sim_out.empty() ? "" : " out=" + sim_out) << "\n";
        } else if (*chain) {
            write_json(fet::chain_report(chain_n, chain_ell, parse_pair(chain_from)), chain_out);
        } else if (*verify) {
            const fet::Config cfg = verify_config.empty() ? fet::Config{} : fet::Config::load(verify_config);
            const auto reports = fet::run_verify(verify_lemma, fet::VerifyConfig::from(cfg));
            fet::emit_all(reports, verify_out);
            bool all_pass = true;
            for (const auto& r : reports) {
                std::cout << r.lemma << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
                all_pass = all_pass && r.pass;
            }
            return all_pass ? 0 : 1;
        }
    } catch (const fet::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const fet::DomainError& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
