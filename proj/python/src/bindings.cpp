#include <optional>
#include <string>
#include <tuple>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fet/config.hpp"
#include "fet/domains.hpp"
#include "fet/duel.hpp"
#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/harness.hpp"
#include "fet/markov.hpp"
#include "fet/protocol.hpp"

namespace py = pybind11;

// JSON crosses the boundary as text; the package wraps these with json.loads.
PYBIND11_MODULE(_fetsim, m) {
    m.doc() = "FET bit-dissemination workbench (native core)";

    py::register_exception<fet::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<fet::UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<fet::StructuralError>(m, "StructuralError", PyExc_RuntimeError);

    m.def("exact_duel", [](int k, double p, double q) {
        const fet::DuelProbs d = fet::exact_duel(k, p, q);
        return std::make_tuple(d.p_lt, d.p_eq, d.p_gt);
    }, py::arg("k"), py::arg("p"), py::arg("q"), "(P(B_k(p) < B_k(q)), P(=), P(>))");

    m.def("flip_probs", [](double x_t, double x_t1, int ell) {
        const fet::FlipProbs f = fet::flip_probs(x_t, x_t1, ell);
        return std::make_tuple(f.p_keep_one, f.p_gain_one);
    }, py::arg("x_t"), py::arg("x_t1"), py::arg("ell"), "(p_keep_one, p_gain_one)");

    m.def("expected_next_fraction", &fet::expected_next_fraction, py::arg("x_t"), py::arg("x_t1"),
          py::arg("n"), py::arg("ell"));
    m.def("fixed_point_f", &fet::fixed_point_f, py::arg("x"), py::arg("ell"), py::arg("n"), py::arg("delta"));

    m.def("classify", [](double x_t, double x_t1, int n, double delta, double c_sample) {
        return std::string(fet::to_string(fet::classify({x_t, x_t1}, n, delta, c_sample)));
    }, py::arg("x_t"), py::arg("x_t1"), py::arg("n"), py::arg("delta") = 0.05, py::arg("c_sample") = 3.0);

    m.def("classify_yellow", [](double x_t, double x_t1, int n, double delta, double c_sample) {
        const auto c = fet::AnalysisConstants::make(n, delta, c_sample);
        return std::string(fet::to_string(fet::classify_yellow({x_t, x_t1}, c)));
    }, py::arg("x_t"), py::arg("x_t1"), py::arg("n"), py::arg("delta") = 0.05, py::arg("c_sample") = 3.0);

    m.def("audit_json", [](int n, double delta, double c_sample) {
        const auto c = fet::AnalysisConstants::make(n, delta, c_sample);
        py::gil_scoped_release release;
        return fet::audit_to_json(fet::audit_partition(n, c)).dump();
    }, py::arg("n"), py::arg("delta") = 0.05, py::arg("c_sample") = 3.0);

    m.def("chain_json", [](int n, int ell, std::optional<std::pair<std::int64_t, std::int64_t>> from) {
        std::optional<fet::PairState> start;
        if (from) start = fet::PairState{from->first, from->second};
        py::gil_scoped_release release;
        return fet::chain_report(n, ell, start).dump();
    }, py::arg("n"), py::arg("ell"), py::arg("start") = py::none());

    m.def("simulate_json", [](const std::string& config_text, const std::string& preset, std::int64_t trials,
                              const std::string& out_dir) {
        const fet::Config cfg = fet::Config::parse(config_text);
        const fet::SimConfig sim = fet::sim_config_from(cfg);
        const fet::Preset p = fet::Preset::parse(preset);
        py::gil_scoped_release release;
        return fet::run_simulation(sim, p, trials, out_dir).summary.dump();
    }, py::arg("config_text"), py::arg("preset"), py::arg("trials"), py::arg("out_dir") = "");

    m.def("verify_json", [](const std::string& lemma, const std::string& config_text, const std::string& out_dir) {
        const fet::VerifyConfig v = fet::VerifyConfig::from(fet::Config::parse(config_text));
        py::gil_scoped_release release;
        const auto reports = fet::run_verify(lemma, v);
        if (!out_dir.empty()) fet::emit_all(reports, out_dir);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : reports) out.push_back(fet::to_json(r));
        return out.dump();
    }, py::arg("lemma"), py::arg("config_text") = "", py::arg("out_dir") = "");
}
