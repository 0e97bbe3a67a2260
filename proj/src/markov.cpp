#include "fet/markov.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <deque>
#include <sstream>

#include "fet/duel.hpp"
#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/parallel.hpp"
#include "fet/stats.hpp"

namespace fet {

namespace {

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

KernelRow make_row(int n, int ell, std::int64_t k_t, std::int64_t k_t1) {
    KernelRow row;
    row.from = {k_t, k_t1};
    const double dn = static_cast<double>(n);
    const FlipProbs probs = flip_probs(k_t / dn, k_t1 / dn, ell);
    const auto keep = binomial_pmf_vector(static_cast<int>(k_t1 - 1), std::clamp(probs.p_keep_one, 0.0, 1.0));
    const auto gain = binomial_pmf_vector(static_cast<int>(n - k_t1), std::clamp(probs.p_gain_one, 0.0, 1.0));
    const std::vector<double> dist = convolve(keep, gain);
    for (std::size_t j = 0; j < dist.size(); ++j) {
        if (dist[j] < kPruneBelow) {
            row.pruned_mass += dist[j];
        } else {
            row.next.emplace_back(static_cast<std::int64_t>(j) + 1, dist[j]);  // +1: the source
        }
    }
    return row;
}

std::string describe(const std::vector<PairState>& states, std::size_t limit = 10) {
    std::ostringstream os;
    for (std::size_t i = 0; i < states.size() && i < limit; ++i) {
        os << (i ? ", " : "") << "(" << states[i].k_t << "," << states[i].k_t1 << ")";
    }
    if (states.size() > limit) os << ", ... (" << states.size() << " total)";
    return os.str();
}

}  // namespace

Kernel build_kernel(int n, int ell) {
    if (n < 2 || n > kMaxKernelN) {
        throw UsageError("build_kernel supports 2 <= n <= " + std::to_string(kMaxKernelN));
    }
    if (ell < 1) throw DomainError("ell must be >= 1");
    Kernel kernel;
    kernel.n = n;
    kernel.ell = ell;
    kernel.rows.resize(static_cast<std::size_t>(n + 1) * n);
    parallel_for(static_cast<std::int64_t>(kernel.rows.size()), [&](std::int64_t idx) {
        const std::int64_t k_t = idx / n;
        const std::int64_t k_t1 = idx % n + 1;
        kernel.rows[static_cast<std::size_t>(idx)] = make_row(n, ell, k_t, k_t1);
    });
    for (const KernelRow& row : kernel.rows) kernel.pruned_mass += row.pruned_mass;
    return kernel;
}

std::vector<RowIssue> audit_kernel(const Kernel& kernel, double tol) {
    std::vector<RowIssue> issues;
    const double dn = static_cast<double>(kernel.n);
    for (const KernelRow& row : kernel.rows) {
        RowIssue issue;
        issue.state = row.from;
        for (const auto& [k, p] : row.next) {
            issue.row_sum += p;
            issue.mean += static_cast<double>(k) * p;
        }
        issue.expected_mean =
            dn * expected_next_fraction(row.from.k_t / dn, row.from.k_t1 / dn, kernel.n, kernel.ell);
        if (std::abs(issue.row_sum - 1.0) > tol || std::abs(issue.mean - issue.expected_mean) > tol) {
            issues.push_back(issue);
        }
    }
    return issues;
}

std::vector<PairState> absorbing_states(const Kernel& kernel) {
    std::vector<PairState> out;
    for (const KernelRow& row : kernel.rows) {
        if (row.from.k_t != row.from.k_t1) continue;
        for (const auto& [k, p] : row.next) {
            if (k == row.from.k_t1 && p >= 1.0 - 1e-15) out.push_back(row.from);
        }
    }
    return out;
}

AbsorptionTimes absorption_times(const Kernel& kernel) {
    const int n = kernel.n;
    const std::size_t states = kernel.state_count();
    const std::size_t target = kernel.index(n, n);

    // Reverse reachability from (n, n).
    std::vector<std::vector<std::size_t>> predecessors(states);
    for (std::size_t s = 0; s < states; ++s) {
        const KernelRow& row = kernel.rows[s];
        for (const auto& [k, p] : row.next) {
            if (p > 0.0) predecessors[kernel.index(row.from.k_t1, k)].push_back(s);
        }
    }
    std::vector<char> reaches(states, 0);
    std::deque<std::size_t> queue{target};
    reaches[target] = 1;
    while (!queue.empty()) {
        const std::size_t s = queue.front();
        queue.pop_front();
        for (std::size_t pred : predecessors[s]) {
            if (!reaches[pred]) {
                reaches[pred] = 1;
                queue.push_back(pred);
            }
        }
    }
    std::vector<PairState> stuck;
    for (std::size_t s = 0; s < states; ++s) {
        if (!reaches[s]) stuck.push_back(kernel.rows[s].from);
    }
    if (!stuck.empty()) {
        throw StructuralError("chain is not absorbing; states that cannot reach (n,n): " + describe(stuck));
    }

    // (I - Q) tau = 1 over transient states; transient index = state index with target removed.
    const auto transient = [&](std::size_t s) { return s < target ? s : s - 1; };
    const auto m = static_cast<Eigen::Index>(states - 1);
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t s = 0; s < states; ++s) {
        if (s == target) continue;
        const auto r = static_cast<Eigen::Index>(transient(s));
        triplets.emplace_back(r, r, 1.0);
        const KernelRow& row = kernel.rows[s];
        for (const auto& [k, p] : row.next) {
            const std::size_t dest = kernel.index(row.from.k_t1, k);
            if (dest == target) continue;
            triplets.emplace_back(r, static_cast<Eigen::Index>(transient(dest)), -p);
        }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(m);

    AbsorptionTimes out;
    out.n = n;
    Eigen::VectorXd x;
    {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
        solver.setTolerance(1e-13);
        solver.setMaxIterations(10000);
        solver.compute(a);
        if (solver.info() == Eigen::Success) {
            x = solver.solve(b);
            out.solver = "bicgstab+ilut";
        }
    }
    const auto residual = [&](const Eigen::VectorXd& v) { return (b - a * v).norm() / b.norm(); };
    if (x.size() != m || !x.allFinite() || residual(x) > 1e-10) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) throw StructuralError("sparse LU factorisation failed");
        x = lu.solve(b);
        out.solver = "sparselu";
    }
    out.relative_residual = residual(x);
    if (!x.allFinite() || out.relative_residual > 1e-10) {
        throw StructuralError("absorption solve missed the 1e-10 residual target");
    }
    out.tau.assign(states, 0.0);
    for (std::size_t s = 0; s < states; ++s) {
        if (s != target) out.tau[s] = x[static_cast<Eigen::Index>(transient(s))];
    }
    return out;
}

std::vector<double> first_round_distribution(const Population& population, int ell,
                                             int source_opinion) {
    const auto n = static_cast<std::int64_t>(population.size());
    if (n < 1) throw DomainError("empty population");
    const double x0 = static_cast<double>(count_ones(population)) / static_cast<double>(n);
    const std::vector<double> fresh = binomial_pmf_vector(ell, x0);
    std::vector<double> dist(static_cast<std::size_t>(n) + 1, 0.0);
    dist[0] = 1.0;
    std::int64_t seen = 0;
    for (const AgentState& agent : population) {
        double p_one = 0.0;
        if (agent.is_source) {
            p_one = source_opinion;
        } else {
            if (agent.prev_count < 0 || agent.prev_count > ell) throw DomainError("counter outside [0, ell]");
            for (int c = agent.prev_count + 1; c <= ell; ++c) p_one += fresh[c];
            if (agent.opinion == 1) p_one += fresh[agent.prev_count];
        }
        ++seen;
        for (std::int64_t j = seen; j >= 0; --j) {
            const double stay = dist[j] * (1.0 - p_one);
            const double up = j > 0 ? dist[j - 1] * p_one : 0.0;
            dist[j] = stay + up;
        }
    }
    return dist;
}

double expected_consensus_time(const Kernel& kernel, const AbsorptionTimes& times,
                               const Population& population) {
    const std::int64_t k0 = count_ones(population);
    if (k0 == kernel.n) return 0.0;
    const std::vector<double> dist = first_round_distribution(population, kernel.ell, 1);
    double expected = 0.0;
    for (std::int64_t j = 1; j <= kernel.n; ++j) expected += dist[j] * times.at(k0, j);
    return expected;
}

namespace {

BackendSummary summarize(const std::string& name, const std::vector<double>& times,
                         std::int64_t converged, double exact) {
    BackendSummary s;
    s.backend = name;
    s.trials = static_cast<std::int64_t>(times.size());
    s.converged = converged;
    s.mean = mean(times);
    s.sd = stddev(times);
    s.se = s.trials > 0 ? s.sd / std::sqrt(static_cast<double>(s.trials)) : 0.0;
    s.z = s.se > 0.0 ? (s.mean - exact) / s.se : (s.mean == exact ? 0.0 : INFINITY);
    s.rel_error = exact > 0.0 ? std::abs(s.mean - exact) / exact : std::abs(s.mean);
    s.pass = std::abs(s.z) <= 3.0 && converged == s.trials;
    return s;
}

}  // namespace

ExactCheckReport simulate_exact_check(int n, int ell, std::int64_t trials, std::uint64_t seed) {
    if (n > 64) throw UsageError("simulate_exact_check supports n <= 64");
    return simulate_exact_check(build_kernel(n, ell), trials, seed);
}

ExactCheckReport simulate_exact_check(const Kernel& kernel, std::int64_t trials, std::uint64_t seed) {
    if (kernel.n > 64) throw UsageError("simulate_exact_check supports n <= 64");
    if (trials < 2) throw UsageError("simulate_exact_check needs at least 2 trials");
    ExactCheckReport report;
    report.n = kernel.n;
    report.ell = kernel.ell;
    report.trials = trials;
    report.seed = seed;
    report.pruned_mass = kernel.pruned_mass;
    report.bad_rows = audit_kernel(kernel);

    SimConfig config;
    config.n = kernel.n;
    config.ell = kernel.ell;
    config.delta = 0.05;
    config.seed = seed;
    config.max_rounds = 1000000;
    config.persistence_rounds = 0;
    const Preset preset = Preset::parse(report.preset);
    const InitialCondition initial = init_adversarial(preset, config, 0);

    const AbsorptionTimes times = absorption_times(kernel);
    report.solver_residual = times.relative_residual;
    report.exact_mean = expected_consensus_time(kernel, times, initial.agents);

    const auto run = [&](Backend backend, std::uint64_t stream_offset) {
        SimConfig cfg = config;
        cfg.backend = backend;
        std::vector<double> hit(static_cast<std::size_t>(trials), 0.0);
        std::vector<char> ok(static_cast<std::size_t>(trials), 0);
        parallel_for(trials, [&](std::int64_t i) {
            const Trajectory traj =
                run_trial(cfg, initial, stream_offset + static_cast<std::uint64_t>(i));
            ok[i] = traj.converged_round.has_value();
            hit[i] = ok[i] ? static_cast<double>(*traj.converged_round) : static_cast<double>(cfg.max_rounds);
        });
        std::int64_t converged = 0;
        for (char c : ok) converged += c;
        return summarize(to_string(backend), hit, converged, report.exact_mean);
    };
    report.agent = run(Backend::AgentLevel, 0);
    // Disjoint trial keys so the two backends use independent streams.
    report.aggregate = run(Backend::Aggregate, static_cast<std::uint64_t>(trials));
    const double pooled = std::sqrt(report.agent.se * report.agent.se +
                                    report.aggregate.se * report.aggregate.se);
    report.backend_z = pooled > 0.0 ? (report.agent.mean - report.aggregate.mean) / pooled : 0.0;
    report.pass = report.bad_rows.empty() && report.agent.pass && report.aggregate.pass &&
                  std::abs(report.backend_z) <= 3.0;
    return report;
}

namespace {

nlohmann::json to_json(const BackendSummary& s) {
    return {{"backend", s.backend}, {"trials", s.trials},   {"converged", s.converged},
            {"mean", s.mean},       {"sd", s.sd},           {"se", s.se},
            {"ci_low", s.mean - 3.0 * s.se}, {"ci_high", s.mean + 3.0 * s.se},
            {"z", s.z},             {"rel_error", s.rel_error}, {"pass", s.pass}};
}

}  // namespace

nlohmann::json to_json(const ExactCheckReport& report) {
    nlohmann::json bad = nlohmann::json::array();
    for (const RowIssue& issue : report.bad_rows) {
        bad.push_back({{"k_t", issue.state.k_t},
                       {"k_t1", issue.state.k_t1},
                       {"row_sum", issue.row_sum},
                       {"mean", issue.mean},
                       {"expected_mean", issue.expected_mean}});
    }
    return {{"header", kChainHeader},
            {"n", report.n},
            {"ell", report.ell},
            {"trials", report.trials},
            {"seed", report.seed},
            {"preset", report.preset},
            {"exact_mean", report.exact_mean},
            {"pruned_mass", report.pruned_mass},
            {"solver_residual", report.solver_residual},
            {"bad_rows", bad},
            {"agent", to_json(report.agent)},
            {"aggregate", to_json(report.aggregate)},
            {"backend_z", report.backend_z},
            {"pass", report.pass}};
}

nlohmann::json chain_report(int n, int ell, const std::optional<PairState>& from) {
    const Kernel kernel = build_kernel(n, ell);
    const AbsorptionTimes times = absorption_times(kernel);
    nlohmann::json absorbing = nlohmann::json::array();
    for (const PairState& s : absorbing_states(kernel)) absorbing.push_back({s.k_t, s.k_t1});
    nlohmann::json out = {{"header", kChainHeader},
                          {"n", n},
                          {"ell", ell},
                          {"states", kernel.state_count()},
                          {"pruned_mass", kernel.pruned_mass},
                          {"row_issues", audit_kernel(kernel).size()},
                          {"absorbing_states", absorbing},
                          {"solver", times.solver},
                          {"relative_residual", times.relative_residual}};
    if (from) {
        if (from->k_t < 0 || from->k_t > n || from->k_t1 < 1 || from->k_t1 > n) {
            throw DomainError("--from needs 0 <= k_t <= n and 1 <= k_t1 <= n");
        }
        out["from"] = {from->k_t, from->k_t1};
        out["expected_rounds"] = times.at(from->k_t, from->k_t1);
    } else {
        nlohmann::json table = nlohmann::json::array();
        for (const KernelRow& row : kernel.rows) {
            table.push_back({row.from.k_t, row.from.k_t1, times.at(row.from.k_t, row.from.k_t1)});
        }
        out["expected_rounds_table"] = table;
    }
    return out;
}

}  // namespace fet
