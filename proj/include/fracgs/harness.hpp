// Run configuration, config-file parsing, and the command implementations
// behind the CLI: solve, sweep, spectrum, branch, extend-check, ineq-suite.
// Each command validates its inputs up front, computes, and writes artifacts
// plus a manifest through RunManifest. Exit conventions: 0 success, 1
// numerical failure, 2 invalid configuration.
#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fracgs/inequalities.hpp"
#include "fracgs/io.hpp"

namespace fracgs {

struct RunConfig {
    int dims = 2;
    double s = 0.8;
    double p = 2.0;
    int points = 320; // default grid resolves every order in (0,1] at tol 1e-9
    double box = 40.0;
    double s_from = 0.70, s_to = 1.00;
    int steps = 7;
    std::vector<double> branch_s = {1.0, 0.99, 0.98, 0.96, 0.95, 0.94, 0.92, 0.90};
    std::vector<double> uniqueness_s = {0.95, 0.92, 0.90};
    std::string nu_source = "measured"; // "measured" (sweep table) or "direct"
    std::string sweep_csv;              // optional table for measured mode
    double r0 = 10.0;
    double zero_tol = -1.0; // negative: default (1e-5 of the ell=0 gap)
    long samples = 1000000;
    std::uint64_t seed = 1;
    int workers = 2;
    std::string out_dir = "out";
    double residual_tol = 1e-9;
    double step_tol = 1e-10;
    double init_width = 1.0;
    double uniqueness_tol = 1e-4;
};

// Plain line-oriented "key = value" config files; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::istringstream in(read_file(path));
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r\n";
        const auto a = s.find_first_not_of(ws);
        const auto b = s.find_last_not_of(ws);
        return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dims") cfg.dims = std::stoi(value);
    else if (key == "s") cfg.s = std::stod(value);
    else if (key == "p") cfg.p = std::stod(value);
    else if (key == "points") cfg.points = std::stoi(value);
    else if (key == "box") cfg.box = std::stod(value);
    else if (key == "s_from") cfg.s_from = std::stod(value);
    else if (key == "s_to") cfg.s_to = std::stod(value);
    else if (key == "steps") cfg.steps = std::stoi(value);
    else if (key == "branch_s") cfg.branch_s = parse_double_list(value);
    else if (key == "uniqueness_s") cfg.uniqueness_s = parse_double_list(value);
    else if (key == "nu_source") cfg.nu_source = value;
    else if (key == "sweep_csv") cfg.sweep_csv = value;
    else if (key == "r0") cfg.r0 = std::stod(value);
    else if (key == "zero_tol") cfg.zero_tol = std::stod(value);
    else if (key == "samples") cfg.samples = std::stol(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "workers") cfg.workers = std::stoi(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "residual_tol") cfg.residual_tol = std::stod(value);
    else if (key == "step_tol") cfg.step_tol = std::stod(value);
    else if (key == "init_width") cfg.init_width = std::stod(value);
    else if (key == "uniqueness_tol") cfg.uniqueness_tol = std::stod(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

inline void apply_environment(RunConfig& cfg) {
    if (const char* dir = std::getenv("OUTPUT_DIR")) cfg.out_dir = dir;
}

inline void validate_common(const RunConfig& cfg) {
    if (cfg.dims < 1 || cfg.dims > 3) throw std::invalid_argument("dims must be 1, 2 or 3");
    if (!(cfg.s > 0.0) || cfg.s > 1.0) throw std::invalid_argument("s must lie in (0,1]");
    if (!(cfg.p > 1.0)) throw std::invalid_argument("p must exceed 1");
    if (cfg.points < 2 || cfg.points % 2) throw std::invalid_argument("M must be even");
    if (!(cfg.box > 0)) throw std::invalid_argument("L must be positive");
    if (cfg.workers < 1 || cfg.workers > 64) throw std::invalid_argument("workers must lie in [1,64]");
    if (cfg.nu_source != "measured" && cfg.nu_source != "direct")
        throw std::invalid_argument("nu_source must be 'measured' or 'direct'");
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline json config_echo(const RunConfig& cfg) {
    json j;
    j["dims"] = cfg.dims;
    j["s"] = cfg.s;
    j["p"] = cfg.p;
    j["points"] = cfg.points;
    j["box"] = cfg.box;
    j["s_from"] = cfg.s_from;
    j["s_to"] = cfg.s_to;
    j["steps"] = cfg.steps;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["out_dir"] = cfg.out_dir;
    j["nu_source"] = cfg.nu_source;
    j["r0"] = cfg.r0;
    return j;
}

inline SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    o.residual_tol = cfg.residual_tol;
    o.step_tol = cfg.step_tol;
    o.init_width = cfg.init_width;
    return o;
}

// ---------------------------------------------------------------------------
// solve

inline int run_solve(const RunConfig& cfg, std::ostream& log = std::cout) {
    validate_common(cfg);
    ProblemSpec prob{make_grid(cfg.dims, cfg.points, cfg.box), cfg.s, cfg.p};
    validate(prob);
    RunManifest manifest("solve", config_echo(cfg));
    GroundState gs = solve_ground_state(prob, nullptr, solver_options(cfg));
    const json j = ground_state_to_json(gs);
    validate_against_schema(j, json::parse(ground_state_schema()));
    manifest.emit(join_path(cfg.out_dir, "ground_state.json"), j.dump(2) + "\n");
    manifest.emit(join_path(cfg.out_dir, "ground_state.frgs"), encode_field_binary(gs));
    manifest.record_task("solve", "ok");
    manifest.write(join_path(cfg.out_dir, "run_manifest.json"));
    log << "nu = " << format_g17(gs.nu) << "  residual = " << format_g17(gs.residual)
        << "  iterations = " << gs.iterations << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep: nu_s / K_r table over an s-grid, workers share nothing, results
// merged in s-order.

struct SweepResult {
    std::vector<SweepRow> rows;
    GroundState anchor; // s = 1 state on the same grid
    std::vector<GroundState> states;
    std::vector<double> s_values;
};

inline SweepResult compute_sweep(const RunConfig& cfg, std::ostream& log = std::cout) {
    validate_common(cfg);
    if (cfg.steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
    if (!(cfg.s_from > 0) || cfg.s_from > cfg.s_to || cfg.s_to > 1.0)
        throw std::invalid_argument("sweep range must satisfy 0 < s_from <= s_to <= 1");

    SweepResult out;
    for (int i = 0; i < cfg.steps; ++i)
        out.s_values.push_back(cfg.s_from + (cfg.s_to - cfg.s_from) * i / (cfg.steps - 1));

    const GridSpec grid = make_grid(cfg.dims, cfg.points, cfg.box);
    ProblemSpec anchor_prob{grid, 1.0, cfg.p};
    out.anchor = solve_local(anchor_prob, nullptr, solver_options(cfg));

    out.states.resize(out.s_values.size());
    out.rows.resize(out.s_values.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= out.s_values.size() || failed.load()) return;
            try {
                const double s = out.s_values[i];
                GroundState gs = (s == 1.0) ? out.anchor
                                            : solve_ground_state(ProblemSpec{grid, s, cfg.p}, nullptr,
                                                                 solver_options(cfg));
                SweepRow row;
                row.s = s;
                row.nu = gs.nu;
                row.kr = radial_spectral_gap(gs, cfg.seed + 1000 + i);
                row.self_pairing = quadratic_form(gs, gs.u, gs.u);
                row.residual = gs.residual;
                row.iterations = gs.iterations;
                row.lp1_norm = gs.lp1_norm;
                row.linf = linf_norm(gs.u);
                RealField diff = gs.u - out.anchor.u;
                row.l2_gap_to_anchor = l2_norm(diff);
                out.rows[i] = row;
                out.states[i] = std::move(gs);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed = true;
                failure = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nworkers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(out.s_values.size())));
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed) throw std::runtime_error("sweep point failed: " + failure);

    for (const auto& row : out.rows)
        log << "s = " << row.s << "  nu = " << format_g17(row.nu) << "  K_r = " << format_g17(row.kr)
            << "\n";
    return out;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& log = std::cout) {
    RunManifest manifest("sweep", config_echo(cfg));
    SweepResult res = compute_sweep(cfg, log);
    manifest.emit(join_path(cfg.out_dir, "sweep.csv"), sweep_to_csv(res.rows));
    manifest.record_task("sweep", "ok");
    manifest.write(join_path(cfg.out_dir, "run_manifest.json"));
    return 0;
}

// ---------------------------------------------------------------------------
// spectrum

inline int run_spectrum(const RunConfig& cfg, std::ostream& log = std::cout) {
    validate_common(cfg);
    ProblemSpec prob{make_grid(cfg.dims, cfg.points, cfg.box), cfg.s, cfg.p};
    validate(prob);
    RunManifest manifest("spectrum", config_echo(cfg));
    GroundState gs = solve_ground_state(prob, nullptr, solver_options(cfg));
    SpectrumReport rep = nondegeneracy_report(gs, cfg.zero_tol, cfg.seed);
    const json j = spectrum_report_to_json(rep);
    validate_against_schema(j, json::parse(spectrum_schema()));
    manifest.emit(join_path(cfg.out_dir, "spectrum.json"), j.dump(2) + "\n");
    manifest.record_task("spectrum", rep.degenerate ? "degenerate" : "ok");
    manifest.write(join_path(cfg.out_dir, "run_manifest.json"));
    log << "kernel_dim = " << rep.kernel_dim << "  K_r = " << format_g17(rep.K_r)
        << (rep.degenerate ? "  " + rep.note : "") << "\n";
    return rep.degenerate ? 1 : 0;
}

// ---------------------------------------------------------------------------
// branch

struct BranchRun {
    Branch branch;
    std::vector<BranchRow> rows;
    std::vector<UniquenessReport> uniqueness;
    bool all_pass = true;
};

inline BranchRun compute_branch(const RunConfig& cfg, std::ostream& log = std::cout) {
    validate_common(cfg);
    const GridSpec grid = make_grid(cfg.dims, cfg.points, cfg.box);
    ContinuationContext ctx =
        make_continuation_context(solve_local(ProblemSpec{grid, 1.0, cfg.p}, nullptr, solver_options(cfg)));

    // nu table: measured from a sweep artifact when supplied, otherwise
    // direct solves (cached so the uniqueness comparison reuses them).
    std::map<double, double> measured;
    if (cfg.nu_source == "measured" && !cfg.sweep_csv.empty()) {
        std::istringstream in(read_file(cfg.sweep_csv));
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string tok;
            std::getline(ls, tok, ',');
            const double s = std::stod(tok);
            std::getline(ls, tok, ',');
            measured[s] = std::stod(tok);
        }
    }
    std::map<double, GroundState> direct;
    auto direct_solve = [&](double s) -> const GroundState& {
        auto it = direct.find(s);
        if (it == direct.end()) {
            GroundState gs = (s == 1.0) ? ctx.anchor
                                        : solve_ground_state(ProblemSpec{grid, s, cfg.p}, nullptr,
                                                             solver_options(cfg));
            it = direct.emplace(s, std::move(gs)).first;
        }
        return it->second;
    };
    auto nu_provider = [&](double s) {
        auto it = measured.find(s);
        if (it != measured.end()) return it->second;
        return direct_solve(s).nu;
    };

    BranchOptions bopts;
    bopts.r0 = cfg.r0;
    BranchRun run;
    run.branch = trace_branch(ctx, cfg.branch_s, nu_provider, bopts);

    for (const auto& pt : run.branch.points) {
        BranchRow row;
        row.s = pt.s;
        row.nu_s = pt.nu_used;
        row.omega_norm = pt.omega_norm;
        row.alpha = pt.alpha;
        row.ratio = (pt.alpha > 0) ? pt.omega_norm / pt.alpha : 0.0;
        row.contraction_rate = pt.contraction_rate;
        row.fixed_point_residual = pt.fixed_point_residual;
        const GroundState& d = direct_solve(pt.s);
        UniquenessReport u = uniqueness_test(ctx, d, pt, cfg.uniqueness_tol);
        row.linf_gap_vs_direct = u.linf_gap;
        run.rows.push_back(row);
        log << "branch s = " << pt.s << "  |omega|_s = " << format_g17(pt.omega_norm)
            << "  rate = " << format_g17(pt.contraction_rate) << "  gap = " << format_g17(u.linf_gap)
            << "\n";
    }
    for (double s : cfg.uniqueness_s) {
        const BranchPoint* pt = nullptr;
        for (const auto& q : run.branch.points)
            if (std::abs(q.s - s) < 1e-12) pt = &q;
        if (!pt) continue;
        UniquenessReport u = uniqueness_test(ctx, direct_solve(s), *pt, cfg.uniqueness_tol);
        run.uniqueness.push_back(u);
        run.all_pass = run.all_pass && u.pass;
        log << "uniqueness s = " << s << (u.pass ? "  PASS" : "  FAIL")
            << "  linf = " << format_g17(u.linf_gap) << "  nu gap = " << format_g17(u.nu_gap) << "\n";
    }
    if (run.branch.stopped_early) log << "branch stopped early: " << run.branch.stop_reason << "\n";
    return run;
}

inline int run_branch(const RunConfig& cfg, std::ostream& log = std::cout) {
    RunManifest manifest("branch", config_echo(cfg));
    BranchRun run = compute_branch(cfg, log);
    manifest.emit(join_path(cfg.out_dir, "branch.csv"), branch_to_csv(run.rows));
    json uj;
    uj["schema_version"] = kSchemaVersion;
    uj["verdicts"] = json::array();
    for (const auto& u : run.uniqueness)
        uj["verdicts"].push_back({{"pass", u.pass},
                                  {"linf_gap", u.linf_gap},
                                  {"sobolev_gap", u.sobolev_gap},
                                  {"nu_gap", u.nu_gap},
                                  {"tol", u.tol}});
    manifest.emit(join_path(cfg.out_dir, "uniqueness.json"), uj.dump(2) + "\n");
    manifest.record_task("branch", run.branch.stopped_early ? "partial" : "ok");
    manifest.write(join_path(cfg.out_dir, "run_manifest.json"));
    return run.all_pass && !run.branch.stopped_early ? 0 : 1;
}

// ---------------------------------------------------------------------------
// extend-check

inline int run_extend_check(const RunConfig& cfg, std::ostream& log = std::cout) {
    validate_common(cfg);
    if (cfg.s >= 1.0) throw std::invalid_argument("extend-check requires s in (0,1)");
    RunManifest manifest("extend-check", config_echo(cfg));

    KappaCalibration cal = calibrate_kappa(cfg.s);
    std::vector<std::pair<double, double>> refinement;
    double default_gap = 0.0, default_energy = 0.0;
    for (auto [nr, ratio] : {std::pair{160, 0.80}, {320, 0.85}, {640, 0.92}}) {
        HalfSpaceGrid grid = make_halfspace_grid(1, cfg.s, 40.0, 40.0, nr, ratio);
        std::vector<double> data(grid.nr() + 1);
        for (int j = 0; j <= grid.nr(); ++j)
            data[j] = std::exp(-grid.r[j] * grid.r[j] / 2.0);
        ExtensionField F = extend(data, grid);
        DtnResult dtn = dtn_check(F, data, cal.kappa);
        refinement.push_back({grid.R() / nr, dtn.max_gap});
        if (nr == 320) {
            default_gap = dtn.max_gap;
            default_energy = extension_energy(F);
        }
    }
    const json j = extension_diag_to_json(cfg.s, cal.kappa, default_gap, default_energy, refinement);
    validate_against_schema(j, json::parse(extension_schema()));
    manifest.emit(join_path(cfg.out_dir, "extension.json"), j.dump(2) + "\n");
    manifest.record_task("extend-check", cal.grid_inadequate ? "grid-inadequate" : "ok");
    manifest.write(join_path(cfg.out_dir, "run_manifest.json"));
    log << "kappa = " << format_g17(cal.kappa) << " (spread " << format_g17(cal.spread)
        << ")  max_gap = " << format_g17(default_gap) << "\n";
    return cal.grid_inadequate ? 1 : 0;
}

// ---------------------------------------------------------------------------
// ineq-suite

inline int run_ineq_suite(const RunConfig& cfg, std::ostream& log = std::cout) {
    if (cfg.samples < 1) throw std::invalid_argument("samples must be >= 1");
    RunManifest manifest("ineq-suite", config_echo(cfg));
    InequalityReport rep = elementary_inequality_suite(cfg.samples, cfg.seed);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["samples"] = rep.samples;
    j["seed"] = rep.seed;
    j["extremal_equality_gap"] = rep.extremal_equality_gap;
    json tallies = json::object();
    for (const auto& [name, t] : rep.tallies)
        tallies[name] = {{"checked", t.checked}, {"violations", t.violations}, {"min_margin", t.min_margin}};
    j["tallies"] = tallies;
    j["zero_violations"] = rep.zero_violations();
    manifest.emit(join_path(cfg.out_dir, "inequalities.json"), j.dump(2) + "\n");
    manifest.record_task("ineq-suite", rep.zero_violations() ? "ok" : "violations");
    manifest.write(join_path(cfg.out_dir, "run_manifest.json"));
    log << (rep.zero_violations() ? "zero violations" : "VIOLATIONS FOUND") << " over "
        << rep.samples << " samples\n";
    return rep.zero_violations() ? 0 : 1;
}

} // namespace fracgs
