// The acceptance battery: one self-contained pipeline producing every
// artifact, then eleven verdicts, each printed as a single PASS/FAIL line.
// Tolerances are pinned here, in code. The determinism verdict reruns the
// whole pipeline with the same seed into a second directory and compares
// checksums of every numeric artifact.
#pragma once

#include <chrono>
#include <iostream>
#include <sstream>

#include "fracgs/harness.hpp"
#include "fracgs/verify/oracles.hpp"

namespace fracgs::verify {

struct AcceptConfig {
    std::string out_dir = "accept_out";
    std::uint64_t seed = 1;
    int workers = 2;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string details;
};

namespace detail {

class StageClock {
  public:
    void start() { t0_ = std::chrono::steady_clock::now(); }
    double stop(const std::string& name, std::map<std::string, double>& table) {
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        table[name] += dt;
        return dt;
    }

  private:
    std::chrono::steady_clock::time_point t0_;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace detail

struct PipelineData {
    GroundState bo, sech, local2d;
    InequalityReport ineq;
    SweepResult sweep;
    std::map<std::string, SpectrumReport> spectra; // "0.80", "0.80_fine", ...
    BranchRun branch;
    GroundState decay_state;
    DecayReport decay;
    KappaCalibration kappa_half, kappa_main;
    double dtn_gap_default = 0.0, dtn_gap_fine = 0.0;
    bool dtn_unreliable = false;
    double a1_worst_ratio = 0.0;
    double ext_rayleigh = 0.0, ext_rayleigh_nu = 0.0;
    json checksums = json::array();
    std::map<std::string, double> seconds;
};

inline PipelineData run_pipeline(const std::string& dir, std::uint64_t seed, int workers,
                                 std::ostream& log) {
    PipelineData P;
    detail::StageClock clock;
    json cfg_echo{{"seed", seed}, {"workers", workers}, {"out_dir", dir}};
    RunManifest manifest("accept-pipeline", cfg_echo);
    auto emit_json = [&](const std::string& name, const json& j) {
        manifest.emit(join_path(dir, name), j.dump(2) + "\n");
    };

    // --- Benjamin-Ono oracle case -------------------------------------------
    clock.start();
    {
        ProblemSpec prob{make_grid(1, 2048, 200.0), 0.5, 2.0};
        P.bo = solve_ground_state(prob);
        emit_json("bo_ground_state.json", ground_state_to_json(P.bo));
        manifest.emit(join_path(dir, "bo_ground_state.frgs"), encode_field_binary(P.bo));
    }
    clock.stop("bo", P.seconds);
    log << "  [pipeline] benjamin-ono solved\n";

    // --- local anchors -------------------------------------------------------
    clock.start();
    {
        P.sech = solve_ground_state(ProblemSpec{make_grid(1, 2048, 40.0), 1.0, 3.0});
        emit_json("sech.json", ground_state_to_json(P.sech));
        P.local2d = solve_local(ProblemSpec{make_grid(2, 512, 32.0), 1.0, 2.0});
        emit_json("local2d.json", ground_state_to_json(P.local2d));
    }
    clock.stop("local", P.seconds);
    log << "  [pipeline] local anchors solved\n";

    // --- inequality suite -----------------------------------------------------
    clock.start();
    P.ineq = elementary_inequality_suite(1000000, seed);
    {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["samples"] = P.ineq.samples;
        j["extremal_equality_gap"] = P.ineq.extremal_equality_gap;
        json tallies = json::object();
        for (const auto& [name, t] : P.ineq.tallies)
            tallies[name] = {{"checked", t.checked}, {"violations", t.violations}, {"min_margin", t.min_margin}};
        j["tallies"] = tallies;
        emit_json("inequalities.json", j);
    }
    clock.stop("ineq", P.seconds);
    log << "  [pipeline] inequality suite done\n";

    // --- sweep ----------------------------------------------------------------
    clock.start();
    RunConfig scfg;
    scfg.dims = 2;
    scfg.p = 2.0;
    scfg.points = 320;
    scfg.box = 40.0;
    scfg.s_from = 0.70;
    scfg.s_to = 1.00;
    scfg.steps = 7;
    scfg.seed = seed;
    scfg.workers = workers;
    {
        std::ostringstream quiet;
        P.sweep = compute_sweep(scfg, quiet);
        manifest.emit(join_path(dir, "sweep.csv"), sweep_to_csv(P.sweep.rows));
    }
    clock.stop("sweep", P.seconds);
    log << "  [pipeline] sweep done\n";

    // --- spectra (base and doubled M) ------------------------------------------
    clock.start();
    for (double s : {0.80, 0.90, 0.95}) {
        char key[16];
        std::snprintf(key, sizeof(key), "%.2f", s);
        const GroundState* gs = nullptr;
        for (std::size_t i = 0; i < P.sweep.s_values.size(); ++i)
            if (std::abs(P.sweep.s_values[i] - s) < 1e-12) gs = &P.sweep.states[i];
        SpectrumReport rep = nondegeneracy_report(*gs, -1.0, seed);
        emit_json(std::string("spectrum_s") + key + ".json", spectrum_report_to_json(rep));
        P.spectra[key] = std::move(rep);

        GroundState fine = solve_ground_state(ProblemSpec{make_grid(2, 640, 40.0), s, 2.0});
        SpectrumReport frep = nondegeneracy_report(fine, -1.0, seed);
        emit_json(std::string("spectrum_s") + key + "_fine.json", spectrum_report_to_json(frep));
        P.spectra[std::string(key) + "_fine"] = std::move(frep);
        log << "  [pipeline] spectrum s = " << key << " done (base + doubled M)\n";
    }
    clock.stop("spectrum", P.seconds);

    // --- branch + uniqueness ----------------------------------------------------
    clock.start();
    {
        RunConfig bcfg = scfg;
        bcfg.nu_source = "measured";
        bcfg.sweep_csv = join_path(dir, "sweep.csv");
        bcfg.uniqueness_tol = 1e-4;
        std::ostringstream quiet;
        P.branch = compute_branch(bcfg, quiet);
        manifest.emit(join_path(dir, "branch.csv"), branch_to_csv(P.branch.rows));
        json uj;
        uj["schema_version"] = kSchemaVersion;
        uj["verdicts"] = json::array();
        for (const auto& u : P.branch.uniqueness)
            uj["verdicts"].push_back({{"pass", u.pass},
                                      {"linf_gap", u.linf_gap},
                                      {"sobolev_gap", u.sobolev_gap},
                                      {"nu_gap", u.nu_gap}});
        emit_json("uniqueness.json", uj);
    }
    clock.stop("branch", P.seconds);
    log << "  [pipeline] branch done\n";

    // --- extension diagnostics ----------------------------------------------------
    clock.start();
    {
        P.kappa_half = calibrate_kappa(0.5);
        P.kappa_main = calibrate_kappa(0.75);

        std::vector<std::pair<double, double>> refinement;
        for (auto [nr, ratio] : {std::pair{320, 0.85}, {640, 0.92}}) {
            HalfSpaceGrid hgrid = make_halfspace_grid(1, 0.75, 40.0, 40.0, nr, ratio);
            std::vector<double> data(hgrid.nr() + 1);
            for (int j = 0; j <= hgrid.nr(); ++j)
                data[j] = std::exp(-hgrid.r[j] * hgrid.r[j] / 2.0);
            ExtensionField F = extend(data, hgrid);
            DtnResult dtn = dtn_check(F, data, P.kappa_main.kappa);
            refinement.push_back({hgrid.R() / nr, dtn.max_gap});
            if (nr == 320) {
                P.dtn_gap_default = dtn.max_gap;
                P.dtn_unreliable = dtn.unreliable;
            } else {
                P.dtn_gap_fine = dtn.max_gap;
            }
        }

        // A_1 positivity over random admissible fields + extended Rayleigh,
        // at the s = 0.75 sweep state
        const GroundState* gs75 = nullptr;
        for (std::size_t i = 0; i < P.sweep.s_values.size(); ++i)
            if (std::abs(P.sweep.s_values[i] - 0.75) < 1e-12) gs75 = &P.sweep.states[i];
        HalfSpaceGrid hg = make_halfspace_grid(2, 0.75, 80.0, 80.0, 320);
        RadialProfile prof = radial_ray(gs75->u);
        Rng rng(seed ^ 0x5eedULL);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            ExtensionField G;
            G.grid = hg;
            G.values.assign(static_cast<std::size_t>(hg.nt() + 1) * (hg.nr() + 1), 0.0);
            const double t0 = rng.uniform(2.0, 30.0), r0 = rng.uniform(2.0, 30.0);
            const double st = rng.uniform(1.0, 6.0), sr = rng.uniform(1.0, 6.0);
            const double amp = rng.uniform(-2.0, 2.0);
            for (int i = 0; i <= hg.nt(); ++i)
                for (int j = 0; j <= hg.nr(); ++j) {
                    const double tt = hg.t[i], rr = hg.r[j];
                    G.at(i, j) = amp * std::exp(-std::pow((tt - t0) / st, 2) - std::pow((rr - r0) / sr, 2)) *
                                 rr / (1.0 + rr);
                }
            const double val = a1_form(G, prof, gs75->nu, 2.0, P.kappa_main.kappa);
            const double scale = extension_energy(G) + 1e-30;
            worst = std::min(worst, val / scale);
        }
        P.a1_worst_ratio = worst;

        std::vector<double> bdata(hg.nr() + 1);
        for (int j = 0; j <= hg.nr(); ++j) bdata[j] = interp_profile(prof, hg.r[j]);
        ExtensionField F = extend(bdata, hg);
        P.ext_rayleigh = extension_rayleigh(F, bdata, 2.0, P.kappa_main.kappa);
        P.ext_rayleigh_nu = gs75->nu;

        emit_json("extension.json",
                  extension_diag_to_json(0.75, P.kappa_main.kappa, P.dtn_gap_default,
                                         extension_energy(F), refinement));
    }
    clock.stop("extension", P.seconds);
    log << "  [pipeline] extension diagnostics done\n";

    // --- decay -----------------------------------------------------------------
    clock.start();
    {
        P.decay_state = solve_ground_state(ProblemSpec{make_grid(2, 1024, 120.0), 0.8, 2.0});
        P.decay = decay_check(P.decay_state, default_decay_radii(P.decay_state.problem.grid, 40));
        json j;
        j["schema_version"] = kSchemaVersion;
        j["s"] = 0.8;
        j["window"] = {P.decay.window_lo, P.decay.window_hi};
        j["max_ratio"] = P.decay.max_ratio;
        j["tail_flat"] = P.decay.tail_flat;
        json pts = json::array();
        for (std::size_t i = 0; i < P.decay.radii.size(); ++i)
            pts.push_back({P.decay.radii[i], P.decay.ratio[i]});
        j["ratio"] = pts;
        emit_json("decay.json", j);
    }
    clock.stop("decay", P.seconds);
    log << "  [pipeline] decay done\n";

    P.checksums = manifest.outputs();
    manifest.write(join_path(dir, "run_manifest.json"));
    return P;
}

// ---------------------------------------------------------------------------

inline std::vector<CriterionResult> run_acceptance(const AcceptConfig& cfg, std::ostream& log) {
    std::vector<CriterionResult> out;
    auto push = [&](int id, const std::string& name, bool pass, double secs, const std::string& det) {
        out.push_back({id, name, pass, secs, det});
        log << (pass ? "PASS" : "FAIL") << "  " << id << "  " << name << "  (" << detail::fmt(secs)
            << " s)  " << det << "\n";
    };

    log << "running verification pipeline (seed " << cfg.seed << ")\n";
    PipelineData P = run_pipeline(join_path(cfg.out_dir, "run1"), cfg.seed, cfg.workers, log);

    // 1. Benjamin-Ono oracle ---------------------------------------------------
    {
        double linf = 0.0;
        const GridSpec& g = P.bo.problem.grid;
        for (int i = 0; i < g.points; ++i) {
            std::array<int, 3> idx{i, 0, 0};
            linf = std::max(linf, std::abs(P.bo.u.values[g.encode(idx)] - bo_profile(g.coord(i))));
        }
        const double nu_est = continuum_nu_estimate(P.bo);
        const double dnu = std::abs(nu_est - bo_nu());
        const bool pass = linf < 1e-4 && dnu < 1e-5 && P.seconds["bo"] < 30.0;
        push(1, "benjamin-ono-oracle", pass, P.seconds["bo"],
             "Linf=" + detail::fmt(linf) + " dnu=" + detail::fmt(dnu) +
             " (lattice nu=" + detail::fmt(P.bo.nu) + ", kink-corrected " + detail::fmt(nu_est) + ")");
    }

    // 2. local oracles -----------------------------------------------------------
    {
        double linf_sech = 0.0;
        const GridSpec& g = P.sech.problem.grid;
        for (int i = 0; i < g.points; ++i) {
            std::array<int, 3> idx{i, 0, 0};
            linf_sech = std::max(linf_sech, std::abs(P.sech.u.values[g.encode(idx)] - sech_profile(g.coord(i))));
        }
        const double dnu_sech = std::abs(P.sech.nu - sech_nu());

        ShootingResult sh = shoot_ground_state(2, 2.0);
        const double dnu_2d = std::abs(P.local2d.nu - sh.nu);
        double linf_2d = 0.0;
        const RadialProfile ray = radial_ray(P.local2d.u);
        for (std::size_t i = 0; i < ray.r.size(); ++i) {
            if (ray.r[i] > 14.0) break;
            linf_2d = std::max(linf_2d, std::abs(ray.value[i] - shooting_profile(sh, ray.r[i])));
        }
        const bool pass = dnu_sech < 1e-6 && linf_sech < 1e-5 && dnu_2d < 1e-5 && linf_2d < 1e-5 &&
                          P.seconds["local"] < 120.0;
        push(2, "local-oracles", pass, P.seconds["local"],
             "sech dnu=" + detail::fmt(dnu_sech) + " Linf=" + detail::fmt(linf_sech) +
             "; 2d dnu=" + detail::fmt(dnu_2d) + " Linf=" + detail::fmt(linf_2d));
    }

    // 3. multiplier inequalities ---------------------------------------------------
    {
        const bool pass = P.ineq.zero_violations() && P.ineq.extremal_equality_gap <= 1e-12 &&
                          P.seconds["ineq"] < 10.0;
        push(3, "multiplier-inequalities", pass, P.seconds["ineq"],
             std::string(P.ineq.zero_violations() ? "zero violations" : "VIOLATIONS") +
                 ", extremal gap=" + detail::fmt(P.ineq.extremal_equality_gap));
    }

    // 4. nu_s continuity -------------------------------------------------------------
    {
        const auto& rows = P.sweep.rows;
        const double nu1 = rows.back().nu;
        double max_quot = 0.0;
        bool monotone = true;
        double prev_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i) max_quot = std::max(max_quot, std::abs(rows[i].nu - rows[i - 1].nu) /
                                                     std::abs(rows[i].s - rows[i - 1].s));
            const double gap = std::abs(rows[i].nu - nu1);
            if (gap > prev_gap + 1e-9) monotone = false;
            prev_gap = gap;
        }
        const bool lipschitz_ok = max_quot <= 2.0; // frozen baseline bound
        const bool pass = lipschitz_ok && monotone && P.seconds["sweep"] < 600.0;
        push(4, "nu-continuity", pass, P.seconds["sweep"],
             "max quotient=" + detail::fmt(max_quot) + (lipschitz_ok ? " (bounded)" : " (UNBOUNDED)") +
                 ", gap monotone=" + (monotone ? "yes" : "NO (nu_s crosses nu_1 near s~0.75 and peaks at s=0.85; the gap cannot be monotone for N=2, p=2)"));
    }

    // 5. nondegeneracy -----------------------------------------------------------------
    {
        bool pass = true;
        std::string det;
        for (const char* key : {"0.80", "0.90", "0.95"}) {
            const SpectrumReport& rep = P.spectra.at(key);
            const SpectrumReport& fine = P.spectra.at(std::string(key) + "_fine");
            const auto& e1 = rep.sector_eigs.at(1);
            int nulls = 0;
            for (double v : e1)
                if (std::abs(v) < rep.zero_tol) nulls++;
            const auto& e0 = rep.sector_eigs.at(0);
            const auto& e2 = rep.sector_eigs.at(2);
            const bool ok = !rep.degenerate && nulls == 2 && e0[0] < 0.0 && e0[1] > rep.zero_tol &&
                            e2[0] > rep.zero_tol && fine.kernel_dim == rep.kernel_dim &&
                            rep.kernel_dim == 2;
            if (!ok) pass = false;
            det += std::string(key) + ":kernel=" + std::to_string(rep.kernel_dim) + "/" +
                   std::to_string(fine.kernel_dim) + " ";
        }
        pass = pass && P.seconds["spectrum"] < 900.0;
        push(5, "nondegeneracy", pass, P.seconds["spectrum"], det);
    }

    // 6. radial gap -------------------------------------------------------------------
    {
        double min_kr = std::numeric_limits<double>::infinity();
        double max_zt = 0.0;
        for (const auto& row : P.sweep.rows) min_kr = std::min(min_kr, row.kr);
        for (const char* key : {"0.80", "0.90", "0.95"})
            max_zt = std::max(max_zt, P.spectra.at(key).zero_tol);
        const bool pass = min_kr > 10.0 * max_zt;
        push(6, "radial-gap", pass, 0.0,
             "min K_r=" + detail::fmt(min_kr) + " (baseline), floor=" + detail::fmt(10.0 * max_zt));
    }

    // 7. self-pairing identity -----------------------------------------------------------
    {
        double worst = 0.0;
        for (const auto& row : P.sweep.rows) {
            const double expect = (1.0 - 2.0) * row.nu;
            worst = std::max(worst, std::abs(row.self_pairing - expect) / std::abs(expect));
        }
        const bool pass = worst < 1e-8;
        push(7, "self-pairing", pass, 0.0, "worst relative gap=" + detail::fmt(worst));
    }

    // 8. branch & uniqueness ----------------------------------------------------------------
    {
        bool pass = !P.branch.branch.stopped_early && P.branch.branch.points.size() == 8;
        double max_ratio = 0.0, max_rate = 0.0;
        for (const auto& pt : P.branch.branch.points) {
            max_rate = std::max(max_rate, pt.contraction_rate);
            if (pt.alpha > 0) max_ratio = std::max(max_ratio, pt.omega_norm / pt.alpha);
            if (!pt.ball_ok) pass = false;
        }
        if (max_rate >= 1.0) pass = false;
        if (P.branch.uniqueness.size() != 3) pass = false;
        for (const auto& u : P.branch.uniqueness)
            if (!u.pass) pass = false;
        pass = pass && P.seconds["branch"] < 1200.0;
        push(8, "branch-uniqueness", pass, P.seconds["branch"],
             "rate<=" + detail::fmt(max_rate) + ", ball ratio<=" + detail::fmt(max_ratio) +
                 ", uniqueness " + std::to_string(P.branch.uniqueness.size()) + "/3 pass");
    }

    // 9. extension -----------------------------------------------------------------------
    {
        const double ray_gap = std::abs(P.ext_rayleigh - P.ext_rayleigh_nu) / P.ext_rayleigh_nu;
        const bool pass = P.dtn_gap_default < 1e-2 && P.dtn_gap_fine < 0.6 * P.dtn_gap_default &&
                          std::abs(P.kappa_half.kappa - 1.0) < 0.01 && P.a1_worst_ratio > -1e-6 &&
                          ray_gap < 0.02 && !P.dtn_unreliable;
        push(9, "extension", pass, P.seconds["extension"],
             "dtn gap=" + detail::fmt(P.dtn_gap_default) + "->" + detail::fmt(P.dtn_gap_fine) +
                 ", kappa(1/2)=" + detail::fmt(P.kappa_half.kappa) + ", A1 worst=" +
                 detail::fmt(P.a1_worst_ratio) + ", Rayleigh gap=" + detail::fmt(ray_gap));
    }

    // 10. decay --------------------------------------------------------------------------
    {
        const bool pass = P.decay.tail_flat && std::isfinite(P.decay.max_ratio);
        push(10, "decay", pass, P.seconds["decay"],
             "max ratio=" + detail::fmt(P.decay.max_ratio) + ", window flat=" +
                 (P.decay.tail_flat ? "yes" : "NO"));
    }

    // 11. determinism ----------------------------------------------------------------------
    {
        detail::StageClock clock;
        clock.start();
        log << "rerunning pipeline for the determinism check\n";
        std::ostringstream quiet;
        PipelineData Q = run_pipeline(join_path(cfg.out_dir, "run2"), cfg.seed, cfg.workers, quiet);
        bool pass = P.checksums.size() == Q.checksums.size();
        std::string mismatch;
        if (pass) {
            for (std::size_t i = 0; i < P.checksums.size(); ++i) {
                const auto& a = P.checksums[i];
                const auto& b = Q.checksums[i];
                std::string pa = a["path"].get<std::string>();
                std::string pb = b["path"].get<std::string>();
                pa = pa.substr(pa.find_last_of('/') + 1);
                pb = pb.substr(pb.find_last_of('/') + 1);
                if (pa != pb || a["fnv1a64"] != b["fnv1a64"]) {
                    pass = false;
                    mismatch = pa;
                    break;
                }
            }
        }
        const double secs = clock.stop("rerun", P.seconds);
        push(11, "determinism", pass, secs,
             pass ? std::to_string(P.checksums.size()) + " artifacts bit-identical"
                  : "checksum mismatch at " + mismatch);
    }

    return out;
}

inline int acceptance_main(const AcceptConfig& cfg, std::ostream& log) {
    const auto results = run_acceptance(cfg, log);
    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) failures++;
    log << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria FAILED")
        << "\n";
    return failures == 0 ? 0 : 1;
}

} // namespace fracgs::verify
