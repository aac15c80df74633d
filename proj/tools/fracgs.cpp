// Command-line front end: solve | sweep | spectrum | branch | extend-check |
// ineq-suite | accept. Configuration comes from defaults, then an optional
// "key = value" config file, then command-line overrides; OUTPUT_DIR in the
// environment overrides the output directory. Exit codes: 0 success,
// 1 numerical failure, 2 invalid usage or configuration.
#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "fracgs/harness.hpp"
#include "fracgs/verify/acceptance.hpp"
#include "fracgs/version.hpp"

namespace {

struct Cli {
    fracgs::RunConfig cfg;
    std::string command;
    std::string config_file;
};

void add_common(CLI::App* sub, Cli& cli) {
    sub->add_option("--config", cli.config_file, "key = value configuration file");
    sub->add_option("--out", cli.cfg.out_dir, "output directory");
    sub->add_option("--seed", cli.cfg.seed, "random seed (mandatory for randomized suites)");
    sub->add_option("--workers", cli.cfg.workers, "worker pool size for sweeps");
}

void add_problem(CLI::App* sub, Cli& cli) {
    sub->add_option("--dim", cli.cfg.dims, "spatial dimension N (1, 2 or 3)");
    sub->add_option("--s", cli.cfg.s, "fractional order in (0,1]");
    sub->add_option("--p", cli.cfg.p, "nonlinearity exponent (> 1)");
    sub->add_option("--points", cli.cfg.points, "grid points per dimension (even)");
    sub->add_option("--box", cli.cfg.box, "half-width L of the periodic box");
    sub->add_option("--residual-tol", cli.cfg.residual_tol, "solver residual tolerance");
    sub->add_option("--init-width", cli.cfg.init_width, "width of the Gaussian seed");
}

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    CLI::App app{std::string("fracgs ") + fracgs::kVersion +
                 " - pseudospectral ground states of (-Lap)^s u + u = nu u^p"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "compute one ground state");
    add_common(solve, cli);
    add_problem(solve, cli);

    auto* sweep = app.add_subcommand("sweep", "nu_s / K_r table over an s-grid");
    add_common(sweep, cli);
    add_problem(sweep, cli);
    sweep->add_option("--s-from", cli.cfg.s_from, "sweep start");
    sweep->add_option("--s-to", cli.cfg.s_to, "sweep end");
    sweep->add_option("--steps", cli.cfg.steps, "number of sweep points");

    auto* spectrum = app.add_subcommand("spectrum", "sector spectra and nondegeneracy report");
    add_common(spectrum, cli);
    add_problem(spectrum, cli);
    spectrum->add_option("--zero-tol", cli.cfg.zero_tol, "kernel window (negative = default)");

    auto* branch = app.add_subcommand("branch", "pseudo-minimizer branch and uniqueness tests");
    add_common(branch, cli);
    add_problem(branch, cli);
    branch->add_option("--nu-source", cli.cfg.nu_source, "'measured' (sweep table) or 'direct'");
    branch->add_option("--sweep-csv", cli.cfg.sweep_csv, "sweep table for measured nu_s");
    branch->add_option("--r0", cli.cfg.r0, "ball radius multiplier");
    branch
        ->add_option_function<std::string>(
            "--branch-s", [&](const std::string& v) { cli.cfg.branch_s = fracgs::parse_double_list(v); },
            "comma-separated decreasing s values starting at 1")
        ->expected(1);
    branch
        ->add_option_function<std::string>(
            "--uniqueness-s",
            [&](const std::string& v) { cli.cfg.uniqueness_s = fracgs::parse_double_list(v); },
            "s values for the uniqueness comparison")
        ->expected(1);
    branch->add_option("--uniqueness-tol", cli.cfg.uniqueness_tol, "uniqueness tolerance");

    auto* extend_check = app.add_subcommand("extend-check", "extension / DtN diagnostics");
    add_common(extend_check, cli);
    extend_check->add_option("--s", cli.cfg.s, "fractional order in (0,1)");

    auto* ineq = app.add_subcommand("ineq-suite", "multiplier-asymptotics inequality suite");
    add_common(ineq, cli);
    ineq->add_option("--samples", cli.cfg.samples, "randomized sample count");

    auto* accept = app.add_subcommand("accept", "full acceptance battery (one line per criterion)");
    add_common(accept, cli);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!cli.config_file.empty())
            for (const auto& [key, value] : fracgs::parse_config_file(cli.config_file)) {
                // command line wins over the file: only fill values the user
                // did not pass explicitly
                CLI::App* sub = app.get_subcommands().front();
                const std::string flag = "--" + key;
                bool set_on_cli = false;
                for (const auto* opt : sub->get_options())
                    if (opt->get_name() == flag && opt->count() > 0) set_on_cli = true;
                if (!set_on_cli) fracgs::apply_config_entry(cli.cfg, key, value);
            }
        fracgs::apply_environment(cli.cfg);

        if (solve->parsed()) return fracgs::run_solve(cli.cfg);
        if (sweep->parsed()) return fracgs::run_sweep(cli.cfg);
        if (spectrum->parsed()) return fracgs::run_spectrum(cli.cfg);
        if (branch->parsed()) return fracgs::run_branch(cli.cfg);
        if (extend_check->parsed()) return fracgs::run_extend_check(cli.cfg);
        if (ineq->parsed()) return fracgs::run_ineq_suite(cli.cfg);
        if (accept->parsed()) {
            fracgs::verify::AcceptConfig acfg;
            acfg.out_dir = cli.cfg.out_dir;
            acfg.seed = cli.cfg.seed;
            acfg.workers = cli.cfg.workers;
            return fracgs::verify::acceptance_main(acfg, std::cout);
        }
        std::cerr << "no command selected\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fracgs::SolveFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
}
