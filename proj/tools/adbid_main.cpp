// Command-line front end: solve, simulate, sweep, meanfield.
#include <CLI11.hpp>

#include <adbid/cli.hpp>

namespace {

struct CommonArgs {
    std::string config;
    std::string schedule = "dichotomy";
    adbid::cli::Overrides ov;
};

void add_common(CLI::App* sub, CommonArgs& args, bool with_sim_flags) {
    sub->add_option("--config", args.config, "path to a JSON run configuration")->required();
    sub->add_option("--out", args.ov.out, "artifact path (default: stdout)");
    sub->add_option("--format", args.ov.format, "csv, json or table")
        ->check(CLI::IsMember({"csv", "json", "table"}));
    sub->add_option("--schedule", args.schedule,
                    "naive or dichotomy row ordering for population solves")
        ->check(CLI::IsMember({"naive", "dichotomy"}));
    if (!with_sim_flags) return;
    sub->add_option("--seed", args.ov.seed, "override sim.seed");
    sub->add_option("--paths", args.ov.paths, "override sim.paths");
    sub->add_option("--threads", args.ov.threads, "worker threads (results are unaffected)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--log-events", args.ov.log_events, "write a TSV event log to this path");
    sub->add_flag("--literal-danger-jumps", args.ov.literal_danger_jumps,
                  "simulate danger costs as jumps instead of accrual (population)");
    sub->add_flag("--variance-reduced-accrual", args.ov.variance_reduced_accrual,
                  "accrue danger costs between events (individual discount model)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal bidding: closed-form solver and Monte Carlo check"};
    app.require_subcommand(1);

    CommonArgs solve_args, sim_args, sweep_args, mf_args;
    CLI::App* solve = app.add_subcommand("solve", "solve for optimal value and smallest bid");
    add_common(solve, solve_args, false);
    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo estimate against the analytic value");
    add_common(simulate, sim_args, true);
    CLI::App* sweep =
        app.add_subcommand("sweep", "solve across a parameter ladder with monotonicity verdicts");
    add_common(sweep, sweep_args, false);
    CLI::App* meanfield =
        app.add_subcommand("meanfield", "per-capita values against the large-population limit");
    add_common(meanfield, mf_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return adbid::cli::kExitConfig;
    }

    for (CommonArgs* a : {&solve_args, &sim_args, &sweep_args, &mf_args})
        a->ov.naive_schedule = (a->schedule == "naive");

    if (solve->parsed())
        return adbid::cli::cmd_solve_file(solve_args.config, solve_args.ov, std::cerr);
    if (simulate->parsed())
        return adbid::cli::cmd_simulate_file(sim_args.config, sim_args.ov, std::cerr);
    if (sweep->parsed())
        return adbid::cli::cmd_sweep_file(sweep_args.config, sweep_args.ov, std::cerr);
    return adbid::cli::cmd_meanfield_file(mf_args.config, mf_args.ov, std::cerr);
}
