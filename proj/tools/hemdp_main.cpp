// hemdp command-line front end: simulate, optimize, compare, validate and
// synthetic weather generation over scenario files.
//
// Exit codes: 0 success, 1 property failure, 2 usage or validation error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hemdp/hemdp.hpp"

namespace {

using namespace hemdp;
using Clock = std::chrono::steady_clock;

struct CommonOptions {
    std::string scenario_path;
    std::string out_dir;
    std::optional<double> lambda;
    std::optional<int> block_length;
    std::optional<int> substeps;
    std::optional<double> initial_t_in;
    unsigned threads = 0;
};

std::string short6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string default_out_dir() {
    const char* env = std::getenv("HEMDP_OUT_DIR");
    return env && *env ? env : ".";
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_scenario = true) {
    auto* sc = cmd->add_option("--scenario", opt.scenario_path, "scenario file path");
    if (needs_scenario) sc->required();
    cmd->add_option("--out", opt.out_dir, "output directory")->default_val(default_out_dir());
    cmd->add_option("--lambda", opt.lambda, "override the electricity/discomfort weight");
    cmd->add_option("--block-length", opt.block_length, "override the block length");
    cmd->add_option("--substeps", opt.substeps, "override integrator substeps per hour");
    cmd->add_option("--initial", opt.initial_t_in, "override the initial indoor temperature");
    cmd->add_option("--threads", opt.threads, "solver thread cap (0 = hardware)");
}

ScenarioFile load_with_overrides(const CommonOptions& opt) {
    ScenarioFile file = load_scenario(opt.scenario_path);
    if (opt.lambda) file.scenario.lambda = *opt.lambda;
    if (opt.block_length) file.scenario.block_length = *opt.block_length;
    if (opt.substeps) file.scenario.substeps_per_hour = *opt.substeps;
    if (opt.initial_t_in) {
        file.scenario.initial_t_in_c = *opt.initial_t_in;
        file.scenario.initial_t_e_c = *opt.initial_t_in;
    }
    file.scenario.validate();
    return file;
}

std::string out_path(const CommonOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / name).string();
}

struct SolveOutput {
    PolicyTrace trace;
    double start_value = 0.0;
};

bool known_solver(const std::string& name) {
    return name == "exact" || name == "blocks" || name == "macro" || name == "deadband";
}

SolveOutput run_solver(const std::string& name, const TransitionModel& model, double t0,
                       unsigned threads) {
    if (name == "exact") {
        ViSolution s = solve_value_iteration(model, t0, threads);
        return {std::move(s.trace), s.table.start_value(model.grid().discretize(t0))};
    }
    if (name == "blocks") {
        BlocksSolution s = solve_blocks(model, t0, threads);
        return {std::move(s.trace), s.start_value};
    }
    if (name == "macro") {
        MacroSolution s = solve_macro(model, t0, threads);
        return {std::move(s.trace), s.start_value};
    }
    PolicyTrace t = run_deadband(model, t0);
    const double v = t.total_weighted();
    return {std::move(t), v};
}

// Batch traces for every in-band grid start point, reusing the solver's
// tables where they are start-independent.
std::vector<PolicyTrace> batch_traces(const std::string& name, const TransitionModel& model,
                                      unsigned threads) {
    const StateGrid& grid = model.grid();
    std::vector<PolicyTrace> out;
    out.reserve(grid.n_states());
    if (name == "exact") {
        const ValueTable table = vi::build_table(model, threads);
        for (int s = 0; s < grid.n_states(); ++s)
            out.push_back(vi::trace_policy(model, table, grid.temp_of(s)));
    } else if (name == "blocks") {
        const BlocksTables tables = build_blocks_tables(model, threads);
        for (int s = 0; s < grid.n_states(); ++s)
            out.push_back(blocks_trace(model, tables, grid.temp_of(s)));
    } else if (name == "macro") {
        const MacroTables tables = build_macro_tables(model, threads);
        for (int s = 0; s < grid.n_states(); ++s)
            out.push_back(macro_trace(model, tables, grid.temp_of(s)));
    } else {
        for (int s = 0; s < grid.n_states(); ++s)
            out.push_back(run_deadband(model, grid.temp_of(s)));
    }
    return out;
}

double median_solve_ms(const std::string& name, const TransitionModel& model, double t0,
                       unsigned threads, int runs = 5) {
    std::vector<double> ms;
    ms.reserve(runs);
    for (int i = 0; i < runs; ++i) {
        const auto a = Clock::now();
        const SolveOutput s = run_solver(name, model, t0, threads);
        const auto b = Clock::now();
        (void)s;
        ms.push_back(std::chrono::duration<double, std::milli>(b - a).count());
    }
    return median(ms);
}

void print_trace_summary(const std::string& label, const PolicyTrace& t) {
    std::cout << label << ": weighted cost " << short6(t.total_weighted())
              << ", electricity " << short6(t.total_electricity_cents())
              << " cents, discomfort " << short6(t.total_discomfort_c()) << " C, on-hours "
              << t.on_hours() << (t.out_of_band ? " [left comfort band]" : "") << "\n";
}

int cmd_simulate(const CommonOptions& opt, const std::string& schedule, bool deadband) {
    const ScenarioFile file = load_with_overrides(opt);
    const TransitionModel model(file.scenario, file.params, true, opt.threads);
    PolicyTrace trace;
    if (deadband) {
        trace = run_deadband(model, file.scenario.initial_t_in_c);
    } else {
        std::vector<double> actions;
        for (const auto& piece : split(schedule, ',')) {
            const std::string item = trim(piece);
            if (item.empty()) continue;
            const double a = parse_double(item, 0);
            if (a < 0.0 || a > 1.0)
                throw ValidationError("schedule", "actions must be in [0, 1]");
            actions.push_back(a);
        }
        if (static_cast<int>(actions.size()) != file.scenario.horizon_hours)
            throw ValidationError("schedule", "need exactly one action per hour (" +
                                                  std::to_string(file.scenario.horizon_hours) +
                                                  ")");
        double t = model.grid().snap(file.scenario.initial_t_in_c);
        double cum = 0.0;
        for (int k = 0; k < file.scenario.horizon_hours; ++k) {
            const StepOutcome o = model.compute_from(t, k, actions[k]);
            cum += o.cost.weighted;
            trace.rows.push_back({k, actions[k], o.t_in_end_c, o.t_e_end_c,
                                  file.scenario.weather_c[k], o.cost.electricity_cents,
                                  o.cost.discomfort_c, cum});
            t = o.t_in_next_c;
        }
    }
    const std::string name = deadband ? "trace_deadband.csv" : "trace_schedule.csv";
    save_trace(trace, out_path(opt, name));
    print_trace_summary(deadband ? "deadband" : "schedule", trace);
    std::cout << "wrote " << out_path(opt, name) << "\n";
    return 0;
}

int cmd_optimize(const CommonOptions& opt, const std::string& solver) {
    if (!known_solver(solver))
        throw ValidationError("solver", "must be exact, blocks, macro or deadband");
    const ScenarioFile file = load_with_overrides(opt);
    const TransitionModel model(file.scenario, file.params, true, opt.threads);
    const auto a = Clock::now();
    const SolveOutput s = run_solver(solver, model, file.scenario.initial_t_in_c, opt.threads);
    const auto b = Clock::now();
    const double ms = std::chrono::duration<double, std::milli>(b - a).count();
    save_trace(s.trace, out_path(opt, "trace_" + solver + ".csv"));
    write_key_value_report(
        {
            {"solver", solver},
            {"start_value", format_double(s.start_value)},
            {"total_weighted", format_double(s.trace.total_weighted())},
            {"total_electricity_cents", format_double(s.trace.total_electricity_cents())},
            {"total_discomfort_c", format_double(s.trace.total_discomfort_c())},
            {"on_hours", std::to_string(s.trace.on_hours())},
            {"out_of_band", s.trace.out_of_band ? "1" : "0"},
        },
        out_path(opt, "values_" + solver + ".kv"));
    print_trace_summary(solver, s.trace);
    std::cout << "solve wall time: " << std::fixed << std::setprecision(1) << ms << " ms\n";
    std::cout << "wrote " << out_path(opt, "trace_" + solver + ".csv") << "\n";
    return 0;
}

int cmd_compare(const CommonOptions& opt, const std::string& solver_a,
                const std::string& solver_b) {
    if (!known_solver(solver_a) || !known_solver(solver_b))
        throw ValidationError("solver", "must be exact, blocks, macro or deadband");
    const ScenarioFile file = load_with_overrides(opt);
    const TransitionModel model(file.scenario, file.params, true, opt.threads);

    const auto batch_a = batch_traces(solver_a, model, opt.threads);
    const auto batch_b = batch_traces(solver_b, model, opt.threads);
    ComparisonReport report =
        compare_trace_batches(batch_a, batch_b, file.scenario.horizon_hours);
    const double ms_a =
        median_solve_ms(solver_a, model, file.scenario.initial_t_in_c, opt.threads);
    const double ms_b =
        median_solve_ms(solver_b, model, file.scenario.initial_t_in_c, opt.threads);
    report.speedup = ms_b > 0.0 ? ms_a / ms_b : 0.0;

    // Plot-ready per-start rows.
    {
        std::ofstream csv(out_path(opt, "per_start.csv"), std::ios::binary);
        csv << "start_t_in_c,cost_" << solver_a << ",cost_" << solver_b << ",on_hours_" << solver_a
            << ",on_hours_" << solver_b << "\n";
        for (int s = 0; s < model.grid().n_states(); ++s)
            csv << format_double(model.grid().temp_of(s)) << ','
                << format_double(batch_a[s].total_weighted()) << ','
                << format_double(batch_b[s].total_weighted()) << ',' << batch_a[s].on_hours()
                << ',' << batch_b[s].on_hours() << '\n';
    }

    write_key_value_report(
        {
            {"solver_a", solver_a},
            {"solver_b", solver_b},
            {"mae_state_c", format_double(report.mae_state_c)},
            {"max_mae_state_c", format_double(report.max_mae_state_c)},
            {"mae_electricity_cents", format_double(report.mae_electricity_cents)},
            {"avg_electricity_cents_b", format_double(report.avg_electricity_cents_b)},
            {"mae_discomfort_c", format_double(report.mae_discomfort_c)},
            {"avg_discomfort_c_b", format_double(report.avg_discomfort_c_b)},
            {"calibration_error_pct", format_double(report.calibration_error_pct)},
            {"speedup_a_over_b", format_double(report.speedup)},
            {"avg_operating_hours_a", format_double(report.summary_a.avg_operating_hours)},
            {"avg_electricity_cents_a", format_double(report.summary_a.avg_electricity_cents)},
            {"avg_discomfort_c_a", format_double(report.summary_a.avg_discomfort_c)},
            {"avg_operating_hours_b", format_double(report.summary_b.avg_operating_hours)},
            {"avg_electricity_cents_b_summary", format_double(report.summary_b.avg_electricity_cents)},
            {"avg_discomfort_c_b_summary", format_double(report.summary_b.avg_discomfort_c)},
        },
        out_path(opt, "report.kv"));

    std::ostringstream text;
    text << "comparison over " << model.grid().n_states() << " start points, horizon "
         << file.scenario.horizon_hours << " h\n";
    text << "  " << std::left << std::setw(28) << "metric" << solver_a << " vs " << solver_b
         << "\n";
    text << "  " << std::setw(28) << "mean indoor MAE (C)" << short6(report.mae_state_c)
         << "\n";
    text << "  " << std::setw(28) << "max indoor MAE (C)" << short6(report.max_mae_state_c)
         << "\n";
    text << "  " << std::setw(28) << "electricity MAE (cents)"
         << short6(report.mae_electricity_cents) << " (avg "
         << short6(report.avg_electricity_cents_b) << ")\n";
    text << "  " << std::setw(28) << "discomfort MAE (C)" << short6(report.mae_discomfort_c)
         << " (avg " << short6(report.avg_discomfort_c_b) << ")\n";
    text << "  " << std::setw(28) << "calibration error (%)"
         << short6(report.calibration_error_pct) << "\n";
    text << "  " << std::setw(28) << ("speedup " + solver_a + "/" + solver_b)
         << short6(report.speedup) << "x\n";
    auto summary_row = [&text](const std::string& name, const ScenarioSummary& s) {
        text << "  " << std::left << std::setw(10) << name << " operating hours "
             << short6(s.avg_operating_hours) << ", electricity "
             << short6(s.avg_electricity_cents) << " cents, discomfort "
             << short6(s.avg_discomfort_c) << " C\n";
    };
    text << "per-start averages:\n";
    summary_row(solver_a, report.summary_a);
    summary_row(solver_b, report.summary_b);
    {
        std::ofstream f(out_path(opt, "report.txt"), std::ios::binary);
        f << text.str();
    }
    std::cout << text.str();
    std::cout << "wrote " << out_path(opt, "report.kv") << "\n";
    return 0;
}

int cmd_validate(int models, std::uint64_t seed, bool inject_fault) {
    BellmanSuiteConfig cfg;
    cfg.model_count = models;
    cfg.seed = seed;
    cfg.inject_fault = inject_fault;
    const BellmanSuiteResult res = run_bellman_suite(cfg);
    std::cout << "generalized Bellman suite: " << models << " models, seed " << seed << "\n";
    std::cout << "  worst residual: " << format_double(res.worst_residual) << " (tol "
              << format_double(cfg.residual_tol) << ")\n";
    std::cout << "  worst backup iterations: " << res.worst_backup_iters << " (cap "
              << cfg.backup_max_iters << ")\n";
    if (!res.passed) {
        std::cout << "  FAILED: " << res.failed_check << "\n";
        return 1;
    }
    std::cout << "  all checks passed\n";
    return 0;
}

int cmd_weather(const std::string& season_name_arg, int hours, const std::string& out_file,
                std::optional<double> mean, std::optional<double> amplitude) {
    const auto season = season_from_name(season_name_arg);
    if (!season)
        throw ValidationError("season", "must be spring, summer, autumn or winter");
    save_weather(synthetic_weather(*season, hours, mean, amplitude), out_file);
    std::cout << "wrote " << out_file << " (" << hours << " hourly samples)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HVAC scheduling in PCM buildings via finite-horizon dynamic programming"};
    app.require_subcommand(1);

    CommonOptions sim_opt, optim_opt, cmp_opt;
    std::string schedule;
    bool deadband = false;
    auto* simulate = app.add_subcommand("simulate", "simulate a fixed schedule or the deadband relay");
    add_common(simulate, sim_opt);
    simulate->add_option("--schedule", schedule, "comma-separated hourly power fractions");
    simulate->add_flag("--deadband", deadband, "run the deadband relay");

    std::string solver;
    auto* optimize = app.add_subcommand("optimize", "solve the scheduling MDP");
    add_common(optimize, optim_opt);
    optimize->add_option("--solver", solver, "exact | blocks | macro | deadband")->required();

    std::string solver_a, solver_b;
    auto* compare = app.add_subcommand("compare", "compare two solvers over all grid start points");
    add_common(compare, cmp_opt);
    compare->add_option("--solver-a", solver_a, "reference solver")->required();
    compare->add_option("--solver-b", solver_b, "candidate solver")->required();

    int models = 1000;
    std::uint64_t seed = 20240101;
    bool inject_fault = false;
    auto* validate = app.add_subcommand("validate", "run the generalized Bellman validity suite");
    validate->add_option("--models", models, "number of random models")->default_val(1000);
    validate->add_option("--seed", seed, "RNG seed");
    validate->add_flag("--inject-fault", inject_fault,
                       "perturb one composed cost vector (negative control)");

    std::string season_arg = "summer", weather_out = "weather.csv";
    int hours = 169;
    std::optional<double> mean, amplitude;
    auto* weather = app.add_subcommand("weather", "generate a synthetic seasonal weather CSV");
    weather->add_option("--season", season_arg, "spring | summer | autumn | winter")->required();
    weather->add_option("--hours", hours, "number of hourly samples")->default_val(169);
    weather->add_option("--out-file", weather_out, "output CSV path")->required();
    weather->add_option("--mean", mean, "override the seasonal mean temperature");
    weather->add_option("--amplitude", amplitude, "override the daily amplitude");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) {
            if (deadband == !schedule.empty()) {
                std::cerr << "error: give exactly one of --schedule or --deadband\n";
                return 2;
            }
            return cmd_simulate(sim_opt, schedule, deadband);
        }
        if (optimize->parsed()) return cmd_optimize(optim_opt, solver);
        if (compare->parsed()) return cmd_compare(cmp_opt, solver_a, solver_b);
        if (validate->parsed()) return cmd_validate(models, seed, inject_fault);
        if (weather->parsed()) return cmd_weather(season_arg, hours, weather_out, mean, amplitude);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
