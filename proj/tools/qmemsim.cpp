#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmem/analysis.hpp"
#include "qmem/ensemble.hpp"
#include "qmem/errors.hpp"
#include "qmem/io.hpp"
#include "qmem/sde.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
    std::string preset_name;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> traj;
    std::optional<std::int64_t> record_stride;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    auto* preset = cmd->add_option("--preset", args.preset_name,
                                   "parameter preset: fig3a, fig3b or fig3c");
    cmd->add_option("--config", args.config_path, "parameter file (flat JSON)")
        ->excludes(preset);
    cmd->add_option("--set", args.overrides, "override one parameter, key=value (repeatable)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--traj", args.traj, "ensemble size");
    cmd->add_option("--workers", args.workers, "worker threads (0 = hardware)");
    cmd->add_option("--record-stride", args.record_stride, "sampling decimation");
}

struct ResolvedRun {
    qmem::SimParams params;
    qmem::GaussianState init;
};

ResolvedRun resolve(const CommonArgs& args) {
    ResolvedRun run;
    if (!args.config_path.empty()) {
        run.params = qmem::load_params(args.config_path);
        run.init = qmem::default_initial_state();
    } else {
        const qmem::Preset p = qmem::preset(args.preset_name.empty() ? "fig3b" : args.preset_name);
        run.params = p.params;
        run.init = p.init;
    }
    for (const std::string& assignment : args.overrides)
        run.params = qmem::apply_override(run.params, assignment);
    if (args.seed) run.params.master_seed = *args.seed;
    if (args.traj) run.params.n_traj = *args.traj;
    if (args.record_stride) run.params.record_stride = *args.record_stride;
    run.params = qmem::validate(run.params);
    return run;
}

json init_to_json(const qmem::GaussianState& s) {
    return json{{"mean_phi", s.mean_phi}, {"mean_q", s.mean_q}, {"var_phi", s.var_phi},
                {"var_q", s.var_q},       {"cov", s.cov},       {"mu", s.mu}};
}

json base_summary(const char* command, const ResolvedRun& run) {
    return json{{"command", command},
                {"params", qmem::params_to_json(run.params)},
                {"initial_state", init_to_json(run.init)},
                {"seed", run.params.master_seed}};
}

std::filesystem::path prepare_out(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_simulate(const CommonArgs& args, std::int64_t sample_traj) {
    const Stopwatch clock;
    const ResolvedRun run = resolve(args);
    const auto out = prepare_out(args.out_dir);

    qmem::EnsembleOptions options;
    options.workers = args.workers;
    const qmem::EnsembleStats stats = qmem::run_ensemble(run.params, run.init, options);
    if (stats.uncertainty_violations > 0)
        std::cerr << "warning: uncertainty product V_phi*V_q - C^2 dropped below 1/4 at "
                  << stats.uncertainty_violations
                  << " recorded samples (high-temperature damping form outside its domain)\n";
    qmem::write_ensemble_csv(out / "ensemble.csv", stats);

    for (std::int64_t k = 0; k < std::min(sample_traj, run.params.n_traj); ++k) {
        qmem::NoiseStream noise(run.params.master_seed, static_cast<std::uint64_t>(k));
        const qmem::TrajectoryRecord rec =
            qmem::integrate_trajectory(run.params, run.init, noise, true);
        qmem::write_trajectory_csv(out / ("trajectory_" + std::to_string(k) + ".csv"), rec);
    }

    json summary = base_summary("simulate", run);
    try {
        const qmem::HysteresisCurve curve = qmem::hysteresis_curve(stats);
        const qmem::AreaEstimate first = qmem::first_period_area(curve);
        summary["first_period_area"] = first.area;
        summary["first_period_area_se"] = first.se;
        summary["total_area"] = curve.total_area;
        summary["total_area_se"] = curve.total_area_se;
    } catch (const qmem::DegenerateCurve& e) {
        summary["first_period_area"] = nullptr;
        summary["degenerate_curve"] = e.what();
    }
    if (const auto t_collapse = qmem::collapse_time(stats))
        summary["collapse_time"] = *t_collapse;
    else
        summary["collapse_time"] = nullptr;
    json crossings = json::array();
    for (const qmem::CrossingDeviation& c : qmem::deviation_at_crossings(stats))
        crossings.push_back({{"time", c.time}, {"delta", c.delta}, {"se", c.se}});
    summary["delta_q_at_crossings"] = crossings;
    summary["uncertainty_violations"] = stats.uncertainty_violations;
    summary["runtime_seconds"] = clock.seconds();
    qmem::write_json_file(out / "summary.json", summary);
    std::cout << "wrote " << (out / "summary.json").string() << '\n';
    return 0;
}

int cmd_classical(const CommonArgs& args) {
    const Stopwatch clock;
    const ResolvedRun run = resolve(args);
    const auto out = prepare_out(args.out_dir);

    const auto samples =
        qmem::integrate_classical(run.params, qmem::classical_from_quantum(run.init));
    qmem::write_classical_csv(out / "classical.csv", samples);

    std::vector<qmem::HysteresisSample> hs(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
        hs[k] = {samples[k].t, samples[k].state.q, samples[k].i_m, 0.0, 0.0, 0.0};

    json summary = base_summary("classical", run);
    try {
        const qmem::HysteresisCurve curve = qmem::hysteresis_from_samples(std::move(hs));
        summary["first_period_area"] = qmem::loop_area_first_period(curve);
        summary["total_area"] = curve.total_area;
    } catch (const qmem::DegenerateCurve& e) {
        summary["first_period_area"] = nullptr;
        summary["degenerate_curve"] = e.what();
    }
    summary["runtime_seconds"] = clock.seconds();
    qmem::write_json_file(out / "summary.json", summary);
    std::cout << "wrote " << (out / "summary.json").string() << '\n';
    return 0;
}

int cmd_tau_opt(double gamma0, double lambda, const std::vector<double>& bracket,
                const std::string& out_dir) {
    const Stopwatch clock;
    const auto out = prepare_out(out_dir);
    std::pair<double, double> range{1e-3, 10.0};
    if (bracket.size() == 2) range = {bracket[0], bracket[1]};

    const qmem::TauOptReport report = qmem::optimize_tau(gamma0, lambda, range);
    if (report.grid_fallback)
        std::cerr << "warning: noise sum not unimodal on the bracket (or minimum on the "
                     "boundary); using the scan minimum\n";
    qmem::write_tau_scan_csv(out / "tau_scan.csv", report);

    json summary{{"command", "tau-opt"},
                 {"gamma0", gamma0},
                 {"lambda", lambda},
                 {"bracket", {report.bracket.first, report.bracket.second}},
                 {"tau_opt", report.tau_opt},
                 {"d_min", report.d_min},
                 {"grid_fallback", report.grid_fallback}};
    summary["runtime_seconds"] = clock.seconds();
    qmem::write_json_file(out / "summary.json", summary);
    std::cout << "tau_opt = " << qmem::format_double(report.tau_opt) << '\n';
    return 0;
}

int cmd_convergence(const CommonArgs& args, const std::vector<double>& dts) {
    const Stopwatch clock;
    const ResolvedRun run = resolve(args);
    const auto out = prepare_out(args.out_dir);

    qmem::EnsembleOptions options;
    options.workers = args.workers;
    const qmem::ConvergenceReport report =
        qmem::convergence_study(run.params, run.init, dts, options);
    qmem::write_convergence_csv(out / "convergence.csv", report);

    json summary = base_summary("convergence", run);
    summary["dts"] = dts;
    summary["compared_dts"] = report.dts;
    summary["max_gamma_gaps"] = report.max_gamma_gaps;
    summary["monotone"] = report.monotone;
    summary["runtime_seconds"] = clock.seconds();
    qmem::write_json_file(out / "summary.json", summary);
    std::cout << "monotone = " << (report.monotone ? "true" : "false") << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum memristor simulator: measurement-feedback damped LC circuit"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    std::int64_t sample_traj = 0;
    auto* simulate = app.add_subcommand("simulate", "run a conditioned-trajectory ensemble");
    add_common(simulate, sim_args);
    simulate->add_option("--sample-traj", sample_traj,
                         "also write the first N individual trajectories");

    CommonArgs classical_args;
    auto* classical = app.add_subcommand("classical", "integrate the classical circuit");
    add_common(classical, classical_args);

    double gamma0 = 0.1;
    double lambda = 10.0;
    std::vector<double> bracket;
    std::string tau_out = "out";
    auto* tau_opt = app.add_subcommand("tau-opt", "minimize the stationary noise sum over tau");
    tau_opt->add_option("--gamma0", gamma0, "mean damping rate");
    tau_opt->add_option("--lambda", lambda, "thermal frequency");
    tau_opt->add_option("--bracket", bracket, "search bracket: lo hi")->expected(2);
    tau_opt->add_option("--out", tau_out, "output directory");

    CommonArgs conv_args;
    std::vector<double> dts = {4e-3, 2e-3, 1e-3, 5e-4};
    auto* convergence =
        app.add_subcommand("convergence", "compare e_gamma across time increments");
    add_common(convergence, conv_args);
    convergence->add_option("--dts", dts, "step sizes, descending")->expected(-2);

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(sim_args, sample_traj);
        if (classical->parsed()) return cmd_classical(classical_args);
        if (tau_opt->parsed()) return cmd_tau_opt(gamma0, lambda, bracket, tau_out);
        if (convergence->parsed()) return cmd_convergence(conv_args, dts);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const qmem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }
}
