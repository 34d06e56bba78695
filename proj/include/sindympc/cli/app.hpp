#pragma once

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sindympc/cli/commands.hpp"

namespace sindympc::cli {

/// Parses the command line and runs the selected command. Returns the process exit code.
inline int run(int argc, const char* const* argv, Io io = {})
{
    CLI::App app{"Sparse identification and model predictive control of forced nonlinear systems"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("sindy_mpc 0.1.0"));

    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "Experiment plan JSON (optionally wrapped with output, verbosity and seed)");
    app.add_option("--out", g.out, "Output directory (SINDY_MPC_OUT overrides)");
    auto* seed_opt = app.add_option("--seed", seed, "Global seed override");
    app.add_option("--jobs", g.jobs, "Worker cap for sweeps; 1 runs serially")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a benchmark system and write its trajectory CSV");
    simulate->add_option("--system", sim.system, "lotka, lorenz, f8 or hiv");
    simulate->add_option("--signal", sim.signal, "zero, schroeder, sine-product, cubed-sine, prbs or piecewise-random");
    simulate->add_option("--duration", sim.duration, "Simulated time");
    simulate->add_option("--amplitude", sim.amplitude, "Signal amplitude");
    simulate->add_option("--x0", sim.x0, "Start state: fixed-point or comma-separated values");
    simulate->add_option("--output", sim.output, "CSV path (default <out>/simulate/<plan>-<signal>.csv)");

    IdentifyArgs id;
    std::vector<int> id_states;
    bool normalize = false, no_normalize = false;
    auto* identify = app.add_subcommand("identify", "Fit a model to a trajectory CSV");
    identify->add_option("--data", id.data, "Training CSV (t,x1..xn,u1..uq)")->required();
    identify->add_option("--system", id.system, "Preset whose model settings serve as defaults");
    identify->add_option("--model", id.model, "sindyc, pi-sindyc, dmdc, delay-dmdc or edmdc");
    identify->add_option("--name", id.name, "Model name for the output files");
    identify->add_option("--order", id.order, "Polynomial library order");
    identify->add_option("--lambda", id.lambdas, "Sparsity threshold(s), one or one per state")->delimiter(',');
    identify->add_flag("--normalize", normalize, "Scale library columns to unit norm");
    identify->add_flag("--no-normalize", no_normalize, "Do not scale library columns");
    identify->add_flag("--no-constant", id.no_constant, "Drop the constant library column");
    identify->add_option("--states", id_states, "1-based measured state indices")->delimiter(',');
    identify->add_option("--delays", id.delays, "Delay-DMDc: number of delay copies");
    identify->add_option("--lag", id.lag, "Delay-DMDc: steps between copies");
    identify->add_option("--smoothing-window", id.smoothing_window, "Savitzky-Golay window for derivative estimates (1: none)");
    identify->add_flag("--goal-offset", id.goal_offset, "Linear models: regress on deviations from the goal state");

    ValidateArgs val;
    auto* validate = app.add_subcommand("validate", "Roll a model forward along a recorded trajectory and score it");
    validate->add_option("--model", val.model, "Model JSON")->required();
    validate->add_option("--data", val.data, "Validation CSV")->required();
    validate->add_option("--system", val.system, "Preset providing the error radius");
    validate->add_option("--eps", val.eps, "Error radius of the prediction horizon");

    ControlArgs ctl;
    auto* control = app.add_subcommand("control", "Run the plan's closed loop with one model");
    control->add_option("--system", ctl.system, "Preset plan when no --config is given");
    control->add_option("--model", ctl.model, "Model JSON, or exact for the plant itself")->required();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Run the plan's experiment and its training-length and noise sweeps");
    sweep->add_option("--system", sw.system, "Preset plan when no --config is given");
    sweep->add_option("--type", sw.type, "all, experiment, length or noise");
    sweep->add_option("--lengths", sw.lengths, "Training lengths in samples")->delimiter(',');
    sweep->add_option("--etas", sw.etas, "Noise levels")->delimiter(',');
    sweep->add_option("--realizations", sw.realizations, "Noise realizations per cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, io.out, io.err);
        return code == 0 ? Ok : BadConfig;
    }
    if (*seed_opt) g.seed = seed;

    return guarded(
        [&]() -> int {
            if (*simulate) return cmd_simulate(g, sim, io);
            if (*identify) {
                if (normalize && no_normalize) throw CliError(BadConfig, "--normalize and --no-normalize exclude each other");
                if (normalize) id.normalize = true;
                if (no_normalize) id.normalize = false;
                id.states = id_states;
                return cmd_identify(g, id, io);
            }
            if (*validate) return cmd_validate(g, val, io);
            if (*control) return cmd_control(g, ctl, io);
            return cmd_sweep(g, sw, io);
        },
        io.err);
}

} // namespace sindympc::cli
