#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sindympc/bench/experiment.hpp"
#include "sindympc/bench/plan.hpp"
#include "sindympc/dynamics/csv.hpp"
#include "sindympc/dynamics/integrate.hpp"
#include "sindympc/sysid/model.hpp"
#include "sindympc/sysid/predict.hpp"

namespace sindympc::cli {

namespace fs = std::filesystem;

/// Process exit codes. They are part of the command-line contract.
enum ExitCode : int {
    Ok = 0,
    Failure = 1,
    UnknownSystem = 2,
    BadData = 3,
    MissingModel = 4,
    BadConfig = 5,
};

/// Error carrying the exit code the command should terminate with.
class CliError : public Error {
public:
    CliError(int code, const std::string& what) : Error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

struct GlobalOptions {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool quiet = false;
};

/// Output streams of a command; tests substitute string streams.
struct Io {
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
};

struct SimulateArgs {
    std::string system;
    std::string signal = "schroeder";
    std::optional<double> duration;
    std::optional<double> amplitude;
    /// "fixed-point", a comma-separated state, or empty for the plan's start state.
    std::string x0;
    std::string output;
};

struct IdentifyArgs {
    std::string data;
    std::string system;
    std::string model = "sindyc";
    std::string name;
    std::optional<int> order;
    std::vector<double> lambdas;
    std::optional<bool> normalize;
    bool no_constant = false;
    std::vector<int> states;
    std::optional<int> delays;
    std::optional<int> lag;
    std::optional<int> smoothing_window;
    bool goal_offset = false;
};

struct ValidateArgs {
    std::string model;
    std::string data;
    std::string system;
    std::optional<double> eps;
};

struct ControlArgs {
    std::string system;
    /// Path to a model JSON, or "exact" for the plant itself.
    std::string model;
};

struct SweepArgs {
    std::string system;
    /// all, experiment, length or noise.
    std::string type = "all";
    std::vector<int> lengths;
    std::vector<double> etas;
    std::optional<int> realizations;
};

namespace detail {

inline bool known_system(const std::string& name)
{
    return name == "lotka" || name == "lotka-volterra" || name == "lorenz" || name == "f8" || name == "hiv";
}

inline void check_system(const std::string& name)
{
    if (!known_system(name)) {
        std::string list;
        for (const auto& n : bench::preset_names()) list += (list.empty() ? "" : ", ") + n;
        throw CliError(UnknownSystem, "unknown system '" + name + "' (known: " + list + ")");
    }
}

/// Splits the optional `{"plan": ..., "output": ..., "verbosity": ..., "seed": ...}` wrapper.
struct RunConfig {
    nlohmann::json plan;
    std::optional<std::string> output;
    std::optional<std::string> verbosity;
    std::optional<std::uint64_t> seed;
};

inline RunConfig read_run_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw CliError(BadConfig, "cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw CliError(BadConfig, "config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw CliError(BadConfig, "config '" + path + "' must be a JSON object");
    RunConfig rc;
    if (!j.contains("plan")) {
        rc.plan = j;
        return rc;
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "plan" && key != "output" && key != "verbosity" && key != "seed")
            throw CliError(BadConfig, "config: unknown key '" + key + "'");
    }
    rc.plan = j.at("plan");
    try {
        if (j.contains("output")) rc.output = j.at("output").get<std::string>();
        if (j.contains("verbosity")) {
            rc.verbosity = j.at("verbosity").get<std::string>();
            if (*rc.verbosity != "quiet" && *rc.verbosity != "normal")
                throw CliError(BadConfig, "config: verbosity must be 'quiet' or 'normal'");
        }
        if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CliError(BadConfig, std::string("config: ") + e.what());
    }
    return rc;
}

/// Global options after applying the config wrapper and the SINDY_MPC_OUT override.
struct Settings {
    std::string out;
    bool quiet = false;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<nlohmann::json> plan_json;
};

inline Settings resolve(const GlobalOptions& g)
{
    Settings s;
    s.out = g.out;
    s.quiet = g.quiet;
    s.jobs = std::max(1, g.jobs);
    s.seed = g.seed;
    if (!g.config.empty()) {
        auto rc = read_run_config(g.config);
        s.plan_json = std::move(rc.plan);
        if (rc.output && g.out == "out") s.out = *rc.output;
        if (rc.verbosity && !g.quiet) s.quiet = *rc.verbosity == "quiet";
        if (rc.seed && !g.seed) s.seed = rc.seed;
    }
    if (const char* env = std::getenv("SINDY_MPC_OUT"); env && *env) s.out = env;
    return s;
}

/// The plan of a command: the config's plan when given, otherwise the preset of `system`.
inline bench::ExperimentPlan load_plan(const Settings& s, const std::string& system, bool required = true)
{
    bench::ExperimentPlan plan;
    if (s.plan_json) {
        const auto& j = *s.plan_json;
        if (j.is_object() && j.contains("system") && j.at("system").is_string()) check_system(j.at("system").get<std::string>());
        try {
            plan = bench::plan_from_json(j);
        } catch (const nlohmann::json::exception& e) {
            throw CliError(BadConfig, std::string("plan: ") + e.what());
        } catch (const InvalidInput& e) {
            throw CliError(BadConfig, e.what());
        }
        if (!system.empty()) {
            check_system(system);
            if (dynamics::system_from_name(system).kind != plan.system.kind)
                throw CliError(BadConfig, "--system " + system + " contradicts the config's system '" + plan.system_name + "'");
        }
    } else if (!system.empty()) {
        check_system(system);
        plan = bench::preset_plan(system);
    } else if (required) {
        throw CliError(BadConfig, "either --config or --system is required");
    } else {
        return plan;
    }
    if (s.seed) plan.seed = *s.seed;
    return plan;
}

inline dynamics::Trajectory read_data(const std::string& path)
{
    if (path.empty()) throw CliError(BadConfig, "--data is required");
    std::ifstream is(path);
    if (!is) throw CliError(BadData, "cannot open data file '" + path + "'");
    try {
        return io::read_trajectory_csv(is);
    } catch (const ParseError& e) {
        throw CliError(BadData, path + ": " + e.what());
    }
}

struct LoadedModel {
    std::string label;
    nlohmann::json json;
    std::optional<sysid::AnyModel> model;
    sysid::PredictorPtr predictor;
};

/// Loads a model JSON written by `identify` or by the benchmark runner. "exact" uses the plant.
inline LoadedModel load_model(const std::string& path, const std::optional<bench::ExperimentPlan>& plan)
{
    LoadedModel m;
    if (path == "exact") {
        if (!plan) throw CliError(BadConfig, "the exact model needs --system or --config");
        m.label = "exact";
        m.json = {{"type", "exact"}, {"system", plan->system_name}, {"dt", plan->model_dt}};
        m.predictor = std::make_shared<sysid::PlantPredictor>(plan->system, plan->model_dt);
        return m;
    }
    if (path.empty()) throw CliError(BadConfig, "--model is required");
    if (!fs::is_regular_file(path)) throw CliError(MissingModel, "model file '" + path + "' does not exist");
    std::ifstream is(path);
    if (!is) throw CliError(MissingModel, "cannot open model file '" + path + "'");
    m.label = fs::path(path).stem().string();
    try {
        m.json = nlohmann::json::parse(is);
        const auto type = m.json.at("type").get<std::string>();
        if (type == "sparse") {
            m.model = sysid::sparse_model_from_json(m.json);
        } else if (type == "linear") {
            m.model = sysid::linear_model_from_json(m.json);
        } else if (type == "exact") {
            const auto sys = m.json.at("system").get<std::string>();
            check_system(sys);
            m.predictor = std::make_shared<sysid::PlantPredictor>(dynamics::system_from_name(sys), m.json.at("dt").get<double>());
            return m;
        } else {
            throw ParseError("unknown model type '" + type + "'");
        }
        m.predictor = sysid::make_predictor(*m.model);
    } catch (const nlohmann::json::exception& e) {
        throw CliError(BadData, "model file '" + path + "': " + e.what());
    } catch (const ParseError& e) {
        throw CliError(BadData, "model file '" + path + "': " + e.what());
    }
    return m;
}

inline void write_file(const fs::path& path, const std::string& text)
{
    try {
        bench::detail::write_text(path, text);
    } catch (const fs::filesystem_error& e) {
        throw CliError(Failure, e.what());
    }
}

inline std::string csv_text(const dynamics::Trajectory& t)
{
    std::ostringstream os;
    io::write_trajectory_csv(os, t);
    return os.str();
}

inline std::string fmt(double v)
{
    return bench::format_metric(v);
}

inline Vector parse_state(const std::string& text, int n)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            v.push_back(io::parse_double(cell, 0));
        } catch (const ParseError&) {
            throw CliError(BadConfig, "--x0: '" + cell + "' is not a number");
        }
    }
    if (static_cast<int>(v.size()) != n)
        throw CliError(BadConfig, "--x0 needs " + std::to_string(n) + " comma-separated values");
    return Eigen::Map<Vector>(v.data(), n);
}

/// Zero-order hold of the inputs recorded in a trajectory.
inline dynamics::ExcitationSignal recorded_input(const dynamics::Trajectory& data)
{
    require(data.q() == 1, "recorded inputs must be scalar");
    const Vector times = data.times;
    const Vector values = data.inputs.row(0).transpose();
    return dynamics::custom_signal([times, values](double t) {
        const double* begin = times.data();
        const double* end = begin + times.size();
        const double tol = 1e-9 * std::max(1.0, std::abs(t));
        auto it = std::upper_bound(begin, end, t + tol);
        const auto k = it == begin ? 0 : (it - begin) - 1;
        return values(k);
    });
}

} // namespace detail

// ---------------------------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const GlobalOptions& g, const SimulateArgs& a, Io io = {})
{
    const auto s = detail::resolve(g);
    auto plan = detail::load_plan(s, a.system);

    bench::SignalSpec spec;
    try {
        spec.kind = dynamics::signal_kind_from_string(a.signal);
    } catch (const InvalidInput& e) {
        throw CliError(BadConfig, e.what());
    }
    if (spec.kind == dynamics::SignalKind::Custom) throw CliError(BadConfig, "custom signals cannot be simulated");
    // Reuse the plan's parameters for its own signal kinds.
    if (plan.training.signal.kind == spec.kind) {
        spec = plan.training.signal;
    } else if (plan.validation.signal.kind == spec.kind) {
        spec = plan.validation.signal;
    }
    if (a.amplitude) spec.amplitude = *a.amplitude;

    const double duration = a.duration.value_or(plan.training.duration);
    if (!(duration > 0.0)) throw CliError(BadConfig, "--duration must be positive");

    Vector x0 = plan.x0;
    if (a.x0 == "fixed-point") {
        x0 = plan.goal_state();
    } else if (!a.x0.empty()) {
        x0 = detail::parse_state(a.x0, plan.system.n);
    }

    dynamics::IntegratorConfig ic;
    ic.dt = plan.plant_dt;
    ic.sample_every = plan.sample_every();
    const auto signal = bench::make_signal(spec, duration, derive_seed(plan.seed, "training"));
    const auto traj = dynamics::integrate(plan.system, x0, signal, 0.0, duration, ic);

    const fs::path path = a.output.empty() ? fs::path(s.out) / "simulate" / (plan.name + "-" + a.signal + ".csv") : fs::path(a.output);
    detail::write_file(path, detail::csv_text(traj));

    if (!s.quiet) {
        io.out << "wrote " << path.string() << " (" << traj.size() << " samples, dt " << plan.model_dt << ")\n";
        for (int i = 0; i < traj.n(); ++i) {
            io.out << "x" << i + 1 << ": min " << detail::fmt(traj.states.row(i).minCoeff()) << ", max "
                   << detail::fmt(traj.states.row(i).maxCoeff()) << '\n';
        }
    }
    return Ok;
}

// ---------------------------------------------------------------------------------------------
// identify

inline bench::ModelRecipe identify_recipe(const IdentifyArgs& a, const std::optional<bench::ExperimentPlan>& plan, int n)
{
    bench::ModelKind kind;
    try {
        kind = bench::model_kind_from_string(a.model);
    } catch (const InvalidInput& e) {
        throw CliError(BadConfig, e.what());
    }
    if (kind == bench::ModelKind::Exact) throw CliError(BadConfig, "the exact model is not identified");

    bench::ModelRecipe r;
    r.kind = kind;
    bool from_plan = false;
    if (plan) {
        for (const auto& p : plan->recipes) {
            if (p.kind == kind) {
                r = p;
                from_plan = true;
                break;
            }
        }
    }
    if (!from_plan && (kind == bench::ModelKind::eDMDc)) r.include_constant = false;
    if (!a.name.empty()) r.label = a.name;
    if (a.order) r.poly_order = *a.order;
    if (a.normalize) r.normalize = *a.normalize;
    if (a.no_constant) r.include_constant = false;
    if (!a.states.empty()) {
        r.state_indices.clear();
        for (int i : a.states) {
            if (i < 1 || i > n) throw CliError(BadConfig, "--states: index " + std::to_string(i) + " out of range");
            r.state_indices.push_back(i - 1);
        }
    }
    if (a.delays) r.delays = *a.delays;
    if (a.lag) r.lag = *a.lag;
    // CSV data carries no measured derivatives; plan windows are tuned for noisy sweeps, so clean files
    // get the five-point stencil unless a window is requested.
    r.smoothing_window = a.smoothing_window.value_or(5);
    if (a.goal_offset) r.goal_offset = true;

    const int nm = r.state_indices.empty() ? n : static_cast<int>(r.state_indices.size());
    if (!a.lambdas.empty()) {
        if (a.lambdas.size() == 1) {
            r.lambdas = Vector::Constant(nm, a.lambdas[0]);
        } else if (static_cast<int>(a.lambdas.size()) == nm) {
            r.lambdas = Eigen::Map<const Vector>(a.lambdas.data(), nm);
        } else {
            throw CliError(BadConfig, "--lambda needs 1 or " + std::to_string(nm) + " values");
        }
    } else if (r.lambdas.size() == 1 && nm > 1) {
        r.lambdas = Vector::Constant(nm, r.lambdas(0));
    } else if (r.lambdas.size() != nm) {
        r.lambdas = Vector::Constant(nm, 0.1);
    }
    if (r.goal_offset && !plan) throw CliError(BadConfig, "--goal-offset needs --system or --config for the goal state");
    return r;
}

inline int cmd_identify(const GlobalOptions& g, const IdentifyArgs& a, Io io = {})
{
    const auto s = detail::resolve(g);
    std::optional<bench::ExperimentPlan> plan;
    if (s.plan_json || !a.system.empty()) plan = detail::load_plan(s, a.system);
    auto data = detail::read_data(a.data);
    if (data.size() < 3) throw CliError(BadData, a.data + ": at least 3 samples are required");
    if (plan && (data.n() != plan->system.n || data.q() != plan->system.q))
        throw CliError(BadData, a.data + ": columns do not match system '" + plan->system_name + "'");

    const auto recipe = identify_recipe(a, plan, data.n());
    bench::ExperimentPlan context;
    if (plan) {
        context = *plan;
    } else {
        context.system.n = data.n();
        context.system.q = data.q();
    }
    try {
        context.model_dt = data.uniform_step();
    } catch (const InvalidInput& e) {
        throw CliError(BadData, a.data + ": " + e.what());
    }

    bench::FittedModel fit;
    try {
        fit = bench::fit_model(recipe, data, context);
    } catch (const InvalidInput& e) {
        throw CliError(BadConfig, e.what());
    } catch (const EmptyDataError& e) {
        throw CliError(BadData, e.what());
    }

    const fs::path dir = fs::path(s.out) / "identify";
    const auto json = std::visit([](const auto& m) { return sysid::to_json(m); }, *fit.model);
    detail::write_file(dir / (recipe.name() + ".json"), json.dump(2) + "\n");

    std::ostringstream report;
    if (auto* sm = std::get_if<sysid::SparseModel>(&*fit.model)) {
        report << sysid::coefficient_report(*sm);
        report << "nonzero terms: " << sm->num_active() << '\n';
    } else {
        const auto& lm = std::get<sysid::LinearModel>(*fit.model);
        report << "embedding: " << lm.embedding_name() << '\n';
        report << "A: " << lm.a.rows() << " x " << lm.a.cols() << '\n';
        report << "B: " << lm.b.rows() << " x " << lm.b.cols() << '\n';
    }
    for (const auto& w : fit.warnings) report << "warning: " << w << '\n';
    detail::write_file(dir / (recipe.name() + "-coefficients.txt"), report.str());

    if (!s.quiet) {
        io.out << report.str();
        io.out << "wrote " << (dir / (recipe.name() + ".json")).string() << '\n';
    }
    return Ok;
}

// ---------------------------------------------------------------------------------------------
// validate

inline int cmd_validate(const GlobalOptions& g, const ValidateArgs& a, Io io = {})
{
    const auto s = detail::resolve(g);
    std::optional<bench::ExperimentPlan> plan;
    if (s.plan_json || !a.system.empty()) plan = detail::load_plan(s, a.system);
    const auto lm = detail::load_model(a.model, plan);
    const auto data = detail::read_data(a.data);
    const auto& model = *lm.predictor;
    if (data.q() != model.input_dim()) throw CliError(BadData, a.data + ": input columns do not match the model");

    const auto& measured = model.measured_states();
    const auto truth_full = measured.empty() ? data : data.select_states(measured);
    if (truth_full.n() != model.state_dim()) throw CliError(BadData, a.data + ": state columns do not match the model");
    if (data.size() < 2) throw CliError(BadData, a.data + ": at least 2 samples are required");

    // Truth at the model step; finer data drives the inputs between model steps.
    double h = 0.0;
    try {
        h = data.uniform_step();
    } catch (const InvalidInput& e) {
        throw CliError(BadData, a.data + ": " + e.what());
    }
    const double ratio = model.dt() / h;
    const int every = static_cast<int>(std::lround(ratio));
    if (every < 1 || std::abs(ratio - every) > 1e-6 * ratio)
        throw CliError(BadData, a.data + ": sample spacing must divide the model step");
    const int count = (data.size() - 1) / every + 1;
    dynamics::Trajectory truth;
    truth.times.resize(count);
    truth.states.resize(truth_full.n(), count);
    truth.inputs.resize(data.q(), count);
    for (int k = 0; k < count; ++k) {
        truth.times(k) = truth_full.times(k * every);
        truth.states.col(k) = truth_full.states.col(k * every);
        truth.inputs.col(k) = truth_full.inputs.col(k * every);
    }

    const auto input = detail::recorded_input(data);
    const double duration = truth.times(count - 1) - truth.times(0);
    const auto pred = bench::rollout(model, truth.states.col(0), input, truth.times(0), duration, every > 1 ? h : 0.0);
    if (pred.size() != truth.size()) throw CliError(BadData, a.data + ": could not align the prediction with the data");

    bench::MetricsReport r;
    r.model = lm.label;
    r.plan = plan ? plan->name : "";
    r.cell = "validate";
    const double eps = a.eps.value_or(plan ? plan->horizon_eps : 3.0);
    if (!(eps > 0.0)) throw CliError(BadConfig, "--eps must be positive");
    bench::score_prediction(r, truth, pred, eps);

    const fs::path dir = fs::path(s.out) / "validate" / lm.label;
    detail::write_file(dir / "prediction.csv", detail::csv_text(pred));
    auto j = bench::report_json(r);
    j["eps"] = eps;
    j["warnings"] = r.warnings;
    detail::write_file(dir / "metrics.json", j.dump(2) + "\n");

    if (!s.quiet) {
        io.out << lm.label << ": " << r.status << ", avg rel error " << detail::fmt(r.avg_rel_error) << ", mse "
               << detail::fmt(r.mse) << ", prediction horizon " << detail::fmt(r.prediction_horizon) << '\n';
        io.out << "wrote " << dir.string() << '\n';
    }
    return Ok;
}

// ---------------------------------------------------------------------------------------------
// control

inline int cmd_control(const GlobalOptions& g, const ControlArgs& a, Io io = {})
{
    const auto s = detail::resolve(g);
    const auto plan = detail::load_plan(s, a.system);
    if (!plan.control.enabled) throw CliError(BadConfig, "the plan has no control stage");
    const auto lm = detail::load_model(a.model, plan);
    const auto& model = *lm.predictor;
    if (model.input_dim() != plan.system.q) throw CliError(BadConfig, "model inputs do not match the plan's system");
    for (int i : model.measured_states())
        if (i >= plan.system.n) throw CliError(BadConfig, "model states do not match the plan's system");
    if (model.measured_states().empty() && model.state_dim() != plan.system.n)
        throw CliError(BadConfig, "model states do not match the plan's system");

    const auto stages = bench::simulate_stages(plan);
    bench::MetricsReport r;
    r.plan = plan.name;
    r.model = lm.label;
    r.cell = "base";
    std::optional<mpc::ClosedLoopResult> res;
    bench::run_control(r, res, plan, stages, model, derive_seed(plan.seed, "control", 0));

    const fs::path dir = fs::path(s.out) / (plan.name + "-control") / lm.label;
    std::ostringstream csv;
    mpc::write_closed_loop_csv(csv, *res, plan.control.update_steps, false);
    detail::write_file(dir / "control.csv", csv.str());
    detail::write_file(dir / "model.json", lm.json.dump(2) + "\n");
    auto j = bench::report_json(r);
    j["plan"] = plan.name;
    j["seed"] = plan.seed;
    j["message"] = r.message;
    detail::write_file(dir / "summary.json", j.dump(2) + "\n");

    if (!s.quiet) {
        io.out << plan.name << " " << lm.label << ": " << r.status << '\n';
        io.out << "terminal cumulative cost " << detail::fmt(r.terminal_cumulative_cost) << '\n';
        io.out << "mean solve time " << detail::fmt(r.mean_solve_time_s) << " s\n";
        io.out << "final error " << detail::fmt(r.final_error) << '\n';
        io.out << "success " << (r.control_success.value_or(false) ? "true" : "false") << '\n';
        io.out << "wrote " << dir.string() << '\n';
    }
    return Ok;
}

// ---------------------------------------------------------------------------------------------
// sweep

inline int cmd_sweep(const GlobalOptions& g, const SweepArgs& a, Io io = {})
{
    const auto s = detail::resolve(g);
    const auto plan = detail::load_plan(s, a.system);
    if (a.type != "all" && a.type != "experiment" && a.type != "length" && a.type != "noise")
        throw CliError(BadConfig, "--type must be all, experiment, length or noise");

    bench::RunOptions opt;
    opt.out_dir = s.out;
    opt.jobs = s.jobs;
    if (!s.quiet) opt.log = [&io](const std::string& m) { io.out << m << '\n'; };

    const auto lengths = a.lengths.empty() ? plan.sweeps.training_lengths : a.lengths;
    const auto etas = a.etas.empty() ? plan.sweeps.noise_levels : a.etas;
    const int realizations = a.realizations.value_or(plan.sweeps.realizations);
    if (realizations < 1) throw CliError(BadConfig, "--realizations must be >= 1");

    const auto print_rows = [&](const std::string& run_name, const std::vector<bench::MetricsReport>& rows) {
        if (s.quiet) return;
        for (const auto& r : rows) {
            if (!r.selected || std::isnan(r.terminal_cumulative_cost)) continue;
            io.out << run_name << " " << r.model << " " << r.cell << ": terminal cumulative cost "
                   << detail::fmt(r.terminal_cumulative_cost) << ", mean solve time " << detail::fmt(r.mean_solve_time_s)
                   << " s\n";
        }
        io.out << "wrote " << (fs::path(s.out) / run_name).string() << '\n';
    };

    try {
        if (a.type == "all" || a.type == "experiment") {
            const auto res = bench::run_experiment(plan, opt);
            print_rows(res.run_name, res.reports());
        }
        if (a.type == "length" || (a.type == "all" && !lengths.empty())) {
            if (lengths.empty()) throw CliError(BadConfig, "no training lengths given");
            const auto res = bench::sweep_training_length(plan, lengths, realizations, opt);
            print_rows(res.run_name, res.rows);
        }
        if (a.type == "noise" || (a.type == "all" && !etas.empty())) {
            if (etas.empty()) throw CliError(BadConfig, "no noise levels given");
            const auto res = bench::sweep_noise(plan, etas, realizations, opt);
            print_rows(res.run_name, res.rows);
        }
    } catch (const InvalidInput& e) {
        throw CliError(BadConfig, e.what());
    }
    return Ok;
}

/// Runs a command and maps every error onto its exit code.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err = std::cerr)
{
    try {
        return fn();
    } catch (const CliError& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return BadData;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return BadConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Failure;
    }
}

} // namespace sindympc::cli
