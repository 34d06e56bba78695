#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sindympc/bench/metrics.hpp"
#include "sindympc/bench/parallel.hpp"
#include "sindympc/bench/plan.hpp"
#include "sindympc/dynamics/csv.hpp"
#include "sindympc/dynamics/integrate.hpp"
#include "sindympc/features/library.hpp"
#include "sindympc/mpc/controller.hpp"
#include "sindympc/sysid/fit.hpp"
#include "sindympc/sysid/noise.hpp"
#include "sindympc/sysid/predict.hpp"

namespace sindympc::bench {

namespace fs = std::filesystem;

constexpr double not_computed = std::numeric_limits<double>::quiet_NaN();

/// One row of a report: a model evaluated in one experiment cell. Metrics that were not computed are NaN.
struct MetricsReport {
    std::string plan;
    std::string model;
    std::string cell;
    int training_samples = 0;
    double eta = 0.0;
    int realization = 0;
    /// ok, empty, fit-failed, diverged or control-failed.
    std::string status = "ok";
    double avg_rel_error = not_computed;
    double mse = not_computed;
    double prediction_horizon = not_computed;
    double terminal_cumulative_cost = not_computed;
    double total_cost = not_computed;
    /// Euclidean distance of the tracked final state from its reference.
    double final_error = not_computed;
    std::optional<bool> control_success;
    /// Chosen as the most predictive realization of its cell group.
    bool selected = false;
    double training_time_s = 0.0;
    double mean_solve_time_s = not_computed;
    std::vector<std::string> warnings;
    std::string message;
};

struct FittedModel {
    ModelRecipe recipe;
    std::optional<sysid::AnyModel> model;
    sysid::PredictorPtr predictor;
    double training_time_s = 0.0;
    std::vector<std::string> warnings;
};

/// Clean plant data of the three stages, sampled at the model step.
struct StageData {
    dynamics::Trajectory training;
    dynamics::Trajectory validation;
    dynamics::ExcitationSignal validation_signal;
    Vector control_x0;
    double control_t0 = 0.0;
};

struct CellOutcome {
    MetricsReport report;
    FittedModel fit;
    std::optional<dynamics::Trajectory> prediction;
    std::optional<mpc::ClosedLoopResult> control;
};

struct RunOptions {
    /// Root directory for artifacts; nothing is written when empty.
    std::string out_dir;
    /// Worker cap for independent cells; 1 runs serially.
    int jobs = 1;
    /// Progress messages.
    std::function<void(const std::string&)> log;
};

struct ExperimentResult {
    std::string run_name;
    StageData stages;
    std::vector<CellOutcome> outcomes;

    std::vector<MetricsReport> reports() const
    {
        std::vector<MetricsReport> out;
        for (const auto& o : outcomes) out.push_back(o.report);
        return out;
    }
    const CellOutcome& outcome(const std::string& model) const
    {
        for (const auto& o : outcomes)
            if (o.report.model == model) return o;
        throw InvalidInput("experiment has no model '" + model + "'");
    }
};

struct SweepResult {
    std::string run_name;
    std::vector<MetricsReport> rows;
    nlohmann::json summary;
};

// ---------------------------------------------------------------------------------------------
// Stages

/// Training start state: the plan's x0, perturbed uniformly by x0_jitter using the plan seed.
inline Vector training_start(const ExperimentPlan& plan)
{
    Vector x0 = plan.x0;
    if (plan.x0_jitter > 0.0) {
        std::mt19937_64 rng(derive_seed(plan.seed, "initial-state"));
        std::uniform_real_distribution<double> d(-plan.x0_jitter, plan.x0_jitter);
        for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += d(rng);
    }
    return x0;
}

inline StageData simulate_stages(const ExperimentPlan& plan)
{
    plan.validate();
    dynamics::IntegratorConfig ic;
    ic.dt = plan.plant_dt;
    ic.sample_every = plan.sample_every();
    StageData d;
    const double t_train = plan.training.duration;
    const auto train_signal = make_signal(plan.training.signal, t_train, derive_seed(plan.seed, "training"));
    d.training = dynamics::integrate(plan.system, training_start(plan), train_signal, 0.0, t_train, ic);

    const Vector xv = plan.validation.x0 ? *plan.validation.x0 : Vector(d.training.states.col(d.training.size() - 1));
    const double t_val = plan.validation.duration;
    d.validation_signal = make_signal(plan.validation.signal, t_train + t_val, derive_seed(plan.seed, "validation"));
    d.validation = dynamics::integrate(plan.system, xv, d.validation_signal, t_train, t_val, ic);
    d.validation.derivatives.resize(0, 0);

    d.control_x0 = plan.control.x0 ? *plan.control.x0 : Vector(d.validation.states.col(d.validation.size() - 1));
    d.control_t0 = t_train + t_val;
    return d;
}

// ---------------------------------------------------------------------------------------------
// Fitting

inline FittedModel fit_model(const ModelRecipe& recipe, const dynamics::Trajectory& train, const ExperimentPlan& plan)
{
    FittedModel f;
    f.recipe = recipe;
    const int q = plan.system.q;
    const int n = recipe.state_indices.empty() ? plan.system.n : static_cast<int>(recipe.state_indices.size());
    const std::optional<Vector> offset = recipe.goal_offset ? std::optional<Vector>(plan.goal_state()) : std::nullopt;

    const auto start = std::chrono::steady_clock::now();
    switch (recipe.kind) {
    case ModelKind::SINDYc:
    case ModelKind::PISINDYc: {
        sysid::SindyOptions opt;
        opt.state_indices = recipe.state_indices;
        opt.smoothing_window = recipe.smoothing_window;
        opt.smoothing_order = recipe.smoothing_order;
        const auto lib = features::polynomial_library(n, q, recipe.poly_order, recipe.include_constant, recipe.normalize);
        Vector lambdas = recipe.lambdas;
        if (recipe.adapt_lambda > 0.0) {
            auto a = sysid::adapt_lambda(train, lib, recipe.adapt_lambda, opt);
            lambdas = a.lambdas;
            f.warnings.insert(f.warnings.end(), a.warnings.begin(), a.warnings.end());
        }
        auto m = sysid::fit_sindyc(train, lib, lambdas, opt);
        f.warnings.insert(f.warnings.end(), m.warnings.begin(), m.warnings.end());
        f.model = std::move(m);
        break;
    }
    case ModelKind::DMDc: f.model = sysid::fit_dmdc(train, offset); break;
    case ModelKind::DelayDMDc: f.model = sysid::fit_delay_dmdc(train, recipe.delays, offset, recipe.lag); break;
    case ModelKind::eDMDc:
        f.model = sysid::fit_edmdc(train, features::polynomial_library(n, q, recipe.poly_order, recipe.include_constant));
        break;
    case ModelKind::Exact: break;
    }
    f.training_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (f.model) {
        if (auto* lm = std::get_if<sysid::LinearModel>(&*f.model))
            f.warnings.insert(f.warnings.end(), lm->warnings.begin(), lm->warnings.end());
        f.predictor = sysid::make_predictor(*f.model);
    } else {
        f.predictor = std::make_shared<sysid::PlantPredictor>(plan.system, plan.model_dt);
    }
    if (recipe.kind == ModelKind::SINDYc || recipe.kind == ModelKind::PISINDYc) {
        const int p = features::num_columns(features::polynomial_library(n, q, recipe.poly_order, recipe.include_constant));
        if (train.size() < p) {
            f.warnings.push_back("under-determined: " + std::to_string(train.size()) + " samples for " + std::to_string(p) +
                                 " library columns");
        }
    }
    return f;
}

// ---------------------------------------------------------------------------------------------
// Evaluation

/// Model rollout over the validation window. Samples after a divergence are +inf so that the metrics
/// report the failure instead of aborting.
inline dynamics::Trajectory rollout(const sysid::Predictor& model, const Vector& x0, const dynamics::ExcitationSignal& signal,
                                    double t0, double duration, double input_dt)
{
    const int steps = dynamics::steps_for(duration, model.dt());
    const int substeps = input_dt > 0.0 ? dynamics::steps_for(model.dt(), input_dt) : 1;
    const auto input = [&signal](double t) { return dynamics::eval_signal(signal, t); };
    dynamics::Trajectory traj;
    traj.times.resize(steps + 1);
    traj.states.resize(model.state_dim(), steps + 1);
    traj.inputs.resize(model.input_dim(), steps + 1);
    Vector s = model.lift(x0, input(t0));
    bool diverged = false;
    for (int k = 0; k <= steps; ++k) {
        const double t = t0 + k * model.dt();
        traj.times(k) = t;
        traj.inputs.col(k) = input(t);
        if (diverged) {
            traj.states.col(k).setConstant(std::numeric_limits<double>::infinity());
            continue;
        }
        traj.states.col(k) = model.observe(s);
        if (k == steps) break;
        s = model.advance_resolved(s, input, t, substeps);
        if (!s.allFinite() || s.cwiseAbs().maxCoeff() > 1e150) diverged = true;
    }
    return traj;
}

/// Validation truth in the model's coordinates.
inline dynamics::Trajectory model_truth(const dynamics::Trajectory& validation, const ModelRecipe& recipe)
{
    return recipe.state_indices.empty() ? validation : validation.select_states(recipe.state_indices);
}

inline void score_prediction(MetricsReport& r, const dynamics::Trajectory& truth, const dynamics::Trajectory& pred, double eps)
{
    auto rel = avg_relative_error(truth, pred);
    r.avg_rel_error = rel.value;
    r.warnings.insert(r.warnings.end(), rel.warnings.begin(), rel.warnings.end());
    r.mse = mse(truth, pred);
    r.prediction_horizon = prediction_horizon(truth, pred, eps);
    if (!pred.states.allFinite()) {
        r.status = "diverged";
        r.message = "model rollout diverged during validation";
    }
}

/// The plan's controller settings adapted to one model: its timestep and its state coordinates.
inline mpc::MpcConfig model_config(const ExperimentPlan& plan, const sysid::Predictor& model)
{
    mpc::MpcConfig cfg = plan.control.mpc;
    cfg.model_dt = model.dt();
    std::vector<mpc::StateConstraint> kept;
    for (const auto& c : cfg.state_constraints)
        if (c.index < model.state_dim()) kept.push_back(c);
    cfg.state_constraints = std::move(kept);
    return cfg;
}

/// Reference for the tracked model states, with time measured in plant time.
inline mpc::Reference make_reference(const ExperimentPlan& plan, const sysid::Predictor& model, const mpc::MpcConfig& cfg,
                                     double control_t0)
{
    const auto& spec = plan.control.reference;
    switch (spec.kind) {
    case ReferenceKind::Constant: return mpc::constant_reference(spec.value);
    case ReferenceKind::F8:
        return [control_t0](double t) { return Vector::Constant(1, dynamics::f8_reference(t - control_t0)); };
    case ReferenceKind::Goal: break;
    }
    const Vector goal = plan.goal_state();
    const auto& measured = model.measured_states();
    const int nt = cfg.num_tracked(model.state_dim());
    Vector ref(nt);
    for (int i = 0; i < nt; ++i) {
        const int model_index = cfg.tracked.empty() ? i : cfg.tracked[static_cast<std::size_t>(i)];
        const int plant_index = measured.empty() ? model_index : measured[static_cast<std::size_t>(model_index)];
        ref(i) = goal(plant_index);
    }
    return mpc::constant_reference(ref);
}

inline void run_control(MetricsReport& r, std::optional<mpc::ClosedLoopResult>& out, const ExperimentPlan& plan,
                        const StageData& stages, const sysid::Predictor& model, std::uint64_t seed)
{
    const auto cfg = model_config(plan, model);
    const auto ref = make_reference(plan, model, cfg, stages.control_t0);
    mpc::ClosedLoopOptions opt;
    opt.plant_dt = plan.plant_dt;
    opt.update_steps = plan.control.update_steps;
    opt.seed = seed;
    auto res = mpc::run_closed_loop(plan.system, model, cfg, ref, stages.control_x0, stages.control_t0, plan.control.duration, opt);

    r.total_cost = res.total_cost();
    r.mean_solve_time_s = res.mean_solve_time();
    const int window = plan.control.cost_window > 0.0 ? dynamics::steps_for(plan.control.cost_window, plan.plant_dt)
                                                      : dynamics::steps_for(plan.control.duration, plan.plant_dt);
    if (res.failed || window >= res.cumulative_cost.size()) {
        r.terminal_cumulative_cost = res.failed ? std::numeric_limits<double>::infinity() : r.total_cost;
    } else {
        r.terminal_cumulative_cost = res.cumulative_cost(window);
    }

    const int last = res.trajectory.size() - 1;
    const Vector xf = model.measure(res.trajectory.states.col(last));
    const Vector tracked = mpc::tracked_part(xf, cfg);
    const Vector target = ref(res.trajectory.times(last));
    r.final_error = (tracked - target).norm();
    bool ok = !res.failed;
    if (plan.control.success_radius > 0.0) ok = ok && r.final_error < plan.control.success_radius;
    if (plan.control.success_relative > 0.0) {
        for (Eigen::Index i = 0; i < tracked.size(); ++i)
            ok = ok && std::abs(tracked(i) - target(i)) <= plan.control.success_relative * std::abs(target(i));
    }
    r.control_success = ok;
    if (res.failed) {
        r.status = "control-failed";
        r.message = res.message;
    }
    out = std::move(res);
}

/// Fits one recipe on the given training data and scores it; failures are recorded in the report.
inline CellOutcome evaluate_cell(const ExperimentPlan& plan, const ModelRecipe& recipe, const dynamics::Trajectory& train,
                                 const StageData& stages, bool with_control, std::uint64_t seed)
{
    CellOutcome o;
    auto& r = o.report;
    r.plan = plan.name;
    r.model = recipe.name();
    r.training_samples = train.size();
    try {
        o.fit = fit_model(recipe, train, plan);
        r.training_time_s = o.fit.training_time_s;
        r.warnings = o.fit.warnings;
    } catch (const Error& e) {
        r.status = "fit-failed";
        r.message = e.what();
        return o;
    }
    try {
        const auto& model = *o.fit.predictor;
        const auto truth = model_truth(stages.validation, recipe);
        o.prediction = rollout(model, truth.states.col(0), stages.validation_signal, truth.times(0), plan.validation.duration,
                               plan.plant_dt);
        score_prediction(r, truth, *o.prediction, plan.horizon_eps);
        if (with_control && plan.control.enabled) run_control(r, o.control, plan, stages, model, seed);
    } catch (const Error& e) {
        r.status = "fit-failed";
        r.message = e.what();
    }
    return o;
}

// ---------------------------------------------------------------------------------------------
// Reports and artifacts

namespace detail {

inline std::string field(double v)
{
    return std::isnan(v) ? std::string{} : io::format_double(v);
}

inline std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

inline std::string join(const std::vector<std::string>& parts, const char* sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

inline nlohmann::json number(double v)
{
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline std::string format_eta(double eta)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eta);
    return buf;
}

inline std::string length_cell(int m, int realization, bool noisy)
{
    char buf[48];
    if (noisy) {
        std::snprintf(buf, sizeof buf, "m%05d_r%02d", m, realization);
    } else {
        std::snprintf(buf, sizeof buf, "m%05d", m);
    }
    return buf;
}

inline std::string noise_cell(double eta, int realization)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "eta%s_r%02d", format_eta(eta).c_str(), realization);
    return buf;
}

inline void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw Error("failed writing '" + path.string() + "'");
}

} // namespace detail

inline const char* report_header()
{
    return "plan,model,cell,training_samples,eta,realization,status,avg_rel_error,mse,prediction_horizon,"
           "terminal_cumulative_cost,total_cost,final_error,control_success,selected,warnings,message";
}

/// Report CSV, one row per model and cell. Wall-clock timings are kept out so equal seeds give equal files.
inline std::string report_csv(const std::vector<MetricsReport>& rows)
{
    std::ostringstream os;
    os << report_header() << '\n';
    for (const auto& r : rows) {
        os << r.plan << ',' << r.model << ',' << r.cell << ',' << r.training_samples << ',' << io::format_double(r.eta) << ','
           << r.realization << ',' << r.status << ',' << detail::field(r.avg_rel_error) << ',' << detail::field(r.mse) << ','
           << detail::field(r.prediction_horizon) << ',' << detail::field(r.terminal_cumulative_cost) << ','
           << detail::field(r.total_cost) << ',' << detail::field(r.final_error) << ','
           << (r.control_success ? (*r.control_success ? "true" : "false") : "") << ',' << (r.selected ? "true" : "false")
           << ',' << detail::csv_quote(detail::join(r.warnings, "; ")) << ',' << detail::csv_quote(r.message) << '\n';
    }
    return os.str();
}

inline std::string timings_csv(const std::vector<MetricsReport>& rows)
{
    std::ostringstream os;
    os << "plan,model,cell,training_time_s,mean_solve_time_s\n";
    for (const auto& r : rows) {
        os << r.plan << ',' << r.model << ',' << r.cell << ',' << io::format_double(r.training_time_s) << ','
           << detail::field(r.mean_solve_time_s) << '\n';
    }
    return os.str();
}

inline nlohmann::json report_json(const MetricsReport& r)
{
    nlohmann::json j{{"model", r.model},
                     {"cell", r.cell},
                     {"training_samples", r.training_samples},
                     {"eta", r.eta},
                     {"realization", r.realization},
                     {"status", r.status},
                     {"avg_rel_error", detail::number(r.avg_rel_error)},
                     {"mse", detail::number(r.mse)},
                     {"prediction_horizon", detail::number(r.prediction_horizon)},
                     {"terminal_cumulative_cost", detail::number(r.terminal_cumulative_cost)},
                     {"total_cost", detail::number(r.total_cost)},
                     {"final_error", detail::number(r.final_error)},
                     {"selected", r.selected}};
    j["control_success"] = r.control_success ? nlohmann::json(*r.control_success) : nlohmann::json(nullptr);
    return j;
}

inline fs::path cell_dir(const fs::path& run_dir, const MetricsReport& r)
{
    return run_dir / r.model / r.cell;
}

inline nlohmann::json model_json(const FittedModel& f, const ExperimentPlan& plan)
{
    if (!f.model) return {{"type", "exact"}, {"system", plan.system_name}, {"dt", plan.model_dt}};
    return std::visit([](const auto& m) { return sysid::to_json(m); }, *f.model);
}

inline void write_cell_artifacts(const fs::path& run_dir, const CellOutcome& o, const ExperimentPlan& plan)
{
    const auto dir = cell_dir(run_dir, o.report);
    fs::create_directories(dir);
    if (o.fit.predictor) detail::write_text(dir / "model.json", model_json(o.fit, plan).dump(2) + "\n");
    if (o.prediction) {
        std::ostringstream os;
        io::write_trajectory_csv(os, *o.prediction);
        detail::write_text(dir / "prediction.csv", os.str());
    }
    if (o.control) {
        std::ostringstream os;
        mpc::write_closed_loop_csv(os, *o.control, plan.control.update_steps, false);
        detail::write_text(dir / "control.csv", os.str());
    }
}

inline void write_stage_artifacts(const fs::path& run_dir, const StageData& stages, const ExperimentPlan& plan)
{
    fs::create_directories(run_dir);
    detail::write_text(run_dir / "plan.json", to_json(plan).dump(2) + "\n");
    std::ostringstream tr, va;
    io::write_trajectory_csv(tr, stages.training);
    io::write_trajectory_csv(va, stages.validation);
    detail::write_text(run_dir / "training.csv", tr.str());
    detail::write_text(run_dir / "validation.csv", va.str());
}

inline void write_reports(const fs::path& run_dir, const std::vector<MetricsReport>& rows, const nlohmann::json& summary)
{
    detail::write_text(run_dir / "report.csv", report_csv(rows));
    detail::write_text(run_dir / "timings.csv", timings_csv(rows));
    detail::write_text(run_dir / "summary.json", summary.dump(2) + "\n");
}

/// Recomputes the prediction metrics of one report row from the artifacts on disk.
inline MetricsReport recompute_prediction_metrics(const fs::path& run_dir, const ExperimentPlan& plan, const MetricsReport& row)
{
    const ModelRecipe* recipe = nullptr;
    for (const auto& r : plan.recipes)
        if (r.name() == row.model) recipe = &r;
    require(recipe != nullptr, "recompute: plan has no model '" + row.model + "'");
    const auto validation = io::read_trajectory_csv((run_dir / "validation.csv").string());
    const auto pred = io::read_trajectory_csv((cell_dir(run_dir, row) / "prediction.csv").string());
    MetricsReport out = row;
    out.warnings.clear();
    out.status = "ok";
    score_prediction(out, model_truth(validation, *recipe), pred, plan.horizon_eps);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Experiments

inline void log_line(const RunOptions& opt, const std::string& msg)
{
    if (opt.log) opt.log(msg);
}

inline std::string format_metric(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

/// Training, validation and control stage for every recipe of the plan.
inline ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& opt = {})
{
    ExperimentResult res;
    res.run_name = plan.name;
    res.stages = simulate_stages(plan);
    dynamics::Trajectory train = res.stages.training;
    if (plan.training.noise_eta > 0.0)
        train = sysid::add_noise(train, {plan.training.noise_eta, derive_seed(plan.seed, "noise", 0)});

    res.outcomes.resize(plan.recipes.size());
    parallel_for(static_cast<int>(plan.recipes.size()), opt.jobs, [&](int i) {
        const auto& recipe = plan.recipes[static_cast<std::size_t>(i)];
        auto o = evaluate_cell(plan, recipe, train, res.stages, true, derive_seed(plan.seed, "control", static_cast<std::uint64_t>(i)));
        o.report.cell = "base";
        o.report.eta = plan.training.noise_eta;
        o.report.selected = true;
        res.outcomes[static_cast<std::size_t>(i)] = std::move(o);
    });
    for (const auto& o : res.outcomes) {
        const auto& r = o.report;
        log_line(opt, plan.name + " " + r.model + ": " + r.status + ", avg rel error " + format_metric(r.avg_rel_error) +
                          ", terminal cost " + format_metric(r.terminal_cumulative_cost));
    }

    if (!opt.out_dir.empty()) {
        const fs::path run_dir = fs::path(opt.out_dir) / res.run_name;
        write_stage_artifacts(run_dir, res.stages, plan);
        for (const auto& o : res.outcomes) write_cell_artifacts(run_dir, o, plan);
        nlohmann::json summary{{"plan", plan.name}, {"seed", plan.seed}, {"models", nlohmann::json::array()}};
        for (const auto& o : res.outcomes) summary["models"].push_back(report_json(o.report));
        write_reports(run_dir, res.reports(), summary);
    }
    return res;
}

namespace detail {

inline nlohmann::json band_json(const std::vector<double>& values)
{
    if (values.empty()) return nullptr;
    return {{"p25", number(percentile(values, 25.0))}, {"median", number(percentile(values, 50.0))},
            {"p75", number(percentile(values, 75.0))}};
}

} // namespace detail

/// Fits on growing prefixes of the training data. With training noise each length gets several noise
/// realizations; the most predictive one (lowest validation error) is run in closed loop.
inline SweepResult sweep_training_length(const ExperimentPlan& plan, const std::vector<int>& lengths, int realizations,
                                         const RunOptions& opt = {})
{
    for (std::size_t i = 1; i < lengths.size(); ++i)
        require(lengths[i] > lengths[i - 1], "sweep_training_length: lengths must be strictly increasing");
    require(realizations >= 1, "sweep_training_length: realizations must be >= 1");
    const bool noisy = plan.training.noise_eta > 0.0;
    const int R = noisy ? realizations : 1;
    const StageData stages = simulate_stages(plan);
    const int nm = static_cast<int>(plan.recipes.size());
    const int nl = static_cast<int>(lengths.size());

    SweepResult res;
    res.run_name = plan.name + "-length-sweep";
    const fs::path run_dir = opt.out_dir.empty() ? fs::path{} : fs::path(opt.out_dir) / res.run_name;
    std::vector<CellOutcome> cells(static_cast<std::size_t>(nl * R * nm));
    const auto index = [&](int l, int r, int m) { return static_cast<std::size_t>((l * R + r) * nm + m); };

    parallel_for(nl * R, opt.jobs, [&](int c) {
        const int l = c / R, r = c % R;
        const int m = lengths[static_cast<std::size_t>(l)];
        const int take = std::min(m, stages.training.size());
        dynamics::Trajectory train = stages.training.slice(0, take);
        if (noisy && take > 0) train = sysid::add_noise(train, {plan.training.noise_eta, derive_seed(plan.seed, "noise", static_cast<std::uint64_t>(c))});
        for (int k = 0; k < nm; ++k) {
            CellOutcome o;
            if (m == 0) {
                o.report.plan = plan.name;
                o.report.model = plan.recipes[static_cast<std::size_t>(k)].name();
                o.report.status = "empty";
            } else {
                o = evaluate_cell(plan, plan.recipes[static_cast<std::size_t>(k)], train, stages, false, 0);
                if (m > take) o.report.warnings.push_back("only " + std::to_string(take) + " training samples available");
            }
            o.report.cell = detail::length_cell(m, r, noisy);
            o.report.eta = plan.training.noise_eta;
            o.report.realization = r;
            cells[index(l, r, k)] = std::move(o);
        }
    });

    // Best realization per (length, model), then its closed loop.
    std::vector<std::size_t> chosen;
    for (int l = 0; l < nl; ++l) {
        for (int k = 0; k < nm; ++k) {
            std::optional<std::size_t> best;
            for (int r = 0; r < R; ++r) {
                const auto i = index(l, r, k);
                const auto& rep = cells[i].report;
                if (!cells[i].fit.predictor || std::isnan(rep.avg_rel_error)) continue;
                if (!best || rep.avg_rel_error < cells[*best].report.avg_rel_error) best = i;
            }
            if (best) chosen.push_back(*best);
        }
    }
    if (plan.control.enabled) {
        parallel_for(static_cast<int>(chosen.size()), opt.jobs, [&](int c) {
            auto& o = cells[chosen[static_cast<std::size_t>(c)]];
            try {
                run_control(o.report, o.control, plan, stages, *o.fit.predictor, derive_seed(plan.seed, "control", chosen[static_cast<std::size_t>(c)]));
            } catch (const Error& e) {
                o.report.status = "control-failed";
                o.report.message = e.what();
            }
        });
    }
    for (auto i : chosen) cells[i].report.selected = true;

    for (const auto& o : cells) res.rows.push_back(o.report);
    res.summary = {{"plan", plan.name}, {"seed", plan.seed}, {"eta", plan.training.noise_eta}, {"realizations", R}};
    nlohmann::json by_model = nlohmann::json::object();
    for (int k = 0; k < nm; ++k) {
        nlohmann::json entries = nlohmann::json::array();
        for (int l = 0; l < nl; ++l) {
            std::vector<double> errs;
            nlohmann::json sel = nullptr;
            for (int r = 0; r < R; ++r) {
                const auto& rep = cells[index(l, r, k)].report;
                if (!std::isnan(rep.avg_rel_error)) errs.push_back(rep.avg_rel_error);
                if (rep.selected) sel = report_json(rep);
            }
            entries.push_back({{"training_samples", lengths[static_cast<std::size_t>(l)]},
                               {"avg_rel_error", detail::band_json(errs)},
                               {"selected", sel}});
        }
        by_model[plan.recipes[static_cast<std::size_t>(k)].name()] = entries;
    }
    res.summary["models"] = by_model;

    for (int l = 0; l < nl; ++l) {
        for (int k = 0; k < nm; ++k) {
            for (int r = 0; r < R; ++r) {
                const auto& rep = cells[index(l, r, k)].report;
                if (rep.selected)
                    log_line(opt, res.run_name + " m=" + std::to_string(lengths[static_cast<std::size_t>(l)]) + " " + rep.model +
                                      ": avg rel error " + format_metric(rep.avg_rel_error) + ", terminal cost " +
                                      format_metric(rep.terminal_cumulative_cost));
            }
        }
    }
    if (!run_dir.empty()) {
        write_stage_artifacts(run_dir, stages, plan);
        for (const auto& o : cells)
            if (o.report.status != "empty") write_cell_artifacts(run_dir, o, plan);
        write_reports(run_dir, res.rows, res.summary);
    }
    return res;
}

/// Fits every recipe on the full training data corrupted at each noise level, several realizations each.
inline SweepResult sweep_noise(const ExperimentPlan& plan, const std::vector<double>& etas, int realizations,
                               const RunOptions& opt = {})
{
    for (std::size_t i = 1; i < etas.size(); ++i) require(etas[i] > etas[i - 1], "sweep_noise: noise levels must be strictly increasing");
    for (double e : etas) require(e >= 0.0, "sweep_noise: noise levels must be >= 0");
    require(realizations >= 1, "sweep_noise: realizations must be >= 1");
    const StageData stages = simulate_stages(plan);
    const int nm = static_cast<int>(plan.recipes.size());
    const int ne = static_cast<int>(etas.size());
    const int R = realizations;

    SweepResult res;
    res.run_name = plan.name + "-noise-sweep";
    std::vector<CellOutcome> cells(static_cast<std::size_t>(ne * R * nm));
    const auto index = [&](int e, int r, int m) { return static_cast<std::size_t>((e * R + r) * nm + m); };

    parallel_for(ne * R, opt.jobs, [&](int c) {
        const int e = c / R, r = c % R;
        const double eta = etas[static_cast<std::size_t>(e)];
        const auto train = sysid::add_noise(stages.training, {eta, derive_seed(plan.seed, "noise", static_cast<std::uint64_t>(c))});
        for (int k = 0; k < nm; ++k) {
            auto o = evaluate_cell(plan, plan.recipes[static_cast<std::size_t>(k)], train, stages, false, 0);
            o.report.cell = detail::noise_cell(eta, r);
            o.report.eta = eta;
            o.report.realization = r;
            cells[index(e, r, k)] = std::move(o);
        }
    });

    for (const auto& o : cells) res.rows.push_back(o.report);
    res.summary = {{"plan", plan.name}, {"seed", plan.seed}, {"realizations", R}};
    nlohmann::json by_model = nlohmann::json::object();
    for (int k = 0; k < nm; ++k) {
        nlohmann::json entries = nlohmann::json::array();
        for (int e = 0; e < ne; ++e) {
            std::vector<double> errs, mses, horizons;
            for (int r = 0; r < R; ++r) {
                const auto& rep = cells[index(e, r, k)].report;
                if (std::isnan(rep.avg_rel_error)) continue;
                errs.push_back(rep.avg_rel_error);
                mses.push_back(rep.mse);
                horizons.push_back(rep.prediction_horizon);
            }
            entries.push_back({{"eta", etas[static_cast<std::size_t>(e)]},
                               {"avg_rel_error", detail::band_json(errs)},
                               {"mse", detail::band_json(mses)},
                               {"prediction_horizon", detail::band_json(horizons)}});
            if (!errs.empty())
                log_line(opt, res.run_name + " eta=" + detail::format_eta(etas[static_cast<std::size_t>(e)]) + " " +
                                  plan.recipes[static_cast<std::size_t>(k)].name() + ": median avg rel error " +
                                  format_metric(median(errs)) + ", median horizon " + format_metric(median(horizons)));
        }
        by_model[plan.recipes[static_cast<std::size_t>(k)].name()] = entries;
    }
    res.summary["models"] = by_model;

    if (!opt.out_dir.empty()) {
        const fs::path run_dir = fs::path(opt.out_dir) / res.run_name;
        write_stage_artifacts(run_dir, stages, plan);
        for (const auto& o : cells) write_cell_artifacts(run_dir, o, plan);
        write_reports(run_dir, res.rows, res.summary);
    }
    return res;
}

/// Median of one metric over the rows of a model (NaN rows skipped).
inline double median_of(const std::vector<MetricsReport>& rows, const std::string& model, double MetricsReport::*metric,
                        std::optional<double> eta = std::nullopt)
{
    std::vector<double> v;
    for (const auto& r : rows) {
        if (r.model != model || std::isnan(r.*metric)) continue;
        if (eta && std::abs(r.eta - *eta) > 1e-12) continue;
        v.push_back(r.*metric);
    }
    return v.empty() ? not_computed : median(v);
}

} // namespace sindympc::bench
