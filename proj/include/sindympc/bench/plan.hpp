#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/signal.hpp"
#include "sindympc/dynamics/system.hpp"
#include "sindympc/mpc/config.hpp"
#include "sindympc/sysid/model.hpp"

namespace sindympc::bench {

using nlohmann::json;

enum class ModelKind { SINDYc, PISINDYc, DMDc, DelayDMDc, eDMDc, Exact };

inline std::string to_string(ModelKind k)
{
    switch (k) {
    case ModelKind::SINDYc: return "sindyc";
    case ModelKind::PISINDYc: return "pi-sindyc";
    case ModelKind::DMDc: return "dmdc";
    case ModelKind::DelayDMDc: return "delay-dmdc";
    case ModelKind::eDMDc: return "edmdc";
    case ModelKind::Exact: return "exact";
    }
    return "unknown";
}

inline ModelKind model_kind_from_string(const std::string& s)
{
    for (auto k : {ModelKind::SINDYc, ModelKind::PISINDYc, ModelKind::DMDc, ModelKind::DelayDMDc, ModelKind::eDMDc,
                   ModelKind::Exact}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidInput("unknown model kind '" + s + "'");
}

/// How to fit one model from training data.
struct ModelRecipe {
    ModelKind kind = ModelKind::SINDYc;
    /// Output directory name; defaults to the kind name.
    std::string label;
    int poly_order = 3;
    bool include_constant = true;
    bool normalize = false;
    /// STLS thresholds, one per modelled state.
    Vector lambdas;
    /// When positive, thresholds start here and shrink by 10 until each row has a term.
    double adapt_lambda = 0.0;
    /// Plant states the model describes (PI-SINDYc); empty means all.
    std::vector<int> state_indices;
    /// Linear models: regress on deviations from the plan's goal state.
    bool goal_offset = false;
    int delays = 1;
    int lag = 1;
    /// Savitzky-Golay window and order for derivatives of data without measured derivatives.
    int smoothing_window = 1;
    int smoothing_order = 3;

    std::string name() const { return label.empty() ? to_string(kind) : label; }
};

/// Serializable description of an excitation signal. Random signals draw their schedule from a seed
/// derived from the plan seed and the stage name.
struct SignalSpec {
    dynamics::SignalKind kind = dynamics::SignalKind::Zero;
    double amplitude = 1.0;
    double offset = 0.0;
    double frequency = 1.0;
    int components = 20;
    double base_frequency = 0.01;
    double level_min = 0.0;
    double level_max = 1.0;
    double hold_min = 1.0;
    double hold_max = 1.0;
};

inline dynamics::ExcitationSignal make_signal(const SignalSpec& s, double horizon, std::uint64_t seed)
{
    using dynamics::SignalKind;
    switch (s.kind) {
    case SignalKind::Zero: return dynamics::zero_signal();
    case SignalKind::SchroederSweep: return dynamics::schroeder_sweep(s.amplitude, s.components, s.base_frequency, s.offset);
    case SignalKind::SineProduct: return dynamics::sine_product(s.amplitude);
    case SignalKind::CubedSine: return dynamics::cubed_sine(s.amplitude, s.frequency);
    case SignalKind::PRBS: return dynamics::prbs(s.amplitude, s.hold_min, horizon, seed, s.offset);
    case SignalKind::PiecewiseConstantRandom:
        return dynamics::piecewise_constant_random(s.level_min, s.level_max, s.hold_min, s.hold_max, horizon, seed);
    case SignalKind::Custom: break;
    }
    throw InvalidInput("custom signals cannot be described in a plan");
}

enum class ReferenceKind { Goal, Constant, F8 };

/// Reference for the tracked states. Goal uses the plan's goal state restricted to the tracked states;
/// F8 is the commanded angle-of-attack profile with time measured from the start of the control stage.
struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::Goal;
    Vector value;
};

struct TrainingStage {
    SignalSpec signal;
    double duration = 0.0;
    /// Relative measurement noise on the training states.
    double noise_eta = 0.0;
};

struct ValidationStage {
    SignalSpec signal;
    double duration = 0.0;
    /// Starting state; by default validation continues from the end of training.
    std::optional<Vector> x0;
};

struct ControlStage {
    bool enabled = true;
    mpc::MpcConfig mpc;
    ReferenceSpec reference;
    double duration = 0.0;
    /// Plant steps between controller updates.
    int update_steps = 1;
    /// Starting state; by default control continues from the end of validation.
    std::optional<Vector> x0;
    /// Cumulative cost is reported over the first cost_window time units (0: the whole run).
    double cost_window = 0.0;
    /// Success: the tracked final state lies within this Euclidean distance of the reference ...
    double success_radius = 0.0;
    /// ... or every tracked state lies within this relative tolerance of its reference.
    double success_relative = 0.0;
};

struct SweepSpec {
    /// Training lengths in samples, strictly increasing.
    std::vector<int> training_lengths;
    /// Noise levels, strictly increasing.
    std::vector<double> noise_levels;
    int realizations = 1;
};

struct ExperimentPlan {
    std::string name;
    std::string system_name;
    dynamics::SystemSpec system;
    Vector x0;
    /// Half-width of a uniform seed-dependent perturbation of the training start state.
    double x0_jitter = 0.0;
    double plant_dt = 0.01;
    double model_dt = 0.01;
    /// Target state for goal references and goal offsets; defaults to the system's first equilibrium.
    std::optional<Vector> goal;
    TrainingStage training;
    ValidationStage validation;
    std::vector<ModelRecipe> recipes;
    /// Error radius of the prediction horizon.
    double horizon_eps = 3.0;
    ControlStage control;
    SweepSpec sweeps;
    std::uint64_t seed = 0;

    int sample_every() const;
    Vector goal_state() const;
    void validate() const;
};

inline int ExperimentPlan::sample_every() const
{
    const double r = model_dt / plant_dt;
    const double k = std::round(r);
    require(k >= 1.0 && std::abs(r - k) <= 1e-9 * r, "plan: model dt must be a multiple of the plant dt");
    return static_cast<int>(k);
}

inline Vector ExperimentPlan::goal_state() const
{
    if (goal) return *goal;
    return dynamics::equilibria(system).front();
}

inline void ExperimentPlan::validate() const
{
    require(!name.empty(), "plan: name must not be empty");
    require(x0.size() == system.n, "plan: x0 must have " + std::to_string(system.n) + " entries");
    require(x0_jitter >= 0.0, "plan: x0_jitter must be >= 0");
    require(plant_dt > 0.0 && model_dt > 0.0, "plan: timesteps must be positive");
    (void)sample_every();
    require(training.duration > 0.0, "plan: training duration must be positive");
    require(validation.duration > 0.0, "plan: validation duration must be positive");
    require(training.noise_eta >= 0.0, "plan: noise level must be >= 0");
    require(horizon_eps > 0.0, "plan: horizon radius must be positive");
    if (validation.x0) require(validation.x0->size() == system.n, "plan: validation x0 has wrong dimension");
    if (goal) require(goal->size() == system.n, "plan: goal has wrong dimension");
    for (const auto& r : recipes) {
        for (int i : r.state_indices) require(i >= 0 && i < system.n, "plan: recipe state index out of range");
        const int n = r.state_indices.empty() ? system.n : static_cast<int>(r.state_indices.size());
        const bool sparse = r.kind == ModelKind::SINDYc || r.kind == ModelKind::PISINDYc;
        if (sparse && r.adapt_lambda <= 0.0) {
            require(r.lambdas.size() == n, "plan: recipe '" + r.name() + "' needs one threshold per state");
        }
        require(r.poly_order >= 1 && r.delays >= 1 && r.lag >= 1, "plan: recipe '" + r.name() + "' has invalid orders");
    }
    if (control.enabled) {
        require(control.duration > 0.0, "plan: control duration must be positive");
        require(control.update_steps >= 1, "plan: update interval must be >= 1 plant step");
        require(control.cost_window >= 0.0, "plan: cost window must be >= 0");
        if (control.x0) require(control.x0->size() == system.n, "plan: control x0 has wrong dimension");
    }
    for (std::size_t i = 1; i < sweeps.training_lengths.size(); ++i)
        require(sweeps.training_lengths[i] > sweeps.training_lengths[i - 1], "plan: training lengths must be strictly increasing");
    for (std::size_t i = 1; i < sweeps.noise_levels.size(); ++i)
        require(sweeps.noise_levels[i] > sweeps.noise_levels[i - 1], "plan: noise levels must be strictly increasing");
    for (int m : sweeps.training_lengths) require(m >= 0, "plan: training lengths must be >= 0");
    for (double e : sweeps.noise_levels) require(e >= 0.0, "plan: noise levels must be >= 0");
    require(sweeps.realizations >= 1, "plan: realizations must be >= 1");
}

// ---------------------------------------------------------------------------------------------
// JSON

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) throw InvalidInput(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw InvalidInput(where + ": unknown key '" + key + "'");
    }
}

inline json vec(const Vector& v)
{
    return sysid::vector_to_json(v);
}

inline std::optional<Vector> optional_vec(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return sysid::vector_from_json(j.at(key));
}

} // namespace detail

inline json to_json(const SignalSpec& s)
{
    using dynamics::SignalKind;
    json j{{"kind", dynamics::to_string(s.kind)}};
    switch (s.kind) {
    case SignalKind::SchroederSweep:
        j["amplitude"] = s.amplitude;
        j["components"] = s.components;
        j["base_frequency"] = s.base_frequency;
        j["offset"] = s.offset;
        break;
    case SignalKind::SineProduct: j["amplitude"] = s.amplitude; break;
    case SignalKind::CubedSine:
        j["amplitude"] = s.amplitude;
        j["frequency"] = s.frequency;
        break;
    case SignalKind::PRBS:
        j["amplitude"] = s.amplitude;
        j["offset"] = s.offset;
        j["clock"] = s.hold_min;
        break;
    case SignalKind::PiecewiseConstantRandom:
        j["level_min"] = s.level_min;
        j["level_max"] = s.level_max;
        j["hold_min"] = s.hold_min;
        j["hold_max"] = s.hold_max;
        break;
    default: break;
    }
    return j;
}

inline SignalSpec signal_spec_from_json(const json& j)
{
    detail::check_keys(j,
                       {"kind", "amplitude", "offset", "frequency", "components", "base_frequency", "level_min", "level_max",
                        "hold_min", "hold_max", "clock"},
                       "signal");
    SignalSpec s;
    s.kind = dynamics::signal_kind_from_string(j.at("kind").get<std::string>());
    if (s.kind == dynamics::SignalKind::Custom) throw InvalidInput("signal: custom signals cannot be configured");
    s.amplitude = j.value("amplitude", s.amplitude);
    s.offset = j.value("offset", s.offset);
    s.frequency = j.value("frequency", s.frequency);
    s.components = j.value("components", s.components);
    s.base_frequency = j.value("base_frequency", s.base_frequency);
    s.level_min = j.value("level_min", s.level_min);
    s.level_max = j.value("level_max", s.level_max);
    s.hold_min = j.value("hold_min", s.hold_min);
    s.hold_max = j.value("hold_max", s.hold_max);
    if (j.contains("clock")) s.hold_min = s.hold_max = j.at("clock").get<double>();
    return s;
}

inline json to_json(const ModelRecipe& r)
{
    json j{{"kind", to_string(r.kind)}};
    if (!r.label.empty()) j["label"] = r.label;
    switch (r.kind) {
    case ModelKind::SINDYc:
    case ModelKind::PISINDYc:
        j["poly_order"] = r.poly_order;
        j["include_constant"] = r.include_constant;
        j["normalize"] = r.normalize;
        j["lambdas"] = detail::vec(r.lambdas);
        if (r.adapt_lambda > 0.0) j["adapt_lambda"] = r.adapt_lambda;
        j["smoothing_window"] = r.smoothing_window;
        j["smoothing_order"] = r.smoothing_order;
        break;
    case ModelKind::DMDc: j["goal_offset"] = r.goal_offset; break;
    case ModelKind::DelayDMDc:
        j["goal_offset"] = r.goal_offset;
        j["delays"] = r.delays;
        j["lag"] = r.lag;
        break;
    case ModelKind::eDMDc:
        j["poly_order"] = r.poly_order;
        j["include_constant"] = r.include_constant;
        break;
    case ModelKind::Exact: break;
    }
    if (!r.state_indices.empty()) j["state_indices"] = r.state_indices;
    return j;
}

inline ModelRecipe recipe_from_json(const json& j)
{
    detail::check_keys(j,
                       {"kind", "label", "poly_order", "include_constant", "normalize", "lambdas", "adapt_lambda",
                        "state_indices", "goal_offset", "delays", "lag", "smoothing_window",
                        "smoothing_order"},
                       "model recipe");
    ModelRecipe r;
    r.kind = model_kind_from_string(j.at("kind").get<std::string>());
    r.label = j.value("label", std::string{});
    r.poly_order = j.value("poly_order", r.poly_order);
    r.include_constant = j.value("include_constant", r.include_constant);
    r.normalize = j.value("normalize", r.normalize);
    if (j.contains("lambdas")) r.lambdas = sysid::vector_from_json(j.at("lambdas"));
    r.adapt_lambda = j.value("adapt_lambda", 0.0);
    r.state_indices = j.value("state_indices", std::vector<int>{});
    r.goal_offset = j.value("goal_offset", false);
    r.delays = j.value("delays", 1);
    r.lag = j.value("lag", 1);
    r.smoothing_window = j.value("smoothing_window", r.smoothing_window);
    r.smoothing_order = j.value("smoothing_order", r.smoothing_order);
    if (r.kind == ModelKind::PISINDYc && r.state_indices.empty())
        throw InvalidInput("model recipe: pi-sindyc needs state_indices");
    return r;
}

inline json to_json(const ReferenceSpec& r)
{
    switch (r.kind) {
    case ReferenceKind::Goal: return {{"kind", "goal"}};
    case ReferenceKind::F8: return {{"kind", "f8"}};
    case ReferenceKind::Constant: return {{"kind", "constant"}, {"value", detail::vec(r.value)}};
    }
    return nullptr;
}

inline ReferenceSpec reference_from_json(const json& j)
{
    detail::check_keys(j, {"kind", "value"}, "reference");
    ReferenceSpec r;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "goal") {
        r.kind = ReferenceKind::Goal;
    } else if (kind == "f8") {
        r.kind = ReferenceKind::F8;
    } else if (kind == "constant") {
        r.kind = ReferenceKind::Constant;
        r.value = sysid::vector_from_json(j.at("value"));
    } else {
        throw InvalidInput("reference: unknown kind '" + kind + "'");
    }
    return r;
}

inline json to_json(const ExperimentPlan& p)
{
    json j;
    j["name"] = p.name;
    j["system"] = p.system_name;
    j["seed"] = p.seed;
    j["x0"] = detail::vec(p.x0);
    j["x0_jitter"] = p.x0_jitter;
    j["plant_dt"] = p.plant_dt;
    j["model_dt"] = p.model_dt;
    j["goal"] = p.goal ? detail::vec(*p.goal) : json(nullptr);
    j["training"] = {{"signal", to_json(p.training.signal)}, {"duration", p.training.duration}, {"noise_eta", p.training.noise_eta}};
    j["validation"] = {{"signal", to_json(p.validation.signal)},
                       {"duration", p.validation.duration},
                       {"x0", p.validation.x0 ? detail::vec(*p.validation.x0) : json(nullptr)}};
    j["models"] = json::array();
    for (const auto& r : p.recipes) j["models"].push_back(to_json(r));
    j["horizon_eps"] = p.horizon_eps;
    const auto& c = p.control;
    j["control"] = {{"enabled", c.enabled},
                    {"mpc", mpc::to_json(c.mpc)},
                    {"reference", to_json(c.reference)},
                    {"duration", c.duration},
                    {"update_steps", c.update_steps},
                    {"x0", c.x0 ? detail::vec(*c.x0) : json(nullptr)},
                    {"cost_window", c.cost_window},
                    {"success_radius", c.success_radius},
                    {"success_relative", c.success_relative}};
    j["sweeps"] = {{"training_lengths", p.sweeps.training_lengths},
                   {"noise_levels", p.sweeps.noise_levels},
                   {"realizations", p.sweeps.realizations}};
    return j;
}

inline ExperimentPlan plan_from_json(const json& j)
{
    detail::check_keys(j,
                       {"name", "system", "seed", "x0", "x0_jitter", "plant_dt", "model_dt", "goal", "training", "validation",
                        "models", "horizon_eps", "control", "sweeps"},
                       "plan");
    ExperimentPlan p;
    p.name = j.at("name").get<std::string>();
    p.system_name = j.at("system").get<std::string>();
    p.system = dynamics::system_from_name(p.system_name);
    p.seed = j.value("seed", std::uint64_t{0});
    p.x0 = sysid::vector_from_json(j.at("x0"));
    p.x0_jitter = j.value("x0_jitter", 0.0);
    p.plant_dt = j.at("plant_dt").get<double>();
    p.model_dt = j.value("model_dt", p.plant_dt);
    p.goal = detail::optional_vec(j, "goal");

    const auto& tr = j.at("training");
    detail::check_keys(tr, {"signal", "duration", "noise_eta"}, "training");
    p.training.signal = signal_spec_from_json(tr.at("signal"));
    p.training.duration = tr.at("duration").get<double>();
    p.training.noise_eta = tr.value("noise_eta", 0.0);

    const auto& va = j.at("validation");
    detail::check_keys(va, {"signal", "duration", "x0"}, "validation");
    p.validation.signal = signal_spec_from_json(va.at("signal"));
    p.validation.duration = va.at("duration").get<double>();
    p.validation.x0 = detail::optional_vec(va, "x0");

    for (const auto& r : j.at("models")) p.recipes.push_back(recipe_from_json(r));
    p.horizon_eps = j.value("horizon_eps", 3.0);

    if (j.contains("control") && !j.at("control").is_null()) {
        const auto& c = j.at("control");
        detail::check_keys(c,
                           {"enabled", "mpc", "reference", "duration", "update_steps", "x0", "cost_window", "success_radius",
                            "success_relative"},
                           "control");
        p.control.enabled = c.value("enabled", true);
        p.control.mpc = mpc::mpc_config_from_json(c.at("mpc"));
        p.control.reference = c.contains("reference") ? reference_from_json(c.at("reference")) : ReferenceSpec{};
        p.control.duration = c.at("duration").get<double>();
        p.control.update_steps = c.value("update_steps", 1);
        p.control.x0 = detail::optional_vec(c, "x0");
        p.control.cost_window = c.value("cost_window", 0.0);
        p.control.success_radius = c.value("success_radius", 0.0);
        p.control.success_relative = c.value("success_relative", 0.0);
    } else {
        p.control.enabled = false;
    }

    if (j.contains("sweeps") && !j.at("sweeps").is_null()) {
        const auto& s = j.at("sweeps");
        detail::check_keys(s, {"training_lengths", "noise_levels", "realizations"}, "sweeps");
        p.sweeps.training_lengths = s.value("training_lengths", std::vector<int>{});
        p.sweeps.noise_levels = s.value("noise_levels", std::vector<double>{});
        p.sweeps.realizations = s.value("realizations", 1);
    }
    p.validate();
    return p;
}

inline ExperimentPlan load_plan(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw Error("cannot open plan '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("plan is not valid JSON: ") + e.what());
    }
    try {
        return plan_from_json(j);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("plan: ") + e.what());
    }
}

// ---------------------------------------------------------------------------------------------
// Presets for the four benchmark studies.

namespace detail {

inline SignalSpec schroeder(double amplitude, int components, double f0, double offset = 0.0)
{
    SignalSpec s;
    s.kind = dynamics::SignalKind::SchroederSweep;
    s.amplitude = amplitude;
    s.components = components;
    s.base_frequency = f0;
    s.offset = offset;
    return s;
}

inline ModelRecipe sindyc(int order, Vector lambdas, bool normalize = false)
{
    ModelRecipe r;
    r.kind = ModelKind::SINDYc;
    r.poly_order = order;
    r.lambdas = std::move(lambdas);
    r.normalize = normalize;
    return r;
}

inline ModelRecipe linear(ModelKind kind, bool goal_offset = false)
{
    ModelRecipe r;
    r.kind = kind;
    r.goal_offset = goal_offset;
    return r;
}

constexpr double inf = std::numeric_limits<double>::infinity();

} // namespace detail

inline ExperimentPlan lotka_plan()
{
    ExperimentPlan p;
    p.name = "lotka";
    p.system_name = "lotka";
    p.system = dynamics::lotka_volterra();
    p.x0 = (Vector(2) << 60.0, 50.0).finished();
    p.plant_dt = p.model_dt = 0.1;
    p.training = {detail::schroeder(0.1, 20, 0.01, 1.0), 100.0, 0.0};
    SignalSpec val;
    val.kind = dynamics::SignalKind::SineProduct;
    p.validation = {val, 100.0, std::nullopt};
    auto sindy = detail::sindyc(2, Vector::Constant(2, 1e-3));
    sindy.smoothing_window = 81;
    p.recipes = {sindy, detail::linear(ModelKind::DMDc)};
    p.horizon_eps = 3.0;

    auto& c = p.control;
    c.mpc = mpc::quadratic_config(2, 1, 1.0, 0.5, 0.5, -20.0, 20.0, 5, 5, p.model_dt);
    c.mpc.state_constraints.push_back({1, 10.0, detail::inf, 1e4});
    c.duration = 100.0;
    c.update_steps = 1;
    c.cost_window = 20.0;
    c.success_relative = 0.01;
    p.sweeps.training_lengths = {10, 14, 20, 50, 100, 200, 500, 1000};
    p.sweeps.noise_levels = {0.01, 0.05, 0.1, 0.25, 0.5};
    p.sweeps.realizations = 50;
    return p;
}

inline ExperimentPlan lorenz_plan()
{
    ExperimentPlan p;
    p.name = "lorenz";
    p.system_name = "lorenz";
    p.system = dynamics::lorenz();
    p.x0 = (Vector(3) << -8.0, 8.0, 27.0).finished();
    p.x0_jitter = 2.0;
    p.plant_dt = 0.001;
    p.model_dt = 0.01;
    const double r = std::sqrt(72.0);
    p.goal = (Vector(3) << r, r, 27.0).finished();
    p.training = {detail::schroeder(1.0, 20, 0.1), 10.0, 0.0};
    SignalSpec val;
    val.kind = dynamics::SignalKind::CubedSine;
    val.amplitude = 5.0;
    val.frequency = 30.0;
    p.validation = {val, 10.0, std::nullopt};
    p.recipes = {detail::sindyc(3, Vector::Constant(3, 0.1)), detail::linear(ModelKind::DMDc, true)};
    p.horizon_eps = 3.0;

    auto& c = p.control;
    c.mpc = mpc::quadratic_config(3, 1, 1.0, 0.001, 0.001, -50.0, 50.0, 10, 10, p.model_dt);
    c.duration = 5.0;
    c.update_steps = 10;
    c.cost_window = 3.0;
    c.success_radius = 3.0;
    p.sweeps.training_lengths = {8, 20, 50, 100, 200, 500, 1000};
    p.sweeps.noise_levels = {0.01, 0.1, 0.25};
    p.sweeps.realizations = 50;
    return p;
}

inline ExperimentPlan f8_plan()
{
    ExperimentPlan p;
    p.name = "f8";
    p.system_name = "f8";
    p.system = dynamics::f8();
    p.x0 = Vector::Zero(3);
    p.plant_dt = 0.001;
    p.model_dt = 0.01;
    p.goal = Vector::Zero(3);
    p.training = {detail::schroeder(0.01, 20, 0.1), 100.0, 0.0};
    p.validation = {detail::schroeder(0.01, 20, 0.05), 10.0, std::nullopt};
    p.recipes = {detail::sindyc(3, (Vector(3) << 1e-4, 1e-2, 1e-2).finished()), detail::linear(ModelKind::DMDc)};
    p.horizon_eps = 0.1;

    auto& c = p.control;
    c.mpc = mpc::quadratic_config(1, 1, 25.0, 0.05, 0.05, -detail::inf, detail::inf, 13, 13, p.model_dt);
    c.mpc.tracked = {0};
    c.mpc.du_min = Vector::Constant(1, -0.3);
    c.mpc.du_max = Vector::Constant(1, 0.5);
    c.mpc.state_constraints.push_back({0, -0.2, 0.4, 1e6});
    c.reference.kind = ReferenceKind::F8;
    c.x0 = Vector::Zero(3);
    c.duration = 5.0;
    c.update_steps = 10;
    return p;
}

inline ExperimentPlan hiv_plan()
{
    ExperimentPlan p;
    p.name = "hiv";
    p.system_name = "hiv";
    p.system = dynamics::hiv();
    p.x0 = (Vector(5) << 10.0, 0.1, 0.1, 0.1, 0.1).finished();
    p.plant_dt = 1.0 / 24.0;
    p.model_dt = 2.0 / 24.0;
    SignalSpec train;
    train.kind = dynamics::SignalKind::PiecewiseConstantRandom;
    train.level_min = 0.0;
    train.level_max = 1.0;
    train.hold_min = 5.0 / 24.0;
    train.hold_max = 10.0;
    p.training = {train, 200.0, 0.0};
    p.validation = {train, 100.0, std::nullopt};

    auto pi = detail::sindyc(3, (Vector(3) << 10.0, 30.0, 3.0).finished(), true);
    pi.kind = ModelKind::PISINDYc;
    pi.state_indices = {0, 1, 2};
    auto delay = detail::linear(ModelKind::DelayDMDc, true);
    delay.delays = 10;
    ModelRecipe edmdc;
    edmdc.kind = ModelKind::eDMDc;
    edmdc.poly_order = 3;
    edmdc.include_constant = false;
    p.recipes = {detail::sindyc(3, (Vector(5) << 10.0, 3.1, 3.0, 0.1, 0.5).finished(), true),
                 pi,
                 detail::linear(ModelKind::DMDc, true),
                 delay,
                 edmdc};
    p.horizon_eps = 3.0;

    auto& c = p.control;
    c.mpc = mpc::quadratic_config(2, 1, 1.0, 0.0, 0.0, 0.0, 1.0, 24, 24, p.model_dt);
    c.mpc.objective = mpc::ObjectiveKind::LinearTreatment;
    c.mpc.tracked = {0, 2};
    c.mpc.treatment_weights = Vector::Ones(2);
    for (int i = 0; i < 5; ++i) c.mpc.state_constraints.push_back({i, 0.0, detail::inf, 1e4});
    c.x0 = p.x0;
    c.duration = 350.0;
    c.update_steps = 24 * 7;
    c.success_relative = 0.1;
    return p;
}

inline std::vector<std::string> preset_names()
{
    return {"lotka", "lorenz", "f8", "hiv"};
}

inline ExperimentPlan preset_plan(const std::string& name)
{
    if (name == "lotka" || name == "lotka-volterra") return lotka_plan();
    if (name == "lorenz") return lorenz_plan();
    if (name == "f8") return f8_plan();
    if (name == "hiv") return hiv_plan();
    throw InvalidInput("unknown system '" + name + "'");
}

} // namespace sindympc::bench
