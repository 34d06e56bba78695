#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sindympc/core.hpp"
#include "sindympc/sysid/model.hpp"

namespace sindympc::mpc {

enum class ObjectiveKind { QuadraticTracking, LinearTreatment };

inline std::string to_string(ObjectiveKind k)
{
    return k == ObjectiveKind::QuadraticTracking ? "quadratic-tracking" : "linear-treatment";
}

inline ObjectiveKind objective_from_string(const std::string& s)
{
    if (s == "quadratic-tracking") return ObjectiveKind::QuadraticTracking;
    if (s == "linear-treatment") return ObjectiveKind::LinearTreatment;
    throw InvalidInput("unknown objective '" + s + "'");
}

/// Which optimized inputs carry the R_u / R_du penalty.
enum class InputPenalty {
    /// Every optimized input u_0 .. u_{m_c-1}.
    All,
    /// Skip the first optimized input (u_1 .. u_{m_c-1}).
    SkipFirst,
};

/// One-sided quadratic penalty on a model state: weight * (violation)^2.
struct StateConstraint {
    int index = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double weight = 1e4;
};

struct MpcConfig {
    /// Model state indices that are tracked; empty means all model states.
    std::vector<int> tracked;
    /// Weight on the tracked deviation (size = number of tracked states).
    Matrix q;
    std::optional<Matrix> q_terminal;
    Matrix r_u;
    Matrix r_du;
    int m_p = 10;
    int m_c = 10;
    Vector u_min;
    Vector u_max;
    Vector du_min;
    Vector du_max;
    std::vector<StateConstraint> state_constraints;
    double model_dt = 0.0;
    ObjectiveKind objective = ObjectiveKind::QuadraticTracking;
    InputPenalty input_penalty = InputPenalty::All;

    /// LinearTreatment: per-tracked-state weights on |x - ref| and the weight on |u|.
    Vector treatment_weights;
    double treatment_input_weight = 1.0;
    /// LinearTreatment: use the signed deviation (x - ref) instead of |x - ref|.
    bool signed_treatment = false;
    /// Smoothing of |z| as sqrt(z^2 + delta^2) - delta.
    double abs_smoothing = 1e-6;

    int max_iter = 100;
    double tolerance = 1e-8;
    /// Cost reported when the rollout leaves the finite range.
    double divergence_barrier = 1e12;

    int num_tracked(int n) const { return tracked.empty() ? n : static_cast<int>(tracked.size()); }
    int num_inputs() const { return static_cast<int>(u_min.size()); }
    const Matrix& terminal_weight() const { return q_terminal ? *q_terminal : q; }
    bool has_rate_bounds() const { return du_min.allFinite() || du_max.allFinite(); }

    /// Throws InvalidInput when weights, horizons or bounds are inconsistent.
    void validate(int n) const
    {
        const int nt = num_tracked(n);
        const int nq = num_inputs();
        require(m_p >= 1 && m_c >= 1, "mpc: horizons must be >= 1");
        require(m_c <= m_p, "mpc: control horizon must not exceed the prediction horizon");
        require(nq >= 1, "mpc: bounds define the input dimension and must be non-empty");
        require(u_max.size() == nq && du_min.size() == nq && du_max.size() == nq, "mpc: bound dimensions differ");
        require(((u_min.array() <= u_max.array()).all()), "mpc: u_min must not exceed u_max");
        require(((du_min.array() <= 0.0).all() && (du_max.array() >= 0.0).all()), "mpc: rate bounds must bracket zero");
        for (int i : tracked) require(i >= 0 && i < n, "mpc: tracked state index out of range");
        for (const auto& c : state_constraints) {
            require(c.index >= 0 && c.index < n, "mpc: constrained state index out of range");
            require(c.lower <= c.upper && c.weight >= 0.0, "mpc: malformed state constraint");
        }
        if (objective == ObjectiveKind::QuadraticTracking) {
            require(q.rows() == nt && q.cols() == nt, "mpc: Q must be square with one row per tracked state");
            require(terminal_weight().rows() == nt && terminal_weight().cols() == nt, "mpc: terminal weight has wrong size");
            require(r_u.rows() == nq && r_u.cols() == nq, "mpc: R_u has wrong size");
            require(r_du.rows() == nq && r_du.cols() == nq, "mpc: R_du has wrong size");
            const auto psd = [](const Matrix& m) {
                Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
                return es.eigenvalues().minCoeff() >= -1e-12;
            };
            require(psd(q) && psd(terminal_weight()), "mpc: Q and terminal weight must be positive semi-definite");
            require(psd(r_u) && psd(r_du), "mpc: input weights must be positive semi-definite");
        } else {
            require(treatment_weights.size() == nt, "mpc: one treatment weight per tracked state is required");
            require(abs_smoothing >= 0.0, "mpc: smoothing must be >= 0");
        }
        require(max_iter >= 1 && tolerance > 0.0, "mpc: optimizer budget must be positive");
    }
};

/// Reference trajectory in tracked coordinates as a function of time.
using Reference = std::function<Vector(double t)>;

inline Reference constant_reference(Vector v)
{
    return [v = std::move(v)](double) { return v; };
}

/// Standard tracking setup: Q = q_scale*I over the tracked states, scalar R_u and R_du, box on u, no rate bound.
inline MpcConfig quadratic_config(int n_tracked, int q, double q_scale, double r_u, double r_du, double u_min, double u_max,
                                  int m_p, int m_c, double model_dt)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    MpcConfig c;
    c.q = q_scale * Matrix::Identity(n_tracked, n_tracked);
    c.r_u = r_u * Matrix::Identity(q, q);
    c.r_du = r_du * Matrix::Identity(q, q);
    c.u_min = Vector::Constant(q, u_min);
    c.u_max = Vector::Constant(q, u_max);
    c.du_min = Vector::Constant(q, -inf);
    c.du_max = Vector::Constant(q, inf);
    c.m_p = m_p;
    c.m_c = m_c;
    c.model_dt = model_dt;
    return c;
}

// ---------------------------------------------------------------------------------------------
// JSON. Infinite bounds are written as null.

namespace detail {

inline nlohmann::json bounds_to_json(const Vector& v)
{
    auto j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(std::isfinite(v(i)) ? nlohmann::json(v(i)) : nlohmann::json(nullptr));
    return j;
}

inline Vector bounds_from_json(const nlohmann::json& j, double missing)
{
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].is_null() ? missing : j[i].get<double>();
    return v;
}

inline double bound_from_json(const nlohmann::json& j, const char* key, double missing)
{
    return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<double>() : missing;
}

} // namespace detail

inline nlohmann::json to_json(const MpcConfig& c)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    nlohmann::json j;
    j["tracked"] = c.tracked;
    j["q"] = sysid::matrix_to_json(c.q);
    j["q_terminal"] = c.q_terminal ? sysid::matrix_to_json(*c.q_terminal) : nlohmann::json(nullptr);
    j["r_u"] = sysid::matrix_to_json(c.r_u);
    j["r_du"] = sysid::matrix_to_json(c.r_du);
    j["m_p"] = c.m_p;
    j["m_c"] = c.m_c;
    j["u_min"] = detail::bounds_to_json(c.u_min);
    j["u_max"] = detail::bounds_to_json(c.u_max);
    j["du_min"] = detail::bounds_to_json(c.du_min);
    j["du_max"] = detail::bounds_to_json(c.du_max);
    auto sc = nlohmann::json::array();
    for (const auto& s : c.state_constraints) {
        sc.push_back({{"index", s.index},
                      {"lower", s.lower == -inf ? nlohmann::json(nullptr) : nlohmann::json(s.lower)},
                      {"upper", s.upper == inf ? nlohmann::json(nullptr) : nlohmann::json(s.upper)},
                      {"weight", s.weight}});
    }
    j["state_constraints"] = sc;
    j["model_dt"] = c.model_dt;
    j["objective"] = to_string(c.objective);
    j["input_penalty"] = c.input_penalty == InputPenalty::All ? "all" : "skip-first";
    j["treatment_weights"] = sysid::vector_to_json(c.treatment_weights);
    j["treatment_input_weight"] = c.treatment_input_weight;
    j["signed_treatment"] = c.signed_treatment;
    j["abs_smoothing"] = c.abs_smoothing;
    j["max_iter"] = c.max_iter;
    j["tolerance"] = c.tolerance;
    return j;
}

inline MpcConfig mpc_config_from_json(const nlohmann::json& j)
{
    static const std::vector<std::string> known{"tracked",  "q",        "q_terminal", "r_u",   "r_du",
                                                "m_p",      "m_c",      "u_min",      "u_max", "du_min",
                                                "du_max",   "state_constraints",      "model_dt",
                                                "objective", "input_penalty",         "treatment_weights",
                                                "treatment_input_weight", "signed_treatment", "abs_smoothing",
                                                "max_iter", "tolerance"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) throw ParseError("unknown mpc key '" + it.key() + "'");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    MpcConfig c;
    c.tracked = j.value("tracked", std::vector<int>{});
    c.q = sysid::matrix_from_json(j.at("q"));
    if (j.contains("q_terminal") && !j.at("q_terminal").is_null()) c.q_terminal = sysid::matrix_from_json(j.at("q_terminal"));
    c.r_u = sysid::matrix_from_json(j.at("r_u"));
    c.r_du = sysid::matrix_from_json(j.at("r_du"));
    c.m_p = j.at("m_p").get<int>();
    c.m_c = j.at("m_c").get<int>();
    c.u_min = detail::bounds_from_json(j.at("u_min"), -inf);
    c.u_max = detail::bounds_from_json(j.at("u_max"), inf);
    c.du_min = j.contains("du_min") ? detail::bounds_from_json(j.at("du_min"), -inf) : Vector::Constant(c.u_min.size(), -inf);
    c.du_max = j.contains("du_max") ? detail::bounds_from_json(j.at("du_max"), inf) : Vector::Constant(c.u_min.size(), inf);
    for (const auto& s : j.value("state_constraints", nlohmann::json::array())) {
        c.state_constraints.push_back({s.at("index").get<int>(), detail::bound_from_json(s, "lower", -inf),
                                       detail::bound_from_json(s, "upper", inf), s.value("weight", 1e4)});
    }
    c.model_dt = j.value("model_dt", 0.0);
    c.objective = objective_from_string(j.value("objective", std::string("quadratic-tracking")));
    const auto penalty = j.value("input_penalty", std::string("all"));
    if (penalty != "all" && penalty != "skip-first") throw ParseError("unknown input_penalty '" + penalty + "'");
    c.input_penalty = penalty == "all" ? InputPenalty::All : InputPenalty::SkipFirst;
    if (j.contains("treatment_weights")) c.treatment_weights = sysid::vector_from_json(j.at("treatment_weights"));
    c.treatment_input_weight = j.value("treatment_input_weight", 1.0);
    c.signed_treatment = j.value("signed_treatment", false);
    c.abs_smoothing = j.value("abs_smoothing", 1e-6);
    c.max_iter = j.value("max_iter", 100);
    c.tolerance = j.value("tolerance", 1e-8);
    return c;
}

} // namespace sindympc::mpc
