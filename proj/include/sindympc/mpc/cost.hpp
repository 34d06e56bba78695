#pragma once

#include <cmath>
#include <vector>

#include "sindympc/core.hpp"
#include "sindympc/mpc/config.hpp"
#include "sindympc/sysid/predict.hpp"

namespace sindympc::mpc {

inline double smooth_abs(double z, double delta)
{
    return delta > 0.0 ? std::sqrt(z * z + delta * delta) - delta : std::abs(z);
}

inline Vector tracked_part(const Vector& x, const MpcConfig& cfg)
{
    if (cfg.tracked.empty()) return x;
    Vector out(static_cast<Eigen::Index>(cfg.tracked.size()));
    for (std::size_t i = 0; i < cfg.tracked.size(); ++i) out(static_cast<Eigen::Index>(i)) = x(cfg.tracked[i]);
    return out;
}

/// Deviation cost of one predicted state; `weight` is Q or the terminal weight for quadratic tracking.
inline double state_cost(const Vector& x, const Vector& ref, const MpcConfig& cfg, const Matrix& weight)
{
    const Vector e = tracked_part(x, cfg) - ref;
    if (cfg.objective == ObjectiveKind::QuadraticTracking) return e.dot(weight * e);
    double c = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i)
        c += cfg.treatment_weights(i) * (cfg.signed_treatment ? e(i) : smooth_abs(e(i), cfg.abs_smoothing));
    return c;
}

inline double input_cost(const Vector& u, const Vector& du, const MpcConfig& cfg)
{
    if (cfg.objective == ObjectiveKind::QuadraticTracking) return u.dot(cfg.r_u * u) + du.dot(cfg.r_du * du);
    double c = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) c += smooth_abs(u(i), cfg.abs_smoothing);
    return cfg.treatment_input_weight * c;
}

inline double constraint_penalty(const Vector& x, const MpcConfig& cfg)
{
    double c = 0.0;
    for (const auto& s : cfg.state_constraints) {
        const double v = x(s.index);
        if (v < s.lower) c += s.weight * (s.lower - v) * (s.lower - v);
        if (v > s.upper) c += s.weight * (v - s.upper) * (v - s.upper);
    }
    return c;
}

/// Cost of a single stage: tracking term, input and rate terms, state-constraint penalties.
inline double stage_cost(const Vector& xhat, const Vector& u, const Vector& du, const Vector& ref, const MpcConfig& cfg)
{
    return state_cost(xhat, ref, cfg, cfg.q) + input_cost(u, du, cfg) + constraint_penalty(xhat, cfg);
}

struct HorizonCost {
    double cost = 0.0;
    /// Model states (model coordinates) x_j .. x_{j+m_p}.
    Matrix predicted;
    bool diverged = false;
};

/// Input applied at prediction step k: the optimized inputs, then the last one held.
inline Vector input_at(const Matrix& u_seq, int k)
{
    return u_seq.col(std::min<Eigen::Index>(k, u_seq.cols() - 1));
}

/// Finite-horizon cost of an input sequence (q x m_c) starting from model state x_j at time t_j.
inline HorizonCost horizon_cost(const sysid::Predictor& model, const Vector& x_j, const Vector& u_prev, const Matrix& u_seq,
                                const Reference& ref, double t_j, const MpcConfig& cfg)
{
    const int n = model.state_dim();
    require(x_j.size() == n, "horizon_cost: state dimension mismatch");
    require(u_seq.rows() == model.input_dim() && u_seq.cols() == cfg.m_c, "horizon_cost: input sequence must be q x m_c");
    const double dt = model.dt();
    HorizonCost out;
    out.predicted.resize(n, cfg.m_p + 1);
    out.predicted.col(0) = x_j;
    Vector s = model.lift(x_j, u_prev);
    for (int k = 0; k < cfg.m_p; ++k) {
        s = model.advance(s, input_at(u_seq, k));
        const Vector x = model.observe(s);
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e150) {
            out.diverged = true;
            out.cost = cfg.divergence_barrier;
            out.predicted.rightCols(cfg.m_p - k).setConstant(std::numeric_limits<double>::quiet_NaN());
            return out;
        }
        out.predicted.col(k + 1) = x;
    }

    double J = 0.0;
    for (int k = 0; k < cfg.m_p; ++k) J += state_cost(out.predicted.col(k), ref(t_j + k * dt), cfg, cfg.q);
    J += state_cost(out.predicted.col(cfg.m_p), ref(t_j + cfg.m_p * dt), cfg, cfg.terminal_weight());
    for (int k = 1; k <= cfg.m_p; ++k) J += constraint_penalty(out.predicted.col(k), cfg);

    if (cfg.objective == ObjectiveKind::QuadraticTracking) {
        const int first = cfg.input_penalty == InputPenalty::All ? 0 : 1;
        for (int k = first; k < cfg.m_c; ++k) {
            const Vector du = u_seq.col(k) - (k == 0 ? u_prev : Vector(u_seq.col(k - 1)));
            J += input_cost(u_seq.col(k), du, cfg);
        }
    } else {
        for (int k = 0; k < cfg.m_p; ++k) J += input_cost(input_at(u_seq, k), Vector::Zero(u_seq.rows()), cfg);
    }
    out.cost = std::isfinite(J) ? std::min(J, cfg.divergence_barrier) : cfg.divergence_barrier;
    if (!std::isfinite(J)) out.diverged = true;
    return out;
}

} // namespace sindympc::mpc
