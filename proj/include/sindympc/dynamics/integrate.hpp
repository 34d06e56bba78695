#pragma once

#include <cmath>
#include <functional>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/signal.hpp"
#include "sindympc/dynamics/system.hpp"
#include "sindympc/dynamics/trajectory.hpp"

namespace sindympc::dynamics {

struct IntegratorConfig {
    /// Plant timestep.
    double dt = 0.01;
    /// Plant steps between recorded samples.
    int sample_every = 1;
    /// Record f(x_k, u_k) at every sample as the measured derivative.
    bool record_derivatives = true;
};

/// One classical fourth-order Runge-Kutta step with the input held over the step.
template<typename Field>
Vector rk4_step(const Field& f, const Vector& x, const Vector& u, double t, double dt)
{
    const Vector k1 = f(x, u, t);
    const Vector k2 = f(x + 0.5 * dt * k1, u, t + 0.5 * dt);
    const Vector k3 = f(x + 0.5 * dt * k2, u, t + 0.5 * dt);
    const Vector k4 = f(x + dt * k3, u, t + dt);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Advances a plant by one plant step with input u held constant.
inline Vector plant_step(const SystemSpec& sys, const Vector& x, const Vector& u, double t, double dt)
{
    if (sys.kind == SystemKind::IdentifiedLinear) {
        if (std::abs(dt - sys.map_dt) > 1e-12 * sys.map_dt) {
            throw InvalidInput("discrete plant must be stepped at its own timestep");
        }
        return sys.map(x, u);
    }
    auto field = [&sys](const Vector& xs, const Vector& us, double ts) { return rhs_eval(sys, xs, us, ts); };
    return rk4_step(field, x, u, t, dt);
}

inline int steps_for(double duration, double dt)
{
    require(dt > 0.0, "integrator dt must be positive");
    const double ratio = duration / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
        throw InvalidInput("time span " + std::to_string(duration) + " is not a positive multiple of dt " +
                           std::to_string(dt));
    }
    return static_cast<int>(rounded);
}

/// Integrates a plant under an arbitrary input law u(t, x) evaluated at the start of every plant step.
inline Trajectory integrate_with(const SystemSpec& sys, const Vector& x0,
                                 const std::function<Vector(double, const Vector&)>& input, double t0,
                                 double duration, const IntegratorConfig& cfg)
{
    require(x0.size() == sys.n, "integrate: initial state has wrong dimension");
    require(cfg.sample_every >= 1, "integrate: sample_every must be >= 1");
    const int steps = steps_for(duration, cfg.dt);
    require(steps % cfg.sample_every == 0, "integrate: time span must be a multiple of the sample interval");
    const int samples = steps / cfg.sample_every + 1;
    const bool with_derivs = cfg.record_derivatives && sys.kind != SystemKind::IdentifiedLinear;

    Trajectory traj;
    traj.times.resize(samples);
    traj.states.resize(sys.n, samples);
    traj.inputs.resize(sys.q, samples);
    if (with_derivs) traj.derivatives.resize(sys.n, samples);

    Vector x = x0;
    int col = 0;
    for (int step = 0; step <= steps; ++step) {
        const double t = t0 + step * cfg.dt;
        const Vector u = input(t, x);
        require(u.size() == sys.q, "integrate: input law returned wrong dimension");
        if (step % cfg.sample_every == 0) {
            traj.times(col) = t;
            traj.states.col(col) = x;
            traj.inputs.col(col) = u;
            if (with_derivs) traj.derivatives.col(col) = rhs_eval(sys, x, u, t);
            ++col;
        }
        if (step == steps) break;
        Vector next = plant_step(sys, x, u, t, cfg.dt);
        if (!next.allFinite()) throw DivergenceError("integrate: non-finite state", t);
        x = std::move(next);
    }
    return traj;
}

inline Trajectory integrate(const SystemSpec& sys, const Vector& x0, const ExcitationSignal& signal, double t0,
                            double duration, const IntegratorConfig& cfg)
{
    require(sys.q == 1, "integrate: scalar excitation signals drive single-input plants");
    return integrate_with(
        sys, x0, [&signal](double t, const Vector&) { return eval_signal(signal, t); }, t0, duration, cfg);
}

/// Holds u constant for `steps` plant steps starting from x; returns the end state.
inline Vector hold_input(const SystemSpec& sys, Vector x, const Vector& u, double t0, double dt, int steps)
{
    for (int k = 0; k < steps; ++k) {
        x = plant_step(sys, x, u, t0 + k * dt, dt);
        if (!x.allFinite()) throw DivergenceError("plant diverged", t0 + k * dt);
    }
    return x;
}

} // namespace sindympc::dynamics
