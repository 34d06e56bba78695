#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/csv.hpp"
#include "sindympc/dynamics/integrate.hpp"
#include "sindympc/dynamics/system.hpp"
#include "sindympc/dynamics/trajectory.hpp"
#include "sindympc/mpc/config.hpp"
#include "sindympc/mpc/cost.hpp"
#include "sindympc/mpc/optimizer.hpp"
#include "sindympc/sysid/predict.hpp"

namespace sindympc::mpc {

struct MpcSolution {
    Matrix u_sequence;
    Matrix predicted_states;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    std::vector<double> cost_history;
};

/// Maps optimizer variables to an input sequence. Without rate bounds the variables are the inputs
/// themselves; with rate bounds they are input increments whose running sums are clipped to [u_min, u_max].
class InputParametrization {
public:
    InputParametrization(const MpcConfig& cfg, Vector u_prev) : cfg_(cfg), u_prev_(std::move(u_prev)), q_(cfg.num_inputs())
    {
        rates_ = cfg_.has_rate_bounds();
        const Vector& lo = rates_ ? cfg_.du_min : cfg_.u_min;
        const Vector& hi = rates_ ? cfg_.du_max : cfg_.u_max;
        lower_ = lo.replicate(cfg_.m_c, 1);
        upper_ = hi.replicate(cfg_.m_c, 1);
    }

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    Matrix inputs(const Vector& v) const
    {
        const Eigen::Map<const Matrix> m(v.data(), q_, cfg_.m_c);
        if (!rates_) return m;
        Matrix u(q_, cfg_.m_c);
        Vector prev = u_prev_;
        for (int k = 0; k < cfg_.m_c; ++k) {
            u.col(k) = (prev + m.col(k)).cwiseMax(cfg_.u_min).cwiseMin(cfg_.u_max);
            prev = u.col(k);
        }
        return u;
    }

    Vector variables(const Matrix& u) const
    {
        Matrix v = u;
        if (rates_) {
            for (int k = 0; k < cfg_.m_c; ++k) v.col(k) = u.col(k) - (k == 0 ? u_prev_ : Vector(u.col(k - 1)));
        }
        return project(Eigen::Map<const Vector>(v.data(), v.size()), lower_, upper_);
    }

private:
    const MpcConfig& cfg_;
    Vector u_prev_;
    int q_;
    bool rates_ = false;
    Vector lower_, upper_;
};

/// Shifted warm start: drop the first input and repeat the last one.
inline Matrix shift_warm_start(const Matrix& u_seq)
{
    Matrix out = u_seq;
    if (u_seq.cols() > 1) out.leftCols(u_seq.cols() - 1) = u_seq.rightCols(u_seq.cols() - 1);
    return out;
}

/// The cost as a function of the optimizer variables, as seen by the solver.
inline Objective make_objective(const sysid::Predictor& model, const Vector& x_j, const Vector& u_prev, const Reference& ref,
                                double t_j, const MpcConfig& cfg, const InputParametrization& param)
{
    return [&model, x_j, u_prev, &ref, t_j, &cfg, &param](const Vector& v) {
        return horizon_cost(model, x_j, u_prev, param.inputs(v), ref, t_j, cfg).cost;
    };
}

/// One receding-horizon optimization from model state x_j.
inline MpcSolution solve_mpc_step(const sysid::Predictor& model, const Vector& x_j, const Vector& u_prev, const Reference& ref,
                                  double t_j, const MpcConfig& cfg, const std::optional<Matrix>& warm_start = std::nullopt)
{
    cfg.validate(model.state_dim());
    const int q = cfg.num_inputs();
    require(model.input_dim() == q, "solve_mpc_step: model and config disagree on the input dimension");
    require(u_prev.size() == q, "solve_mpc_step: u_prev has wrong dimension");
    if (cfg.model_dt > 0.0) {
        require(std::abs(cfg.model_dt - model.dt()) <= 1e-9 * model.dt(), "solve_mpc_step: config model_dt differs from the model's dt");
    }

    const InputParametrization param(cfg, u_prev);
    Matrix start;
    if (warm_start) {
        require(warm_start->rows() == q && warm_start->cols() == cfg.m_c, "solve_mpc_step: warm start must be q x m_c");
        start = *warm_start;
    } else {
        start = u_prev.cwiseMax(cfg.u_min).cwiseMin(cfg.u_max).replicate(1, cfg.m_c);
    }
    const Objective f = make_objective(model, x_j, u_prev, ref, t_j, cfg, param);
    BoxOptions opt;
    opt.max_iter = cfg.max_iter;
    opt.tolerance = cfg.tolerance;
    const BoxResult r = minimize_box(f, param.variables(start), param.lower(), param.upper(), opt);

    MpcSolution sol;
    sol.u_sequence = param.inputs(r.x);
    const auto hc = horizon_cost(model, x_j, u_prev, sol.u_sequence, ref, t_j, cfg);
    sol.predicted_states = hc.predicted;
    sol.cost = hc.cost;
    sol.diverged = hc.diverged;
    sol.iterations = r.iterations;
    sol.converged = r.converged;
    sol.cost_history = r.history;
    return sol;
}

struct ClosedLoopOptions {
    double plant_dt = 0.01;
    /// Plant steps between controller updates; the input is held in between.
    int update_steps = 1;
    /// Input applied before the first update (u_prev of the first solve).
    Vector u_initial;
    /// Absolute standard deviation of Gaussian noise added to each measurement.
    double measurement_noise = 0.0;
    std::uint64_t seed = 0;
};

struct ClosedLoopResult {
    /// Plant trajectory at every plant step.
    dynamics::Trajectory trajectory;
    /// Running integral of the realized stage cost, one entry per sample.
    Vector cumulative_cost;
    /// Wall time of every controller update in seconds; held constant between updates in CSV output.
    std::vector<double> solve_times;
    /// Optimizer iterations and convergence flag of every controller update.
    std::vector<int> iterations;
    std::vector<bool> converged;
    int updates = 0;
    bool failed = false;
    std::string message;

    double total_cost() const { return cumulative_cost.size() ? cumulative_cost(cumulative_cost.size() - 1) : 0.0; }
    double mean_solve_time() const
    {
        if (solve_times.empty()) return 0.0;
        double s = 0.0;
        for (double v : solve_times) s += v;
        return s / static_cast<double>(solve_times.size());
    }
};

/// Receding-horizon closed loop. The plant is advanced with its own integrator at opt.plant_dt; every
/// `update_steps` plant steps the model state is measured, the MPC problem solved (warm-started by the
/// shifted previous solution) and the first input held until the next update.
inline ClosedLoopResult run_closed_loop(const dynamics::SystemSpec& plant, const sysid::Predictor& model, const MpcConfig& cfg,
                                        const Reference& ref, const Vector& x0, double t0, double duration,
                                        const ClosedLoopOptions& opt)
{
    require(opt.update_steps >= 1, "run_closed_loop: update interval must be >= 1 plant step");
    require(opt.plant_dt > 0.0, "run_closed_loop: plant dt must be positive");
    require(x0.size() == plant.n, "run_closed_loop: initial state has wrong dimension");
    const int q = cfg.num_inputs();
    ClosedLoopResult res;
    if (duration == 0.0) {
        res.trajectory.times.resize(0);
        res.trajectory.states.resize(plant.n, 0);
        res.trajectory.inputs.resize(q, 0);
        res.cumulative_cost.resize(0);
        return res;
    }
    const int steps = dynamics::steps_for(duration, opt.plant_dt);
    const Vector u_init = opt.u_initial.size() == q ? opt.u_initial : Vector(Vector::Zero(q));

    std::vector<double> times;
    std::vector<Vector> states, inputs;
    std::vector<double> running;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vector x = x0;
    Vector u = u_init;
    Vector u_prev_applied = u_init;
    std::optional<Matrix> warm;
    double J = 0.0;
    for (int k = 0; k <= steps; ++k) {
        const double t = t0 + k * opt.plant_dt;
        Vector du = Vector::Zero(q);
        if (k < steps && k % opt.update_steps == 0) {
            Vector y = model.measure(x);
            if (opt.measurement_noise > 0.0)
                for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += opt.measurement_noise * gauss(rng);
            const auto start = std::chrono::steady_clock::now();
            const MpcSolution sol = solve_mpc_step(model, y, u, ref, t, cfg, warm);
            res.solve_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            ++res.updates;
            res.iterations.push_back(sol.iterations);
            res.converged.push_back(sol.converged);
            u_prev_applied = u;
            u = sol.u_sequence.col(0);
            du = u - u_prev_applied;
            warm = shift_warm_start(sol.u_sequence);
        }
        const Vector y_true = model.measure(x);
        if (k > 0) J += stage_cost(y_true, u, du, ref(t), cfg) * opt.plant_dt;
        times.push_back(t);
        states.push_back(x);
        inputs.push_back(u);
        running.push_back(J);
        if (k == steps) break;
        Vector next = dynamics::plant_step(plant, x, u, t, opt.plant_dt);
        if (!next.allFinite()) {
            res.failed = true;
            res.message = "plant diverged after t = " + io::format_double(t);
            break;
        }
        x = std::move(next);
    }

    const auto m = static_cast<Eigen::Index>(times.size());
    res.trajectory.times = Eigen::Map<const Vector>(times.data(), m);
    res.trajectory.states.resize(plant.n, m);
    res.trajectory.inputs.resize(q, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        res.trajectory.states.col(i) = states[static_cast<std::size_t>(i)];
        res.trajectory.inputs.col(i) = inputs[static_cast<std::size_t>(i)];
    }
    res.cumulative_cost = Eigen::Map<const Vector>(running.data(), m);
    return res;
}

/// CSV with columns t, x1..xn, u1..uq, cost, solve_time. solve_time is the wall time of the update that
/// produced the input in effect (zero-filled when timings are excluded for reproducible output).
inline void write_closed_loop_csv(std::ostream& os, const ClosedLoopResult& r, int update_steps, bool include_timings = true)
{
    const int n = r.trajectory.n(), q = r.trajectory.q();
    os << io::trajectory_header(n, q) << ",cost,solve_time\n";
    for (int k = 0; k < r.trajectory.size(); ++k) {
        os << io::format_double(r.trajectory.times(k));
        for (int i = 0; i < n; ++i) os << ',' << io::format_double(r.trajectory.states(i, k));
        for (int i = 0; i < q; ++i) os << ',' << io::format_double(r.trajectory.inputs(i, k));
        os << ',' << io::format_double(r.cumulative_cost(k));
        double st = 0.0;
        if (include_timings && !r.solve_times.empty()) {
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(k / update_steps), r.solve_times.size() - 1);
            st = r.solve_times[idx];
        }
        os << ',' << io::format_double(st) << '\n';
    }
}

} // namespace sindympc::mpc
