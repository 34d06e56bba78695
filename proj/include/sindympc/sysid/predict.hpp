#pragma once

#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/integrate.hpp"
#include "sindympc/dynamics/signal.hpp"
#include "sindympc/dynamics/system.hpp"
#include "sindympc/dynamics/trajectory.hpp"
#include "sindympc/features/library.hpp"
#include "sindympc/sysid/model.hpp"

namespace sindympc::sysid {

/// Discrete-time predictor used for rollouts and by the controller.
///
/// A predictor works on an internal model state s: lift() builds it from a measured state and the
/// previously applied input, advance() moves it one model step, observe() reads the physical state back.
class Predictor {
public:
    virtual ~Predictor() = default;

    /// Number of physical state coordinates the model describes.
    virtual int state_dim() const = 0;
    virtual int input_dim() const = 0;
    virtual double dt() const = 0;
    virtual std::string name() const = 0;

    virtual Vector lift(const Vector& x, const Vector& u_prev) const = 0;
    virtual Vector advance(const Vector& s, const Vector& u) const = 0;
    virtual Vector observe(const Vector& s) const = 0;

    /// One model step with the input re-evaluated every substep of length dt()/substeps. Only models
    /// with a continuous vector field can use the finer input; the default holds input(t).
    virtual Vector advance_resolved(const Vector& s, const std::function<Vector(double)>& input, double t, int) const
    {
        return advance(s, input(t));
    }

    /// Plant state indices the model sees; empty means the full plant state.
    const std::vector<int>& measured_states() const { return measured_; }

    /// Restricts a full plant state to the model's coordinates.
    Vector measure(const Vector& plant_state) const
    {
        if (measured_.empty()) return plant_state;
        Vector out(static_cast<Eigen::Index>(measured_.size()));
        for (std::size_t i = 0; i < measured_.size(); ++i) out(static_cast<Eigen::Index>(i)) = plant_state(measured_[i]);
        return out;
    }

protected:
    std::vector<int> measured_;
};

using PredictorPtr = std::shared_ptr<const Predictor>;

/// Sparse model predictor. Continuous models take `substeps` RK4 steps per model step.
class SparsePredictor final : public Predictor {
public:
    explicit SparsePredictor(SparseModel model, int substeps = 1)
        : model_(std::move(model)), library_(model_.library), substeps_(substeps)
    {
        require(model_.dt > 0.0, "sparse predictor needs a positive model dt");
        require(substeps_ >= 1, "sparse predictor needs substeps >= 1");
        require(model_.xi.cols() == library_.size(), "sparse model coefficient/library mismatch");
        measured_ = model_.state_indices;
        for (int j = 0; j < library_.size(); ++j) {
            if ((model_.xi.col(j).array() != 0.0).any()) active_.push_back(j);
        }
        compact_.resize(model_.xi.rows(), static_cast<Eigen::Index>(active_.size()));
        for (std::size_t c = 0; c < active_.size(); ++c) compact_.col(static_cast<Eigen::Index>(c)) = model_.xi.col(active_[c]);
    }

    int state_dim() const override { return model_.n(); }
    int input_dim() const override { return model_.q(); }
    double dt() const override { return model_.dt; }
    std::string name() const override { return "sparse"; }
    const SparseModel& model() const { return model_; }

    /// Xi Theta(x, u) restricted to the active library columns.
    Vector evaluate(const Vector& x, const Vector& u) const
    {
        Vector z(x.size() + u.size());
        z << x, u;
        if (active_.empty()) return Vector::Zero(model_.n());
        return compact_ * library_.evaluate(z, active_);
    }

    Vector lift(const Vector& x, const Vector&) const override
    {
        require(x.size() == model_.n(), "sparse predictor: state dimension mismatch");
        return x;
    }

    Vector advance(const Vector& s, const Vector& u) const override
    {
        if (model_.form == ModelForm::DiscreteTime) return evaluate(s, u);
        auto field = [this](const Vector& x, const Vector& v, double) { return evaluate(x, v); };
        const double h = model_.dt / substeps_;
        Vector x = s;
        for (int k = 0; k < substeps_; ++k) x = dynamics::rk4_step(field, x, u, 0.0, h);
        return x;
    }

    Vector advance_resolved(const Vector& s, const std::function<Vector(double)>& input, double t,
                            int substeps) const override
    {
        if (model_.form == ModelForm::DiscreteTime || substeps <= 1) return advance(s, input(t));
        auto field = [this](const Vector& x, const Vector& v, double) { return evaluate(x, v); };
        const double h = model_.dt / substeps;
        Vector x = s;
        for (int k = 0; k < substeps; ++k) x = dynamics::rk4_step(field, x, input(t + k * h), t + k * h, h);
        return x;
    }

    Vector observe(const Vector& s) const override { return s; }

private:
    SparseModel model_;
    features::Library library_;
    int substeps_;
    std::vector<int> active_;
    Matrix compact_;
};

/// Predictor for the DMDc family (plain, delay coordinates, polynomial lifting).
class LinearPredictor final : public Predictor {
public:
    explicit LinearPredictor(LinearModel model) : model_(std::move(model))
    {
        require(model_.dt > 0.0, "linear predictor needs a positive model dt");
        if (auto* p = std::get_if<PolyLiftEmbedding>(&model_.embedding)) {
            lift_library_ = features::Library(p->library);
            lift_with_inputs_ = p->library.num_variables() == model_.n + model_.q && model_.q > 0;
            const auto lin = lift_library_.linear_columns();
            for (int i = 0; i < model_.n; ++i) {
                require(lin[static_cast<std::size_t>(i)] >= 0, "poly lift must contain the degree-1 state monomials");
                readback_.push_back(lin[static_cast<std::size_t>(i)]);
            }
        }
    }

    int state_dim() const override { return model_.n; }
    int input_dim() const override { return model_.q; }
    double dt() const override { return model_.dt; }
    std::string name() const override { return "linear-" + model_.embedding_name(); }
    const LinearModel& model() const { return model_; }

    Vector lift(const Vector& x, const Vector& u_prev) const override
    {
        require(x.size() == model_.n, "linear predictor: state dimension mismatch");
        const Vector dev = model_.state_offset ? Vector(x - *model_.state_offset) : x;
        if (auto* d = std::get_if<DelayEmbedding>(&model_.embedding)) {
            const int hist = (d->delays - 1) * d->lag + 1;
            const int past = (d->delays - 1) * d->lag;
            Vector s(hist * model_.n + past * model_.q);
            for (int k = 0; k < hist; ++k) s.segment(k * model_.n, model_.n) = dev;
            const Vector up = u_prev.size() == model_.q ? u_prev : Vector(Vector::Zero(model_.q));
            for (int k = 0; k < past; ++k) s.segment(hist * model_.n + k * model_.q, model_.q) = up;
            return s;
        }
        if (std::holds_alternative<PolyLiftEmbedding>(model_.embedding)) {
            if (!lift_with_inputs_) return lift_library_.evaluate(x);
            Vector z(model_.n + model_.q);
            z << x, (u_prev.size() == model_.q ? u_prev : Vector(Vector::Zero(model_.q)));
            return lift_library_.evaluate(z);
        }
        return dev;
    }

    Vector advance(const Vector& s, const Vector& u) const override
    {
        if (auto* d = std::get_if<DelayEmbedding>(&model_.embedding)) {
            const int n = model_.n, q = model_.q;
            const int hist = (d->delays - 1) * d->lag + 1;
            const int past = (d->delays - 1) * d->lag;
            Vector z(d->delays * n), w(d->delays * q);
            for (int j = 0; j < d->delays; ++j) {
                z.segment(j * n, n) = s.segment(j * d->lag * n, n);
                if (q > 0) w.segment(j * q, q) = j == 0 ? u : Vector(s.segment(hist * n + (j * d->lag - 1) * q, q));
            }
            const Vector newest = (model_.a * z + model_.b * w).head(n);
            Vector out(s.size());
            out.head(n) = newest;
            out.segment(n, (hist - 1) * n) = s.head((hist - 1) * n);
            if (past > 0) {
                out.segment(hist * n, q) = u;
                out.segment(hist * n + q, (past - 1) * q) = s.segment(hist * n, (past - 1) * q);
            }
            return out;
        }
        return model_.a * s + model_.b * u;
    }

    Vector observe(const Vector& s) const override
    {
        if (std::holds_alternative<PolyLiftEmbedding>(model_.embedding)) {
            Vector x(model_.n);
            for (int i = 0; i < model_.n; ++i) x(i) = s(readback_[static_cast<std::size_t>(i)]);
            return x;
        }
        Vector x = s.head(model_.n);
        if (model_.state_offset) x += *model_.state_offset;
        return x;
    }

private:
    LinearModel model_;
    features::Library lift_library_;
    bool lift_with_inputs_ = false;
    std::vector<int> readback_;
};

/// The true plant used as its own model, advanced with RK4 at the model step.
class PlantPredictor final : public Predictor {
public:
    PlantPredictor(dynamics::SystemSpec sys, double dt, int substeps = 1)
        : sys_(std::move(sys)), dt_(dt), substeps_(substeps)
    {
        require(dt_ > 0.0 && substeps_ >= 1, "plant predictor needs dt > 0 and substeps >= 1");
    }

    int state_dim() const override { return sys_.n; }
    int input_dim() const override { return sys_.q; }
    double dt() const override { return dt_; }
    std::string name() const override { return "plant-" + sys_.name(); }
    Vector lift(const Vector& x, const Vector&) const override { return x; }
    Vector advance(const Vector& s, const Vector& u) const override
    {
        if (sys_.kind == dynamics::SystemKind::IdentifiedLinear) return sys_.map(s, u);
        Vector x = s;
        const double h = dt_ / substeps_;
        for (int k = 0; k < substeps_; ++k) x = dynamics::plant_step(sys_, x, u, 0.0, h);
        return x;
    }
    Vector advance_resolved(const Vector& s, const std::function<Vector(double)>& input, double t,
                            int substeps) const override
    {
        if (sys_.kind == dynamics::SystemKind::IdentifiedLinear || substeps <= 1) return advance(s, input(t));
        Vector x = s;
        const double h = dt_ / substeps;
        for (int k = 0; k < substeps; ++k) x = dynamics::plant_step(sys_, x, input(t + k * h), t + k * h, h);
        return x;
    }
    Vector observe(const Vector& s) const override { return s; }

private:
    dynamics::SystemSpec sys_;
    double dt_;
    int substeps_;
};

using AnyModel = std::variant<SparseModel, LinearModel>;

inline PredictorPtr make_predictor(const AnyModel& model, int substeps = 1)
{
    if (auto* s = std::get_if<SparseModel>(&model)) return std::make_shared<SparsePredictor>(*s, substeps);
    return std::make_shared<LinearPredictor>(std::get<LinearModel>(model));
}

/// Rolls a predictor forward from x0 (in the predictor's coordinates). Samples are reported every model
/// step in physical coordinates. The input is evaluated at the start of every model step, or every
/// `input_dt` (the plant step) for continuous models when input_dt divides the model step.
inline dynamics::Trajectory predict(const Predictor& model, const Vector& x0,
                                    const std::function<Vector(double)>& input, double t0, double duration,
                                    double input_dt = 0.0, const Vector& u_prev = Vector())
{
    require(x0.size() == model.state_dim(), "predict: initial state has wrong dimension");
    const int steps = dynamics::steps_for(duration, model.dt());
    const int substeps = input_dt > 0.0 ? dynamics::steps_for(model.dt(), input_dt) : 1;
    dynamics::Trajectory traj;
    traj.times.resize(steps + 1);
    traj.states.resize(model.state_dim(), steps + 1);
    traj.inputs.resize(model.input_dim(), steps + 1);
    Vector s = model.lift(x0, u_prev.size() == model.input_dim() ? u_prev : input(t0));
    for (int k = 0; k <= steps; ++k) {
        const double t = t0 + k * model.dt();
        const Vector u = input(t);
        traj.times(k) = t;
        traj.states.col(k) = model.observe(s);
        traj.inputs.col(k) = u;
        if (k == steps) break;
        Vector next = model.advance_resolved(s, input, t, substeps);
        if (!next.allFinite()) throw DivergenceError("predict: model rollout diverged", t);
        s = std::move(next);
    }
    return traj;
}

inline dynamics::Trajectory predict(const Predictor& model, const Vector& x0, const dynamics::ExcitationSignal& signal,
                                    double t0, double duration, double input_dt = 0.0)
{
    return predict(
        model, x0, [&signal](double t) { return dynamics::eval_signal(signal, t); }, t0, duration, input_dt);
}

/// Wraps a continuous sparse model as a simulatable plant.
inline dynamics::SystemSpec as_plant(const SparseModel& model)
{
    require(model.form == ModelForm::ContinuousTime, "as_plant: only continuous sparse models have a vector field");
    auto pred = std::make_shared<SparsePredictor>(model);
    return dynamics::identified_sparse(model.n(), model.q(),
                                       [pred](const Vector& x, const Vector& u, double) { return pred->evaluate(x, u); });
}

/// Wraps a plain DMDc model as a discrete plant stepping at the model dt.
inline dynamics::SystemSpec as_plant(const LinearModel& model)
{
    require(std::holds_alternative<NoEmbedding>(model.embedding), "as_plant: only plain DMDc models can act as plants");
    auto pred = std::make_shared<LinearPredictor>(model);
    return dynamics::identified_linear(
        model.n, model.q, [pred](const Vector& x, const Vector& u) { return pred->observe(pred->advance(pred->lift(x, u), u)); },
        model.dt);
}

} // namespace sindympc::sysid
