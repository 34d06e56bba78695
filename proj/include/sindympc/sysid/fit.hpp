#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/trajectory.hpp"
#include "sindympc/features/library.hpp"
#include "sindympc/sysid/derivatives.hpp"
#include "sindympc/sysid/model.hpp"
#include "sindympc/sysid/regression.hpp"

namespace sindympc::sysid {

struct SindyOptions {
    ModelForm form = ModelForm::ContinuousTime;
    int max_iter = 25;
    /// Use the trajectory's measured derivatives when it carries them.
    bool use_measured_derivatives = true;
    /// Savitzky-Golay window for estimated derivatives; 1 means plain finite differences. When the
    /// derivatives are estimated the library is built from the smoothed states as well.
    int smoothing_window = 1;
    int smoothing_order = 3;
    /// Restrict the fit to these plant states (partial measurement); empty keeps all.
    std::vector<int> state_indices;
};

namespace detail {

struct RegressionData {
    features::FeatureMatrix features;
    Matrix targets;
    double dt = 0.0;
};

inline RegressionData sindy_regression_data(const dynamics::Trajectory& full, const features::LibrarySpec& library,
                                            const SindyOptions& opt)
{
    full.validate();
    const dynamics::Trajectory traj = opt.state_indices.empty() ? full : full.select_states(opt.state_indices);
    require(library.num_variables() == traj.n() + traj.q(),
            "sindy: library must cover all states and inputs (" + std::to_string(traj.n() + traj.q()) + " variables)");
    RegressionData d;
    d.dt = traj.uniform_step();
    if (opt.form == ModelForm::ContinuousTime) {
        if (opt.use_measured_derivatives && traj.has_derivatives()) {
            d.targets = traj.derivatives;
            d.features = features::build_library(traj.states, traj.inputs, library);
        } else {
            auto smoothed = smooth_and_differentiate(traj, opt.smoothing_window, opt.smoothing_order);
            d.targets = std::move(smoothed.derivatives);
            d.features = features::build_library(smoothed.states, traj.inputs, library);
        }
    } else {
        const Eigen::Index m = traj.size();
        require(m >= 2, "sindy: discrete form needs at least 2 samples");
        d.targets = traj.states.rightCols(m - 1);
        d.features = features::build_library(traj.states.leftCols(m - 1), traj.inputs.leftCols(m - 1), library);
    }
    return d;
}

} // namespace detail

/// Sparse identification with control. Thresholds act on the (possibly normalized) library coefficients;
/// the returned coefficients are always in raw library units.
inline SparseModel fit_sindyc(const dynamics::Trajectory& traj, const features::LibrarySpec& library,
                              const Vector& lambdas, const SindyOptions& opt = {})
{
    auto data = detail::sindy_regression_data(traj, library, opt);
    require(lambdas.size() == data.targets.rows(), "fit_sindyc: need one threshold per state");
    auto res = stls(data.features.theta(), data.targets, lambdas, opt.max_iter);

    SparseModel m;
    m.xi = features::unscale_coefficients(res.xi, data.features.column_scales);
    m.library = library;
    m.form = opt.form;
    m.dt = data.dt;
    m.lambdas = lambdas;
    m.state_indices = opt.state_indices;
    m.warnings = std::move(res.warnings);
    return m;
}

struct AdaptedLambdas {
    Vector lambdas;
    std::vector<std::string> warnings;
};

/// Per state, divides the threshold by 10 until the fitted row has a nonzero entry or drops below 1e-12.
inline AdaptedLambdas adapt_lambda(const dynamics::Trajectory& traj, const features::LibrarySpec& library,
                                   double initial_lambda, const SindyOptions& opt = {})
{
    require(initial_lambda > 0.0, "adapt_lambda: initial lambda must be positive");
    constexpr double floor = 1e-12;
    auto data = detail::sindy_regression_data(traj, library, opt);
    const Matrix theta = data.features.theta();
    AdaptedLambdas out;
    out.lambdas.resize(data.targets.rows());
    for (Eigen::Index k = 0; k < data.targets.rows(); ++k) {
        double lambda = initial_lambda;
        bool nonzero = false;
        while (true) {
            auto res = stls(theta, data.targets.row(k), Vector::Constant(1, lambda), opt.max_iter);
            if ((res.xi.array() != 0.0).any()) {
                nonzero = true;
                break;
            }
            if (lambda / 10.0 < floor) break;
            lambda /= 10.0;
        }
        if (!nonzero) out.warnings.push_back("adapt_lambda: row " + std::to_string(k) + " stayed empty down to the floor");
        out.lambdas(k) = lambda;
    }
    return out;
}

/// Least-squares [A B] with Xp = A X + B U on explicit snapshot matrices. Minimum-norm when under-determined.
inline LinearModel dmdc_regression(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& Xp,
                                   const Eigen::Ref<const Matrix>& U)
{
    require(X.cols() == Xp.cols() && X.rows() == Xp.rows(), "dmdc: X and X' must have the same shape");
    require(U.cols() == X.cols(), "dmdc: U must have one column per snapshot");
    if (X.cols() == 0) throw EmptyDataError("dmdc: no snapshot pairs");
    const Eigen::Index n = X.rows(), q = U.rows();
    Matrix omega(n + q, X.cols());
    omega.topRows(n) = X;
    if (q > 0) omega.bottomRows(q) = U;
    auto fit = lstsq(omega.transpose(), Xp.transpose());
    const Matrix G = fit.solution.transpose();
    LinearModel m;
    m.a = G.leftCols(n);
    m.b = G.rightCols(q);
    m.under_determined = X.cols() < n + q;
    if (m.under_determined) {
        m.warnings.push_back("dmdc: " + std::to_string(X.cols()) + " snapshot pairs for " + std::to_string(n + q) +
                             " unknowns per row; minimum-norm solution");
    } else if (fit.rank_deficient) {
        m.warnings.push_back("dmdc: regression matrix is rank deficient; minimum-norm solution");
    }
    return m;
}

inline Matrix subtract_offset(const Eigen::Ref<const Matrix>& X, const std::optional<Vector>& offset)
{
    if (!offset) return X;
    require(offset->size() == X.rows(), "state offset has wrong dimension");
    return X.colwise() - *offset;
}

/// DMDc on consecutive samples, optionally on deviations from a goal state.
inline LinearModel fit_dmdc(const dynamics::Trajectory& traj, const std::optional<Vector>& offset = std::nullopt)
{
    traj.validate();
    require(traj.size() >= 2, "fit_dmdc: need at least 2 samples");
    const Eigen::Index m = traj.size();
    const Matrix dev = subtract_offset(traj.states, offset);
    auto model = dmdc_regression(dev.leftCols(m - 1), dev.rightCols(m - 1), traj.inputs.leftCols(m - 1));
    model.state_offset = offset;
    model.dt = traj.uniform_step();
    model.n = traj.n();
    model.q = traj.q();
    return model;
}

/// DMDc on delay coordinates: `delays` copies of (state - offset) and of the input, `lag` samples apart.
/// A is (delays*n) x (delays*n); B multiplies the stacked current and past inputs.
inline LinearModel fit_delay_dmdc(const dynamics::Trajectory& traj, int delays,
                                  const std::optional<Vector>& offset = std::nullopt, int lag = 1)
{
    traj.validate();
    require(delays >= 1, "fit_delay_dmdc: delays must be >= 1");
    require(lag >= 1, "fit_delay_dmdc: lag must be >= 1");
    const int n = traj.n(), q = traj.q();
    const int first = (delays - 1) * lag;
    const int pairs = traj.size() - 1 - first;
    if (pairs < 1) {
        throw InvalidInput("fit_delay_dmdc: " + std::to_string(traj.size()) + " samples are too few for " +
                           std::to_string(delays) + " delays");
    }
    const Matrix dev = subtract_offset(traj.states, offset);
    Matrix Z(delays * n, pairs), Zp(delays * n, pairs), W(delays * q, pairs);
    for (int c = 0; c < pairs; ++c) {
        const int k = first + c;
        for (int d = 0; d < delays; ++d) {
            Z.block(d * n, c, n, 1) = dev.col(k - d * lag);
            Zp.block(d * n, c, n, 1) = dev.col(k + 1 - d * lag);
            if (q > 0) W.block(d * q, c, q, 1) = traj.inputs.col(k - d * lag);
        }
    }
    auto model = dmdc_regression(Z, Zp, W);
    model.state_offset = offset;
    model.embedding = DelayEmbedding{delays, lag};
    model.dt = traj.uniform_step();
    model.n = n;
    model.q = q;
    return model;
}

/// Extended DMDc: linear regression on the polynomial lifting Theta. With a state-only library the lift is
/// Theta(x_k); when the library also covers the inputs the lift is Theta(x_k, u_{k-1}), so that
/// Theta(x_{k+1}, u_k) = A Theta(x_k, u_{k-1}) + B u_k.
inline LinearModel fit_edmdc(const dynamics::Trajectory& traj, const features::LibrarySpec& library)
{
    traj.validate();
    const int n = traj.n(), q = traj.q();
    const bool with_inputs = library.num_variables() == n + q && q > 0;
    require(library.num_variables() == n || with_inputs, "fit_edmdc: library must cover the states or states+inputs");
    features::LibrarySpec lib = library;
    lib.normalize = false;
    const int first = with_inputs ? 1 : 0;
    const int m = traj.size();
    require(m - first >= 2, "fit_edmdc: too few samples");

    const Matrix X = traj.states.middleCols(first, m - first);
    features::FeatureMatrix lifted =
        with_inputs ? features::build_library(X, traj.inputs.middleCols(first - 1, m - first), lib)
                    : features::build_library(X, Matrix(0, m - first), lib);
    const int pairs = m - first - 1;
    auto model = dmdc_regression(lifted.values.leftCols(pairs), lifted.values.rightCols(pairs),
                                 traj.inputs.middleCols(first, pairs));
    model.embedding = PolyLiftEmbedding{lib};
    model.dt = traj.uniform_step();
    model.n = n;
    model.q = q;
    return model;
}

/// Sparse regression of the inputs onto a state-only library.
inline FeedbackLaw identify_feedback(const dynamics::Trajectory& traj, const features::LibrarySpec& library,
                                     const Vector& lambdas, int max_iter = 25)
{
    traj.validate();
    require(traj.q() > 0, "identify_feedback: trajectory has no inputs");
    require(library.num_variables() == traj.n(), "identify_feedback: library must cover the states only");
    const auto fm = features::build_library(traj.states, Matrix(0, traj.size()), library);
    auto res = stls(fm.theta(), traj.inputs, lambdas, max_iter);
    FeedbackLaw law;
    law.xi_u = features::unscale_coefficients(res.xi, fm.column_scales);
    law.library = library;
    law.ill_conditioned = res.ill_conditioned;
    law.warnings = std::move(res.warnings);
    return law;
}

} // namespace sindympc::sysid
