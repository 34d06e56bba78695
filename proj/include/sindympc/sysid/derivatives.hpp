#pragma once

#include <algorithm>
#include <cmath>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/trajectory.hpp"

namespace sindympc::sysid {

/// Second-order finite differences along the columns of a uniformly sampled signal:
/// central in the interior, one-sided three-point at both ends.
inline Matrix finite_differences(const Eigen::Ref<const Matrix>& x, double h)
{
    require(x.cols() >= 3, "finite differences need at least 3 samples");
    require(h > 0.0, "finite differences need a positive step");
    const Eigen::Index m = x.cols();
    Matrix dx(x.rows(), m);
    dx.col(0) = (-3.0 * x.col(0) + 4.0 * x.col(1) - x.col(2)) / (2.0 * h);
    for (Eigen::Index k = 1; k + 1 < m; ++k) dx.col(k) = (x.col(k + 1) - x.col(k - 1)) / (2.0 * h);
    dx.col(m - 1) = (3.0 * x.col(m - 1) - 4.0 * x.col(m - 2) + x.col(m - 3)) / (2.0 * h);
    return dx;
}

/// Centered moving average; the window shrinks symmetrically near the ends.
inline Matrix moving_average(const Eigen::Ref<const Matrix>& x, int window)
{
    require(window >= 1, "moving average window must be >= 1");
    if (window == 1) return x;
    const int half = window / 2;
    const Eigen::Index m = x.cols();
    Matrix out(x.rows(), m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index h = std::min<Eigen::Index>({half, k, m - 1 - k});
        out.col(k) = x.middleCols(k - h, 2 * h + 1).rowwise().mean();
    }
    return out;
}

/// Savitzky-Golay filter along the columns: a least-squares polynomial of the given order is fitted to
/// every window of `window` (odd) samples and evaluated, or differentiated once when deriv = 1, at the
/// sample. Near the ends the first or last full window is used. h is the sample spacing.
inline Matrix savitzky_golay(const Eigen::Ref<const Matrix>& x, int window, int order, int deriv, double h)
{
    require(window >= 1 && window % 2 == 1, "savitzky_golay: window must be odd and positive");
    require(order >= 0 && order < window, "savitzky_golay: order must lie in [0, window)");
    require(deriv == 0 || deriv == 1, "savitzky_golay: only deriv 0 or 1 supported");
    require(h > 0.0, "savitzky_golay: sample spacing must be positive");
    const Eigen::Index m = x.cols();
    require(m >= window, "savitzky_golay: fewer samples than the window");
    const int half = window / 2;

    // Vandermonde on offsets -half..half; row r of the pseudo-inverse maps a window to coefficient r.
    Matrix V(window, order + 1);
    for (int i = 0; i < window; ++i) {
        double p = 1.0;
        for (int j = 0; j <= order; ++j) {
            V(i, j) = p;
            p *= static_cast<double>(i - half);
        }
    }
    const Matrix pinv = V.completeOrthogonalDecomposition().pseudoInverse();
    // Weights that evaluate the fitted polynomial (or its derivative) at a given window offset.
    const auto weights = [&](int offset) {
        Vector w = Vector::Zero(window);
        for (int j = deriv; j <= order; ++j) {
            const double factor = deriv == 0 ? std::pow(static_cast<double>(offset), j)
                                             : j * std::pow(static_cast<double>(offset), j - 1);
            w += factor * pinv.row(j).transpose();
        }
        return deriv == 1 ? Vector(w / h) : w;
    };

    Matrix out(x.rows(), m);
    const Vector centre = weights(0);
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::Index start = k - half;
        int offset = 0;
        if (start < 0) {
            offset = static_cast<int>(k) - half;
            start = 0;
        } else if (start + window > m) {
            offset = static_cast<int>(k - (m - window)) - half;
            start = m - window;
        }
        const Vector w = offset == 0 ? centre : weights(offset);
        out.col(k) = x.middleCols(start, window) * w;
    }
    return out;
}

/// Largest odd window not above `window` that fits in m samples and exceeds the polynomial order.
inline int fitting_window(int window, int order, Eigen::Index m)
{
    int w = static_cast<int>(std::min<Eigen::Index>(window, m));
    if (w % 2 == 0) --w;
    return w > order ? w : 1;
}

/// Smoothed states and their derivatives. smoothing_window = 1 returns the raw states with second-order
/// finite differences; larger windows use a Savitzky-Golay fit of order smoothing_order, shrunk to the
/// data length when needed. Rejects non-uniform sampling.
struct SmoothedStates {
    Matrix states;
    Matrix derivatives;
};

inline SmoothedStates smooth_and_differentiate(const dynamics::Trajectory& traj, int smoothing_window = 1,
                                               int smoothing_order = 3)
{
    traj.validate();
    require(traj.size() >= 3, "compute_derivatives: need at least 3 samples");
    const double h = traj.uniform_step();
    const int w = fitting_window(smoothing_window, smoothing_order, traj.size());
    if (w <= 1) return {traj.states, finite_differences(traj.states, h)};
    return {savitzky_golay(traj.states, w, smoothing_order, 0, h), savitzky_golay(traj.states, w, smoothing_order, 1, h)};
}

/// State derivatives of a trajectory, see smooth_and_differentiate.
inline Matrix compute_derivatives(const dynamics::Trajectory& traj, int smoothing_window = 1, int smoothing_order = 3)
{
    return smooth_and_differentiate(traj, smoothing_window, smoothing_order).derivatives;
}

} // namespace sindympc::sysid
