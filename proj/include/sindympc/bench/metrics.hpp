#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/trajectory.hpp"

namespace sindympc::bench {

namespace detail {

inline void require_aligned(const dynamics::Trajectory& truth, const dynamics::Trajectory& pred)
{
    require(truth.size() == pred.size() && truth.n() == pred.n(), "metrics: trajectories are not aligned");
    require(truth.size() > 0, "metrics: empty trajectories");
    for (int k = 0; k < truth.size(); ++k) {
        if (std::abs(truth.times(k) - pred.times(k)) > 1e-9 * std::max(1.0, std::abs(truth.times(k))))
            throw InvalidInput("metrics: sample times differ at index " + std::to_string(k));
    }
}

} // namespace detail

struct RelativeError {
    double value = 0.0;
    std::vector<std::string> warnings;
};

/// Mean over states of mean_t |pred - truth| / mean_t |truth|. States whose truth has zero mean
/// magnitude are skipped with a warning.
inline RelativeError avg_relative_error(const dynamics::Trajectory& truth, const dynamics::Trajectory& pred)
{
    detail::require_aligned(truth, pred);
    RelativeError out;
    double sum = 0.0;
    int used = 0;
    for (int i = 0; i < truth.n(); ++i) {
        const double scale = truth.states.row(i).cwiseAbs().mean();
        if (scale == 0.0) {
            out.warnings.push_back("state " + std::to_string(i + 1) + " has zero mean magnitude; skipped");
            continue;
        }
        sum += (pred.states.row(i) - truth.states.row(i)).cwiseAbs().mean() / scale;
        ++used;
    }
    out.value = used > 0 ? sum / used : 0.0;
    if (!std::isfinite(out.value)) out.value = std::numeric_limits<double>::infinity();
    return out;
}

/// Mean squared error over all states and samples.
inline double mse(const dynamics::Trajectory& truth, const dynamics::Trajectory& pred)
{
    detail::require_aligned(truth, pred);
    const double v = (pred.states - truth.states).array().square().mean();
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// Time from the first sample until the Euclidean state error first reaches eps; the full span if never.
inline double prediction_horizon(const dynamics::Trajectory& truth, const dynamics::Trajectory& pred, double eps)
{
    detail::require_aligned(truth, pred);
    require(eps > 0.0, "prediction_horizon: eps must be positive");
    const double t0 = truth.times(0);
    for (int k = 0; k < truth.size(); ++k) {
        const double e = (pred.states.col(k) - truth.states.col(k)).norm();
        if (!(e < eps)) return truth.times(k) - t0;
    }
    return truth.times(truth.size() - 1) - t0;
}

/// Linear-interpolation percentile (p in [0, 100]) of a sample; infinities sort last.
inline double percentile(std::vector<double> values, double p)
{
    require(!values.empty(), "percentile: empty sample");
    require(p >= 0.0 && p <= 100.0, "percentile: p must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    if (lo == hi || values[lo] == values[hi]) return values[lo];
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values)
{
    return percentile(std::move(values), 50.0);
}

} // namespace sindympc::bench
