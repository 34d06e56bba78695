#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/trajectory.hpp"

namespace sindympc::sysid {

/// Relative measurement noise: sigma = eta * max_i std(x_i).
struct NoiseSpec {
    double eta = 0.0;
    std::uint64_t seed = 0;
};

/// Sample standard deviation (N - 1 normalization) of each state.
inline Vector state_std(const Eigen::Ref<const Matrix>& states)
{
    const Eigen::Index m = states.cols();
    Vector out = Vector::Zero(states.rows());
    if (m < 2) return out;
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
        const double mean = states.row(i).mean();
        out(i) = std::sqrt((states.row(i).array() - mean).square().sum() / static_cast<double>(m - 1));
    }
    return out;
}

inline double noise_sigma(const dynamics::Trajectory& traj, double eta)
{
    if (traj.n() == 0) return 0.0;
    return eta * state_std(traj.states).maxCoeff();
}

/// Adds i.i.d. Gaussian noise to every state sample. Inputs are untouched; measured derivatives are
/// dropped since they would no longer match the corrupted states.
inline dynamics::Trajectory add_noise(const dynamics::Trajectory& traj, const NoiseSpec& spec)
{
    require(spec.eta >= 0.0, "add_noise: eta must be >= 0");
    if (spec.eta == 0.0) return traj;
    dynamics::Trajectory out = traj;
    out.derivatives.resize(0, 0);
    const double sigma = noise_sigma(traj, spec.eta);
    if (!(sigma > 0.0)) return out;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Eigen::Index k = 0; k < out.states.cols(); ++k)
        for (Eigen::Index i = 0; i < out.states.rows(); ++i) out.states(i, k) += gauss(rng);
    return out;
}

} // namespace sindympc::sysid
