#pragma once

#include <cmath>
#include <string>

#include "sindympc/core.hpp"

namespace sindympc::dynamics {

/// Time-stamped state and input samples. Column k of states/inputs belongs to times(k).
/// derivatives is either empty or holds the measured state derivative at each sample.
struct Trajectory {
    Vector times;
    Matrix states;
    Matrix inputs;
    Matrix derivatives;

    int n() const { return static_cast<int>(states.rows()); }
    int q() const { return static_cast<int>(inputs.rows()); }
    int size() const { return static_cast<int>(times.size()); }
    bool empty() const { return times.size() == 0; }
    bool has_derivatives() const { return derivatives.size() > 0; }

    void validate() const
    {
        const auto m = times.size();
        if (states.cols() != m || inputs.cols() != m) {
            throw InvalidInput("trajectory: column counts of states (" + std::to_string(states.cols()) +
                               ") and inputs (" + std::to_string(inputs.cols()) + ") must equal sample count (" +
                               std::to_string(m) + ")");
        }
        if (has_derivatives() && (derivatives.cols() != m || derivatives.rows() != states.rows())) {
            throw InvalidInput("trajectory: derivative matrix shape does not match states");
        }
        for (Eigen::Index k = 1; k < m; ++k) {
            if (!(times(k) > times(k - 1))) throw InvalidInput("trajectory: times must be strictly increasing");
        }
    }

    /// Samples [begin, end).
    Trajectory slice(int begin, int end) const
    {
        require(0 <= begin && begin <= end && end <= size(), "trajectory slice out of range");
        Trajectory out;
        out.times = times.segment(begin, end - begin);
        out.states = states.middleCols(begin, end - begin);
        out.inputs = inputs.middleCols(begin, end - begin);
        if (has_derivatives()) out.derivatives = derivatives.middleCols(begin, end - begin);
        return out;
    }

    /// Keeps only the listed state rows (partial measurement).
    Trajectory select_states(const std::vector<int>& rows) const
    {
        Trajectory out;
        out.times = times;
        out.inputs = inputs;
        out.states.resize(static_cast<Eigen::Index>(rows.size()), states.cols());
        if (has_derivatives()) out.derivatives.resize(out.states.rows(), states.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            require(rows[i] >= 0 && rows[i] < n(), "select_states: row index out of range");
            out.states.row(static_cast<Eigen::Index>(i)) = states.row(rows[i]);
            if (has_derivatives()) out.derivatives.row(static_cast<Eigen::Index>(i)) = derivatives.row(rows[i]);
        }
        return out;
    }

    /// Uniform sample spacing, or throws when the spacing varies by more than a relative 1e-6.
    double uniform_step() const
    {
        require(size() >= 2, "trajectory needs at least two samples for a step size");
        const double h = (times(size() - 1) - times(0)) / (size() - 1);
        for (int k = 1; k < size(); ++k) {
            if (std::abs((times(k) - times(k - 1)) - h) > 1e-6 * std::abs(h)) {
                throw InvalidInput("trajectory: non-uniform sample spacing");
            }
        }
        return h;
    }
};

} // namespace sindympc::dynamics
