#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sindympc/core.hpp"

namespace sindympc::mpc {

using Objective = std::function<double(const Vector&)>;

struct BoxOptions {
    int max_iter = 100;
    /// Stop when an accepted step lowers the cost by less than tol * max(1, |f|).
    double tolerance = 1e-8;
    /// Relative finite-difference step.
    double fd_step = 1e-7;
};

struct BoxResult {
    Vector x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Cost after every accepted iterate, starting with the initial point.
    std::vector<double> history;
};

inline Vector project(const Vector& x, const Vector& lower, const Vector& upper)
{
    return x.cwiseMax(lower).cwiseMin(upper);
}

/// Forward-difference gradient. Steps that would leave the box are taken backwards instead.
inline Vector fd_gradient(const Objective& f, const Vector& x, double fx, const Vector& lower, const Vector& upper,
                          double rel_step = 1e-7)
{
    Vector g(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = rel_step * std::max(1.0, std::abs(x(i)));
        if (x(i) + h > upper(i)) h = -h;
        if (x(i) + h < lower(i)) {
            g(i) = 0.0;
            continue;
        }
        xp(i) = x(i) + h;
        g(i) = (f(xp) - fx) / h;
        xp(i) = x(i);
    }
    return g;
}

/// Projected quasi-Newton minimization over a box: BFGS inverse-Hessian approximation restricted to
/// the free variables, projected Armijo backtracking, finite-difference gradients.
inline BoxResult minimize_box(const Objective& f, Vector x0, const Vector& lower, const Vector& upper,
                              const BoxOptions& opt = {})
{
    const Eigen::Index dim = x0.size();
    require(lower.size() == dim && upper.size() == dim, "minimize_box: bound dimensions differ");
    BoxResult res;
    Vector x = project(x0, lower, upper);
    double fx = f(x);
    Vector g = fd_gradient(f, x, fx, lower, upper, opt.fd_step);
    Matrix H = Matrix::Identity(dim, dim);
    res.history.push_back(fx);

    const auto is_active = [&](Eigen::Index i) {
        return (x(i) <= lower(i) && g(i) > 0.0) || (x(i) >= upper(i) && g(i) < 0.0);
    };

    int small_steps = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it + 1;
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < dim; ++i)
            if (!is_active(i)) free.push_back(i);
        if (free.empty()) {
            res.converged = true;
            break;
        }
        Vector gf(static_cast<Eigen::Index>(free.size()));
        for (std::size_t a = 0; a < free.size(); ++a) gf(static_cast<Eigen::Index>(a)) = g(free[a]);
        if (gf.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, std::abs(fx))) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        double f_new = fx;
        Vector x_new = x;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Vector d = Vector::Zero(dim);
            for (std::size_t a = 0; a < free.size(); ++a) {
                double v = 0.0;
                for (std::size_t b = 0; b < free.size(); ++b) v -= H(free[a], free[b]) * gf(static_cast<Eigen::Index>(b));
                d(free[a]) = v;
            }
            if (g.dot(d) >= 0.0) {
                H.setIdentity();
                continue;
            }
            double alpha = 1.0;
            for (int ls = 0; ls < 40; ++ls) {
                x_new = project(x + alpha * d, lower, upper);
                f_new = f(x_new);
                if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(x_new - x)) {
                    accepted = f_new < fx || (x_new - x).norm() == 0.0;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) H.setIdentity();
        }
        if (!accepted) {
            // No descent left at finite-difference resolution.
            res.converged = true;
            break;
        }

        const double decrease = fx - f_new;
        const Vector g_new = fd_gradient(f, x_new, f_new, lower, upper, opt.fd_step);
        const Vector s = x_new - x;
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Matrix I = Matrix::Identity(dim, dim);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        res.history.push_back(fx);
        // A single short step is not enough: also ask for a small projected gradient or a repeat.
        if (decrease <= opt.tolerance * std::max(1.0, std::abs(fx))) {
            const double pg = (project(x - g, lower, upper) - x).lpNorm<Eigen::Infinity>();
            if (++small_steps >= 2 || pg <= 1e-6 * std::max(1.0, std::abs(fx))) {
                res.converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    res.x = x;
    res.f = fx;
    return res;
}

} // namespace sindympc::mpc
