#pragma once

#include <string>
#include <vector>

#include "sindympc/core.hpp"

namespace sindympc::sysid {

struct LstsqResult {
    Matrix solution;
    int rank = 0;
    bool rank_deficient = false;
};

/// Minimum-norm least squares min ||A X - B||_F via a complete orthogonal decomposition of the
/// column-equilibrated A. Zero columns get a zero coefficient.
inline LstsqResult lstsq(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B)
{
    require(A.rows() == B.rows(), "lstsq: row count mismatch");
    LstsqResult out;
    if (A.cols() == 0) {
        out.solution = Matrix::Zero(0, B.cols());
        return out;
    }
    Vector scale(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        const double s = A.col(j).norm();
        scale(j) = s > 0.0 ? s : 1.0;
    }
    const Matrix As = A * scale.cwiseInverse().asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(As);
    out.rank = static_cast<int>(cod.rank());
    out.rank_deficient = out.rank < std::min(A.rows(), A.cols()) || A.rows() < A.cols();
    out.solution = scale.cwiseInverse().asDiagonal() * cod.solve(B);
    return out;
}

struct StlsResult {
    /// n x p coefficients, one row per target.
    Matrix xi;
    /// Active-set size per target after every thresholding pass.
    std::vector<std::vector<int>> support_history;
    int iterations = 0;
    bool converged = false;
    bool ill_conditioned = false;
    std::vector<std::string> warnings;

    std::vector<bool> support(int row) const
    {
        std::vector<bool> s(static_cast<std::size_t>(xi.cols()));
        for (Eigen::Index j = 0; j < xi.cols(); ++j) s[static_cast<std::size_t>(j)] = xi(row, j) != 0.0;
        return s;
    }
};

/// Sequentially thresholded least squares.
///
/// theta is the m x p regression matrix, targets is n x m, eps holds one threshold per target row.
/// Starts from the full least-squares fit; every pass zeroes coefficients with |xi| < eps and
/// re-regresses each row on its surviving columns. Stops when the support mask repeats or after max_iter passes.
inline StlsResult stls(const Eigen::Ref<const Matrix>& theta, const Eigen::Ref<const Matrix>& targets,
                       const Eigen::Ref<const Vector>& eps, int max_iter = 25)
{
    require(theta.rows() == targets.cols(), "stls: theta rows must equal target samples");
    require(eps.size() == targets.rows(), "stls: one threshold per target row required");
    require((eps.array() >= 0.0).all(), "stls: thresholds must be >= 0");
    require(max_iter >= 0, "stls: max_iter must be >= 0");
    if (theta.rows() == 0) throw EmptyDataError("stls: no samples");

    const Eigen::Index n = targets.rows();
    const Eigen::Index p = theta.cols();
    StlsResult res;

    auto initial = lstsq(theta, targets.transpose());
    res.xi = initial.solution.transpose();
    if (initial.rank_deficient) {
        res.ill_conditioned = true;
        res.warnings.push_back("stls: library matrix is rank deficient (rank " + std::to_string(initial.rank) +
                               " of " + std::to_string(p) + "); using minimum-norm solution");
    }

    using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
    Mask previous = Mask::Constant(n, p, true);
    for (int it = 0; it < max_iter; ++it) {
        Mask big(n, p);
        for (Eigen::Index k = 0; k < n; ++k) big.row(k) = res.xi.row(k).array().abs() >= eps(k);
        res.iterations = it + 1;

        std::vector<int> sizes;
        for (Eigen::Index k = 0; k < n; ++k) {
            std::vector<Eigen::Index> cols;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (big(k, j)) cols.push_back(j);
            }
            sizes.push_back(static_cast<int>(cols.size()));
            res.xi.row(k).setZero();
            if (cols.empty()) continue;
            Matrix sub(theta.rows(), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = theta.col(cols[c]);
            auto fit = lstsq(sub, targets.row(k).transpose());
            if (fit.rank_deficient && !res.ill_conditioned) {
                res.ill_conditioned = true;
                res.warnings.push_back("stls: surviving columns of row " + std::to_string(k) +
                                       " are rank deficient; using minimum-norm solution");
            }
            for (std::size_t c = 0; c < cols.size(); ++c) res.xi(k, cols[c]) = fit.solution(static_cast<Eigen::Index>(c), 0);
        }
        res.support_history.push_back(std::move(sizes));
        if ((big == previous).all()) {
            res.converged = true;
            break;
        }
        previous = big;
    }
    if (max_iter > 0 && !res.converged) res.warnings.push_back("stls: support did not settle within max_iter");
    return res;
}

} // namespace sindympc::sysid
