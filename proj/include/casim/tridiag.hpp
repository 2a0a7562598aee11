#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace casim::detail {

/// Thomas sweep for a tridiagonal system. lower[0] and upper[n-1] are unused.
/// Overwrites rhs with the solution; work must have size n.
inline void solve_tridiagonal(std::span<const double> lower,
                              std::span<const double> diag,
                              std::span<const double> upper,
                              std::span<double> rhs,
                              std::span<double> work)
{
    const std::size_t n = diag.size();
    assert(lower.size() == n && upper.size() == n && rhs.size() == n && work.size() == n);
    double pivot = diag[0];
    assert(pivot != 0.0);
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        work[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * work[i];
        assert(pivot != 0.0);
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] -= work[i + 1] * rhs[i + 1];
}

/// Convenience owner for repeated solves on a fixed-size system.
class Tridiagonal {
public:
    explicit Tridiagonal(std::size_t n)
        : lower_(n, 0.0), diag_(n, 0.0), upper_(n, 0.0), rhs_(n, 0.0), work_(n, 0.0) {}

    std::size_t size() const { return diag_.size(); }
    double& lower(std::size_t i) { return lower_[i]; }
    double& diag(std::size_t i) { return diag_[i]; }
    double& upper(std::size_t i) { return upper_[i]; }
    double& rhs(std::size_t i) { return rhs_[i]; }

    void clear()
    {
        std::fill(lower_.begin(), lower_.end(), 0.0);
        std::fill(diag_.begin(), diag_.end(), 0.0);
        std::fill(upper_.begin(), upper_.end(), 0.0);
        std::fill(rhs_.begin(), rhs_.end(), 0.0);
    }

    /// Solves in place; the solution lands in rhs().
    std::span<const double> solve()
    {
        solve_tridiagonal(lower_, diag_, upper_, rhs_, work_);
        return rhs_;
    }

private:
    std::vector<double> lower_, diag_, upper_, rhs_, work_;
};

/// Block-tridiagonal Thomas sweep with 2x2 blocks (used by the coupled
/// steady-state boundary problem). All block vectors have length n; the
/// first lower and last upper block are ignored.
inline void solve_block2_tridiagonal(std::vector<Eigen::Matrix2d>& lower,
                                     std::vector<Eigen::Matrix2d>& diag,
                                     std::vector<Eigen::Matrix2d>& upper,
                                     std::vector<Eigen::Vector2d>& rhs)
{
    const std::size_t n = diag.size();
    assert(lower.size() == n && upper.size() == n && rhs.size() == n);
    Eigen::Matrix2d pivot = diag[0];
    rhs[0] = pivot.partialPivLu().solve(rhs[0]);
    std::vector<Eigen::Matrix2d> gamma(n);
    for (std::size_t i = 1; i < n; ++i) {
        gamma[i] = pivot.partialPivLu().solve(upper[i - 1]);
        pivot = diag[i] - lower[i] * gamma[i];
        rhs[i] = pivot.partialPivLu().solve(Eigen::Vector2d(rhs[i] - lower[i] * rhs[i - 1]));
    }
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] -= gamma[i + 1] * rhs[i + 1];
}

} // namespace casim::detail
