#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace endow {

struct BasisOptions {
    int degree = 2;       ///< 1 or 2
    double ridge = 1e-8;  ///< added to the non-intercept diagonal of the scaled Gram matrix
    int threads = 1;
};

/// Least-squares projection on a polynomial basis of the standardized raw
/// features (all monomials up to `degree`). Near-constant features are dropped.
/// The Gram matrix is factorized once; any number of targets can then be
/// projected. Reductions are chunked, so results do not depend on threads.
class LeastSquaresProjector {
public:
    /// Throws REGRESSION_SINGULAR when the Gram matrix cannot be factorized.
    LeastSquaresProjector(std::vector<std::span<const double>> features, const BasisOptions& options);

    /// Writes fitted values of each target into `fitted`; returns R^2 per target.
    std::vector<double> project(const std::vector<std::span<const double>>& targets,
                                const std::vector<std::span<double>>& fitted) const;

    int n_basis() const { return static_cast<int>(n_basis_); }
    double condition() const { return condition_; }

private:
    void basis_row(std::size_t p, double* out) const;

    std::vector<std::span<const double>> features_;
    BasisOptions options_;
    std::size_t n_paths_ = 0;
    std::vector<std::size_t> active_;
    std::vector<double> mean_, inv_sd_;
    std::size_t n_basis_ = 1;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    double condition_ = 1.0;
};

}  // namespace endow
