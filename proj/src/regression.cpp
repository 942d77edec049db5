#include "endow/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "endow/error.hpp"
#include "endow/parallel.hpp"

namespace endow {

namespace {
constexpr std::size_t kMaxFeatures = 16;
}

LeastSquaresProjector::LeastSquaresProjector(std::vector<std::span<const double>> features,
                                             const BasisOptions& options)
    : features_(std::move(features)), options_(options) {
    if (features_.empty()) throw Error(ErrorCode::RegressionSingular, "basis", "no features");
    if (features_.size() > kMaxFeatures) throw Error(ErrorCode::RegressionSingular, "basis", "at most 16 raw features");
    options_.degree = std::clamp(options_.degree, 1, 2);
    n_paths_ = features_.front().size();
    const std::size_t M = n_paths_;
    if (M == 0) throw Error(ErrorCode::RegressionSingular, "basis", "no paths");
    const std::size_t F = features_.size();
    const std::size_t C = chunk_count(M);
    const int threads = options_.threads;

    // Two-pass mean and variance.
    std::vector<double> part(C * F, 0.0);
    for_each_chunk(M, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::size_t f = 0; f < F; ++f) {
            double s = 0.0;
            for (std::size_t p = b; p < e; ++p) s += features_[f][p];
            part[c * F + f] = s;
        }
    });
    std::vector<double> mean(F, 0.0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f = 0; f < F; ++f) mean[f] += part[c * F + f];
    for (auto& m : mean) m /= static_cast<double>(M);
    for_each_chunk(M, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::size_t f = 0; f < F; ++f) {
            double s = 0.0;
            for (std::size_t p = b; p < e; ++p) {
                const double d = features_[f][p] - mean[f];
                s += d * d;
            }
            part[c * F + f] = s;
        }
    });
    std::vector<double> var(F, 0.0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f = 0; f < F; ++f) var[f] += part[c * F + f];
    for (std::size_t f = 0; f < F; ++f) {
        if (!std::isfinite(mean[f]) || !std::isfinite(var[f]))
            throw Error(ErrorCode::RegressionSingular, "basis", "non-finite feature");
        const double sd = std::sqrt(var[f] / static_cast<double>(M));
        if (sd > 1e-10 * std::max(1.0, std::abs(mean[f]))) {
            active_.push_back(f);
            mean_.push_back(mean[f]);
            inv_sd_.push_back(1.0 / sd);
        }
    }
    const std::size_t d = active_.size();
    n_basis_ = 1 + d + (options_.degree >= 2 ? d * (d + 1) / 2 : 0);
    const auto P = static_cast<Eigen::Index>(n_basis_);

    std::vector<Eigen::MatrixXd> gram_part(C);
    for_each_chunk(M, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(e - b), P);
        std::vector<double> row(n_basis_);
        for (std::size_t p = b; p < e; ++p) {
            basis_row(p, row.data());
            for (Eigen::Index k = 0; k < P; ++k) X(static_cast<Eigen::Index>(p - b), k) = row[static_cast<std::size_t>(k)];
        }
        gram_part[c] = X.transpose() * X;
    });
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(P, P);
    for (const auto& g : gram_part) G += g;
    G /= static_cast<double>(M);
    for (Eigen::Index k = 1; k < P; ++k) G(k, k) += options_.ridge;

    ldlt_.compute(G);
    if (ldlt_.info() != Eigen::Success || !(ldlt_.vectorD().array() > 0.0).all())
        throw Error(ErrorCode::RegressionSingular, "basis", "Gram matrix is not positive definite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    condition_ = lo > 0.0 ? eig.eigenvalues().maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

void LeastSquaresProjector::basis_row(std::size_t p, double* out) const {
    const std::size_t d = active_.size();
    double x[kMaxFeatures];
    for (std::size_t a = 0; a < d; ++a) x[a] = (features_[active_[a]][p] - mean_[a]) * inv_sd_[a];
    std::size_t k = 0;
    out[k++] = 1.0;
    for (std::size_t a = 0; a < d; ++a) out[k++] = x[a];
    if (options_.degree >= 2)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) out[k++] = x[a] * x[b];
}

std::vector<double> LeastSquaresProjector::project(const std::vector<std::span<const double>>& targets,
                                                   const std::vector<std::span<double>>& fitted) const {
    const std::size_t M = n_paths_;
    const std::size_t R = targets.size();
    const std::size_t C = chunk_count(M);
    const auto P = static_cast<Eigen::Index>(n_basis_);
    const auto RR = static_cast<Eigen::Index>(R);

    std::vector<Eigen::MatrixXd> cross_part(C);
    for_each_chunk(M, options_.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(P, RR);
        std::vector<double> row(n_basis_);
        for (std::size_t p = b; p < e; ++p) {
            basis_row(p, row.data());
            for (std::size_t t = 0; t < R; ++t) {
                const double yv = targets[t][p];
                for (Eigen::Index k = 0; k < P; ++k) acc(k, static_cast<Eigen::Index>(t)) += row[static_cast<std::size_t>(k)] * yv;
            }
        }
        cross_part[c] = std::move(acc);
    });
    Eigen::MatrixXd XY = Eigen::MatrixXd::Zero(P, RR);
    for (const auto& x : cross_part) XY += x;
    XY /= static_cast<double>(M);
    const Eigen::MatrixXd beta = ldlt_.solve(XY);
    if (!beta.allFinite()) throw Error(ErrorCode::RegressionSingular, "basis", "non-finite coefficients");

    std::vector<double> part(C * R * 3, 0.0);  // sum y, sum y^2, sum residual^2
    for_each_chunk(M, options_.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::vector<double> row(n_basis_);
        for (std::size_t p = b; p < e; ++p) {
            basis_row(p, row.data());
            for (std::size_t t = 0; t < R; ++t) {
                double v = 0.0;
                for (Eigen::Index k = 0; k < P; ++k) v += row[static_cast<std::size_t>(k)] * beta(k, static_cast<Eigen::Index>(t));
                fitted[t][p] = v;
                const double yv = targets[t][p];
                double* s = &part[(c * R + t) * 3];
                s[0] += yv;
                s[1] += yv * yv;
                s[2] += (yv - v) * (yv - v);
            }
        }
    });
    std::vector<double> r2(R, 1.0);
    for (std::size_t t = 0; t < R; ++t) {
        double s = 0.0, s2 = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            s += part[(c * R + t) * 3 + 0];
            s2 += part[(c * R + t) * 3 + 1];
            sr += part[(c * R + t) * 3 + 2];
        }
        const double mean = s / static_cast<double>(M);
        const double tot = s2 - static_cast<double>(M) * mean * mean;
        if (tot > 1e-12 * s2) r2[t] = 1.0 - sr / tot;
    }
    return r2;
}

}  // namespace endow
