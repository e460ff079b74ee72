#pragma once

#include <optional>

#include <Eigen/Dense>

namespace lossless_sof {

/// Orthonormal basis (as columns) of the right null space of M.
///
/// Singular values at or below `rank_tol` count as zero. The default
/// tolerance is max(rows, cols) · eps · σ_max. Returns an n×0 matrix when M
/// has full column rank and the n×n identity when M is zero. Each returned
/// column is sign-normalized so its first nonzero entry is positive.
Eigen::MatrixXd NullSpace(const Eigen::MatrixXd& M,
                          std::optional<double> rank_tol = std::nullopt);

struct SymmetricEigenMax {
  double value{0.0};
  /// Unit eigenvector; first nonzero component is positive.
  Eigen::VectorXd vector;
};

/// Largest eigenvalue of a symmetric matrix and an associated eigenvector.
/// Throws std::invalid_argument if M is not square or not symmetric to
/// 1e-12 (relative to max(1, max|M_ij|)).
SymmetricEigenMax LambdaMaxSym(const Eigen::MatrixXd& M);

/// (M + Mᵀ)/2.
Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& M);

}  // namespace lossless_sof
