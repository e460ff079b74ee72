#include "lossless_sof/linalg.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lossless_sof {
namespace {

constexpr double kSignTolerance = 1e-12;

void NormalizeSign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignTolerance) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace

Eigen::MatrixXd NullSpace(const Eigen::MatrixXd& M,
                          std::optional<double> rank_tol) {
  const Eigen::Index cols = M.cols();
  if (M.rows() == 0 || cols == 0) {
    return Eigen::MatrixXd::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double tol =
      rank_tol.value_or(static_cast<double>(std::max(M.rows(), cols)) *
                        std::numeric_limits<double>::epsilon() * sigma_max);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > tol) ++rank;

  Eigen::MatrixXd basis = svd.matrixV().rightCols(cols - rank);
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    NormalizeSign(basis.col(j));
  }
  return basis;
}

SymmetricEigenMax LambdaMaxSym(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw std::invalid_argument("LambdaMaxSym needs a non-empty square matrix");
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * scale)) {
    throw std::invalid_argument("LambdaMaxSym: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolve failed");
  }
  const Eigen::Index top = M.rows() - 1;  // eigenvalues are ascending
  SymmetricEigenMax result{eig.eigenvalues()(top), eig.eigenvectors().col(top)};
  result.vector.normalize();
  NormalizeSign(result.vector);
  return result;
}

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

}  // namespace lossless_sof
