#pragma once

#include <optional>

#include <Eigen/Dense>

#include "lossless_sof/model.h"

namespace lossless_sof {

/// Null-space test values deciding whether some gain K makes
/// Aᵀ + A + BKC + (BKC)ᵀ negative definite.
struct FeasibilityReport {
  /// Orthonormal basis of null(Bᵀ), n×m_B.
  Eigen::MatrixXd U_B;
  /// Orthonormal basis of null(C), n×m_C.
  Eigen::MatrixXd U_C;
  /// λ_max(U_Bᵀ(Aᵀ+A)U_B), or -inf when m_B = 0.
  double lambda_B{0.0};
  /// λ_max(U_Cᵀ(Aᵀ+A)U_C), or -inf when m_C = 0.
  double lambda_C{0.0};
  bool feasible{false};

  int m_B() const { return static_cast<int>(U_B.cols()); }
  int m_C() const { return static_cast<int>(U_C.cols()); }
};

/// λ_max(Uᵀ Ψ U); -inf for an empty basis.
double RestrictedLambdaMax(const Eigen::MatrixXd& psi,
                           const Eigen::MatrixXd& basis);

/// Evaluates both null-space conditions on Ψ = Aᵀ + A. A condition holds
/// when its λ is below -strict_margin; an empty basis holds vacuously.
FeasibilityReport ProjectionConditions(const LtiPlant& plant,
                                       double strict_margin = 0.0);

}  // namespace lossless_sof
