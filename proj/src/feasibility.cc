#include "lossless_sof/feasibility.h"

#include <limits>

#include "lossless_sof/linalg.h"

namespace lossless_sof {

double RestrictedLambdaMax(const Eigen::MatrixXd& psi,
                           const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0) {
    return -std::numeric_limits<double>::infinity();
  }
  return LambdaMaxSym(Symmetrize(basis.transpose() * psi * basis)).value;
}

FeasibilityReport ProjectionConditions(const LtiPlant& plant,
                                       double strict_margin) {
  const Eigen::MatrixXd psi = plant.A().transpose() + plant.A();
  FeasibilityReport report;
  report.U_B = NullSpace(plant.B().transpose());
  report.U_C = NullSpace(plant.C());
  report.lambda_B = RestrictedLambdaMax(psi, report.U_B);
  report.lambda_C = RestrictedLambdaMax(psi, report.U_C);
  report.feasible =
      report.lambda_B < -strict_margin && report.lambda_C < -strict_margin;
  return report;
}

}  // namespace lossless_sof
