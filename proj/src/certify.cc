#include "lossless_sof/certify.h"

#include <cmath>
#include <stdexcept>

#include "lossless_sof/linalg.h"
#include "lossless_sof/synthesis.h"

namespace lossless_sof {
namespace {

void RequirePositiveEpsilon(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw std::invalid_argument("epsilon must be a positive finite number");
  }
}

}  // namespace

Eigen::MatrixXd AssembleBmi(const LtiPlant& plant, const Eigen::MatrixXd& K,
                            const Eigen::MatrixXd& P, double xi_o,
                            double epsilon) {
  const int n = plant.n();
  if (P.rows() != n || P.cols() != n) {
    throw std::invalid_argument("P must be n x n");
  }
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if (!((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) {
    throw std::invalid_argument("P must be symmetric");
  }
  const Eigen::MatrixXd Acl = plant.ClosedLoopMatrix(K);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd bmi = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  bmi.topLeftCorner(n, n) = Acl.transpose() * P + P * Acl + epsilon * P;
  bmi.topRightCorner(n, n) = P + xi_o * I;
  bmi.bottomLeftCorner(n, n) = P + xi_o * I;
  return Symmetrize(bmi);
}

bool IsNegativeSemidefinite(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Symmetrize(M),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double norm = values.cwiseAbs().maxCoeff();
  return values.maxCoeff() <= 1e-12 * (1.0 + norm);
}

Certificate VerifySof(const LtiPlant& plant, const Eigen::MatrixXd& K,
                      double epsilon) {
  RequirePositiveEpsilon(epsilon);
  const int n = plant.n();
  Certificate cert;
  cert.P = Eigen::MatrixXd::Identity(n, n);
  cert.xi_o = -1.0;
  cert.epsilon = epsilon;
  cert.lambda_max_reduced = ClosedLoopLambdaMax(plant, K);
  cert.lambda_max_bmi =
      LambdaMaxSym(AssembleBmi(plant, K, cert.P, cert.xi_o, epsilon)).value;
  cert.valid = cert.lambda_max_reduced <= -epsilon;
  return cert;
}

Certificate VerifyOpenLoop(const LtiPlant& plant, double epsilon) {
  return VerifySof(plant, Eigen::MatrixXd::Zero(plant.q(), plant.p()),
                   epsilon);
}

bool DecayCheck(const Trajectory& traj, double epsilon, double slack) {
  if (traj.times.empty()) {
    throw std::invalid_argument("DecayCheck: empty trajectory");
  }
  const double v0 = traj.states.front().squaredNorm();
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double bound =
        v0 * std::exp(-epsilon * (traj.times[i] - traj.times.front())) *
        (1.0 + slack);
    const double v = traj.states[i].squaredNorm();
    if (!(v <= bound)) return false;
  }
  return true;
}

}  // namespace lossless_sof
