#include "lossless_sof/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lossless_sof {
namespace {

std::string Shape(const Eigen::MatrixXd& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void RequireFinite(const Eigen::MatrixXd& M, const char* name) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(name) +
                                " contains a non-finite entry");
  }
}

}  // namespace

LtiPlant LtiPlant::Make(Eigen::MatrixXd A, Eigen::MatrixXd B,
                        Eigen::MatrixXd C) {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw std::invalid_argument("A must be square and non-empty, got " +
                                Shape(A));
  }
  if (B.rows() != A.rows() || B.cols() < 1) {
    throw std::invalid_argument("B must be " + std::to_string(A.rows()) +
                                "xq with q >= 1, got " + Shape(B));
  }
  if (C.cols() != A.rows() || C.rows() < 1) {
    throw std::invalid_argument("C must be px" + std::to_string(A.rows()) +
                                " with p >= 1, got " + Shape(C));
  }
  RequireFinite(A, "A");
  RequireFinite(B, "B");
  RequireFinite(C, "C");
  return LtiPlant(std::move(A), std::move(B), std::move(C));
}

void LtiPlant::CheckGain(const Eigen::MatrixXd& K) const {
  if (K.rows() != q() || K.cols() != p()) {
    throw std::invalid_argument("gain K must be " + std::to_string(q()) + "x" +
                                std::to_string(p()) + ", got " + Shape(K));
  }
  RequireFinite(K, "K");
}

Eigen::MatrixXd LtiPlant::ClosedLoopMatrix(const Eigen::MatrixXd& K) const {
  CheckGain(K);
  return A_ + B_ * K * C_;
}

LosslessNonlinearity LosslessNonlinearity::Make(
    std::vector<Eigen::MatrixXd> S) {
  const auto n = static_cast<Eigen::Index>(S.size());
  if (n < 1) {
    throw std::invalid_argument("nonlinearity needs at least one term");
  }
  for (std::size_t k = 0; k < S.size(); ++k) {
    if (S[k].rows() != n || S[k].cols() != n) {
      throw std::invalid_argument("S[" + std::to_string(k) + "] must be " +
                                  std::to_string(n) + "x" + std::to_string(n) +
                                  ", got " + Shape(S[k]));
    }
    if (!S[k].allFinite()) {
      throw std::invalid_argument("S[" + std::to_string(k) +
                                  "] contains a non-finite entry");
    }
    const double violation =
        (S[k] + S[k].transpose()).cwiseAbs().maxCoeff();
    if (violation > kSkewTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "S[" << k << "] is not skew-symmetric: max|S + S^T| = "
          << violation;
      throw std::invalid_argument(msg.str());
    }
  }
  return LosslessNonlinearity(std::move(S));
}

LosslessNonlinearity LosslessNonlinearity::MakeUnchecked(
    std::vector<Eigen::MatrixXd> S) {
  return LosslessNonlinearity(std::move(S));
}

LosslessNonlinearity LosslessNonlinearity::Zero(int n) {
  return LosslessNonlinearity(
      std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
}

Eigen::MatrixXd LosslessNonlinearity::N(const Eigen::VectorXd& x) const {
  if (x.size() != n()) {
    throw std::invalid_argument("state has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(n()));
  }
  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(n(), n());
  for (int k = 0; k < n(); ++k) {
    result += x(k) * S_[k];
  }
  return result;
}

Eigen::VectorXd LosslessNonlinearity::Evaluate(
    const Eigen::VectorXd& x) const {
  return N(x) * x;
}

SystemDef::SystemDef(LtiPlant plant,
                     std::optional<LosslessNonlinearity> nonlinearity)
    : plant_(std::move(plant)), nonlinearity_(std::move(nonlinearity)) {
  if (nonlinearity_ && nonlinearity_->n() != plant_.n()) {
    throw std::invalid_argument(
        "nonlinearity dimension " + std::to_string(nonlinearity_->n()) +
        " does not match plant state dimension " + std::to_string(plant_.n()));
  }
}

Eigen::VectorXd SystemDef::Z(const Eigen::VectorXd& x) const {
  if (!nonlinearity_) {
    if (x.size() != n()) {
      throw std::invalid_argument("state has wrong length");
    }
    return Eigen::VectorXd::Zero(n());
  }
  return nonlinearity_->Evaluate(x);
}

LosslessReport CheckLossless(const LosslessNonlinearity& nl, int num_samples,
                             std::uint64_t seed, double tol) {
  if (num_samples < 1) {
    throw std::invalid_argument("num_samples must be >= 1");
  }
  const int n = nl.n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  LosslessReport report;
  Eigen::VectorXd x(n);
  for (int s = 0; s < num_samples; ++s) {
    // Uniform in the ball: Gaussian direction, radius U^(1/n).
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);
    const double norm = x.norm();
    if (norm == 0.0) continue;
    x *= std::pow(unif(rng), 1.0 / n) / norm;
    const double violation = std::abs(x.dot(nl.Evaluate(x)));
    report.max_violation = std::max(report.max_violation, violation);
  }
  report.pass = report.max_violation <= tol;
  return report;
}

Eigen::VectorXd ClosedLoopField(const SystemDef& sys,
                                const std::optional<Eigen::MatrixXd>& K,
                                const Eigen::VectorXd& x) {
  const LtiPlant& plant = sys.plant();
  if (x.size() != plant.n()) {
    throw std::invalid_argument("state has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(plant.n()));
  }
  Eigen::VectorXd dx = plant.A() * x + sys.Z(x);
  if (K) {
    plant.CheckGain(*K);
    dx += plant.B() * (*K * (plant.C() * x));
  }
  return dx;
}

SystemDef BenchmarkSystem() {
  Eigen::MatrixXd A(2, 2);
  A << -0.1, 1.0, 0.0, -0.1;
  Eigen::MatrixXd B(2, 1);
  B << 1.0, 1.0;
  Eigen::MatrixXd C(1, 2);
  C << 1.0, 2.0;
  Eigen::MatrixXd S1(2, 2);
  S1 << 0.0, -1.0, 1.0, 0.0;
  return SystemDef(
      LtiPlant::Make(A, B, C),
      LosslessNonlinearity::Make({S1, Eigen::MatrixXd::Zero(2, 2)}));
}

}  // namespace lossless_sof
