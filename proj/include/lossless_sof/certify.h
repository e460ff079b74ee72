#pragma once

#include <Eigen/Dense>

#include "lossless_sof/model.h"
#include "lossless_sof/sim.h"

namespace lossless_sof {

/// Quadratic Lyapunov certificate V(x) = xᵀPx for the closed loop with the
/// lossless constraint folded in through multiplier xi_o. Certificates built
/// here always use P = I and xi_o = -1.
struct Certificate {
  Eigen::MatrixXd P;
  double xi_o{-1.0};
  double epsilon{0.0};
  /// λ_max((A+BKC) + (A+BKC)ᵀ).
  double lambda_max_reduced{0.0};
  /// λ_max of the assembled 2n×2n inequality.
  double lambda_max_bmi{0.0};
  bool valid{false};
};

/// Assembles
///
///   [ (A+BKC)ᵀP + P(A+BKC) + εP    P + xi_o·I ]
///   [ P + xi_o·I                   0          ]
///
/// whose negative semidefiniteness is the closed-loop inequality with the
/// lossless multiplier term and the decay-rate term moved to one side.
/// Throws std::invalid_argument if P is not n×n symmetric or K has the
/// wrong shape.
Eigen::MatrixXd AssembleBmi(const LtiPlant& plant, const Eigen::MatrixXd& K,
                            const Eigen::MatrixXd& P, double xi_o,
                            double epsilon);

/// True when λ_max(M) ≤ 1e-12·(1 + ‖M‖₂).
bool IsNegativeSemidefinite(const Eigen::MatrixXd& M);

/// Checks (A+BKC) + (A+BKC)ᵀ + εI ≤ 0 and evaluates the full inequality at
/// P = I, xi_o = -1. valid ⇔ lambda_max_reduced ≤ -epsilon.
Certificate VerifySof(const LtiPlant& plant, const Eigen::MatrixXd& K,
                      double epsilon);

/// VerifySof at K = 0.
Certificate VerifyOpenLoop(const LtiPlant& plant, double epsilon);

/// ‖x(t_i)‖² ≤ ‖x(0)‖²·exp(-ε t_i)·(1 + slack) at every sample.
/// Throws std::invalid_argument for an empty trajectory.
bool DecayCheck(const Trajectory& traj, double epsilon, double slack = 1e-3);

}  // namespace lossless_sof
