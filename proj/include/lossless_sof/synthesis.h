#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lossless_sof/feasibility.h"
#include "lossless_sof/model.h"

namespace lossless_sof {

/// Symmetrized closed loop M(K) = Aᵀ + A + BKC + CᵀKᵀBᵀ. The result is
/// exactly symmetric.
Eigen::MatrixXd ClosedLoopSym(const LtiPlant& plant, const Eigen::MatrixXd& K);

/// f(K) = λ_max(M(K)). Convex in K.
double ClosedLoopLambdaMax(const LtiPlant& plant, const Eigen::MatrixXd& K);

/// 2·(Bᵀu)(Cu)ᵀ with u the unit top eigenvector of M(K). A subgradient of f
/// at K, and its gradient when the top eigenvalue is simple.
Eigen::MatrixXd Subgradient(const LtiPlant& plant, const Eigen::MatrixXd& K);

struct SofGain {
  Eigen::MatrixXd K;
  /// λ_max(M(K)).
  double achieved_lambda{0.0};
  /// Decay-rate target the gain was checked against.
  double epsilon{0.0};

  bool certified() const { return achieved_lambda <= -epsilon; }
};

struct SynthesisOptions {
  /// Target decay rate; Certified means f(K) ≤ -epsilon.
  double epsilon{1e-6};
  /// Subgradient iterations allowed per start.
  int max_iters{5000};
  /// Random starts tried after the K = 0 start.
  int num_restarts{8};
  std::uint64_t seed{0};
  /// Polyak level offset δ, so steps aim at f = -epsilon - δ. Defaults to
  /// 0.1·epsilon + 0.01.
  std::optional<double> target_gap;
  /// Relative stagnation tolerance used by OptimalDecay.
  double tol{1e-9};
  /// Worker threads for the random restarts. Results do not depend on it.
  int threads{1};

  /// Throws std::invalid_argument for epsilon ≤ 0 (or non-finite), counts
  /// below their minimum, or a non-positive target gap or tolerance.
  void Validate() const;
  double TargetGap() const { return target_gap.value_or(0.1 * epsilon + 0.01); }
};

enum class SynthesisStatus { kCertified, kInfeasible, kMaxIterations };

std::string_view ToString(SynthesisStatus status);

struct SynthesisResult {
  SynthesisStatus status{SynthesisStatus::kInfeasible};
  /// Best gain found; absent only when the plant is infeasible.
  std::optional<SofGain> gain;
  /// Subgradient updates performed across all starts that were consumed.
  int iterations_used{0};
  FeasibilityReport feasibility;
  /// Best-so-far f after each evaluation, concatenated over starts.
  std::vector<double> best_trace;
};

/// Searches for K with λ_max(M(K)) ≤ -epsilon.
///
/// Checks the null-space conditions first and returns kInfeasible without
/// iterating when they fail. Otherwise runs Polyak-step subgradient descent
/// from K = 0, then from `num_restarts` seeded Gaussian starts scaled by
/// 1/(‖B‖‖C‖), stopping at the first start that certifies. When no start
/// certifies the lowest-f gain is returned (ties go to the earlier start)
/// with status kMaxIterations.
SynthesisResult Synthesize(const LtiPlant& plant,
                           const SynthesisOptions& opts = {});

struct DecayBound {
  Eigen::MatrixXd K;
  /// -f(K) for the best K found; +inf when f is unbounded below.
  double epsilon_star{0.0};
  bool unbounded{false};
  int iterations_used{0};
};

/// f below this value is treated as unbounded.
inline constexpr double kUnboundedObjective = -1e6;

/// Minimizes f to stagnation and returns the largest decay rate certified
/// with P = I. Uses a target-level Polyak rule whose level gap is halved
/// whenever progress stalls; the result is a lower bound on the true optimum.
/// Throws std::invalid_argument when the null-space conditions fail.
DecayBound OptimalDecay(const LtiPlant& plant,
                        const SynthesisOptions& opts = {});

}  // namespace lossless_sof
