#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace lossless_sof {

/// Linear time-invariant plant  ẋ = Ax + Bu,  y = Cx.
///
/// Construct through LtiPlant::Make, which validates shapes and finiteness.
/// Instances are immutable once built.
class LtiPlant {
 public:
  /// Throws std::invalid_argument on inconsistent shapes, empty dimensions,
  /// or non-finite entries.
  static LtiPlant Make(Eigen::MatrixXd A, Eigen::MatrixXd B,
                       Eigen::MatrixXd C);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }

  /// State dimension.
  int n() const { return static_cast<int>(A_.rows()); }
  /// Input dimension.
  int q() const { return static_cast<int>(B_.cols()); }
  /// Output dimension.
  int p() const { return static_cast<int>(C_.rows()); }

  /// Closed-loop system matrix A + BKC. Throws if K is not q×p.
  Eigen::MatrixXd ClosedLoopMatrix(const Eigen::MatrixXd& K) const;

  /// Throws std::invalid_argument unless K is q×p with finite entries.
  void CheckGain(const Eigen::MatrixXd& K) const;

 private:
  LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C)
      : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {}

  Eigen::MatrixXd A_;
  Eigen::MatrixXd B_;
  Eigen::MatrixXd C_;
};

/// State-affine lossless nonlinearity z = N(x)x with N(x) = Σ_k x_k S_k and
/// every S_k skew-symmetric, so that xᵀz = 0 for all x.
class LosslessNonlinearity {
 public:
  /// Max-norm bound on S_k + S_kᵀ accepted as skew-symmetric.
  static constexpr double kSkewTolerance = 1e-12;

  /// Validates that there are n matrices, each n×n, finite, and skew up to
  /// kSkewTolerance. On failure throws std::invalid_argument naming the
  /// offending index and the size of its symmetric part.
  static LosslessNonlinearity Make(std::vector<Eigen::MatrixXd> S);

  /// Bypasses the skew check. Only for tests that need to inject a corrupted
  /// nonlinearity into check_lossless-style diagnostics.
  static LosslessNonlinearity MakeUnchecked(std::vector<Eigen::MatrixXd> S);

  /// Zero nonlinearity of dimension n.
  static LosslessNonlinearity Zero(int n);

  int n() const { return static_cast<int>(S_.size()); }
  const std::vector<Eigen::MatrixXd>& terms() const { return S_; }

  /// N(x) = Σ_k x_k S_k.
  Eigen::MatrixXd N(const Eigen::VectorXd& x) const;

  /// z = N(x)x.
  Eigen::VectorXd Evaluate(const Eigen::VectorXd& x) const;

 private:
  explicit LosslessNonlinearity(std::vector<Eigen::MatrixXd> S)
      : S_(std::move(S)) {}

  std::vector<Eigen::MatrixXd> S_;
};

/// Plant plus optional lossless nonlinearity. An absent nonlinearity means
/// z ≡ 0.
class SystemDef {
 public:
  /// Throws std::invalid_argument if the nonlinearity dimension differs from
  /// the plant state dimension.
  SystemDef(LtiPlant plant, std::optional<LosslessNonlinearity> nonlinearity);

  const LtiPlant& plant() const { return plant_; }
  const std::optional<LosslessNonlinearity>& nonlinearity() const {
    return nonlinearity_;
  }
  int n() const { return plant_.n(); }

  /// z(x), zero when no nonlinearity is attached.
  Eigen::VectorXd Z(const Eigen::VectorXd& x) const;

 private:
  LtiPlant plant_;
  std::optional<LosslessNonlinearity> nonlinearity_;
};

struct LosslessReport {
  double max_violation{0.0};
  bool pass{false};
};

/// Samples `num_samples` states uniformly from the unit ball using `seed` and
/// reports max |xᵀ z(x)|. Throws if num_samples < 1.
LosslessReport CheckLossless(const LosslessNonlinearity& nl, int num_samples,
                             std::uint64_t seed, double tol);

/// (A + BKC)x + z(x); K absent means open loop (u = 0).
Eigen::VectorXd ClosedLoopField(const SystemDef& sys,
                                const std::optional<Eigen::MatrixXd>& K,
                                const Eigen::VectorXd& x);

/// Two-state benchmark: A = [-0.1 1; 0 -0.1], B = [1; 1], C = [1 2],
/// N(x) = [0 -x1; x1 0]. Its open loop has trajectories that escape; the
/// gain K = -3.6231 stabilizes it.
SystemDef BenchmarkSystem();

/// Reference stabilizing gain for BenchmarkSystem().
inline constexpr double kBenchmarkGain = -3.6231;

}  // namespace lossless_sof
