#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lossless_sof/model.h"

namespace lossless_sof {

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> norms;
  /// Set when ‖x‖ reached the escape radius or became non-finite.
  bool diverged{false};
  /// Time of the first sample that triggered divergence.
  std::optional<double> escape_time;

  std::size_t size() const { return times.size(); }
};

struct IntegrationOptions {
  double dt{1e-3};
  double t_final{20.0};
  double escape_radius{50.0};
};

/// Initial-condition sets for phase portraits. Both patterns lie in the
/// (x1, x2) plane and need n ≥ 2.
struct GridSpec {
  enum class Pattern { kCircle, kBox };

  Pattern pattern{Pattern::kCircle};
  /// Circle radius, or half-width of the square [-extent, extent]².
  double extent{1.0};
  /// Points on the circle, or points per axis for the box.
  int count{16};
  /// Optional jitter: circle angles move by up to half a spacing, box points
  /// by up to half a cell.
  std::optional<std::uint64_t> jitter_seed;

  static GridSpec Circle(double radius, int count) {
    return {Pattern::kCircle, radius, count, std::nullopt};
  }
  static GridSpec Box(double bound, int per_axis) {
    return {Pattern::kBox, bound, per_axis, std::nullopt};
  }

  /// Throws std::invalid_argument on count < 1 or non-positive extent.
  void Validate() const;

  /// Parses "circle:R:N" or "box:B:NxN".
  static GridSpec Parse(const std::string& text);
  std::string ToString() const;
};

/// Initial conditions in enumeration order: counter-clockwise from +x1 for
/// the circle, row-major with x1 varying fastest for the box.
std::vector<Eigen::VectorXd> GridPoints(const GridSpec& grid, int n);

/// Fixed-step classic RK4 on the (closed-loop) vector field. The step is
/// t_final / ceil(t_final / dt), so the last sample lands on t_final. Every
/// step is recorded; integration halts at the first sample with
/// ‖x‖ ≥ escape_radius or a non-finite state.
///
/// Throws std::invalid_argument unless dt > 0, t_final ≥ dt and
/// escape_radius > ‖x0‖.
Trajectory Integrate(const SystemDef& sys,
                     const std::optional<Eigen::MatrixXd>& K,
                     const Eigen::VectorXd& x0,
                     const IntegrationOptions& opts = {});

/// One trajectory per grid point, in GridPoints order. Divergent
/// trajectories are results, not errors. `threads` only changes scheduling.
std::vector<Trajectory> PhasePortrait(const SystemDef& sys,
                                      const std::optional<Eigen::MatrixXd>& K,
                                      const GridSpec& grid,
                                      const IntegrationOptions& opts = {},
                                      int threads = 1);

/// Max over interior samples of the gap between d‖x‖²/dt, estimated with a
/// five-point central stencil on the uniform sample grid, and
/// xᵀ((A+BKC) + (A+BKC)ᵀ)x. The lossless term contributes nothing to the
/// exact rate, so this measures integration error plus any loss of
/// losslessness. Throws for fewer than 5 samples.
double EnergyRateResidual(const SystemDef& sys,
                          const std::optional<Eigen::MatrixXd>& K,
                          const Trajectory& traj);

}  // namespace lossless_sof
