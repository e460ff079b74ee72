#include "lossless_sof/sim.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lossless_sof/synthesis.h"

namespace lossless_sof {
namespace {

void Record(Trajectory& traj, double t, const Eigen::VectorXd& x) {
  traj.times.push_back(t);
  traj.states.push_back(x);
  traj.norms.push_back(x.norm());
}

int ParseCount(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("bad " + what + " '" + text + "'");
  }
  return value;
}

double ParseExtent(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("bad grid extent '" + text + "'");
  }
  return value;
}

}  // namespace

void GridSpec::Validate() const {
  if (count < 1) throw std::invalid_argument("grid count must be >= 1");
  if (!std::isfinite(extent) || extent <= 0.0) {
    throw std::invalid_argument("grid radius/bound must be positive");
  }
}

GridSpec GridSpec::Parse(const std::string& text) {
  const auto first = text.find(':');
  const auto second =
      first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos) {
    throw std::invalid_argument("grid must be circle:R:N or box:B:NxN, got '" +
                                text + "'");
  }
  const std::string kind = text.substr(0, first);
  const std::string extent = text.substr(first + 1, second - first - 1);
  const std::string count = text.substr(second + 1);

  GridSpec grid;
  grid.extent = ParseExtent(extent);
  if (kind == "circle") {
    grid.pattern = Pattern::kCircle;
    grid.count = ParseCount(count, "circle count");
  } else if (kind == "box") {
    grid.pattern = Pattern::kBox;
    const auto x = count.find('x');
    if (x == std::string::npos) {
      throw std::invalid_argument("box grid count must be NxN, got '" + count +
                                  "'");
    }
    const int rows = ParseCount(count.substr(0, x), "box count");
    const int cols = ParseCount(count.substr(x + 1), "box count");
    if (rows != cols) {
      throw std::invalid_argument("box grid must be square, got '" + count +
                                  "'");
    }
    grid.count = rows;
  } else {
    throw std::invalid_argument("unknown grid pattern '" + kind + "'");
  }
  grid.Validate();
  return grid;
}

std::string GridSpec::ToString() const {
  std::ostringstream out;
  out.precision(17);
  if (pattern == Pattern::kCircle) {
    out << "circle:" << extent << ":" << count;
  } else {
    out << "box:" << extent << ":" << count << "x" << count;
  }
  return out.str();
}

std::vector<Eigen::VectorXd> GridPoints(const GridSpec& grid, int n) {
  grid.Validate();
  if (n < 2) {
    throw std::invalid_argument("phase-portrait grids need n >= 2");
  }
  std::mt19937_64 rng(grid.jitter_seed.value_or(0));
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  auto perturb = [&](double spacing) {
    return grid.jitter_seed ? spacing * jitter(rng) : 0.0;
  };

  std::vector<Eigen::VectorXd> points;
  if (grid.pattern == GridSpec::Pattern::kCircle) {
    const double spacing = 2.0 * std::numbers::pi / grid.count;
    for (int k = 0; k < grid.count; ++k) {
      const double angle = k * spacing + perturb(spacing);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      x(0) = grid.extent * std::cos(angle);
      x(1) = grid.extent * std::sin(angle);
      points.push_back(std::move(x));
    }
    return points;
  }

  const int m = grid.count;
  const double cell = m > 1 ? 2.0 * grid.extent / (m - 1) : 0.0;
  auto coord = [&](int i) { return m > 1 ? -grid.extent + i * cell : 0.0; };
  for (int row = 0; row < m; ++row) {
    for (int col = 0; col < m; ++col) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      x(0) = coord(col) + perturb(cell);
      x(1) = coord(row) + perturb(cell);
      points.push_back(std::move(x));
    }
  }
  return points;
}

Trajectory Integrate(const SystemDef& sys,
                     const std::optional<Eigen::MatrixXd>& K,
                     const Eigen::VectorXd& x0,
                     const IntegrationOptions& opts) {
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!(opts.t_final >= opts.dt) || !std::isfinite(opts.t_final)) {
    throw std::invalid_argument("t_final must be >= dt");
  }
  if (x0.size() != sys.n() || !x0.allFinite()) {
    throw std::invalid_argument("x0 must be a finite vector of length n");
  }
  if (!(opts.escape_radius > x0.norm())) {
    throw std::invalid_argument("escape_radius must exceed |x0|");
  }
  if (K) sys.plant().CheckGain(*K);

  // Fold the gain into one matrix so each stage is a single product.
  const Eigen::MatrixXd Acl =
      K ? sys.plant().ClosedLoopMatrix(*K) : sys.plant().A();
  auto field = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Acl * x + sys.Z(x);
  };

  const auto steps = static_cast<long>(
      std::max(1.0, std::ceil(opts.t_final / opts.dt - 1e-9)));
  const double h = opts.t_final / static_cast<double>(steps);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.norms.reserve(steps + 1);
  Record(traj, 0.0, x0);

  Eigen::VectorXd x = x0;
  for (long i = 1; i <= steps; ++i) {
    const Eigen::VectorXd k1 = field(x);
    const Eigen::VectorXd k2 = field(x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = static_cast<double>(i) * h;
    Record(traj, t, x);
    if (!x.allFinite() || !(traj.norms.back() < opts.escape_radius)) {
      traj.diverged = true;
      traj.escape_time = t;
      break;
    }
  }
  return traj;
}

std::vector<Trajectory> PhasePortrait(const SystemDef& sys,
                                      const std::optional<Eigen::MatrixXd>& K,
                                      const GridSpec& grid,
                                      const IntegrationOptions& opts,
                                      int threads) {
  const std::vector<Eigen::VectorXd> points = GridPoints(grid, sys.n());
  std::vector<Trajectory> portrait(points.size());
  const int workers =
      std::clamp(threads, 1, static_cast<int>(points.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      portrait[i] = Integrate(sys, K, points[i], opts);
    }
    return portrait;
  }
  std::vector<std::future<void>> tasks;
  for (int w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < points.size(); i += workers) {
        portrait[i] = Integrate(sys, K, points[i], opts);
      }
    }));
  }
  for (auto& t : tasks) t.get();
  return portrait;
}

double EnergyRateResidual(const SystemDef& sys,
                          const std::optional<Eigen::MatrixXd>& K,
                          const Trajectory& traj) {
  if (traj.size() < 5) {
    throw std::invalid_argument("EnergyRateResidual needs >= 5 samples");
  }
  const LtiPlant& plant = sys.plant();
  const Eigen::MatrixXd M = ClosedLoopSym(
      plant, K.value_or(Eigen::MatrixXd::Zero(plant.q(), plant.p())));
  auto energy = [&](std::size_t i) { return traj.states[i].squaredNorm(); };
  double residual = 0.0;
  for (std::size_t i = 2; i + 2 < traj.size(); ++i) {
    const double h = (traj.times[i + 2] - traj.times[i - 2]) / 4.0;
    const double rate = (energy(i - 2) - 8.0 * energy(i - 1) +
                         8.0 * energy(i + 1) - energy(i + 2)) /
                        (12.0 * h);
    const double model = traj.states[i].dot(M * traj.states[i]);
    residual = std::max(residual, std::abs(rate - model));
  }
  return residual;
}

}  // namespace lossless_sof
