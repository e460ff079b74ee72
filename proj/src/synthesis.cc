#include "lossless_sof/synthesis.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <iterator>
#include <limits>
#include <random>
#include <stdexcept>

#include "lossless_sof/linalg.h"

namespace lossless_sof {
namespace {

constexpr double kTieTolerance = 1e-12;

struct StartOutcome {
  Eigen::MatrixXd K_best;
  double f_best{std::numeric_limits<double>::infinity()};
  int iterations{0};
  bool certified{false};
  std::vector<double> trace;
};

double SpectralNorm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

// Restart r ≥ 1 draws from its own stream so restarts are independent of
// evaluation order.
Eigen::MatrixXd RandomStart(const LtiPlant& plant, std::uint64_t seed, int r) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double bc = SpectralNorm(plant.B()) * SpectralNorm(plant.C());
  const double scale = bc > 0.0 ? 1.0 / bc : 1.0;
  Eigen::MatrixXd K(plant.q(), plant.p());
  for (Eigen::Index j = 0; j < K.cols(); ++j) {
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
      K(i, j) = scale * gauss(rng);
    }
  }
  return K;
}

Eigen::MatrixXd StartPoint(const LtiPlant& plant, std::uint64_t seed, int r) {
  if (r == 0) return Eigen::MatrixXd::Zero(plant.q(), plant.p());
  return RandomStart(plant, seed, r);
}

// Polyak steps toward the fixed level -epsilon - δ; stops once f ≤ -epsilon.
StartOutcome DescendToTarget(const LtiPlant& plant, Eigen::MatrixXd K,
                             const SynthesisOptions& opts) {
  const double target = -opts.epsilon - opts.TargetGap();
  StartOutcome out;
  double f = ClosedLoopLambdaMax(plant, K);
  for (;;) {
    if (f < out.f_best) {
      out.f_best = f;
      out.K_best = K;
    }
    out.trace.push_back(out.f_best);
    if (f <= -opts.epsilon) {
      out.certified = true;
      break;
    }
    if (out.iterations >= opts.max_iters) break;
    const Eigen::MatrixXd g = Subgradient(plant, K);
    const double gg = g.squaredNorm();
    // Zero subgradient: K is a global minimizer and still above target.
    if (gg == 0.0) break;
    K -= ((f - target) / gg) * g;
    f = ClosedLoopLambdaMax(plant, K);
    ++out.iterations;
  }
  return out;
}

// Target-level Polyak: aim δ below the record, halve δ after a stall window,
// double it when the level is reached outright.
StartOutcome DescendToStagnation(const LtiPlant& plant, Eigen::MatrixXd K,
                                 const SynthesisOptions& opts) {
  constexpr int kStallWindow = 100;
  StartOutcome out;
  double f = ClosedLoopLambdaMax(plant, K);
  out.f_best = f;
  out.K_best = K;
  out.trace.push_back(f);
  double delta = std::max(0.01, 0.1 * std::abs(f));
  int stall = 0;
  while (out.iterations < opts.max_iters) {
    if (out.f_best < kUnboundedObjective) break;
    if (delta <= opts.tol * std::max(1.0, std::abs(out.f_best))) break;
    const Eigen::MatrixXd g = Subgradient(plant, K);
    const double gg = g.squaredNorm();
    if (gg == 0.0) break;
    const double level = out.f_best - delta;
    K -= ((f - level) / gg) * g;
    f = ClosedLoopLambdaMax(plant, K);
    ++out.iterations;

    const double previous = out.f_best;
    if (f < out.f_best) {
      out.f_best = f;
      out.K_best = K;
    }
    out.trace.push_back(out.f_best);
    if (f <= previous - 0.5 * delta) {
      stall = 0;
      if (f <= previous - 0.9 * delta) delta *= 2.0;
    } else if (++stall >= kStallWindow) {
      stall = 0;
      delta *= 0.5;
      K = out.K_best;
      f = out.f_best;
    }
  }
  return out;
}

template <typename Descend>
std::vector<StartOutcome> RunRestarts(const LtiPlant& plant,
                                      const SynthesisOptions& opts,
                                      Descend descend) {
  std::vector<StartOutcome> outcomes(opts.num_restarts);
  auto run = [&](int r) {
    outcomes[r - 1] = descend(plant, StartPoint(plant, opts.seed, r), opts);
  };
  if (opts.threads <= 1 || opts.num_restarts <= 1) {
    for (int r = 1; r <= opts.num_restarts; ++r) run(r);
    return outcomes;
  }
  // Fixed round-robin assignment; each slot is written by exactly one task.
  const int workers = std::min(opts.threads, opts.num_restarts);
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (int r = 1 + w; r <= opts.num_restarts; r += workers) run(r);
    }));
  }
  for (auto& t : tasks) t.get();
  return outcomes;
}

}  // namespace

Eigen::MatrixXd ClosedLoopSym(const LtiPlant& plant,
                              const Eigen::MatrixXd& K) {
  plant.CheckGain(K);
  const Eigen::MatrixXd BKC = plant.B() * K * plant.C();
  const Eigen::MatrixXd M =
      plant.A().transpose() + plant.A() + BKC + BKC.transpose();
  return Symmetrize(M);
}

double ClosedLoopLambdaMax(const LtiPlant& plant, const Eigen::MatrixXd& K) {
  return LambdaMaxSym(ClosedLoopSym(plant, K)).value;
}

Eigen::MatrixXd Subgradient(const LtiPlant& plant, const Eigen::MatrixXd& K) {
  const Eigen::VectorXd u = LambdaMaxSym(ClosedLoopSym(plant, K)).vector;
  const Eigen::VectorXd Btu = plant.B().transpose() * u;
  const Eigen::VectorXd Cu = plant.C() * u;
  return 2.0 * Btu * Cu.transpose();
}

void SynthesisOptions::Validate() const {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw std::invalid_argument("epsilon must be a positive finite number");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (num_restarts < 1) {
    throw std::invalid_argument("num_restarts must be >= 1");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!(TargetGap() > 0.0) || !std::isfinite(TargetGap())) {
    throw std::invalid_argument("target_gap must be positive");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

std::string_view ToString(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::kCertified:
      return "Certified";
    case SynthesisStatus::kInfeasible:
      return "Infeasible";
    case SynthesisStatus::kMaxIterations:
      return "MaxIterations";
  }
  return "Unknown";
}

SynthesisResult Synthesize(const LtiPlant& plant,
                           const SynthesisOptions& opts) {
  opts.Validate();
  SynthesisResult result;
  result.feasibility = ProjectionConditions(plant);
  if (!result.feasibility.feasible) {
    result.status = SynthesisStatus::kInfeasible;
    return result;
  }

  std::vector<StartOutcome> outcomes;
  outcomes.push_back(DescendToTarget(plant, StartPoint(plant, opts.seed, 0),
                                     opts));
  if (!outcomes.front().certified) {
    auto restarts = RunRestarts(plant, opts, DescendToTarget);
    std::move(restarts.begin(), restarts.end(), std::back_inserter(outcomes));
  }

  // Replay in start order: the first certified start wins, otherwise the
  // lowest f with earlier starts winning ties.
  std::size_t winner = 0;
  double running_best = std::numeric_limits<double>::infinity();
  bool certified = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const StartOutcome& o = outcomes[i];
    result.iterations_used += o.iterations;
    for (double v : o.trace) {
      running_best = std::min(running_best, v);
      result.best_trace.push_back(running_best);
    }
    if (o.f_best < outcomes[winner].f_best - kTieTolerance) winner = i;
    if (o.certified) {
      winner = i;
      certified = true;
      break;
    }
  }

  const StartOutcome& best = outcomes[winner];
  result.gain = SofGain{best.K_best, best.f_best, opts.epsilon};
  result.status = certified ? SynthesisStatus::kCertified
                            : SynthesisStatus::kMaxIterations;
  return result;
}

DecayBound OptimalDecay(const LtiPlant& plant, const SynthesisOptions& opts) {
  opts.Validate();
  const FeasibilityReport report = ProjectionConditions(plant);
  if (!report.feasible) {
    throw std::invalid_argument(
        "plant fails the null-space conditions; no stabilizing gain exists");
  }

  std::vector<StartOutcome> outcomes;
  outcomes.push_back(
      DescendToStagnation(plant, StartPoint(plant, opts.seed, 0), opts));
  if (outcomes.front().f_best >= kUnboundedObjective) {
    auto restarts = RunRestarts(plant, opts, DescendToStagnation);
    std::move(restarts.begin(), restarts.end(), std::back_inserter(outcomes));
  }

  DecayBound bound;
  std::size_t winner = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    bound.iterations_used += outcomes[i].iterations;
    if (outcomes[i].f_best < outcomes[winner].f_best - kTieTolerance) {
      winner = i;
    }
  }
  bound.K = outcomes[winner].K_best;
  if (outcomes[winner].f_best < kUnboundedObjective) {
    bound.unbounded = true;
    bound.epsilon_star = std::numeric_limits<double>::infinity();
  } else {
    bound.epsilon_star = -outcomes[winner].f_best;
  }
  return bound;
}

}  // namespace lossless_sof
