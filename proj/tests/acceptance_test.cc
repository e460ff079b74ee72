// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lossless_sof/certify.h"
#include "lossless_sof/cli.h"
#include "lossless_sof/feasibility.h"
#include "lossless_sof/io.h"
#include "lossless_sof/linalg.h"
#include "lossless_sof/model.h"
#include "lossless_sof/sim.h"
#include "lossless_sof/synthesis.h"
#include "test_util.h"

namespace lossless_sof {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string Num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

fs::path WorkDir() {
  const fs::path dir = fs::temp_directory_path() / "lossless_sof_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int RunCli(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), "lossless-sof");
  std::ostringstream o, e;
  const int code = cli::Run(args, o, e);
  out = o.str() + e.str();
  return code;
}

Eigen::MatrixXd KRef() { return test::Scalar(kBenchmarkGain); }

Verdict BenchmarkFeasibility(const fs::path& dir) {
  std::string out;
  const int code =
      RunCli({"feasibility", (dir / "benchmark.json").string()}, out);
  const Json doc = Json::parse(out);
  const double lb = doc["lambda_B"].get<double>();
  const double lc = doc["lambda_C"].get<double>();
  const bool pass = code == cli::kSuccess && doc["feasible"] == true &&
                    std::abs(lb + 1.2) <= 1e-9 && std::abs(lc + 1.0) <= 1e-9;
  return {pass, "lambda_B=" + io::FormatDouble(lb) +
                    " lambda_C=" + io::FormatDouble(lc) +
                    " exit=" + std::to_string(code)};
}

Verdict ReferenceGainCertificate() {
  const Certificate cert = VerifySof(BenchmarkSystem().plant(), KRef(), 1e-6);
  const bool pass =
      cert.valid && std::abs(cert.lambda_max_reduced + 0.556) <= 1e-3;
  return {pass, "valid=" + std::string(cert.valid ? "true" : "false") +
                    " lambda_max_reduced=" + Num(cert.lambda_max_reduced)};
}

Verdict SynthesisOnBenchmark(const fs::path& dir) {
  std::string out;
  const int code = RunCli({"synth", (dir / "benchmark.json").string(),
                           "--epsilon", "1e-6"},
                          out);
  const Json doc = Json::parse(out);
  if (code != cli::kSuccess || doc["status"] != "Certified") {
    return {false, "status=" + doc["status"].get<std::string>()};
  }
  const Eigen::MatrixXd K = io::GainFromJson(doc);
  const Certificate cert = VerifySof(BenchmarkSystem().plant(), K, 1e-6);
  const bool pass = cert.valid && cert.lambda_max_reduced <= -1e-6;
  return {pass, "K=" + Num(K(0, 0)) +
                    " independent lambda_max_reduced=" +
                    Num(cert.lambda_max_reduced)};
}

Verdict ClosedLoopConvergence() {
  const SystemDef sys = BenchmarkSystem();
  IntegrationOptions opts;
  opts.dt = 1e-3;
  opts.t_final = 20.0;
  const Certificate cert = VerifySof(sys.plant(), KRef(), 1e-6);
  const auto portrait =
      PhasePortrait(sys, KRef(), GridSpec::Circle(1.0, 16), opts, 4);
  double worst = 0.0;
  bool decays = true;
  for (const auto& traj : portrait) {
    worst = std::max(worst, traj.norms.back());
    decays = decays && !traj.diverged && DecayCheck(traj, 1e-6, 1e-3);
  }
  std::string info;
  const SynthesisResult synth = Synthesize(sys.plant());
  if (synth.gain) {
    double synth_worst = 0.0;
    bool synth_decays = true;
    for (const auto& traj : PhasePortrait(sys, synth.gain->K,
                                          GridSpec::Circle(1.0, 16), opts, 4)) {
      synth_worst = std::max(synth_worst, traj.norms.back());
      synth_decays = synth_decays && DecayCheck(traj, 1e-6, 1e-3);
    }
    info = " (info: synthesized K=" + Num(synth.gain->K(0, 0)) +
           " max final |x|=" + Num(synth_worst) +
           " decay_check=" + (synth_decays ? "pass" : "fail") + ")";
  }
  return {cert.valid && worst <= 1e-3 && decays,
          "K=" + Num(kBenchmarkGain) + " max final |x|=" + Num(worst) +
              " decay_check=" + (decays ? "pass" : "fail") + info};
}

Verdict OpenLoopDivergence() {
  const SystemDef sys = BenchmarkSystem();
  IntegrationOptions opts;
  opts.escape_radius = 50.0;
  std::string tried;
  double settled_max = 0.0;
  for (double bound : {3.0, 5.0, 10.0, 20.0, 30.0, 35.0}) {
    const GridSpec grid = GridSpec::Box(bound, 7);
    const auto portrait = PhasePortrait(sys, std::nullopt, grid, opts, 4);
    int diverged = 0;
    for (const auto& traj : portrait) {
      diverged += traj.diverged;
      settled_max = std::max(settled_max, traj.norms.back());
    }
    tried += (tried.empty() ? "" : ",") + Num(bound);
    if (diverged > 0) {
      return {true, "grid=" + grid.ToString() + " diverged=" +
                        std::to_string(diverged) + "/49"};
    }
  }
  return {false, "no escape to |x|=50 for box bounds " + tried +
                     "; max final |x| over all sweeps=" +
                     Num(settled_max)};
}

Verdict BmiEquivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> eps_dist(1e-3, 1.0);
  std::uniform_real_distribution<double> scale_dist(0.1, 10.0);
  int agree = 0, rescale_ok = 0, forcing_ok = 0;
  const int total = 200;
  for (int i = 0; i < total; ++i) {
    const int n = 1 + i % 3;
    const int q = 1 + (i / 3) % 2;
    const int p = 1 + (i / 6) % 2;
    const LtiPlant plant = test::RandomPlant(rng, n, q, p);
    const Eigen::MatrixXd K = test::RandomMatrix(rng, q, p);
    const double eps = eps_dist(rng);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    const Eigen::MatrixXd L = AssembleBmi(plant, K, I, -1.0, eps);
    const double bmi_max = LambdaMaxSym(L).value;
    const bool nsd = bmi_max <= 1e-10;
    const bool sign = ClosedLoopLambdaMax(plant, K) + eps <= 1e-10;
    agree += nsd == sign;

    const double s = scale_dist(rng);
    const double scaled_max =
        LambdaMaxSym(AssembleBmi(plant, K, s * I, -s, eps)).value;
    rescale_ok += (scaled_max <= 1e-10 * s) == nsd &&
                  std::abs(scaled_max - s * bmi_max) <=
                      1e-10 * s * (1.0 + std::abs(bmi_max));

    Eigen::MatrixXd P = I;
    P(0, 0) += 0.5 * scale_dist(rng);
    forcing_ok += LambdaMaxSym(AssembleBmi(plant, K, P, -1.0, eps)).value > 1e-10;
  }
  return {agree == total && rescale_ok == total && forcing_ok == total,
          "agree=" + std::to_string(agree) + "/200 rescaling=" +
              std::to_string(rescale_ok) + "/200 forcing=" +
              std::to_string(forcing_ok) + "/200"};
}

// Best λ_max over 0 and ±10^k for 10^4 log-spaced k in [-4, 4].
double GridSearchOracle(const LtiPlant& plant) {
  double best = ClosedLoopLambdaMax(plant, test::Scalar(0.0));
  const int per_sign = 5000;
  for (int i = 0; i < per_sign; ++i) {
    const double k = std::pow(10.0, -4.0 + 8.0 * i / (per_sign - 1));
    best = std::min(best, ClosedLoopLambdaMax(plant, test::Scalar(k)));
    best = std::min(best, ClosedLoopLambdaMax(plant, test::Scalar(-k)));
  }
  return best;
}

Verdict ProjectionEquivalence() {
  std::mt19937_64 rng(7);
  int decisive = 0, agree = 0, in_band = 0, band_disagree = 0;
  for (int i = 0; i < 200; ++i) {
    const LtiPlant plant = test::RandomPlant(rng, 1 + i % 3, 1, 1);
    const FeasibilityReport feas = ProjectionConditions(plant);
    const bool oracle = GridSearchOracle(plant) < 0.0;
    const double margin = std::max(feas.lambda_B, feas.lambda_C);
    if (std::abs(margin) > 0.1) {
      ++decisive;
      agree += oracle == feas.feasible;
    } else {
      ++in_band;
      band_disagree += oracle != feas.feasible;
    }
  }
  return {agree == decisive,
          "agree=" + std::to_string(agree) + "/" + std::to_string(decisive) +
              " outside margin band; in band: " + std::to_string(in_band) +
              " cases, " + std::to_string(band_disagree) + " disagreements"};
}

Verdict NumericalHygiene() {
  std::mt19937_64 rng(11);
  int checked = 0;
  double worst_fd = 0.0;
  while (checked < 5) {
    const LtiPlant plant = test::RandomPlant(rng, 3, 2, 2);
    const Eigen::MatrixXd K = test::RandomMatrix(rng, 2, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        ClosedLoopSym(plant, K), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(2) - eig.eigenvalues()(1) <= 1e-3) continue;
    const Eigen::MatrixXd g = Subgradient(plant, K);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        Eigen::MatrixXd Kp = K, Km = K;
        Kp(i, j) += h;
        Km(i, j) -= h;
        const double fd = (ClosedLoopLambdaMax(plant, Kp) -
                           ClosedLoopLambdaMax(plant, Km)) /
                          (2 * h);
        worst_fd = std::max(worst_fd, std::abs(fd - g(i, j)));
      }
    }
    ++checked;
  }

  const SystemDef sys = BenchmarkSystem();
  const Eigen::VectorXd x0 = test::Vec({0.8, -0.5});
  auto final_state = [&](double dt) {
    IntegrationOptions opts;
    opts.dt = dt;
    opts.t_final = 2.0;
    return Integrate(sys, KRef(), x0, opts).states.back();
  };
  const Eigen::VectorXd ref = final_state(0.01 / 64);
  const double ratio =
      (final_state(0.01) - ref).norm() / (final_state(0.005) - ref).norm();

  double worst_energy = 0.0;
  IntegrationOptions opts;
  opts.dt = 1e-3;
  opts.t_final = 20.0;
  for (const auto& K : {std::optional<Eigen::MatrixXd>(KRef()),
                        std::optional<Eigen::MatrixXd>()}) {
    const Trajectory traj = Integrate(sys, K, test::Vec({1.0, 0.0}), opts);
    double peak = 0.0;
    for (const auto& x : traj.states) peak = std::max(peak, x.squaredNorm());
    worst_energy =
        std::max(worst_energy, EnergyRateResidual(sys, K, traj) / peak);
  }

  const bool pass = worst_fd <= 1e-5 && ratio >= 12.0 && ratio <= 20.0 &&
                    worst_energy <= 1e-4;
  return {pass, "max |fd - subgradient|=" + Num(worst_fd) +
                    " rk4 ratio=" + Num(ratio) +
                    " energy residual/max|x|^2=" + Num(worst_energy)};
}

}  // namespace
}  // namespace lossless_sof

int main() {
  using namespace lossless_sof;
  const fs::path dir = WorkDir();
  std::ofstream(dir / "benchmark.json")
      << io::Dump(io::SystemToJson(BenchmarkSystem())) << '\n';

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria =
      {{"benchmark feasibility", [&] { return BenchmarkFeasibility(dir); }},
       {"reference gain certificate", ReferenceGainCertificate},
       {"synthesis on benchmark", [&] { return SynthesisOnBenchmark(dir); }},
       {"closed-loop convergence", ClosedLoopConvergence},
       {"open-loop divergence", OpenLoopDivergence},
       {"BMI equivalence properties", BmiEquivalence},
       {"projection condition equivalence", ProjectionEquivalence},
       {"numerical hygiene", NumericalHygiene}};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v{false, ""};
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s [%zu] %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
