#include "lossless_sof/cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "lossless_sof/certify.h"
#include "lossless_sof/feasibility.h"
#include "lossless_sof/io.h"
#include "lossless_sof/model.h"
#include "lossless_sof/sim.h"
#include "lossless_sof/synthesis.h"

namespace lossless_sof::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr int kLosslessSamples = 1000;
constexpr double kLosslessTol = 1e-10;

struct Flags {
  std::string system_file;
  std::string gain_file;
  std::string out;
  std::string outdir;
  std::string grid;
  std::string x0;
  double epsilon{1e-6};
  std::uint64_t seed{0};
  int max_iters{5000};
  int restarts{8};
  int threads{1};
  int samples{kLosslessSamples};
  double tol{kLosslessTol};
  IntegrationOptions integration;
};

SystemDef LoadSystem(const std::string& path) {
  const Json doc = io::ReadJsonFile(path);
  try {
    return io::SystemFromJson(doc);
  } catch (const io::FormatError& e) {
    throw io::FormatError(path + ": " + e.what());
  }
}

Eigen::MatrixXd LoadGain(const std::string& path, const LtiPlant& plant) {
  Eigen::MatrixXd K;
  try {
    K = io::GainFromJson(io::ReadJsonFile(path));
  } catch (const io::FormatError& e) {
    const std::string what = e.what();
    throw io::FormatError(what.rfind(path, 0) == 0 ? what : path + ": " + what);
  }
  try {
    plant.CheckGain(K);
  } catch (const std::invalid_argument& e) {
    throw io::FormatError(path + ": " + e.what());
  }
  return K;
}

SynthesisOptions SynthOptions(const Flags& flags) {
  SynthesisOptions opts;
  opts.epsilon = flags.epsilon;
  opts.seed = flags.seed;
  opts.max_iters = flags.max_iters;
  opts.num_restarts = flags.restarts;
  opts.threads = flags.threads;
  opts.Validate();
  return opts;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write file");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Eigen::VectorXd ParseVector(const std::string& text, int n) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw std::invalid_argument("bad --x0 entry '" + item + "'");
    }
    values.push_back(v);
  }
  if (static_cast<int>(values.size()) != n) {
    throw std::invalid_argument("--x0 needs " + std::to_string(n) +
                                " comma-separated values");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), n);
}

GridSpec GridOrDefault(const Flags& flags, bool closed_loop) {
  if (!flags.grid.empty()) return GridSpec::Parse(flags.grid);
  return closed_loop ? GridSpec::Circle(1.0, 16) : GridSpec::Box(3.0, 7);
}

int CmdCheck(const Flags& flags, std::ostream& out) {
  const Json doc = io::ReadJsonFile(flags.system_file);
  Json report = Json::object();
  std::optional<SystemDef> sys;
  try {
    sys.emplace(io::SystemFromJson(doc));
  } catch (const io::FormatError& e) {
    throw io::FormatError(flags.system_file + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    report["pass"] = false;
    report["error"] = e.what();
    out << io::Dump(report) << '\n';
    return kNegative;
  }
  const LtiPlant& plant = sys->plant();
  report["n"] = plant.n();
  report["q"] = plant.q();
  report["p"] = plant.p();
  report["has_nonlinearity"] = sys->nonlinearity().has_value();
  const LosslessNonlinearity nl =
      sys->nonlinearity().value_or(LosslessNonlinearity::Zero(plant.n()));
  const LosslessReport lossless =
      CheckLossless(nl, flags.samples, flags.seed, flags.tol);
  report["samples"] = flags.samples;
  report["seed"] = flags.seed;
  report["tol"] = flags.tol;
  report["max_violation"] = lossless.max_violation;
  report["pass"] = lossless.pass;
  out << io::Dump(report) << '\n';
  return lossless.pass ? kSuccess : kNegative;
}

int CmdFeasibility(const Flags& flags, std::ostream& out) {
  const SystemDef sys = LoadSystem(flags.system_file);
  const FeasibilityReport report = ProjectionConditions(sys.plant());
  const Json doc = io::FeasibilityToJson(report);
  if (!flags.out.empty()) io::WriteJsonFile(flags.out, doc);
  out << io::Dump(doc) << '\n';
  return report.feasible ? kSuccess : kNegative;
}

int SynthExitCode(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::kCertified:
      return kSuccess;
    case SynthesisStatus::kInfeasible:
      return kNegative;
    case SynthesisStatus::kMaxIterations:
      return kIterationLimit;
  }
  return kError;
}

int CmdSynth(const Flags& flags, std::ostream& out) {
  const SynthesisOptions opts = SynthOptions(flags);
  const SystemDef sys = LoadSystem(flags.system_file);
  const SynthesisResult result = Synthesize(sys.plant(), opts);
  const Json doc = io::SynthesisToJson(result, opts.epsilon);
  if (!flags.out.empty()) io::WriteJsonFile(flags.out, doc);
  out << io::Dump(doc) << '\n';
  return SynthExitCode(result.status);
}

int CmdCertify(const Flags& flags, std::ostream& out) {
  const SystemDef sys = LoadSystem(flags.system_file);
  const Eigen::MatrixXd K = LoadGain(flags.gain_file, sys.plant());
  const Certificate cert = VerifySof(sys.plant(), K, flags.epsilon);
  const Json doc = io::CertificateToJson(cert);
  if (!flags.out.empty()) io::WriteJsonFile(flags.out, doc);
  out << io::Dump(doc) << '\n';
  return cert.valid ? kSuccess : kNegative;
}

int CmdSimulate(const Flags& flags, std::ostream& out) {
  const SystemDef sys = LoadSystem(flags.system_file);
  std::optional<Eigen::MatrixXd> K;
  if (!flags.gain_file.empty()) K = LoadGain(flags.gain_file, sys.plant());
  const Eigen::VectorXd x0 = ParseVector(flags.x0, sys.n());
  const Trajectory traj = Integrate(sys, K, x0, flags.integration);
  if (!flags.out.empty()) WriteText(flags.out, io::TrajectoryCsv(traj));

  Json doc = Json::object();
  doc["samples"] = traj.size();
  doc["final_time"] = traj.times.back();
  doc["final_norm"] = traj.norms.back();
  doc["diverged"] = traj.diverged;
  doc["escape_time"] = traj.escape_time ? Json(*traj.escape_time) : Json();
  out << io::Dump(doc) << '\n';
  return kSuccess;
}

int CmdPhase(const Flags& flags, std::ostream& out) {
  const SystemDef sys = LoadSystem(flags.system_file);
  std::optional<Eigen::MatrixXd> K;
  if (!flags.gain_file.empty()) K = LoadGain(flags.gain_file, sys.plant());
  const GridSpec grid = GridOrDefault(flags, K.has_value());
  const auto portrait =
      PhasePortrait(sys, K, grid, flags.integration, flags.threads);
  const Json manifest = io::WritePortrait(flags.outdir, grid, flags.integration,
                                          K.has_value(), portrait);
  out << io::Dump(manifest) << '\n';
  return kSuccess;
}

std::string Fmt(double v) { return io::FormatDouble(v); }

std::string DescribePortrait(const std::string& label, const GridSpec& grid,
                             const std::vector<Trajectory>& portrait) {
  int diverged = 0;
  double final_max = 0.0;
  for (const auto& t : portrait) {
    diverged += t.diverged;
    final_max = std::max(final_max, t.norms.back());
  }
  std::ostringstream line;
  line << label << " (" << grid.ToString() << "): " << diverged << "/"
       << portrait.size() << " diverged, max final |x| = " << Fmt(final_max)
       << "\n";
  return line.str();
}

int CmdDemo(const Flags& flags, std::ostream& out) {
  const SynthesisOptions opts = SynthOptions(flags);
  const fs::path dir = flags.outdir;
  fs::create_directories(dir);

  const SystemDef sys = BenchmarkSystem();
  const LtiPlant& plant = sys.plant();
  io::WriteJsonFile(dir / "system.json", io::SystemToJson(sys));

  const LosslessReport lossless =
      CheckLossless(*sys.nonlinearity(), flags.samples, flags.seed, flags.tol);
  Json check = Json::object();
  check["max_violation"] = lossless.max_violation;
  check["pass"] = lossless.pass;
  io::WriteJsonFile(dir / "check.json", check);

  const FeasibilityReport feas = ProjectionConditions(plant);
  io::WriteJsonFile(dir / "feasibility.json", io::FeasibilityToJson(feas));

  const SynthesisResult synth = Synthesize(plant, opts);
  io::WriteJsonFile(dir / "synth.json", io::SynthesisToJson(synth, opts.epsilon));

  std::optional<Certificate> synth_cert;
  if (synth.gain) {
    synth_cert = VerifySof(plant, synth.gain->K, opts.epsilon);
    io::WriteJsonFile(dir / "certificate_synth.json",
                      io::CertificateToJson(*synth_cert));
  }
  const Eigen::MatrixXd K_ref = Eigen::MatrixXd::Constant(1, 1, kBenchmarkGain);
  const Certificate ref_cert = VerifySof(plant, K_ref, opts.epsilon);
  io::WriteJsonFile(dir / "certificate_reference.json",
                    io::CertificateToJson(ref_cert));

  std::optional<DecayBound> decay;
  if (feas.feasible) {
    decay = OptimalDecay(plant, opts);
    Json doc = Json::object();
    doc["K"] = io::MatrixToJson(decay->K);
    doc["epsilon_star"] = decay->epsilon_star;
    doc["unbounded"] = decay->unbounded;
    io::WriteJsonFile(dir / "optimal_decay.json", doc);
  }

  const GridSpec closed_grid = GridSpec::Circle(1.0, 16);
  const GridSpec open_grid = GridSpec::Box(3.0, 7);
  const auto closed = PhasePortrait(sys, K_ref, closed_grid, flags.integration,
                                    flags.threads);
  const auto open = PhasePortrait(sys, std::nullopt, open_grid,
                                  flags.integration, flags.threads);
  io::WritePortrait(dir / "closed_loop", closed_grid, flags.integration, true,
                    closed);
  io::WritePortrait(dir / "open_loop", open_grid, flags.integration, false,
                    open);
  std::optional<std::vector<Trajectory>> closed_synth;
  if (synth.gain) {
    closed_synth = PhasePortrait(sys, synth.gain->K, closed_grid,
                                 flags.integration, flags.threads);
    io::WritePortrait(dir / "closed_loop_synth", closed_grid,
                      flags.integration, true, *closed_synth);
  }

  std::ostringstream summary;
  summary << "lossless check: " << (lossless.pass ? "pass" : "FAIL")
          << " (max |x'z| = " << Fmt(lossless.max_violation) << ")\n"
          << "feasibility: feasible=" << (feas.feasible ? "true" : "false")
          << " lambda_B=" << Fmt(feas.lambda_B)
          << " lambda_C=" << Fmt(feas.lambda_C) << "\n"
          << "synthesis: status=" << ToString(synth.status)
          << " iterations=" << synth.iterations_used;
  if (synth.gain) {
    summary << " K=" << Fmt(synth.gain->K(0, 0))
            << " achieved_lambda=" << Fmt(synth.gain->achieved_lambda);
  }
  summary << "\n";
  if (synth_cert) {
    summary << "certificate (synthesized K): valid="
            << (synth_cert->valid ? "true" : "false")
            << " lambda_max_reduced=" << Fmt(synth_cert->lambda_max_reduced)
            << "\n";
  }
  summary << "certificate (K=" << Fmt(kBenchmarkGain)
          << "): valid=" << (ref_cert.valid ? "true" : "false")
          << " lambda_max_reduced=" << Fmt(ref_cert.lambda_max_reduced) << "\n";
  if (decay) {
    summary << "optimal decay: epsilon_star="
            << (decay->unbounded ? std::string("inf")
                                 : Fmt(decay->epsilon_star))
            << "\n";
  }
  summary << DescribePortrait("closed-loop portrait, K=" + Fmt(kBenchmarkGain),
                              closed_grid, closed);
  if (closed_synth) {
    summary << DescribePortrait(
        "closed-loop portrait, synthesized K=" + Fmt(synth.gain->K(0, 0)),
        closed_grid, *closed_synth);
  }
  summary << DescribePortrait("open-loop portrait", open_grid, open);
  WriteText(dir / "summary.txt", summary.str());
  out << summary.str();
  return kSuccess;
}

void AddSynthFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--max-iters", f.max_iters, "Iterations per start")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", f.restarts, "Random restarts after K = 0")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
}

void AddIntegrationFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--dt", f.integration.dt, "RK4 step");
  cmd->add_option("--tfinal", f.integration.t_final, "Final time");
  cmd->add_option("--escape-radius", f.integration.escape_radius,
                  "Divergence threshold on |x|");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Flags f;
  CLI::App app{"Static output-feedback synthesis and certification for "
               "systems with lossless nonlinearities"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Validate a system file and "
                                            "test losslessness");
  check->add_option("system", f.system_file)->required();
  check->add_option("--seed", f.seed, "Sampling seed");
  check->add_option("--samples", f.samples, "Unit-ball samples")
      ->check(CLI::PositiveNumber);
  check->add_option("--tol", f.tol, "Allowed |x'z|");

  auto* feas = app.add_subcommand("feasibility",
                                  "Null-space conditions for a stabilizing "
                                  "gain");
  feas->add_option("system", f.system_file)->required();
  feas->add_option("--out", f.out, "Write report JSON here");

  auto* synth = app.add_subcommand("synth", "Synthesize a gain");
  synth->add_option("system", f.system_file)->required();
  synth->add_option("--epsilon", f.epsilon, "Target decay rate");
  synth->add_option("--out", f.out, "Write result JSON here");
  AddSynthFlags(synth, f);

  auto* certify = app.add_subcommand("certify", "Certify a gain");
  certify->add_option("system", f.system_file)->required();
  certify->add_option("gain", f.gain_file)->required();
  certify->add_option("--epsilon", f.epsilon, "Decay rate to certify");
  certify->add_option("--out", f.out, "Write certificate JSON here");

  auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory");
  simulate->add_option("system", f.system_file)->required();
  simulate->add_option("gain", f.gain_file, "Gain file (omit for open loop)");
  simulate->add_option("--x0", f.x0, "Initial state, comma separated")
      ->required();
  simulate->add_option("--out", f.out, "Write trajectory CSV here");
  AddIntegrationFlags(simulate, f);

  auto* phase = app.add_subcommand("phase", "Phase-portrait sweep");
  phase->add_option("system", f.system_file)->required();
  phase->add_option("gain", f.gain_file, "Gain file (omit for open loop)");
  phase->add_option("--grid", f.grid, "circle:R:N or box:B:NxN");
  phase->add_option("--outdir", f.outdir, "Output directory")->required();
  phase->add_option("--threads", f.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  AddIntegrationFlags(phase, f);

  auto* demo = app.add_subcommand("demo", "Run the full pipeline on the "
                                          "two-state benchmark");
  demo->add_option("--outdir", f.outdir, "Output directory")->required();
  demo->add_option("--epsilon", f.epsilon, "Target decay rate");
  AddSynthFlags(demo, f);
  AddIntegrationFlags(demo, f);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  try {
    if (*check) return CmdCheck(f, out);
    if (*feas) return CmdFeasibility(f, out);
    if (*synth) return CmdSynth(f, out);
    if (*certify) return CmdCertify(f, out);
    if (*simulate) return CmdSimulate(f, out);
    if (*phase) return CmdPhase(f, out);
    if (*demo) return CmdDemo(f, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace lossless_sof::cli
