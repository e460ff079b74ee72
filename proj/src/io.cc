#include "lossless_sof/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lossless_sof::io {
namespace {

void DumpTo(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump();
        out += ':';
        DumpTo(item, out);
      }
      out += '}';
      return;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i > 0) out += ',';
        DumpTo(value[i], out);
      }
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = value.get<double>();
      out += std::isfinite(v) ? FormatDouble(v) : "null";
      return;
    }
    default:
      out += value.dump();
      return;
  }
}

Json FiniteOrNull(double v) { return std::isfinite(v) ? Json(v) : Json(); }

}  // namespace

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string Dump(const Json& value) {
  std::string out;
  DumpTo(value, out);
  return out;
}

Json MatrixToJson(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const Json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) {
    throw FormatError(path + ": expected a non-empty array of rows");
  }
  const std::size_t rows = value.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const Json& row = value[i];
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.empty()) {
      throw FormatError(row_path + ": expected a non-empty array of numbers");
    }
    if (i == 0) cols = row.size();
    if (row.size() != cols) {
      throw FormatError(row_path + ": has " + std::to_string(row.size()) +
                        " entries, expected " + std::to_string(cols));
    }
  }
  Eigen::MatrixXd M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Json& entry = value[i][j];
      if (!entry.is_number()) {
        throw FormatError(path + "[" + std::to_string(i) + "][" +
                          std::to_string(j) + "]: expected a number");
      }
      M(i, j) = entry.get<double>();
    }
  }
  return M;
}

Json SystemToJson(const SystemDef& sys) {
  Json doc = Json::object();
  doc["A"] = MatrixToJson(sys.plant().A());
  doc["B"] = MatrixToJson(sys.plant().B());
  doc["C"] = MatrixToJson(sys.plant().C());
  if (sys.nonlinearity()) {
    Json terms = Json::array();
    for (const auto& S : sys.nonlinearity()->terms()) {
      terms.push_back(MatrixToJson(S));
    }
    doc["S"] = std::move(terms);
  }
  return doc;
}

SystemDef SystemFromJson(const Json& doc) {
  if (!doc.is_object()) throw FormatError("system: expected a JSON object");
  for (const char* key : {"A", "B", "C"}) {
    if (!doc.contains(key)) {
      throw FormatError(std::string("system: missing field \"") + key + "\"");
    }
  }
  for (const auto& [key, unused] : doc.items()) {
    if (key != "A" && key != "B" && key != "C" && key != "S") {
      throw FormatError("system: unknown field \"" + key + "\"");
    }
  }
  LtiPlant plant = LtiPlant::Make(MatrixFromJson(doc["A"], "A"),
                                  MatrixFromJson(doc["B"], "B"),
                                  MatrixFromJson(doc["C"], "C"));
  std::optional<LosslessNonlinearity> nl;
  if (doc.contains("S") && !doc["S"].is_null()) {
    const Json& terms = doc["S"];
    if (!terms.is_array()) throw FormatError("S: expected an array");
    std::vector<Eigen::MatrixXd> S;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      S.push_back(MatrixFromJson(terms[k], "S[" + std::to_string(k) + "]"));
    }
    nl = LosslessNonlinearity::Make(std::move(S));
  }
  return SystemDef(std::move(plant), std::move(nl));
}

Json FeasibilityToJson(const FeasibilityReport& report) {
  Json doc = Json::object();
  doc["lambda_B"] = FiniteOrNull(report.lambda_B);
  doc["lambda_C"] = FiniteOrNull(report.lambda_C);
  doc["feasible"] = report.feasible;
  doc["m_B"] = report.m_B();
  doc["m_C"] = report.m_C();
  return doc;
}

Json SynthesisToJson(const SynthesisResult& result, double epsilon) {
  Json doc = Json::object();
  doc["status"] = std::string(ToString(result.status));
  if (result.gain) {
    doc["K"] = MatrixToJson(result.gain->K);
    doc["achieved_lambda"] = FiniteOrNull(result.gain->achieved_lambda);
  } else {
    doc["K"] = nullptr;
    doc["achieved_lambda"] = nullptr;
  }
  doc["epsilon"] = epsilon;
  doc["iterations_used"] = result.iterations_used;
  return doc;
}

Json CertificateToJson(const Certificate& cert) {
  Json doc = Json::object();
  doc["valid"] = cert.valid;
  doc["epsilon"] = cert.epsilon;
  doc["lambda_max_reduced"] = FiniteOrNull(cert.lambda_max_reduced);
  doc["lambda_max_bmi"] = FiniteOrNull(cert.lambda_max_bmi);
  doc["P"] = "identity";
  doc["xi_o"] = -1;
  return doc;
}

Eigen::MatrixXd GainFromJson(const Json& doc) {
  if (!doc.is_object() || !doc.contains("K")) {
    throw FormatError("gain: expected an object with field \"K\"");
  }
  if (doc["K"].is_null()) {
    throw FormatError("gain: field \"K\" is null (no gain was synthesized)");
  }
  const Eigen::MatrixXd K = MatrixFromJson(doc["K"], "K");
  if (!K.allFinite()) throw FormatError("K: non-finite entry");
  return K;
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write file");
  out << Dump(value) << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string TrajectoryCsv(const Trajectory& traj) {
  std::ostringstream out;
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  out << 't';
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  out << ",norm\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << FormatDouble(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ',' << FormatDouble(traj.states[k](i));
    }
    out << ',' << FormatDouble(traj.norms[k]) << '\n';
  }
  return out.str();
}

Json PortraitManifest(const GridSpec& grid, const IntegrationOptions& opts,
                      bool closed_loop, const std::vector<Trajectory>& portrait,
                      const std::vector<std::string>& files) {
  Json doc = Json::object();
  doc["grid"] = grid.ToString();
  doc["dt"] = opts.dt;
  doc["t_final"] = opts.t_final;
  doc["escape_radius"] = opts.escape_radius;
  doc["closed_loop"] = closed_loop;
  doc["files"] = files;
  Json diverged = Json::array();
  Json escape = Json::array();
  for (const auto& traj : portrait) {
    diverged.push_back(traj.diverged);
    escape.push_back(traj.escape_time ? Json(*traj.escape_time) : Json());
  }
  doc["diverged"] = std::move(diverged);
  doc["escape_time"] = std::move(escape);
  return doc;
}

Json WritePortrait(const std::filesystem::path& dir, const GridSpec& grid,
                   const IntegrationOptions& opts, bool closed_loop,
                   const std::vector<Trajectory>& portrait) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < portrait.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03zu.csv", i);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error((dir / name).string() + ": cannot write");
    out << TrajectoryCsv(portrait[i]);
    if (!out) throw std::runtime_error((dir / name).string() + ": write failed");
    files.emplace_back(name);
  }
  Json manifest = PortraitManifest(grid, opts, closed_loop, portrait, files);
  WriteJsonFile(dir / "index.json", manifest);
  return manifest;
}

}  // namespace lossless_sof::io
