#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lossless_sof/certify.h"
#include "lossless_sof/feasibility.h"
#include "lossless_sof/model.h"
#include "lossless_sof/sim.h"
#include "lossless_sof/synthesis.h"

namespace lossless_sof::io {

using Json = nlohmann::ordered_json;

/// Malformed or unreadable input. The message names the file and, for JSON
/// syntax errors, the line and column; for schema errors, the field path.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compact JSON with keys in insertion order and every floating-point
/// number printed with 17 significant digits. Non-finite numbers become
/// null.
std::string Dump(const Json& value);

Json MatrixToJson(const Eigen::MatrixXd& M);
/// Parses a row-major nested array. `path` prefixes error messages.
Eigen::MatrixXd MatrixFromJson(const Json& value, const std::string& path);

/// {"A": [[...]], "B": [[...]], "C": [[...]], "S": [[[...]], ...]}; "S" is
/// omitted for a pure LTI system.
Json SystemToJson(const SystemDef& sys);
/// Validates shapes and skew-symmetry. Schema problems raise FormatError;
/// model-level rejections (shapes, non-skew S_k) raise
/// std::invalid_argument.
SystemDef SystemFromJson(const Json& doc);

/// {lambda_B, lambda_C, feasible, m_B, m_C}
Json FeasibilityToJson(const FeasibilityReport& report);
/// {status, K, achieved_lambda, epsilon, iterations_used}; K and
/// achieved_lambda are null when no gain is available.
Json SynthesisToJson(const SynthesisResult& result, double epsilon);
/// {valid, epsilon, lambda_max_reduced, lambda_max_bmi, P: "identity",
/// xi_o: -1}
Json CertificateToJson(const Certificate& cert);
/// Reads the "K" field of a gain document (such as synthesis output).
Eigen::MatrixXd GainFromJson(const Json& doc);

/// Reads and parses a JSON file. Throws FormatError.
Json ReadJsonFile(const std::filesystem::path& path);
/// Writes Dump(value) plus a trailing newline. Throws std::runtime_error on
/// I/O failure.
void WriteJsonFile(const std::filesystem::path& path, const Json& value);

/// Header `t,x1,...,xn,norm`, one row per recorded sample.
std::string TrajectoryCsv(const Trajectory& traj);

/// {grid, dt, t_final, escape_radius, closed_loop, files, diverged,
/// escape_time}
Json PortraitManifest(const GridSpec& grid, const IntegrationOptions& opts,
                      bool closed_loop, const std::vector<Trajectory>& portrait,
                      const std::vector<std::string>& files);

/// Writes traj_000.csv, traj_001.csv, ... and index.json under `dir`
/// (created if missing). Returns the manifest.
Json WritePortrait(const std::filesystem::path& dir, const GridSpec& grid,
                   const IntegrationOptions& opts, bool closed_loop,
                   const std::vector<Trajectory>& portrait);

/// printf("%.17g") rendering used by every writer; non-finite values give
/// "inf", "-inf" or "nan".
std::string FormatDouble(double value);

}  // namespace lossless_sof::io
