#include "lossless_sof/io.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "test_util.h"

namespace lossless_sof {
namespace {

namespace fs = std::filesystem;
using io::Json;
using test::Mat;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lossless_sof_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Dump, SeventeenDigitFloats) {
  Json doc = Json::object();
  doc["a"] = 0.1;
  doc["b"] = 1;
  doc["c"] = std::numeric_limits<double>::infinity();
  doc["d"] = true;
  doc["e"] = "x";
  EXPECT_EQ(io::Dump(doc),
            "{\"a\":0.10000000000000001,\"b\":1,\"c\":null,\"d\":true,"
            "\"e\":\"x\"}");
  EXPECT_EQ(io::FormatDouble(1.0 / 3.0), "0.33333333333333331");
  EXPECT_EQ(std::stod(io::FormatDouble(-3.6231)), -3.6231);
}

TEST(SystemJson, RoundTripIsExact) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4;
    const SystemDef sys(test::RandomPlant(rng, n, 2, 1),
                        trial % 2 ? std::optional(test::RandomSkewNonlinearity(
                                        rng, n))
                                  : std::nullopt);
    const SystemDef back =
        io::SystemFromJson(Json::parse(io::Dump(io::SystemToJson(sys))));
    EXPECT_EQ(back.plant().A(), sys.plant().A());
    EXPECT_EQ(back.plant().B(), sys.plant().B());
    EXPECT_EQ(back.plant().C(), sys.plant().C());
    ASSERT_EQ(back.nonlinearity().has_value(), sys.nonlinearity().has_value());
    if (sys.nonlinearity()) {
      EXPECT_EQ(back.nonlinearity()->terms(), sys.nonlinearity()->terms());
    }
  }
}

TEST(SystemJson, SchemaErrorsNameTheField) {
  auto message = [](const std::string& text) -> std::string {
    try {
      io::SystemFromJson(Json::parse(text));
    } catch (const io::FormatError& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(message(R"({"A":[[1]],"B":[[1]]})").find("missing field \"C\""),
            std::string::npos);
  EXPECT_NE(message(R"({"A":[[1]],"B":[["x"]],"C":[[1]]})").find("B[0][0]"),
            std::string::npos);
  EXPECT_NE(message(R"({"A":[[1,2],[3]],"B":[[1],[1]],"C":[[1,1]]})")
                .find("A[1]"),
            std::string::npos);
  EXPECT_NE(message(R"({"A":[[1]],"B":[[1]],"C":[[1]],"Q":1})")
                .find("unknown field \"Q\""),
            std::string::npos);
  EXPECT_THROW(io::SystemFromJson(Json::parse(
                   R"({"A":[[1,0],[0,1]],"B":[[1]],"C":[[1,0]]})")),
               std::invalid_argument);
  EXPECT_THROW(io::SystemFromJson(Json::parse(
                   R"({"A":[[1,0],[0,1]],"B":[[1],[0]],"C":[[1,0]],
                       "S":[[[0,1],[1,0]],[[0,0],[0,0]]]})")),
               std::invalid_argument);
}

TEST(ReadJsonFile, ReportsLineAndColumn) {
  const fs::path dir = TempDir("parse");
  std::ofstream(dir / "bad.json") << "{\n  \"A\": [[1,]]\n}\n";
  try {
    io::ReadJsonFile(dir / "bad.json");
    FAIL() << "expected FormatError";
  } catch (const io::FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bad.json"), std::string::npos);
    EXPECT_NE(what.find("line 2"), std::string::npos) << what;
    EXPECT_NE(what.find("column"), std::string::npos) << what;
  }
  EXPECT_THROW(io::ReadJsonFile(dir / "missing.json"), io::FormatError);
}

TEST(GainJson, ReadsAndRejects) {
  SynthesisResult result;
  result.status = SynthesisStatus::kCertified;
  result.gain = SofGain{Mat(1, 2, {0.5, -1.25}), -0.3, 0.1};
  const Json doc = io::SynthesisToJson(result, 0.1);
  EXPECT_EQ(io::GainFromJson(doc), Mat(1, 2, {0.5, -1.25}));
  EXPECT_EQ(doc["status"], "Certified");
  EXPECT_EQ(doc["iterations_used"], 0);

  SynthesisResult empty;
  empty.status = SynthesisStatus::kInfeasible;
  const Json none = io::SynthesisToJson(empty, 0.1);
  EXPECT_TRUE(none["K"].is_null());
  EXPECT_THROW(io::GainFromJson(none), io::FormatError);
  EXPECT_THROW(io::GainFromJson(Json::parse("[1]")), io::FormatError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  traj.states = {test::Vec({1, 0, 0}), test::Vec({0.5, 0.25, 0})};
  traj.norms = {1.0, std::sqrt(0.3125)};
  const std::string csv = io::TrajectoryCsv(traj);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,x3,norm");
  EXPECT_NE(csv.find("\n0.5,0.5,0.25,0,"), std::string::npos);
}

TEST(WritePortrait, FilesAndManifest) {
  const fs::path dir = TempDir("portrait") / "nested";
  IntegrationOptions opts;
  opts.dt = 0.1;
  opts.t_final = 1.0;
  const GridSpec grid = GridSpec::Circle(1.0, 3);
  const auto portrait = PhasePortrait(BenchmarkSystem(), std::nullopt, grid,
                                      opts);
  const Json manifest = io::WritePortrait(dir, grid, opts, false, portrait);
  EXPECT_EQ(manifest["files"], Json({"traj_000.csv", "traj_001.csv",
                                     "traj_002.csv"}));
  EXPECT_EQ(manifest["grid"], "circle:1:3");
  EXPECT_EQ(manifest["closed_loop"], false);
  for (const auto& f : {"traj_000.csv", "traj_001.csv", "traj_002.csv",
                        "index.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(io::ReadJsonFile(dir / "index.json"), Json::parse(io::Dump(manifest)));
}

}  // namespace
}  // namespace lossless_sof
