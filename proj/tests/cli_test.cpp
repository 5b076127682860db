#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "currseg/png_io.hpp"
#include "currseg/rng.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = CURRSEG_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("currseg_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string(kCli) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// small/fast synthetic settings for CLI runs
fs::path write_small_config(const fs::path& dir, int lesions_max = 1) {
  nlohmann::json cfg = {
      {"seed", 4711},
      {"jobs", 2},
      {"synthetic",
       {{"width", 96},
        {"height", 96},
        {"lesions_min", 1},
        {"lesions_max", lesions_max},
        {"base_radius", 14.0},
        {"edge_fuzz_sigma", 2.0},
        {"noise_sigma", 0.02}}}};
  const fs::path p = dir / "config.json";
  std::ofstream f(p);
  f << cfg.dump(2);
  return p;
}

std::uint64_t hash_file(const fs::path& p) {
  const std::string bytes = slurp(p);
  return currseg::fnv1a64(bytes.data(), bytes.size());
}

}  // namespace

TEST(CliSynth, GeneratesPairsAndEchoesConfig) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto out = dir.path / "data" / "test";
  const auto r = run_cli("--config " + config.string() + " --out " + out.string() +
                             " synth --count 5",
                         dir.path);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("5 image/mask pairs"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "images" / "case_0004.png"));
  EXPECT_TRUE(fs::exists(out / "masks" / "case_0004.png"));
  EXPECT_TRUE(fs::exists(out / "effective_config.json"));
  // the echo reflects the flag override of the output dir
  const auto echoed = nlohmann::json::parse(slurp(out / "effective_config.json"));
  EXPECT_EQ(echoed["output"]["dir"].get<std::string>(), out.string());
  EXPECT_EQ(echoed["seed"].get<std::uint64_t>(), 4711u);
}

TEST(CliSynth, CountZeroIsFineAndNoted) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto r = run_cli("--config " + config.string() + " --out " +
                             (dir.path / "empty").string() + " synth --count 0",
                         dir.path);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("empty dataset"), std::string::npos);
}

TEST(CliConfig, UnknownKeyIsExitTwoNamingTheKey) {
  TempDir dir;
  const fs::path bad = dir.path / "bad.json";
  {
    std::ofstream f(bad);
    f << R"({"curriculum": {"stps": 2}})";
  }
  const auto r = run_cli("--config " + bad.string() + " synth --count 1", dir.path);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("curriculum.stps"), std::string::npos);
}

TEST(CliConfig, MalformedJsonIsExitTwo) {
  TempDir dir;
  const fs::path bad = dir.path / "bad.json";
  {
    std::ofstream f(bad);
    f << "{ not json";
  }
  const auto r = run_cli("--config " + bad.string() + " synth --count 1", dir.path);
  EXPECT_EQ(r.exit_code, 2);
}

TEST(CliRun, WritesArtifactsAndStageMetrics) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto data = dir.path / "data";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " + data.string() +
                        " synth --count 2",
                    dir.path)
                .exit_code,
            0);
  const auto out = dir.path / "runout";
  const auto image = data / "images" / "case_0001.png";
  const auto gt = data / "masks" / "case_0001.png";
  const auto r = run_cli("--config " + config.string() + " --out " + out.string() +
                             " run --image " + image.string() + " --gt " +
                             gt.string(),
                         dir.path);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "final_mask.png"));
  EXPECT_TRUE(fs::exists(out / "trace.json"));
  EXPECT_TRUE(fs::exists(out / "overlay.png"));
  // one dice line per stage
  EXPECT_NE(r.out.find("stage 1: dice="), std::string::npos);
  EXPECT_NE(r.out.find("stage 2: dice="), std::string::npos);
}

TEST(CliRun, MissingImageIsDataExitCode) {
  TempDir dir;
  const auto r = run_cli("--out " + (dir.path / "o").string() +
                             " run --image /nope/missing.png",
                         dir.path);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("missing.png"), std::string::npos);
}

TEST(CliEval, UnknownScenarioListsValidNames) {
  TempDir dir;
  const auto r = run_cli("eval --data /tmp --split test --scenario boxes", dir.path);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("box-plus-mask"), std::string::npos);
}

TEST(CliEval, MissingDatasetIsDataExitCode) {
  TempDir dir;
  const auto r = run_cli("eval --data " + (dir.path / "nothere").string() +
                             " --split test",
                         dir.path);
  EXPECT_EQ(r.exit_code, 3);
}

TEST(CliEval, RunsAndIsByteDeterministic) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto root = dir.path / "root";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " +
                        (root / "test").string() + " synth --count 4",
                    dir.path)
                .exit_code,
            0);
  const auto r1 = run_cli("--config " + config.string() + " --out " +
                              (dir.path / "e1").string() + " eval --data " +
                              root.string() + " --split test --scenario box-only",
                          dir.path);
  EXPECT_EQ(r1.exit_code, 0) << r1.err;
  EXPECT_NE(r1.out.find("box-only"), std::string::npos);
  const auto r2 = run_cli("--config " + config.string() + " --out " +
                              (dir.path / "e2").string() + " eval --data " +
                              root.string() + " --split test --scenario box-only",
                          dir.path);
  EXPECT_EQ(r2.exit_code, 0);
  EXPECT_EQ(hash_file(dir.path / "e1" / "report.csv"),
            hash_file(dir.path / "e2" / "report.csv"));
  EXPECT_EQ(hash_file(dir.path / "e1" / "summary.md"),
            hash_file(dir.path / "e2" / "summary.md"));
}

TEST(CliAblate, PrintsFiveScenarioRows) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto root = dir.path / "root";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " +
                        (root / "test").string() + " synth --count 3",
                    dir.path)
                .exit_code,
            0);
  const auto r = run_cli("--config " + config.string() + " --out " +
                             (dir.path / "ab").string() + " ablate --data " +
                             root.string() + " --split test",
                         dir.path);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  for (const char* name : {"point-only", "box-only", "box-plus-mask",
                           "point-plus-box-simultaneous", "full-curriculum"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  EXPECT_TRUE(fs::exists(dir.path / "ab" / "summary.md"));
}

TEST(CliViz, RendersCompositeFromTrace) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto data = dir.path / "data";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " + data.string() +
                        " synth --count 1",
                    dir.path)
                .exit_code,
            0);
  const auto out = dir.path / "runout";
  const auto image = data / "images" / "case_0000.png";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " + out.string() +
                        " run --image " + image.string(),
                    dir.path)
                .exit_code,
            0);
  const auto r = run_cli("viz --trace " + (out / "trace.json").string() +
                             " --image " + image.string() + " --out-png " +
                             (dir.path / "viz.png").string(),
                         dir.path);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const auto raster = currseg::png::read_file(dir.path / "viz.png");
  EXPECT_EQ(raster.width, 96 * 3);  // original + 2 stages, no gt in viz
  EXPECT_EQ(raster.height, 96);
}

TEST(CliEnv, SeedOverrideChangesTheData) {
  TempDir dir;
  const auto config = write_small_config(dir.path);
  const auto a = dir.path / "a";
  const auto b = dir.path / "b";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " + a.string() +
                        " synth --count 1",
                    dir.path)
                .exit_code,
            0);
  ::setenv("CURRSEG_SEED", "999", 1);
  const auto r = run_cli("--config " + config.string() + " --out " + b.string() +
                             " synth --count 1",
                         dir.path);
  ::unsetenv("CURRSEG_SEED");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(hash_file(a / "images" / "case_0000.png"),
            hash_file(b / "images" / "case_0000.png"));
  const auto echoed = nlohmann::json::parse(slurp(b / "effective_config.json"));
  EXPECT_EQ(echoed["seed"].get<std::uint64_t>(), 999u);
}

TEST(CliBackend, ExternalAdapterViaConfig) {
  TempDir dir;
  nlohmann::json cfg = {
      {"seed", 99},
      {"backend",
       {{"type", "external"},
        {"command", CURRSEG_ADAPTER_ECHO_PATH},
        {"timeout_seconds", 20.0},
        {"exchange_dir", (dir.path / "xchg").string()}}},
      {"synthetic",
       {{"width", 64}, {"height", 64}, {"lesions_max", 1}, {"base_radius", 12.0}}}};
  const fs::path config = dir.path / "ext.json";
  {
    std::ofstream f(config);
    f << cfg.dump(2);
  }
  const auto root = dir.path / "root";
  ASSERT_EQ(run_cli("--config " + config.string() + " --out " +
                        (root / "test").string() + " synth --count 2",
                    dir.path)
                .exit_code,
            0);
  const auto r = run_cli("--config " + config.string() + " --out " +
                             (dir.path / "ev").string() + " eval --data " +
                             root.string() + " --split test --scenario box-only",
                         dir.path);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir.path / "ev" / "report.csv"));
  // the echo adapter rasterizes the proposed boxes; scores must be sane
  EXPECT_NE(r.out.find("box-only"), std::string::npos);
}

TEST(CliBackend, ExternalWithoutCommandIsConfigError) {
  TempDir dir;
  const fs::path config = dir.path / "bad.json";
  {
    std::ofstream f(config);
    f << R"({"backend": {"type": "external"}})";
  }
  const auto r = run_cli("--config " + config.string() + " synth --count 1",
                         dir.path);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("backend.command"), std::string::npos);
}

TEST(CliHelp, ExitsZero) {
  TempDir dir;
  EXPECT_EQ(run_cli("--help", dir.path).exit_code, 0);
  EXPECT_EQ(run_cli("synth --help", dir.path).exit_code, 0);
}

TEST(CliParse, MissingRequiredOptionIsExitTwo) {
  TempDir dir;
  EXPECT_EQ(run_cli("synth", dir.path).exit_code, 2);   // --count required
  EXPECT_EQ(run_cli("", dir.path).exit_code, 2);        // subcommand required
  EXPECT_EQ(run_cli("frobnicate", dir.path).exit_code, 2);
}
