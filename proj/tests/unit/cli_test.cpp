#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dswater/raster.hpp"

namespace fs = std::filesystem;
using namespace dswater;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(DSWATER_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::path(::testing::TempDir()) / "dswater_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const fs::path& default_scene() {
  static const fs::path header = [] {
    const auto prefix = workdir() / "scene" / "scene";
    const auto r = run_cli("synth --out " + prefix.string());
    EXPECT_EQ(r.status, 0) << r.output;
    return fs::path(prefix.string() + ".json");
  }();
  return header;
}

}  // namespace

TEST(Cli, DetectSmoke) {
  const auto out = workdir() / "detect";
  const auto r = run_cli("detect --input " + default_scene().string() + " --out " + out.string());
  ASSERT_EQ(r.status, 0) << r.output;
  for (const char* f : {"report.json", "classmap.ppm", "mass_water.pgm", "mass_nonwater.pgm",
                        "mass_ignorance.pgm"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto report = bytes(out / "report.json");
  EXPECT_NE(report.find("\"confusion\""), std::string::npos);
  EXPECT_NE(report.find("mass_water.pgm"), std::string::npos);
}

TEST(Cli, DetectIsByteIdenticalAcrossRuns) {
  const auto a = workdir() / "det_a";
  const auto b = workdir() / "det_b";
  for (const auto& d : {a, b}) {
    const auto r = run_cli("detect --input " + default_scene().string() + " --out " + d.string() +
                           " --seed 7");
    ASSERT_EQ(r.status, 0) << r.output;
  }
  for (const char* f : {"report.json", "classmap.ppm", "mass_water.pgm", "mass_nonwater.pgm",
                        "mass_ignorance.pgm"}) {
    EXPECT_EQ(bytes(a / f), bytes(b / f)) << f;
  }
}

TEST(Cli, ConstantBandIsADataError) {
  MultiBandRaster flat(8, 8);
  flat.add_band("nir", Grid<double>(8, 8, 1234.0));
  const auto header = workdir() / "flat.json";
  save_raster(flat, header);
  const auto r = run_cli("threshold --input " + header.string());
  EXPECT_EQ(r.status, 2) << r.output;
  EXPECT_NE(r.output.find("degenerate-band"), std::string::npos) << r.output;
}

TEST(Cli, OutOfRangeFlagsAreUsageErrors) {
  const auto scene = default_scene().string();
  const auto out = (workdir() / "bad").string();
  for (const std::string flags : {"--r 1.5", "--k-d 0", "--harvest-threshold 1.0", "--window 4",
                                  "--alpha 2", "--nbins 3", "--no-such-flag 1"}) {
    const auto r = run_cli("detect --input " + scene + " --out " + out + " " + flags);
    EXPECT_EQ(r.status, 1) << flags << "\n" << r.output;
  }
  const auto r = run_cli("detect --input " + scene + " --out " + out + " --r 1.5");
  EXPECT_NE(r.output.find("r must lie in [0, 1]"), std::string::npos) << r.output;
  EXPECT_EQ(run_cli("").status, 1);
  EXPECT_EQ(run_cli("frobnicate").status, 1);
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
  const auto cfg = workdir() / "cfg.json";
  std::ofstream(cfg) << R"({"r": 0.9, "seed": 3})";
  const auto out = workdir() / "cfg_out";
  const auto r = run_cli("detect --input " + default_scene().string() + " --config " + cfg.string() +
                         " --r 0.2 --out " + out.string());
  ASSERT_EQ(r.status, 0) << r.output;
  const auto report = bytes(out / "report.json");
  EXPECT_NE(report.find("\"r\": 0.2"), std::string::npos);
  EXPECT_NE(report.find("\"seed\": 3"), std::string::npos);

  std::ofstream(cfg) << R"({"r": 4})";
  EXPECT_EQ(run_cli("detect --input " + default_scene().string() + " --config " + cfg.string() +
                    " --out " + out.string())
                .status,
            1);
}

TEST(Cli, MissingInputIsAnError) {
  const auto r = run_cli("detect --input /nonexistent/scene.json --out " + (workdir() / "x").string());
  EXPECT_NE(r.status, 0);
}

TEST(Cli, HelpDocumentsEveryFlagAndDefault) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected = {
      {"detect",
       {"--input", "--config", "--out", "--nbins UINT [256]", "--window UINT [3]",
        "--harvest-threshold FLOAT [0.7]", "--per-class UINT [5000]", "--min-samples UINT [50]",
        "--seed UINT [42]", "--r FLOAT [0.1]", "--k-d FLOAT [1]", "--lambda FLOAT [1]",
        "--epochs UINT [50]", "--reg FLOAT [0.001]", "--learning-rate FLOAT [0.1]",
        "--alpha FLOAT [0.95]"}},
      {"threshold", {"--input", "--band TEXT [nir]", "--nbins UINT [256]", "--out"}},
      {"indices", {"--input", "--out"}},
      {"synth", {"--spec", "--out", "--seed UINT [42]"}},
      {"render", {"--input", "--band", "--out", "--lo", "--hi"}},
      {"score", {"--classmap", "--truth", "--out"}},
  };
  for (const auto& [sub, flags] : expected) {
    const auto r = run_cli(sub + " --help");
    EXPECT_EQ(r.status, 0) << sub;
    for (const auto& f : flags) EXPECT_NE(r.output.find(f), std::string::npos) << sub << " " << f;
  }
}

TEST(Cli, OtherSubcommands) {
  const auto scene = default_scene();
  const auto dir = workdir() / "other";
  auto r = run_cli("threshold --input " + scene.string() + " --out " + dir.string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("t = "), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "histogram.csv"));
  EXPECT_TRUE(fs::exists(dir / "fit.csv"));

  r = run_cli("indices --input " + scene.string() + " --out " + dir.string());
  ASSERT_EQ(r.status, 0) << r.output;
  for (const char* f : {"ndvi.pgm", "ndwi.pgm", "re_ndwi.pgm"}) EXPECT_TRUE(fs::exists(dir / f)) << f;

  r = run_cli("render --input " + scene.string() + " --band nir --out " + (dir / "nir.pgm").string());
  ASSERT_EQ(r.status, 0) << r.output;
  r = run_cli("render --input " + scene.string() + " --band red green blue --out " +
              (dir / "rgb.ppm").string());
  ASSERT_EQ(r.status, 0) << r.output;
  r = run_cli("render --input " + scene.string() + " --band red green --out " + (dir / "two.ppm").string());
  EXPECT_EQ(r.status, 1) << r.output;

  const auto det = workdir() / "detect_for_score";
  ASSERT_EQ(run_cli("detect --input " + scene.string() + " --out " + det.string()).status, 0);
  r = run_cli("score --classmap " + (det / "classmap.ppm").string() + " --truth " +
              (scene.parent_path() / "truth.pgm").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("\"recall\""), std::string::npos);
}
