#include "dswater/scene_gen.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "dswater/error.hpp"
#include "dswater/random.hpp"
#include "dswater/spectral_model.hpp"

using namespace dswater;
namespace fs = std::filesystem;

namespace {

SceneSpec quiet_spec() {
  SceneSpec spec;
  spec.cloud_patches = 0;
  spec.noise_std = 0.0;
  for (auto* profile : {&spec.water, &spec.vegetation, &spec.cloud, &spec.shadow}) {
    for (auto& band : *profile) band.stddev = 0.0;
  }
  return spec;
}

}  // namespace

TEST(Generate, NoCloudsNoNoiseTruthIsTheMidpointMask) {
  const auto spec = quiet_spec();
  const auto scene = generate(spec);
  const double mid = 0.5 * (spec.water[4].mean + spec.vegetation[4].mean);
  const auto& nir = scene.raster.band("nir");
  std::size_t water = 0;
  for (std::size_t i = 0; i < nir.size(); ++i) {
    const Truth expect = nir[i] <= mid ? Truth::water : Truth::land;
    ASSERT_EQ(scene.truth[i], expect) << "pixel " << i << " nir " << nir[i];
    water += expect == Truth::water;
  }
  EXPECT_GT(water, 0u);
}

TEST(Generate, SameSeedSameSceneOtherSeedOtherScene) {
  SceneSpec spec;
  spec.width = 128;
  spec.height = 96;
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(a.raster, b.raster);
  EXPECT_EQ(a.truth, b.truth);
  spec.seed = 43;
  EXPECT_NE(generate(spec).raster, a.raster);
}

TEST(Generate, BandsAndShape) {
  const auto scene = generate(SceneSpec{});
  EXPECT_EQ(scene.raster.width(), 512u);
  EXPECT_EQ(scene.raster.height(), 512u);
  EXPECT_EQ(scene.raster.band_names(),
            (std::vector<std::string>{"blue", "green", "red", "rededge", "nir"}));
  for (const auto& name : scene.raster.band_names()) {
    for (double v : scene.raster.band(name).values()) EXPECT_GE(v, 0.0);
  }
  EXPECT_TRUE(scene.warnings.empty());
}

TEST(Generate, WaterFractionNearTheAnalyticArea) {
  for (std::uint64_t seed : {42u, 7u, 1234u}) {
    SceneSpec spec;
    spec.seed = seed;
    spec.cloud_patches = 0;
    const auto scene = generate(spec);
    std::size_t water = 0;
    for (Truth t : scene.truth.values()) water += t == Truth::water;
    const double area = analytic_water_area(spec);
    EXPECT_NEAR(static_cast<double>(water), area, 0.2 * area) << "seed " << seed;
  }
}

TEST(Generate, AnalyticAreaOfAStraightRiver) {
  SceneSpec spec;
  spec.river = {{-50.0, 100.0}, {600.0, 100.0}};
  spec.river_width = 10.0;
  spec.n_streams = 0;
  EXPECT_DOUBLE_EQ(analytic_water_area(spec), 512.0 * 10.0);
  spec.cloud_patches = 0;
  const auto scene = generate(spec);
  std::size_t water = 0;
  for (Truth t : scene.truth.values()) water += t == Truth::water;
  EXPECT_NEAR(static_cast<double>(water), 5120.0, 512.0);
  EXPECT_FALSE(scene.warnings.empty());
}

TEST(Generate, DefaultNirHistogramIsBimodal) {
  const auto scene = generate(SceneSpec{});
  const auto an = analyze_threshold(scene.raster.band("nir").values());
  EXPECT_LT(an.peaks.first, an.peaks.second);
  EXPECT_GT(an.params.t, 3000.0);
  EXPECT_LT(an.params.t, 9000.0);
}

TEST(Generate, LayoutAlternatesCloudsAndShadows) {
  const auto layout = scene_layout(SceneSpec{});
  ASSERT_EQ(layout.discs.size(), 8u);
  for (std::size_t i = 0; i < layout.discs.size(); ++i) {
    EXPECT_EQ(layout.discs[i].is_cloud, i % 2 == 0);
    EXPECT_GE(layout.discs[i].radius, 14.0);
    EXPECT_LE(layout.discs[i].radius, 26.0);
  }
  EXPECT_EQ(layout.streams.size(), 4u);
}

TEST(SceneSpec, ValidationAndJsonRoundTrip) {
  SceneSpec spec;
  spec.seed = 5;
  spec.river = {{1, 2}, {3, 4}};
  spec.cloud.at(4).mean = 6000.0;
  const auto back = scene_spec_from_json(scene_spec_to_json(spec));
  EXPECT_EQ(scene_spec_to_json(back), scene_spec_to_json(spec));
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.cloud[4].mean, 6000.0);

  SceneSpec bad;
  bad.cloud[4].mean = 9500.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = SceneSpec{};
  bad.width = 0;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(scene_spec_from_json(R"({"nonsense": 1})"), Error);
  EXPECT_THROW(scene_spec_from_json(R"({"width": -3})"), Error);
}

// Score ---------------------------------------------------------------------------

TEST(Score, PerfectPrediction) {
  Grid<Truth> truth(3, 1, {Truth::water, Truth::land, Truth::confuser});
  Grid<Label> pred(3, 1, {Label::water, Label::non_water, Label::non_water});
  const auto s = score(pred, truth);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.confuser_capture, 1.0);
  EXPECT_EQ(s.ignorance_fraction, 0.0);
}

TEST(Score, AllIgnorance) {
  Grid<Truth> truth(3, 1, {Truth::water, Truth::land, Truth::confuser});
  Grid<Label> pred(3, 1, Label::ignorance);
  const auto s = score(pred, truth);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.confuser_capture, 1.0);
  EXPECT_EQ(s.ignorance_fraction, 1.0);
}

TEST(Score, RandomPredictionsMatchCountingOracle) {
  Rng rng(91);
  const Label labels[] = {Label::water, Label::non_water, Label::ignorance};
  const Truth truths[] = {Truth::water, Truth::land, Truth::confuser};
  for (int trial = 0; trial < 50; ++trial) {
    Grid<Label> pred(23, 17);
    Grid<Truth> truth(23, 17);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred[i] = labels[rng.index(3)];
      truth[i] = truths[rng.index(3)];
    }
    double tp = 0, fp = 0, fn = 0, conf = 0, captured = 0, ign = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool is_water = truth[i] == Truth::water;
      if (pred[i] == Label::ignorance) ++ign;
      if (pred[i] == Label::water && is_water) ++tp;
      if (pred[i] == Label::water && !is_water) ++fp;
      if (pred[i] == Label::non_water && is_water) ++fn;
      if (truth[i] == Truth::confuser) {
        ++conf;
        if (pred[i] != Label::water) ++captured;
      }
    }
    const auto s = score(pred, truth);
    EXPECT_DOUBLE_EQ(s.precision, tp / (tp + fp));
    EXPECT_DOUBLE_EQ(s.recall, tp / (tp + fn));
    EXPECT_DOUBLE_EQ(s.confuser_capture, captured / conf);
    EXPECT_DOUBLE_EQ(s.ignorance_fraction, ign / static_cast<double>(pred.size()));
  }
}

TEST(Score, ShapeMismatch) {
  try {
    score(Grid<Label>(2, 2), Grid<Truth>(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(Truth, PgmRoundTrip) {
  const fs::path dir = fs::path(::testing::TempDir()) / "dswater_scene_test";
  fs::create_directories(dir);
  Grid<Truth> truth(3, 2, {Truth::water, Truth::land, Truth::confuser, Truth::land, Truth::water, Truth::water});
  write_truth(truth, dir / "truth.pgm");
  EXPECT_EQ(read_truth(dir / "truth.pgm"), truth);
}
