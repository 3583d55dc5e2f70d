#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dswater/grid.hpp"
#include "dswater/raster.hpp"

namespace dswater {

enum class Truth : std::uint8_t { water = 0, land = 1, confuser = 2 };

struct BandStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Per-band statistics in the order blue, green, red, rededge, nir.
using MaterialProfile = std::array<BandStats, 5>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SceneSpec {
  std::size_t width = 512;
  std::size_t height = 512;
  std::uint64_t seed = 42;
  /// Control points of the main river, in pixel coordinates.
  std::vector<Point> river{{0.0, 90.0}, {120.0, 150.0}, {250.0, 230.0},
                           {360.0, 330.0}, {450.0, 420.0}, {512.0, 470.0}};
  double river_width = 22.0;
  std::size_t n_streams = 4;
  /// Cloud and shadow discs alternate, starting with a cloud.
  std::size_t cloud_patches = 8;
  double cloud_radius_min = 14.0;
  double cloud_radius_max = 26.0;
  MaterialProfile water{{{4500, 60}, {4000, 60}, {3500, 60}, {3200, 60}, {3000, 60}}};
  MaterialProfile vegetation{{{3000, 200}, {3800, 200}, {2800, 200}, {5500, 250}, {9000, 200}}};
  MaterialProfile cloud{{{5000, 150}, {4300, 150}, {3600, 150}, {4600, 150}, {5400, 60}}};
  MaterialProfile shadow{{{2200, 100}, {2300, 100}, {1800, 100}, {3000, 100}, {5400, 60}}};
  /// Sensor noise added to every band on top of the material spread.
  double noise_std = 20.0;

  /// Throws invalid-argument on non-positive sizes or mis-ordered NIR means.
  void validate() const;
};

SceneSpec scene_spec_from_json(std::string_view text, SceneSpec base = {});
std::string scene_spec_to_json(const SceneSpec& spec);

struct Disc {
  Point center;
  double radius = 0.0;
  bool is_cloud = true;
};

/// Geometry drawn by `generate`, derived from the spec and its seed.
struct SceneLayout {
  std::vector<Point> river;
  std::vector<std::vector<Point>> streams;
  std::vector<double> stream_widths;
  std::vector<Disc> discs;
};

SceneLayout scene_layout(const SceneSpec& spec);

/// Sum of length times width over the river and streams, clipped to the
/// image. Overlaps are counted twice.
double analytic_water_area(const SceneSpec& spec);

struct GeneratedScene {
  MultiBandRaster raster;
  Grid<Truth> truth;
  std::vector<std::string> warnings;
};

/// Water where a linear feature covers at least half the pixel, confusers
/// where a disc does, vegetation elsewhere. Band values mix the material
/// spectra by coverage and are floored at 0. Pure function of the spec.
GeneratedScene generate(const SceneSpec& spec);

struct SceneScore {
  double precision = 0.0;
  double recall = 0.0;
  double confuser_capture = 0.0;
  double ignorance_fraction = 0.0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t water_ignorance = 0;
  std::size_t confusers = 0;
  std::size_t confusers_captured = 0;
  std::size_t ignorance = 0;
};

/// Pixels labelled ignorance count in neither precision nor recall. Confuser
/// capture is the share of confuser pixels not labelled water. Ratios with a
/// zero denominator are 0.
SceneScore score(const Grid<Label>& predicted, const Grid<Truth>& truth);
std::string to_json(const SceneScore& s);

/// Truth map as P5: water 255, confuser 128, land 0.
void write_truth(const Grid<Truth>& truth, const std::filesystem::path& path);
Grid<Truth> read_truth(const std::filesystem::path& path);

}  // namespace dswater
