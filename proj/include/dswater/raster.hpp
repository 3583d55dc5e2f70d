#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dswater/grid.hpp"
#include "dswater/image_io.hpp"

namespace dswater {

/// Band names the detection pipeline reads.
namespace band {
inline constexpr std::string_view blue = "blue";
inline constexpr std::string_view green = "green";
inline constexpr std::string_view red = "red";
inline constexpr std::string_view rededge = "rededge";
inline constexpr std::string_view nir = "nir";
}  // namespace band

struct Band {
  std::string name;
  Grid<double> values;
  friend bool operator==(const Band&, const Band&) = default;
};

/// Named bands of raw digital numbers over a shared width x height grid.
class MultiBandRaster {
 public:
  MultiBandRaster(std::size_t width, std::size_t height);

  /// Appends a band. Throws on a duplicate name, a shape mismatch or a
  /// non-finite value.
  void add_band(std::string name, Grid<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  const std::vector<Band>& bands() const noexcept { return bands_; }
  std::vector<std::string> band_names() const;

  bool has_band(std::string_view name) const noexcept;
  /// Throws missing-band when absent.
  const Grid<double>& band(std::string_view name) const;

  friend bool operator==(const MultiBandRaster&, const MultiBandRaster&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Band> bands_;
};

/// Reads a raster container: a JSON header plus a raw little-endian float64
/// band-sequential data file. See docs/formats.md.
MultiBandRaster load_raster(const std::filesystem::path& header_path);

/// Writes `<stem>.json` (at `header_path`) and the data file next to it,
/// named after the header with the `.band` extension.
void save_raster(const MultiBandRaster& raster, const std::filesystem::path& header_path);

enum class Label : std::uint8_t { water = 0, non_water = 1, ignorance = 2 };

std::string_view to_string(Label label) noexcept;

/// Per-pixel masses on {water}, {non-water} and the whole frame.
struct MassTriple {
  double water = 0.0;
  double non_water = 0.0;
  double ignorance = 1.0;
  friend bool operator==(const MassTriple&, const MassTriple&) = default;
};

/// Decision map of the pipeline with optional per-pixel fused masses.
struct ClassMap {
  Grid<Label> labels;
  std::optional<Grid<MassTriple>> masses;

  std::size_t width() const noexcept { return labels.width(); }
  std::size_t height() const noexcept { return labels.height(); }
};

Rgb label_color(Label label) noexcept;
/// Inverse of `label_color`; throws invalid-argument for other colours.
Label label_from_color(Rgb color);

/// Writes the label map as a P6 image: water blue, non-water green,
/// ignorance red.
void render_classmap(const ClassMap& map, const std::filesystem::path& path);

/// Reads a map written by `render_classmap`.
ClassMap read_classmap(const std::filesystem::path& path);

enum class MassChannel { water, non_water, ignorance };

/// One mass channel as a P5 image with value round(255 * mass).
Grid<std::uint8_t> mass_image(const ClassMap& map, MassChannel channel);
void render_mass_channel(const ClassMap& map, MassChannel channel,
                         const std::filesystem::path& path);

/// Linear stretch of a band to 0..255 between `lo` and `hi`.
Grid<std::uint8_t> stretch_to_bytes(const Grid<double>& values, double lo, double hi);

}  // namespace dswater
