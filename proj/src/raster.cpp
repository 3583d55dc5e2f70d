#include "dswater/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "dswater/error.hpp"

namespace dswater {

namespace {

constexpr std::string_view kFormat = "dswater-raster";
constexpr std::string_view kEncoding = "float64-le";
constexpr std::string_view kInterleave = "band-sequential";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return out;
  }
}

}  // namespace

MultiBandRaster::MultiBandRaster(std::size_t width, std::size_t height)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) {
    throw Error(Errc::invalid_argument, "raster dimensions must be positive");
  }
}

void MultiBandRaster::add_band(std::string name, Grid<double> values) {
  if (name.empty()) throw Error(Errc::invalid_argument, "band name must not be empty");
  if (has_band(name)) throw Error(Errc::invalid_argument, "duplicate band '" + name + "'");
  if (values.width() != width_ || values.height() != height_) {
    throw Error(Errc::dimension_mismatch,
                "band '" + name + "' is " + std::to_string(values.width()) + "x" +
                    std::to_string(values.height()) + ", raster is " + std::to_string(width_) +
                    "x" + std::to_string(height_));
  }
  for (double v : values.values()) {
    if (!std::isfinite(v)) {
      throw Error(Errc::non_finite_value, "band '" + name + "' holds a non-finite value");
    }
  }
  bands_.push_back(Band{std::move(name), std::move(values)});
}

std::vector<std::string> MultiBandRaster::band_names() const {
  std::vector<std::string> names;
  names.reserve(bands_.size());
  for (const auto& b : bands_) names.push_back(b.name);
  return names;
}

bool MultiBandRaster::has_band(std::string_view name) const noexcept {
  return std::any_of(bands_.begin(), bands_.end(), [&](const Band& b) { return b.name == name; });
}

const Grid<double>& MultiBandRaster::band(std::string_view name) const {
  for (const auto& b : bands_) {
    if (b.name == name) return b.values;
  }
  throw Error(Errc::missing_band, "raster has no band named '" + std::string(name) + "'");
}

MultiBandRaster load_raster(const std::filesystem::path& header_path) {
  std::ifstream header_in(header_path);
  if (!header_in) {
    throw Error(Errc::missing_file, "cannot open raster header '" + header_path.string() + "'");
  }
  const auto bad = [&](const std::string& why) {
    return Error(Errc::malformed_header, "'" + header_path.string() + "': " + why);
  };

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_in);
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("invalid JSON: ") + e.what());
  }

  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::string> names;
  std::string data_file;
  try {
    if (header.value("format", std::string{}) != kFormat) throw bad("format is not dswater-raster");
    if (header.value("encoding", std::string{kEncoding}) != kEncoding) {
      throw bad("unsupported encoding");
    }
    if (header.value("interleave", std::string{kInterleave}) != kInterleave) {
      throw bad("unsupported interleave");
    }
    const auto w = header.at("width").get<long long>();
    const auto h = header.at("height").get<long long>();
    if (w <= 0 || h <= 0) throw bad("width and height must be positive");
    width = static_cast<std::size_t>(w);
    height = static_cast<std::size_t>(h);
    names = header.at("bands").get<std::vector<std::string>>();
    data_file = header.at("data_file").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("missing or mistyped field: ") + e.what());
  }
  if (names.empty()) throw bad("band list is empty");
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
    throw bad("duplicate band names");
  }
  if (data_file.empty()) throw bad("data_file is empty");

  const std::filesystem::path data_path = header_path.parent_path() / data_file;
  std::ifstream data_in(data_path, std::ios::binary);
  if (!data_in) throw Error(Errc::missing_file, "cannot open raster data '" + data_path.string() + "'");

  const std::size_t plane = width * height;
  const std::size_t expected = plane * names.size() * sizeof(double);
  std::vector<std::uint64_t> raw(plane * names.size());
  data_in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected));
  const auto got = static_cast<std::size_t>(data_in.gcount());
  const bool trailing = data_in.peek() != std::char_traits<char>::eof();
  if (got != expected || trailing) {
    std::error_code ec;
    const auto actual = std::filesystem::file_size(data_path, ec);
    throw Error(Errc::payload_size,
                "'" + data_path.string() + "' holds " + (ec ? std::string("?") : std::to_string(actual)) +
                    " bytes, header requires " + std::to_string(expected));
  }

  MultiBandRaster raster(width, height);
  for (std::size_t b = 0; b < names.size(); ++b) {
    std::vector<double> values(plane);
    for (std::size_t i = 0; i < plane; ++i) {
      const std::uint64_t bits = to_little_endian(raw[b * plane + i]);
      std::memcpy(&values[i], &bits, sizeof(double));
    }
    raster.add_band(names[b], Grid<double>(width, height, std::move(values)));
  }
  return raster;
}

void save_raster(const MultiBandRaster& raster, const std::filesystem::path& header_path) {
  if (raster.bands().empty()) {
    throw Error(Errc::invalid_argument, "refusing to save a raster without bands");
  }
  std::filesystem::path data_path = header_path;
  data_path.replace_extension(".band");
  if (data_path == header_path) {
    throw Error(Errc::invalid_argument, "header path must not end in .band");
  }

  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["width"] = raster.width();
  header["height"] = raster.height();
  header["bands"] = raster.band_names();
  header["data_file"] = data_path.filename().string();
  header["encoding"] = kEncoding;
  header["interleave"] = kInterleave;

  std::ofstream data_out(data_path, std::ios::binary | std::ios::trunc);
  if (!data_out) throw Error(Errc::io_failure, "cannot write '" + data_path.string() + "'");
  std::vector<std::uint64_t> raw;
  raw.reserve(raster.width() * raster.height());
  for (const Band& b : raster.bands()) {
    raw.clear();
    for (double v : b.values.values()) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof(double));
      raw.push_back(to_little_endian(bits));
    }
    data_out.write(reinterpret_cast<const char*>(raw.data()),
                   static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  }
  data_out.flush();
  if (!data_out) throw Error(Errc::io_failure, "write to '" + data_path.string() + "' failed");

  std::ofstream header_out(header_path, std::ios::trunc);
  if (!header_out) throw Error(Errc::io_failure, "cannot write '" + header_path.string() + "'");
  header_out << header.dump(2) << '\n';
  header_out.flush();
  if (!header_out) throw Error(Errc::io_failure, "write to '" + header_path.string() + "' failed");
}

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::water: return "water";
    case Label::non_water: return "non-water";
    case Label::ignorance: return "ignorance";
  }
  return "unknown";
}

Rgb label_color(Label label) noexcept {
  switch (label) {
    case Label::water: return {0, 0, 255};
    case Label::non_water: return {0, 160, 0};
    case Label::ignorance: return {255, 0, 0};
  }
  return {};
}

Label label_from_color(Rgb color) {
  for (Label l : {Label::water, Label::non_water, Label::ignorance}) {
    if (label_color(l) == color) return l;
  }
  throw Error(Errc::invalid_argument, "colour is not a class-map label colour");
}

void render_classmap(const ClassMap& map, const std::filesystem::path& path) {
  Grid<Rgb> image(map.width(), map.height());
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = label_color(map.labels[i]);
  write_ppm(path, image);
}

ClassMap read_classmap(const std::filesystem::path& path) {
  const Grid<Rgb> image = read_ppm(path);
  ClassMap map{Grid<Label>(image.width(), image.height()), std::nullopt};
  for (std::size_t i = 0; i < image.size(); ++i) map.labels[i] = label_from_color(image[i]);
  return map;
}

Grid<std::uint8_t> mass_image(const ClassMap& map, MassChannel channel) {
  if (!map.masses) throw Error(Errc::invalid_argument, "class map carries no masses");
  const auto& masses = *map.masses;
  Grid<std::uint8_t> image(masses.width(), masses.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const MassTriple& m = masses[i];
    const double v = channel == MassChannel::water       ? m.water
                     : channel == MassChannel::non_water ? m.non_water
                                                         : m.ignorance;
    image[i] = unit_to_byte(v);
  }
  return image;
}

void render_mass_channel(const ClassMap& map, MassChannel channel,
                         const std::filesystem::path& path) {
  write_pgm(path, mass_image(map, channel));
}

Grid<std::uint8_t> stretch_to_bytes(const Grid<double>& values, double lo, double hi) {
  if (!(hi > lo)) throw Error(Errc::invalid_argument, "stretch range must be non-empty");
  Grid<std::uint8_t> image(values.width(), values.height());
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = unit_to_byte((values[i] - lo) / (hi - lo));
  return image;
}

}  // namespace dswater
