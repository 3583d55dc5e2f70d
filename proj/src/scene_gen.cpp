#include "dswater/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <json.hpp>
#include <sstream>

#include "dswater/error.hpp"
#include "dswater/image_io.hpp"
#include "dswater/random.hpp"

namespace dswater {

namespace {

constexpr std::array<std::string_view, 5> kBandOrder{band::blue, band::green, band::red,
                                                     band::rededge, band::nir};
constexpr std::size_t kNir = 4;

double segment_distance(Point p, Point a, Point b) noexcept {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

// Length of segment ab inside [0, w] x [0, h] (Liang-Barsky).
double clipped_length(Point a, Point b, double w, double h) noexcept {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  double t0 = 0.0;
  double t1 = 1.0;
  const std::array<double, 4> p{-dx, dx, -dy, dy};
  const std::array<double, 4> q{a.x, w - a.x, a.y, h - a.y};
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return 0.0;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (t1 <= t0) return 0.0;
  return (t1 - t0) * std::hypot(dx, dy);
}

double polyline_length(const std::vector<Point>& line, double w, double h) noexcept {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) len += clipped_length(line[i], line[i + 1], w, h);
  return len;
}

// Raises coverage[pixel] to the antialiased coverage of a thick polyline.
void paint_polyline(Grid<double>& coverage, const std::vector<Point>& line, double width) {
  const double half = 0.5 * width;
  const double reach = half + 0.5;
  const auto w = static_cast<double>(coverage.width());
  const auto h = static_cast<double>(coverage.height());
  for (std::size_t s = 0; s + 1 < line.size(); ++s) {
    const Point a = line[s];
    const Point b = line[s + 1];
    const double x0 = std::max(0.0, std::floor(std::min(a.x, b.x) - reach));
    const double x1 = std::min(w, std::ceil(std::max(a.x, b.x) + reach));
    const double y0 = std::max(0.0, std::floor(std::min(a.y, b.y) - reach));
    const double y1 = std::min(h, std::ceil(std::max(a.y, b.y) + reach));
    for (double y = y0; y < y1; y += 1.0) {
      for (double x = x0; x < x1; x += 1.0) {
        const double d = segment_distance({x + 0.5, y + 0.5}, a, b);
        const double c = std::clamp(reach - d, 0.0, 1.0);
        auto& cell = coverage(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
        cell = std::max(cell, c);
      }
    }
  }
}

void check_profile(const MaterialProfile& p, const char* name) {
  for (const auto& b : p) {
    if (!std::isfinite(b.mean) || !std::isfinite(b.stddev) || b.mean < 0.0 || b.stddev < 0.0) {
      throw Error(Errc::invalid_argument,
                  std::string(name) + " profile needs finite, non-negative means and spreads");
    }
  }
}

nlohmann::ordered_json profile_json(const MaterialProfile& p) {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < p.size(); ++i) {
    j[std::string(kBandOrder[i])] = {p[i].mean, p[i].stddev};
  }
  return j;
}

MaterialProfile profile_from_json(const nlohmann::json& j, MaterialProfile base, const std::string& name) {
  if (!j.is_object()) throw Error(Errc::invalid_argument, "profile '" + name + "' must be an object");
  for (const auto& [key, v] : j.items()) {
    const auto it = std::find(kBandOrder.begin(), kBandOrder.end(), key);
    if (it == kBandOrder.end()) {
      throw Error(Errc::invalid_argument, "profile '" + name + "' has unknown band '" + key + "'");
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw Error(Errc::invalid_argument,
                  "profile '" + name + "' band '" + key + "' must be [mean, stddev]");
    }
    base[static_cast<std::size_t>(it - kBandOrder.begin())] = {v[0].get<double>(), v[1].get<double>()};
  }
  return base;
}

}  // namespace

void SceneSpec::validate() const {
  if (width == 0 || height == 0) throw Error(Errc::invalid_argument, "scene size must be positive");
  if (river.size() == 1) throw Error(Errc::invalid_argument, "river needs at least two points");
  for (const auto& p : river) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(Errc::invalid_argument, "river points must be finite");
    }
  }
  if (!(river_width >= 0.0) || !std::isfinite(river_width)) {
    throw Error(Errc::invalid_argument, "river width must be >= 0");
  }
  if (!(cloud_radius_min > 0.0 && cloud_radius_min <= cloud_radius_max) ||
      !std::isfinite(cloud_radius_max)) {
    throw Error(Errc::invalid_argument, "cloud radius range must satisfy 0 < min <= max");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw Error(Errc::invalid_argument, "noise_std must be >= 0");
  }
  check_profile(water, "water");
  check_profile(vegetation, "vegetation");
  check_profile(cloud, "cloud");
  check_profile(shadow, "shadow");
  if (!(water[kNir].mean < cloud[kNir].mean && cloud[kNir].mean < vegetation[kNir].mean)) {
    throw Error(Errc::invalid_argument,
                "NIR means must order water < cloud < vegetation");
  }
}

SceneSpec scene_spec_from_json(std::string_view text, SceneSpec base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("scene spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_argument, "scene spec must be a JSON object");
  SceneSpec s = std::move(base);
  const auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw Error(Errc::invalid_argument, "scene key '" + key + "' must be a number");
    return v.get<double>();
  };
  const auto count = [](const nlohmann::json& v, const std::string& key) -> std::uint64_t {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw Error(Errc::invalid_argument, "scene key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "width") {
      s.width = count(v, key);
    } else if (key == "height") {
      s.height = count(v, key);
    } else if (key == "seed") {
      s.seed = count(v, key);
    } else if (key == "river") {
      if (!v.is_array()) throw Error(Errc::invalid_argument, "scene key 'river' must be an array");
      s.river.clear();
      for (const auto& p : v) {
        if (!p.is_array() || p.size() != 2) {
          throw Error(Errc::invalid_argument, "river points must be [x, y] pairs");
        }
        s.river.push_back({number(p[0], key), number(p[1], key)});
      }
    } else if (key == "river_width") {
      s.river_width = number(v, key);
    } else if (key == "n_streams") {
      s.n_streams = count(v, key);
    } else if (key == "cloud_patches") {
      s.cloud_patches = count(v, key);
    } else if (key == "cloud_radius") {
      if (!v.is_array() || v.size() != 2) {
        throw Error(Errc::invalid_argument, "scene key 'cloud_radius' must be [min, max]");
      }
      s.cloud_radius_min = number(v[0], key);
      s.cloud_radius_max = number(v[1], key);
    } else if (key == "noise_std") {
      s.noise_std = number(v, key);
    } else if (key == "profiles") {
      if (!v.is_object()) throw Error(Errc::invalid_argument, "scene key 'profiles' must be an object");
      for (const auto& [material, p] : v.items()) {
        if (material == "water") {
          s.water = profile_from_json(p, s.water, material);
        } else if (material == "vegetation") {
          s.vegetation = profile_from_json(p, s.vegetation, material);
        } else if (material == "cloud") {
          s.cloud = profile_from_json(p, s.cloud, material);
        } else if (material == "shadow") {
          s.shadow = profile_from_json(p, s.shadow, material);
        } else {
          throw Error(Errc::invalid_argument, "unknown material '" + material + "'");
        }
      }
    } else {
      throw Error(Errc::invalid_argument, "unknown scene key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["seed"] = spec.seed;
  auto river = nlohmann::ordered_json::array();
  for (const auto& p : spec.river) river.push_back({p.x, p.y});
  j["river"] = river;
  j["river_width"] = spec.river_width;
  j["n_streams"] = spec.n_streams;
  j["cloud_patches"] = spec.cloud_patches;
  j["cloud_radius"] = {spec.cloud_radius_min, spec.cloud_radius_max};
  j["noise_std"] = spec.noise_std;
  j["profiles"] = {{"water", profile_json(spec.water)},
                   {"vegetation", profile_json(spec.vegetation)},
                   {"cloud", profile_json(spec.cloud)},
                   {"shadow", profile_json(spec.shadow)}};
  return j.dump(2);
}

SceneLayout scene_layout(const SceneSpec& spec) {
  spec.validate();
  SceneLayout layout;
  layout.river = spec.river;
  Rng rng(spec.seed);
  const auto w = static_cast<double>(spec.width);
  const auto h = static_cast<double>(spec.height);

  for (std::size_t k = 0; k < spec.n_streams; ++k) {
    Point start{rng.uniform(0.0, w), rng.uniform(0.0, h)};
    if (layout.river.size() >= 2) {
      const std::size_t seg = static_cast<std::size_t>(rng.index(layout.river.size() - 1));
      const double t = rng.uniform();
      const Point a = layout.river[seg];
      const Point b = layout.river[seg + 1];
      start = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double length = rng.uniform(80.0, 200.0);
    std::vector<Point> line{start};
    for (int s = 0; s < 4; ++s) {
      heading += rng.uniform(-0.5, 0.5);
      const Point& p = line.back();
      line.push_back({p.x + 0.25 * length * std::cos(heading), p.y + 0.25 * length * std::sin(heading)});
    }
    layout.streams.push_back(std::move(line));
    layout.stream_widths.push_back(rng.uniform(1.0, 2.0));
  }

  for (std::size_t k = 0; k < spec.cloud_patches; ++k) {
    Disc d;
    d.center = {rng.uniform(0.0, w), rng.uniform(0.0, h)};
    d.radius = rng.uniform(spec.cloud_radius_min, spec.cloud_radius_max);
    d.is_cloud = k % 2 == 0;
    layout.discs.push_back(d);
  }
  return layout;
}

double analytic_water_area(const SceneSpec& spec) {
  const SceneLayout layout = scene_layout(spec);
  const auto w = static_cast<double>(spec.width);
  const auto h = static_cast<double>(spec.height);
  double area = polyline_length(layout.river, w, h) * spec.river_width;
  for (std::size_t k = 0; k < layout.streams.size(); ++k) {
    area += polyline_length(layout.streams[k], w, h) * layout.stream_widths[k];
  }
  return area;
}

GeneratedScene generate(const SceneSpec& spec) {
  const SceneLayout layout = scene_layout(spec);
  const std::size_t width = spec.width;
  const std::size_t height = spec.height;
  GeneratedScene scene{MultiBandRaster(width, height), Grid<Truth>(width, height, Truth::land), {}};

  for (const auto& p : layout.river) {
    if (p.x < 0.0 || p.y < 0.0 || p.x > static_cast<double>(width) ||
        p.y > static_cast<double>(height)) {
      std::ostringstream msg;
      msg << "river point (" << p.x << ", " << p.y << ") lies outside the image; river clipped";
      scene.warnings.push_back(msg.str());
    }
  }

  Grid<double> water(width, height, 0.0);
  if (layout.river.size() >= 2) paint_polyline(water, layout.river, spec.river_width);
  for (std::size_t k = 0; k < layout.streams.size(); ++k) {
    paint_polyline(water, layout.streams[k], layout.stream_widths[k]);
  }

  Grid<double> confuser(width, height, 0.0);
  Grid<std::uint8_t> confuser_kind(width, height, 0);
  for (std::size_t k = 0; k < layout.discs.size(); ++k) {
    const Disc& d = layout.discs[k];
    const double reach = d.radius + 0.5;
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(d.center.x - reach)));
    const auto x1 = static_cast<std::size_t>(
        std::clamp(std::ceil(d.center.x + reach), 0.0, static_cast<double>(width)));
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(d.center.y - reach)));
    const auto y1 = static_cast<std::size_t>(
        std::clamp(std::ceil(d.center.y + reach), 0.0, static_cast<double>(height)));
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) {
        const double dist = std::hypot(static_cast<double>(x) + 0.5 - d.center.x,
                                       static_cast<double>(y) + 0.5 - d.center.y);
        const double c = std::clamp(reach - dist, 0.0, 1.0);
        // Where discs overlap, the one covering more of the pixel wins.
        if (c > confuser(x, y)) {
          confuser(x, y) = c;
          confuser_kind(x, y) = d.is_cloud ? 1 : 2;
        }
      }
    }
  }

  std::vector<Grid<double>> bands(kBandOrder.size(), Grid<double>(width, height, 0.0));
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < water.size(); ++i) {
    const double f = water[i];
    const double c = confuser[i];
    const MaterialProfile& conf = confuser_kind[i] == 2 ? spec.shadow : spec.cloud;
    for (std::size_t b = 0; b < kBandOrder.size(); ++b) {
      double v = spec.vegetation[b].mean;
      if (f < 1.0) v += spec.vegetation[b].stddev * rng.normal();
      if (f > 0.0) {
        const double wv = spec.water[b].mean + spec.water[b].stddev * rng.normal();
        v = v + f * (wv - v);
      }
      if (c > 0.0) {
        const double cv = conf[b].mean + conf[b].stddev * rng.normal();
        v = v + c * (cv - v);
      }
      if (spec.noise_std > 0.0) v += spec.noise_std * rng.normal();
      bands[b][i] = std::max(0.0, v);
    }
    if (c >= 0.5) {
      scene.truth[i] = Truth::confuser;
    } else if (f >= 0.5) {
      scene.truth[i] = Truth::water;
    }
  }
  for (std::size_t b = 0; b < kBandOrder.size(); ++b) {
    scene.raster.add_band(std::string(kBandOrder[b]), std::move(bands[b]));
  }
  return scene;
}

SceneScore score(const Grid<Label>& predicted, const Grid<Truth>& truth) {
  if (!predicted.same_shape(truth)) {
    throw Error(Errc::dimension_mismatch, "prediction and truth differ in shape");
  }
  SceneScore s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Label p = predicted[i];
    const Truth t = truth[i];
    if (p == Label::ignorance) ++s.ignorance;
    if (t == Truth::confuser) {
      ++s.confusers;
      if (p != Label::water) ++s.confusers_captured;
    }
    if (p == Label::ignorance) {
      if (t == Truth::water) ++s.water_ignorance;
      continue;
    }
    if (p == Label::water && t == Truth::water) ++s.true_positive;
    if (p == Label::water && t != Truth::water) ++s.false_positive;
    if (p == Label::non_water && t == Truth::water) ++s.false_negative;
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  s.precision = ratio(s.true_positive, s.true_positive + s.false_positive);
  s.recall = ratio(s.true_positive, s.true_positive + s.false_negative);
  s.confuser_capture = ratio(s.confusers_captured, s.confusers);
  s.ignorance_fraction = ratio(s.ignorance, truth.size());
  return s;
}

std::string to_json(const SceneScore& s) {
  nlohmann::ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["confuser_capture"] = s.confuser_capture;
  j["ignorance_fraction"] = s.ignorance_fraction;
  j["true_positive"] = s.true_positive;
  j["false_positive"] = s.false_positive;
  j["false_negative"] = s.false_negative;
  j["water_ignorance"] = s.water_ignorance;
  j["confusers"] = s.confusers;
  j["confusers_captured"] = s.confusers_captured;
  j["ignorance"] = s.ignorance;
  return j.dump(2);
}

void write_truth(const Grid<Truth>& truth, const std::filesystem::path& path) {
  Grid<std::uint8_t> img(truth.width(), truth.height());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    switch (truth[i]) {
      case Truth::water:
        img[i] = 255;
        break;
      case Truth::confuser:
        img[i] = 128;
        break;
      case Truth::land:
        img[i] = 0;
        break;
    }
  }
  write_pgm(path, img);
}

Grid<Truth> read_truth(const std::filesystem::path& path) {
  const Grid<std::uint8_t> img = read_pgm(path);
  Grid<Truth> truth(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    switch (img[i]) {
      case 255:
        truth[i] = Truth::water;
        break;
      case 128:
        truth[i] = Truth::confuser;
        break;
      case 0:
        truth[i] = Truth::land;
        break;
      default:
        throw Error(Errc::malformed_header,
                    "truth map holds value " + std::to_string(img[i]) + ", expected 0, 128 or 255");
    }
  }
  return truth;
}

}  // namespace dswater
