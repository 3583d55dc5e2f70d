#include "dswater/indices.hpp"

#include <algorithm>
#include <cmath>

#include "dswater/error.hpp"

namespace dswater {

double normalized_difference(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error(Errc::invalid_argument, "reflectance must be finite");
  }
  if (a < 0.0 || b < 0.0) throw Error(Errc::invalid_argument, "reflectance must be non-negative");
  const double sum = a + b;
  if (sum == 0.0) return 0.0;
  return std::clamp((a - b) / sum, -1.0, 1.0);
}

double ndvi(double nir, double red) { return normalized_difference(nir, red); }

double ndwi(double nir, double green) { return normalized_difference(nir, green); }

double re_ndwi(double green, double rededge) { return normalized_difference(green, rededge); }

FeatureVector features_at(double green, double red, double rededge, double nir) {
  return FeatureVector{ndvi(nir, red), ndwi(nir, green), re_ndwi(green, rededge)};
}

Grid<FeatureVector> feature_raster(const MultiBandRaster& raster) {
  const auto& green = raster.band(band::green);
  const auto& red = raster.band(band::red);
  const auto& rededge = raster.band(band::rededge);
  const auto& nir = raster.band(band::nir);
  Grid<FeatureVector> out(raster.width(), raster.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = features_at(green[i], red[i], rededge[i], nir[i]);
  }
  return out;
}

MultiBandRaster feature_planes(const Grid<FeatureVector>& features) {
  Grid<double> ndvi_plane(features.width(), features.height());
  Grid<double> ndwi_plane(features.width(), features.height());
  Grid<double> re_plane(features.width(), features.height());
  for (std::size_t i = 0; i < features.size(); ++i) {
    ndvi_plane[i] = features[i].ndvi;
    ndwi_plane[i] = features[i].ndwi;
    re_plane[i] = features[i].re_ndwi;
  }
  MultiBandRaster out(features.width(), features.height());
  out.add_band("ndvi", std::move(ndvi_plane));
  out.add_band("ndwi", std::move(ndwi_plane));
  out.add_band("re_ndwi", std::move(re_plane));
  return out;
}

double squared_distance(const FeatureVector& a, const FeatureVector& b) noexcept {
  const double d0 = a.ndvi - b.ndvi;
  const double d1 = a.ndwi - b.ndwi;
  const double d2 = a.re_ndwi - b.re_ndwi;
  return d0 * d0 + d1 * d1 + d2 * d2;
}

}  // namespace dswater
