#pragma once

#include "dswater/grid.hpp"
#include "dswater/raster.hpp"

namespace dswater {

/// A pixel in the three-index feature space used by the supervised model.
struct FeatureVector {
  double ndvi = 0.0;
  double ndwi = 0.0;
  double re_ndwi = 0.0;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// (a - b) / (a + b), 0 when a + b = 0. Inputs must be finite and >= 0.
double normalized_difference(double a, double b);

/// (nir - red) / (nir + red)
double ndvi(double nir, double red);
/// (nir - green) / (nir + green), NIR first as in the green/NIR variant.
double ndwi(double nir, double green);
/// (green - rededge) / (green + rededge)
double re_ndwi(double green, double rededge);

FeatureVector features_at(double green, double red, double rededge, double nir);

/// Index features for every pixel. Needs the green, red, rededge and nir bands.
Grid<FeatureVector> feature_raster(const MultiBandRaster& raster);

/// The three feature planes as a raster with bands "ndvi", "ndwi", "re_ndwi".
MultiBandRaster feature_planes(const Grid<FeatureVector>& features);

double squared_distance(const FeatureVector& a, const FeatureVector& b) noexcept;

}  // namespace dswater
