#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dswater/belief.hpp"
#include "dswater/grid.hpp"
#include "dswater/indices.hpp"
#include "dswater/raster.hpp"

namespace dswater {

struct TrainingSample {
  FeatureVector features;
  Label label;
  /// Row-major index of the source pixel.
  std::size_t pixel;
};

struct TrainingSet {
  std::vector<TrainingSample> samples;
  std::uint64_t seed = 42;

  std::size_t count(Label label) const noexcept;
};

struct HarvestConfig {
  /// A pixel is eligible for its spectral label when that singleton mass
  /// exceeds this value.
  double threshold = 0.7;
  std::size_t per_class = 5000;
  std::size_t min_samples = 50;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Uniform sampling without replacement of min(per_class, eligible) pixels per
/// class, water first, deterministic under the seed. Throws
/// insufficient-training-data when a class has fewer than min_samples
/// eligible pixels.
TrainingSet harvest_training_samples(const Grid<MassTriple>& spectral_masses,
                                     const Grid<FeatureVector>& features, const HarvestConfig& cfg);

struct TrainConfig {
  std::size_t epochs = 50;
  double reg = 1e-3;
  double learning_rate = 0.1;
  double alpha = 0.95;

  void validate() const;
};

/// Linear decision function over standardised [ndvi, ndwi, re_ndwi].
/// Positive scores are water.
struct LinearClassifier {
  std::array<double, 3> weights{};
  double bias = 0.0;
  std::array<double, 3> means{};
  std::array<double, 3> scales{1.0, 1.0, 1.0};

  double decision(const FeatureVector& f) const noexcept;
  /// Water when the decision is strictly positive; ties go to non-water.
  Label predict(const FeatureVector& f) const noexcept;
};

/// Soft-margin linear SVM: standardises the features, then minimises
/// reg/2 |w|^2 + mean hinge loss by stochastic subgradient descent with a
/// seeded sample order. Bit-for-bit deterministic.
LinearClassifier fit_linear_svm(const TrainingSet& set, const TrainConfig& cfg);

struct DPrime {
  double water;
  double non_water;
};

/// Floor used for D' when a partition is empty or collapses onto its centre.
inline constexpr double kDPrimeFloor = 1e-12;

/// Splits all pixels by the nearer centre (ties to water) and returns, per
/// side, the largest squared distance to that side's centre.
DPrime compute_dprime(const FeatureVector& c_water, const FeatureVector& c_nonwater,
                      const Grid<FeatureVector>& features);

struct SupervisedModel {
  LinearClassifier classifier;
  FeatureVector c_water;
  FeatureVector c_nonwater;
  DPrime dprime{kDPrimeFloor, kDPrimeFloor};
  double alpha = 0.95;
  std::uint64_t seed = 42;
  std::size_t epochs = 50;
  double reg = 1e-3;
  double learning_rate = 0.1;

  Label predict(const FeatureVector& f) const noexcept { return classifier.predict(f); }
};

/// Fits the classifier, takes the class centres as the per-class means of the
/// raw training features and computes D' over the whole image.
SupervisedModel train(const TrainingSet& set, const Grid<FeatureVector>& image_features,
                      const TrainConfig& cfg = {});

Grid<Label> predict_all(const SupervisedModel& model, const Grid<FeatureVector>& features);

/// Supervised masses of one pixel: the nearer centre's singleton receives
///   alpha * (e^{-d^2/D'} - e^{-1}) / (1 - e^{-1}),
/// floored at 0, and the rest goes to the whole frame.
MassTriple supervised_masses(const SupervisedModel& model, const FeatureVector& f);
MassFunction supervised_mass(const SupervisedModel& model, const FeatureVector& f);

/// Same mass law with explicit inputs; `d2` is the squared distance to the
/// nearer centre and `dprime` that centre's normaliser.
double supervised_singleton_mass(double d2, double dprime, double alpha);

std::string to_json(const SupervisedModel& model);
SupervisedModel supervised_model_from_json(std::string_view text);

}  // namespace dswater
