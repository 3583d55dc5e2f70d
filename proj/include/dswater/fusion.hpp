#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "dswater/belief.hpp"
#include "dswater/grid.hpp"
#include "dswater/indices.hpp"
#include "dswater/raster.hpp"
#include "dswater/spectral_model.hpp"
#include "dswater/supervised_model.hpp"

namespace dswater {

/// counts[spectral][supervised], indexed by Label (water = 0, non-water = 1).
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const noexcept;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Label pairs of two water/non-water grids. Throws dimension-mismatch on a
/// shape difference and invalid-argument on an ignorance label.
ConfusionMatrix confusion(const Grid<Label>& spectral, const Grid<Label>& supervised);

struct DiscountCoefficients {
  double water = 0.0;
  double non_water = 0.0;
};

/// water = counts[w][nw] / sum_s counts[s][nw],
/// non_water = counts[nw][w] / sum_s counts[s][w]; an empty column gives 0.
DiscountCoefficients discount_coefficients(const ConfusionMatrix& cm);

/// Inputs and outputs of the spectral stage, kept so that masses can be
/// rebuilt with other discount coefficients.
struct SpectralEvidence {
  Grid<double> nir;
  Grid<double> gamma;
  SpectralModelParams params;
  Grid<Label> labels;
  Grid<MassTriple> masses;
};

SpectralEvidence spectral_evidence(const Grid<double>& nir, const SpectralModelParams& params,
                                   const GammaConfig& cfg = {});

/// Pixels whose two labels agree keep their spectral masses. The others are
/// rebuilt from (n, gamma) with the coefficient of their spectral label.
Grid<MassTriple> apply_discounts(const SpectralEvidence& evidence,
                                 const Grid<Label>& supervised_labels,
                                 const DiscountCoefficients& alphas);

MassFunction fuse_pixel(const MassFunction& m1, const MassFunction& m2);
/// Average rule on the three focal sets.
MassTriple fuse_masses(const MassTriple& m1, const MassTriple& m2) noexcept;

/// Appriou decision; the whole frame maps to ignorance.
Label decide_pixel(const MassFunction& m, const DecisionParams& params);
Label decide_masses(const MassTriple& m, const DecisionParams& params);
Grid<Label> decide_all(const Grid<MassTriple>& masses, const DecisionParams& params);

struct PipelineConfig {
  ThresholdConfig threshold;
  GammaConfig gamma;
  HarvestConfig harvest;
  TrainConfig train;
  DecisionParams decision;
  /// Drives sample harvesting and the classifier's sample order.
  std::uint64_t seed = 42;

  void validate() const;
};

/// Reads the flat JSON form (keys as in `pipeline_config_to_json`); missing
/// keys keep their defaults, unknown keys are rejected.
PipelineConfig pipeline_config_from_json(std::string_view text, PipelineConfig base = {});
std::string pipeline_config_to_json(const PipelineConfig& cfg);

struct ClassShares {
  double water = 0.0;
  double non_water = 0.0;
  double ignorance = 0.0;
};

ClassShares class_shares(const Grid<Label>& labels);

struct PipelineResult {
  ClassMap classmap;
  ThresholdAnalysis threshold;
  Grid<Label> spectral_labels;
  Grid<Label> supervised_labels;
  TrainingSet training;
  SupervisedModel model;
  ConfusionMatrix confusion;
  DiscountCoefficients alphas;
  ClassShares spectral_shares;
  ClassShares supervised_shares;
  ClassShares fused_shares;
  PipelineConfig config;
};

/// Threshold, spectral masses, sample harvest, training, supervised masses,
/// discounting, average fusion and Appriou decision. Errors carry the name of
/// the stage that raised them.
PipelineResult run_pipeline(const MultiBandRaster& raster, const PipelineConfig& cfg = {});

/// JSON report of a run. `mass_images` lists the written mass channel files
/// (water, non-water, ignorance); it may be empty.
std::string pipeline_report_json(const PipelineResult& result,
                                 const std::array<std::string, 3>& mass_images = {});

}  // namespace dswater
