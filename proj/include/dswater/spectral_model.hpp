#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dswater/belief.hpp"
#include "dswater/grid.hpp"
#include "dswater/polyfit.hpp"
#include "dswater/raster.hpp"

namespace dswater {

/// Equal-width histogram; edges has bins() + 1 ascending entries.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;

  std::size_t bins() const noexcept { return counts.size(); }
  double bin_width() const noexcept { return (edges.back() - edges.front()) / counts.size(); }
  double center(std::size_t bin) const noexcept { return 0.5 * (edges[bin] + edges[bin + 1]); }
  std::size_t total() const noexcept;
};

/// Bins span [min, max] of `values`; the maximum falls in the last bin.
/// Throws degenerate-band when every value is equal.
Histogram build_histogram(std::span<const double> values, std::size_t nbins);

/// Centered moving average (window truncated at the ends), applied `passes` times.
std::vector<double> smooth_counts(std::span<const double> series, std::size_t window, int passes);

/// Bins that are >= both neighbours and > at least one. A plateau counts once,
/// at its leftmost bin; ends of the series have a single neighbour.
std::vector<std::size_t> local_maxima(std::span<const double> series);

/// Height of a peak above the higher of its two bases, where a base is the
/// lowest value between the peak and the nearest strictly higher point (or
/// the end of the series) on that side.
double peak_prominence(std::span<const double> series, std::size_t peak);

struct PeakPair {
  std::size_t first;
  std::size_t second;
};

/// The two local maxima with the lowest indices, ignoring maxima whose
/// prominence is below `min_relative_prominence` times the series maximum.
/// Throws unimodal-histogram when fewer than two remain.
PeakPair find_first_two_peaks(std::span<const double> series, double min_relative_prominence = 0.0);

struct ThresholdConfig {
  std::size_t nbins = 256;
  std::size_t smoothing_window = 5;
  int smoothing_passes = 2;
  double min_relative_prominence = 0.05;
  std::size_t grid_points = 1024;
  double tolerance = 1e-6;
  /// Half-width of the second, local fit around the first minimiser, as a
  /// share of the peak distance. 0 keeps the single fit over the peaks.
  double refine_fraction = 0.25;

  void validate() const;
};

/// Water/non-water split of the NIR band and the constants of the spectral
/// mass function.
struct SpectralModelParams {
  /// N = 1 - e^-1, so that a fully confident pixel reaches mass exactly 1.
  static inline const double kN = -std::expm1(-1.0);

  double t = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
  double d_water = 0.0;
  double d_nonwater = 0.0;
  double alpha_water = 1.0;
  double alpha_nonwater = 1.0;

  static SpectralModelParams from_threshold(double t, double n_min, double n_max);
  void validate() const;
};

/// Everything the threshold search produced, for reporting and plotting.
struct ThresholdAnalysis {
  SpectralModelParams params;
  Histogram histogram;
  std::vector<double> smoothed;
  PeakPair peaks;
  /// Quintic fitted to sqrt(count) over the bins first..second of `peaks`.
  PolyFit fit;
  /// Quintic refitted over bins refined_first..refined_last around the first
  /// minimiser; `t` is its minimiser. Equal to `fit` when no refit was made.
  PolyFit refined_fit;
  std::size_t refined_first = 0;
  std::size_t refined_last = 0;
};

/// Histogram, smoothed peaks, quintic valley fit and its minimiser. The fits
/// are made on square-rooted counts (variance-stabilised for Poisson bin
/// counts). A second fit over a window centred on the first minimiser removes
/// the pull of a single quintic toward the middle of a wide flat valley.
ThresholdAnalysis analyze_threshold(std::span<const double> nir, const ThresholdConfig& cfg = {});
SpectralModelParams find_threshold(std::span<const double> nir, const ThresholdConfig& cfg = {});

/// Minimiser of `p` on [lo, hi]: best of `grid_points` evenly spaced samples,
/// refined by golden-section search to `rel_tol` * (hi - lo).
double minimize_on_interval(const Polynomial& p, double lo, double hi, std::size_t grid_points,
                            double rel_tol);

/// Water iff n <= t.
Label spectral_label(double n, const SpectralModelParams& params) noexcept;
Grid<Label> spectral_labels(const Grid<double>& nir, const SpectralModelParams& params);

struct GammaConfig {
  std::size_t window = 3;
  void validate() const;
};

/// Share of the s x s window (clipped to the image, centre included) carrying
/// the same label as (x, y).
double gamma_coefficient(const Grid<Label>& labels, std::size_t x, std::size_t y,
                         const GammaConfig& cfg = {});
/// `gamma_coefficient` for every pixel, via summed-area tables.
Grid<double> gamma_map(const Grid<Label>& labels, const GammaConfig& cfg = {});

/// Spectral masses of one pixel. n is clamped to [n_min, n_max]; gamma must
/// lie in (0, 1].
MassTriple spectral_masses(double n, const SpectralModelParams& params, double gamma);
MassFunction spectral_mass(double n, const SpectralModelParams& params, double gamma);

MassFunction to_mass_function(const MassTriple& m);

}  // namespace dswater
