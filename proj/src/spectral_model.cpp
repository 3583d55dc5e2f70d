#include "dswater/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dswater/error.hpp"

namespace dswater {

std::size_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram build_histogram(std::span<const double> values, std::size_t nbins) {
  if (values.empty()) throw Error(Errc::invalid_argument, "cannot histogram an empty band");
  if (nbins < 2) throw Error(Errc::invalid_argument, "histogram needs at least 2 bins");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite_value, "band holds a non-finite value");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw Error(Errc::degenerate_band, "band is constant, no histogram spread");

  Histogram h;
  h.edges.resize(nbins + 1);
  const double width = (hi - lo) / static_cast<double>(nbins);
  for (std::size_t i = 0; i <= nbins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(nbins, 0);

  for (double v : values) {
    auto bin = static_cast<std::size_t>(std::min<double>(std::floor((v - lo) / width),
                                                         static_cast<double>(nbins - 1)));
    // Settle rounding at the edges so that edges[bin] <= v < edges[bin + 1].
    while (bin > 0 && v < h.edges[bin]) --bin;
    while (bin + 1 < nbins && v >= h.edges[bin + 1]) ++bin;
    ++h.counts[bin];
  }
  return h;
}

std::vector<double> smooth_counts(std::span<const double> series, std::size_t window, int passes) {
  if (window == 0 || window % 2 == 0) {
    throw Error(Errc::invalid_argument, "smoothing window must be odd and positive");
  }
  std::vector<double> cur(series.begin(), series.end());
  const std::size_t n = cur.size();
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1);
  for (int pass = 0; pass < passes; ++pass) {
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + cur[i];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= half ? i - half : 0;
      const std::size_t hi = std::min(n, i + half + 1);
      cur[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
  }
  return cur;
}

std::vector<std::size_t> local_maxima(std::span<const double> series) {
  std::vector<std::size_t> peaks;
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && series[j + 1] == series[i]) ++j;
    const double v = series[i];
    const bool has_left = i > 0;
    const bool has_right = j + 1 < n;
    const bool ge_left = !has_left || v >= series[i - 1];
    const bool ge_right = !has_right || v >= series[j + 1];
    const bool gt_one = (has_left && v > series[i - 1]) || (has_right && v > series[j + 1]);
    if (ge_left && ge_right && gt_one) peaks.push_back(i);
    i = j + 1;
  }
  return peaks;
}

double peak_prominence(std::span<const double> series, std::size_t peak) {
  const double v = series[peak];
  double left_base = v;
  for (std::size_t k = peak; k-- > 0;) {
    if (series[k] > v) break;
    left_base = std::min(left_base, series[k]);
  }
  double right_base = v;
  for (std::size_t k = peak + 1; k < series.size(); ++k) {
    if (series[k] > v) break;
    right_base = std::min(right_base, series[k]);
  }
  return v - std::max(left_base, right_base);
}

PeakPair find_first_two_peaks(std::span<const double> series, double min_relative_prominence) {
  if (series.empty()) throw Error(Errc::unimodal_histogram, "empty histogram");
  const double top = *std::max_element(series.begin(), series.end());
  const double floor = min_relative_prominence * top;
  std::vector<std::size_t> kept;
  for (std::size_t p : local_maxima(series)) {
    if (peak_prominence(series, p) >= floor) kept.push_back(p);
    if (kept.size() == 2) return PeakPair{kept[0], kept[1]};
  }
  throw Error(Errc::unimodal_histogram,
              "found " + std::to_string(kept.size()) + " histogram peak(s), need two");
}

void ThresholdConfig::validate() const {
  if (nbins < 8) throw Error(Errc::invalid_argument, "nbins must be at least 8");
  if (smoothing_window == 0 || smoothing_window % 2 == 0) {
    throw Error(Errc::invalid_argument, "smoothing window must be odd and positive");
  }
  if (smoothing_passes < 0) throw Error(Errc::invalid_argument, "smoothing passes must be >= 0");
  if (!(min_relative_prominence >= 0.0 && min_relative_prominence < 1.0)) {
    throw Error(Errc::invalid_argument, "relative prominence must lie in [0, 1)");
  }
  if (grid_points < 3) throw Error(Errc::invalid_argument, "grid_points must be at least 3");
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw Error(Errc::invalid_argument, "tolerance must lie in (0, 1)");
  }
  if (!(refine_fraction >= 0.0 && refine_fraction <= 0.5)) {
    throw Error(Errc::invalid_argument, "refine fraction must lie in [0, 0.5]");
  }
}

SpectralModelParams SpectralModelParams::from_threshold(double t, double n_min, double n_max) {
  SpectralModelParams p;
  p.t = t;
  p.n_min = n_min;
  p.n_max = n_max;
  p.d_water = t - n_min;
  p.d_nonwater = n_max - t;
  p.validate();
  return p;
}

void SpectralModelParams::validate() const {
  if (!(n_min < t && t < n_max)) {
    throw Error(Errc::invalid_argument, "threshold must lie strictly inside the band range");
  }
  if (!(d_water > 0.0 && d_nonwater > 0.0)) {
    throw Error(Errc::invalid_argument, "normalisers must be positive");
  }
  if (!(alpha_water >= 0.0 && alpha_water <= 1.0 && alpha_nonwater >= 0.0 &&
        alpha_nonwater <= 1.0)) {
    throw Error(Errc::invalid_argument, "discount coefficients must lie in [0, 1]");
  }
}

double minimize_on_interval(const Polynomial& p, double lo, double hi, std::size_t grid_points,
                            double rel_tol) {
  if (!(hi > lo) || grid_points < 2) throw Error(Errc::invalid_argument, "empty search interval");
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_value = p(lo);
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double v = p(lo + step * static_cast<double>(i));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
  double b = std::min(hi, lo + step * static_cast<double>(best + 1));
  const double tol = rel_tol * (hi - lo);
  constexpr double inv_phi = 0.61803398874989485;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = p(c);
  double fd = p(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = p(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = p(d);
    }
  }
  const double refined = 0.5 * (a + b);
  // The bracket can miss an endpoint minimum found on the grid.
  return p(refined) <= best_value ? refined : lo + step * static_cast<double>(best);
}

namespace {

struct ValleyFit {
  PolyFit fit;
  double t = 0.0;
};

ValleyFit fit_valley(const Histogram& hist, std::span<const double> raw, std::size_t first,
                     std::size_t last, const ThresholdConfig& cfg) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t bin = first; bin <= last; ++bin) {
    xs.push_back(hist.center(bin));
    ys.push_back(std::sqrt(raw[bin]));
  }
  PolyFit fit = fit_poly5(xs, ys);
  const double t =
      minimize_on_interval(fit.polynomial, xs.front(), xs.back(), cfg.grid_points, cfg.tolerance);
  return {std::move(fit), t};
}

}  // namespace

ThresholdAnalysis analyze_threshold(std::span<const double> nir, const ThresholdConfig& cfg) {
  cfg.validate();
  Histogram hist = build_histogram(nir, cfg.nbins);
  std::vector<double> raw(hist.counts.begin(), hist.counts.end());
  std::vector<double> smoothed = smooth_counts(raw, cfg.smoothing_window, cfg.smoothing_passes);
  const PeakPair peaks = find_first_two_peaks(smoothed, cfg.min_relative_prominence);

  ValleyFit global = fit_valley(hist, raw, peaks.first, peaks.second, cfg);
  ValleyFit local = global;
  std::size_t first = peaks.first;
  std::size_t last = peaks.second;
  const auto span = static_cast<double>(peaks.second - peaks.first);
  const auto half = static_cast<long long>(std::llround(cfg.refine_fraction * span));
  if (half > 0) {
    const double width = hist.bin_width();
    const auto centre = static_cast<long long>(std::floor((global.t - hist.edges.front()) / width));
    const auto lo = std::max<long long>(static_cast<long long>(peaks.first), centre - std::max(half, 3LL));
    const auto hi = std::min<long long>(static_cast<long long>(peaks.second), centre + std::max(half, 3LL));
    const auto a = static_cast<std::size_t>(lo);
    const auto b = static_cast<std::size_t>(hi);
    if (b >= a + 6 && (a != peaks.first || b != peaks.second)) {
      local = fit_valley(hist, raw, a, b, cfg);
      first = a;
      last = b;
    }
  }
  auto params = SpectralModelParams::from_threshold(local.t, hist.edges.front(), hist.edges.back());
  return ThresholdAnalysis{params,           std::move(hist),        std::move(smoothed), peaks,
                           std::move(global.fit), std::move(local.fit), first,               last};
}

SpectralModelParams find_threshold(std::span<const double> nir, const ThresholdConfig& cfg) {
  return analyze_threshold(nir, cfg).params;
}

Label spectral_label(double n, const SpectralModelParams& params) noexcept {
  return n <= params.t ? Label::water : Label::non_water;
}

Grid<Label> spectral_labels(const Grid<double>& nir, const SpectralModelParams& params) {
  Grid<Label> out(nir.width(), nir.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectral_label(nir[i], params);
  return out;
}

void GammaConfig::validate() const {
  if (window == 0 || window % 2 == 0) {
    throw Error(Errc::invalid_argument, "gamma window size must be odd and positive");
  }
}

double gamma_coefficient(const Grid<Label>& labels, std::size_t x, std::size_t y,
                         const GammaConfig& cfg) {
  cfg.validate();
  if (x >= labels.width() || y >= labels.height()) {
    throw Error(Errc::invalid_argument, "pixel outside the label grid");
  }
  const std::size_t half = cfg.window / 2;
  const std::size_t x0 = x >= half ? x - half : 0;
  const std::size_t y0 = y >= half ? y - half : 0;
  const std::size_t x1 = std::min(labels.width() - 1, x + half);
  const std::size_t y1 = std::min(labels.height() - 1, y + half);
  const Label own = labels(x, y);
  std::size_t same = 0;
  std::size_t all = 0;
  for (std::size_t yy = y0; yy <= y1; ++yy) {
    for (std::size_t xx = x0; xx <= x1; ++xx) {
      ++all;
      if (labels(xx, yy) == own) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(all);
}

Grid<double> gamma_map(const Grid<Label>& labels, const GammaConfig& cfg) {
  cfg.validate();
  const std::size_t w = labels.width();
  const std::size_t h = labels.height();
  const std::size_t half = cfg.window / 2;
  constexpr std::size_t kLabels = 3;

  // Summed-area table per label value, (w + 1) x (h + 1).
  std::vector<std::vector<std::uint32_t>> sat(kLabels, std::vector<std::uint32_t>((w + 1) * (h + 1), 0));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto l = static_cast<std::size_t>(labels(x, y));
      for (std::size_t k = 0; k < kLabels; ++k) {
        const std::uint32_t here = k == l ? 1u : 0u;
        sat[k][(y + 1) * (w + 1) + (x + 1)] = here + sat[k][y * (w + 1) + (x + 1)] +
                                             sat[k][(y + 1) * (w + 1) + x] - sat[k][y * (w + 1) + x];
      }
    }
  }

  Grid<double> out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t y0 = y >= half ? y - half : 0;
    const std::size_t y1 = std::min(h, y + half + 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x >= half ? x - half : 0;
      const std::size_t x1 = std::min(w, x + half + 1);
      const auto& s = sat[static_cast<std::size_t>(labels(x, y))];
      const std::uint32_t same = s[y1 * (w + 1) + x1] - s[y0 * (w + 1) + x1] -
                                 s[y1 * (w + 1) + x0] + s[y0 * (w + 1) + x0];
      const std::size_t all = (x1 - x0) * (y1 - y0);
      out(x, y) = static_cast<double>(same) / static_cast<double>(all);
    }
  }
  return out;
}

MassTriple spectral_masses(double n, const SpectralModelParams& params, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(Errc::invalid_argument, "gamma must lie in (0, 1]");
  }
  if (!std::isfinite(n)) throw Error(Errc::invalid_argument, "non-finite NIR value");
  n = std::clamp(n, params.n_min, params.n_max);
  MassTriple m{0.0, 0.0, 1.0};
  if (n <= params.t) {
    const double x = gamma * (params.t - n) / params.d_water;
    m.water = std::clamp(params.alpha_water / SpectralModelParams::kN * -std::expm1(-x), 0.0, 1.0);
  } else {
    const double x = gamma * (n - params.t) / params.d_nonwater;
    m.non_water =
        std::clamp(params.alpha_nonwater / SpectralModelParams::kN * -std::expm1(-x), 0.0, 1.0);
  }
  m.ignorance = 1.0 - m.water - m.non_water;
  return m;
}

MassFunction spectral_mass(double n, const SpectralModelParams& params, double gamma) {
  return to_mass_function(spectral_masses(n, params, gamma));
}

MassFunction to_mass_function(const MassTriple& m) {
  return MassFunction(water_frame(), {0.0, m.water, m.non_water, m.ignorance});
}

}  // namespace dswater
