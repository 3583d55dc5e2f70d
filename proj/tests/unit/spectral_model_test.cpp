#include "dswater/spectral_model.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dswater/error.hpp"
#include "dswater/polyfit.hpp"
#include "dswater/random.hpp"
#include "mixture.hpp"

using namespace dswater;

namespace {

template <class F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

// Dense normal-equations least squares, solved by Gaussian elimination with
// partial pivoting, in the same normalised variable as the library.
std::vector<double> normal_equations_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                                         int degree) {
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  const std::size_t n = static_cast<std::size_t>(degree) + 1;
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = (xs[i] - c) / h;
    std::vector<double> p(n);
    p[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) p[k] = p[k - 1] * u;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) a[r][k] += p[r] * p[k];
      a[r][n] += p[r] * ys[i];
    }
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<double> coef(n);
  for (std::size_t r = 0; r < n; ++r) coef[r] = a[r][n] / a[r][r];
  return coef;
}

SpectralModelParams params_1000_5000_9000() {
  return SpectralModelParams::from_threshold(5000.0, 1000.0, 9000.0);
}

}  // namespace

// Histogram -----------------------------------------------------------------

TEST(Histogram, TwoValuesTwoBins) {
  std::vector<double> v(100, 1.0);
  for (int i = 0; i < 37; ++i) v[i] = 3.0;
  const auto h = build_histogram(v, 2);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{63, 37}));
  EXPECT_EQ(h.total(), 100u);
  EXPECT_EQ(h.edges.front(), 1.0);
  EXPECT_EQ(h.edges.back(), 3.0);
}

TEST(Histogram, MatchesCountingLoopOnUniformBand) {
  Rng rng(31);
  std::vector<double> v(20000);
  for (auto& x : v) x = rng.uniform(-5.0, 17.0);
  const auto h = build_histogram(v, 64);
  EXPECT_EQ(h.total(), v.size());
  std::vector<std::size_t> expect(64, 0);
  for (double x : v) {
    std::size_t b = 0;
    while (b + 1 < 64 && x >= h.edges[b + 1]) ++b;
    ++expect[b];
  }
  EXPECT_EQ(h.counts, expect);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_LT(h.edges[i], h.edges[i + 1]);
}

TEST(Histogram, Errors) {
  const std::vector<double> constant(10, 4.0);
  EXPECT_EQ(error_code([&] { build_histogram(constant, 8); }), Errc::degenerate_band);
  EXPECT_THROW(build_histogram(std::vector<double>{}, 8), Error);
  EXPECT_THROW(build_histogram(std::vector<double>{1.0, NAN}, 8), Error);
}

// Peaks ---------------------------------------------------------------------

TEST(Peaks, FirstTwoLocalMaxima) {
  const std::vector<double> s{1, 5, 2, 1, 4, 1};
  const auto p = find_first_two_peaks(s);
  EXPECT_EQ(p.first, 1u);
  EXPECT_EQ(p.second, 4u);
}

TEST(Peaks, StrictlyIncreasingIsUnimodal) {
  const std::vector<double> s{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(error_code([&] { find_first_two_peaks(s); }), Errc::unimodal_histogram);
}

TEST(Peaks, PlateausCountOnceAtTheirLeftEdge) {
  const std::vector<double> s{0, 3, 3, 3, 1, 2, 2, 0};
  EXPECT_EQ(local_maxima(s), (std::vector<std::size_t>{1, 5}));
  const std::vector<double> flat{2, 2, 2};
  EXPECT_TRUE(local_maxima(flat).empty());
}

TEST(Peaks, ProminenceFilterDropsRipples) {
  const std::vector<double> s{0, 10, 9, 9.5, 9, 2, 8, 0};
  EXPECT_EQ(find_first_two_peaks(s).second, 3u);
  const auto p = find_first_two_peaks(s, 0.1);
  EXPECT_EQ(p.first, 1u);
  EXPECT_EQ(p.second, 6u);
  EXPECT_DOUBLE_EQ(peak_prominence(s, 3), 0.5);
  EXPECT_DOUBLE_EQ(peak_prominence(s, 6), 6.0);
}

TEST(Peaks, SmoothingIsACentredTruncatedMean) {
  const std::vector<double> s{0, 0, 10, 0, 0};
  const auto once = smooth_counts(s, 3, 1);
  EXPECT_DOUBLE_EQ(once[0], 0.0);
  EXPECT_DOUBLE_EQ(once[1], 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(once[2], 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(once[4], 0.0);
  EXPECT_THROW(smooth_counts(s, 4, 1), Error);
}

TEST(Peaks, TwoGaussianModesRecoveredWithinOneBin) {
  const oracle::Mixture m{3000.0, 6000.0, 60.0, 0.4};
  const auto v = oracle::sample_mixture(m, 200000, 99);
  const auto an = analyze_threshold(v);
  const auto& h = an.histogram;
  // Exhaustive scan: highest raw-count bin on each side of the midpoint.
  std::size_t best1 = 0;
  std::size_t best2 = 0;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    if (h.center(b) < 4500.0) {
      if (h.counts[b] > h.counts[best1]) best1 = b;
    } else if (h.counts[b] > h.counts[best2] || h.center(best2) < 4500.0) {
      best2 = b;
    }
  }
  EXPECT_LE(std::abs(static_cast<long>(an.peaks.first) - static_cast<long>(best1)), 1);
  EXPECT_LE(std::abs(static_cast<long>(an.peaks.second) - static_cast<long>(best2)), 1);
}

// Polynomial fit ------------------------------------------------------------

TEST(PolyFit, ReproducesAnExactQuintic) {
  const std::vector<double> c{2.0, -1.0, 0.5, 3.0, -0.25, 0.125};
  std::vector<double> xs, ys;
  for (int i = 0; i < 40; ++i) {
    const double x = 1000.0 + 25.0 * i;
    const double u = (x - 1487.5) / 487.5;
    double y = 0.0;
    for (int k = 5; k >= 0; --k) y = y * u + c[k];
    xs.push_back(x);
    ys.push_back(y);
  }
  const auto fit = fit_poly5(xs, ys);
  for (int k = 0; k <= 5; ++k) {
    EXPECT_NEAR(fit.polynomial.coefficients()[k], c[k], 1e-6 * std::abs(c[k]));
  }
  EXPECT_LT(fit.residual_norm, 1e-9);
}

TEST(PolyFit, ConstantData) {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> ys(8, 4.5);
  const auto fit = fit_poly5(xs, ys);
  EXPECT_NEAR(fit.polynomial.coefficients()[0], 4.5, 1e-12);
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(fit.polynomial.coefficients()[k], 0.0, 1e-10);
}

TEST(PolyFit, NoisyQuinticMatchesNormalEquations) {
  Rng rng(37);
  std::vector<double> xs, ys;
  for (int i = 0; i < 60; ++i) {
    const double x = 4000.0 + 31.0 * i;
    const double u = (x - 4914.5) / 914.5;
    xs.push_back(x);
    ys.push_back(1.0 - 2.0 * u + u * u * u - 0.5 * std::pow(u, 5) + rng.normal(0.0, 0.1));
  }
  const auto fit = fit_poly5(xs, ys);
  const auto ref = normal_equations_fit(xs, ys, 5);
  for (double x : xs) {
    const double u = (x - 4914.5) / 914.5;
    double y = 0.0;
    for (int k = 5; k >= 0; --k) y = y * u + ref[k];
    EXPECT_NEAR(fit.polynomial(x), y, 1e-6);
  }
  EXPECT_LE(fit.residual_norm, fit_polynomial(xs, ys, 4).residual_norm + 1e-12);
}

TEST(PolyFit, NeedsSevenPoints) {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(error_code([&] { fit_poly5(xs, xs); }), Errc::insufficient_separation);
}

TEST(Minimiser, FindsInteriorAndEndpointMinima) {
  const Polynomial p({0.0, 0.0, 1.0}, 0.3, 1.0);  // (x - 0.3)^2
  EXPECT_NEAR(minimize_on_interval(p, -1.0, 1.0, 1024, 1e-6), 0.3, 1e-5);
  EXPECT_NEAR(minimize_on_interval(p, 0.5, 2.0, 1024, 1e-6), 0.5, 1e-12);
}

// Threshold -----------------------------------------------------------------

TEST(Threshold, LandsInTheValleyOfASampledMixture) {
  const oracle::Mixture m{3000.0, 6200.0, 400.0, 0.35};
  const auto v = oracle::sample_mixture(m, 262144, 5);
  const double t = find_threshold(v).t;
  EXPECT_LE(oracle::distance_in_bins(t, oracle::histogram_valley(v, m, 256)), 2.0);
}

namespace {

// Minimum of the mixture density, by dense scan between the means.
double density_minimum(const oracle::Mixture& m) {
  double best = m.mu1;
  double best_value = INFINITY;
  for (double x = m.mu1; x <= m.mu2; x += 0.05) {
    const double a = (x - m.mu1) / m.sigma;
    const double b = (x - m.mu2) / m.sigma;
    const double d = m.mixing * std::exp(-0.5 * a * a) + (1.0 - m.mixing) * std::exp(-0.5 * b * b);
    if (d < best_value) {
      best_value = d;
      best = x;
    }
  }
  return best;
}

}  // namespace

TEST(Threshold, WideAsymmetricValleyFollowsTheDensityMinimum) {
  const oracle::Mixture m{3000.0, 3000.0 + 9.0 * 400.0, 400.0, 0.12};
  const auto v = oracle::sample_mixture(m, 2048 * 2048, 17);
  const auto an = analyze_threshold(v);
  const double width = an.histogram.bin_width();
  EXPECT_LE(std::abs(an.params.t - density_minimum(m)), 1.0 * width);
  EXPECT_GT(an.refined_first, an.peaks.first);
  EXPECT_LT(an.refined_last, an.peaks.second);
  EXPECT_GE(an.refined_last - an.refined_first + 1, 7u);
  EXPECT_GE(an.params.t, an.histogram.center(an.refined_first));
  EXPECT_LE(an.params.t, an.histogram.center(an.refined_last));
}

TEST(Threshold, ZeroRefineFractionKeepsTheSingleFit) {
  const oracle::Mixture m{3000.0, 6200.0, 400.0, 0.35};
  const auto v = oracle::sample_mixture(m, 100000, 19);
  ThresholdConfig cfg;
  cfg.refine_fraction = 0.0;
  const auto an = analyze_threshold(v, cfg);
  EXPECT_EQ(an.refined_first, an.peaks.first);
  EXPECT_EQ(an.refined_last, an.peaks.second);
  const auto refined = an.refined_fit.polynomial.coefficients();
  const auto global = an.fit.polynomial.coefficients();
  EXPECT_EQ(std::vector<double>(refined.begin(), refined.end()),
            std::vector<double>(global.begin(), global.end()));
  const double lo = an.histogram.center(an.peaks.first);
  const double hi = an.histogram.center(an.peaks.second);
  EXPECT_DOUBLE_EQ(an.params.t, minimize_on_interval(an.fit.polynomial, lo, hi, 1024, 1e-6));
  cfg.refine_fraction = 0.6;
  EXPECT_THROW(analyze_threshold(v, cfg), Error);
}

TEST(Threshold, SymmetricMixtureSplitsNearTheMidpoint) {
  const oracle::Mixture m{3000.0, 6200.0, 400.0, 0.5};
  const auto v = oracle::sample_mixture(m, 262144, 6);
  const auto an = analyze_threshold(v);
  EXPECT_LE(std::abs(an.params.t - 4600.0), 2.0 * an.histogram.bin_width());
}

TEST(Threshold, ParamsFollowTheBandRange) {
  const oracle::Mixture m{3000.0, 6200.0, 300.0, 0.5};
  const auto v = oracle::sample_mixture(m, 50000, 8);
  const auto p = find_threshold(v);
  EXPECT_EQ(p.n_min, *std::min_element(v.begin(), v.end()));
  EXPECT_EQ(p.n_max, *std::max_element(v.begin(), v.end()));
  EXPECT_DOUBLE_EQ(p.d_water, p.t - p.n_min);
  EXPECT_DOUBLE_EQ(p.d_nonwater, p.n_max - p.t);
  EXPECT_EQ(p.alpha_water, 1.0);
  EXPECT_NEAR(SpectralModelParams::kN, 0.6321205588, 1e-10);
}

TEST(Threshold, Errors) {
  std::vector<double> unimodal;
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) unimodal.push_back(rng.normal(5000.0, 100.0));
  EXPECT_EQ(error_code([&] { find_threshold(unimodal); }), Errc::unimodal_histogram);
  EXPECT_EQ(error_code([] { find_threshold(std::vector<double>(100, 1.0)); }), Errc::degenerate_band);
  ThresholdConfig cfg;
  cfg.nbins = 4;
  EXPECT_EQ(error_code([&] { find_threshold(unimodal, cfg); }), Errc::invalid_argument);
}

TEST(Threshold, AdjacentPeaksLeaveTooFewBins) {
  // Two spikes four bins apart survive smoothing as separate peaks.
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(0.0);
  for (int i = 0; i < 1000; ++i) v.push_back(4.0);
  v.push_back(127.0);
  v.push_back(128.0);
  ThresholdConfig cfg;
  cfg.nbins = 128;
  cfg.smoothing_passes = 0;
  cfg.min_relative_prominence = 0.0;
  EXPECT_EQ(error_code([&] { find_threshold(v, cfg); }), Errc::insufficient_separation);
}

// Labels and gamma ------------------------------------------------------------

TEST(SpectralLabel, BoundaryConvention) {
  const auto p = params_1000_5000_9000();
  EXPECT_EQ(spectral_label(5000.0, p), Label::water);
  EXPECT_EQ(spectral_label(1000.0, p), Label::water);
  EXPECT_EQ(spectral_label(9000.0, p), Label::non_water);
}

TEST(Gamma, Examples) {
  Grid<Label> uniform(5, 4, Label::non_water);
  const auto uniform_gamma = gamma_map(uniform);
  for (double g : uniform_gamma.values()) EXPECT_EQ(g, 1.0);

  Grid<Label> isolated(5, 5, Label::non_water);
  isolated(2, 2) = Label::water;
  EXPECT_DOUBLE_EQ(gamma_coefficient(isolated, 2, 2), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(gamma_map(isolated)(2, 2), 1.0 / 9.0);

  Grid<Label> corner(4, 4, Label::water);
  corner(1, 0) = Label::non_water;
  // Corner window is clipped to 2 x 2 = 4 pixels, 3 of which match.
  EXPECT_DOUBLE_EQ(gamma_coefficient(corner, 0, 0), 3.0 / 4.0);

  GammaConfig even;
  even.window = 4;
  EXPECT_THROW(gamma_map(uniform, even), Error);
}

TEST(Gamma, MapMatchesBruteForceForSeveralWindows) {
  Rng rng(41);
  Grid<Label> labels(23, 17);
  for (auto& l : labels.values()) l = rng.uniform() < 0.4 ? Label::water : Label::non_water;
  for (std::size_t s : {1u, 3u, 5u, 9u}) {
    GammaConfig cfg;
    cfg.window = s;
    const auto map = gamma_map(labels, cfg);
    for (std::size_t y = 0; y < labels.height(); ++y) {
      for (std::size_t x = 0; x < labels.width(); ++x) {
        EXPECT_DOUBLE_EQ(map(x, y), gamma_coefficient(labels, x, y, cfg));
      }
    }
  }
}

// Spectral masses -------------------------------------------------------------

TEST(SpectralMass, Examples) {
  const auto p = params_1000_5000_9000();
  const auto at_t = spectral_masses(5000.0, p, 1.0);
  EXPECT_EQ(at_t.water, 0.0);
  EXPECT_EQ(at_t.non_water, 0.0);
  EXPECT_EQ(at_t.ignorance, 1.0);

  const auto at_min = spectral_masses(1000.0, p, 1.0);
  EXPECT_EQ(at_min.water, 1.0);
  EXPECT_EQ(at_min.ignorance, 0.0);
  EXPECT_EQ(spectral_masses(9000.0, p, 1.0).non_water, 1.0);

  const auto half = spectral_masses(3000.0, p, 1.0);
  EXPECT_NEAR(half.water, (1.0 - std::exp(-0.5)) / (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(half.water, 0.6225, 1e-4);

  const auto mf = spectral_mass(3000.0, p, 1.0);
  EXPECT_DOUBLE_EQ(mf[kWater], half.water);
  EXPECT_EQ(mf[kNonWater], 0.0);
}

TEST(SpectralMass, AlphaIsALinearFactor) {
  auto p = params_1000_5000_9000();
  const double full = spectral_masses(2000.0, p, 0.8).water;
  p.alpha_water = 0.5;
  EXPECT_DOUBLE_EQ(spectral_masses(2000.0, p, 0.8).water, 0.5 * full);
  p.alpha_water = 0.0;
  EXPECT_EQ(spectral_masses(2000.0, p, 0.8).ignorance, 1.0);
}

TEST(SpectralMass, Errors) {
  const auto p = params_1000_5000_9000();
  EXPECT_THROW(spectral_masses(3000.0, p, 0.0), Error);
  EXPECT_THROW(spectral_masses(3000.0, p, 1.5), Error);
  EXPECT_THROW(SpectralModelParams::from_threshold(1000.0, 1000.0, 9000.0), Error);
}

TEST(SpectralMassProperties, ValidMonotoneSingleSingleton) {
  Rng rng(43);
  for (int trial = 0; trial < 5000; ++trial) {
    auto p = SpectralModelParams::from_threshold(rng.uniform(3000.0, 7000.0), rng.uniform(0.0, 2999.0),
                                                 rng.uniform(7001.0, 12000.0));
    p.alpha_water = rng.uniform();
    p.alpha_nonwater = rng.uniform();
    const double n = rng.uniform(p.n_min, p.n_max);
    const double g = rng.uniform(1e-6, 1.0);
    const auto m = spectral_masses(n, p, g);
    EXPECT_GE(m.water, 0.0);
    EXPECT_GE(m.non_water, 0.0);
    EXPECT_GE(m.ignorance, 0.0);
    EXPECT_NEAR(m.water + m.non_water + m.ignorance, 1.0, 1e-12);
    EXPECT_TRUE(m.water == 0.0 || m.non_water == 0.0);
    if (n < p.t) {
      const double n2 = rng.uniform(n, p.t);
      EXPECT_LE(spectral_masses(n2, p, g).water, m.water);
      EXPECT_GE(spectral_masses(n, p, std::min(1.0, g * 1.5)).water, m.water);
      auto q = p;
      q.alpha_water = std::min(1.0, p.alpha_water + 0.1);
      EXPECT_GE(spectral_masses(n, q, g).water, m.water);
    }
  }
}
