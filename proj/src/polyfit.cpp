#include "dswater/polyfit.hpp"

#include <algorithm>
#include <cmath>

#include "dswater/error.hpp"

namespace dswater {

Polynomial::Polynomial(std::vector<double> coefficients, double center, double half_range)
    : coefficients_(std::move(coefficients)), center_(center), half_range_(half_range) {
  if (coefficients_.empty()) throw Error(Errc::invalid_argument, "polynomial needs coefficients");
  if (!(half_range_ > 0.0)) throw Error(Errc::invalid_argument, "half range must be positive");
}

double Polynomial::operator()(double x) const noexcept {
  const double u = (x - center_) / half_range_;
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

PolyFit fit_polynomial(std::span<const double> xs, std::span<const double> ys, int degree) {
  if (degree < 0) throw Error(Errc::invalid_argument, "negative degree");
  if (xs.size() != ys.size()) throw Error(Errc::invalid_argument, "xs and ys differ in length");
  const std::size_t rows = xs.size();
  const std::size_t cols = static_cast<std::size_t>(degree) + 1;
  if (rows < cols) {
    throw Error(Errc::invalid_argument, "a degree-" + std::to_string(degree) + " fit needs at least " +
                                            std::to_string(cols) + " points");
  }
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double center = 0.5 * (*lo + *hi);
  const double half = 0.5 * (*hi - *lo);
  if (!(half > 0.0)) throw Error(Errc::invalid_argument, "abscissae are all equal");

  // Column-major Vandermonde matrix in u, reduced in place to R.
  std::vector<double> a(rows * cols);
  std::vector<double> b(ys.begin(), ys.end());
  for (std::size_t i = 0; i < rows; ++i) {
    const double u = (xs[i] - center) / half;
    double p = 1.0;
    for (std::size_t j = 0; j < cols; ++j) {
      a[j * rows + i] = p;
      p *= u;
    }
  }
  const auto at = [&](std::size_t i, std::size_t j) -> double& { return a[j * rows + i]; };

  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm += at(i, k) * at(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error(Errc::invalid_argument, "rank-deficient polynomial system");
    const double alpha = at(k, k) > 0.0 ? -norm : norm;
    // v = x - alpha e1, stored over column k.
    at(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < rows; ++i) vnorm2 += at(i, k) * at(i, k);
    for (std::size_t j = k + 1; j < cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < rows; ++i) dot += at(i, k) * at(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < rows; ++i) at(i, j) -= f * at(i, k);
    }
    double dot = 0.0;
    for (std::size_t i = k; i < rows; ++i) dot += at(i, k) * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < rows; ++i) b[i] -= f * at(i, k);
    at(k, k) = alpha;
  }

  std::vector<double> coef(cols);
  for (std::size_t k = cols; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < cols; ++j) s -= at(k, j) * coef[j];
    coef[k] = s / at(k, k);
  }
  double residual = 0.0;
  for (std::size_t i = cols; i < rows; ++i) residual += b[i] * b[i];

  return PolyFit{Polynomial(std::move(coef), center, half), std::sqrt(residual)};
}

PolyFit fit_poly5(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 7) {
    throw Error(Errc::insufficient_separation,
                "only " + std::to_string(xs.size()) + " histogram bins between the peaks, need 7");
  }
  return fit_polynomial(xs, ys, 5);
}

}  // namespace dswater
