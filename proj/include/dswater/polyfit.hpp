#pragma once

#include <span>
#include <vector>

namespace dswater {

/// Polynomial in the normalised variable u = (x - center) / half_range, with
/// coefficients in ascending powers of u.
class Polynomial {
 public:
  /// The zero polynomial.
  Polynomial() : coefficients_{0.0} {}
  Polynomial(std::vector<double> coefficients, double center, double half_range);

  double operator()(double x) const noexcept;
  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double center() const noexcept { return center_; }
  double half_range() const noexcept { return half_range_; }

 private:
  std::vector<double> coefficients_;
  double center_ = 0.0;
  double half_range_ = 1.0;
};

struct PolyFit {
  Polynomial polynomial;
  /// Euclidean norm of the residual vector.
  double residual_norm = 0.0;
};

/// Least-squares fit of the given degree. The abscissae are mapped onto
/// [-1, 1] and the system is solved by Householder QR. Needs more points
/// than the degree and at least two distinct abscissae.
PolyFit fit_polynomial(std::span<const double> xs, std::span<const double> ys, int degree);

/// Degree-5 fit; fewer than 7 points raises insufficient-separation.
PolyFit fit_poly5(std::span<const double> xs, std::span<const double> ys);

}  // namespace dswater
