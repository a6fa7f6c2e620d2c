#pragma once

/// \file chebyshev.hpp
/// \brief Chebyshev polynomials and the amplification polynomials built from them.
///
/// The amplification polynomial of degree M is a Chebyshev polynomial
/// stretched so that it equals 1 at lambda = 1, equals +-1/3 at lambda = -1,
/// and stays inside [-1/3, 1/3] on [-1, lambda_max(M)]:
///
///     G_M(lambda) = T_M(f(lambda)) / 3,   f(lambda) = ((s + 1) lambda + (s - 1)) / 2
///
/// where s = lambda_star(M) solves T_M(s) = 3.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace srj {

/// Bounding value of the amplification polynomials on their damped interval.
inline constexpr double kAmplificationBound = 1.0 / 3.0;

/// T_M(x). Trigonometric form inside [-1, 1], hyperbolic form outside.
inline double chebyshev_t(int degree, double x) {
  if (degree < 0) throw std::invalid_argument("chebyshev_t: negative degree");
  if (degree == 0) return 1.0;
  const double m = static_cast<double>(degree);
  if (std::abs(x) <= 1.0) return std::cos(m * std::acos(x));
  const double magnitude = std::cosh(m * std::acosh(std::abs(x)));
  if (x > 0.0 || degree % 2 == 0) return magnitude;
  return -magnitude;
}

/// T_M'(x) = M U_{M-1}(x), only for x > 1 where U_{n}(cosh t) = sinh((n+1)t)/sinh(t).
inline double chebyshev_t_derivative_above_one(int degree, double x) {
  if (degree < 1) throw std::invalid_argument("chebyshev_t_derivative: degree must be >= 1");
  if (!(x > 1.0)) throw std::domain_error("chebyshev_t_derivative_above_one: x must exceed 1");
  const double m = static_cast<double>(degree);
  const double t = std::acosh(x);
  return m * std::sinh(m * t) / std::sinh(t);
}

/// Roots of T_M in descending order: cos(pi (2j+1) / (2M)), j = 0..M-1.
inline std::vector<double> chebyshev_roots(int degree) {
  if (degree < 1) throw std::invalid_argument("chebyshev_roots: degree must be >= 1");
  std::vector<double> roots(static_cast<std::size_t>(degree));
  const double m = static_cast<double>(degree);
  for (int j = 0; j < degree; ++j) {
    roots[static_cast<std::size_t>(j)] = std::cos(std::numbers::pi * (2.0 * j + 1.0) / (2.0 * m));
  }
  // cos(pi/2) is 6e-17 in floating point; the middle root of an odd degree is exactly zero.
  if (degree % 2 == 1) roots[static_cast<std::size_t>(degree / 2)] = 0.0;
  return roots;
}

/// The argument lambda* > 1 with T_M(lambda*) = 3, in closed form.
inline double lambda_star(int degree) {
  if (degree < 1) throw std::invalid_argument("lambda_star: degree must be >= 1");
  return std::cosh(std::acosh(3.0) / static_cast<double>(degree));
}

/// f: maps [-1, 1] (Jacobi eigenvalues) onto [-1, lambda*].
inline double affine_f(double lambda_star_value, double lambda) {
  return ((lambda_star_value + 1.0) * lambda + (lambda_star_value - 1.0)) / 2.0;
}

/// g = f^{-1}.
inline double affine_g(double lambda_star_value, double x) {
  return 2.0 * x / (lambda_star_value + 1.0) + (1.0 - lambda_star_value) / (1.0 + lambda_star_value);
}

/// Largest Jacobi eigenvalue still damped by at least 1/3: g(1).
inline double lambda_max(int degree) {
  const double s = lambda_star(degree);
  return (3.0 - s) / (1.0 + s);
}

/// Degree-M amplification polynomial with its cached constants.
class AmplificationPolynomial {
 public:
  explicit AmplificationPolynomial(int degree)
      : degree_(degree), lambda_star_(srj::lambda_star(degree)), lambda_max_((3.0 - lambda_star_) / (1.0 + lambda_star_)) {}

  int degree() const noexcept { return degree_; }
  double lambda_star() const noexcept { return lambda_star_; }
  double lambda_max() const noexcept { return lambda_max_; }

  double operator()(double lambda) const {
    return chebyshev_t(degree_, affine_f(lambda_star_, lambda)) / 3.0;
  }

  /// G_M'(1) = T_M'(lambda*) (lambda* + 1) / 6.
  double slope_at_one() const {
    return chebyshev_t_derivative_above_one(degree_, lambda_star_) * (lambda_star_ + 1.0) / 6.0;
  }

 private:
  int degree_;
  double lambda_star_;
  double lambda_max_;
};

/// G_M(lambda).
inline double amplification_eval(int degree, double lambda) {
  return AmplificationPolynomial(degree)(lambda);
}

/// Max |G_M| over a uniform grid on [-1, lambda_max(M)].
///
/// Extrema of G_M crowd together for large M, so the grid is doubled once M
/// exceeds 2500.
inline double amplification_peak_on_damped_interval(int degree, std::size_t grid_points = 10001) {
  if (grid_points < 2) throw std::invalid_argument("amplification_peak: need at least two grid points");
  if (degree > 2500) grid_points *= 2;
  const AmplificationPolynomial g(degree);
  const double lo = -1.0;
  const double hi = g.lambda_max();
  double peak = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    peak = std::max(peak, std::abs(g(lo + t * (hi - lo))));
  }
  return peak;
}

}  // namespace srj
