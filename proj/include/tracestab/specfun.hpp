#pragma once

// Real-argument special functions: Gamma, Bessel J/Y of real order, modified
// Bessel I/K, and the n-dimensional Legendre (normalized Gegenbauer)
// polynomials.

namespace tracestab::specfun {

/// Bessel order nu >= 0.
class Order {
 public:
  explicit Order(double nu);

  /// Order k + (n-2)/2 attached to the degree-k harmonic block in R^n.
  static Order for_mode(int n, int k);

  double value() const noexcept { return nu_; }

 private:
  double nu_;
};

/// sup_x x^{1/3}|J_nu(x)| over all nu >= 0 (Landau), rounded up.
inline constexpr double kLandauConstant = 0.7857468705;

double gamma(double x);
double log_gamma(double x);

/// Gamma(a)/Gamma(b) for a, b > 0 without intermediate overflow.
double gamma_ratio(double a, double b);

double bessel_j(Order order, double x);
double bessel_y(Order order, double x);

struct BesselPair {
  double j;
  double y;
};

/// J_nu(x) and Y_nu(x) together; x > 0.
BesselPair bessel_jy(Order order, double x);

/// J_nu(x)^2 + Y_nu(x)^2. Smooth and non-oscillating for x > nu.
double bessel_modulus_sq(Order order, double x);

double bessel_i(Order order, double x);
double bessel_k(Order order, double x);

struct ModifiedPair {
  double i;
  double k;
};
ModifiedPair bessel_ik(Order order, double x);

/// Power series for J_nu summed until terms drop below machine precision.
/// Accurate when x^2 is not much larger than 4(nu+1).
double bessel_j_series(double nu, double x);

/// P_{n,k}(t): degree-k zonal polynomial on S^{n-1} normalized so P(1) = 1.
double legendre(int n, int k, double t);

/// Exact finite forms for half-integer orders l + 1/2 (terminating Hankel
/// expansions).  Used as independent cross-checks.
namespace half_integer {
double bessel_j(int l, double x);
double bessel_i(int l, double x);
double bessel_k(int l, double x);
}  // namespace half_integer

/// Surface measure of the unit sphere S^{d} in R^{d+1}.
double sphere_area(int d);

/// dim H_k for spherical harmonics on S^{n-1}.
long harmonic_dimension(int n, int k);

}  // namespace tracestab::specfun
