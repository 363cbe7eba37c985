#pragma once

// Eigenvalues lambda_k(w) = int_0^inf J_{k+(n-2)/2}(r)^2 r w(r) dr of the
// sphere trace operator, the sharp constant lambda_0 and the stability
// constant lambda_0 - lambda_star.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tracestab::spectrum {

enum class WeightKind { Homogeneous, Inhomogeneous, Custom };

// Tabulated weight: positive values at increasing radii, interpolated by a
// monotone cubic in log-log coordinates.  Below the first node the weight is
// held constant; beyond the last node it decays like r^{-tail_exponent}.
struct CustomTable {
  std::vector<double> radii;
  std::vector<double> values;
  double tail_exponent = 2.0;
};

class WeightSpec {
 public:
  // w(r) = r^{-2s}, s in (1/2, n/2).
  static WeightSpec homogeneous(int n, double s);
  // w(r) = (1 + r^2)^{-s}, s > 1/2.
  static WeightSpec inhomogeneous(int n, double s);
  // `profile`, when given, is F_w up to a positive constant: F_w(|xi|^2/2) is
  // proportional to the Fourier transform of w(|.|).
  static WeightSpec custom(int n, CustomTable table,
                           std::function<double(double)> profile = {});

  double operator()(double r) const;

  WeightKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }
  // Exponent parameter for the two closed families; NaN for custom weights.
  double s() const noexcept { return s_; }

  // w(r) ~ c r^{-a} as r -> infinity; returns a.
  double tail_exponent() const;

  // Table radii of a custom weight (empty for the closed families).
  std::vector<double> nodes() const;

  // True when F_w is known up to a constant (see profile()).
  bool has_profile() const;
  // F_w(u) up to a positive constant.  Throws PreconditionError when no
  // profile is available.
  double profile(double u) const;

  std::string describe() const;
  nlohmann::json to_json() const;
  static WeightSpec from_json(const nlohmann::json& j);

 private:
  struct Table;
  WeightSpec(WeightKind kind, int n, double s);

  WeightKind kind_;
  int n_;
  double s_;
  std::shared_ptr<const Table> table_;
  std::function<double(double)> custom_profile_;
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // bound on the absolute error
};

double lambda_homogeneous_closed(int n, double s, int k);

// I_nu(1) K_nu(1) with nu = k + (n-2)/2: lambda_k for w = (1+r^2)^{-1}.
double lambda_inhomogeneous_s1(int n, int k);

// Direct quadrature of the defining Bessel integral, with absolute error
// at most `tol`.
Estimate lambda_quadrature(const WeightSpec& weight, int k, double tol);

// int_0^inf J_{k+(n-2)/2}(r)^2 r^{1-tau} dr in closed form.
double watson_integral(int n, int k, double tau);

// The same integral by quadrature.
Estimate watson_quadrature(int n, int k, double tau, double tol);

// int_0^inf J_nu(r)^2 h(r) dr for h positive, at worst integrably singular
// at 0 against J_nu^2, and with h(r) ~ c r^{1-alpha} at infinity, alpha > 1.
Estimate bessel_square_integral(double nu, const std::function<double(double)>& h,
                                double alpha, double tol);

// Legendre (zonal) representation of lambda_k.  The profile F_w is only
// known up to a constant; calibrate() fixes it from lambda_0.
struct LegendreCalibration {
  double constant = 0.0;     // multiplies the uncalibrated integral
  double check_error = 0.0;  // relative mismatch at k = 1 after calibration
};

// |S^{n-2}| (2 pi)^{-n} int_{-1}^{1} F(1-t) P_{n,k}(t) (1-t^2)^{(n-3)/2} dt
// with the weight's uncalibrated profile F.
double legendre_form_raw(const WeightSpec& weight, int k);

// Throws InconsistencyError when lambda_1 disagrees with the reference by
// more than 1e-6 relative after calibration on lambda_0.
LegendreCalibration calibrate_legendre(const WeightSpec& weight);

double lambda_legendre_form(const WeightSpec& weight, int k);
double lambda_legendre_form(const WeightSpec& weight, int k,
                            const LegendreCalibration& calibration);

// How sup_{k > K} lambda_k was bounded.
struct TruncationCertificate {
  int K = 0;
  double tail_bound = 0.0;  // proven bound on sup_{k > K} lambda_k
  std::string method;       // "monotone" or "holder"
  // Hoelder exponents used by the "holder" method (0 otherwise).
  double p_prime = 0.0;
  double epsilon = 0.0;
};

struct LambdaSpectrum {
  WeightSpec weight;
  double tol = 0.0;
  std::vector<double> values;  // lambda_0 .. lambda_K
  std::vector<double> errors;  // absolute error bound per value
  double lambda_star = 0.0;
  std::vector<int> K_set;
  TruncationCertificate certificate;
};

// Best available value of lambda_k: closed form where one exists,
// quadrature otherwise.
Estimate lambda_value(const WeightSpec& weight, int k, double tol);

// Hoelder/Landau upper bound on lambda_k valid for every k' >= k.
double holder_tail_bound(const WeightSpec& weight, int k, double p_prime, double epsilon);

// Default admissible exponents (p', epsilon) for the Hoelder bound.
std::pair<double, double> holder_exponents(const WeightSpec& weight);

// Admissible (p', epsilon) on a fixed grid minimizing the bound at k.
std::pair<double, double> tuned_holder_exponents(const WeightSpec& weight, int k);

// Tries holder_exponents() first, then tuned_holder_exponents().
// Throws InconclusiveError when sup_{k > K} lambda_k < lambda_star cannot be
// certified.
LambdaSpectrum build_spectrum(const WeightSpec& weight, int K, double tol = 1e-10);

struct StabilityConstant {
  double value = 0.0;           // lambda_0 - lambda_star
  bool extremisers_exist = false;  // K_set is nonempty
};

StabilityConstant stability_constant(const LambdaSpectrum& spectrum);

nlohmann::json to_json(const LambdaSpectrum& spectrum);
std::string to_csv(const LambdaSpectrum& spectrum);

}  // namespace tracestab::spectrum
