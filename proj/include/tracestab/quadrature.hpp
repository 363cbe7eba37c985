#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tracestab::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;  // estimated absolute error
  int evaluations = 0;
  bool converged = true;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (10/21) on [a, b].  Splits the interval
/// with the largest error estimate until the total estimate meets
/// max(abs_tol, rel_tol * |value|) or max_intervals is reached.
Result gauss_kronrod(const Integrand& f, double a, double b, double abs_tol,
                     double rel_tol = 0.0, int max_intervals = 2000);

/// Single 21-point Kronrod panel, with the embedded Gauss difference as
/// error estimate.
Result kronrod_panel(const Integrand& f, double a, double b);

/// Double-exponential (tanh-sinh) rule on [a, b]; tolerant of integrable
/// algebraic singularities at either endpoint.
Result tanh_sinh(const Integrand& f, double a, double b, double tol,
                 int max_level = 12);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule gauss_legendre(int n);

/// Same rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre rule: `panels` equal panels on [a, b], `order`
/// nodes per panel.
Rule composite_gauss_legendre(double a, double b, int panels, int order);

/// Wynn epsilon extrapolation of a sequence of partial sums.  Returns the
/// last diagonal estimate and the difference to the previous one.
struct Extrapolation {
  double value;
  double change;
};
Extrapolation wynn_epsilon(std::span<const double> partial_sums);

}  // namespace tracestab::quad
