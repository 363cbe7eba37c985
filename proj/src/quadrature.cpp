#include "tracestab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "tracestab/errors.hpp"

namespace tracestab::quad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod 21-point abscissae (positive half, descending) and weights; the odd
// entries are the 10-point Gauss abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600527400230, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

Result kronrod_panel(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[10];
  double resg = 0.0;
  double resabs = std::fabs(resk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = resk * 0.5;
  double resasc = kWgk[10] * std::fabs(fc - mean);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
  }
  const double absh = std::fabs(half);
  resk *= half;
  resabs *= absh;
  resasc *= absh;
  double err = std::fabs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {resk, err, 21, true};
}

Result gauss_kronrod(const Integrand& f, double a, double b, double abs_tol,
                     double rel_tol, int max_intervals) {
  if (a == b) return {0.0, 0.0, 0, true};
  std::priority_queue<Panel> heap;
  Result first = kronrod_panel(f, a, b);
  heap.push({a, b, first.value, first.abs_error});
  double total = first.value;
  double total_err = first.abs_error;
  int evals = first.evaluations;
  int intervals = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total))) {
    if (intervals >= max_intervals) {
      return {total, total_err, evals, false};
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      heap.push(worst);
      return {total, total_err, evals, false};
    }
    const Result left = kronrod_panel(f, worst.a, mid);
    const Result right = kronrod_panel(f, mid, worst.b);
    evals += 42;
    ++intervals;
    total += left.value + right.value - worst.value;
    heap.push({worst.a, mid, left.value, left.abs_error});
    heap.push({mid, worst.b, right.value, right.abs_error});
    // Recompute the error sum from the heap to avoid drift.
    total_err = 0.0;
    auto copy = heap;
    while (!copy.empty()) {
      total_err += copy.top().error;
      copy.pop();
    }
  }
  return {total, total_err, evals, true};
}

Result tanh_sinh(const Integrand& f, double a, double b, double tol, int max_level) {
  if (a == b) return {0.0, 0.0, 0, true};
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  const double half = 0.5 * (b - a);
  // Wide enough that nodes reach ~1e-200 from the ends, so u^{-0.9}-type
  // endpoint singularities lose no visible mass.
  const double t_max = 5.0;
  int evals = 0;

  // Contribution of one abscissa t; returns 0 when the node collapses onto an
  // endpoint in floating point.
  auto node = [&](double t) {
    const double u = kHalfPi * std::sinh(t);
    const double e = std::exp(-2.0 * std::fabs(u));
    const double gap = half * 2.0 * e / (1.0 + e);  // distance to nearer end
    if (gap <= 0.0) return 0.0;
    const double x = (u > 0.0) ? b - gap : a + gap;
    if (x <= a || x >= b) return 0.0;
    const double sech = 2.0 * std::sqrt(e) / (1.0 + e);
    const double w = half * kHalfPi * std::cosh(t) * sech * sech;
    if (w == 0.0) return 0.0;
    ++evals;
    const double fx = f(x);
    return std::isfinite(fx) ? w * fx : 0.0;
  };

  double h = 1.0;
  double sum = node(0.0);
  for (int k = 1; k * h <= t_max; ++k) sum += node(k * h) + node(-k * h);
  double estimate = h * sum;
  double previous = estimate;
  double err = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (int k = 1; k * h <= t_max; k += 2) add += node(k * h) + node(-k * h);
    sum += add;
    estimate = h * sum;
    err = std::fabs(estimate - previous);
    if (level >= 3 && err <= tol) {
      return {estimate, err, evals, true};
    }
    previous = estimate;
  }
  return {estimate, err, evals, false};
}

Rule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p1 = 1.0, p2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

Rule gauss_legendre(int n, double a, double b) {
  Rule rule = gauss_legendre(n);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = c + h * rule.nodes[i];
    rule.weights[i] *= h;
  }
  return rule;
}

Rule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw DomainError("composite_gauss_legendre: need panels >= 1");
  const Rule base = gauss_legendre(order);
  Rule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
  rule.weights.reserve(static_cast<std::size_t>(panels) * order);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double c = lo + 0.5 * width;
    for (int i = 0; i < order; ++i) {
      rule.nodes.push_back(c + 0.5 * width * base.nodes[i]);
      rule.weights.push_back(0.5 * width * base.weights[i]);
    }
  }
  return rule;
}

Extrapolation wynn_epsilon(std::span<const double> partial_sums) {
  const std::size_t n = partial_sums.size();
  if (n == 0) return {0.0, std::numeric_limits<double>::infinity()};
  if (n < 3) {
    const double last = partial_sums.back();
    const double change = n == 2 ? std::fabs(last - partial_sums[0])
                                 : std::numeric_limits<double>::infinity();
    return {last, change};
  }
  // e[k] holds column entries; even columns are estimates.
  std::vector<std::vector<double>> table(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) table[i][1] = partial_sums[i];
  for (std::size_t col = 2; col <= n; ++col) {
    for (std::size_t i = 0; i + col <= n; ++i) {
      const double diff = table[i + 1][col - 1] - table[i][col - 1];
      if (diff == 0.0) {
        table[i][col] = table[i + 1][col - 2] + 1e300;
      } else {
        table[i][col] = table[i + 1][col - 2] + 1.0 / diff;
      }
    }
  }
  // Highest odd column (estimates live in columns 1, 3, 5, ...) whose entry
  // is finite; a zero difference upstream poisons later columns.
  auto usable = [](double v) { return std::isfinite(v) && std::fabs(v) < 1e200; };
  std::size_t best_col = (n % 2 == 1) ? n : n - 1;
  while (best_col > 1 && !usable(table[0][best_col])) best_col -= 2;
  const double value = table[0][best_col];
  double other;
  if (best_col >= 3 && usable(table[1][best_col - 2])) {
    other = table[1][best_col - 2];
  } else {
    other = partial_sums[n - 2];
  }
  return {value, std::fabs(value - other)};
}

}  // namespace tracestab::quad
