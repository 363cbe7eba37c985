#include "tracestab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

// Boost 1.74's pchip header calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "tracestab/errors.hpp"
#include "tracestab/quadrature.hpp"
#include "tracestab/specfun.hpp"

namespace tracestab::spectrum {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Far end of the log-variable integration of the non-oscillating tail part.
constexpr double kMeanCutoff = 1e8;

bool is_s1(const WeightSpec& w) {
  return w.kind() == WeightKind::Inhomogeneous && w.s() == 1.0;
}

bool has_monotone_closed_form(const WeightSpec& w) {
  return w.kind() == WeightKind::Homogeneous || is_s1(w);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

struct WeightSpec::Table {
  std::vector<double> radii;
  std::vector<double> values;
  double tail_exponent;
  // Interpolant of log w against log r.
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

WeightSpec::WeightSpec(WeightKind kind, int n, double s) : kind_(kind), n_(n), s_(s) {
  if (n < 2) throw DomainError("weight: dimension n >= 2 required");
}

WeightSpec WeightSpec::homogeneous(int n, double s) {
  if (!(s > 0.5 && s < 0.5 * n)) {
    throw DomainError("homogeneous weight: s in (1/2, n/2) required, got s=" + fmt(s));
  }
  return WeightSpec(WeightKind::Homogeneous, n, s);
}

WeightSpec WeightSpec::inhomogeneous(int n, double s) {
  if (!(s > 0.5) || !std::isfinite(s)) {
    throw DomainError("inhomogeneous weight: s > 1/2 required, got s=" + fmt(s));
  }
  return WeightSpec(WeightKind::Inhomogeneous, n, s);
}

WeightSpec WeightSpec::custom(int n, CustomTable table, std::function<double(double)> profile) {
  WeightSpec w(WeightKind::Custom, n, kNaN);
  const std::size_t m = table.radii.size();
  if (m < 4 || table.values.size() != m) {
    throw DomainError("custom weight: need at least 4 (radius, value) pairs");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(table.radii[i] > 0.0) || !(table.values[i] > 0.0) || !std::isfinite(table.values[i])) {
      throw DomainError("custom weight: radii and values must be strictly positive");
    }
    if (i > 0 && !(table.radii[i] > table.radii[i - 1])) {
      throw DomainError("custom weight: radii must be strictly increasing");
    }
  }
  if (!(table.tail_exponent > 0.0)) {
    throw DomainError("custom weight: tail exponent must be positive");
  }
  std::vector<double> lr(m), lw(m);
  for (std::size_t i = 0; i < m; ++i) {
    lr[i] = std::log(table.radii[i]);
    lw[i] = std::log(table.values[i]);
  }
  auto t = std::make_shared<Table>(Table{table.radii, table.values, table.tail_exponent,
                                         boost::math::interpolators::pchip<std::vector<double>>(
                                             std::move(lr), std::move(lw))});
  w.table_ = std::move(t);
  w.custom_profile_ = std::move(profile);
  return w;
}

double WeightSpec::operator()(double r) const {
  switch (kind_) {
    case WeightKind::Homogeneous:
      return std::pow(r, -2.0 * s_);
    case WeightKind::Inhomogeneous:
      return std::pow(1.0 + r * r, -s_);
    case WeightKind::Custom: {
      const Table& t = *table_;
      if (r <= t.radii.front()) return t.values.front();
      if (r >= t.radii.back()) {
        return t.values.back() * std::pow(r / t.radii.back(), -t.tail_exponent);
      }
      return std::exp(t.spline(std::log(r)));
    }
  }
  return kNaN;
}

double WeightSpec::tail_exponent() const {
  switch (kind_) {
    case WeightKind::Homogeneous:
    case WeightKind::Inhomogeneous:
      return 2.0 * s_;
    case WeightKind::Custom:
      return table_->tail_exponent;
  }
  return kNaN;
}

std::vector<double> WeightSpec::nodes() const {
  return table_ ? table_->radii : std::vector<double>{};
}

bool WeightSpec::has_profile() const {
  switch (kind_) {
    case WeightKind::Homogeneous:
      return true;
    case WeightKind::Inhomogeneous:
      return s_ == 0.5 * (n_ - 1) || s_ == 0.5 * (n_ + 1);
    case WeightKind::Custom:
      return static_cast<bool>(custom_profile_);
  }
  return false;
}

double WeightSpec::profile(double u) const {
  if (!has_profile()) {
    throw PreconditionError("weight " + describe() + " has no known Fourier profile");
  }
  switch (kind_) {
    case WeightKind::Homogeneous:
      return std::pow(2.0 * u, s_ - 0.5 * n_);
    case WeightKind::Inhomogeneous: {
      // c |xi|^{s-(n+1)/2} e^{-|xi|} at |xi| = sqrt(2u)
      const double xi = std::sqrt(2.0 * u);
      return std::pow(xi, s_ - 0.5 * (n_ + 1)) * std::exp(-xi);
    }
    case WeightKind::Custom:
      return custom_profile_(u);
  }
  return kNaN;
}

std::string WeightSpec::describe() const {
  switch (kind_) {
    case WeightKind::Homogeneous:
      return "homogeneous(n=" + std::to_string(n_) + ", s=" + fmt(s_) + ")";
    case WeightKind::Inhomogeneous:
      return "inhomogeneous(n=" + std::to_string(n_) + ", s=" + fmt(s_) + ")";
    case WeightKind::Custom:
      return "custom(n=" + std::to_string(n_) + ", " + std::to_string(table_->radii.size()) +
             " nodes)";
  }
  return "?";
}

nlohmann::json WeightSpec::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  switch (kind_) {
    case WeightKind::Homogeneous:
      j["kind"] = "homogeneous";
      j["s"] = s_;
      break;
    case WeightKind::Inhomogeneous:
      j["kind"] = "inhomogeneous";
      j["s"] = s_;
      break;
    case WeightKind::Custom:
      j["kind"] = "custom";
      j["radii"] = table_->radii;
      j["values"] = table_->values;
      j["tail_exponent"] = table_->tail_exponent;
      break;
  }
  return j;
}

WeightSpec WeightSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.at("n").get<int>();
  if (kind == "homogeneous") return homogeneous(n, j.at("s").get<double>());
  if (kind == "inhomogeneous") return inhomogeneous(n, j.at("s").get<double>());
  if (kind == "custom") {
    CustomTable t{j.at("radii").get<std::vector<double>>(),
                  j.at("values").get<std::vector<double>>(),
                  j.at("tail_exponent").get<double>()};
    return custom(n, std::move(t));
  }
  throw DomainError("unknown weight kind '" + kind + "'");
}

double lambda_homogeneous_closed(int n, double s, int k) {
  if (n < 2 || k < 0) throw DomainError("lambda_homogeneous_closed: n >= 2, k >= 0 required");
  if (!(s > 0.5 && s < 0.5 * n)) {
    throw DomainError("lambda_homogeneous_closed: s in (1/2, n/2) required");
  }
  const double front = std::pow(2.0, 1.0 - 2.0 * s) *
                       std::exp(specfun::log_gamma(2.0 * s - 1.0) - 2.0 * specfun::log_gamma(s));
  return front * specfun::gamma_ratio(k + 0.5 * (n - 2.0 * s), k - 1.0 + 0.5 * (n + 2.0 * s));
}

double lambda_inhomogeneous_s1(int n, int k) {
  if (n < 2 || k < 0) throw DomainError("lambda_inhomogeneous_s1: n >= 2, k >= 0 required");
  const auto ik = specfun::bessel_ik(specfun::Order::for_mode(n, k), 1.0);
  return ik.i * ik.k;
}

double watson_integral(int n, int k, double tau) {
  if (!(tau > 1.0)) throw DomainError("watson_integral: tau > 1 required");
  if (n < 2 || k < 0) throw DomainError("watson_integral: n >= 2, k >= 0 required");
  const double a = k + 0.5 * (n - tau);
  if (!(a > 0.0)) {
    throw DomainError("watson_integral: k + (n - tau)/2 > 0 required (integral diverges at 0)");
  }
  const double front = std::pow(2.0, 1.0 - tau) *
                       std::exp(specfun::log_gamma(tau - 1.0) - 2.0 * specfun::log_gamma(0.5 * tau));
  return front * specfun::gamma_ratio(a, k - 1.0 + 0.5 * (n + tau));
}

Estimate bessel_square_integral(double nu, const std::function<double(double)>& h, double alpha,
                                double tol) {
  if (!(tol > 0.0)) throw DomainError("bessel_square_integral: tol > 0 required");
  if (!(alpha > 1.0)) {
    throw ConvergenceError("bessel_square_integral: tail decays like r^-" + fmt(alpha) +
                           ", not integrable");
  }
  const specfun::Order order(nu);

  // Start the tail where cos(2 theta) vanishes, theta = r - (nu/2 + 1/4) pi
  // being the leading Hankel phase, so half-period panels alternate in sign.
  const double phase0 = (0.5 * nu + 0.25) * kPi;
  const double base = std::max(30.0, 2.0 * nu + 20.0);
  const double steps = std::ceil((base - phase0 - 0.25 * kPi) / (0.5 * kPi));
  const double r0 = phase0 + 0.25 * kPi + std::max(0.0, steps) * 0.5 * kPi;

  auto integrand = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double j = specfun::bessel_j(order, r);
    return j * j * h(r);
  };

  Estimate out;
  const double head_tol = 0.4 * tol;

  // [0, 1]: double-exponential rule absorbs the r^{2 nu} h(r) behaviour at 0.
  const double split = std::min(1.0, r0);
  {
    const auto res = quad::tanh_sinh(integrand, 0.0, split, 0.1 * head_tol, 14);
    out.value += res.value;
    out.error += res.abs_error;
  }
  // [1, r0]: adaptive panels about one period wide.
  {
    const int segments = std::max(1, static_cast<int>(std::ceil((r0 - split) / kPi)));
    const double width = (r0 - split) / segments;
    for (int i = 0; i < segments; ++i) {
      const double a = split + i * width;
      const double b = (i + 1 == segments) ? r0 : a + width;
      const auto res = quad::gauss_kronrod(integrand, a, b, 0.9 * head_tol / segments, 1e-14);
      out.value += res.value;
      out.error += res.abs_error;
    }
  }

  // J^2 = (J^2 + Y^2)/2 + (J^2 - Y^2)/2 beyond r0.  The first part is smooth
  // and monotone; integrate it in log r and add the power-law remainder.
  {
    auto mean = [&](double t) {
      const double r = r0 * std::exp(t);
      return 0.5 * specfun::bessel_modulus_sq(order, r) * h(r) * r;
    };
    const double t_end = std::log(kMeanCutoff / r0);
    const auto res = quad::gauss_kronrod(mean, 0.0, t_end, 0.2 * tol, 1e-14);
    const double far = 0.5 * specfun::bessel_modulus_sq(order, kMeanCutoff) * h(kMeanCutoff) *
                       kMeanCutoff / (alpha - 1.0);
    out.value += res.value + far;
    // Relative error of the power-law remainder is O((nu^2 + 1) / R^2).
    out.error += res.abs_error + std::fabs(far) * (nu * nu + 4.0) / (kMeanCutoff * kMeanCutoff);
  }

  // Oscillating part: half-period panels, partial sums accelerated by the
  // epsilon algorithm.
  {
    auto osc = [&](double r) {
      const auto jy = specfun::bessel_jy(order, r);
      return 0.5 * (jy.j - jy.y) * (jy.j + jy.y) * h(r);
    };
    const double osc_tol = 0.3 * tol;
    std::vector<double> partial;
    double sum = 0.0;
    double panel_error = 0.0;
    quad::Extrapolation acc{0.0, std::numeric_limits<double>::infinity()};
    int target = 24;
    for (int j = 0;; ++j) {
      const double a = r0 + j * 0.5 * kPi;
      const auto res = quad::gauss_kronrod(osc, a, a + 0.5 * kPi, 0.01 * osc_tol, 1e-15);
      sum += res.value;
      panel_error += res.abs_error;
      partial.push_back(sum);
      if (static_cast<int>(partial.size()) == target) {
        // Extrapolate from the most recent stretch only; the table is O(m^2).
        const std::size_t m = std::min<std::size_t>(partial.size(), 24);
        acc = quad::wynn_epsilon(std::span<const double>(partial).last(m));
        if (acc.change < osc_tol) break;
        if (target >= 3072) {
          throw ConvergenceError("bessel_square_integral: oscillatory tail did not settle");
        }
        target *= 2;
      }
    }
    out.value += acc.value;
    out.error += acc.change + panel_error;
  }
  return out;
}

Estimate lambda_quadrature(const WeightSpec& weight, int k, double tol) {
  if (k < 0) throw DomainError("lambda_quadrature: k >= 0 required");
  const double nu = specfun::Order::for_mode(weight.n(), k).value();
  auto h = [&weight](double r) { return r * weight(r); };
  return bessel_square_integral(nu, h, weight.tail_exponent(), tol);
}

Estimate watson_quadrature(int n, int k, double tau, double tol) {
  // validates the same preconditions as the closed form
  (void)watson_integral(n, k, tau);
  const double nu = specfun::Order::for_mode(n, k).value();
  auto h = [tau](double r) { return std::pow(r, 1.0 - tau); };
  return bessel_square_integral(nu, h, tau, tol);
}

double legendre_form_raw(const WeightSpec& weight, int k) {
  if (k < 0) throw DomainError("legendre_form_raw: k >= 0 required");
  if (!weight.has_profile()) {
    throw PreconditionError("legendre form needs the Fourier profile of " + weight.describe());
  }
  const int n = weight.n();
  const double e = 0.5 * (n - 3);
  // t = 1 - u on [0, 1] and t = v - 1 on [-1, 0]; both endpoints of each
  // piece may carry algebraic singularities.
  auto near_one = [&](double u) {
    return weight.profile(u) * specfun::legendre(n, k, 1.0 - u) * std::pow(u * (2.0 - u), e);
  };
  auto near_minus_one = [&](double v) {
    return weight.profile(2.0 - v) * specfun::legendre(n, k, v - 1.0) * std::pow(v * (2.0 - v), e);
  };
  const auto a = quad::tanh_sinh(near_one, 0.0, 1.0, 1e-15, 14);
  const auto b = quad::tanh_sinh(near_minus_one, 0.0, 1.0, 1e-15, 14);
  return specfun::sphere_area(n - 2) / std::pow(2.0 * kPi, n) * (a.value + b.value);
}

LegendreCalibration calibrate_legendre(const WeightSpec& weight) {
  const double ref0 = lambda_value(weight, 0, 1e-12).value;
  const double ref1 = lambda_value(weight, 1, 1e-12).value;
  LegendreCalibration cal;
  cal.constant = ref0 / legendre_form_raw(weight, 0);
  const double got1 = cal.constant * legendre_form_raw(weight, 1);
  cal.check_error = std::fabs(got1 - ref1) / ref1;
  if (!(cal.check_error <= 1e-6)) {
    throw InconsistencyError("legendre form: calibrated lambda_1 off by " + fmt(cal.check_error) +
                             " relative for " + weight.describe());
  }
  return cal;
}

double lambda_legendre_form(const WeightSpec& weight, int k,
                            const LegendreCalibration& calibration) {
  return calibration.constant * legendre_form_raw(weight, k);
}

double lambda_legendre_form(const WeightSpec& weight, int k) {
  return lambda_legendre_form(weight, k, calibrate_legendre(weight));
}

Estimate lambda_value(const WeightSpec& weight, int k, double tol) {
  constexpr double kClosedRel = 1e-14;
  if (weight.kind() == WeightKind::Homogeneous) {
    const double v = lambda_homogeneous_closed(weight.n(), weight.s(), k);
    return {v, kClosedRel * v};
  }
  if (is_s1(weight)) {
    const double v = lambda_inhomogeneous_s1(weight.n(), k);
    return {v, kClosedRel * v};
  }
  return lambda_quadrature(weight, k, tol);
}

namespace {

bool holder_admissible(double s, double pp, double eps) {
  const double p = pp / (pp - 1.0);
  return s > 0.5 + 1.0 / (6.0 * pp) + eps / (2.0 * p);
}

}  // namespace

std::pair<double, double> holder_exponents(const WeightSpec& weight) {
  if (weight.kind() == WeightKind::Homogeneous) {
    throw UnsupportedError("holder bound: homogeneous weights are not integrable at 0");
  }
  const double s = 0.5 * weight.tail_exponent();
  if (!(s > 0.5)) throw DomainError("holder bound: weight tail too slow");
  double pp = 6.0;
  double eps = 0.5 * std::min(1.0, 3.0 * (s - 0.5));
  if (holder_admissible(s, pp, eps)) return {pp, eps};
  // Close to s = 1/2: split the margin d = s - 1/2 evenly between the two
  // constraint terms, leaving d/2 of slack.
  const double d = s - 0.5;
  pp = std::max(6.0, 2.0 / (3.0 * d));
  eps = 0.5 * d * pp / (pp - 1.0);
  return {pp, eps};
}

std::pair<double, double> tuned_holder_exponents(const WeightSpec& weight, int k) {
  const double s = 0.5 * weight.tail_exponent();
  const bool cheap = weight.kind() == WeightKind::Inhomogeneous;
  const double dx = cheap ? 0.02 : 0.1;
  const double de = cheap ? 0.01 : 0.04;
  std::pair<double, double> best = holder_exponents(weight);
  double best_bound = holder_tail_bound(weight, k, best.first, best.second);
  for (double x = -1.5; x <= 2.5; x += dx) {
    const double pp = 1.0 + std::pow(10.0, x);
    for (double eps = de; eps < 0.99; eps += de) {
      if (!holder_admissible(s, pp, eps)) continue;
      const double b = holder_tail_bound(weight, k, pp, eps);
      if (b < best_bound) {
        best_bound = b;
        best = {pp, eps};
      }
    }
  }
  return best;
}

double holder_tail_bound(const WeightSpec& weight, int k, double p_prime, double epsilon) {
  if (weight.kind() == WeightKind::Homogeneous) {
    throw UnsupportedError("holder bound: homogeneous weights are not integrable at 0");
  }
  if (!(p_prime > 1.0) || !(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw DomainError("holder bound: p' > 1 and 0 < epsilon < 1 required");
  }
  const double p = p_prime / (p_prime - 1.0);
  const double a = p_prime - 2.0 / 3.0 + epsilon * (p_prime - 1.0);
  double wint;
  if (weight.kind() == WeightKind::Inhomogeneous) {
    const double x = 0.5 * (a + 1.0);
    const double y = weight.s() * p_prime - x;
    if (!(y > 0.0)) throw DomainError("holder bound: exponents not admissible for this s");
    wint = 0.5 * std::exp(specfun::log_gamma(x) + specfun::log_gamma(y) - specfun::log_gamma(x + y));
  } else {
    const double decay = p_prime * weight.tail_exponent() - a - 1.0;
    if (!(decay > 0.0)) throw DomainError("holder bound: exponents not admissible for this tail");
    auto f = [&](double r) { return std::pow(weight(r), p_prime) * std::pow(r, a); };
    const auto radii = weight.nodes();
    const double r_end = radii.back();
    double inner = quad::gauss_kronrod(f, 0.0, radii.front(), 0.0, 1e-12).value;
    for (std::size_t i = 1; i < radii.size(); ++i) {
      inner += quad::gauss_kronrod(f, radii[i - 1], radii[i], 0.0, 1e-12).value;
    }
    const double outer = std::pow(weight(r_end), p_prime) * std::pow(r_end, a + 1.0) / decay;
    wint = (inner + outer) * (1.0 + 1e-8);
  }
  const double watson = watson_integral(weight.n(), k, 1.0 + epsilon);
  return std::pow(specfun::kLandauConstant, 2.0 / p_prime) * std::pow(watson, 1.0 / p) *
         std::pow(wint, 1.0 / p_prime);
}

LambdaSpectrum build_spectrum(const WeightSpec& weight, int K, double tol) {
  if (K < 1) throw PreconditionError("build_spectrum: K >= 1 required");
  if (!(tol > 0.0)) throw PreconditionError("build_spectrum: tol > 0 required");

  std::vector<Estimate> est(K + 1);
  if (has_monotone_closed_form(weight)) {
    for (int k = 0; k <= K; ++k) est[k] = lambda_value(weight, k, tol);
  } else {
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    for (int start = 0; start <= K; start += static_cast<int>(workers)) {
      std::vector<std::future<Estimate>> jobs;
      const int stop = std::min(K + 1, start + static_cast<int>(workers));
      for (int k = start; k < stop; ++k) {
        jobs.push_back(std::async(std::launch::async,
                                  [&weight, k, tol] { return lambda_value(weight, k, tol); }));
      }
      for (int k = start; k < stop; ++k) est[k] = jobs[k - start].get();
    }
  }

  LambdaSpectrum out{weight, tol, {}, {}, 0.0, {}, {}};
  for (const auto& e : est) {
    out.values.push_back(e.value);
    out.errors.push_back(e.error);
  }
  int arg = 1;
  for (int k = 1; k <= K; ++k) {
    if (out.values[k] > out.values[arg]) arg = k;
  }
  out.lambda_star = out.values[arg];
  for (int k = 1; k <= K; ++k) {
    if (out.values[k] >= out.lambda_star * (1.0 - 1e-9)) out.K_set.push_back(k);
  }

  TruncationCertificate& cert = out.certificate;
  cert.K = K;
  if (has_monotone_closed_form(weight)) {
    for (int k = 1; k <= K; ++k) {
      if (!(out.values[k] < out.values[k - 1])) {
        throw InconsistencyError("build_spectrum: closed-form sequence not decreasing at k=" +
                                 std::to_string(k));
      }
    }
    cert.method = "monotone";
    cert.tail_bound = lambda_value(weight, K + 1, tol).value;
  } else {
    auto [pp, eps] = holder_exponents(weight);
    const double margin = out.lambda_star - out.errors[arg];
    double bound = holder_tail_bound(weight, K + 1, pp, eps);
    if (!(bound < margin)) {
      std::tie(pp, eps) = tuned_holder_exponents(weight, K + 1);
      bound = holder_tail_bound(weight, K + 1, pp, eps);
    }
    cert.method = "holder";
    cert.p_prime = pp;
    cert.epsilon = eps;
    cert.tail_bound = bound;
    if (!(cert.tail_bound < margin)) {
      int needed = K + 1;
      while (needed < (1 << 24) && !(holder_tail_bound(weight, needed + 1, pp, eps) < margin)) {
        needed *= 2;
      }
      throw InconclusiveError("build_spectrum: tail bound " + fmt(cert.tail_bound) +
                              " does not separate from lambda_star " + fmt(out.lambda_star) +
                              " at K=" + std::to_string(K) + "; try K >= " +
                              std::to_string(needed));
    }
  }
  return out;
}

StabilityConstant stability_constant(const LambdaSpectrum& spectrum) {
  const double c = spectrum.values.front() - spectrum.lambda_star;
  return {std::max(0.0, c), !spectrum.K_set.empty()};
}

nlohmann::json to_json(const LambdaSpectrum& spectrum) {
  nlohmann::json j;
  j["n"] = spectrum.weight.n();
  j["weight"] = spectrum.weight.to_json();
  j["tol"] = spectrum.tol;
  j["lambda"] = spectrum.values;
  j["lambda_star"] = spectrum.lambda_star;
  j["K_set"] = spectrum.K_set;
  const auto& c = spectrum.certificate;
  j["certificate"] = {{"K", c.K},
                      {"tail_bound", c.tail_bound},
                      {"method", c.method},
                      {"p_prime", c.p_prime},
                      {"epsilon", c.epsilon}};
  return j;
}

std::string to_csv(const LambdaSpectrum& spectrum) {
  std::ostringstream os;
  os << "k,lambda_k\n";
  for (std::size_t k = 0; k < spectrum.values.size(); ++k) {
    os << k << ',' << fmt(spectrum.values[k]) << '\n';
  }
  return os.str();
}

}  // namespace tracestab::spectrum
