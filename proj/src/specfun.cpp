#include "tracestab/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tracestab/errors.hpp"

namespace tracestab::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 2000000;

// Taylor coefficients of 1/Gamma(1+z) about z = 0.
constexpr std::array<double, 26> kRecipGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538,
    -0.0420026350340952, 0.1665386113822915,  -0.0421977345555443,
    -0.0096219715278770, 0.0072189432466630,  -0.0011651675918591,
    -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417,
    0.0000000061160950,  0.0000000050020075,  -0.0000000011812746,
    0.0000000001043427,  0.0000000000077823,  -0.0000000000036968,
    0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

// Temme's auxiliary functions for |mu| <= 1/2.
struct TemmeGammas {
  double gam1;   // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
  double gam2;   // (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
  double gampl;  // 1/Gamma(1+mu)
  double gammi;  // 1/Gamma(1-mu)
};

TemmeGammas temme_gammas(double mu) {
  double even = 0.0;
  double odd = 0.0;
  double power = 1.0;
  for (std::size_t k = 0; k < kRecipGamma.size(); ++k) {
    if (k % 2 == 0) {
      even += kRecipGamma[k] * power;
    } else {
      odd += kRecipGamma[k] * power;
    }
    if (k % 2 == 1) power *= mu * mu;
  }
  // even = sum_{k even} c_k mu^k, odd = sum_{k odd} c_k mu^{k-1}
  TemmeGammas g{};
  g.gam1 = -odd;
  g.gam2 = even;
  g.gampl = even + mu * odd;
  g.gammi = even - mu * odd;
  return g;
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(what) + ": argument must be positive, got " +
                      std::to_string(x));
  }
}

// Hankel asymptotic coefficients a_k(nu)/x^k summed into P and Q.
struct HankelPQ {
  double p;
  double q;
};

HankelPQ hankel_pq(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double p = 1.0;
  double q = 0.0;
  double last = 1.0;
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::fabs(term);
    if (term == 0.0) break;
    // Terms may grow while (2k-1) < 2nu; past that the series is asymptotic
    // and is cut at its smallest term.
    if (mag > last && odd > 2.0 * nu) break;
    last = mag;
    // a_k/x^k enters P with sign (-1)^{k/2} for even k, Q with (-1)^{(k-1)/2}.
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
    }
    if (mag < kEps * 1e-2 * std::fabs(p)) break;
  }
  return {p, q};
}

double hankel_threshold(double nu) { return std::max(35.0, nu * nu / 12.0); }

BesselPair jy_hankel(double nu, double x) {
  const auto [p, q] = hankel_pq(nu, x);
  // omega = x - (nu/2 + 1/4) pi, evaluated via angle addition so that the
  // large argument x is reduced exactly by the math library.
  const double phase = (0.5 * nu + 0.25) * kPi;
  const double cx = std::cos(x), sx = std::sin(x);
  const double cp = std::cos(phase), sp = std::sin(phase);
  const double cw = cx * cp + sx * sp;
  const double sw = sx * cp - cx * sp;
  const double amp = std::sqrt(2.0 / (kPi * x));
  return {amp * (p * cw - q * sw), amp * (p * sw + q * cw)};
}

// Steed's method (continued fractions CF1, CF2) with Temme's series for small
// x; returns J and Y.
BesselPair jy_steed(double nu, double x) {
  constexpr double kXmin = 2.0;
  const int nl = x < kXmin ? static_cast<int>(nu + 0.5)
                           : std::max(0, static_cast<int>(nu - x + 1.5));
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double w = xi2 / kPi;

  // CF1: J'_nu/J_nu by modified Lentz.
  int isign = 1;
  double h = nu * xi;
  if (h < kTiny) h = kTiny;
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 1;
  for (; i <= kMaxIter; ++i) {
    b += xi2;
    d = b - d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b - 1.0 / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  if (i > kMaxIter) throw ConvergenceError("bessel_jy: CF1 did not converge");

  double rjl = isign * kTiny;
  double rjpl = h * rjl;
  double rjl1 = rjl;
  double rjp1 = rjpl;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
    if (std::fabs(rjl) > 1e250) {
      rjl *= 1e-250;
      rjpl *= 1e-250;
      rjl1 *= 1e-250;
      rjp1 *= 1e-250;
    }
  }
  if (rjl == 0.0) rjl = kEps;
  const double f = rjpl / rjl;

  double rjmu, rymu, rymup, ry1;
  if (x < kXmin) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * xmu;
    const double fct = std::fabs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double dd = -std::log(x2);
    double e = xmu * dd;
    const double fct2 = std::fabs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(xmu);
    double ff = 2.0 / kPi * fct * (g.gam1 * std::cosh(e) + g.gam2 * fct2 * dd);
    e = std::exp(e);
    double p = e / (g.gampl * kPi);
    double q = 1.0 / (e * kPi * g.gammi);
    const double pimu2 = 0.5 * pimu;
    const double fct3 = std::fabs(pimu2) < kEps ? 1.0 : std::sin(pimu2) / pimu2;
    const double r = kPi * pimu2 * fct3 * fct3;
    double cc = 1.0;
    dd = -x2 * x2;
    double sum = ff + r * q;
    double sum1 = p;
    int k = 1;
    for (; k <= kMaxIter; ++k) {
      ff = (k * ff + p + q) / (k * k - xmu2);
      cc *= dd / k;
      p /= (k - xmu);
      q /= (k + xmu);
      const double del = cc * (ff + r * q);
      sum += del;
      const double del1 = cc * p - k * del;
      sum1 += del1;
      if (std::fabs(del) < (1.0 + std::fabs(sum)) * kEps) break;
    }
    if (k > kMaxIter) throw ConvergenceError("bessel_jy: Temme series failed");
    rymu = -sum;
    ry1 = -sum1 * xi2;
    rymup = xmu * xi * rymu - ry1;
    rjmu = w / (rymup - f * rymu);
  } else {
    double a = 0.25 - xmu2;
    double p = -0.5 * xi;
    double q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = a * xi / (p * p + q * q);
    double cr = br + q * fct;
    double ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den;
    double di = -bi / den;
    double dlr = cr * dr - ci * di;
    double dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    int k = 2;
    for (; k <= kMaxIter; ++k) {
      a += 2 * (k - 1);
      bi += 2.0;
      dr = a * dr + br;
      di = a * di + bi;
      if (std::fabs(dr) + std::fabs(di) < kTiny) dr = kTiny;
      fct = a / (cr * cr + ci * ci);
      cr = br + cr * fct;
      ci = bi - ci * fct;
      if (std::fabs(cr) + std::fabs(ci) < kTiny) cr = kTiny;
      den = dr * dr + di * di;
      dr /= den;
      di /= -den;
      dlr = cr * dr - ci * di;
      dli = cr * di + ci * dr;
      temp = p * dlr - q * dli;
      q = p * dli + q * dlr;
      p = temp;
      if (std::fabs(dlr - 1.0) + std::fabs(dli) < kEps) break;
    }
    if (k > kMaxIter) throw ConvergenceError("bessel_jy: CF2 did not converge");
    const double gam = (p - f) / q;
    rjmu = std::sqrt(w / ((p - f) * gam + q));
    rjmu = std::copysign(rjmu, rjl);
    rymu = rjmu * gam;
    rymup = rymu * (p + q / gam);
    ry1 = xmu * xi * rymu - rymup;
  }
  const double scale = rjmu / rjl;
  const double rj = rjl1 * scale;
  for (int k = 1; k <= nl; ++k) {
    const double rytemp = (xmu + k) * xi2 * ry1 - rymu;
    rymu = ry1;
    ry1 = rytemp;
  }
  return {rj, rymu};
}

}  // namespace

Order::Order(double nu) : nu_(nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw DomainError("Bessel order must be finite and non-negative");
  }
}

Order Order::for_mode(int n, int k) {
  if (n < 2 || k < 0) throw DomainError("for_mode: need n >= 2 and k >= 0");
  return Order(k + 0.5 * (n - 2));
}

double gamma(double x) {
  require_positive(x, "gamma");
  return std::tgamma(x);
}

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  return std::lgamma(x);
}

double gamma_ratio(double a, double b) {
  require_positive(a, "gamma_ratio");
  require_positive(b, "gamma_ratio");
  if (a < 170.0 && b < 170.0) return std::tgamma(a) / std::tgamma(b);
  return std::exp(std::lgamma(a) - std::lgamma(b));
}

namespace {

// (x/2)^nu / Gamma(nu+1) * sum_k (sign x^2/4)^k / (k! (nu+1)_k)
double power_series(double nu, double x, double sign) {
  const double half = 0.5 * x;
  const double q = sign * half * half;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (std::fabs(term) < kEps * 0.25 * std::fabs(sum)) break;
  }
  double lead;
  if (nu < 150.0 && half > 1e-200) {
    lead = std::pow(half, nu) / std::tgamma(nu + 1.0);
  } else {
    lead = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
  }
  return lead * sum;
}

}  // namespace

double bessel_j_series(double nu, double x) { return power_series(nu, x, -1.0); }

BesselPair bessel_jy(Order order, double x) {
  require_positive(x, "bessel_jy");
  const double nu = order.value();
  if (x >= hankel_threshold(nu)) return jy_hankel(nu, x);
  BesselPair out = jy_steed(nu, x);
  if (x * x < 4.0 * (nu + 1.0)) out.j = power_series(nu, x, -1.0);
  return out;
}

double bessel_j(Order order, double x) {
  if (x < 0.0 || std::isnan(x)) throw DomainError("bessel_j: negative argument");
  const double nu = order.value();
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x * x < 4.0 * (nu + 1.0)) return bessel_j_series(nu, x);
  return bessel_jy(order, x).j;
}

double bessel_y(Order order, double x) { return bessel_jy(order, x).y; }

double bessel_modulus_sq(Order order, double x) {
  require_positive(x, "bessel_modulus_sq");
  const double nu = order.value();
  if (x >= hankel_threshold(nu)) {
    const auto [p, q] = hankel_pq(nu, x);
    return 2.0 / (kPi * x) * (p * p + q * q);
  }
  const auto [j, y] = jy_steed(nu, x);
  return j * j + y * y;
}

ModifiedPair bessel_ik(Order order, double x) {
  if (x < 0.0 || std::isnan(x)) throw DomainError("bessel_ik: negative argument");
  require_positive(x, "bessel_ik");
  const double nu = order.value();
  constexpr double kXmin = 2.0;
  const int nl = static_cast<int>(nu + 0.5);
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  double h = nu * xi;
  if (h < kTiny) h = kTiny;
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 1;
  for (; i <= kMaxIter; ++i) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  if (i > kMaxIter) throw ConvergenceError("bessel_ik: CF1 did not converge");

  double ril = kTiny;
  double ripl = h * ril;
  double ril1 = ril;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
    if (std::fabs(ril) > 1e250) {
      ril *= 1e-250;
      ripl *= 1e-250;
      ril1 *= 1e-250;
    }
  }
  const double f = ripl / ril;

  double rkmu, rk1;
  if (x < kXmin) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * xmu;
    const double fct = std::fabs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double dd = -std::log(x2);
    double e = xmu * dd;
    const double fct2 = std::fabs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(xmu);
    double ff = fct * (g.gam1 * std::cosh(e) + g.gam2 * fct2 * dd);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double cc = 1.0;
    dd = x2 * x2;
    double sum1 = p;
    int k = 1;
    for (; k <= kMaxIter; ++k) {
      ff = (k * ff + p + q) / (k * k - xmu2);
      cc *= dd / k;
      p /= (k - xmu);
      q /= (k + xmu);
      const double del = cc * ff;
      sum += del;
      const double del1 = cc * (p - k * ff);
      sum1 += del1;
      if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    if (k > kMaxIter) throw ConvergenceError("bessel_ik: Temme series failed");
    rkmu = sum;
    rk1 = sum1 * xi2;
  } else {
    double bb = 2.0 * (1.0 + x);
    double dd = 1.0 / bb;
    double hh = dd;
    double delh = dd;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - xmu2;
    double q = a1;
    double cc = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int k = 2;
    for (; k <= kMaxIter; ++k) {
      a -= 2 * (k - 1);
      cc = -a * cc / k;
      const double qnew = (q1 - bb * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += cc * qnew;
      bb += 2.0;
      dd = 1.0 / (bb + a * dd);
      delh = (bb * dd - 1.0) * delh;
      hh += delh;
      const double dels = q * delh;
      s += dels;
      if (std::fabs(dels / s) < kEps) break;
    }
    if (k > kMaxIter) throw ConvergenceError("bessel_ik: CF2 did not converge");
    hh = a1 * hh;
    rkmu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
    rk1 = rkmu * (xmu + x + 0.5 - hh) * xi;
  }
  const double rkmup = xmu * xi * rkmu - rk1;
  const double rimu = xi / (f * rkmu - rkmup);
  double ri = (rimu * ril1) / ril;
  // The Wronskian route loses digits when I is tiny; the series has no
  // cancellation there.
  if (x * x < 4.0 * (nu + 1.0)) ri = power_series(nu, x, 1.0);
  for (int k = 1; k <= nl; ++k) {
    const double rktemp = (xmu + k) * xi2 * rk1 + rkmu;
    rkmu = rk1;
    rk1 = rktemp;
  }
  return {ri, rkmu};
}

double bessel_i(Order order, double x) {
  if (x == 0.0) return order.value() == 0.0 ? 1.0 : 0.0;
  return bessel_ik(order, x).i;
}

double bessel_k(Order order, double x) { return bessel_ik(order, x).k; }

double legendre(int n, int k, double t) {
  if (n < 2 || k < 0) throw DomainError("legendre: need n >= 2 and k >= 0");
  if (!(t >= -1.0 && t <= 1.0)) throw DomainError("legendre: t outside [-1, 1]");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int j = 1; j < k; ++j) {
    const double next = ((2.0 * j + n - 2.0) * t * cur - j * prev) / (j + n - 2.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace half_integer {

namespace {
// Terminating Hankel sums for order l + 1/2: sum_k a_k x^{-k} with signs s^k.
double terminating_sum(int l, double x, double sign) {
  const double nu = l + 0.5;
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= l; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= sign * (mu - odd * odd) / (k * 8.0 * x);
    sum += term;
  }
  return sum;
}
}  // namespace

double bessel_j(int l, double x) {
  require_positive(x, "half_integer::bessel_j");
  const double nu = l + 0.5;
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0, term = 1.0;
  for (int k = 1; k <= l; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
    }
  }
  // omega = x - (l+1) pi/2
  const double omega = x - 0.5 * kPi * (l + 1);
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(omega) - q * std::sin(omega));
}

double bessel_k(int l, double x) {
  require_positive(x, "half_integer::bessel_k");
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * terminating_sum(l, x, 1.0);
}

double bessel_i(int l, double x) {
  require_positive(x, "half_integer::bessel_i");
  const double grow = std::exp(x) * terminating_sum(l, x, -1.0);
  const double decay = std::exp(-x) * terminating_sum(l, x, 1.0);
  const double sign = (l % 2 == 0) ? -1.0 : 1.0;
  return (grow + sign * decay) / std::sqrt(2.0 * kPi * x);
}

}  // namespace half_integer

double sphere_area(int d) {
  if (d < 0) throw DomainError("sphere_area: negative dimension");
  const double half = 0.5 * (d + 1);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

long harmonic_dimension(int n, int k) {
  if (n < 2 || k < 0) throw DomainError("harmonic_dimension: need n >= 2, k >= 0");
  auto binom = [](long a, long b) -> long {
    if (b < 0 || a < 0 || b > a) return 0;
    long r = 1;
    for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  return binom(n + k - 1, k) - binom(n + k - 3, k - 2);
}

}  // namespace tracestab::specfun
