#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tracestab/errors.hpp"
#include "tracestab/quadrature.hpp"
#include "tracestab/spectrum.hpp"

using namespace tracestab;
using namespace tracestab::spectrum;
namespace bm = boost::math;

namespace {

// Weber-Schafheitlin: int_0^inf J_nu(r)^2 r^{1-2s} dr.
double ws_oracle(int n, double s, int k) {
  const double nu = k + 0.5 * (n - 2);
  return bm::tgamma(2 * s - 1) * bm::tgamma_ratio(nu + 1 - s, nu + s) /
         (std::pow(2.0, 2 * s - 1) * bm::tgamma(s) * bm::tgamma(s));
}

double ik_oracle(int n, int k) {
  const double nu = k + 0.5 * (n - 2);
  return bm::cyl_bessel_i(nu, 1.0) * bm::cyl_bessel_k(nu, 1.0);
}

// The displayed Gamma expression for lambda_0 - lambda_1.
double displayed_constant(int n, double s) {
  const double pre = std::pow(2.0, 1 - 2 * s) * bm::tgamma(2 * s - 1) / (bm::tgamma(s) * bm::tgamma(s));
  return pre * (bm::tgamma_ratio(0.5 * (n - 2 * s), 0.5 * (n + 2 * s - 2)) -
                bm::tgamma_ratio(0.5 * (n - 2 * s + 2), 0.5 * (n + 2 * s)));
}

}  // namespace

TEST_CASE("homogeneous closed form") {
  CHECK(lambda_homogeneous_closed(3, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lambda_homogeneous_closed(3, 1.0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  for (int n : {2, 3, 4, 6}) {
    for (double s : {0.6, 0.9, 1.2}) {
      if (s >= 0.5 * n) continue;
      for (int k : {0, 1, 5, 30}) {
        CHECK(lambda_homogeneous_closed(n, s, k) == doctest::Approx(ws_oracle(n, s, k)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(lambda_homogeneous_closed(2, 1.0, 0), DomainError);
  CHECK_THROWS_AS(lambda_homogeneous_closed(3, 0.5, 0), DomainError);
}

TEST_CASE("sin^2 / r^2 oracle for lambda_0 at n = 3, s = 1") {
  // J_{1/2}(r)^2 r^{-1} = (2/pi) sin^2 r / r^2
  double total = 0.0;
  for (int j = 0; j < 4000; ++j) {
    total += quad::gauss_kronrod([](double r) { return r < 1e-8 ? 1.0 : std::pow(std::sin(r) / r, 2); },
                                 j * std::numbers::pi, (j + 1) * std::numbers::pi, 1e-16, 1e-14).value;
  }
  const double R = 4000 * std::numbers::pi;
  total += 1 / (2 * R);  // mean of sin^2 times the tail of r^{-2}
  CHECK(2 / std::numbers::pi * total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("inhomogeneous s = 1 closed form") {
  CHECK(lambda_inhomogeneous_s1(2, 0) == doctest::Approx(0.5330).epsilon(1e-4));
  CHECK(lambda_inhomogeneous_s1(2, 1) == doctest::Approx(0.3402).epsilon(1e-4));
  for (int n : {2, 3, 4}) {
    double prev = 1e300;
    for (int k = 0; k <= 40; ++k) {
      const double v = lambda_inhomogeneous_s1(n, k);
      CHECK(v == doctest::Approx(ik_oracle(n, k)).epsilon(1e-12));
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("quadrature twins") {
  const auto h = WeightSpec::homogeneous(3, 1.0);
  const auto e0 = lambda_quadrature(h, 0, 1e-8);
  CHECK(std::fabs(e0.value - 1.0) <= 1e-8);
  CHECK(lambda_quadrature(h, 10, 1e-10).value ==
        doctest::Approx(lambda_homogeneous_closed(3, 1.0, 10)).epsilon(1e-6));
  CHECK(lambda_quadrature(WeightSpec::homogeneous(3, 1.25), 0, 1e-8).value ==
        doctest::Approx(ws_oracle(3, 1.25, 0)).epsilon(1e-7));
  CHECK(std::fabs(lambda_quadrature(WeightSpec::inhomogeneous(2, 1.0), 3, 1e-8).value - ik_oracle(2, 3)) <= 1e-8);
  for (int n : {2, 3, 5}) {
    for (double s : {0.7, 1.4}) {
      if (s >= 0.5 * n) continue;
      for (int k : {0, 2, 7}) {
        CHECK(lambda_quadrature(WeightSpec::homogeneous(n, s), k, 1e-10).value ==
              doctest::Approx(ws_oracle(n, s, k)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("Watson integral") {
  CHECK(watson_integral(3, 0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(watson_integral(3, 1, 2.0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(watson_integral(3, 200, 2.5) < 1e-2 * watson_integral(3, 0, 2.5));
  CHECK(watson_integral(3, 2000, 1.5) < watson_integral(3, 200, 1.5));
  for (double tau : {1.5, 2.0, 2.5}) {
    for (int n : {3, 4}) {
      for (int k : {0, 3, 12}) {
        // same Bessel integral with 2 s = tau
        CHECK(watson_integral(n, k, tau) == doctest::Approx(ws_oracle(n, tau / 2, k)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(watson_integral(2, 0, 2.5), DomainError);
  CHECK_THROWS_AS(watson_integral(3, 0, 1.0), DomainError);
}

TEST_CASE("Legendre form after calibration") {
  const auto w = WeightSpec::inhomogeneous(3, 1.0);
  const auto cal = calibrate_legendre(w);
  for (int k = 0; k <= 6; ++k) {
    CHECK(lambda_legendre_form(w, k, cal) == doctest::Approx(ik_oracle(3, k)).epsilon(1e-7));
  }
  const auto w2 = WeightSpec::inhomogeneous(3, 2.0);
  const auto cal2 = calibrate_legendre(w2);
  for (int k = 0; k <= 2; ++k) {
    CHECK(lambda_legendre_form(w2, k, cal2) == doctest::Approx(lambda_quadrature(w2, k, 1e-11).value).epsilon(1e-6));
  }
  CHECK(lambda_legendre_form(w2, 1, cal2) < lambda_legendre_form(w2, 0, cal2));
}

TEST_CASE("build_spectrum examples") {
  const auto sp = build_spectrum(WeightSpec::homogeneous(3, 1.0), 10);
  CHECK(sp.K_set == std::vector<int>{1});
  CHECK(sp.lambda_star == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(stability_constant(sp).value == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(sp.certificate.tail_bound < sp.lambda_star);

  const auto sp2 = build_spectrum(WeightSpec::inhomogeneous(2, 1.0), 10);
  CHECK(sp2.K_set == std::vector<int>{1});
  CHECK(stability_constant(sp2).value == doctest::Approx(ik_oracle(2, 0) - ik_oracle(2, 1)).epsilon(1e-9));
  CHECK(stability_constant(sp2).value == doctest::Approx(0.1928).epsilon(1e-3));

  const auto sp3 = build_spectrum(WeightSpec::homogeneous(4, 0.75), 10);
  for (int k = 1; k <= 10; ++k) CHECK(sp3.values[k] < sp3.values[k - 1]);
}

TEST_CASE("Hoelder certificate for inhomogeneous weights") {
  // fast decay at n = 4, s = 3 leaves lambda_star too small for K = 10
  CHECK_THROWS_AS(build_spectrum(WeightSpec::inhomogeneous(4, 3.0), 10), InconclusiveError);
  for (double s : {0.6, 1.5, 3.0}) {
    for (int n : {2, 3, 4}) {
      const int K = n == 4 && s == 3.0 ? 22 : 10;
      const auto sp = build_spectrum(WeightSpec::inhomogeneous(n, s), K);
      CHECK(sp.certificate.tail_bound < sp.lambda_star);
      CHECK(stability_constant(sp).value >= 0.0);
      for (int k = 1; k <= K; ++k) CHECK(sp.values[k] < sp.values[0]);
    }
  }
}

TEST_CASE("custom weight tables") {
  // (1 + r^2)^{-1} tabulated; tail r^{-2}
  CustomTable t;
  for (double r = 0.01; r < 200.0; r *= 1.15) {
    t.radii.push_back(r);
    t.values.push_back(1.0 / (1.0 + r * r));
  }
  t.tail_exponent = 2.0;
  const auto w = WeightSpec::custom(3, t);
  for (int k : {0, 1, 4}) {
    CHECK(lambda_quadrature(w, k, 1e-9).value == doctest::Approx(ik_oracle(3, k)).epsilon(1e-4));
  }
  const auto back = WeightSpec::from_json(w.to_json());
  CHECK(back(1.7) == doctest::Approx(w(1.7)).epsilon(1e-14));

  CustomTable bad = t;
  bad.values[3] = -1.0;
  CHECK_THROWS_AS(WeightSpec::custom(3, bad), DomainError);
}

TEST_CASE("weight domains") {
  CHECK_THROWS_AS(WeightSpec::homogeneous(3, 1.5), DomainError);
  CHECK_THROWS_AS(WeightSpec::homogeneous(3, 0.5), DomainError);
  CHECK_THROWS_AS(WeightSpec::inhomogeneous(3, 0.4), DomainError);
  CHECK_NOTHROW(WeightSpec::inhomogeneous(3, 9.0));
}

TEST_CASE("export formats") {
  const auto sp = build_spectrum(WeightSpec::homogeneous(3, 1.0), 4);
  const auto j = to_json(sp);
  CHECK(j["lambda"].size() == 5);
  CHECK(j.contains("certificate"));
  CHECK(j.contains("K_set"));
  const auto csv = to_csv(sp);
  CHECK(csv.rfind("k,lambda_k\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto w = WeightSpec::from_json(WeightSpec::inhomogeneous(4, 1.3).to_json());
  CHECK(w.n() == 4);
  CHECK(w.s() == 1.3);
}

// ---- properties ------------------------------------------------------------

TEST_CASE("property: homogeneous spectra strictly decrease") {
  for (int n : {2, 3, 4, 5}) {
    for (double s : {0.55, 0.8, 1.2, 1.9}) {
      if (s >= 0.5 * n) continue;
      double prev = 1e300;
      bool decreasing = true;
      for (int k = 0; k <= 50; ++k) {
        const double v = lambda_homogeneous_closed(n, s, k);
        decreasing = decreasing && v < prev && v > 0;
        prev = v;
      }
      CHECK(decreasing);
    }
  }
}

TEST_CASE("property: lambda_k k^{2s-1} converges") {
  for (double s : {0.7, 1.3}) {
    const double a = lambda_homogeneous_closed(3, s, 40) * std::pow(40.0, 2 * s - 1);
    const double b = lambda_homogeneous_closed(3, s, 50) * std::pow(50.0, 2 * s - 1);
    const double limit = bm::tgamma(2 * s - 1) / (std::pow(2.0, 2 * s - 1) * bm::tgamma(s) * bm::tgamma(s));
    CHECK(std::fabs(b - limit) < std::fabs(a - limit));
    CHECK(b == doctest::Approx(limit).epsilon(0.05));
  }
}

TEST_CASE("property: inhomogeneous spectra tend to zero") {
  // lambda_k ~ k^{1-2s}: at s = 0.6 the halving happens between K = 40 and 80
  for (double s : {0.6, 1.0, 2.0}) {
    for (int n : {2, 3, 4}) {
      const auto w = WeightSpec::inhomogeneous(n, s);
      const int K = s < 1 ? 80 : 40;
      CHECK(lambda_value(w, K, 1e-9).value < 0.5 * lambda_value(w, 1, 1e-9).value);
    }
  }
}

TEST_CASE("property: displayed constant equals lambda_0 - lambda_1") {
  for (int n : {2, 3, 4, 5, 7}) {
    for (double s : {0.6, 0.75, 1.0, 1.25, 1.7, 2.2}) {
      if (s >= 0.5 * n) continue;
      const double diff = lambda_homogeneous_closed(n, s, 0) - lambda_homogeneous_closed(n, s, 1);
      CHECK(std::fabs(displayed_constant(n, s) - diff) <= 1e-12 * std::max(1.0, diff));
    }
  }
}
