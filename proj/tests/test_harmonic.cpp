#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tracestab/errors.hpp"
#include "tracestab/harmonic.hpp"
#include "tracestab/quadrature.hpp"
#include "tracestab/specfun.hpp"

using namespace tracestab;
using namespace tracestab::harmonic;
using spectrum::WeightSpec;
constexpr double kPi = std::numbers::pi;

namespace {

const TraceModel& model_hom3() {
  static const TraceModel m(WeightSpec::homogeneous(3, 1.0),
                            spectrum::build_spectrum(WeightSpec::homogeneous(3, 1.0), 10));
  return m;
}

const TraceModel& model_inh2() {
  static const TraceModel m(WeightSpec::inhomogeneous(2, 1.0),
                            spectrum::build_spectrum(WeightSpec::inhomogeneous(2, 1.0), 10));
  return m;
}

Mode sampled(const TraceModel& M, int k, int m, double (*f)(double)) {
  Mode mode{k, m, {}, 0.0};
  for (double r : M.grid().nodes()) mode.samples.push_back(f(r));
  return mode;
}

ProfileSet single(const TraceModel& M, Mode mode) {
  ProfileSet ps;
  ps.n = M.weight().n();
  ps.grid = M.grid();
  ps.modes.push_back(std::move(mode));
  return ps;
}

}  // namespace

TEST_CASE("B coefficient") {
  const auto& M = model_hom3();
  CHECK(M.B(sampled(M, 0, 1, [](double) { return 0.0; })) == 0.0);
  CHECK(M.B(sampled(M, 0, 1, [](double r) { return std::exp(-r); })) == doctest::Approx(0.5).epsilon(1e-12));
  // J_{1/2}(r) w^{1/2} r^{1/2} = sqrt(2/pi) sin(r)/r, whose B is lambda_0 = 1
  const auto ext = M.extremal_mode(0, 1, std::sqrt(M.lambda(0)));
  CHECK(M.B(ext) == doctest::Approx(1.0).epsilon(1e-9));
  const Mode direct = sampled(M, 0, 1, [](double r) { return std::sqrt(2 / kPi) * std::sin(r) / r; });
  // truncated at r_max, so only close to the equality case
  CHECK(M.A(direct) == doctest::Approx(M.lambda(0) * M.B(direct)).epsilon(5e-3));
}

TEST_CASE("A coefficient: Cauchy-Schwarz and its equality case") {
  const auto& M = model_hom3();
  for (int k : {0, 1, 3}) {
    const auto ext = M.extremal_mode(k, 1, 1.3);
    CHECK(M.A(ext) == doctest::Approx(M.lambda(k) * M.B(ext)).epsilon(1e-10));
    const Mode bump = sampled(M, k, 1, [](double r) { return std::exp(-(r - 2) * (r - 2)); });
    CHECK(M.A(bump) < M.lambda(k) * M.B(bump));
    // remove the kernel component: A vanishes
    Mode orth = bump;
    const auto& K = M.kernel(k);
    double gk = 0.0, kk = 0.0;
    const auto& w = M.grid().weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      gk += w[i] * bump.samples[i] * K[i];
      kk += w[i] * K[i] * K[i];
    }
    for (std::size_t i = 0; i < w.size(); ++i) orth.samples[i] -= gk / kk * K[i];
    CHECK(M.A(orth) < 1e-20);
  }
}

TEST_CASE("deficit report examples, homogeneous n = 3, s = 1") {
  const auto& M = model_hom3();
  const auto r0 = M.report(single(M, M.extremal_mode(0, 1, 1.0)));
  CHECK(std::fabs(r0.deficit) < 1e-10);
  CHECK(std::fabs(r0.dist_sq) < 1e-10);

  const auto r1 = M.report(single(M, M.extremal_mode(1, 1, 1.0)));
  CHECK(r1.deficit == doctest::Approx(2.0 / 3).epsilon(1e-10));
  CHECK(r1.dist_sq == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r1.ratio == doctest::Approx(M.constant()).epsilon(1e-10));

  const auto bump = single(M, sampled(M, 0, 1, [](double r) { return std::exp(-(r - 2) * (r - 2)); }));
  const auto rb = M.report(bump);
  CHECK(rb.dist_sq == doctest::Approx(rb.sumB - rb.A01 / M.lambda(0)).epsilon(1e-12));
  CHECK(rb.dist_sq > 0);
  CHECK(rb.ratio == doctest::Approx(M.lambda(0)).epsilon(1e-10));
  CHECK(rb.ratio > M.constant());
}

TEST_CASE("equality case builder") {
  const auto& M = model_hom3();
  CHECK(std::fabs(M.report(equality_case_builder(M, 1.0, {})).deficit) < 1e-10);
  const auto r = M.report(equality_case_builder(M, 0.0, {{1, 1, 1.0}}));
  CHECK(r.ratio == doctest::Approx(M.constant()).epsilon(1e-8));
  const auto mixed = M.report(equality_case_builder(M, 1.0, {{1, 2, 1.0}}));
  CHECK(mixed.deficit == doctest::Approx(2.0 / 3).epsilon(1e-9));
  CHECK(mixed.dist_sq == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mixed.ratio == doctest::Approx(M.constant()).epsilon(1e-8));
  CHECK_THROWS(equality_case_builder(M, 1.0, {{2, 1, 1.0}}));
}

TEST_CASE("extremising sequences") {
  const auto& M = model_hom3();
  const auto one = extremising_sequence(M, {1});
  CHECK(one[0] == doctest::Approx(M.constant()).epsilon(1e-10));
  const auto seq = extremising_sequence(M, {1, 2, 3});
  CHECK(seq[0] < seq[1]);
  CHECK(seq[1] < seq[2]);
  for (int i = 0; i < 3; ++i) {
    CHECK(seq[i] == doctest::Approx(M.lambda(0) - M.lambda(i + 1)).epsilon(1e-9));
  }
}

TEST_CASE("reverse inequality examples") {
  const auto& M = model_hom3();
  const auto e0 = reverse_deficit_check(M, single(M, M.extremal_mode(0, 1, 1.0)));
  CHECK(e0.holds);
  CHECK(std::fabs(e0.margin) < 1e-10);
  const auto ps = single(M, M.extremal_mode(2, 1, 1.0));
  const auto rep = M.report(ps);
  CHECK(rep.deficit == doctest::Approx((M.lambda(0) - M.lambda(2)) * rep.sumB).epsilon(1e-10));
  CHECK(reverse_deficit_check(M, ps).holds);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = reverse_deficit_check(M, random_profile_set(M, seed));
    CHECK(c.holds);
    CHECK(c.margin >= 0.0);
  }
}

TEST_CASE("trace evaluation on the sphere") {
  const auto& M = model_hom3();
  // k = 0 gives a constant function
  const auto ps0 = single(M, sampled(M, 0, 1, [](double r) { return std::exp(-r); }));
  const auto a = trace_evaluate(M, ps0, {0, 0, 1});
  const auto b = trace_evaluate(M, ps0, {0.6, 0.8, 0});
  CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
  // a (1, m) mode is proportional to one coordinate
  const auto ps1 = single(M, sampled(M, 1, 3, [](double r) { return std::exp(-r); }));
  const double s = 1 / std::sqrt(3.0);
  const auto c1 = trace_evaluate(M, ps1, {s, s, s});
  const auto c2 = trace_evaluate(M, ps1, {-s, s, -s});
  CHECK(std::abs(c1 + c2) < 1e-12 * std::abs(c1));

  // orthogonality: sphere integral of |S g|^2 equals sum A / (2 pi)^n
  ProfileSet two = ps0;
  two.modes.push_back(sampled(M, 2, 3, [](double r) { return r * std::exp(-r); }));
  const auto rep = M.report(two);
  const auto rule = quad::gauss_legendre(40, -1.0, 1.0);
  const int nphi = 64;
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i], rho = std::sqrt(1 - z * z);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2 * kPi * j / nphi;
      total += rule.weights[i] * (2 * kPi / nphi) *
               std::norm(trace_evaluate(M, two, {rho * std::cos(phi), rho * std::sin(phi), z}));
    }
  }
  CHECK(total == doctest::Approx(rep.sumA / std::pow(2 * kPi, 3)).epsilon(1e-5));

  const auto& M2 = model_inh2();
  ProfileSet circ = single(M2, sampled(M2, 0, 1, [](double r) { return std::exp(-r); }));
  circ.modes.push_back(sampled(M2, 3, 2, [](double r) { return std::exp(-0.5 * r); }));
  double t2 = 0.0;
  for (int j = 0; j < 128; ++j) {
    const double phi = 2 * kPi * j / 128;
    t2 += (2 * kPi / 128) * std::norm(trace_evaluate(M2, circ, {std::cos(phi), std::sin(phi)}));
  }
  CHECK(t2 == doctest::Approx(M2.report(circ).sumA / std::pow(2 * kPi, 2)).epsilon(1e-5));
}

TEST_CASE("spherical harmonics are orthonormal on S^2") {
  const auto rule = quad::gauss_legendre(20, -1.0, 1.0);
  const int nphi = 40;
  for (auto [k1, m1, k2, m2] : {std::array{1, 1, 1, 1}, std::array{2, 4, 2, 4}, std::array{2, 1, 2, 5},
                                std::array{1, 2, 3, 4}}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double z = rule.nodes[i], rho = std::sqrt(1 - z * z);
      for (int j = 0; j < nphi; ++j) {
        const double phi = 2 * kPi * j / nphi;
        const std::vector<double> th{rho * std::cos(phi), rho * std::sin(phi), z};
        acc += rule.weights[i] * (2 * kPi / nphi) * spherical_harmonic(3, k1, m1, th) *
               spherical_harmonic(3, k2, m2, th);
      }
    }
    CHECK(acc == doctest::Approx(k1 == k2 && m1 == m2 ? 1.0 : 0.0).epsilon(1e-12));
  }
}

TEST_CASE("validation and serialization") {
  const auto& M = model_hom3();
  auto ps = random_profile_set(M, 42);
  const auto back = ProfileSet::from_json(ps.to_json());
  CHECK(M.report(back).deficit == doctest::Approx(M.report(ps).deficit).epsilon(1e-15));
  ps.modes[0].m = 100;
  CHECK_THROWS_AS(ps.validate(), PreconditionError);
  CHECK_THROWS_AS(M.report(ps), PreconditionError);

  const auto w4 = WeightSpec::homogeneous(4, 1.0);
  const TraceModel M4(w4, spectrum::build_spectrum(w4, 6));
  CHECK_THROWS_AS(trace_evaluate(M4, random_profile_set(M4, 1), {0, 0, 0, 1}), UnsupportedError);
}

// ---- properties ------------------------------------------------------------

TEST_CASE("property: master, Cauchy-Schwarz, reverse and scaling on random draws") {
  for (const TraceModel* M : {&model_hom3(), &model_inh2()}) {
    int violations = 0;
    for (std::uint64_t seed = 100; seed < 400; ++seed) {
      const auto ps = random_profile_set(*M, seed);
      const auto rep = M->report(ps);
      if (rep.margin < -1e-8 * rep.sumB) ++violations;
      for (const auto& mode : ps.modes) {
        const double b = M->B(mode);
        if (M->A(mode) > M->lambda(mode.k) * b + 1e-9 * b) ++violations;
      }
      if (!reverse_deficit_check(*M, ps).holds) ++violations;
      for (double f : {0.01, 3.0, 1e4}) {
        const double r2 = M->report(ps.scaled(f)).ratio;
        if (std::isfinite(rep.ratio) && std::fabs(r2 - rep.ratio) > 1e-12 * std::fabs(rep.ratio)) ++violations;
      }
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("property: perturbing an equality case off the kernel raises the ratio") {
  const auto& M = model_hom3();
  auto ps = equality_case_builder(M, 1.0, {{1, 1, 1.0}});
  const double base = M.report(ps).ratio;
  // bump orthogonal to the k = 1 kernel
  Mode bump = sampled(M, 1, 1, [](double r) { return std::exp(-(r - 3) * (r - 3)); });
  const auto& K = M.kernel(1);
  const auto& w = M.grid().weights();
  double gk = 0.0, kk = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    gk += w[i] * bump.samples[i] * K[i];
    kk += w[i] * K[i] * K[i];
  }
  for (std::size_t i = 0; i < w.size(); ++i) bump.samples[i] -= gk / kk * K[i];
  for (auto& mode : ps.modes) {
    if (mode.k == 1) {
      for (std::size_t i = 0; i < w.size(); ++i) mode.samples[i] += 0.1 * bump.samples[i];
    }
  }
  CHECK(M.report(ps).ratio > base + 1e-6);
}
