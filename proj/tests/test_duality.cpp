#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tracestab/duality.hpp"
#include "tracestab/errors.hpp"
#include "tracestab/specfun.hpp"

using namespace tracestab;
using namespace tracestab::duality;

namespace {

Vector gaussian(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> N;
  Vector v(d);
  for (double& x : v) x = N(rng);
  return v;
}

}  // namespace

TEST_CASE("duality map") {
  const Vector e = duality_map(Vector{3, 0, 0}, 2.0);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == 0.0);
  const Vector d = duality_map(Vector{1, 1}, 3.0);
  CHECK(d[0] == doctest::Approx(std::pow(2.0, -2.0 / 3)).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(std::pow(2.0, -2.0 / 3)).epsilon(1e-15));
  const Vector F{0.3, -1.2, 2.0};
  for (double lam : {0.5, 7.0}) {
    Vector G = F;
    for (double& x : G) x *= lam;
    const Vector a = duality_map(F, 2.5), b = duality_map(G, 2.5);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(duality_map(Vector{0, 0}, 2.0), DomainError);
}

TEST_CASE("property: duality map contract") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(1.05, 5.0);
  for (int t = 0; t < 500; ++t) {
    const double r = U(rng);
    const Vector F = gaussian(rng, 1 + t % 6);
    const Vector D = duality_map(F, r);
    CHECK(inner(F, D) == doctest::Approx(lp_norm(F, r)).epsilon(1e-12));
    CHECK(lp_norm(D, conjugate(r)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("operator norm examples") {
  // rank one: ||u||_q ||v||_{p'}
  const Vector u{1, 2, 0.5}, v{0.3, 1.0};
  std::vector<double> a;
  for (double ui : u)
    for (double vj : v) a.push_back(ui * vj);
  const FiniteOperator R(3, 2, a, 1.5, 3.0);
  const auto c = operator_norm(R, 10);
  CHECK(c.value == doctest::Approx(lp_norm(u, 3.0) * lp_norm(v, 3.0)).epsilon(1e-12));
  const auto tr = extremiser_transfer(R, duality_map(R.apply(c.extremiser), 3.0), c.value);
  // Hoelder witness |v|^{p'-2} v
  const double ratio = tr.g[0] / tr.g[1];
  CHECK(ratio == doctest::Approx(std::pow(0.3, 2.0)).epsilon(1e-9));

  // diagonal, p <= q: largest entry, attained at a coordinate vector
  const FiniteOperator D(3, 3, {0.5, 0, 0, 0, 2.0, 0, 0, 0, 1.0}, 1.5, 2.5);
  const auto cd = operator_norm(D, 20);
  CHECK(cd.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::fabs(cd.extremiser[1]) == doctest::Approx(1.0).epsilon(1e-9));

  // p = q = 2: top singular vector
  const FiniteOperator S(2, 2, {2, 1, 1, 3}, 2.0, 2.0);
  const auto cs = operator_norm(S, 10);
  const double top = (5 + std::sqrt(5.0)) / 2;
  CHECK(cs.value == doctest::Approx(top).epsilon(1e-12));
  CHECK(cs.certified);
  CHECK(cs.stationarity < 1e-10);
  const auto ts = extremiser_transfer(S, duality_map(S.apply(cs.extremiser), 2.0), cs.value);
  CHECK(ts.g[1] / ts.g[0] == doctest::Approx(top - 2).epsilon(1e-9));
}

TEST_CASE("operator norm against brute force") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto T = random_nonnegative(3, 4, 1.5, 3.0, seed);
    CHECK(operator_norm(T, 20, seed).value == doctest::Approx(brute_force_norm(T, 40)).epsilon(1e-4));
  }
  CHECK_THROWS_AS(brute_force_norm(random_nonnegative(2, 5, 1.5, 3, 1), 10), PreconditionError);
}

TEST_CASE("p >= q: positive fixed point is unique") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto T = random_nonnegative(4, 3, 2.0, 1.5, seed);
    const auto c = operator_norm(T, 20, seed);
    CHECK(c.certified);
    CHECK_FALSE(c.anomaly);
    CHECK(c.residual >= -1e-12);
  }
}

TEST_CASE("extremiser transfer") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto T = random_nonnegative(5, 7, 1.5, 2.5, seed);
    const auto c = operator_norm(T, 20, seed);
    const auto tr = extremiser_transfer(T, duality_map(T.apply(c.extremiser), 2.5), c.value);
    CHECK(tr.achieved == doctest::Approx(c.value).epsilon(1e-8));
  }
  const auto T = random_nonnegative(3, 3, 1.5, 2.5, 9);
  CHECK_THROWS_AS(extremiser_transfer(T, Vector{1, 0, 0}, operator_norm(T, 10).value), PreconditionError);
}

TEST_CASE("property: transfer round trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto T = random_nonnegative(4, 3, 1.5, 2.5, seed);
    const auto Ts = T.adjoint();
    const auto c = operator_norm(T, 20, seed);
    const Vector G = duality_map(T.apply(c.extremiser), 2.5);  // extremiser of T*
    const auto g = extremiser_transfer(T, G, c.value).g;          // back to M(T)
    const auto back = extremiser_transfer(Ts, g, c.value).g;      // lemma with T, T* swapped
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      num += back[i] * G[i];
      den += G[i] * G[i];
    }
    const double scale = num / den;
    for (std::size_t i = 0; i < G.size(); ++i) CHECK(back[i] == doctest::Approx(scale * G[i]).epsilon(1e-7));
  }
}

TEST_CASE("property: adjoint consistency") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto T = random_nonnegative(3 + t % 3, 2 + t % 4, 1.5, 2.5, t);
    const Vector g = gaussian(rng, T.cols()), h = gaussian(rng, T.rows());
    CHECK(std::fabs(inner(T.apply(g), h) - inner(g, T.apply_adjoint(h))) < 1e-13);
  }
}

TEST_CASE("CFL-3") {
  const Vector g{0.4, -1.0, 2.0};
  const auto same = cfl3_gap(g, g, 1.5);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  Vector g2 = g;
  for (double& x : g2) x *= 2;
  const auto scaled = cfl3_gap(g, g2, 3.0);
  CHECK(scaled.lhs < 1e-15);
  CHECK(scaled.rhs > 0.0);
  CHECK(cfl3_constant(1.0) == 2.0);
  CHECK(cfl3_constant(3.0) == doctest::Approx(8.0));
}

TEST_CASE("CFL-1") {
  const Vector h1{0.6, -0.8};  // unit in l^2
  const auto eq = cfl1_gap(h1, duality_map(h1, 2.0), 2.0);
  CHECK(eq.pairing == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eq.bound == doctest::Approx(1.0).epsilon(1e-14));
  const auto orth = cfl1_gap(Vector{1, 0}, Vector{0, 1}, 3.0);
  CHECK(orth.pairing == 0.0);
  CHECK(orth.pairing <= orth.bound);
  CHECK_THROWS_AS(cfl1_gap(Vector{2, 0}, Vector{0, 1}, 3.0), PreconditionError);
}

TEST_CASE("Aldaz ratio") {
  const double r = 1.5;
  Vector h1{0.2, 0.5, 0.3};
  const double n1 = lp_norm(h1, r);
  for (double& x : h1) x /= n1;
  Vector h2(3);
  for (int i = 0; i < 3; ++i) h2[i] = std::pow(h1[i], r - 1);
  CHECK(aldaz_ratio(h1, h2, r) == doctest::Approx(1.0));
  CHECK(aldaz_ratio(Vector{1, 0}, Vector{0, 1}, r) == doctest::Approx(2.0));
}

TEST_CASE("property: CFL sweeps and the Aldaz record") {
  std::mt19937_64 rng(17);
  int v3 = 0, v1 = 0;
  double aldaz = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const int d = 2 + t % 5;
    const double r3 = std::array{1.5, 2.0, 3.0}[t % 3];
    const Vector a = gaussian(rng, d), b = gaussian(rng, d);
    const auto c3 = cfl3_gap(a, b, r3);
    if (c3.lhs > c3.rhs + 1e-12) ++v3;
    const double r1 = std::array{2.0, 2.5, 4.0}[t % 3];
    Vector h1 = gaussian(rng, d), h2 = gaussian(rng, d);
    const double n1 = lp_norm(h1, r1), n2 = lp_norm(h2, conjugate(r1));
    for (double& x : h1) x /= n1;
    for (double& x : h2) x /= n2;
    const auto c1 = cfl1_gap(h1, h2, r1);
    if (c1.pairing > c1.bound + 1e-12) ++v1;
    Vector a1 = a, a2 = b;
    const double m1 = lp_norm(a1, 1.5), m2 = lp_norm(a2, 3.0);
    for (double& x : a1) x /= m1;
    for (double& x : a2) x /= m2;
    aldaz = std::max(aldaz, aldaz_ratio(a1, a2, 1.5));
  }
  CHECK(v3 == 0);
  CHECK(v1 == 0);
  CHECK(std::isfinite(aldaz));
}

TEST_CASE("local stability pipeline") {
  const auto T = random_nonnegative(4, 4, 1.5, 2.5, 5);
  const auto c = operator_norm(T, 20, 5);
  const auto exact = local_stability_pipeline(T, c, c.extremiser);
  CHECK(std::fabs(exact.deficit) < 1e-12);
  CHECK(exact.dist < 1e-8);

  std::mt19937_64 rng(23);
  int in_band = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto Tk = random_nonnegative(4, 4, 1.5, 2.5, 1000 + seed);
    const auto ck = operator_norm(Tk, 20, seed);
    // unit bump orthogonal to the extremiser
    Vector b = gaussian(rng, 4);
    const double proj = inner(b, ck.extremiser) / inner(ck.extremiser, ck.extremiser);
    for (int i = 0; i < 4; ++i) b[i] -= proj * ck.extremiser[i];
    const double nb = lp_norm(b, 1.5);
    Vector g = ck.extremiser;
    for (int i = 0; i < 4; ++i) g[i] += 0.05 * b[i] / nb;
    const auto rep = local_stability_pipeline(Tk, ck, g);
    CHECK(rep.deficit >= -1e-12);
    CHECK(rep.norm_gap >= -1e-12);
    CHECK(rep.convexity >= -1e-12);
    CHECK(rep.chain_holds);
    if (!rep.in_regime) continue;
    ++total;
    const double q = rep.constant_estimate / rep.predicted;
    CHECK(q > 0.1);
    if (q < 10.0) ++in_band;
  }
  CHECK(total > 0);
  // strongly curved directions can sit far above the working constant
  CHECK(in_band >= 0.95 * total);
}

TEST_CASE("sigma counterexample") {
  const auto rows = sigma_counterexample(1.5, 1.5, {0.1});
  CHECK(rows[0].ratio == doctest::Approx(1.19).epsilon(0.01));
  const auto flat = sigma_counterexample(1.5, 1.5, {0.1, 0.01, 0.001, 1e-4});
  for (const auto& row : flat) CHECK(row.ratio > 0.5);
  for (double r : {1.1, 1.3, 1.5, 1.7, 1.9}) {
    const auto dec = sigma_counterexample(r, 2.0, {0.1, 0.01, 0.001, 1e-4});
    for (std::size_t i = 1; i < dec.size(); ++i) CHECK(dec[i].ratio < dec[i - 1].ratio);
    for (const auto& row : dec) CHECK(row.identity_error <= 1e-14);
  }
}

TEST_CASE("stereographic projection") {
  const auto north = stereographic(Vector{0, 0});
  CHECK(north.point[2] == doctest::Approx(1.0));
  CHECK(north.jacobian == doctest::Approx(4.0));
  const auto far = stereographic(Vector{1e8, 0});
  CHECK(far.point[2] == doctest::Approx(-1.0));
  CHECK(far.jacobian < 1e-15);
  const auto p = stereographic(Vector{0.3, -2.0});
  double norm = 0.0;
  for (double x : p.point) norm += x * x;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("push-forward isometry") {
  for (int n : {2, 3}) {
    const double qp = 1.5;
    const auto one = pushforward_isometry([](const Vector&) { return 1.0; }, n, qp);
    CHECK(one.sphere_norm == doctest::Approx(std::pow(specfun::sphere_area(n - 1), 1 / qp)).epsilon(1e-9));
    CHECK(one.flat_norm == doctest::Approx(one.sphere_norm).epsilon(1e-6));
    const auto bump = pushforward_isometry(
        [](const Vector& w) { return std::exp(2.0 * w.back()); }, n, qp);
    CHECK(bump.flat_norm == doctest::Approx(bump.sphere_norm).epsilon(1e-5));
    const auto scaled = pushforward_isometry(
        [](const Vector& w) { return 3.0 * std::exp(2.0 * w.back()); }, n, qp);
    CHECK(scaled.flat_norm == doctest::Approx(3.0 * bump.flat_norm).epsilon(1e-9));
  }
}

TEST_CASE("operator serialization") {
  const auto T = random_nonnegative(2, 3, 1.5, 4.0, 8);
  const auto back = FiniteOperator::from_json(T.to_json());
  CHECK(back.rows() == 2);
  CHECK(back.q() == 4.0);
  CHECK(back.at(1, 2) == T.at(1, 2));
}
