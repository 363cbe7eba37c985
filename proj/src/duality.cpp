#include "tracestab/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "tracestab/errors.hpp"
#include "tracestab/quadrature.hpp"

namespace tracestab::duality {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxIterations = 10000;
constexpr double kStepTol = 1e-12;

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

void require_unit(std::span<const double> h, double r, const char* what) {
  const double nrm = lp_norm(h, r);
  if (std::fabs(nrm - 1.0) > 1e-9) {
    throw PreconditionError(std::string(what) + " is not a unit vector (norm " +
                            std::to_string(nrm) + ")");
  }
}

// min over lambda >= 0 of ||a - lambda b||_r
double ray_distance(std::span<const double> a, std::span<const double> b, double r) {
  Vector tmp(a.size());
  auto f = [&](double lam) {
    for (std::size_t i = 0; i < a.size(); ++i) tmp[i] = a[i] - lam * b[i];
    return lp_norm(tmp, r);
  };
  const double hi = 2.0 * lp_norm(a, r) / std::max(lp_norm(b, r), 1e-300) + 1.0;
  const auto best = boost::math::tools::brent_find_minima(f, 0.0, hi, 52);
  return std::min(best.second, f(0.0));
}

}  // namespace

double conjugate(double r) {
  if (!(r >= 1.0)) throw DomainError("conjugate exponent: r >= 1 required");
  if (r == 1.0) return kInf;
  if (std::isinf(r)) return 1.0;
  return r / (r - 1.0);
}

double lp_norm(std::span<const double> x, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
  }
  // scale by the largest entry to keep |x|^r in range
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::fabs(v) / m, r);
  return m * std::pow(s, 1.0 / r);
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector duality_map(std::span<const double> F, double r) {
  if (!(r >= 1.0)) throw DomainError("duality map: r >= 1 required");
  const double nrm = lp_norm(F, r);
  if (nrm == 0.0) throw DomainError("duality map: zero vector");
  Vector out(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (F[i] == 0.0) continue;
    const double u = F[i] / nrm;
    out[i] = r == 1.0 ? std::copysign(1.0, u) : std::pow(std::fabs(u), r - 2.0) * u;
  }
  return out;
}

FiniteOperator::FiniteOperator(int rows, int cols, std::vector<double> entries, double p, double q)
    : rows_(rows), cols_(cols), a_(std::move(entries)), p_(p), q_(q) {
  if (rows < 1 || cols < 1) throw DomainError("operator: positive dimensions required");
  if (a_.size() != static_cast<std::size_t>(rows) * cols) {
    throw DomainError("operator: entry count does not match rows x cols");
  }
  if (!(p > 1.0) || !(q > 1.0) || std::isinf(p) || std::isinf(q)) {
    throw DomainError("operator: 1 < p, q < infinity required");
  }
  for (double v : a_) {
    if (!std::isfinite(v)) throw DomainError("operator: non-finite entry");
  }
}

bool FiniteOperator::nonnegative() const {
  return std::all_of(a_.begin(), a_.end(), [](double v) { return v >= 0.0; });
}

Vector FiniteOperator::apply(std::span<const double> g) const {
  Vector out(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += at(i, j) * g[j];
    out[i] = s;
  }
  return out;
}

Vector FiniteOperator::apply_adjoint(std::span<const double> h) const {
  Vector out(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[j] += at(i, j) * h[i];
  }
  return out;
}

FiniteOperator FiniteOperator::adjoint() const {
  std::vector<double> t(a_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t[static_cast<std::size_t>(j) * rows_ + i] = at(i, j);
  }
  return FiniteOperator(cols_, rows_, std::move(t), q_prime(), p_prime());
}

nlohmann::json FiniteOperator::to_json() const {
  return {{"rows", rows_}, {"cols", cols_}, {"p", p_}, {"q", q_}, {"entries", a_}};
}

FiniteOperator FiniteOperator::from_json(const nlohmann::json& j) {
  return FiniteOperator(j.at("rows").get<int>(), j.at("cols").get<int>(),
                        j.at("entries").get<std::vector<double>>(), j.at("p").get<double>(),
                        j.at("q").get<double>());
}

FiniteOperator random_nonnegative(int rows, int cols, double p, double q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(rows) * cols);
  for (double& v : a) v = unif(rng);
  return FiniteOperator(rows, cols, std::move(a), p, q);
}

NormCertificate operator_norm(const FiniteOperator& T, int starts, std::uint64_t seed) {
  if (starts < 1) throw PreconditionError("operator_norm: starts >= 1 required");
  const bool positive = T.nonnegative();
  const double p = T.p(), q = T.q(), pp = T.p_prime();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  NormCertificate best;
  best.starts = starts;
  double lowest = kInf;
  for (int s = 0; s < starts; ++s) {
    Vector g(T.cols());
    for (double& v : g) v = positive ? unif(rng) : gauss(rng);
    const double g0 = lp_norm(g, p);
    for (double& v : g) v /= g0;

    bool converged = false;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
      const Vector Tg = T.apply(g);
      if (lp_norm(Tg, q) == 0.0) break;
      const Vector h = T.apply_adjoint(duality_map(Tg, q));
      if (lp_norm(h, pp) == 0.0) break;
      Vector next = duality_map(h, pp);
      const double step = max_abs_diff(next, g);
      g = std::move(next);
      if (step < kStepTol) {
        converged = true;
        break;
      }
    }
    best.iterations += it;
    if (!converged) {
      if (lp_norm(T.apply(g), q) == 0.0) continue;  // start annihilated by T
      throw ConvergenceError("operator_norm: no fixed point within " +
                             std::to_string(kMaxIterations) + " iterations");
    }
    const double value = lp_norm(T.apply(g), q);
    lowest = std::min(lowest, value);
    if (value > best.value) {
      best.value = value;
      best.extremiser = g;
    }
  }
  if (best.extremiser.empty()) throw ConvergenceError("operator_norm: every start collapsed");
  const bool agree = (best.value - lowest) <= 1e-9 * best.value;
  if (positive && !agree && p >= q) {
    throw InconsistencyError("operator_norm: nonnegative operator with p >= q gave distinct "
                             "stationary values " + std::to_string(lowest) + " and " +
                             std::to_string(best.value));
  }
  const Vector& g = best.extremiser;
  const Vector Tg = T.apply(g);
  best.residual = best.value * lp_norm(g, p) - lp_norm(Tg, q);
  best.stationarity = max_abs_diff(g, duality_map(T.apply_adjoint(duality_map(Tg, q)), pp));
  best.certified = positive && agree;
  best.anomaly = positive && !agree;
  return best;
}

namespace {

void enumerate_simplex(int dims, int resolution, std::vector<int>& cur, int left,
                       const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(cur.size()) == dims - 1) {
    cur.push_back(left);
    visit(cur);
    cur.pop_back();
    return;
  }
  for (int i = 0; i <= left; ++i) {
    cur.push_back(i);
    enumerate_simplex(dims, resolution, cur, left - i, visit);
    cur.pop_back();
  }
}

}  // namespace

double brute_force_norm(const FiniteOperator& T, int resolution) {
  const int c = T.cols();
  if (c > 4) throw PreconditionError("brute_force_norm: at most 4 columns");
  if (resolution < 2) throw PreconditionError("brute_force_norm: resolution >= 2 required");
  const double p = T.p(), q = T.q();
  // points x_i = y_i^{1/p} with y on the probability simplex
  auto value = [&](const Vector& y) {
    Vector x(c);
    for (int i = 0; i < c; ++i) x[i] = std::pow(std::max(y[i], 0.0), 1.0 / p);
    return lp_norm(T.apply(x), q);
  };
  Vector best_y(c, 1.0 / c);
  double best = value(best_y);
  std::vector<int> cur;
  enumerate_simplex(c, resolution, cur, resolution, [&](const std::vector<int>& idx) {
    Vector y(c);
    for (int i = 0; i < c; ++i) y[i] = static_cast<double>(idx[i]) / resolution;
    const double v = value(y);
    if (v > best) {
      best = v;
      best_y = y;
    }
  });
  // pattern search: move mass between pairs of coordinates
  double step = 1.0 / resolution;
  while (step > 1e-14) {
    bool improved = false;
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) {
        if (i == j) continue;
        const double move = std::min(step, best_y[j]);
        if (move <= 0.0) continue;
        Vector y = best_y;
        y[i] += move;
        y[j] -= move;
        const double v = value(y);
        if (v > best) {
          best = v;
          best_y = y;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

Transfer extremiser_transfer(const FiniteOperator& T, std::span<const double> G_star,
                             double norm) {
  const double pp = T.p_prime();
  const Vector h = T.apply_adjoint(G_star);
  const double target = norm * lp_norm(G_star, T.q_prime());
  const double got = lp_norm(h, pp);
  const double defect = std::fabs(got - target) / target;
  if (!(defect <= 1e-9)) {
    throw PreconditionError("extremiser_transfer: G is not an extremiser of T* (relative defect " +
                            std::to_string(defect) + ")");
  }
  Transfer out;
  out.g.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    out.g[i] = h[i] == 0.0 ? 0.0 : std::pow(std::fabs(h[i]), pp - 2.0) * h[i];
  }
  out.achieved = lp_norm(T.apply(out.g), T.q()) / lp_norm(out.g, T.p());
  return out;
}

double cfl3_constant(double r) {
  if (!(r >= 1.0)) throw DomainError("cfl3: r >= 1 required");
  if (r <= 2.0) return r == 1.0 ? 2.0 : 2.0 * std::pow(conjugate(r), r - 1.0);
  return 4.0 * (r - 1.0);
}

Cfl3 cfl3_gap(std::span<const double> g1, std::span<const double> g2, double r) {
  Cfl3 out;
  out.constant = cfl3_constant(r);
  const double rp = conjugate(r);
  const Vector d1 = duality_map(g1, r);
  const Vector d2 = duality_map(g2, r);
  Vector diff(d1.size());
  for (std::size_t i = 0; i < d1.size(); ++i) diff[i] = d1[i] - d2[i];
  out.lhs = lp_norm(diff, rp);
  Vector gd(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) gd[i] = g1[i] - g2[i];
  const double rel = lp_norm(gd, r) / (lp_norm(g1, r) + lp_norm(g2, r));
  const double e = std::min(r, 2.0) - 1.0;
  out.rhs = out.constant * (e == 0.0 ? 1.0 : std::pow(rel, e));
  return out;
}

Cfl1 cfl1_gap(std::span<const double> h1, std::span<const double> h2, double r) {
  if (!(r >= 2.0)) throw PreconditionError("cfl1: r >= 2 required");
  const double rp = conjugate(r);
  require_unit(h1, r, "cfl1: h1");
  require_unit(h2, rp, "cfl1: h2");
  const double pair = inner(h1, h2);
  const double sigma = pair < 0.0 ? -1.0 : 1.0;
  const Vector d = duality_map(h1, r);
  Vector diff(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) diff[i] = d[i] - sigma * h2[i];
  const double dn = lp_norm(diff, rp);
  return {std::fabs(pair), 1.0 - 0.25 * (rp - 1.0) * dn * dn};
}

double aldaz_ratio(std::span<const double> h1, std::span<const double> h2, double r) {
  const double rp = conjugate(r);
  require_unit(h1, r, "aldaz: h1");
  require_unit(h2, rp, "aldaz: h2");
  double num = 0.0, pair = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    const double d = std::pow(std::fabs(h1[i]), 0.5 * r) - std::pow(std::fabs(h2[i]), 0.5 * rp);
    num += d * d;
    pair += std::fabs(h1[i] * h2[i]);
  }
  const double den = 1.0 - pair;
  constexpr double kZero = 1e-13;
  if (den <= kZero) return num <= kZero ? 1.0 : kInf;
  return num / den;
}

LocalStabilityReport local_stability_pipeline(const FiniteOperator& T,
                                              const NormCertificate& cert,
                                              std::span<const double> g_in) {
  if (cert.extremiser.size() != static_cast<std::size_t>(T.cols())) {
    throw PreconditionError("pipeline: certificate does not match the operator");
  }
  const double p = T.p(), q = T.q(), pp = T.p_prime(), qp = T.q_prime();
  if (p > 2.0) throw PreconditionError("pipeline: p <= 2 required");
  const double gn = lp_norm(g_in, p);
  if (gn == 0.0) throw DomainError("pipeline: zero vector");
  Vector g(g_in.begin(), g_in.end());
  for (double& v : g) v /= gn;

  LocalStabilityReport rep;
  const Vector Tg = T.apply(g);
  rep.deficit = cert.value - lp_norm(Tg, q);
  const Vector G = duality_map(Tg, q);
  const Vector h = T.apply_adjoint(G);
  rep.dual_norm = lp_norm(h, pp);
  rep.norm_gap = cert.value - rep.dual_norm;
  const Vector dh = duality_map(h, pp);
  Vector diff(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) diff[i] = g[i] - dh[i];
  const double dn = lp_norm(diff, p);
  rep.convexity = 0.25 * (p - 1.0) * rep.dual_norm * dn * dn;

  rep.dist = ray_distance(g, cert.extremiser, p);
  const Vector G_star = duality_map(T.apply(cert.extremiser), q);
  const double dd = ray_distance(G, G_star, qp);
  rep.dual_dist_sq = dd * dd;

  rep.in_regime = rep.dist < 0.25;
  rep.chain_holds = rep.deficit >= rep.norm_gap + rep.convexity - 1e-12;
  rep.dual_lower_bound = rep.dual_norm >= 0.5 * cert.value;
  rep.predicted = 0.25 * (p - 1.0) * cert.value;
  rep.constant_estimate = rep.dist > 0.0 ? rep.deficit / (rep.dist * rep.dist) : 0.0;
  return rep;
}

std::vector<CounterexampleRow> sigma_counterexample(double r, double sigma,
                                                    const std::vector<double>& deltas) {
  if (!(r > 1.0) || std::isinf(r)) throw DomainError("counterexample: 1 < r < infinity required");
  const double rp = conjugate(r);
  std::vector<CounterexampleRow> rows;
  for (double delta : deltas) {
    if (!(delta > 0.0 && delta < 0.5)) {
      throw DomainError("counterexample: delta in (0, 1/2) required");
    }
    // Two steps on [0, 1]: (0, b) where h2 = v, and [b, 1) where h2 = 0.
    const double one_minus = 1.0 - delta;
    const double b = one_minus * one_minus;
    const double rest = delta * (2.0 - delta);  // 1 - b without cancellation
    const double v = std::pow(one_minus, -2.0 / rp);

    CounterexampleRow row;
    row.delta = delta;
    row.h1_norm = 1.0;
    row.h2_norm = std::pow(b * std::pow(v, rp), 1.0 / rp);
    const double a = 1.0 - std::pow(v, 0.5 * rp);
    row.aldaz_side = b * a * a + rest;
    row.identity_error = std::fabs(row.aldaz_side - 2.0 * delta);
    const double c = std::fabs(1.0 - std::pow(v, rp - 1.0));
    const double gap_r = b * std::pow(c, r) + rest;
    row.holder_gap = std::pow(gap_r, 1.0 / r);
    row.ratio = std::pow(row.holder_gap, sigma) / (2.0 * delta);
    rows.push_back(row);
  }
  return rows;
}

StereoPoint stereographic(std::span<const double> x) {
  const std::size_t d = x.size();
  double rho2 = 0.0;
  for (double v : x) rho2 += v * v;
  StereoPoint out;
  out.point.resize(d + 1);
  const int n = static_cast<int>(d) + 1;
  if (rho2 <= 1.0) {
    const double den = 1.0 + rho2;
    for (std::size_t i = 0; i < d; ++i) out.point[i] = 2.0 * x[i] / den;
    out.point[d] = (1.0 - rho2) / den;
    out.jacobian = std::pow(2.0 / den, n - 1);
  } else {
    // divide through by |x|^2 so that huge |x| stays finite
    const double rho = std::sqrt(rho2);
    const double inv = 1.0 / rho;
    const double den = 1.0 + inv * inv;
    for (std::size_t i = 0; i < d; ++i) out.point[i] = 2.0 * (x[i] * inv) * inv / den;
    out.point[d] = (inv * inv - 1.0) / den;
    out.jacobian = std::pow(2.0 * inv * inv / den, n - 1);
  }
  return out;
}

IsometryCheck pushforward_isometry(const std::function<double(const Vector&)>& G, int n,
                                   double q_prime, double tol) {
  if (n != 2 && n != 3) throw UnsupportedError("pushforward_isometry: n = 2, 3 only");
  if (!(q_prime >= 1.0)) throw DomainError("pushforward_isometry: q' >= 1 required");
  constexpr double kPi = std::numbers::pi;
  auto check = [](const quad::Result& r, const char* what) {
    if (!r.converged) {
      throw ConvergenceError(std::string("pushforward_isometry: ") + what +
                             " quadrature missed tolerance (estimate " +
                             std::to_string(r.abs_error) + ")");
    }
    return r.value;
  };
  auto pw = [q_prime](double v) { return std::pow(std::fabs(v), q_prime); };
  IsometryCheck out;
  if (n == 2) {
    auto on_circle = [&](double phi) { return pw(G({std::cos(phi), std::sin(phi)})); };
    out.sphere_norm = check(quad::gauss_kronrod(on_circle, 0.0, 2.0 * kPi, tol, tol), "circle");
    // x = t / (1 - t^2) maps (-1, 1) onto the line
    auto on_line = [&](double t) {
      const double u = 1.0 - t * t;
      if (u <= 0.0) return 0.0;
      const double x = t / u;
      const double dx = (1.0 + t * t) / (u * u);
      const auto sp = stereographic(std::vector<double>{x});
      return sp.jacobian * pw(G(sp.point)) * dx;
    };
    out.flat_norm = check(quad::gauss_kronrod(on_line, -1.0, 1.0, tol, tol), "line");
  } else {
    auto sphere_inner = [&](double th) {
      auto ring = [&](double phi) {
        return pw(G({std::sin(th) * std::cos(phi), std::sin(th) * std::sin(phi), std::cos(th)}));
      };
      return std::sin(th) * check(quad::gauss_kronrod(ring, 0.0, 2.0 * kPi, 0.1 * tol, tol), "ring");
    };
    out.sphere_norm = check(quad::gauss_kronrod(sphere_inner, 0.0, kPi, tol, tol), "sphere");
    // polar coordinates in the plane, radius t / (1 - t) on [0, 1)
    auto plane_inner = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double rho = t / (1.0 - t);
      const double drho = 1.0 / ((1.0 - t) * (1.0 - t));
      auto ring = [&](double phi) {
        const auto sp = stereographic(std::vector<double>{rho * std::cos(phi), rho * std::sin(phi)});
        return sp.jacobian * pw(G(sp.point));
      };
      return rho * drho * check(quad::gauss_kronrod(ring, 0.0, 2.0 * kPi, 0.1 * tol, tol), "ring");
    };
    out.flat_norm = check(quad::gauss_kronrod(plane_inner, 0.0, 1.0, tol, tol), "plane");
  }
  out.sphere_norm = std::pow(out.sphere_norm, 1.0 / q_prime);
  out.flat_norm = std::pow(out.flat_norm, 1.0 / q_prime);
  return out;
}

}  // namespace tracestab::duality
