#include "tracestab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "tracestab/errors.hpp"

namespace tracestab::transport {

namespace {

constexpr double kPi = std::numbers::pi;

void require_n(int n) {
  if (n != 1 && n != 2) throw UnsupportedError("transport: n = 1 or 2 only");
}

void require_n1(int n, const char* what) {
  if (n != 1) throw UnsupportedError(std::string(what) + ": n = 1 only");
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Lagrange stencil of W points (W = 4 or 6) at fractional grid coordinate u:
// nodes floor(u) - W/2 + 1 .. floor(u) + W/2.  Nodes off the grid read as zero.
template <int W>
struct Stencil {
  long base;
  double w[W];
};

template <int W>
Stencil<W> stencil(double u) {
  const double fl = std::floor(u);
  const double f = u - fl;
  Stencil<W> s;
  s.base = static_cast<long>(fl) - (W / 2 - 1);
  for (int p = 0; p < W; ++p) {
    const double node = p - (W / 2 - 1);
    double num = 1.0, den = 1.0;
    for (int q = 0; q < W; ++q) {
      if (q == p) continue;
      const double other = q - (W / 2 - 1);
      num *= f - other;
      den *= node - other;
    }
    s.w[p] = num / den;
  }
  return s;
}

constexpr int kChartWidth = 4;  // cubic in the chart, where cost dominates
constexpr int kWidth = 6;       // quintic for the averages themselves

double trap_weight(int i, int points, double h) {
  return (i == 0 || i == points - 1) ? 0.5 * h : h;
}

template <class F>
void parallel_for(int count, F&& body) {
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (workers == 1 || count < 2) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  const int chunk = (count + workers - 1) / workers;
  for (int start = 0; start < count; start += chunk) {
    const int stop = std::min(count, start + chunk);
    jobs.push_back(std::async(std::launch::async, [&body, start, stop] {
      for (int i = start; i < stop; ++i) body(i);
    }));
  }
  for (auto& j : jobs) j.get();
}

void check_size(const TransportFunction& f, std::size_t expected, const char* what) {
  if (f.samples.size() != expected) {
    throw PreconditionError(std::string(what) + ": sample count " +
                            std::to_string(f.samples.size()) + " does not match the grid (" +
                            std::to_string(expected) + ")");
  }
  for (double v : f.samples) {
    if (!std::isfinite(v)) throw PreconditionError(std::string(what) + ": non-finite sample");
  }
  if (!std::isfinite(f.star)) throw PreconditionError(std::string(what) + ": non-finite star");
}

// Fraction of sum |f| carried by points with some coordinate beyond 0.9 L.
double outer_mass_fraction(const std::vector<double>& s, const PhaseGrid& g, int dims) {
  const int N = g.points();
  double total = 0.0, outer = 0.0;
  for (std::size_t idx = 0; idx < s.size(); ++idx) {
    const double a = std::fabs(s[idx]);
    if (a == 0.0) continue;
    total += a;
    std::size_t rest = idx;
    bool out = false;
    for (int d = 0; d < dims; ++d) {
      const int i = static_cast<int>(rest % N);
      rest /= N;
      if (std::fabs(g.x(i)) > 0.9 * g.L()) out = true;
    }
    if (out) outer += a;
  }
  return total > 0.0 ? outer / total : 0.0;
}

// ---- n = 1 line-integral chart ------------------------------------------

// R d(theta_j, y_i) for the sample part, theta_j = -pi/2 + j pi / ntheta,
// y_i = -Y + i h.
struct Chart {
  int ntheta = 0;
  int ny = 0;
  double Y = 0.0;
  std::vector<double> values;
};

Chart chart_layout(const PhaseGrid& g) {
  Chart c;
  c.ntheta = g.cells() / 2;
  const int half = static_cast<int>(std::ceil(std::sqrt(2.0) * g.L() / g.h() - 1e-9));
  c.ny = 2 * half + 1;
  c.Y = half * g.h();
  c.values.assign(static_cast<std::size_t>(c.ntheta) * c.ny, 0.0);
  return c;
}

double chart_theta(const Chart& c, int j) { return -0.5 * kPi + j * kPi / c.ntheta; }

Chart radon(const std::vector<double>& d, const PhaseGrid& g) {
  Chart c = chart_layout(g);
  const int N = g.points();
  const double h = g.h();
  // bounding box of the support, padded by the stencil width
  int i_lo = N, i_hi = -1, j_lo = N, j_hi = -1;
  double peak = 0.0;
  for (double v : d) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0) return c;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (std::fabs(d[static_cast<std::size_t>(i) * N + j]) > 1e-13 * peak) {
        i_lo = std::min(i_lo, i);
        i_hi = std::max(i_hi, i);
        j_lo = std::min(j_lo, j);
        j_hi = std::max(j_hi, j);
      }
    }
  }
  const double xlo = g.x(i_lo) - 2 * h, xhi = g.x(i_hi) + 2 * h;
  const double vlo = g.x(j_lo) - 2 * h, vhi = g.x(j_hi) + 2 * h;
  const double x0 = g.x(0);

  auto interp = [&](double a, double b) {
    const auto sa = stencil<kChartWidth>((a - x0) / h);
    const auto sb = stencil<kChartWidth>((b - x0) / h);
    double acc = 0.0;
    for (int p = 0; p < kChartWidth; ++p) {
      const long i = sa.base + p;
      if (i < 0 || i >= N) continue;
      double row = 0.0;
      for (int q = 0; q < kChartWidth; ++q) {
        const long j = sb.base + q;
        if (j < 0 || j >= N) continue;
        row += sb.w[q] * d[static_cast<std::size_t>(i) * N + j];
      }
      acc += sa.w[p] * row;
    }
    return acc;
  };

  parallel_for(c.ntheta, [&](int jt) {
    const double th = chart_theta(c, jt);
    const double ct = std::cos(th), st = std::sin(th);
    for (int iy = 0; iy < c.ny; ++iy) {
      const double y = -c.Y + iy * h;
      // z(s) = (y ct - s st, y st + s ct) restricted to the support box
      double s_lo = -std::numeric_limits<double>::infinity();
      double s_hi = std::numeric_limits<double>::infinity();
      auto clip = [&](double base, double slope, double lo, double hi) {
        if (std::fabs(slope) < 1e-14) {
          if (base < lo || base > hi) s_lo = 1.0, s_hi = 0.0;
          return;
        }
        double a = (lo - base) / slope, b = (hi - base) / slope;
        if (a > b) std::swap(a, b);
        s_lo = std::max(s_lo, a);
        s_hi = std::min(s_hi, b);
      };
      clip(y * ct, -st, xlo, xhi);
      clip(y * st, ct, vlo, vhi);
      if (!(s_lo <= s_hi)) continue;
      const long k_lo = static_cast<long>(std::ceil(s_lo / h));
      const long k_hi = static_cast<long>(std::floor(s_hi / h));
      double sum = 0.0;
      for (long k = k_lo; k <= k_hi; ++k) {
        const double s = k * h;
        sum += interp(y * ct - s * st, y * st + s * ct);
      }
      c.values[static_cast<std::size_t>(jt) * c.ny + iy] = h * sum;
    }
  });
  return c;
}

// Precomputed f* on the box and R f* on the chart, shared by all norms on
// one grid.
struct StarTables {
  std::vector<double> box_weights;  // trapezoid weights on the x-v box
  std::vector<double> f_star;       // f* at the box nodes
  std::vector<double> y_weights;
  std::vector<double> r_star;       // R f*(y) = pi / sqrt(1 + y^2)
  double p_tail = 0.0;              // int of f*^{3/2} outside the box
  double q_tail = 0.0;              // int of (R f*)^3 over |y| > Y
  Chart layout;
};

StarTables star_tables(const PhaseGrid& g) {
  StarTables t;
  const int N = g.points();
  const double h = g.h(), L = g.L();
  t.box_weights.resize(static_cast<std::size_t>(N) * N);
  t.f_star.resize(t.box_weights.size());
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * N + j;
      t.box_weights[idx] = trap_weight(i, N, h) * trap_weight(j, N, h);
      t.f_star[idx] = 1.0 / (1.0 + g.x(i) * g.x(i) + g.x(j) * g.x(j));
    }
  }
  // int over [-L, L]^2 of (1 + x^2 + v^2)^{-3/2} is 4 atan(L^2 / sqrt(1 + 2 L^2))
  t.p_tail = 2.0 * kPi - 4.0 * std::atan(L * L / std::sqrt(1.0 + 2.0 * L * L));
  t.layout = chart_layout(g);
  const Chart& c = t.layout;
  t.y_weights.resize(c.ny);
  t.r_star.resize(c.ny);
  for (int i = 0; i < c.ny; ++i) {
    const double y = -c.Y + i * h;
    t.y_weights[i] = trap_weight(i, c.ny, h);
    t.r_star[i] = kPi / std::sqrt(1.0 + y * y);
  }
  // pi^3 int_{|y|>Y} (1+y^2)^{-3/2} dy over a theta-range of length pi
  t.q_tail = kPi * kPi * kPi * kPi * 2.0 * (1.0 - c.Y / std::sqrt(1.0 + c.Y * c.Y));
  return t;
}

// ||a f* + e d||_{3/2}^{3/2}
double p_pow(const StarTables& t, double a, double e, const std::vector<double>& d) {
  double s = 0.0;
  if (d.empty() || e == 0.0) {
    for (std::size_t i = 0; i < t.f_star.size(); ++i) {
      s += t.box_weights[i] * std::pow(std::fabs(a * t.f_star[i]), 1.5);
    }
  } else {
    for (std::size_t i = 0; i < t.f_star.size(); ++i) {
      s += t.box_weights[i] * std::pow(std::fabs(a * t.f_star[i] + e * d[i]), 1.5);
    }
  }
  return s + std::pow(std::fabs(a), 1.5) * t.p_tail;
}

// ||rho (a f* + e d)||_3^3 via the chart, Rd the chart of d.
double q_pow(const StarTables& t, double a, double e, const Chart* Rd) {
  const Chart& c = t.layout;
  const double wt = kPi / c.ntheta;
  double s = 0.0;
  for (int j = 0; j < c.ntheta; ++j) {
    double row = 0.0;
    for (int i = 0; i < c.ny; ++i) {
      double v = a * t.r_star[i];
      if (Rd != nullptr) v += e * Rd->values[static_cast<std::size_t>(j) * c.ny + i];
      const double av = std::fabs(v);
      row += t.y_weights[i] * av * av * av;
    }
    s += wt * row;
  }
  return s + std::fabs(a * a * a) * t.q_tail;
}

double ratio_from(double P, double Q) { return std::cbrt(Q) / std::pow(P, 2.0 / 3.0); }

void require_phase_1d(const TransportFunction& f, const PhaseGrid& g, const char* what) {
  require_n1(g.n(), what);
  if (f.side != Side::phase) throw PreconditionError(std::string(what) + ": phase-side function required");
  check_size(f, g.phase_size(), what);
}

double bump(double a, double b, double ca, double cb, double sa, double sb, double ang) {
  const double c = std::cos(ang), s = std::sin(ang);
  const double u = c * (a - ca) + s * (b - cb);
  const double w = -s * (a - ca) + c * (b - cb);
  return std::exp(-0.5 * (u * u / (sa * sa) + w * w / (sb * sb)));
}

}  // namespace

Exponents exponents(int n) {
  if (n < 1) throw DomainError("exponents: n >= 1 required");
  const double p = (n + 2.0) / (n + 1.0);
  const double q = (n + 2.0) / n;
  return {p, q, p / (p - 1.0), q / (q - 1.0)};
}

PhaseGrid::PhaseGrid(int n, double L, int cells, double t_extent)
    : n_(n), L_(L), cells_(cells), h_(0.0), T_(0.0), nt_(0) {
  require_n(n);
  if (!(L >= 10.0)) throw PreconditionError("PhaseGrid: L >= 10 required");
  const int min_cells = n == 1 ? 128 : 40;
  if (cells < min_cells || cells % 2 != 0) {
    throw PreconditionError("PhaseGrid: an even cell count >= " + std::to_string(min_cells) +
                            " required for n = " + std::to_string(n));
  }
  if (!(t_extent > 0.0)) throw PreconditionError("PhaseGrid: t_extent > 0 required");
  h_ = 2.0 * L / cells;
  const int half = static_cast<int>(std::ceil(t_extent / h_ - 1e-9));
  nt_ = 2 * half + 1;
  T_ = half * h_;
}

std::size_t PhaseGrid::phase_size() const { return ipow(points(), 2 * n_); }
std::size_t PhaseGrid::spacetime_size() const {
  return static_cast<std::size_t>(nt_) * ipow(points(), n_);
}

nlohmann::json PhaseGrid::to_json() const {
  return {{"n", n_}, {"L", L_}, {"h", h_}, {"t_extent", T_}};
}

PhaseGrid PhaseGrid::from_json(const nlohmann::json& j) {
  const double L = j.at("L").get<double>();
  const double h = j.at("h").get<double>();
  if (!(h > 0.0)) throw PreconditionError("PhaseGrid: h > 0 required");
  int cells = static_cast<int>(std::lround(2.0 * L / h));
  cells += cells % 2;
  return PhaseGrid(j.at("n").get<int>(), L, cells, j.value("t_extent", 4.0));
}

PhaseGrid default_grid(int n) {
  require_n(n);
  return n == 1 ? PhaseGrid(1, 12.0, 256, 4.0) : PhaseGrid(2, 10.0, 60, 4.0);
}

TransportFunction zero_phase(const PhaseGrid& grid) {
  return {Side::phase, 0.0, std::vector<double>(grid.phase_size(), 0.0)};
}

TransportFunction sample_phase(
    const PhaseGrid& grid,
    const std::function<double(const std::vector<double>&, const std::vector<double>&)>& f) {
  const int n = grid.n(), N = grid.points();
  TransportFunction out{Side::phase, 0.0, std::vector<double>(grid.phase_size())};
  std::vector<double> x(n), v(n);
  for (std::size_t idx = 0; idx < out.samples.size(); ++idx) {
    std::size_t rest = idx;
    for (int d = n - 1; d >= 0; --d) {
      v[d] = grid.x(static_cast<int>(rest % N));
      rest /= N;
    }
    for (int d = n - 1; d >= 0; --d) {
      x[d] = grid.x(static_cast<int>(rest % N));
      rest /= N;
    }
    out.samples[idx] = f(x, v);
  }
  return out;
}

TransportFunction sample_spacetime(
    const PhaseGrid& grid, const std::function<double(double, const std::vector<double>&)>& G) {
  const int n = grid.n(), N = grid.points();
  TransportFunction out{Side::spacetime, 0.0, std::vector<double>(grid.spacetime_size())};
  std::vector<double> x(n);
  for (std::size_t idx = 0; idx < out.samples.size(); ++idx) {
    std::size_t rest = idx;
    for (int d = n - 1; d >= 0; --d) {
      x[d] = grid.x(static_cast<int>(rest % N));
      rest /= N;
    }
    out.samples[idx] = G(grid.t(static_cast<int>(rest)), x);
  }
  return out;
}

TransportFunction sample_spacetime_square(const PhaseGrid& grid,
                                          const std::function<double(double, double)>& G) {
  require_n1(grid.n(), "sample_spacetime_square");
  const int N = grid.points();
  TransportFunction out{Side::spacetime, 0.0,
                        std::vector<double>(static_cast<std::size_t>(N) * N)};
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < N; ++i) out.samples[static_cast<std::size_t>(k) * N + i] = G(grid.x(k), grid.x(i));
  }
  return out;
}

double extremiser_f(int n, const std::vector<double>& x, const std::vector<double>& v) {
  if (n < 1 || x.size() != static_cast<std::size_t>(n) || v.size() != x.size()) {
    throw DomainError("extremiser_f: x, v must have n components");
  }
  double xx = 0.0, vv = 0.0, xv = 0.0;
  for (int i = 0; i < n; ++i) {
    xx += x[i] * x[i];
    vv += v[i] * v[i];
    xv += x[i] * v[i];
  }
  const double Q = (1.0 + xx) * (1.0 + vv) - xv * xv;
  return std::pow(Q, -0.5 * (n + 1));
}

double extremiser_G(int n, double t, const std::vector<double>& x) {
  if (n < 1 || x.size() != static_cast<std::size_t>(n)) {
    throw DomainError("extremiser_G: x must have n components");
  }
  double r2 = t * t;
  for (double c : x) r2 += c * c;
  return 1.0 / (1.0 + r2);
}

double extremiser_average(int n, double t, const std::vector<double>& x) {
  const double g = extremiser_G(n, t, x);
  const double c = std::pow(kPi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
  return c * std::pow(g, 0.5 * n);
}

double extremiser_xray(int n, const std::vector<double>& x, const std::vector<double>& v) {
  const double f = extremiser_f(n, x, v);
  // f = Q^{-(n+1)/2}
  return kPi * std::pow(f, 1.0 / (n + 1));
}

TransportFunction velocity_average(const TransportFunction& f, const PhaseGrid& grid) {
  const int n = grid.n(), N = grid.points(), nt = grid.t_points();
  const double h = grid.h();
  if (f.side != Side::phase) throw PreconditionError("velocity_average: phase-side function required");
  check_size(f, grid.phase_size(), "velocity_average");
  const double outer = outer_mass_fraction(f.samples, grid, 2 * n);
  if (outer > 1e-3) {
    throw PreconditionError("velocity_average: truncation, " + std::to_string(outer) +
                            " of the sample mass lies in the outer tenth of the box");
  }
  TransportFunction out{Side::spacetime, 0.0, std::vector<double>(grid.spacetime_size(), 0.0)};
  const std::size_t slab = ipow(N, n);

  if (n == 1) {
    parallel_for(nt, [&](int k) {
      const double t = grid.t(k);
      double* row = &out.samples[static_cast<std::size_t>(k) * N];
      for (int j = 0; j < N; ++j) {
        const double w = trap_weight(j, N, h);
        // x_i - t v_j sits at fractional index i - t v_j / h
        const auto s = stencil<kWidth>(-t * grid.x(j) / h);
        for (int i = 0; i < N; ++i) {
          double acc = 0.0;
          for (int p = 0; p < kWidth; ++p) {
            const long src = i + s.base + p;
            if (src < 0 || src >= N) continue;
            acc += s.w[p] * f.samples[static_cast<std::size_t>(src) * N + j];
          }
          row[i] += w * acc;
        }
      }
    });
  } else {
    // regroup as slabs f(., ., v1, v2) so each shift reads contiguously
    std::vector<double> slabs(f.samples.size());
    for (std::size_t xi = 0; xi < slab; ++xi) {
      for (std::size_t vi = 0; vi < slab; ++vi) slabs[vi * slab + xi] = f.samples[xi * slab + vi];
    }
    parallel_for(nt, [&](int k) {
      const double t = grid.t(k);
      double* out_t = &out.samples[static_cast<std::size_t>(k) * slab];
      for (int j1 = 0; j1 < N; ++j1) {
        for (int j2 = 0; j2 < N; ++j2) {
          const double w = trap_weight(j1, N, h) * trap_weight(j2, N, h);
          const auto s1 = stencil<kWidth>(-t * grid.x(j1) / h);
          const auto s2 = stencil<kWidth>(-t * grid.x(j2) / h);
          const double* src = &slabs[(static_cast<std::size_t>(j1) * N + j2) * slab];
          for (int i1 = 0; i1 < N; ++i1) {
            for (int i2 = 0; i2 < N; ++i2) {
              double acc = 0.0;
              for (int p = 0; p < kWidth; ++p) {
                const long a = i1 + s1.base + p;
                if (a < 0 || a >= N) continue;
                double r = 0.0;
                for (int q = 0; q < kWidth; ++q) {
                  const long b = i2 + s2.base + q;
                  if (b < 0 || b >= N) continue;
                  r += s2.w[q] * src[a * N + b];
                }
                acc += s1.w[p] * r;
              }
              out_t[static_cast<std::size_t>(i1) * N + i2] += w * acc;
            }
          }
        }
      }
    });
  }

  if (f.star != 0.0) {
    std::vector<double> x(n);
    for (std::size_t idx = 0; idx < out.samples.size(); ++idx) {
      std::size_t rest = idx;
      for (int d = n - 1; d >= 0; --d) {
        x[d] = grid.x(static_cast<int>(rest % N));
        rest /= N;
      }
      out.samples[idx] += f.star * extremiser_average(n, grid.t(static_cast<int>(rest)), x);
    }
  }
  return out;
}

TransportFunction xray_adjoint(const TransportFunction& G, const PhaseGrid& grid) {
  const int n = grid.n(), N = grid.points(), nt = grid.t_points();
  const double h = grid.h();
  if (G.side != Side::spacetime) throw PreconditionError("xray_adjoint: spacetime function required");
  check_size(G, grid.spacetime_size(), "xray_adjoint");
  TransportFunction out{Side::phase, 0.0, std::vector<double>(grid.phase_size(), 0.0)};
  const double t0 = grid.t(0), x0 = grid.x(0);

  if (n == 1) {
    parallel_for(N, [&](int j) {
      const double v = grid.x(j);
      const int m = std::max(1, static_cast<int>(std::ceil(std::fabs(v) - 1e-12)));
      const double ds = h / m;
      const int steps = (nt - 1) * m;
      for (int i = 0; i < N; ++i) {
        const double x = grid.x(i);
        double sum = 0.0;
        for (int l = 0; l <= steps; ++l) {
          const double s = -grid.t_extent() + l * ds;
          const double w = (l == 0 || l == steps) ? 0.5 * ds : ds;
          const double xs = x + v * s;
          const auto sx = stencil<kWidth>((xs - x0) / h);
          double acc = 0.0;
          if (l % m == 0) {
            const std::size_t k = static_cast<std::size_t>(l / m);
            for (int q = 0; q < kWidth; ++q) {
              const long b = sx.base + q;
              if (b < 0 || b >= N) continue;
              acc += sx.w[q] * G.samples[k * N + b];
            }
          } else {
            const auto st = stencil<kWidth>((s - t0) / h);
            for (int p = 0; p < kWidth; ++p) {
              const long a = st.base + p;
              if (a < 0 || a >= nt) continue;
              double r = 0.0;
              for (int q = 0; q < kWidth; ++q) {
                const long b = sx.base + q;
                if (b < 0 || b >= N) continue;
                r += sx.w[q] * G.samples[a * N + b];
              }
              acc += st.w[p] * r;
            }
          }
          sum += w * acc;
        }
        out.samples[static_cast<std::size_t>(i) * N + j] = sum;
      }
    });
  } else {
    const std::size_t slab = ipow(N, 2);
    parallel_for(N, [&](int i1) {
      for (int i2 = 0; i2 < N; ++i2) {
        for (int j1 = 0; j1 < N; ++j1) {
          for (int j2 = 0; j2 < N; ++j2) {
            double sum = 0.0;
            for (int k = 0; k < nt; ++k) {
              const double s = grid.t(k);
              const auto s1 = stencil<kWidth>((grid.x(i1) + grid.x(j1) * s - x0) / h);
              const auto s2 = stencil<kWidth>((grid.x(i2) + grid.x(j2) * s - x0) / h);
              const double* src = &G.samples[static_cast<std::size_t>(k) * slab];
              double acc = 0.0;
              for (int p = 0; p < kWidth; ++p) {
                const long a = s1.base + p;
                if (a < 0 || a >= N) continue;
                double r = 0.0;
                for (int q = 0; q < kWidth; ++q) {
                  const long b = s2.base + q;
                  if (b < 0 || b >= N) continue;
                  r += s2.w[q] * src[a * N + b];
                }
                acc += s1.w[p] * r;
              }
              sum += trap_weight(k, nt, h) * acc;
            }
            const std::size_t idx =
                ((static_cast<std::size_t>(i1) * N + i2) * N + j1) * N + j2;
            out.samples[idx] = sum;
          }
        }
      }
    });
  }

  if (G.star != 0.0) {
    std::vector<double> x(n), v(n);
    for (std::size_t idx = 0; idx < out.samples.size(); ++idx) {
      std::size_t rest = idx;
      for (int d = n - 1; d >= 0; --d) {
        v[d] = grid.x(static_cast<int>(rest % N));
        rest /= N;
      }
      for (int d = n - 1; d >= 0; --d) {
        x[d] = grid.x(static_cast<int>(rest % N));
        rest /= N;
      }
      out.samples[idx] += G.star * extremiser_xray(n, x, v);
    }
  }
  return out;
}

double pairing(const TransportFunction& a, const TransportFunction& b, const PhaseGrid& grid) {
  if (a.side != b.side) throw PreconditionError("pairing: functions live on different sides");
  if (a.star != 0.0 || b.star != 0.0) {
    throw PreconditionError("pairing: star parts are not integrable against each other here");
  }
  const std::size_t size = a.side == Side::phase ? grid.phase_size() : grid.spacetime_size();
  check_size(a, size, "pairing");
  check_size(b, size, "pairing");
  const int N = grid.points(), dims = a.side == Side::phase ? 2 * grid.n() : grid.n();
  double s = 0.0;
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::size_t rest = idx;
    double w = 1.0;
    for (int d = 0; d < dims; ++d) {
      w *= trap_weight(static_cast<int>(rest % N), N, grid.h());
      rest /= N;
    }
    if (a.side == Side::spacetime) w *= trap_weight(static_cast<int>(rest), grid.t_points(), grid.h());
    s += w * a.samples[idx] * b.samples[idx];
  }
  return s;
}

double phase_norm(const TransportFunction& f, const PhaseGrid& grid) {
  require_phase_1d(f, grid, "phase_norm");
  const StarTables t = star_tables(grid);
  return std::pow(p_pow(t, f.star, 1.0, f.samples), 2.0 / 3.0);
}

double average_norm(const TransportFunction& f, const PhaseGrid& grid) {
  require_phase_1d(f, grid, "average_norm");
  const StarTables t = star_tables(grid);
  const Chart Rd = radon(f.samples, grid);
  return std::cbrt(q_pow(t, f.star, 1.0, &Rd));
}

double transport_ratio(const TransportFunction& f, const PhaseGrid& grid) {
  require_phase_1d(f, grid, "transport_ratio");
  const StarTables t = star_tables(grid);
  const double P = p_pow(t, f.star, 1.0, f.samples);
  if (P == 0.0) throw DomainError("transport_ratio: zero function");
  const Chart Rd = radon(f.samples, grid);
  return ratio_from(P, q_pow(t, f.star, 1.0, &Rd));
}

double sharp_ratio_estimate(const PhaseGrid& grid) {
  require_n1(grid.n(), "sharp_ratio_estimate");
  const StarTables t = star_tables(grid);
  return ratio_from(p_pow(t, 1.0, 0.0, {}), q_pow(t, 1.0, 0.0, nullptr));
}

nlohmann::json ProbeCurve::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json r = std::isnan(p.ratio) ? nlohmann::json(nullptr) : nlohmann::json(p.ratio);
    pts.push_back({{"epsilon", p.epsilon}, {"deficit", p.deficit}, {"dist_sq", p.dist_sq},
                   {"ratio", r}});
  }
  return {{"sharp_estimate", sharp_estimate}, {"points", pts}};
}

std::string ProbeCurve::csv() const {
  std::string out = "epsilon,deficit,dist_sq,ratio\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.epsilon, p.deficit, p.dist_sq,
                  p.ratio);
    out += buf;
  }
  return out;
}

ProbeCurve local_stability_probe(int n, const TransportFunction& direction,
                                 const std::vector<double>& eps_list, const PhaseGrid& grid) {
  require_n1(n, "local_stability_probe");
  if (grid.n() != n) throw PreconditionError("local_stability_probe: grid dimension mismatch");
  require_phase_1d(direction, grid, "local_stability_probe");
  for (double e : eps_list) {
    if (!(e > 0.0 && e <= 0.25)) {
      throw PreconditionError("local_stability_probe: epsilon in (0, 0.25] required");
    }
  }
  const StarTables t = star_tables(grid);
  ProbeCurve curve;
  curve.sharp_estimate = ratio_from(p_pow(t, 1.0, 0.0, {}), q_pow(t, 1.0, 0.0, nullptr));
  const double R = curve.sharp_estimate;

  const double dn = std::pow(p_pow(t, direction.star, 1.0, direction.samples), 2.0 / 3.0);
  const bool zero = dn == 0.0;
  const bool samples_zero = std::all_of(direction.samples.begin(), direction.samples.end(),
                                        [](double v) { return v == 0.0; });
  std::vector<double> d(direction.samples);
  double dstar = 0.0;
  if (!zero) {
    for (double& v : d) v /= dn;
    dstar = direction.star / dn;
  }
  const Chart Rd = radon(d, grid);

  for (double e : eps_list) {
    ProbePoint pt;
    pt.epsilon = e;
    if (zero) {
      pt.ratio = std::numeric_limits<double>::quiet_NaN();
      curve.points.push_back(pt);
      continue;
    }
    const double a = 1.0 + e * dstar;
    const double P = p_pow(t, a, e, d);
    const double Q = q_pow(t, a, e, &Rd);
    pt.deficit = R - ratio_from(P, Q);
    if (pt.deficit < -1e-4 * R) {
      throw InconsistencyError("local_stability_probe: ratio " + std::to_string(R - pt.deficit) +
                               " exceeds the same-grid sharp estimate " + std::to_string(R) +
                               " at epsilon " + std::to_string(e));
    }
    if (samples_zero) {
      pt.dist_sq = 0.0;
    } else {
      auto obj = [&](double lam) { return p_pow(t, a - lam, e, d); };
      const auto best = boost::math::tools::brent_find_minima(obj, a - 2.0, a + 2.0, 50);
      pt.dist_sq = std::pow(best.second / P, 4.0 / 3.0);
    }
    pt.ratio = pt.dist_sq > 0.0 ? pt.deficit / pt.dist_sq : std::numeric_limits<double>::quiet_NaN();
    curve.points.push_back(pt);
  }
  return curve;
}

TransportFunction swap_to_phase(const TransportFunction& G, const PhaseGrid& grid) {
  require_n1(grid.n(), "swap_to_phase");
  if (G.side != Side::spacetime) throw PreconditionError("swap_to_phase: spacetime function required");
  const int N = grid.points();
  check_size(G, static_cast<std::size_t>(N) * N, "swap_to_phase (square grid)");
  TransportFunction out{Side::phase, G.star, std::vector<double>(G.samples.size())};
  // g(x_i, v_j) = G(t = x_j, x = x_i)
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      out.samples[static_cast<std::size_t>(i) * N + j] = G.samples[static_cast<std::size_t>(j) * N + i];
    }
  }
  return out;
}

ProbeCurve dual_stability_probe(const TransportFunction& direction,
                                const std::vector<double>& eps_list, const PhaseGrid& grid) {
  return local_stability_probe(1, swap_to_phase(direction, grid), eps_list, grid);
}

TransportFunction random_phase_function(const PhaseGrid& grid, std::uint64_t seed) {
  require_n1(grid.n(), "random_phase_function");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double c = grid.L() / 3.0;
  const int bumps = 1 + static_cast<int>(U(rng) * 4.0) % 4;
  struct B {
    double ca, cb, sa, sb, ang, amp;
  };
  std::vector<B> bs;
  for (int b = 0; b < bumps; ++b) {
    bs.push_back({c * (2 * U(rng) - 1), c * (2 * U(rng) - 1), 0.5 + 1.5 * U(rng),
                  0.5 + 1.5 * U(rng), kPi * U(rng), 2 * U(rng) - 1});
  }
  TransportFunction f = sample_phase(grid, [&](const std::vector<double>& x, const std::vector<double>& v) {
    double s = 0.0;
    for (const B& b : bs) s += b.amp * bump(x[0], v[0], b.ca, b.cb, b.sa, b.sb, b.ang);
    return s;
  });
  if (U(rng) < 0.5) f.star = 0.2 + 0.8 * U(rng);
  return f;
}

TransportFunction random_direction(const PhaseGrid& grid, std::uint64_t seed) {
  require_n1(grid.n(), "random_direction");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int bumps = 1 + static_cast<int>(U(rng) * 3.0) % 3;
  struct B {
    double ca, cb, sa, sb, ang, amp;
  };
  std::vector<B> bs;
  for (int b = 0; b < bumps; ++b) {
    bs.push_back({3 * (2 * U(rng) - 1), 3 * (2 * U(rng) - 1), 0.7 + 0.8 * U(rng),
                  0.7 + 0.8 * U(rng), kPi * U(rng), 2 * U(rng) - 1});
  }
  TransportFunction d = sample_phase(grid, [&](const std::vector<double>& x, const std::vector<double>& v) {
    double s = 0.0;
    for (const B& b : bs) s += b.amp * bump(x[0], v[0], b.ca, b.cb, b.sa, b.sb, b.ang);
    return s;
  });
  // remove the component along f*: <d, f*^{1/2}> = 0, with ||f*||_{3/2}^{3/2}
  // as the normalizer
  const StarTables t = star_tables(grid);
  double num = 0.0;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    num += t.box_weights[i] * d.samples[i] * std::sqrt(t.f_star[i]);
  }
  d.star = -num / p_pow(t, 1.0, 0.0, {});
  return d;
}

}  // namespace tracestab::transport
