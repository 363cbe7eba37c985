#pragma once

// Kinetic transport at desk scale: velocity averages
//   rho f(t, x) = int f(x - t v, v) dv,
// the X-ray adjoint rho* G(x, v) = int G(s, x + v s) ds, the extremisers
// f*(x, v) = ((1+|x|^2)(1+|v|^2) - (x.v)^2)^{-(n+1)/2} and
// G*(t, x) = 1 / (1 + t^2 + |x|^2), and a local stability probe around f*.
//
// Functions carry the extremiser analytically: f = star * f* + samples,
// with the samples compactly supported inside the grid.  Norms add the exact
// tail of the star part outside the box, so fat tails cost nothing.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tracestab::transport {

struct Exponents {
  double p;        // (n+2)/(n+1)
  double q;        // (n+2)/n
  double p_prime;
  double q_prime;
};
Exponents exponents(int n);

// Uniform symmetric grids: x and v on [-L, L] with spacing h (cells = 2L/h
// per axis), t on [-T, T] with the same spacing.
class PhaseGrid {
 public:
  PhaseGrid(int n, double L, int cells, double t_extent);

  int n() const noexcept { return n_; }
  double L() const noexcept { return L_; }
  int cells() const noexcept { return cells_; }
  int points() const noexcept { return cells_ + 1; }
  double h() const noexcept { return h_; }
  double t_extent() const noexcept { return T_; }
  int t_points() const noexcept { return nt_; }
  double x(int i) const noexcept { return -L_ + i * h_; }
  double t(int i) const noexcept { return -T_ + i * h_; }

  // points()^{2n} and t_points() * points()^n.
  std::size_t phase_size() const;
  std::size_t spacetime_size() const;

  nlohmann::json to_json() const;
  // Accepts {n, L, h, t_extent}; h is rounded so that 2L/h is an integer.
  static PhaseGrid from_json(const nlohmann::json& j);

 private:
  int n_;
  double L_;
  int cells_;
  double h_;
  double T_;
  int nt_;
};

// n = 1: L = 12 with 256 cells, T = 4.  n = 2: L = 10 with 60 cells, T = 4
// (40 cells alias in v once |t| v outruns the spacing).
PhaseGrid default_grid(int n = 1);

enum class Side { phase, spacetime };

// Phase side: samples indexed (x_1..x_n, v_1..v_n), last index fastest.
// Spacetime side: samples indexed (t, x_1..x_n).  The star coefficient
// multiplies f* (phase) or G* (spacetime).
struct TransportFunction {
  Side side = Side::phase;
  double star = 0.0;
  std::vector<double> samples;
};

TransportFunction zero_phase(const PhaseGrid& grid);
TransportFunction sample_phase(const PhaseGrid& grid,
                               const std::function<double(const std::vector<double>& x,
                                                          const std::vector<double>& v)>& f);
TransportFunction sample_spacetime(const PhaseGrid& grid,
                                   const std::function<double(double t,
                                                              const std::vector<double>& x)>& G);

double extremiser_f(int n, const std::vector<double>& x, const std::vector<double>& v);
double extremiser_G(int n, double t, const std::vector<double>& x);
// rho f* = c_n (1 + t^2 + |x|^2)^{-n/2}, c_n = pi^{(n+1)/2} / Gamma((n+1)/2).
double extremiser_average(int n, double t, const std::vector<double>& x);
// rho* G* = pi / sqrt((1+|x|^2)(1+|v|^2) - (x.v)^2).
double extremiser_xray(int n, const std::vector<double>& x, const std::vector<double>& v);

// Quintic Lagrange interpolation in x, trapezoid in v.  The star part is
// evaluated in closed form.  Throws PreconditionError when more than 1e-3 of
// the sample mass sits in the outer tenth of the box.
TransportFunction velocity_average(const TransportFunction& f, const PhaseGrid& grid);

// Trapezoid in s over the t-grid.  For n = 1 the step is refined so that the
// line moves at most h in x per step, with quintic interpolation in (t, x);
// n = 2 samples only the t-grid.
TransportFunction xray_adjoint(const TransportFunction& G, const PhaseGrid& grid);

// Trapezoid pairing of the sample parts (star parts must be zero).
double pairing(const TransportFunction& a, const TransportFunction& b, const PhaseGrid& grid);

// ||f||_p with the exact tail of the star part; n = 1.
double phase_norm(const TransportFunction& f, const PhaseGrid& grid);
// ||rho f||_q, n = 1, through the line-integral chart t = tan(theta),
// x = y / cos(theta), where ||rho f||_3 = ||R f||_{L^3(dtheta dy)}.
double average_norm(const TransportFunction& f, const PhaseGrid& grid);
// ||rho f||_q / ||f||_p, n = 1.
double transport_ratio(const TransportFunction& f, const PhaseGrid& grid);
// Ratio at f* on this grid: the sharp-constant estimate R-hat.
double sharp_ratio_estimate(const PhaseGrid& grid);

struct ProbePoint {
  double epsilon = 0.0;
  double deficit = 0.0;  // R-hat - ratio(f* + eps d)
  double dist_sq = 0.0;  // min over lambda of ||f - lambda f*||_p^2 / ||f||_p^2
  double ratio = 0.0;    // deficit / dist_sq; NaN when dist_sq vanishes
};

struct ProbeCurve {
  double sharp_estimate = 0.0;
  std::vector<ProbePoint> points;

  nlohmann::json to_json() const;
  std::string csv() const;
};

// f = f* + eps d with d normalized to ||d||_p = 1 (d = 0 allowed).  n = 1
// only; eps in (0, 0.25].  A deficit below -1e-4 R-hat raises
// InconsistencyError.
ProbeCurve local_stability_probe(int n, const TransportFunction& direction,
                                 const std::vector<double>& eps_list, const PhaseGrid& grid);

// Dual side: perturb G* by a spacetime direction sampled on the square grid
// (t and x both on the x-grid) and measure ||rho* G||_3 / ||G||_{3/2}.  Uses
// rho* G(x, v) = rho g(-v, x) with g(a, s) = G(s, a), which maps G* to f*.
ProbeCurve dual_stability_probe(const TransportFunction& direction,
                                const std::vector<double>& eps_list, const PhaseGrid& grid);

// Spacetime samples on the square grid: t_i = x_i, indexed (t, x).  n = 1.
TransportFunction sample_spacetime_square(const PhaseGrid& grid,
                                          const std::function<double(double t, double x)>& G);

// Transpose of a square spacetime sample array, as a phase function.
TransportFunction swap_to_phase(const TransportFunction& G, const PhaseGrid& grid);

// Seeded sums of 1-4 Gaussian bumps (centres within L/3, widths 0.5-2,
// signed amplitudes) plus, half of the time, a positive multiple of f*.
// n = 1.
TransportFunction random_phase_function(const PhaseGrid& grid, std::uint64_t seed);

// Seeded Gaussian-bump direction, shifted along f* so that it is orthogonal
// to f*^{p-1} (the tangent of ||.||_p^p at f*).  n = 1.
TransportFunction random_direction(const PhaseGrid& grid, std::uint64_t seed);

}  // namespace tracestab::transport
