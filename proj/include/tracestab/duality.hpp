#pragma once

// Finite-dimensional l^p duality laboratory: duality maps, l^p -> l^q
// operator norms by fixed-point iteration, extremiser transfer between T and
// T*, the Clarkson-type inequalities for duality maps, and the interval
// counterexample.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace tracestab::duality {

using Vector = std::vector<double>;

// Conjugate exponent r/(r-1); infinity for r = 1.
double conjugate(double r);

// l^r norm; r = infinity gives the max norm.
double lp_norm(std::span<const double> x, double r);

// D_r F = |F|^{r-2} F / ||F||_r^{r-1}.  Throws DomainError for F = 0.
Vector duality_map(std::span<const double> F, double r);

double inner(std::span<const double> a, std::span<const double> b);

class FiniteOperator {
 public:
  // Row-major rows x cols matrix acting l^p(cols) -> l^q(rows).
  FiniteOperator(int rows, int cols, std::vector<double> entries, double p, double q);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  double p_prime() const { return conjugate(p_); }
  double q_prime() const { return conjugate(q_); }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  bool nonnegative() const;

  Vector apply(std::span<const double> g) const;
  Vector apply_adjoint(std::span<const double> h) const;
  // T* : l^{q'} -> l^{p'}.
  FiniteOperator adjoint() const;

  nlohmann::json to_json() const;
  static FiniteOperator from_json(const nlohmann::json& j);

 private:
  int rows_;
  int cols_;
  std::vector<double> a_;
  double p_;
  double q_;
};

// Uniform(0,1) entries from a seed.
FiniteOperator random_nonnegative(int rows, int cols, double p, double q, std::uint64_t seed);

struct NormCertificate {
  double value = 0.0;
  Vector extremiser;        // ||g||_p = 1
  double residual = 0.0;    // value * ||g||_p - ||T g||_q
  double stationarity = 0.0;  // max |g - D_{p'}(T* D_q(T g))|
  int starts = 0;
  int iterations = 0;       // total over starts
  bool certified = false;   // nonnegative and every start reached the same value
  bool anomaly = false;     // nonnegative, p < q, and starts reached distinct values
};

// Multistart iteration g <- D_{p'}(T* D_q(T g)), best value kept.
// Nonnegative operators get positive starts.  For p >= q the positive fixed
// point is unique, so disagreeing starts raise InconsistencyError; for p < q
// distinct local maxima do occur (diagonal matrices already show it) and the
// disagreement is flagged as an anomaly.  Signed operators give a lower bound.
NormCertificate operator_norm(const FiniteOperator& T, int starts, std::uint64_t seed = 1);

// Exhaustive search over a mesh of the positive part of the unit l^p sphere
// (cols <= 4), refined around the best point.  Slow; a cross-check.
double brute_force_norm(const FiniteOperator& T, int resolution);

struct Transfer {
  Vector g;            // |T* G|^{p'-2} T* G
  double achieved = 0.0;  // ||T g||_q / ||g||_p
};

// Throws PreconditionError when G_star is not an extremiser of T* to 1e-9.
Transfer extremiser_transfer(const FiniteOperator& T, std::span<const double> G_star,
                             double norm);

struct Cfl3 {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
};

// ||D_r g1 - D_r g2||_{r'} against C_r (||g1-g2|| / (||g1|| + ||g2||))^{min(r,2)-1}.
Cfl3 cfl3_gap(std::span<const double> g1, std::span<const double> g2, double r);
double cfl3_constant(double r);

struct Cfl1 {
  double pairing = 0.0;
  double bound = 0.0;
};

// |<h1,h2>| against 1 - (r'-1)/4 ||D_r h1 - sigma h2||_{r'}^2, sigma the sign
// of <h1,h2>.  Needs unit h1 in l^r, h2 in l^{r'}, r >= 2.
Cfl1 cfl1_gap(std::span<const double> h1, std::span<const double> h2, double r);

// || |h1|^{r/2} - |h2|^{r'/2} ||_2^2 / (1 - <|h1|,|h2|>), with 0/0 read as 1.
double aldaz_ratio(std::span<const double> h1, std::span<const double> h2, double r);

struct LocalStabilityReport {
  double deficit = 0.0;      // ||T|| - ||T g||_q, ||g||_p = 1
  double dist = 0.0;         // distance from g to the extremiser ray
  double norm_gap = 0.0;     // ||T|| - ||T* G||_{p'}
  double convexity = 0.0;    // (p-1)/4 ||T* G|| ||g - D_{p'} T* G||_p^2
  double dual_dist_sq = 0.0; // distance^2 from G to the extremiser ray of T*
  double dual_norm = 0.0;    // ||T* G||_{p'}
  bool in_regime = false;    // dist < 1/4
  bool chain_holds = false;  // deficit >= norm_gap + convexity (to 1e-12)
  bool dual_lower_bound = false;  // ||T* G|| >= ||T|| / 2
  double constant_estimate = 0.0; // deficit / dist^2
  double predicted = 0.0;    // (p-1)/4 ||T||
};

LocalStabilityReport local_stability_pipeline(const FiniteOperator& T,
                                              const NormCertificate& cert,
                                              std::span<const double> g);

struct CounterexampleRow {
  double delta = 0.0;
  double holder_gap = 0.0;  // || h1 - h2^{r'-1} ||_r
  double aldaz_side = 0.0;  // || h1^{r/2} - h2^{r'/2} ||_2^2, equal to 2 delta
  double identity_error = 0.0;  // |aldaz_side - 2 delta|
  double h1_norm = 0.0;
  double h2_norm = 0.0;
  double ratio = 0.0;       // holder_gap^sigma / (2 delta)
};

// h1 = 1 and h2 = (1-delta)^{-2/r'} on (0, (1-delta)^2) inside [0, 1], with
// all integrals of these step functions taken exactly.
std::vector<CounterexampleRow> sigma_counterexample(double r, double sigma,
                                                    const std::vector<double>& deltas);

struct StereoPoint {
  Vector point;     // on S^{n-1}
  double jacobian;  // (2 / (1 + |x|^2))^{n-1}
};

// Inverse stereographic projection from R^{n-1}, x = 0 to the north pole.
StereoPoint stereographic(std::span<const double> x);

struct IsometryCheck {
  double sphere_norm = 0.0;
  double flat_norm = 0.0;
};

// ||G||_{L^{q'}(S^{n-1})} and ||J^{1/q'} G o pi^{-1}||_{L^{q'}(R^{n-1})}, n = 2, 3.
IsometryCheck pushforward_isometry(const std::function<double(const Vector&)>& G, int n,
                                   double q_prime, double tol = 1e-9);

}  // namespace tracestab::duality
