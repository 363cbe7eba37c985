#pragma once

// Functions g on R^n in the spherical-harmonic radial-profile picture:
//   ghat(xi) = sum_{k,m} P^{(k,m)}(xi/|xi|) g_0^{(k,m)}(|xi|) |xi|^{(1-n)/2}.
// Everything the trace deficit needs is diagonal in (k, m).

#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracestab/quadrature.hpp"
#include "tracestab/spectrum.hpp"

namespace tracestab::harmonic {

// Composite Gauss-Legendre rule on (0, r_max].
class RadialGrid {
 public:
  RadialGrid(double r_max, int panels, int order = 8);

  double r_max() const noexcept { return r_max_; }
  int panels() const noexcept { return panels_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return rule_.nodes.size(); }
  const std::vector<double>& nodes() const noexcept { return rule_.nodes; }
  const std::vector<double>& weights() const noexcept { return rule_.weights; }

 private:
  double r_max_;
  int panels_;
  int order_;
  quad::Rule rule_;
};

// Default grid: r_max = 200 with 40 nodes per 2 pi.
RadialGrid default_grid();

// One radial profile g_0^{(k,m)}: samples at the grid nodes, and beyond
// r_max the profile continues as tail * K_k, K_k the Bessel kernel.
struct Mode {
  int k = 0;
  int m = 1;
  std::vector<double> samples;
  double tail = 0.0;
};

struct ProfileSet {
  int n = 3;
  RadialGrid grid = default_grid();
  std::vector<Mode> modes;

  // Throws PreconditionError on bad indices or sample counts.
  void validate() const;
  ProfileSet scaled(double factor) const;

  nlohmann::json to_json() const;
  static ProfileSet from_json(const nlohmann::json& j);
};

struct DeficitReport {
  double sumB = 0.0;
  double sumA = 0.0;
  double A01 = 0.0;
  double deficit = 0.0;  // lambda_0 sumB - sumA
  double dist_sq = 0.0;  // sumB - A01 / lambda_0
  double ratio = 0.0;    // deficit / dist_sq, +inf when dist_sq vanishes
  double constant = 0.0; // lambda_0 - lambda_star
  double margin = 0.0;   // deficit - constant * dist_sq
  bool satisfied = false;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

// Kernels K_k(r) = J_{k+(n-2)/2}(r) (r w(r))^{1/2} on a grid, cached per k,
// together with the spectrum they are measured against.
class TraceModel {
 public:
  TraceModel(spectrum::WeightSpec weight, spectrum::LambdaSpectrum spectrum,
             RadialGrid grid = default_grid(), double tol = 1e-8);

  const spectrum::WeightSpec& weight() const noexcept { return weight_; }
  const spectrum::LambdaSpectrum& spectrum() const noexcept { return spectrum_; }
  const RadialGrid& grid() const noexcept { return grid_; }

  // lambda_k; k beyond the spectrum is computed on demand.
  double lambda(int k) const;
  double constant() const;

  const std::vector<double>& kernel(int k) const;
  // lambda_k minus the grid quadrature of K_k^2 (the mass carried by the
  // tail continuation), clamped at 0.
  double tail_mass(int k) const;

  double B(const Mode& mode) const;
  double A(const Mode& mode) const;

  DeficitReport report(const ProfileSet& ps) const;

  // samples = scale * K_k / sqrt(lambda_k), so B = scale^2 and A = lambda_k B.
  Mode extremal_mode(int k, int m, double scale) const;

 private:
  struct Entry {
    std::vector<double> kernel;
    double grid_mass = 0.0;
  };
  const Entry& entry(int k) const;

  spectrum::WeightSpec weight_;
  spectrum::LambdaSpectrum spectrum_;
  RadialGrid grid_;
  double tol_;
  mutable std::mutex mu_;
  mutable std::map<int, Entry> cache_;
  mutable std::map<int, double> extra_lambda_;
};

double B_coefficient(const TraceModel& model, const Mode& mode);
double A_coefficient(const TraceModel& model, const Mode& mode);

DeficitReport deficit_report(const ProfileSet& ps, const spectrum::WeightSpec& weight,
                             const spectrum::LambdaSpectrum& spectrum);

struct HarmonicCoefficient {
  int k;
  int m;
  double value;
};

// c K_0 + sum Y_{k,m} K_k over k in the extremal set, each kernel
// normalized to unit B.  Throws UnsupportedError when the set is empty.
ProfileSet equality_case_builder(const TraceModel& model, double c,
                                 const std::vector<HarmonicCoefficient>& Y);

// deficit / dist_sq for the pure (k, 1) extremal profile, for each k.
std::vector<double> extremising_sequence(const TraceModel& model, const std::vector<int>& k_list);

struct ReverseCheck {
  bool holds = false;
  double margin = 0.0;  // lambda_0 dist_sq - deficit = sumA - A01
};

// deficit <= lambda_0 dist_sq, with absolute slack tol * sumB.
ReverseCheck reverse_deficit_check(const TraceModel& model, const ProfileSet& ps,
                                   double tol = 1e-9);

// Orthonormal real spherical harmonic P^{(k,m)} at a unit vector; n = 2, 3.
// For n = 3, m = 1..2k+1 runs over orders -k..k (sine terms first).
double spherical_harmonic(int n, int k, int m, const std::vector<double>& theta);

// S_w g(theta) from the profile expansion; complex because of the i^k
// factors.  n = 2, 3 only.
std::complex<double> trace_evaluate(const TraceModel& model, const ProfileSet& ps,
                                    const std::vector<double>& theta);

struct RandomOptions {
  int max_k = 6;
  int max_m = 3;
  int max_modes = 5;
};

// Seeded mixture of compact bumps and extremal kernels on the model grid.
ProfileSet random_profile_set(const TraceModel& model, std::uint64_t seed,
                              const RandomOptions& options = {});

}  // namespace tracestab::harmonic
