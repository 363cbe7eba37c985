#include "tracestab/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "tracestab/errors.hpp"
#include "tracestab/specfun.hpp"

namespace tracestab::harmonic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double dot(const std::vector<double>& w, const std::vector<double>& a,
           const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

}  // namespace

RadialGrid::RadialGrid(double r_max, int panels, int order)
    : r_max_(r_max), panels_(panels), order_(order) {
  if (!(r_max > 0.0) || panels < 1 || order < 1) {
    throw PreconditionError("radial grid: r_max > 0, panels >= 1, order >= 1 required");
  }
  rule_ = quad::composite_gauss_legendre(0.0, r_max, panels, order);
}

RadialGrid default_grid() { return RadialGrid(200.0, 160, 8); }

void ProfileSet::validate() const {
  if (n < 2) throw PreconditionError("profile set: n >= 2 required");
  std::set<std::pair<int, int>> seen;
  for (const auto& mode : modes) {
    if (mode.k < 0) throw PreconditionError("profile set: k >= 0 required");
    const long dim = specfun::harmonic_dimension(n, mode.k);
    if (mode.m < 1 || mode.m > dim) {
      throw PreconditionError("profile set: m=" + std::to_string(mode.m) + " outside 1..dim H_" +
                              std::to_string(mode.k) + "=" + std::to_string(dim));
    }
    if (mode.samples.size() != grid.size()) {
      throw PreconditionError("profile set: mode (" + std::to_string(mode.k) + "," +
                              std::to_string(mode.m) + ") has " +
                              std::to_string(mode.samples.size()) + " samples, grid has " +
                              std::to_string(grid.size()));
    }
    for (double v : mode.samples) {
      if (!std::isfinite(v)) throw PreconditionError("profile set: non-finite sample");
    }
    if (!seen.insert({mode.k, mode.m}).second) {
      throw PreconditionError("profile set: duplicate mode (" + std::to_string(mode.k) + "," +
                              std::to_string(mode.m) + ")");
    }
  }
}

ProfileSet ProfileSet::scaled(double factor) const {
  ProfileSet out = *this;
  for (auto& mode : out.modes) {
    for (double& v : mode.samples) v *= factor;
    mode.tail *= factor;
  }
  return out;
}

nlohmann::json ProfileSet::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["grid"] = {{"r_max", grid.r_max()}, {"panels", grid.panels()}, {"order", grid.order()}};
  j["modes"] = nlohmann::json::array();
  for (const auto& mode : modes) {
    j["modes"].push_back(
        {{"k", mode.k}, {"m", mode.m}, {"samples", mode.samples}, {"tail", mode.tail}});
  }
  return j;
}

ProfileSet ProfileSet::from_json(const nlohmann::json& j) {
  ProfileSet ps;
  ps.n = j.at("n").get<int>();
  const auto& g = j.at("grid");
  ps.grid = RadialGrid(g.at("r_max").get<double>(), g.at("panels").get<int>(),
                       g.value("order", 8));
  for (const auto& m : j.at("modes")) {
    ps.modes.push_back(Mode{m.at("k").get<int>(), m.at("m").get<int>(),
                            m.at("samples").get<std::vector<double>>(), m.value("tail", 0.0)});
  }
  ps.validate();
  return ps;
}

nlohmann::json DeficitReport::to_json() const {
  return {{"sumB", sumB},         {"sumA", sumA},         {"A01", A01},
          {"deficit", deficit},   {"dist_sq", dist_sq},   {"ratio", ratio},
          {"constant", constant}, {"margin", margin},     {"satisfied", satisfied}};
}

std::string DeficitReport::csv_header() {
  return "sumB,sumA,A01,deficit,dist_sq,ratio,constant,margin,satisfied";
}

std::string DeficitReport::csv_row() const {
  std::ostringstream os;
  os << fmt(sumB) << ',' << fmt(sumA) << ',' << fmt(A01) << ',' << fmt(deficit) << ','
     << fmt(dist_sq) << ',' << fmt(ratio) << ',' << fmt(constant) << ',' << fmt(margin) << ','
     << (satisfied ? "true" : "false");
  return os.str();
}

TraceModel::TraceModel(spectrum::WeightSpec weight, spectrum::LambdaSpectrum spectrum,
                       RadialGrid grid, double tol)
    : weight_(std::move(weight)), spectrum_(std::move(spectrum)), grid_(std::move(grid)),
      tol_(tol) {
  if (weight_.n() != spectrum_.weight.n()) {
    throw PreconditionError("trace model: spectrum dimension differs from weight");
  }
}

double TraceModel::lambda(int k) const {
  if (k < 0) throw DomainError("trace model: k >= 0 required");
  if (k < static_cast<int>(spectrum_.values.size())) return spectrum_.values[k];
  std::lock_guard<std::mutex> lock(mu_);
  auto it = extra_lambda_.find(k);
  if (it != extra_lambda_.end()) return it->second;
  const double v = spectrum::lambda_value(weight_, k, spectrum_.tol).value;
  if (v > spectrum_.certificate.tail_bound * (1.0 + 1e-9) + 1e-300) {
    throw InconclusiveError("trace model: lambda_" + std::to_string(k) +
                            " exceeds the spectrum's tail certificate");
  }
  extra_lambda_[k] = v;
  return v;
}

double TraceModel::constant() const { return spectrum::stability_constant(spectrum_).value; }

const TraceModel::Entry& TraceModel::entry(int k) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
  }
  Entry e;
  const specfun::Order order = specfun::Order::for_mode(weight_.n(), k);
  const auto& r = grid_.nodes();
  e.kernel.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    e.kernel[i] = specfun::bessel_j(order, r[i]) * std::sqrt(r[i] * weight_(r[i]));
  }
  e.grid_mass = dot(grid_.weights(), e.kernel, e.kernel);
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(k, std::move(e)).first->second;
}

const std::vector<double>& TraceModel::kernel(int k) const { return entry(k).kernel; }

double TraceModel::tail_mass(int k) const {
  return std::max(0.0, lambda(k) - entry(k).grid_mass);
}

double TraceModel::B(const Mode& mode) const {
  double b = 0.0;
  const auto& w = grid_.weights();
  for (std::size_t i = 0; i < w.size(); ++i) b += w[i] * mode.samples[i] * mode.samples[i];
  if (mode.tail != 0.0) b += mode.tail * mode.tail * tail_mass(mode.k);
  return b;
}

double TraceModel::A(const Mode& mode) const {
  const Entry& e = entry(mode.k);
  double a = dot(grid_.weights(), mode.samples, e.kernel);
  if (mode.tail != 0.0) a += mode.tail * tail_mass(mode.k);
  return a * a;
}

DeficitReport TraceModel::report(const ProfileSet& ps) const {
  ps.validate();
  if (ps.n != weight_.n()) throw PreconditionError("deficit report: dimension mismatch");
  if (ps.grid.size() != grid_.size() || ps.grid.r_max() != grid_.r_max() ||
      ps.grid.order() != grid_.order()) {
    throw PreconditionError("deficit report: profile grid differs from the model grid");
  }
  DeficitReport rep;
  for (const auto& mode : ps.modes) {
    const double a = A(mode);
    rep.sumB += B(mode);
    rep.sumA += a;
    if (mode.k == 0) rep.A01 = a;
  }
  const double l0 = lambda(0);
  rep.constant = constant();
  rep.deficit = l0 * rep.sumB - rep.sumA;
  rep.dist_sq = rep.sumB - rep.A01 / l0;
  // Below round-off of sumB the distance is indistinguishable from zero.
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * rep.sumB;
  if (rep.dist_sq <= floor) {
    rep.ratio = kInf;
  } else {
    rep.ratio = rep.deficit / rep.dist_sq;
  }
  rep.margin = rep.deficit - rep.constant * rep.dist_sq;
  rep.satisfied = rep.margin >= -tol_ * rep.sumB;
  return rep;
}

Mode TraceModel::extremal_mode(int k, int m, double scale) const {
  const double norm = scale / std::sqrt(lambda(k));
  Mode mode{k, m, kernel(k), norm};
  for (double& v : mode.samples) v *= norm;
  return mode;
}

double B_coefficient(const TraceModel& model, const Mode& mode) { return model.B(mode); }
double A_coefficient(const TraceModel& model, const Mode& mode) { return model.A(mode); }

DeficitReport deficit_report(const ProfileSet& ps, const spectrum::WeightSpec& weight,
                             const spectrum::LambdaSpectrum& spectrum) {
  TraceModel model(weight, spectrum, ps.grid);
  return model.report(ps);
}

ProfileSet equality_case_builder(const TraceModel& model, double c,
                                 const std::vector<HarmonicCoefficient>& Y) {
  const auto& K_set = model.spectrum().K_set;
  if (K_set.empty()) {
    throw UnsupportedError("equality case: no k attains lambda_star, so no extremiser exists");
  }
  ProfileSet ps;
  ps.n = model.weight().n();
  ps.grid = model.grid();
  if (c != 0.0) ps.modes.push_back(model.extremal_mode(0, 1, c));
  for (const auto& y : Y) {
    if (std::find(K_set.begin(), K_set.end(), y.k) == K_set.end()) {
      throw PreconditionError("equality case: k=" + std::to_string(y.k) +
                              " is not in the extremal set");
    }
    if (y.value != 0.0) ps.modes.push_back(model.extremal_mode(y.k, y.m, y.value));
  }
  ps.validate();
  return ps;
}

std::vector<double> extremising_sequence(const TraceModel& model, const std::vector<int>& k_list) {
  if (k_list.empty()) throw PreconditionError("extremising sequence: empty k list");
  std::vector<double> out;
  for (int k : k_list) {
    if (k < 1) throw PreconditionError("extremising sequence: k >= 1 required");
    ProfileSet ps;
    ps.n = model.weight().n();
    ps.grid = model.grid();
    ps.modes.push_back(model.extremal_mode(k, 1, 1.0));
    out.push_back(model.report(ps).ratio);
  }
  return out;
}

ReverseCheck reverse_deficit_check(const TraceModel& model, const ProfileSet& ps, double tol) {
  const DeficitReport rep = model.report(ps);
  ReverseCheck out;
  out.margin = model.lambda(0) * rep.dist_sq - rep.deficit;
  out.holds = out.margin >= -tol * rep.sumB;
  return out;
}

double spherical_harmonic(int n, int k, int m, const std::vector<double>& theta) {
  if (n != 2 && n != 3) throw UnsupportedError("spherical harmonics only for n = 2, 3");
  if (static_cast<int>(theta.size()) != n) {
    throw PreconditionError("spherical harmonic: point must have n coordinates");
  }
  double norm2 = 0.0;
  for (double t : theta) norm2 += t * t;
  if (std::fabs(norm2 - 1.0) > 1e-10) {
    throw PreconditionError("spherical harmonic: point is not on the unit sphere");
  }
  const long dim = specfun::harmonic_dimension(n, k);
  if (k < 0 || m < 1 || m > dim) throw PreconditionError("spherical harmonic: bad (k, m)");
  if (n == 2) {
    const double phi = std::atan2(theta[1], theta[0]);
    if (k == 0) return 1.0 / std::sqrt(2.0 * kPi);
    return (m == 1 ? std::cos(k * phi) : std::sin(k * phi)) / std::sqrt(kPi);
  }
  const int mu = m - k - 1;
  const unsigned am = static_cast<unsigned>(std::abs(mu));
  const double z = std::clamp(theta[2], -1.0, 1.0);
  const double phi = std::atan2(theta[1], theta[0]);
  double scale = (2.0 * k + 1.0) / (4.0 * kPi) *
                 std::exp(std::lgamma(k - am + 1.0) - std::lgamma(k + am + 1.0));
  if (mu != 0) scale *= 2.0;
  const double plm = std::assoc_legendre(static_cast<unsigned>(k), am, z);
  const double ang = mu > 0 ? std::cos(mu * phi) : (mu < 0 ? std::sin(am * phi) : 1.0);
  return std::sqrt(scale) * plm * ang;
}

std::complex<double> trace_evaluate(const TraceModel& model, const ProfileSet& ps,
                                    const std::vector<double>& theta) {
  const int n = ps.n;
  if (n != 2 && n != 3) throw UnsupportedError("trace_evaluate: only n = 2, 3");
  std::complex<double> sum = 0.0;
  for (const auto& mode : ps.modes) {
    double a = dot(model.grid().weights(), mode.samples, model.kernel(mode.k));
    if (mode.tail != 0.0) a += mode.tail * model.tail_mass(mode.k);
    // (-1)^k / i^k = i^k
    static const std::complex<double> kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    sum += kPhase[mode.k % 4] * spherical_harmonic(n, mode.k, mode.m, theta) * a;
  }
  return sum / std::pow(2.0 * kPi, 0.5 * n);
}

ProfileSet random_profile_set(const TraceModel& model, std::uint64_t seed,
                              const RandomOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = model.weight().n();
  const double r_max = model.grid().r_max();

  ProfileSet ps;
  ps.n = n;
  ps.grid = model.grid();

  std::vector<std::pair<int, int>> pool;
  for (int k = 0; k <= options.max_k; ++k) {
    const long dim = specfun::harmonic_dimension(n, k);
    for (int m = 1; m <= std::min<long>(dim, options.max_m); ++m) pool.push_back({k, m});
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  const int count = 1 + static_cast<int>(unif(rng) * options.max_modes);
  const auto& r = model.grid().nodes();
  for (int i = 0; i < std::min<int>(count, pool.size()); ++i) {
    const auto [k, m] = pool[i];
    Mode mode{k, m, std::vector<double>(r.size(), 0.0), 0.0};
    // Part along the extremal kernel, sometimes dominant.
    const double along = (unif(rng) < 0.5 ? 3.0 : 0.3) * gauss(rng);
    const double norm = 1.0 / std::sqrt(model.lambda(k));
    const auto& ker = model.kernel(k);
    for (std::size_t j = 0; j < r.size(); ++j) mode.samples[j] = along * norm * ker[j];
    mode.tail = along * norm;
    const int bumps = static_cast<int>(unif(rng) * 4.0);
    for (int b = 0; b < bumps; ++b) {
      const double width = 0.5 + 20.0 * unif(rng);
      const double center = width + unif(rng) * (r_max - 2.0 * width);
      const double amp = gauss(rng);
      for (std::size_t j = 0; j < r.size(); ++j) {
        const double x = (r[j] - center) / width;
        if (std::fabs(x) < 1.0) mode.samples[j] += amp * (1.0 - x * x) * (1.0 - x * x);
      }
    }
    ps.modes.push_back(std::move(mode));
  }
  std::sort(ps.modes.begin(), ps.modes.end(), [](const Mode& a, const Mode& b) {
    return a.k != b.k ? a.k < b.k : a.m < b.m;
  });
  return ps;
}

}  // namespace tracestab::harmonic
