#include "tracestab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "tracestab/duality.hpp"
#include "tracestab/errors.hpp"
#include "tracestab/harmonic.hpp"
#include "tracestab/transport.hpp"

namespace tracestab::cli {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

class Checks {
 public:
  explicit Checks(std::ostream& out) : out_(out) {}

  void add(const std::string& anchor, const std::string& description, double value,
           double tolerance, bool pass) {
    lines_.push_back({anchor, description, value, tolerance, pass});
    out_ << (pass ? "PASS " : "FAIL ") << anchor << "  " << description << '\n';
  }

  const std::vector<CheckLine>& lines() const { return lines_; }

 private:
  std::ostream& out_;
  std::vector<CheckLine> lines_;
};

class Writer {
 public:
  Writer(const RunConfig& c) {
    std::string dir = c.output_dir;
    if (dir.empty()) {
      const char* env = std::getenv("TRACESTAB_OUTPUT_DIR");
      dir = env != nullptr && *env != '\0' ? env : "tracestab-output";
    }
    dir_ = dir;
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
    files_.push_back(path.string());
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

spectrum::WeightSpec make_weight(const RunConfig& c) {
  if (c.weight == "homogeneous") return spectrum::WeightSpec::homogeneous(c.n, c.s);
  if (c.weight == "inhomogeneous") return spectrum::WeightSpec::inhomogeneous(c.n, c.s);
  return spectrum::WeightSpec::custom(c.n, *c.custom);
}

bool closed_family(const RunConfig& c) {
  return c.weight == "homogeneous" || (c.weight == "inhomogeneous" && c.s == 1.0);
}

double closed_lambda(const RunConfig& c, int k) {
  return c.weight == "homogeneous" ? spectrum::lambda_homogeneous_closed(c.n, c.s, k)
                                   : spectrum::lambda_inhomogeneous_s1(c.n, k);
}

// lambda_0 - lambda_1 for the homogeneous weight, written as one Gamma
// expression.
double homogeneous_constant_closed(int n, double s) {
  const double pre = std::pow(2.0, 1.0 - 2.0 * s) * std::tgamma(2.0 * s - 1.0) /
                     (std::tgamma(s) * std::tgamma(s));
  const double a = std::tgamma(0.5 * (n - 2.0 * s)) / std::tgamma(0.5 * (n + 2.0 * s - 2.0));
  const double b = std::tgamma(0.5 * (n - 2.0 * s + 2.0)) / std::tgamma(0.5 * (n + 2.0 * s));
  return pre * (a - b);
}

std::string join_csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  }
  return out;
}

// ---- commands ------------------------------------------------------------

void cmd_spectrum(const RunConfig& c, Checks& ck, Writer& w) {
  const auto weight = make_weight(c);
  const auto sp = spectrum::build_spectrum(weight, c.K, c.tol);
  if (closed_family(c)) {
    double worst = 0.0;
    for (int k = 0; k <= std::min(c.K, 20); ++k) {
      const double q = spectrum::lambda_quadrature(weight, k, 1e-10).value;
      worst = std::max(worst, rel(q, closed_lambda(c, k)));
    }
    ck.add("lambda/closed-form-twin",
           "quadrature of the Bessel integral matches the closed form, max rel err " + num(worst),
           worst, 1e-6, worst <= 1e-6);
    bool dec = true;
    for (int k = 1; k <= c.K; ++k) dec = dec && sp.values[k] < sp.values[k - 1];
    ck.add("spectrum/strict-decrease", "lambda_k strictly decreasing for k <= " + std::to_string(c.K),
           dec ? 1.0 : 0.0, 0.0, dec);
  } else {
    bool below = true;
    for (int k = 1; k <= c.K; ++k) below = below && sp.values[k] < sp.values[0];
    ck.add("spectrum/below-lambda0", "lambda_k < lambda_0 for 1 <= k <= " + std::to_string(c.K),
           below ? 1.0 : 0.0, 0.0, below);
  }
  const auto& cert = sp.certificate;
  ck.add("spectrum/truncation-certificate",
         "sup_{k>" + std::to_string(cert.K) + "} lambda_k <= " + num(cert.tail_bound) +
             " < lambda_star = " + num(sp.lambda_star) + " (" + cert.method + ")",
         cert.tail_bound, sp.lambda_star, cert.tail_bound < sp.lambda_star);

  w.write("spectrum.json", spectrum::to_json(sp).dump(2) + "\n");
  w.write("spectrum.csv", spectrum::to_csv(sp));

  if (c.tau) {
    const double tau = *c.tau;
    std::vector<std::vector<std::string>> rows{{"k", "closed", "quadrature", "rel_err"}};
    double worst = 0.0;
    for (int k = 0; k <= c.K; ++k) {
      if (k + 0.5 * (c.n - tau) <= 0.0) continue;  // divergent at the origin
      const double closed = spectrum::watson_integral(c.n, k, tau);
      const double quad = spectrum::watson_quadrature(c.n, k, tau, 1e-10).value;
      worst = std::max(worst, rel(quad, closed));
      rows.push_back({std::to_string(k), full(closed), full(quad), full(rel(quad, closed))});
    }
    ck.add("watson/identity",
           "Watson integral, tau = " + num(tau) + ", k <= " + std::to_string(c.K) +
               ": max rel err " + num(worst),
           worst, 1e-6, worst <= 1e-6);
    w.write("watson.csv", join_csv(rows));
  }
}

void cmd_constants(const RunConfig& c, Checks& ck, Writer& w) {
  const auto weight = make_weight(c);
  const auto sp = spectrum::build_spectrum(weight, c.K, c.tol);
  const auto sc = spectrum::stability_constant(sp);
  const double l0 = sp.values[0];
  ck.add("constant/sharp", "C(w)^2 = lambda_0 = " + num(l0), l0, 0.0, l0 > 0.0);
  ck.add("constant/stability",
         "C'(w) = lambda_0 - lambda_star = " + num(sc.value) +
             (sc.extremisers_exist ? "" : " (no extremisers)"),
         sc.value, 0.0, sc.value >= 0.0);
  if (closed_family(c)) {
    const double q = spectrum::lambda_quadrature(weight, 0, 1e-10).value;
    const double e = rel(q, closed_lambda(c, 0));
    ck.add("lambda/closed-form-twin", "lambda_0 quadrature twin, rel err " + num(e), e, 1e-6,
           e <= 1e-6);
    const double closed = c.weight == "homogeneous" ? homogeneous_constant_closed(c.n, c.s)
                                                    : closed_lambda(c, 0) - closed_lambda(c, 1);
    const double err = std::fabs(sc.value - closed);
    ck.add("constant/closed-form", "C'(w) against the closed Gamma/Bessel expression, abs err " + num(err),
           err, 1e-12, err <= 1e-12);
  }
  nlohmann::json j{{"weight", weight.to_json()},
                   {"C_squared", l0},
                   {"C_prime", sc.value},
                   {"lambda_star", sp.lambda_star},
                   {"K_set", sp.K_set},
                   {"extremisers_exist", sc.extremisers_exist}};
  w.write("constants.json", j.dump(2) + "\n");
  w.write("constants.csv", "C_squared,C_prime,lambda_star\n" + full(l0) + "," + full(sc.value) +
                               "," + full(sp.lambda_star) + "\n");
}

void cmd_verify_trace(const RunConfig& c, Checks& ck, Writer& w) {
  const auto weight = make_weight(c);
  auto sp = spectrum::build_spectrum(weight, c.K, c.tol);
  harmonic::TraceModel model(weight, sp);
  const double l0 = model.lambda(0);

  int master = 0, reverse = 0, cs_ok = 0, cs_total = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string csv = "trial," + harmonic::DeficitReport::csv_header() + "\n";
  for (int i = 0; i < c.trials; ++i) {
    const auto ps = harmonic::random_profile_set(model, derive_seed(*c.seed, i));
    const auto rep = model.report(ps);
    if (rep.satisfied) ++master;
    worst_margin = std::min(worst_margin, rep.margin / rep.sumB);
    if (harmonic::reverse_deficit_check(model, ps).holds) ++reverse;
    for (const auto& mode : ps.modes) {
      const double b = model.B(mode);
      ++cs_total;
      if (model.A(mode) <= model.lambda(mode.k) * b + 1e-9 * b) ++cs_ok;
    }
    csv += std::to_string(i) + "," + rep.csv_row() + "\n";
  }
  ck.add("stability/master-inequality",
         std::to_string(master) + "/" + std::to_string(c.trials) +
             " stability checks pass (worst margin/sumB " + num(worst_margin) + ")",
         master, c.trials, master == c.trials);
  ck.add("stability/cauchy-schwarz",
         std::to_string(cs_ok) + "/" + std::to_string(cs_total) + " modes with A <= lambda_k B",
         cs_ok, cs_total, cs_ok == cs_total);
  ck.add("stability/reverse-inequality",
         std::to_string(reverse) + "/" + std::to_string(c.trials) + " draws with deficit <= lambda_0 dist_sq",
         reverse, c.trials, reverse == c.trials);

  if (!sp.K_set.empty()) {
    const auto eq = harmonic::equality_case_builder(model, 1.0, {{sp.K_set.front(), 1, 1.0}});
    const auto rep = model.report(eq);
    const double err = std::fabs(rep.ratio - model.constant());
    ck.add("stability/equality-case", "equality profile ratio - C' = " + num(err), err, 1e-8,
           err <= 1e-8);
  }
  double worst_seq = 0.0;
  std::vector<int> ks;
  for (int k = 1; k <= std::min(c.K, 6); ++k) ks.push_back(k);
  const auto seq = harmonic::extremising_sequence(model, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    worst_seq = std::max(worst_seq, std::fabs(seq[i] - (l0 - model.lambda(ks[i]))));
  }
  ck.add("stability/extremising-sequence",
         "pure-mode ratios equal lambda_0 - lambda_k, max err " + num(worst_seq), worst_seq, 1e-8,
         worst_seq <= 1e-8);

  const auto ps = harmonic::random_profile_set(model, derive_seed(*c.seed, c.trials));
  const double r1 = model.report(ps).ratio;
  const double r2 = model.report(ps.scaled(3.7)).ratio;
  const double scale_err = std::isinf(r1) && std::isinf(r2) ? 0.0 : rel(r2, r1);
  ck.add("stability/scale-invariance", "ratio unchanged under scaling, rel err " + num(scale_err),
         scale_err, 1e-12, scale_err <= 1e-12);

  w.write("verify_trace.csv", csv);
}

void cmd_duality_sweep(const RunConfig& c, Checks& ck, Writer& w) {
  using namespace duality;
  double worst_transfer = 0.0;
  int anomalies = 0;
  std::string csv = "operator,norm,achieved,rel_err,certified,anomaly\n";
  std::optional<NormCertificate> first_cert;
  std::optional<FiniteOperator> first_op;
  for (int i = 0; i < c.operators; ++i) {
    const auto seed = derive_seed(*c.seed, i);
    const auto T = random_nonnegative(c.rows, c.cols, c.p, c.q, seed);
    const auto cert = operator_norm(T, c.starts, seed);
    if (cert.anomaly) ++anomalies;
    const Vector G = duality_map(T.apply(cert.extremiser), c.q);
    const auto tr = extremiser_transfer(T, G, cert.value);
    const double e = rel(tr.achieved, cert.value);
    worst_transfer = std::max(worst_transfer, e);
    csv += std::to_string(i) + "," + full(cert.value) + "," + full(tr.achieved) + "," + full(e) +
           "," + (cert.certified ? "true" : "false") + "," + (cert.anomaly ? "true" : "false") + "\n";
    if (i == 0) {
      first_cert = cert;
      first_op = T;
    }
  }
  ck.add("duality/extremiser-transfer",
         "transferred extremisers reach the norm on " + std::to_string(c.operators) +
             " operators, max rel err " + num(worst_transfer) + " (" + std::to_string(anomalies) +
             " with several local maxima)",
         worst_transfer, 1e-8, worst_transfer <= 1e-8);

  if (c.cols <= 4) {
    double worst = 0.0;
    const int count = std::min(c.operators, 10);
    for (int i = 0; i < count; ++i) {
      const auto seed = derive_seed(*c.seed, i);
      const auto T = random_nonnegative(c.rows, c.cols, c.p, c.q, seed);
      const double fixed = operator_norm(T, c.starts, seed).value;
      worst = std::max(worst, rel(brute_force_norm(T, 200), fixed));
    }
    ck.add("duality/brute-force-norm",
           "fixed-point norm against sphere search on " + std::to_string(count) +
               " operators, max rel err " + num(worst),
           worst, 1e-4, worst <= 1e-4);
  }

  std::mt19937_64 rng(derive_seed(*c.seed, 1u << 20));
  std::normal_distribution<double> N(0.0, 1.0);
  auto random_vec = [&](int d) {
    Vector v(d);
    for (double& x : v) x = N(rng);
    return v;
  };
  int v3 = 0, v1 = 0;
  double aldaz_max = 0.0;
  const double r3[] = {1.5, 2.0, 3.0};
  const double r1s[] = {2.0, 2.5, 4.0};
  for (int t = 0; t < c.trials; ++t) {
    const int d = 2 + t % 5;
    {
      const Vector a = random_vec(d), b = random_vec(d);
      const auto g = cfl3_gap(a, b, r3[t % 3]);
      if (g.lhs > g.rhs + 1e-12) ++v3;
    }
    {
      const double r = r1s[t % 3];
      Vector a = random_vec(d), b = random_vec(d);
      const double na = lp_norm(a, r), nb = lp_norm(b, conjugate(r));
      for (double& x : a) x /= na;
      for (double& x : b) x /= nb;
      const auto g = cfl1_gap(a, b, r);
      if (g.pairing > g.bound + 1e-12) ++v1;
    }
    {
      const double r = 1.5;
      Vector a = random_vec(d), b = random_vec(d);
      const double na = lp_norm(a, r), nb = lp_norm(b, conjugate(r));
      for (double& x : a) x /= na;
      for (double& x : b) x /= nb;
      aldaz_max = std::max(aldaz_max, aldaz_ratio(a, b, r));
    }
  }
  ck.add("duality/cfl3", std::to_string(v3) + " violations in " + std::to_string(c.trials) +
                             " random pairs, r in {1.5, 2, 3}",
         v3, 0.0, v3 == 0);
  ck.add("duality/cfl1", std::to_string(v1) + " violations in " + std::to_string(c.trials) +
                             " random unit pairs, r in {2, 2.5, 4}",
         v1, 0.0, v1 == 0);
  ck.add("duality/aldaz-empirical", "max Aldaz ratio at r = 1.5 over " + std::to_string(c.trials) +
                                        " pairs: " + num(aldaz_max),
         aldaz_max, 0.0, std::isfinite(aldaz_max));

  if (c.p <= 2.0) {
    const auto& T = *first_op;
    Vector g = first_cert->extremiser;
    for (double& x : g) x += 0.02 * N(rng);
    const auto rep = local_stability_pipeline(T, *first_cert, g);
    ck.add("duality/local-stability-chain",
           "deficit " + num(rep.deficit) + " >= norm gap + convexity term " +
               num(rep.norm_gap + rep.convexity),
           rep.deficit - rep.norm_gap - rep.convexity, 1e-12, rep.chain_holds);
  }
  w.write("duality.csv", csv);
}

void cmd_counterexample(const RunConfig& c, Checks& ck, Writer& w) {
  const auto rows = duality::sigma_counterexample(c.r, c.sigma, c.deltas);
  double worst = 0.0;
  bool dec = true;
  std::string csv = "delta,holder_gap,aldaz_side,identity_error,ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, rows[i].identity_error);
    if (i > 0) dec = dec && rows[i].ratio < rows[i - 1].ratio;
    csv += full(rows[i].delta) + "," + full(rows[i].holder_gap) + "," + full(rows[i].aldaz_side) +
           "," + full(rows[i].identity_error) + "," + full(rows[i].ratio) + "\n";
  }
  ck.add("counterexample/identity-2delta", "Aldaz side equals 2 delta, max err " + num(worst), worst,
         1e-14, worst <= 1e-14);
  ck.add("counterexample/ratio-decay",
         std::string("ratio column ") + (dec ? "strictly decreasing" : "not decreasing") + ", last/first " +
             num(rows.back().ratio / rows.front().ratio),
         rows.back().ratio / rows.front().ratio, 0.0, dec);
  w.write("counterexample.csv", csv);
}

void cmd_transport_probe(const RunConfig& c, Checks& ck, Writer& w) {
  using namespace transport;
  int cells = static_cast<int>(std::lround(2.0 * c.L / c.h));
  cells += cells % 2;
  const PhaseGrid g(1, c.L, cells, c.t_extent);
  const int N = g.points();
  constexpr double kPi = std::numbers::pi;

  {
    const auto f = sample_phase(g, [](const auto& x, const auto& v) {
      return std::exp(-x[0] * x[0] - v[0] * v[0]);
    });
    const auto rf = velocity_average(f, g);
    double err = 0.0;
    for (int k = 0; k < g.t_points(); ++k) {
      const double t = g.t(k);
      for (int i = 0; i < N; ++i) {
        const double x = g.x(i);
        const double exact = std::sqrt(kPi / (1 + t * t)) * std::exp(-x * x / (1 + t * t));
        err = std::max(err, std::fabs(rf.samples[static_cast<std::size_t>(k) * N + i] - exact));
      }
    }
    ck.add("transport/gaussian-average", "Gaussian velocity average, max abs err " + num(err), err,
           1e-4, err <= 1e-4);
  }
  {
    const auto f = sample_phase(g, [](const auto& x, const auto& v) {
      return std::exp(-x[0] * x[0] - 4.0 * v[0] * v[0]) * (1.0 + 0.5 * x[0] * v[0]);
    });
    double total = 0.0;
    for (double v : f.samples) total += v * g.h() * g.h();
    const auto rf = velocity_average(f, g);
    double drift = 0.0;
    for (int k = 0; k < g.t_points(); ++k) {
      double m = 0.0;
      for (int i = 0; i < N; ++i) m += rf.samples[static_cast<std::size_t>(k) * N + i] * g.h();
      drift = std::max(drift, rel(m, total));
    }
    ck.add("transport/mass-conservation", "mass drift across the t-grid " + num(drift), drift, 1e-6,
           drift <= 1e-6);
  }
  {
    std::mt19937_64 rng(derive_seed(*c.seed, 7));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int pair = 0; pair < 3; ++pair) {
      const double a1 = U(rng), a2 = U(rng), b1 = U(rng), b2 = U(rng);
      const double s1 = 1.5 + U(rng), s2 = 1.5 + U(rng);
      const auto f = sample_phase(g, [&](const auto& x, const auto& v) {
        return std::exp(-(x[0] - a1) * (x[0] - a1) - s1 * (v[0] - a2) * (v[0] - a2)) +
               0.5 * std::exp(-2.0 * (x[0] + a2) * (x[0] + a2) - v[0] * v[0]);
      });
      const auto G = sample_spacetime(g, [&](double t, const auto& x) {
        return std::exp(-s2 * (t - b1) * (t - b1) - (x[0] - b2) * (x[0] - b2));
      });
      const double lhs = pairing(velocity_average(f, g), G, g);
      const double rhs = pairing(f, xray_adjoint(G, g), g);
      worst = std::max(worst, rel(lhs, rhs));
    }
    ck.add("transport/adjoint-pairing", "<rho f, G> against <f, rho* G>, max rel defect " + num(worst),
           worst, 1e-5, worst <= 1e-5);
  }
  {
    // rho* G(x, v) = rho g(-v, x) with g(a, s) = G(s, a)
    auto Gf = [](double t, double x) { return std::exp(-2.0 * t * t - (x - 0.5) * (x - 0.5)); };
    const auto G = sample_spacetime(g, [&](double t, const auto& x) { return Gf(t, x[0]); });
    const auto gg = sample_phase(g, [&](const auto& x, const auto& v) { return Gf(v[0], x[0]); });
    const auto adj = xray_adjoint(G, g);
    const auto avg = velocity_average(gg, g);
    double worst = 0.0, peak = 0.0;
    const int half = (g.t_points() - 1) / 2;
    for (int j = 0; j < N; ++j) {
      const int k = half - (j - (N - 1) / 2);  // t = -v_j
      if (k < 0 || k >= g.t_points()) continue;
      for (int i = 0; i < N; ++i) {
        const double a = adj.samples[static_cast<std::size_t>(i) * N + j];
        const double b = avg.samples[static_cast<std::size_t>(k) * N + i];
        worst = std::max(worst, std::fabs(a - b));
        peak = std::max(peak, std::fabs(b));
      }
    }
    ck.add("transport/self-duality", "rho* G against the swapped rho g, max rel err " + num(worst / peak),
           worst / peak, 1e-5, worst / peak <= 1e-5);
  }

  const double R = sharp_ratio_estimate(g);
  {
    double worst = 0.0;
    std::string csv = "sample,ratio,ratio_over_sharp\n";
    for (int i = 0; i < c.samples; ++i) {
      const auto f = random_phase_function(g, derive_seed(*c.seed, 100 + i));
      const double r = transport_ratio(f, g);
      worst = std::max(worst, r / R);
      csv += std::to_string(i) + "," + full(r) + "," + full(r / R) + "\n";
    }
    ck.add("transport/sharp-ratio-bound",
           "sharp estimate " + num(R) + "; max ratio/estimate over " + std::to_string(c.samples) +
               " random f: " + num(worst),
           worst, 1e-3, worst <= 1.0 + 1e-3);
    w.write("transport_ratios.csv", csv);
  }
  {
    double worst_band = 0.0;
    for (int i = 0; i < c.directions; ++i) {
      const auto d = random_direction(g, derive_seed(*c.seed, 10000 + i));
      const auto curve = local_stability_probe(1, d, c.eps, g);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& pt : curve.points) {
        const double q = pt.deficit / (pt.epsilon * pt.epsilon);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      worst_band = std::max(worst_band, lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
      w.write("probe_" + std::to_string(i) + ".csv", curve.csv());
    }
    ck.add("transport/quadratic-deficit",
           "max/min of deficit/eps^2 over " + std::to_string(c.directions) + " directions: " +
               num(worst_band),
           worst_band, 2.0, worst_band <= 2.0);
  }
  {
    const auto D = sample_spacetime_square(g, [](double t, double x) {
      return std::exp(-0.8 * (t - 1.0) * (t - 1.0) - (x + 0.5) * (x + 0.5)) -
             0.6 * std::exp(-(t + 1.5) * (t + 1.5) - 1.2 * (x - 1.0) * (x - 1.0));
    });
    const auto curve = dual_stability_probe(D, c.eps, g);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& pt : curve.points) {
      const double q = pt.deficit / (pt.epsilon * pt.epsilon);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    const double band = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    ck.add("transport/dual-probe", "dual-side max/min of deficit/eps^2: " + num(band), band, 2.0,
           band <= 2.0);
    w.write("dual_probe.csv", curve.csv());
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw PreconditionError("bad number '" + item + "' in list");
    out.push_back(v);
  }
  return out;
}

std::string summary(Command c) {
  switch (c) {
    case Command::spectrum: return "lambda_k table, truncation certificate, optional Watson checks (--tau)";
    case Command::constants: return "sharp constant C(w)^2 and stability constant C'(w)";
    case Command::verify_trace: return "random profile sweep of the stability and reverse inequalities";
    case Command::duality_sweep: return "finite operator norms, extremiser transfer, CFL and Aldaz sweeps";
    case Command::counterexample: return "step-function family on [0, 1] with exponent sigma";
    case Command::transport_probe: return "kinetic transport checks and local stability probes, n = 1";
  }
  return {};
}

bool randomized(Command c) {
  return c == Command::verify_trace || c == Command::duality_sweep || c == Command::transport_probe;
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::constants: return "constants";
    case Command::verify_trace: return "verify-trace";
    case Command::duality_sweep: return "duality-sweep";
    case Command::counterexample: return "counterexample";
    case Command::transport_probe: return "transport-probe";
  }
  return "?";
}

Command command_from_name(const std::string& name) {
  for (Command c : {Command::spectrum, Command::constants, Command::verify_trace,
                    Command::duality_sweep, Command::counterexample, Command::transport_probe}) {
    if (command_name(c) == name) return c;
  }
  throw PreconditionError("unknown command '" + name + "'");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"command", command_name(command)},
                   {"n", n},
                   {"s", s},
                   {"weight", weight},
                   {"K", K},
                   {"tol", tol},
                   {"trials", trials},
                   {"r", r},
                   {"sigma", sigma},
                   {"deltas", deltas},
                   {"p", p},
                   {"q", q},
                   {"rows", rows},
                   {"cols", cols},
                   {"starts", starts},
                   {"operators", operators},
                   {"grid", {{"n", 1}, {"L", L}, {"h", h}, {"t_extent", t_extent}}},
                   {"eps", eps},
                   {"directions", directions},
                   {"samples", samples},
                   {"format", format}};
  if (seed) j["seed"] = *seed;
  if (tau) j["tau"] = *tau;
  if (custom) {
    j["custom"] = {{"radii", custom->radii},
                   {"values", custom->values},
                   {"tail_exponent", custom->tail_exponent}};
  }
  return j;
}

void RunConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionError("config file: top level must be an object");
  static const std::vector<std::string> known{
      "command", "n", "s", "weight", "K", "tol", "trials", "r", "sigma", "deltas", "p", "q",
      "rows", "cols", "starts", "operators", "grid", "eps", "directions", "samples", "format",
      "seed", "tau", "custom", "output_dir"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw PreconditionError("config file: unknown key '" + key + "'");
    }
  }
  try {
    if (j.contains("command")) command = command_from_name(j["command"].get<std::string>());
    if (j.contains("n")) n = j["n"].get<int>();
    if (j.contains("s")) s = j["s"].get<double>();
    if (j.contains("weight")) weight = j["weight"].get<std::string>();
    if (j.contains("K")) K = j["K"].get<int>();
    if (j.contains("tol")) tol = j["tol"].get<double>();
    if (j.contains("trials")) trials = j["trials"].get<int>();
    if (j.contains("r")) r = j["r"].get<double>();
    if (j.contains("sigma")) sigma = j["sigma"].get<double>();
    if (j.contains("deltas")) deltas = j["deltas"].get<std::vector<double>>();
    if (j.contains("p")) p = j["p"].get<double>();
    if (j.contains("q")) q = j["q"].get<double>();
    if (j.contains("rows")) rows = j["rows"].get<int>();
    if (j.contains("cols")) cols = j["cols"].get<int>();
    if (j.contains("starts")) starts = j["starts"].get<int>();
    if (j.contains("operators")) operators = j["operators"].get<int>();
    if (j.contains("grid")) {
      const auto& gj = j["grid"];
      if (gj.contains("L")) L = gj["L"].get<double>();
      if (gj.contains("h")) h = gj["h"].get<double>();
      if (gj.contains("t_extent")) t_extent = gj["t_extent"].get<double>();
    }
    if (j.contains("eps")) eps = j["eps"].get<std::vector<double>>();
    if (j.contains("directions")) directions = j["directions"].get<int>();
    if (j.contains("samples")) samples = j["samples"].get<int>();
    if (j.contains("format")) format = j["format"].get<std::string>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tau")) tau = j["tau"].get<double>();
    if (j.contains("output_dir")) output_dir = j["output_dir"].get<std::string>();
    if (j.contains("custom")) {
      const auto& cj = j["custom"];
      custom = spectrum::CustomTable{cj.at("radii").get<std::vector<double>>(),
                                     cj.at("values").get<std::vector<double>>(),
                                     cj.value("tail_exponent", 2.0)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("config file: ") + e.what());
  }
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> v;
  const Command cmd = c.command;
  if (c.format != "json" && c.format != "csv") v.push_back("format must be json or csv");

  const bool uses_weight =
      cmd == Command::spectrum || cmd == Command::constants || cmd == Command::verify_trace;
  if (uses_weight) {
    if (c.n < 2) v.push_back("n >= 2 required");
    if (c.weight == "homogeneous") {
      if (!(c.s > 0.5)) v.push_back("s > 1/2 required");
      if (!(c.s < 0.5 * c.n)) v.push_back("s < n/2 required");
    } else if (c.weight == "inhomogeneous") {
      if (!(c.s > 0.5)) v.push_back("s > 1/2 required");
    } else if (c.weight == "custom") {
      if (!c.custom) {
        v.push_back("custom weight needs a table (radii, values) in the config file");
      } else {
        const auto& t = *c.custom;
        if (t.radii.size() < 4 || t.radii.size() != t.values.size()) {
          v.push_back("custom table needs matching radii and values, at least 4 nodes");
        }
        for (std::size_t i = 0; i < t.values.size(); ++i) {
          if (!(t.values[i] > 0.0)) {
            v.push_back("custom table values must be strictly positive");
            break;
          }
        }
        for (std::size_t i = 1; i < t.radii.size(); ++i) {
          if (!(t.radii[i] > t.radii[i - 1])) {
            v.push_back("custom table radii must be increasing");
            break;
          }
        }
        if (!t.radii.empty() && !(t.radii.front() > 0.0)) v.push_back("custom table radii must be positive");
        if (!(t.tail_exponent > 1.0)) v.push_back("custom tail exponent > 1 required");
      }
    } else {
      v.push_back("weight must be homogeneous, inhomogeneous or custom");
    }
    if (c.K < 1) v.push_back("K >= 1 required");
    if (!(c.tol > 0.0)) v.push_back("tol > 0 required");
  }
  if (c.tau) {
    if (cmd != Command::spectrum) v.push_back("tau applies to the spectrum command only");
    if (!(*c.tau > 1.0)) v.push_back("tau > 1 required");
  }
  if (randomized(cmd)) {
    if (!c.seed) v.push_back("seed required for randomized commands");
    if (c.trials < 1) v.push_back("trials >= 1 required");
  }
  if (cmd == Command::counterexample) {
    if (!(c.r > 1.0) || std::isinf(c.r)) v.push_back("1 < r < infinity required");
    if (!(c.sigma > 0.0)) v.push_back("sigma > 0 required");
    if (c.deltas.empty()) v.push_back("deltas must be nonempty");
    for (double d : c.deltas) {
      if (!(d > 0.0 && d < 0.5)) {
        v.push_back("deltas must lie in (0, 1/2)");
        break;
      }
    }
  }
  if (cmd == Command::duality_sweep) {
    if (!(c.p > 1.0 && c.p <= 2.0)) v.push_back("p in (1, 2] required");
    if (!(c.q > 1.0) || std::isinf(c.q)) v.push_back("1 < q < infinity required");
    if (c.rows < 1 || c.cols < 1) v.push_back("rows, cols >= 1 required");
    if (c.starts < 1) v.push_back("starts >= 1 required");
    if (c.operators < 1) v.push_back("operators >= 1 required");
  }
  if (cmd == Command::transport_probe) {
    if (c.n != 1) v.push_back("transport-probe supports n = 1");
    if (!(c.L >= 10.0)) v.push_back("L >= 10 required");
    if (!(c.h > 0.0 && c.h <= c.L / 64.0)) v.push_back("0 < h <= L/64 required");
    if (!(c.t_extent > 0.0)) v.push_back("t_extent > 0 required");
    if (c.eps.empty()) v.push_back("eps must be nonempty");
    for (double e : c.eps) {
      if (!(e > 0.0 && e <= 0.25)) {
        v.push_back("eps must lie in (0, 0.25]");
        break;
      }
    }
    if (c.directions < 1) v.push_back("directions >= 1 required");
    if (c.samples < 1) v.push_back("samples >= 1 required");
  }
  return v;
}

const std::vector<std::string>& anchor_catalog() {
  static const std::vector<std::string> anchors{
      "lambda/closed-form-twin",        "spectrum/strict-decrease",
      "spectrum/below-lambda0",         "spectrum/truncation-certificate",
      "watson/identity",                "constant/sharp",
      "constant/stability",             "constant/closed-form",
      "stability/master-inequality",    "stability/cauchy-schwarz",
      "stability/reverse-inequality",   "stability/equality-case",
      "stability/extremising-sequence", "stability/scale-invariance",
      "duality/extremiser-transfer",    "duality/brute-force-norm",
      "duality/cfl3",                   "duality/cfl1",
      "duality/aldaz-empirical",        "duality/local-stability-chain",
      "counterexample/identity-2delta", "counterexample/ratio-decay",
      "transport/gaussian-average",     "transport/mass-conservation",
      "transport/adjoint-pairing",      "transport/self-duality",
      "transport/sharp-ratio-bound",    "transport/quadratic-deficit",
      "transport/dual-probe"};
  return anchors;
}

RunResult run(const RunConfig& config, std::ostream& out) {
  RunResult result;
  const auto violations = validate(config);
  if (!violations.empty()) {
    for (const auto& v : violations) out << "config error: " << v << '\n';
    result.exit_code = 2;
    return result;
  }
  Checks ck(out);
  Writer w(config);
  try {
    switch (config.command) {
      case Command::spectrum: cmd_spectrum(config, ck, w); break;
      case Command::constants: cmd_constants(config, ck, w); break;
      case Command::verify_trace: cmd_verify_trace(config, ck, w); break;
      case Command::duality_sweep: cmd_duality_sweep(config, ck, w); break;
      case Command::counterexample: cmd_counterexample(config, ck, w); break;
      case Command::transport_probe: cmd_transport_probe(config, ck, w); break;
    }
  } catch (const std::exception& e) {
    out << "error: " << command_name(config.command) << ": " << e.what() << '\n';
    result.checks = ck.lines();
    result.exit_code = 1;
    return result;
  }
  result.checks = ck.lines();
  bool all = true;
  for (const auto& l : result.checks) all = all && l.pass;

  nlohmann::json rep{{"command", command_name(config.command)},
                     {"config", config.to_json()},
                     {"pass", all}};
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& l : result.checks) {
    checks.push_back({{"anchor", l.anchor},
                      {"description", l.description},
                      {"value", l.value},
                      {"tolerance", l.tolerance},
                      {"pass", l.pass}});
  }
  rep["checks"] = checks;
  if (config.format == "json") {
    w.write("report.json", rep.dump(2) + "\n");
  } else {
    std::string csv = "anchor,value,tolerance,pass,description\n";
    for (const auto& l : result.checks) {
      csv += l.anchor + "," + full(l.value) + "," + full(l.tolerance) + "," +
             (l.pass ? "true" : "false") + ",\"" + l.description + "\"\n";
    }
    w.write("report.csv", csv);
  }
  result.files = w.files();
  result.exit_code = all ? 0 : 1;
  return result;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sharp trace-inequality stability toolkit", "tracestab"};
  app.set_help_flag("--help", "Print help and exit");
  app.require_subcommand(1);

  std::string config_path, output_dir, format, weight, deltas, eps;
  int n = 0, K = 0, trials = 0, rows = 0, cols = 0, starts = 0, operators = 0, directions = 0,
      samples = 0;
  double s = 0, tol = 0, tau = 0, r = 0, sigma = 0, p = 0, q = 0, L = 0, h = 0, t_extent = 0;
  std::uint64_t seed = 0;

  struct Opt {
    CLI::Option* opt;
    std::function<void(RunConfig&)> apply;
  };
  std::vector<Opt> opts;
  std::vector<std::pair<CLI::App*, Command>> subs;

  for (Command c : {Command::spectrum, Command::constants, Command::verify_trace,
                    Command::duality_sweep, Command::counterexample, Command::transport_probe}) {
    CLI::App* sub = app.add_subcommand(command_name(c), summary(c));
    sub->set_help_flag("--help", "Print help and exit");
    subs.push_back({sub, c});
    auto add = [&](const std::string& name, auto& target, const std::string& help,
                   std::function<void(RunConfig&)> apply) {
      opts.push_back({sub->add_option(name, target, help), std::move(apply)});
    };
    add("--config", config_path, "JSON file mirroring the flags", [](RunConfig&) {});
    add("--output-dir", output_dir, "report directory", [&](RunConfig& rc) { rc.output_dir = output_dir; });
    add("--format", format, "json or csv", [&](RunConfig& rc) { rc.format = format; });
    if (c == Command::spectrum || c == Command::constants || c == Command::verify_trace) {
      add("--n", n, "dimension", [&](RunConfig& rc) { rc.n = n; });
      add("--s", s, "weight exponent", [&](RunConfig& rc) { rc.s = s; });
      add("--weight", weight, "homogeneous, inhomogeneous or custom", [&](RunConfig& rc) { rc.weight = weight; });
      add("--K", K, "spectrum truncation", [&](RunConfig& rc) { rc.K = K; });
      add("--tol", tol, "quadrature tolerance", [&](RunConfig& rc) { rc.tol = tol; });
    }
    if (c == Command::spectrum) add("--tau", tau, "Watson exponent", [&](RunConfig& rc) { rc.tau = tau; });
    if (randomized(c)) {
      add("--seed", seed, "random seed", [&](RunConfig& rc) { rc.seed = seed; });
      if (c != Command::transport_probe) {
        add("--trials", trials, "random draws", [&](RunConfig& rc) { rc.trials = trials; });
      }
    }
    if (c == Command::counterexample) {
      add("--r", r, "exponent r", [&](RunConfig& rc) { rc.r = r; });
      add("--sigma", sigma, "power sigma", [&](RunConfig& rc) { rc.sigma = sigma; });
      add("--deltas", deltas, "comma-separated deltas", [&](RunConfig& rc) { rc.deltas = parse_list(deltas); });
    }
    if (c == Command::duality_sweep) {
      add("--p", p, "domain exponent", [&](RunConfig& rc) { rc.p = p; });
      add("--q", q, "target exponent", [&](RunConfig& rc) { rc.q = q; });
      add("--rows", rows, "matrix rows", [&](RunConfig& rc) { rc.rows = rows; });
      add("--cols", cols, "matrix columns", [&](RunConfig& rc) { rc.cols = cols; });
      add("--starts", starts, "multistart count", [&](RunConfig& rc) { rc.starts = starts; });
      add("--operators", operators, "random operators", [&](RunConfig& rc) { rc.operators = operators; });
    }
    if (c == Command::transport_probe) {
      add("--n", n, "dimension (1)", [&](RunConfig& rc) { rc.n = n; });
      add("--L", L, "box half-width", [&](RunConfig& rc) { rc.L = L; });
      add("--h", h, "grid spacing", [&](RunConfig& rc) { rc.h = h; });
      add("--t-extent", t_extent, "time half-width", [&](RunConfig& rc) { rc.t_extent = t_extent; });
      add("--eps", eps, "comma-separated epsilons", [&](RunConfig& rc) { rc.eps = parse_list(eps); });
      add("--directions", directions, "probe directions", [&](RunConfig& rc) { rc.directions = directions; });
      add("--samples", samples, "random functions for the ratio bound", [&](RunConfig& rc) { rc.samples = samples; });
    }
  }

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  RunConfig config;
  for (const auto& [sub, c] : subs) {
    if (sub->parsed()) config.command = c;
  }
  if (config.command == Command::transport_probe) config.n = 1;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw PreconditionError("cannot read config file " + config_path);
      nlohmann::json j;
      try {
        f >> j;
      } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("config file: " + std::string(e.what()));
      }
      const Command chosen = config.command;
      config.merge_json(j);
      if (config.command != chosen) {
        throw PreconditionError("config file command '" + command_name(config.command) +
                                "' differs from the subcommand");
      }
    }
    for (const auto& o : opts) {
      if (o.opt->count() > 0) o.apply(config);
    }
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  const auto violations = validate(config);
  if (!violations.empty()) {
    for (const auto& v : violations) err << "config error: " << v << '\n';
    return 2;
  }
  return run(config, out).exit_code;
}

}  // namespace tracestab::cli
