// Acceptance checks, one line per criterion: `acceptance [--criterion N]`.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "supcar/analytics.hpp"
#include "supcar/limitlab.hpp"
#include "supcar/parallel.hpp"
#include "supcar/regime.hpp"
#include "supcar/simulate.hpp"
#include "supcar/specfun.hpp"

using namespace supcar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::fabs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const double step = std::pow(10.0, 1.0 / per_decade);
  for (double x = lo; x <= hi * (1 + 1e-12); x *= step) g.push_back(x);
  return g;
}

CharacteristicQuadruple gaussian_gamma(double H, int d) {
  CharacteristicQuadruple q;
  q.b = 1.0;
  q.mixing = MixingMeasureSpec::gamma_mix(H);
  q.d = d;
  return q;
}

// 1. special-function identities
void criterion1(Outcome& o) {
  double worst_half = 0, worst_rec = 0, worst_comp = 0, worst_gauss = 0;
  for (double x : {1e-4, 0.01, 0.3, 1.0, 1.99, 2.01, 4.0, 10.0, 50.0, 300.0}) {
    const double k12 = std::sqrt(std::numbers::pi / (2 * x)) * std::exp(-x);
    worst_half = std::max(worst_half, rel_err(bessel_k(0.5, x).value, k12));
    worst_half = std::max(worst_half, rel_err(bessel_k(1.5, x).value, k12 * (1 + 1 / x)));
    worst_half = std::max(worst_half, rel_err(bessel_k(2.5, x).value, k12 * (1 + 3 / x + 3 / (x * x))));
  }
  for (double nu : {1.0, 1.25, 2.5, 3.7, 8.0})
    for (double x : {0.02, 0.7, 2.0, 6.0, 40.0}) {
      const double rhs = bessel_k(nu - 1, x).value + 2 * nu / x * bessel_k(nu, x).value;
      worst_rec = std::max(worst_rec, rel_err(bessel_k(nu + 1, x).value, rhs));
    }
  for (double a : {0.2, 1.0, 3.5, 12.0, 30.0})
    for (double x : {1e-3, 0.5, 2.0, 9.0, 45.0}) {
      const double s = incomplete_gamma_upper(a, x).value + incomplete_gamma_lower(a, x).value;
      worst_comp = std::max(worst_comp, rel_err(s, gamma_fn(a).value));
    }
  for (auto [a, b, c] : {std::array{0.3, 0.4, 1.5}, std::array{1.0, 2.0, 4.5}, std::array{-0.7, 1.2, 2.9},
                         std::array{2.5, 0.5, 3.25}}) {
    const double ref = std::tgamma(c) * std::tgamma(c - a - b) / (std::tgamma(c - a) * std::tgamma(c - b));
    worst_gauss = std::max(worst_gauss, rel_err(hyp2f1(a, b, c, 1.0).value, ref));
  }
  o.detail << "half-integer " << worst_half << ", recurrence " << worst_rec << ", complement " << worst_comp
           << ", Gauss value " << worst_gauss;
  o.require(worst_half <= 1e-10, "half-integer closed forms");
  o.require(worst_rec <= 1e-9, "recurrence");
  o.require(worst_comp <= 1e-12, "incomplete gamma complement");
  o.require(worst_gauss <= 1e-9, "Gauss value");
}

// 2. covariance by quadrature against the hypergeometric closed form
void criterion2(Outcome& o) {
  double worst = 0;
  for (auto [H, d] : {std::pair{5.0, 1}, std::pair{6.0, 1}, std::pair{6.0, 2}}) {
    const auto q = gaussian_gamma(H, d);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      const double a = supcar_covariance(t, q).value;
      const double b = supcar_covariance_gamma_closed(t, H, d, -q.base_variance()).value;
      worst = std::max(worst, rel_err(a, b));
    }
  }
  o.detail << "max relative difference " << worst;
  o.require(worst <= 1e-6, "quadrature vs closed form");
}

// 3. covariance tail and spectral-origin exponents
void criterion3(Outcome& o) {
  const auto ts = log_grid(100.0, 1000.0, 8);
  for (auto [H, d] : {std::pair{5.0, 1}, std::pair{7.0, 1}, std::pair{7.0, 2}}) {
    std::vector<double> r;
    for (double t : ts) r.push_back(supcar_covariance(t, gaussian_gamma(H, d)).value);
    const double s = ls_slope(ts, r), want = -(H - d - 2);
    o.detail << "cov H=" << H << " d=" << d << " slope " << s << " (" << want << "); ";
    o.require(std::fabs(s - want) <= 0.05, "covariance tail slope");
  }
  // sub-leading terms are relatively O(w^{2d+2-alpha}), so fit deep inside the origin
  const auto ws = log_grid(1e-6, 1e-5, 8);
  for (auto [alpha, d] : {std::pair{3.2, 1}, std::pair{3.6, 1}, std::pair{5.0, 2}, std::pair{5.6, 2}}) {
    CharacteristicQuadruple q;
    q.b = 1.0;
    q.d = d;
    q.mixing = MixingMeasureSpec::reg_var(alpha, {}, 1.0);
    std::vector<double> f;
    for (double w : ws) f.push_back(supcar_spectral(w, q).value);
    const double s = ls_slope(ws, f), want = -(2 * d + 2 - alpha);
    o.detail << "spec alpha=" << alpha << " d=" << d << " slope " << s << " (" << want << "); ";
    o.require(std::fabs(s - want) <= 0.05, "spectral origin slope");
  }
}

// 4. mixed second difference of the joint cumulant
void criterion4(Outcome& o) {
  CharacteristicQuadruple q;
  q.b = 0.5;
  q.levy = LevyMeasureSpec::inverse_gaussian(1.0, 1.0);
  q.mixing = MixingMeasureSpec::gamma_mix(5.0);
  const double h = 1e-3;
  double worst = 0;
  for (double t : {0.3, 1.0, 2.5}) {
    auto C = [&](double a, double b) { return joint_cumulant(q, {a, b}, {0.0, t}).real(); };
    const double mixed = (C(h, h) - C(h, -h) - C(-h, h) + C(-h, -h)) / (4 * h * h);
    worst = std::max(worst, rel_err(-mixed, supcar_covariance(t, q).value));
  }
  o.detail << "max relative difference " << worst;
  o.require(worst <= 1e-4, "cumulant difference vs covariance");
}

// 5. existence thresholds for inverse Gaussian jumps with Gamma mixing, and the regime diagram
void criterion5(Outcome& o) {
  int agree = 0, total = 0;
  for (int d : {1, 2})
    for (double b : {0.0, 1.0}) {
      const double thr = b > 0 ? d + 2.0 : d + 1.0;
      for (double H : {thr - 0.25, thr + 0.25}) {
        CharacteristicQuadruple q;
        q.b = b;
        q.d = d;
        q.levy = LevyMeasureSpec::inverse_gaussian(1.0, 1.0);
        q.mixing = MixingMeasureSpec::gamma_mix(H);
        const auto ex = check_existence(q);
        const Verdict want = H > thr ? Verdict::yes : Verdict::no;
        ++total;
        if (ex.direct == want && ex.exists == want) ++agree;
      }
    }
  o.detail << "existence " << agree << "/" << total;
  o.require(agree == total, "existence thresholds");

  struct Point {
    bool gaussian;
    double alpha, beta;
    int d;
    LimitRegime want;
  };
  using R = LimitRegime;
  const std::vector<Point> diagram = {
      {true, 4.05, 0, 1, R::brownian},           {true, 3.95, 0, 1, R::generalized_brownian},
      {true, 3.05, 0, 1, R::generalized_brownian}, {true, 2.95, 0, 1, R::not_covered},
      {true, 6.05, 0, 2, R::brownian},           {true, 5.95, 0, 2, R::generalized_brownian},
      {true, 4.05, 0, 2, R::generalized_brownian}, {true, 3.95, 0, 2, R::not_covered},
      {false, 3.5, 1.70, 1, R::stable_levy},     {false, 3.5, 1.80, 1, R::stable_integral},
      {false, 2.5, 1.20, 1, R::stable_levy},     {false, 2.5, 1.30, 1, R::stable_integral},
      {false, 2.5, 1.55, 1, R::not_covered},     {false, 3.9, 1.97, 1, R::stable_integral},
      {false, 3.9, 1.90, 1, R::stable_levy},     {false, 5.0, 1.62, 2, R::stable_levy},
      {false, 5.0, 1.72, 2, R::stable_integral}, {false, 5.0, 2.05, 2, R::not_covered},
      {false, 4.1, 0.5, 1, R::not_covered},      {false, 1.95, 0.5, 1, R::not_covered},
  };
  int hits = 0;
  for (const auto& p : diagram)
    if (classify_limit(p.gaussian, p.alpha, p.beta, p.d) == p.want) ++hits;
  o.detail << ", diagram " << hits << "/" << diagram.size();
  o.require(hits == static_cast<int>(diagram.size()), "regime diagram");
}

void criterion6(Outcome& o) {
  const int R = 200;
  const auto w = LevyMeasureSpec::gamma_subordinator(2.0, 1.0);
  struct Case {
    int d, n;
    double h, h_sup;
    int bins;
  };
  for (const Case c : {Case{1, 1 << 14, 0.05, 0.05, 16}, Case{2, 1 << 9, 0.125, 0.0625, 12}}) {
    SimulationConfig cfg;
    cfg.d = c.d;
    cfg.n = c.n;
    cfg.h = c.h;
    cfg.lambda_bins = c.bins;
    cfg.seed = 6;

    // CAR(1) covariance at lags along the axes
    CharacteristicQuadruple car;
    car.levy = w;
    car.mixing = MixingMeasureSpec::point_mass(1.0);
    car.d = c.d;
    // centered fields, so products are taken about zero
    const std::vector<double> lags{0.0, 0.5, 1.0, 2.0};
    {
      const SupcarSimulator sim(car, cfg);
      std::vector<std::vector<double>> per;
      FieldGrid g;
      for (int r = 0; r < R; ++r) per.push_back(lag_products(g = sim.simulate_replicate(r), lags));
      const auto est = ensemble_covariance(g, lags, per);
      for (std::size_t k = 0; k < lags.size(); ++k) {
        const double ref = car_covariance(est[k].lag, 1.0, car.base_variance(), c.d);
        const double z = (est[k].estimate - ref) / est[k].se;
        o.detail << "CAR d=" << c.d << " lag " << lags[k] << " z=" << z;
        if (k == 0) o.detail << " (cell bias " << sim.diagnostics().cell_bias << ")";
        o.detail << "; ";
        o.require(std::fabs(z) <= 3.0, "CAR covariance d=" + std::to_string(c.d));
      }
    }
    // supCAR variance against the truncated analytic value
    CharacteristicQuadruple sup;
    sup.levy = w;
    sup.mixing = MixingMeasureSpec::gamma_mix(5.0);
    sup.d = c.d;
    cfg.seed = 7;
    cfg.h = c.h_sup;
    const SupcarSimulator sim(sup, cfg);
    const double ref = supcar_covariance(0.0, sup, sim.diagnostics().lambda_min).value;
    std::vector<std::vector<double>> per;
    FieldGrid g;
    for (int r = 0; r < R; ++r) per.push_back(lag_products(g = sim.simulate_replicate(r), {0.0}));
    const auto est = ensemble_covariance(g, {0.0}, per);
    const double z = (est[0].estimate - ref) / est[0].se;
    o.detail << "supCAR d=" << c.d << " variance z=" << z << " (lambda_min " << sim.diagnostics().lambda_min
             << ", cell bias " << sim.diagnostics().cell_bias << "); ";
    o.require(std::fabs(z) <= 3.0, "supCAR variance d=" + std::to_string(c.d));
  }
}

LimitExperimentReport limit_run(int which, int R) {
  CharacteristicQuadruple q;
  if (which == 7 || which == 8) q.b = 1.0;
  if (which == 7)
    q.mixing = MixingMeasureSpec::gamma_mix(6.0);
  else
    q.mixing = MixingMeasureSpec::reg_var(3.5, {}, 1.0);
  if (which == 9) q.levy = LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 1.0);
  if (which == 10) q.levy = LevyMeasureSpec::tempered_stable(1.9, 1.0, 1.0, 1.0);
  LimitExperimentSpec spec;
  spec.replicates = R;
  spec.seed = 1;
  spec.threads = default_threads();
  return run_limit_experiment(q, WindowSpec{}, spec);
}

void criterion7(Outcome& o) {
  const auto r = limit_run(7, 400);
  o.detail << "slope " << r.scaling.slope << " [" << r.scaling.ci_lo << ", " << r.scaling.ci_hi << "], Var z(1) at T="
           << r.T_ladder.back() << " " << r.var_z.back() << ", cov dev " << r.cov_max_rel_dev << ", KS "
           << r.gaussianity.ks_distance << " / " << r.gaussianity.threshold;
  o.require(std::fabs(r.scaling.slope - 1.0) <= 0.1, "variance slope");
  o.require(std::fabs(r.var_z.back() - 1.0) <= 0.1, "normalized variance");
  o.require(r.cov_max_rel_dev <= 0.15, "increment covariance");
  o.require(r.gaussianity.pass, "Gaussianity");
}

void criterion8(Outcome& o) {
  const auto r = limit_run(8, 400);
  const std::size_t n = r.genbm_ratio.size();
  const double stab = r.genbm_ratio[n - 1] / r.genbm_ratio[n - 2] - 1.0;
  o.detail << "slope " << r.scaling.slope << " (1.5), ratios to target";
  for (double x : r.genbm_ratio) o.detail << " " << x;
  o.detail << ", top-two change " << stab;
  o.require(std::fabs(r.scaling.slope - 1.5) <= 0.15, "variance slope");
  o.require(std::fabs(stab) <= 0.10, "ratio stability");
}

void criterion9(Outcome& o) {
  const auto r = limit_run(9, 2000);
  const auto& s = r.stability.back();
  o.detail << "index at T=" << r.T_ladder.back() << " " << s.gamma << " [" << s.ci_lo << ", " << s.ci_hi
           << "] target " << r.target_index;
  o.require(std::fabs(s.gamma - 1.75) <= 0.15, "stability index");
}

void criterion10(Outcome& o) {
  const auto r = limit_run(10, 2000);
  const auto& s = r.stability.back();
  o.detail << "index at T=" << r.T_ladder.back() << " " << s.gamma << " [" << s.ci_lo << ", " << s.ci_hi
           << "] target " << r.target_index << ", spread slope " << r.scaling.slope << " expected "
           << r.expected_exponent;
  o.require(std::fabs(s.gamma - 1.9) <= 0.15, "stability index");
  o.require(std::fabs(r.scaling.slope - r.expected_exponent) <= 0.15, "spread exponent");
}

int sh(const std::string& cmd) {
  const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
  int n = 0, m = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (slurp(e.path()) != slurp(b / e.path().filename())) return false;
    ++n;
  }
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++m;
  return n == m && n > 0;
}

// 11. re-runs from the manifest are bit-identical whatever the thread count
void criterion11(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / ("supcar_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string bin = SUPCAR_LAB_BIN;
  struct Job {
    std::string sub, config;
  };
  const std::vector<Job> jobs = {
      {"simulate-supcar",
       R"({"seed": 11, "quadruple": {"b": 0.5, "levy": {"family": "inverse_gaussian", "alpha": 1, "mu": 1},
          "mixing": {"family": "gamma_mix", "H": 5}}, "simulation": {"n": 4096, "h": 0.05, "replicates": 6}})"},
      {"simulate-supcar",
       R"({"seed": 12, "quadruple": {"d": 2, "b": 0, "levy": {"family": "gamma_subordinator", "shape": 2, "rate": 1},
          "mixing": {"family": "gamma_mix", "H": 8}}, "simulation": {"n": 128, "h": 0.25, "replicates": 3}})"},
      {"simulate-car",
       R"({"seed": 13, "quadruple": {"levy": {"family": "tempered_stable", "beta": 1.2, "theta": 1, "c_plus": 1,
          "c_minus": 1}, "mixing": {"family": "point_mass", "lambda": 1}},
          "simulation": {"n": 2048, "h": 0.1, "replicates": 4, "car_lambda": 1.5}})"},
      {"limit-experiment",
       R"({"seed": 14, "quadruple": {"b": 1, "mixing": {"family": "reg_var", "alpha": 3.5}},
          "experiment": {"T_ladder": [16, 32, 64], "replicates": 100}})"},
      {"limit-experiment",
       R"({"seed": 15, "quadruple": {"levy": {"family": "tempered_stable", "beta": 0.5, "theta": 1, "c_plus": 1,
          "c_minus": 1}, "mixing": {"family": "reg_var", "alpha": 3.5}},
          "experiment": {"T_ladder": [16, 32], "replicates": 60}})"},
      {"covariance", R"({"quadruple": {"b": 1, "mixing": {"family": "gamma_mix", "H": 5}},
          "analytics": {"lags": [0, 0.5, 1, 2]}})"},
  };
  int ok = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const fs::path cfg = dir / ("job" + std::to_string(i) + ".json");
    std::ofstream(cfg) << jobs[i].config;
    const fs::path a = dir / ("a" + std::to_string(i)), b = dir / ("b" + std::to_string(i)),
                   c = dir / ("c" + std::to_string(i));
    const std::string base = bin + " " + jobs[i].sub;
    const bool ran = sh(base + " --threads 1 --config " + cfg.string() + " --out " + a.string()) == 0 &&
                     sh(base + " --threads 4 --config " + (a / "manifest.json").string() + " --out " + b.string()) ==
                         0 &&
                     sh(base + " --threads 3 --config " + cfg.string() + " --out " + c.string()) == 0;
    const bool same = ran && same_tree(a, b) && same_tree(a, c);
    if (same) ++ok;
    o.require(same, jobs[i].sub + " job " + std::to_string(i));
  }
  o.detail << ok << "/" << jobs.size() << " jobs bit-identical across re-runs and thread counts";
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> all = {
      {"special-function identities", criterion1},
      {"covariance quadrature vs closed form", criterion2},
      {"asymptotic exponents", criterion3},
      {"joint-cumulant consistency", criterion4},
      {"existence thresholds and regime diagram", criterion5},
      {"simulator fidelity", criterion6},
      {"short-range Gaussian limit", criterion7},
      {"long-range Gaussian limit", criterion8},
      {"stable Levy limit", criterion9},
      {"stable integral limit", criterion10},
      {"determinism", criterion11},
  };
  bool pass = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      all[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [error: " << e.what() << "]";
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %s: %s (%.1f s) %s\n", i + 1, o.pass ? "PASS" : "FAIL", all[i].first, sec,
                o.detail.str().c_str());
    std::fflush(stdout);
    pass = pass && o.pass;
  }
  return pass ? 0 : 1;
}
