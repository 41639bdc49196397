#include "supcar/limitlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "supcar/parallel.hpp"
#include "supcar/quad.hpp"

namespace supcar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double var_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1.0);
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * (s.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  return s[i] + (pos - i) * (s[i + 1] - s[i]);
}

double median_of(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, 0.5);
}

std::vector<double> resample(const std::vector<double>& x, RngStream& rng) {
  std::vector<double> out(x.size());
  for (auto& v : out) v = x[static_cast<std::size_t>(rng.uniform() * x.size())];
  return out;
}

std::pair<double, double> percentile_ci(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {quantile_sorted(v, 0.025), quantile_sorted(v, 0.975)};
}

ScalingFit bootstrap_fit(const std::vector<double>& T, const std::vector<std::vector<double>>& samples, int boot,
                         std::uint64_t seed, double (*stat)(const std::vector<double>&)) {
  if (T.size() != samples.size()) throw std::invalid_argument("ladder and sample sets differ in length");
  std::vector<double> y;
  for (const auto& s : samples) y.push_back(stat(s));
  ScalingFit f = power_law_fit(T, y);
  if (boot < 2) return f;
  RngStream rng(seed, 0);
  std::vector<double> slopes;
  for (int b = 0; b < boot; ++b) {
    std::vector<double> yb;
    for (const auto& s : samples) yb.push_back(stat(resample(s, rng)));
    slopes.push_back(power_law_fit(T, yb).slope);
  }
  const double m = mean_of(slopes);
  double ss = 0.0;
  for (double v : slopes) ss += (v - m) * (v - m);
  f.se = std::sqrt(ss / (boot - 1.0));
  std::tie(f.ci_lo, f.ci_hi) = percentile_ci(slopes);
  return f;
}

double iqr_stat(const std::vector<double>& x) { return quantile_spread(x); }

// |empirical characteristic function| on a fixed grid
std::vector<double> ecf_modulus(const std::vector<double>& y, const std::vector<double>& s) {
  std::vector<double> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    double c = 0.0, si = 0.0;
    for (double v : y) {
      c += std::cos(s[k] * v);
      si += std::sin(s[k] * v);
    }
    out[k] = std::hypot(c, si) / y.size();
  }
  return out;
}

// Slope of ln(-ln|phi|) on ln s over the first run where |phi| lies in [0.1, 0.9].
bool ecf_slope(const std::vector<double>& s, const std::vector<double>& phi, double& slope, int& used) {
  std::vector<double> xs, ys;
  bool entered = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (phi[k] > 0.9) {
      if (entered) break;
      continue;
    }
    if (phi[k] < 0.1) break;
    entered = true;
    xs.push_back(std::log(s[k]));
    ys.push_back(std::log(-std::log(phi[k])));
  }
  used = static_cast<int>(xs.size());
  if (xs.size() < 3) return false;
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  slope = sxy / sxx;
  return true;
}

// phi(y) = (y - 1 + e^{-y}) / y^2
double phi2(double y) {
  if (y < 0.05) {
    double term = 0.5, sum = 0.5;
    for (int k = 1; k < 14; ++k) {
      term *= -y / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (y + std::expm1(-y)) / (y * y);
}

// Cell integral of int_{-A}^{A} e^{-lambda |u - s|} du over s in [s1, s2].
double window_kernel_cell(double lambda, double A, double s1, double s2) {
  auto Q = [lambda](double x) { return x * x * phi2(lambda * std::fabs(x)); };
  return Q(A - s1) - Q(-A - s1) - Q(A - s2) + Q(-A - s2);
}

struct Mesh {
  std::vector<double> lo, width;
  std::size_t inner_begin = 0, inner_end = 0;
  double max_width = 0.0;
};

Mesh build_mesh(double A, double h0, int margin, double reach, double cap, double growth) {
  std::vector<double> right_lo, right_w;
  const double edge = A + margin * h0;
  double pos = edge, w = h0;
  while (pos < A + reach) {
    w = std::min(w * growth, std::max(cap, h0));
    right_lo.push_back(pos);
    right_w.push_back(w);
    pos += w;
  }
  Mesh m;
  for (std::size_t i = right_lo.size(); i-- > 0;) {
    m.lo.push_back(-right_lo[i] - right_w[i]);
    m.width.push_back(right_w[i]);
  }
  m.inner_begin = m.lo.size();
  const int nin = static_cast<int>(std::lround(2.0 * edge / h0));
  for (int i = 0; i < nin; ++i) {
    m.lo.push_back(-edge + i * h0);
    m.width.push_back(h0);
  }
  m.inner_end = m.lo.size();
  for (std::size_t i = 0; i < right_lo.size(); ++i) {
    m.lo.push_back(right_lo[i]);
    m.width.push_back(right_w[i]);
  }
  m.max_width = *std::max_element(m.width.begin(), m.width.end());
  return m;
}

struct KernelBin {
  double lambda, weight;
  Mesh mesh;
  IncrementPlan inner, outer;
  std::vector<double> w;  // w[it * cells + c]
};

BinSet limit_bins(const MixingMeasureSpec& m, double lmin, double ratio, int d) {
  if (m.family == MixingFamily::point_mass) return quantile_bins(m, 1, 0.0);
  const double top = mixing_quantile(m, 0.999);
  return log_bins(m, lmin, top, ratio, BinRepresentative::moment_matched, 2.0 * d + 2.0);
}

double window_half_width(const WindowSpec& w) { return w.shape == WindowShape::cube ? 0.5 * w.size : w.size; }

struct RungResult {
  std::vector<double> raw;  // [it * R + r]
  double lambda_min = 0.0, truncated = 0.0;
  int bins = 0;
};

RungResult kernel_rung(const CharacteristicQuadruple& q, const WindowSpec& window, const LimitExperimentSpec& spec,
                       double T, std::uint64_t stream_base) {
  const std::size_t nt = spec.t_grid.size();
  const double a = window_half_width(window);
  const double A = a * T;
  const double h0 = 2.0 * A / spec.cells_per_window;
  RungResult out;
  out.lambda_min = spec.lambda_floor / T;
  const BinSet bs = limit_bins(q.mixing, out.lambda_min, spec.log_ratio, 1);
  out.truncated = bs.truncated_mass;
  out.bins = static_cast<int>(bs.bins.size());

  std::vector<KernelBin> kb;
  for (const auto& b : bs.bins) {
    KernelBin k{b.lambda, b.weight, build_mesh(A, h0, 4, spec.q / b.lambda, 0.5 / b.lambda, spec.growth), {}, {}, {}};
    k.inner = make_increment_plan(q.levy, q.b, -1.0, b.weight * h0, spec.max_jumps);
    k.outer = make_increment_plan(q.levy, q.b, -1.0, b.weight * k.mesh.max_width, spec.max_jumps);
    const std::size_t nc = k.mesh.lo.size();
    k.w.resize(nt * nc);
    for (std::size_t it = 0; it < nt; ++it) {
      const double At = A * spec.t_grid[it];
      for (std::size_t c = 0; c < nc; ++c) {
        const double s1 = k.mesh.lo[c], s2 = s1 + k.mesh.width[c];
        k.w[it * nc + c] = -0.5 / b.lambda * window_kernel_cell(b.lambda, At, s1, s2) / k.mesh.width[c];
      }
    }
    kb.push_back(std::move(k));
  }

  const int R = spec.replicates;
  out.raw.assign(nt * R, 0.0);
  parallel_for(R, spec.threads, [&](std::size_t r) {
    RngStream rng(spec.seed, stream_base + r);
    std::vector<double> acc(nt, 0.0);
    for (const auto& k : kb) {
      const std::size_t nc = k.mesh.lo.size();
      for (std::size_t c = 0; c < nc; ++c) {
        const bool inner = c >= k.mesh.inner_begin && c < k.mesh.inner_end;
        const double zc = draw_increment(inner ? k.inner : k.outer, k.weight * k.mesh.width[c], rng);
        for (std::size_t it = 0; it < nt; ++it) acc[it] += k.w[it * nc + c] * zc;
      }
    }
    for (std::size_t it = 0; it < nt; ++it) out.raw[it * R + r] = acc[it];
  });
  return out;
}

int next_pow2(int x) {
  int n = 1;
  while (n < x) n <<= 1;
  return n;
}

RungResult grid_rung(const CharacteristicQuadruple& q, const WindowSpec& window, const LimitExperimentSpec& spec,
                     double T, std::uint64_t stream_base) {
  const std::size_t nt = spec.t_grid.size();
  const double extent = 2.0 * window_half_width(window) * T;
  SimulationConfig cfg;
  cfg.d = q.d;
  cfg.h = extent / spec.cells_per_window;
  cfg.n = next_pow2(spec.cells_per_window + 2 * spec.grid_margin_cells);
  cfg.pad = spec.grid_pad;
  cfg.q = spec.q;
  cfg.bin_scheme = BinScheme::log;
  cfg.log_ratio = spec.log_ratio;
  cfg.max_jumps = spec.max_jumps;
  cfg.seed = spec.seed;
  const SupcarSimulator sim(q, cfg);
  RungResult out;
  out.lambda_min = sim.diagnostics().lambda_min;
  out.truncated = sim.diagnostics().truncated_mass;
  out.bins = sim.diagnostics().bins;
  const int R = spec.replicates;
  out.raw.assign(nt * R, 0.0);
  parallel_for(R, spec.threads, [&](std::size_t r) {
    RngStream rng(spec.seed, stream_base + r);
    const FieldGrid g = sim.simulate(rng);
    for (std::size_t it = 0; it < nt; ++it)
      out.raw[it * R + r] = integrate_window(g, std::pow(spec.t_grid[it], 1.0 / q.d) * T, window);
  });
  return out;
}

bool gaussian_regime(LimitRegime r) {
  return r == LimitRegime::brownian || r == LimitRegime::generalized_brownian;
}

}  // namespace

double integrate_window(const FieldGrid& grid, double scale, const WindowSpec& window) {
  if (window.d != grid.d) throw std::invalid_argument("window and grid dimensions differ");
  const double reach = window.shape == WindowShape::cube ? 0.5 * window.size * scale : window.size * scale;
  const double half = 0.5 * grid.n * grid.h;
  const double lo = grid.origin - 0.5 * grid.h;
  if (reach > half * (1.0 + 1e-12) || std::fabs(lo + half) > 1e-9 * half)
    throw std::out_of_range("window overflows the grid");
  const int n = grid.n;
  double s = 0.0;
  if (grid.d == 1) {
    for (int i = 0; i < n; ++i) {
      const double x = grid.coord(i);
      if (window.contains(&x, scale)) s += grid.values[i];
    }
    return s * grid.h;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x[2] = {grid.coord(i), grid.coord(j)};
      if (window.contains(x, scale)) s += grid.values[static_cast<std::size_t>(i) * n + j];
    }
  return s * grid.h * grid.h;
}

ScalingFit power_law_fit(const std::vector<double>& T, const std::vector<double>& y) {
  if (T.size() != y.size() || T.size() < 2) throw std::invalid_argument("power_law_fit needs matching inputs");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < T.size(); ++i) {
    if (!(T[i] > 0.0 && y[i] > 0.0)) throw std::domain_error("power_law_fit needs positive data");
    lx.push_back(std::log(T[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean_of(lx), my = mean_of(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (lx.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - f.intercept - f.slope * lx[i];
      rss += e * e;
    }
    f.se = std::sqrt(rss / (lx.size() - 2.0) / sxx);
  }
  f.ci_lo = f.slope - 1.96 * f.se;
  f.ci_hi = f.slope + 1.96 * f.se;
  return f;
}

ScalingFit variance_scaling_fit(const std::vector<double>& T, const std::vector<double>& variances) {
  if (T.size() < 4) throw std::invalid_argument("variance_scaling_fit needs at least 4 ladder points");
  return power_law_fit(T, variances);
}

ScalingFit variance_scaling_fit(const std::vector<double>& T, const std::vector<std::vector<double>>& samples,
                                int boot, std::uint64_t seed) {
  if (T.size() < 4) throw std::invalid_argument("variance_scaling_fit needs at least 4 ladder points");
  return bootstrap_fit(T, samples, boot, seed, var_of);
}

ScalingFit spread_scaling_fit(const std::vector<double>& T, const std::vector<std::vector<double>>& samples, int boot,
                              std::uint64_t seed) {
  if (T.size() < 2) throw std::invalid_argument("spread_scaling_fit needs at least 2 ladder points");
  return bootstrap_fit(T, samples, boot, seed, iqr_stat);
}

double quantile_spread(std::vector<double> x) {
  if (x.size() < 2) throw std::invalid_argument("quantile_spread needs at least 2 samples");
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25);
}

StabilityEstimate stability_index_ecf(const std::vector<double>& samples, int boot, std::uint64_t seed) {
  if (samples.size() < 1000) throw std::invalid_argument("stability_index_ecf needs at least 1000 samples");
  const double med = median_of(samples);
  std::vector<double> dev;
  for (double v : samples) dev.push_back(std::fabs(v - med));
  double scale = median_of(dev);
  if (!(scale > 0.0)) scale = std::sqrt(var_of(samples));
  if (!(scale > 0.0)) throw std::domain_error("degenerate sample: all values equal");
  std::vector<double> y;
  for (double v : samples) y.push_back((v - med) / scale);

  constexpr int K = 80;
  std::vector<double> s(K);
  for (int k = 0; k < K; ++k) s[k] = std::pow(10.0, -2.0 + 4.0 * k / (K - 1));

  StabilityEstimate est;
  if (!ecf_slope(s, ecf_modulus(y, s), est.gamma, est.points))
    throw std::runtime_error("empirical characteristic function has too few points in the reliable band");
  est.ci_lo = est.ci_hi = est.gamma;
  if (boot >= 2) {
    RngStream rng(seed, 1);
    std::vector<double> g;
    for (int b = 0; b < boot; ++b) {
      double gb;
      int used;
      if (ecf_slope(s, ecf_modulus(resample(y, rng), s), gb, used)) g.push_back(gb);
    }
    if (g.size() >= 2) std::tie(est.ci_lo, est.ci_hi) = percentile_ci(g);
  }
  return est;
}

GaussianityResult gaussianity_test(const std::vector<double>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("gaussianity_test needs samples");
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const double m = mean_of(x), sd = std::sqrt(var_of(x));
  const double n = static_cast<double>(x.size());
  GaussianityResult r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = sd > 0.0 ? 0.5 * std::erfc(-(x[i] - m) / (sd * std::sqrt(2.0))) : (x[i] >= m ? 1.0 : 0.0);
    r.ks_distance = std::max({r.ks_distance, (i + 1) / n - F, F - i / n});
  }
  r.threshold = 1.63 / std::sqrt(n);
  r.threshold_estimated = 1.031 / std::sqrt(n);
  r.pass = r.ks_distance < r.threshold;
  return r;
}

void LimitExperimentSpec::validate() const {
  if (t_grid.empty()) throw std::invalid_argument("t grid is empty");
  for (double t : t_grid)
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("t grid must lie in (0, 1]");
  if (std::fabs(*std::max_element(t_grid.begin(), t_grid.end()) - 1.0) > 1e-12)
    throw std::invalid_argument("t grid must contain t = 1");
  if (T_ladder.empty()) throw std::invalid_argument("T ladder is empty");
  for (double T : T_ladder)
    if (!(T > 1.0)) throw std::invalid_argument("T ladder values must exceed 1");
  if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");
  if (cells_per_window < 8) throw std::invalid_argument("cells_per_window must be >= 8");
  if (!(lambda_floor > 0.0)) throw std::invalid_argument("lambda_floor must be positive");
  if (!(log_ratio > 1.0) || !(growth > 1.0)) throw std::invalid_argument("log_ratio and growth must exceed 1");
  if (!(q >= 30.0)) throw std::invalid_argument("kernel truncation q must be >= 30");
}

std::vector<double> LimitExperimentReport::samples_at(std::size_t iT, std::size_t it, bool normalized) const {
  const auto& src = normalized ? z : raw;
  const std::size_t off = (iT * t_grid.size() + it) * replicates;
  return {src.begin() + off, src.begin() + off + replicates};
}

AnalyticValue window_variance(const CharacteristicQuadruple& q, const WindowSpec& window, double T,
                              double lambda_min) {
  if (q.d != 1 || window.d != 1) throw std::invalid_argument("window_variance is implemented for d = 1");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  const double L = 2.0 * window_half_width(window) * T;
  AnalyticValue out;
  bool finite = true;
  auto f = [&](double u) {
    const AnalyticValue r = supcar_covariance(u, q, lambda_min);
    if (!r.finite) finite = false;
    return (L - u) * r.value;
  };
  std::vector<double> pts{0.0};
  for (double x = std::min(0.5, L / 4.0); x < L; x *= 2.0) pts.push_back(x);
  pts.push_back(L);
  QuadOptions opt;
  opt.epsrel = 1e-8;
  const QuadResult r = integrate_points(f, pts, opt);
  out.value = 2.0 * r.value;
  out.abs_error = 2.0 * r.abs_error;
  out.finite = finite && r.converged;
  return out;
}

double limit_normalizer(LimitRegime regime, const CharacteristicQuadruple& q, const ModelConstants& c, double T) {
  const int d = q.d;
  const double a = q.mixing.rv_exponent();
  switch (regime) {
    case LimitRegime::brownian:
      return std::sqrt(c.brownian_rate) * std::pow(T, 0.5 * d);
    case LimitRegime::generalized_brownian:
      return std::sqrt(c.c6 * std::pow(T, 3.0 * d + 2.0 - a) * q.mixing.effective_l(T));
    case LimitRegime::stable_integral: {
      const double b = bg_index(q.levy);
      return std::pow(T, d + 1.0 - (a - d) / b) * std::pow(q.mixing.effective_l(T), 1.0 / b);
    }
    case LimitRegime::stable_levy: {
      const double e = d * (d + 1.0) / a;
      SlowlyVaryingSpec sv;
      double scale = q.mixing.effective_l(1.0);
      if (q.mixing.family == MixingFamily::reg_var) {
        sv = q.mixing.sv;
        scale = q.mixing.norm;
      }
      const double ls = debruijn_conjugate_at(sv, scale, d, a, T).value;
      return std::pow(c.c7, a / (d + 1.0)) * std::pow(T, e) * std::pow(ls, e);
    }
    default:
      throw std::domain_error("no limit theorem covers regime " + to_string(regime));
  }
}

LimitExperimentReport run_limit_experiment(const CharacteristicQuadruple& q, const WindowSpec& window,
                                           const LimitExperimentSpec& spec) {
  spec.validate();
  window.validate();
  if (window.d != q.d) throw std::invalid_argument("window and model dimensions differ");
  const RegimeReport reg = limit_regime(q);
  if (reg.existence.exists != Verdict::yes) throw std::domain_error("field does not exist for this quadruple");
  if (reg.limit == LimitRegime::boundary || reg.limit == LimitRegime::not_covered)
    throw std::domain_error("no limit theorem covers regime " + to_string(reg.limit));

  LimitExperimentReport rep;
  rep.regime = reg.limit;
  rep.d = q.d;
  rep.alpha = reg.alpha;
  rep.beta = q.levy.family == LevyFamily::none ? 0.0 : bg_index(q.levy);
  rep.t_grid = spec.t_grid;
  rep.T_ladder = spec.T_ladder;
  rep.replicates = spec.replicates;
  rep.seed = spec.seed;
  rep.constants = limit_constants(q, window);
  const bool kernel = spec.method == LimitMethod::kernel || (spec.method == LimitMethod::automatic && q.d == 1);
  if (kernel && q.d != 1) throw std::invalid_argument("the window-kernel method is implemented for d = 1");
  rep.method = kernel ? "kernel" : "grid";

  const std::size_t nt = spec.t_grid.size(), nT = spec.T_ladder.size();
  const std::size_t R = spec.replicates;
  rep.raw.resize(nT * nt * R);
  rep.z.resize(rep.raw.size());
  for (std::size_t iT = 0; iT < nT; ++iT) {
    const double T = spec.T_ladder[iT];
    const std::uint64_t base = static_cast<std::uint64_t>(iT) << 32;
    RungResult rr;
    try {
      rr = kernel ? kernel_rung(q, window, spec, T, base) : grid_rung(q, window, spec, T, base);
    } catch (const std::exception& e) {
      throw std::runtime_error("simulation failed at T = " + std::to_string(T) + ": " + e.what());
    }
    const double norm = limit_normalizer(rep.regime, q, rep.constants, T);
    rep.normalizer.push_back(norm);
    rep.lambda_min.push_back(rr.lambda_min);
    rep.truncated_mass.push_back(rr.truncated);
    rep.bins.push_back(rr.bins);
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t idx = (iT * nt + it) * R + r;
        rep.raw[idx] = rr.raw[it * R + r];
        rep.z[idx] = rep.raw[idx] / norm;
      }
  }

  const std::size_t i1 = std::max_element(spec.t_grid.begin(), spec.t_grid.end()) - spec.t_grid.begin();
  std::vector<std::vector<double>> raw1;
  for (std::size_t iT = 0; iT < nT; ++iT) {
    raw1.push_back(rep.samples_at(iT, i1, false));
    rep.var_raw.push_back(var_of(raw1.back()));
    rep.var_z.push_back(var_of(rep.samples_at(iT, i1)));
  }
  const int d = q.d;
  const double a = rep.alpha;
  if (gaussian_regime(rep.regime)) {
    rep.expected_exponent = rep.regime == LimitRegime::brownian ? d : 3.0 * d + 2.0 - a;
    if (nT >= 4) rep.scaling = variance_scaling_fit(spec.T_ladder, raw1, 200, spec.seed);
    const std::size_t top = nT - 1;
    rep.cov_top.assign(nt * nt, 0.0);
    std::vector<std::vector<double>> zt;
    for (std::size_t it = 0; it < nt; ++it) zt.push_back(rep.samples_at(top, it));
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        const double mi = mean_of(zt[i]), mj = mean_of(zt[j]);
        double s = 0.0;
        for (std::size_t r = 0; r < R; ++r) s += (zt[i][r] - mi) * (zt[j][r] - mj);
        rep.cov_top[i * nt + j] = s / (R - 1.0);
      }
    if (rep.regime == LimitRegime::brownian) {
      for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
          const double m = std::min(spec.t_grid[i], spec.t_grid[j]);
          rep.cov_max_rel_dev = std::max(rep.cov_max_rel_dev, std::fabs(rep.cov_top[i * nt + j] - m) / m);
        }
      rep.c5_rate_ratio = rep.constants.brownian_rate / (rep.constants.c5 * rep.constants.base_variance);
    } else if (d == 1) {
      rep.genbm_target = genbm_variance(1.0, a, window).value;
      for (double v : rep.var_z) rep.genbm_ratio.push_back(v / rep.genbm_target);
    } else {
      rep.genbm_target = kNaN;
    }
    rep.gaussianity = gaussianity_test(zt[i1]);
    if (d == 1)
      for (double T : spec.T_ladder) rep.var_exact.push_back(window_variance(q, window, T).value);
  } else {
    rep.target_index = rep.regime == LimitRegime::stable_levy ? a / (d + 1.0) : rep.beta;
    rep.expected_exponent = rep.regime == LimitRegime::stable_levy ? d * (d + 1.0) / a : d + 1.0 - (a - d) / rep.beta;
    for (std::size_t iT = 0; iT < nT; ++iT) {
      rep.spread_raw.push_back(quantile_spread(raw1[iT]));
      if (R >= 1000) rep.stability.push_back(stability_index_ecf(rep.samples_at(iT, i1), 200, spec.seed + iT));
    }
    if (nT >= 2) rep.scaling = spread_scaling_fit(spec.T_ladder, raw1, 200, spec.seed);
  }
  return rep;
}

}  // namespace supcar
