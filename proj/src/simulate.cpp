#include "supcar/simulate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "supcar/analytics.hpp"
#include "supcar/parallel.hpp"
#include "supcar/regime.hpp"

namespace supcar {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr double kGL[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGW[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwFree>;
using CplxBuf = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuf alloc_real(std::size_t n) { return RealBuf(fftw_alloc_real(n)); }
CplxBuf alloc_cplx(std::size_t n) { return CplxBuf(fftw_alloc_complex(n)); }

}  // namespace

void SimulationConfig::validate() const {
  if (d != 1 && d != 2) throw std::invalid_argument("simulation supports d = 1 or 2");
  if (!is_pow2(n) || n < 2) throw std::invalid_argument("grid n must be a power of two");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing h must be positive");
  if (lambda_bins < 1) throw std::invalid_argument("lambda_bins must be >= 1");
  if (!(q >= 30.0)) throw std::invalid_argument("kernel truncation q must be >= 30");
  if (pad < 2) throw std::invalid_argument("pad factor must be >= 2");
  if (bin_scheme == BinScheme::log && !(log_ratio > 1.0)) throw std::invalid_argument("log_ratio must exceed 1");
  if (!(max_jumps >= 1.0)) throw std::invalid_argument("max_jumps must be >= 1");
}

int SimulationConfig::radius_cells(double lambda) const {
  return static_cast<int>(std::ceil(q / (lambda * h) * (1.0 - 1e-12)));
}

double SimulationConfig::default_lambda_min() const { return q / (h * 0.5 * (pad - 1) * n); }

double SimulationConfig::resolved_lambda_min() const { return lambda_min > 0.0 ? lambda_min : default_lambda_min(); }

std::string SimulationConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17) << "d=" << d << ";n=" << n << ";h=" << h << ";bins=" << lambda_bins
     << ";lambda_min=" << resolved_lambda_min() << ";q=" << q << ";pad=" << pad
     << ";scheme=" << (bin_scheme == BinScheme::log ? "log" : "quantile") << ";ratio=" << log_ratio
     << ";top=" << lambda_top << ";max_jumps=" << max_jumps;
  return os.str();
}

void FieldGrid::validate() const {
  const std::size_t expect = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  if (values.size() != expect) throw std::runtime_error("grid value count does not match n^d");
  for (double v : values)
    if (!std::isfinite(v)) throw std::runtime_error("grid contains non-finite values");
}

std::string quadruple_canonical(const CharacteristicQuadruple& q) {
  std::ostringstream os;
  const auto& w = q.levy;
  const auto& m = q.mixing;
  os << std::setprecision(17) << "b=" << q.b << ";d=" << q.d << ";levy=" << w.name();
  switch (w.family) {
    case LevyFamily::gamma_subordinator:
      os << "(" << w.shape << "," << w.rate << ")";
      break;
    case LevyFamily::inverse_gaussian:
      os << "(" << w.ig_alpha << "," << w.ig_mu << ")";
      break;
    case LevyFamily::tempered_stable:
      os << "(" << w.beta << "," << w.theta << "," << w.c_plus << "," << w.c_minus << ")";
      break;
    case LevyFamily::none:
      break;
  }
  os << ";mixing=" << m.name();
  switch (m.family) {
    case MixingFamily::gamma_mix:
      os << "(" << m.H << ")";
      break;
    case MixingFamily::reg_var:
      os << "(" << m.alpha << "," << (m.sv.kind == SlowlyVaryingKind::constant ? "constant" : "log_power") << ","
         << m.sv.C << "," << m.sv.k << "," << m.lambda_max << ")";
      break;
    case MixingFamily::point_mass:
      os << "(" << m.lambda0 << ")";
      break;
  }
  return os.str();
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

double cell_kernel(double lambda, double h, int d, const int* off) {
  const double pre = -0.5 / lambda;
  if (d == 1) {
    const int o = std::abs(off[0]);
    const double x = 0.5 * lambda * h;
    if (o == 0) return pre * (-std::expm1(-x)) / x;
    return pre * std::exp(-lambda * o * h) * (x < 1e-8 ? 1.0 : std::sinh(x) / x);
  }
  int s = std::max(1, static_cast<int>(std::ceil(2.0 * lambda * h)));
  if (std::abs(off[0]) <= 1 && std::abs(off[1]) <= 1) s *= 8;
  const double sub = h / s;
  double acc = 0.0;
  for (int a = 0; a < s; ++a) {
    const double xa = (off[0] - 0.5) * h + (a + 0.5) * sub;
    for (int b = 0; b < s; ++b) {
      const double yb = (off[1] - 0.5) * h + (b + 0.5) * sub;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double x = xa + 0.5 * sub * kGL[i], y = yb + 0.5 * sub * kGL[j];
          acc += kGW[i] * kGW[j] * std::exp(-lambda * std::hypot(x, y));
        }
    }
  }
  return pre * acc / (4.0 * s * s);
}

struct SupcarSimulator::Impl {
  int M = 0;             // FFT extent per axis
  int kmax = 0;          // largest kernel radius in cells
  std::size_t nreal = 0, ncplx = 0;
  fftw_plan fwd = nullptr, inv = nullptr;
  std::vector<CplxBuf> kernel_hat;
  std::vector<IncrementPlan> plans;
  std::vector<double> areas;
  std::vector<int> radius;

  ~Impl() {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
  }
};

SupcarSimulator::SupcarSimulator(const CharacteristicQuadruple& q, const SimulationConfig& cfg)
    : q_(q), cfg_(cfg), impl_(std::make_unique<Impl>()) {
  q_.validate();
  cfg_.validate();
  if (q_.d != cfg_.d) throw std::invalid_argument("quadruple and simulation config disagree on d");
  const int d = cfg_.d;
  const double lmin = cfg_.resolved_lambda_min();
  const auto& m = q_.mixing;

  BinSet bs;
  if (m.family == MixingFamily::point_mass) {
    if (m.lambda0 < lmin) throw std::invalid_argument("rate lies below lambda_min");
    bs.bins.push_back({m.lambda0, 1.0, m.lambda0, m.lambda0});
  } else if (cfg_.bin_scheme == BinScheme::quantile) {
    bs = quantile_bins(m, cfg_.lambda_bins, lmin, BinRepresentative::moment_matched, d + 2.0);
  } else {
    const double top = cfg_.lambda_top > 0.0 ? cfg_.lambda_top : mixing_quantile(m, 0.999);
    bs = log_bins(m, lmin, top, cfg_.log_ratio, BinRepresentative::moment_matched, d + 2.0);
  }
  for (const auto& b : bs.bins) bins_.push_back({b.lambda, b.weight});
  if (bins_.empty()) throw std::invalid_argument("no mixing mass above lambda_min");

  Impl& im = *impl_;
  im.M = cfg_.pad * cfg_.n;
  im.kmax = cfg_.radius_cells(m.family == MixingFamily::point_mass ? m.lambda0 : lmin);
  if (cfg_.n + 2 * im.kmax > im.M)
    throw std::invalid_argument("kernel truncation radius exceeds the padded extent; raise pad or lambda_min");

  const std::size_t M = im.M;
  im.nreal = d == 1 ? M : M * M;
  im.ncplx = d == 1 ? M / 2 + 1 : M * (M / 2 + 1);
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    RealBuf r = alloc_real(im.nreal);
    CplxBuf c = alloc_cplx(im.ncplx);
    if (d == 1) {
      im.fwd = fftw_plan_dft_r2c_1d(im.M, r.get(), c.get(), FFTW_ESTIMATE);
      im.inv = fftw_plan_dft_c2r_1d(im.M, c.get(), r.get(), FFTW_ESTIMATE);
    } else {
      im.fwd = fftw_plan_dft_r2c_2d(im.M, im.M, r.get(), c.get(), FFTW_ESTIMATE);
      im.inv = fftw_plan_dft_c2r_2d(im.M, im.M, c.get(), r.get(), FFTW_ESTIMATE);
    }
  }

  const double cell = std::pow(cfg_.h, d);
  const double norm = 1.0 / static_cast<double>(im.nreal);
  RealBuf kr = alloc_real(im.nreal);
  double var_grid = 0.0, var_cont = 0.0;
  for (const auto& b : bins_) {
    const int K = cfg_.radius_cells(b.lambda);
    const double rmax = cfg_.q / b.lambda;
    std::fill(kr.get(), kr.get() + im.nreal, 0.0);
    if (d == 1) {
      for (int o = -K; o <= K; ++o) {
        if (std::abs(o) * cfg_.h > rmax) continue;
        const double k = cell_kernel(b.lambda, cfg_.h, 1, &o);
        kr[(o + im.M) % im.M] = k * norm;
        var_grid += b.weight * cell * k * k;
      }
    } else {
      for (int o0 = -K; o0 <= K; ++o0)
        for (int o1 = -K; o1 <= K; ++o1) {
          if (std::hypot(o0, o1) * cfg_.h > rmax) continue;
          const int off[2] = {o0, o1};
          const double k = cell_kernel(b.lambda, cfg_.h, 2, off);
          kr[static_cast<std::size_t>((o0 + im.M) % im.M) * M + (o1 + im.M) % im.M] = k * norm;
          var_grid += b.weight * cell * k * k;
        }
    }
    CplxBuf kh = alloc_cplx(im.ncplx);
    fftw_execute_dft_r2c(im.fwd, kr.get(), kh.get());
    im.kernel_hat.push_back(std::move(kh));
    im.radius.push_back(K);
    im.areas.push_back(b.weight * cell);
    im.plans.push_back(make_increment_plan(q_.levy, q_.b, -1.0, b.weight * cell, cfg_.max_jumps));
    var_cont += b.weight * car_covariance(0.0, b.lambda, 1.0, d);
  }

  diag_.lambda_min = lmin;
  diag_.truncated_mass = bs.truncated_mass;
  diag_.kernel_tail = d == 1 ? std::exp(-2.0 * cfg_.q) : (1.0 + 2.0 * cfg_.q) * std::exp(-2.0 * cfg_.q);
  diag_.cell_bias = 1.0 - var_grid / var_cont;
  diag_.bins = static_cast<int>(bins_.size());
  diag_.fft_size = im.M;

  prov_.quadruple_digest = fnv1a_hex(quadruple_canonical(q_));
  prov_.config_digest = fnv1a_hex(cfg_.canonical());
  prov_.seed = cfg_.seed;
}

SupcarSimulator::~SupcarSimulator() = default;

FieldGrid SupcarSimulator::simulate(RngStream& rng) const {
  const Impl& im = *impl_;
  const int d = cfg_.d, n = cfg_.n, M = im.M;
  RealBuf noise = alloc_real(im.nreal);
  CplxBuf zh = alloc_cplx(im.ncplx);
  CplxBuf acc = alloc_cplx(im.ncplx);
  std::memset(acc.get(), 0, sizeof(fftw_complex) * im.ncplx);

  for (std::size_t j = 0; j < bins_.size(); ++j) {
    std::fill(noise.get(), noise.get() + im.nreal, 0.0);
    const int lo = im.kmax - im.radius[j];
    const int hi = im.kmax + n + im.radius[j];
    const IncrementPlan& plan = im.plans[j];
    const double area = im.areas[j];
    if (d == 1) {
      for (int p = lo; p < hi; ++p) noise[p] = draw_increment(plan, area, rng);
    } else {
      for (int p0 = lo; p0 < hi; ++p0)
        for (int p1 = lo; p1 < hi; ++p1)
          noise[static_cast<std::size_t>(p0) * M + p1] = draw_increment(plan, area, rng);
    }
    fftw_execute_dft_r2c(im.fwd, noise.get(), zh.get());
    const fftw_complex* kh = im.kernel_hat[j].get();
    for (std::size_t i = 0; i < im.ncplx; ++i) {
      acc[i][0] += kh[i][0] * zh[i][0] - kh[i][1] * zh[i][1];
      acc[i][1] += kh[i][0] * zh[i][1] + kh[i][1] * zh[i][0];
    }
  }
  fftw_execute_dft_c2r(im.inv, acc.get(), noise.get());

  FieldGrid g;
  g.d = d;
  g.n = n;
  g.h = cfg_.h;
  g.origin = -0.5 * (n - 1) * cfg_.h;
  g.provenance = prov_;
  g.values.resize(d == 1 ? n : static_cast<std::size_t>(n) * n);
  if (d == 1) {
    for (int i = 0; i < n; ++i) g.values[i] = noise[im.kmax + i];
  } else {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        g.values[static_cast<std::size_t>(i) * n + k] = noise[static_cast<std::size_t>(im.kmax + i) * M + im.kmax + k];
  }
  return g;
}

FieldGrid SupcarSimulator::simulate_replicate(std::uint64_t replicate) const {
  RngStream rng(cfg_.seed, replicate);
  FieldGrid g = simulate(rng);
  g.provenance.replicate = replicate;
  return g;
}

std::vector<FieldGrid> SupcarSimulator::ensemble(int replicates, int threads) const {
  std::vector<FieldGrid> out(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) { out[r] = simulate_replicate(r); });
  return out;
}

double SupcarSimulator::binned_covariance(double lag) const {
  const double var = q_.base_variance();
  double s = 0.0;
  for (const auto& b : bins_) s += b.weight * car_covariance(lag, b.lambda, var, cfg_.d);
  return s;
}

FieldGrid simulate_car(double lambda, const LevyMeasureSpec& w, double b, const SimulationConfig& cfg,
                       RngStream& rng) {
  if (cfg.lambda_min > 0.0 && lambda < cfg.lambda_min) throw std::invalid_argument("rate lies below lambda_min");
  CharacteristicQuadruple q;
  q.b = b;
  q.levy = w;
  q.mixing = MixingMeasureSpec::point_mass(lambda);
  q.d = cfg.d;
  SimulationConfig c = cfg;
  if (c.lambda_min <= 0.0) c.lambda_min = std::min(lambda, c.default_lambda_min());
  return SupcarSimulator(q, c).simulate(rng);
}

FieldGrid simulate_supcar(const CharacteristicQuadruple& q, const SimulationConfig& cfg, RngStream& rng) {
  const auto ex = check_existence(q);
  if (ex.exists != Verdict::yes) throw std::domain_error("field does not exist for this quadruple");
  return SupcarSimulator(q, cfg).simulate(rng);
}

std::vector<double> lag_products(const FieldGrid& g, const std::vector<double>& lags, double mean) {
  const long n = g.n;
  std::vector<double> out;
  out.reserve(lags.size());
  for (double lag : lags) {
    const long k = std::lround(std::fabs(lag) / g.h);
    if (k >= n) throw std::out_of_range("lag beyond grid extent");
    const double* x = g.values.data();
    double s = 0.0;
    std::size_t c = 0;
    if (g.d == 1) {
      for (long i = 0; i + k < n; ++i) s += (x[i] - mean) * (x[i + k] - mean);
      c = n - k;
    } else {
      for (long i = 0; i < n; ++i)
        for (long j = 0; j + k < n; ++j) {
          s += (x[i * n + j] - mean) * (x[i * n + j + k] - mean);
          s += (x[j * n + i] - mean) * (x[(j + k) * n + i] - mean);
        }
      c = 2 * static_cast<std::size_t>(n) * (n - k);
    }
    out.push_back(s / c);
  }
  return out;
}

std::vector<CovarianceEstimate> ensemble_covariance(const FieldGrid& like, const std::vector<double>& lags,
                                                    const std::vector<std::vector<double>>& per_replicate) {
  if (per_replicate.size() < 2) throw std::invalid_argument("covariance estimate needs at least 2 replicates");
  const double R = static_cast<double>(per_replicate.size());
  std::vector<CovarianceEstimate> out;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    double m = 0.0;
    for (const auto& p : per_replicate) m += p.at(k);
    m /= R;
    double ss = 0.0;
    for (const auto& p : per_replicate) ss += (p[k] - m) * (p[k] - m);
    out.push_back({std::lround(std::fabs(lags[k]) / like.h) * like.h, m, std::sqrt(ss / (R - 1.0) / R)});
  }
  return out;
}

std::vector<CovarianceEstimate> empirical_covariance(const std::vector<FieldGrid>& ensemble,
                                                     const std::vector<double>& lags) {
  if (ensemble.size() < 2) throw std::invalid_argument("empirical_covariance needs at least 2 replicates");
  const FieldGrid& g0 = ensemble.front();
  for (const auto& g : ensemble)
    if (g.d != g0.d || g.n != g0.n || g.h != g0.h) throw std::invalid_argument("ensemble grids differ");
  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& g : ensemble) {
    for (double v : g.values) mean += v;
    count += g.values.size();
  }
  mean /= static_cast<double>(count);
  std::vector<std::vector<double>> per;
  per.reserve(ensemble.size());
  for (const auto& g : ensemble) per.push_back(lag_products(g, lags, mean));
  return ensemble_covariance(g0, lags, per);
}

}  // namespace supcar
