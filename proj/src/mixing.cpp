#include "supcar/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "supcar/specfun.hpp"

namespace supcar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double default_hint(const MixingMeasureSpec& m) {
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return std::log(std::max(m.H, 1e-3));
    case MixingFamily::reg_var:
      return std::log(m.lambda_max) - 1.0;
    case MixingFamily::point_mass:
      return std::log(m.lambda0);
  }
  return 0.0;
}

double upper_support(const MixingMeasureSpec& m) {
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return kInf;
    case MixingFamily::reg_var:
      return m.lambda_max;
    case MixingFamily::point_mass:
      return m.lambda0;
  }
  return kInf;
}

bool closed_form_sv(const MixingMeasureSpec& m) {
  return m.family == MixingFamily::reg_var && m.sv.kind == SlowlyVaryingKind::constant;
}

}  // namespace

double SlowlyVaryingSpec::operator()(double x) const { return std::exp(log_value(x)); }

double SlowlyVaryingSpec::log_value(double x) const {
  if (kind == SlowlyVaryingKind::constant) return std::log(C);
  return std::log(C) + k * std::log1p(std::log1p(x));
}

MixingMeasureSpec MixingMeasureSpec::gamma_mix(double H) {
  MixingMeasureSpec m;
  m.family = MixingFamily::gamma_mix;
  m.H = H;
  m.validate();
  return m;
}

MixingMeasureSpec MixingMeasureSpec::point_mass(double lambda0) {
  MixingMeasureSpec m;
  m.family = MixingFamily::point_mass;
  m.lambda0 = lambda0;
  m.validate();
  return m;
}

MixingMeasureSpec MixingMeasureSpec::reg_var(double alpha, SlowlyVaryingSpec sv, double lambda_max) {
  MixingMeasureSpec m;
  m.family = MixingFamily::reg_var;
  m.alpha = alpha;
  m.sv = sv;
  m.lambda_max = lambda_max;
  m.norm = 1.0;
  m.validate();
  if (sv.kind == SlowlyVaryingKind::constant) {
    m.norm = alpha / (sv.C * std::pow(lambda_max, alpha));
  } else {
    QuadOptions opt;
    opt.epsrel = 1e-13;
    auto g = [&](double u) { return std::exp(alpha * u + sv.log_value(std::exp(-u))); };
    const QuadResult r = integrate_line(g, -kInf, std::log(lambda_max), std::log(lambda_max) - 1.0, opt);
    m.norm = 1.0 / r.value;
  }
  return m;
}

void MixingMeasureSpec::validate() const {
  switch (family) {
    case MixingFamily::gamma_mix:
      if (!(H > 0.0)) throw std::invalid_argument("gamma_mix needs H > 0");
      return;
    case MixingFamily::reg_var:
      if (!(alpha > 0.0)) throw std::invalid_argument("reg_var needs alpha > 0");
      if (!(lambda_max > 0.0)) throw std::invalid_argument("reg_var needs lambda_max > 0");
      if (!(sv.C > 0.0)) throw std::invalid_argument("slowly varying constant C must be positive");
      if (sv.kind == SlowlyVaryingKind::log_power && sv.k < 1)
        throw std::invalid_argument("log_power exponent k must be >= 1");
      return;
    case MixingFamily::point_mass:
      if (!(lambda0 > 0.0)) throw std::invalid_argument("point_mass needs lambda > 0");
      return;
  }
}

std::string MixingMeasureSpec::name() const {
  switch (family) {
    case MixingFamily::gamma_mix:
      return "gamma_mix";
    case MixingFamily::reg_var:
      return "reg_var";
    case MixingFamily::point_mass:
      return "point_mass";
  }
  return "";
}

double MixingMeasureSpec::rv_exponent() const {
  switch (family) {
    case MixingFamily::gamma_mix:
      return H;
    case MixingFamily::reg_var:
      return alpha;
    case MixingFamily::point_mass:
      return kInf;
  }
  return kInf;
}

double MixingMeasureSpec::effective_l(double x) const {
  switch (family) {
    case MixingFamily::gamma_mix:
      return rgamma_fn(H);
    case MixingFamily::reg_var:
      return norm * sv(x);
    case MixingFamily::point_mass:
      return 0.0;
  }
  return 0.0;
}

double mixing_log_density(const MixingMeasureSpec& m, double lambda) {
  if (!(lambda > 0.0)) return -kInf;
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return (m.H - 1.0) * std::log(lambda) - lambda - lgamma_fn(m.H);
    case MixingFamily::reg_var:
      if (lambda > m.lambda_max) return -kInf;
      return std::log(m.norm) + m.sv.log_value(1.0 / lambda) + (m.alpha - 1.0) * std::log(lambda);
    case MixingFamily::point_mass:
      return -kInf;
  }
  return -kInf;
}

double mixing_density(const MixingMeasureSpec& m, double lambda) { return std::exp(mixing_log_density(m, lambda)); }

double mixing_cdf(const MixingMeasureSpec& m, double lambda) {
  if (!(lambda > 0.0)) return 0.0;
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return gamma_p(m.H, lambda);
    case MixingFamily::point_mass:
      return lambda >= m.lambda0 ? 1.0 : 0.0;
    case MixingFamily::reg_var: {
      if (lambda >= m.lambda_max) return 1.0;
      if (closed_form_sv(m)) return std::pow(lambda / m.lambda_max, m.alpha);
      QuadOptions opt;
      opt.epsrel = 1e-12;
      auto g = [&](double u) { return std::exp(u + mixing_log_density(m, std::exp(u))); };
      return std::min(1.0, integrate_line(g, -kInf, std::log(lambda), std::log(lambda) - 1.0, opt).value);
    }
  }
  return 0.0;
}

double mixing_quantile(const MixingMeasureSpec& m, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile needs p in [0,1]");
  switch (m.family) {
    case MixingFamily::gamma_mix:
      if (p == 1.0) return kInf;
      return gamma_p_inv(m.H, p);
    case MixingFamily::point_mass:
      return m.lambda0;
    case MixingFamily::reg_var: {
      if (closed_form_sv(m)) return m.lambda_max * std::pow(p, 1.0 / m.alpha);
      if (p == 1.0) return m.lambda_max;
      if (p == 0.0) return 0.0;
      double lo = -700.0, hi = std::log(m.lambda_max);
      for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mixing_cdf(m, std::exp(mid)) < p)
          lo = mid;
        else
          hi = mid;
      }
      return std::exp(0.5 * (lo + hi));
    }
  }
  return 0.0;
}

double mixing_sample(const MixingMeasureSpec& m, RngStream& rng) {
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return rng.gamma(m.H);
    case MixingFamily::point_mass:
      return m.lambda0;
    case MixingFamily::reg_var:
      return mixing_quantile(m, rng.uniform());
  }
  return 0.0;
}

double mixing_upper_support(const MixingMeasureSpec& m) { return upper_support(m); }

double mixing_mean(const MixingMeasureSpec& m) {
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return m.H;
    case MixingFamily::point_mass:
      return m.lambda0;
    case MixingFamily::reg_var:
      if (closed_form_sv(m)) return m.alpha / (m.alpha + 1.0) * m.lambda_max;
      return mixing_expectation(m, [](double l) { return l; }).value;
  }
  return 0.0;
}

QuadResult mixing_expectation(const MixingMeasureSpec& m, const RealFn& f, double lo, double hi, double hint_u,
                              const QuadOptions& opt) {
  if (m.family == MixingFamily::point_mass) {
    QuadResult r;
    if (m.lambda0 > lo && m.lambda0 <= hi) r.value = f(m.lambda0);
    return r;
  }
  hi = std::min(hi, upper_support(m));
  if (!(hi > lo)) return {};
  const double ulo = lo > 0.0 ? std::log(lo) : -kInf;
  const double uhi = std::isinf(hi) ? kInf : std::log(hi);
  if (std::isnan(hint_u)) hint_u = default_hint(m);
  hint_u = std::clamp(hint_u, ulo, uhi);
  auto g = [&](double u) {
    const double l = std::exp(u);
    const double v = f(l) * std::exp(u + mixing_log_density(m, l));
    return std::isfinite(v) ? v : 0.0;
  };
  if (!std::isinf(ulo) && !std::isinf(uhi)) {
    std::vector<double> pts{ulo};
    const int n = std::max(1, static_cast<int>(std::ceil(uhi - ulo)));
    for (int i = 1; i < n; ++i) pts.push_back(ulo + (uhi - ulo) * i / n);
    pts.push_back(uhi);
    return integrate_points(g, pts, opt);
  }
  return integrate_line(g, ulo, uhi, hint_u, opt);
}

QuadResult mixing_expectation_log(const MixingMeasureSpec& m, const RealFn& log_f, double lo, double hi,
                                  double hint_u, const QuadOptions& opt) {
  if (m.family == MixingFamily::point_mass) {
    QuadResult r;
    if (m.lambda0 > lo && m.lambda0 <= hi) r.value = std::exp(log_f(m.lambda0));
    return r;
  }
  hi = std::min(hi, upper_support(m));
  if (!(hi > lo)) return {};
  const double ulo = lo > 0.0 ? std::log(lo) : -kInf;
  const double uhi = std::isinf(hi) ? kInf : std::log(hi);
  if (std::isnan(hint_u)) hint_u = default_hint(m);
  hint_u = std::clamp(hint_u, ulo, uhi);
  auto g = [&](double u) {
    const double l = std::exp(u);
    const double v = std::exp(u + mixing_log_density(m, l) + log_f(l));
    return std::isfinite(v) ? v : 0.0;
  };
  if (!std::isinf(ulo) && !std::isinf(uhi)) {
    std::vector<double> pts{ulo};
    const int n = std::max(1, static_cast<int>(std::ceil(uhi - ulo)));
    for (int i = 1; i < n; ++i) pts.push_back(ulo + (uhi - ulo) * i / n);
    pts.push_back(uhi);
    return integrate_points(g, pts, opt);
  }
  return integrate_line(g, ulo, uhi, hint_u, opt);
}

double neg_moment(const MixingMeasureSpec& m, double k) {
  if (!(k > 0.0)) throw std::domain_error("neg_moment needs k > 0");
  switch (m.family) {
    case MixingFamily::gamma_mix:
      if (!(m.H > k)) return kInf;
      return std::exp(lgamma_fn(m.H - k) - lgamma_fn(m.H));
    case MixingFamily::point_mass:
      return std::pow(m.lambda0, -k);
    case MixingFamily::reg_var: {
      if (!(m.alpha > k)) return kInf;
      if (closed_form_sv(m)) return m.alpha / (m.alpha - k) * std::pow(m.lambda_max, -k);
      QuadOptions opt;
      opt.epsrel = 1e-12;
      return mixing_expectation_log(m, [k](double l) { return -k * std::log(l); }, 0.0, kInf, NAN, opt).value;
    }
  }
  return kInf;
}

double neg_moment_above(const MixingMeasureSpec& m, double k, double lambda_min) {
  if (!(lambda_min > 0.0)) return neg_moment(m, k);
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return upper_gamma_general(m.H - k, lambda_min).value * rgamma_fn(m.H);
    case MixingFamily::point_mass:
      return m.lambda0 > lambda_min ? std::pow(m.lambda0, -k) : 0.0;
    case MixingFamily::reg_var: {
      if (lambda_min >= m.lambda_max) return 0.0;
      if (closed_form_sv(m)) {
        const double a = m.alpha - k;
        if (a == 0.0) return m.alpha * std::log(m.lambda_max / lambda_min) / std::pow(m.lambda_max, m.alpha);
        return m.alpha / a * (std::pow(m.lambda_max, a) - std::pow(lambda_min, a)) / std::pow(m.lambda_max, m.alpha);
      }
      QuadOptions opt;
      opt.epsrel = 1e-12;
      return mixing_expectation_log(m, [k](double l) { return -k * std::log(l); }, lambda_min, kInf, NAN, opt).value;
    }
  }
  return 0.0;
}

namespace {

LambdaBin make_bin(const MixingMeasureSpec& m, double a, double b, double weight, BinRepresentative rep, double k) {
  LambdaBin bin;
  bin.lo = a;
  bin.hi = b;
  bin.weight = weight;
  QuadOptions opt;
  opt.epsrel = 1e-11;
  const double hint = std::isinf(b) ? std::log(std::max(a, 1e-300)) + 1.0 : 0.5 * (std::log(a) + std::log(b));
  if (rep == BinRepresentative::conditional_mean || k == 0.0) {
    const double s = mixing_expectation(m, [](double l) { return l; }, a, b, hint, opt).value;
    bin.lambda = s / weight;
  } else {
    const double s = mixing_expectation_log(m, [k](double l) { return -k * std::log(l); }, a, b, hint, opt).value;
    bin.lambda = std::pow(s / weight, -1.0 / k);
  }
  if (!(bin.lambda > a)) bin.lambda = std::isinf(b) ? a : 0.5 * (a + b);
  return bin;
}

}  // namespace

BinSet quantile_bins(const MixingMeasureSpec& m, int n_bins, double lambda_min, BinRepresentative rep, double k) {
  if (n_bins < 1) throw std::invalid_argument("quantile_bins needs n_bins >= 1");
  if (!(lambda_min >= 0.0)) throw std::invalid_argument("quantile_bins needs lambda_min >= 0");
  BinSet out;
  if (m.family == MixingFamily::point_mass) {
    if (m.lambda0 > lambda_min) {
      out.bins.push_back({m.lambda0, 1.0, m.lambda0, m.lambda0});
    } else {
      out.truncated_mass = 1.0;
    }
    return out;
  }
  const double F0 = mixing_cdf(m, lambda_min);
  out.truncated_mass = F0;
  if (F0 >= 1.0) throw std::invalid_argument("lambda_min lies above the support of the mixing measure");
  const double top = upper_support(m);
  std::vector<double> edges{lambda_min};
  for (int j = 1; j < n_bins; ++j) edges.push_back(mixing_quantile(m, F0 + (1.0 - F0) * j / n_bins));
  edges.push_back(top);
  for (int j = 0; j < n_bins; ++j) {
    const double w = j + 1 < n_bins ? mixing_cdf(m, edges[j + 1]) - mixing_cdf(m, edges[j])
                                    : 1.0 - mixing_cdf(m, edges[j]);
    out.bins.push_back(make_bin(m, edges[j], edges[j + 1], w, rep, k));
  }
  return out;
}

BinSet log_bins(const MixingMeasureSpec& m, double lambda_min, double lambda_top, double ratio, BinRepresentative rep,
                double k) {
  if (!(ratio > 1.0)) throw std::invalid_argument("log_bins needs ratio > 1");
  if (!(lambda_min > 0.0)) throw std::invalid_argument("log_bins needs lambda_min > 0");
  BinSet out;
  if (m.family == MixingFamily::point_mass) return quantile_bins(m, 1, lambda_min, rep, k);
  out.truncated_mass = mixing_cdf(m, lambda_min);
  const double top = std::min(lambda_top, upper_support(m));
  std::vector<double> edges{lambda_min};
  while (edges.back() * ratio < top * (1.0 - 1e-12)) edges.push_back(edges.back() * ratio);
  edges.push_back(upper_support(m));
  double prev = mixing_cdf(m, edges[0]);
  for (size_t j = 0; j + 1 < edges.size(); ++j) {
    const double cur = std::isinf(edges[j + 1]) ? 1.0 : mixing_cdf(m, edges[j + 1]);
    const double w = cur - prev;
    prev = cur;
    if (!(w > 0.0)) continue;
    out.bins.push_back(make_bin(m, edges[j], edges[j + 1], w, rep, k));
  }
  return out;
}

DeBruijnResult debruijn_conjugate_at(const SlowlyVaryingSpec& sv, double scale, int d, double alpha, double T) {
  if (!(T > 1.0)) throw std::domain_error("de Bruijn conjugate needs T > 1");
  auto log_g = [&](double log_x) {
    const double y = std::exp(log_x * d / alpha);
    return -(std::log(scale) + sv.log_value(y)) / d;
  };
  DeBruijnResult r;
  const double logT = std::log(T);
  double lx = logT;
  for (int it = 1; it <= 200; ++it) {
    const double next = logT - log_g(lx);
    r.iterations = it;
    if (std::fabs(next - lx) <= 1e-12 * std::max(1.0, std::fabs(next))) {
      lx = next;
      r.converged = true;
      break;
    }
    lx = next;
  }
  r.x_star = std::exp(lx);
  r.value = std::exp(-log_g(lx));
  if (!r.converged) throw std::runtime_error("de Bruijn fixed point did not converge");
  return r;
}

}  // namespace supcar
