#include "supcar/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "supcar/quad.hpp"
#include "supcar/specfun.hpp"

namespace supcar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / gamma_fn(0.5 * d).value; }

double hint_of(const MixingMeasureSpec& m) {
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

AnalyticValue from_quad(const QuadResult& r, double scale) {
  AnalyticValue v;
  v.value = r.value * scale;
  v.abs_error = r.abs_error * std::fabs(scale);
  v.converged = r.converged;
  v.finite = std::isfinite(v.value);
  return v;
}

AnalyticValue divergent() {
  AnalyticValue v;
  v.value = kInf;
  v.abs_error = kInf;
  v.finite = false;
  return v;
}

// int_0^inf lambda^{alpha-1} (1 + lambda^2)^{-(d+1)} dlambda
double spectral_shape_integral(double alpha, int d) {
  if (!(alpha > 0.0) || !(alpha < 2.0 * d + 2.0)) return kInf;
  return 0.5 * std::exp(lgamma_fn(0.5 * alpha) + lgamma_fn(d + 1.0 - 0.5 * alpha) - lgamma_fn(d + 1.0));
}

// Outer lambda integral of a complex function against pi.
std::complex<double> mix_complex(const MixingMeasureSpec& m, const std::function<std::complex<double>(double)>& f,
                                 double lambda_min) {
  if (m.family == MixingFamily::point_mass) return m.lambda0 > lambda_min ? f(m.lambda0) : 0.0;
  const double top = mixing_upper_support(m);
  const double ulo = lambda_min > 0.0 ? std::log(lambda_min) : -kInf;
  const double uhi = std::isinf(top) ? kInf : std::log(top);
  auto g = [&](double u) -> std::complex<double> {
    const double l = std::exp(u);
    const double w = std::exp(u + mixing_log_density(m, l));
    if (!(w > 0.0)) return 0.0;
    const std::complex<double> v = f(l) * w;
    return std::isfinite(v.real()) && std::isfinite(v.imag()) ? v : 0.0;
  };
  QuadOptions opt;
  opt.epsrel = 1e-11;
  const double hint = std::clamp(hint_of(m), ulo, uhi);
  return integrate_line_complex(g, ulo, uhi, hint, opt).value;
}

}  // namespace

void WindowSpec::validate() const {
  if (d < 1) throw std::invalid_argument("window dimension must be >= 1");
  if (!(size > 0.0)) throw std::invalid_argument("window size must be positive");
  const double reach = shape == WindowShape::cube ? 0.5 * size * std::sqrt(static_cast<double>(d)) : size;
  if (reach > 1.0 + 1e-12) throw std::invalid_argument("window must lie inside the unit ball");
}

double WindowSpec::volume() const {
  if (shape == WindowShape::cube) return std::pow(size, d);
  return std::pow(kPi, 0.5 * d) * std::pow(size, d) / gamma_fn(0.5 * d + 1.0).value;
}

bool WindowSpec::contains(const double* x, double scale) const {
  if (shape == WindowShape::cube) {
    const double half = 0.5 * size * scale;
    for (int i = 0; i < d; ++i)
      if (std::fabs(x[i]) > half) return false;
    return true;
  }
  double r2 = 0.0;
  for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
  return r2 <= size * size * scale * scale;
}

std::string WindowSpec::name() const { return shape == WindowShape::cube ? "cube" : "ball"; }

double const_c1(int d) {
  if (d < 1) throw std::invalid_argument("const_c1 needs d >= 1");
  const double h = 0.5 * d;
  if (d % 2 == 1) return -std::pow(2.0, h - 1.0) * gamma_fn(0.5 * (d + 1)).value / std::sqrt(kPi);
  return -std::pow(2.0, -h) * gamma_fn(d).value / gamma_fn(h).value;
}

double const_c2(int d) {
  const double c1 = const_c1(d);
  return c1 * c1 * std::pow(0.5 * kPi, 0.5 * d) / gamma_fn(d + 1.0).value;
}

double car_covariance(double t, double lambda, double sigma2, int d) {
  if (!(lambda > 0.0)) throw std::invalid_argument("car_covariance needs lambda > 0");
  const double nu = 0.5 * d + 1.0;
  const double lx = log_xnu_bessel_k(nu, lambda * std::fabs(t));
  return const_c2(d) * sigma2 * std::exp(lx - (d + 2.0) * std::log(lambda));
}

double car_spectral(double omega, double lambda, double sigma2, int d) {
  const double c1 = const_c1(d);
  return c1 * c1 * sigma2 * std::pow(omega * omega + lambda * lambda, -(d + 1.0));
}

Moments supcar_moments(const CharacteristicQuadruple& q, double lambda_min) {
  Moments m;
  const double nu = 0.5 * q.d + 1.0;
  const double nm = neg_moment_above(q.mixing, q.d + 2.0, lambda_min);
  m.finite_variance = std::isfinite(nm);
  m.variance = q.base_variance() * const_c2(q.d) * std::pow(2.0, nu - 1.0) * gamma_fn(nu).value * nm;
  return m;
}

AnalyticValue supcar_covariance(double t, const CharacteristicQuadruple& q, double lambda_min) {
  const int d = q.d;
  const double V = q.base_variance();
  if (!(lambda_min > 0.0) && !(q.mixing.rv_exponent() > d + 2.0)) return divergent();
  t = std::fabs(t);
  if (t == 0.0) {
    const Moments m = supcar_moments(q, lambda_min);
    AnalyticValue v;
    v.value = m.variance;
    v.finite = m.finite_variance;
    return v;
  }
  const double nu = 0.5 * d + 1.0;
  auto log_f = [&](double l) { return log_xnu_bessel_k(nu, l * t) - (d + 2.0) * std::log(l); };
  QuadOptions opt;
  opt.epsrel = 1e-11;
  const QuadResult r = mixing_expectation_log(q.mixing, log_f, lambda_min, kInf, NAN, opt);
  return from_quad(r, V * const_c2(d));
}

AnalyticValue supcar_covariance_gamma_closed(double t, double H, int d, double k2) {
  if (!(t > 0.0)) throw std::invalid_argument("closed form needs t > 0");
  if (!(H > d + 2.0)) throw std::invalid_argument("closed form needs H > d + 2");
  const double cc = H - 0.5 * d - 0.5;
  const double pref = -k2 * const_c2(d) * std::sqrt(kPi) * gamma_fn(H - d - 2.0).value /
                      (std::pow(2.0, H - 0.5 * d - 1.0) * gamma_fn(cc).value);
  const SpecFunResult f = hyp2f1(0.5 * (H + 1.0), 0.5 * H, cc, 1.0 - t * t);
  AnalyticValue v;
  v.value = pref * std::pow(t, d + 2.0) * f.value;
  v.abs_error = std::fabs(pref * std::pow(t, d + 2.0)) * f.est_abs_error;
  return v;
}

AnalyticValue supcar_spectral(double omega, const CharacteristicQuadruple& q, double lambda_min) {
  const int d = q.d;
  const double c1 = const_c1(d);
  const double scale = c1 * c1 * q.base_variance();
  omega = std::fabs(omega);
  if (omega == 0.0) {
    const double nm = neg_moment_above(q.mixing, 2.0 * d + 2.0, lambda_min);
    if (!std::isfinite(nm)) return divergent();
    AnalyticValue v;
    v.value = scale * nm;
    return v;
  }
  auto log_f = [&](double l) { return -(d + 1.0) * std::log(omega * omega + l * l); };
  QuadOptions opt;
  opt.epsrel = 1e-11;
  const QuadResult r = mixing_expectation_log(q.mixing, log_f, lambda_min, kInf, std::log(omega), opt);
  return from_quad(r, scale);
}

std::complex<double> marginal_cumulant(const CharacteristicQuadruple& q, double s) {
  if (s == 0.0) return 0.0;
  const int d = q.d;
  const double sd = sphere_area(d);
  auto inner = [&](double l) -> std::complex<double> {
    const double v0 = std::max(0.0, std::log(std::fabs(s) / (2.0 * l)));
    const double vmax = v0 + 40.0;
    std::vector<double> pts{0.0};
    if (v0 > 0.0) pts.push_back(v0);
    for (double v = v0 + 4.0; v < vmax; v += 4.0) pts.push_back(v);
    pts.push_back(vmax);
    auto f = [&](double v) -> std::complex<double> {
      return std::pow(v, d - 1) * cumulant(q, -s * std::exp(-v) / (2.0 * l));
    };
    QuadOptions opt;
    opt.epsrel = 1e-12;
    return sd * std::pow(l, -d) * integrate_points_complex(f, pts, opt).value;
  };
  return mix_complex(q.mixing, inner, 0.0);
}

std::complex<double> joint_cumulant(const CharacteristicQuadruple& q, const std::vector<double>& s,
                                    const std::vector<double>& t) {
  if (q.d != 1) throw std::invalid_argument("joint_cumulant is implemented for d = 1");
  if (s.size() != t.size() || s.empty()) throw std::invalid_argument("joint_cumulant needs matching s and t");
  double sabs = 0.0;
  for (double v : s) sabs += std::fabs(v);
  if (sabs == 0.0) return 0.0;
  std::vector<double> ts = t;
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  auto inner = [&](double l) -> std::complex<double> {
    const double reach = (std::max(0.0, std::log(sabs / (2.0 * l))) + 40.0) / l;
    const double step = 4.0 / l;
    std::vector<double> pts;
    for (double u = ts.front() - reach; u < ts.front(); u += step) pts.push_back(u);
    for (double u : ts) pts.push_back(u);
    for (double u = ts.back() + step; u < ts.back() + reach; u += step) pts.push_back(u);
    pts.push_back(ts.back() + reach);
    auto f = [&](double u) -> std::complex<double> {
      double arg = 0.0;
      for (size_t j = 0; j < s.size(); ++j) arg += s[j] * std::exp(-l * std::fabs(t[j] - u));
      return cumulant(q, -arg / (2.0 * l));
    };
    QuadOptions opt;
    opt.epsrel = 1e-12;
    return integrate_points_complex(f, pts, opt).value;
  };
  return mix_complex(q.mixing, inner, 0.0);
}

AsymptoticConstants asymptotic_constants(const CharacteristicQuadruple& q) {
  AsymptoticConstants out;
  const int d = q.d;
  const double alpha = q.mixing.rv_exponent();
  const double V = q.base_variance();
  const double nu = 0.5 * d + 1.0;
  const double mu = alpha - 0.5 * d - 1.0;
  if (std::isfinite(alpha) && alpha > d + 2.0) {
    auto g = [&](double u) {
      return std::exp(mu * u + log_xnu_bessel_k(nu, std::exp(u)) - nu * u);
    };
    QuadOptions opt;
    opt.epsrel = 1e-11;
    out.c3 = from_quad(integrate_line(g, -kInf, kInf, 0.0, opt), V * const_c2(d));
    out.c3_closed = V * const_c2(d) * std::pow(2.0, mu - 2.0) *
                    std::exp(lgamma_fn(0.5 * (mu - nu)) + lgamma_fn(0.5 * (mu + nu)));
  } else {
    out.c3 = divergent();
    out.c3_closed = kInf;
  }
  if (std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0 * d + 2.0) {
    auto g = [&](double u) { return std::exp(alpha * u - (d + 1.0) * std::log1p(std::exp(2.0 * u))); };
    QuadOptions opt;
    opt.epsrel = 1e-11;
    const double c1 = const_c1(d);
    out.c4 = from_quad(integrate_line(g, -kInf, kInf, 0.0, opt), V * c1 * c1);
  } else {
    out.c4 = divergent();
  }
  return out;
}

ModelConstants limit_constants(const CharacteristicQuadruple& q, const WindowSpec& window) {
  window.validate();
  if (window.d != q.d) throw std::invalid_argument("window and model dimensions differ");
  ModelConstants c;
  const int d = q.d;
  c.d = d;
  c.window_volume = window.volume();
  c.base_variance = q.base_variance();
  c.alpha = q.mixing.rv_exponent();
  c.c1 = const_c1(d);
  c.c2 = const_c2(d);
  const AsymptoticConstants ac = asymptotic_constants(q);
  c.c3 = ac.c3.value;
  c.c4 = ac.c4.value;
  const double g = std::pow(kPi, 0.5 * d) * gamma_fn(d).value / gamma_fn(0.5 * d).value;
  const double nm = neg_moment(q.mixing, 2.0 * d + 2.0);
  c.c5 = 2.0 * c.window_volume * g * g * nm;
  c.brownian_rate = 0.5 * c.c5 * c.base_variance;
  const double a = c.alpha;
  if (!std::isfinite(a)) {
    c.c6 = c.c7 = c.c_plus = c.c_minus = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.c6 = q.b > 0.0 ? c.c1 * c.c1 * q.b * spectral_shape_integral(a, d) : 0.0;
  const double e = (d + 1.0) / a;
  c.c7 = g * std::pow(c.window_volume, e) / std::pow(a, e);
  if (q.levy.family == LevyFamily::none) {
    c.c_plus = c.c_minus = 0.0;
  } else {
    c.c_plus = abs_moment(q.levy, a / (d + 1.0), Side::plus);
    c.c_minus = abs_moment(q.levy, a / (d + 1.0), Side::minus);
  }
  return c;
}

AnalyticValue genbm_variance(double t, double alpha, const WindowSpec& window) {
  if (window.d != 1) throw std::invalid_argument("genbm_variance is implemented for d = 1");
  if (!(alpha > 3.0 && alpha < 4.0)) return divergent();
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("genbm_variance needs t in [0, 1]");
  AnalyticValue v;
  if (t == 0.0) return v;
  const double len = window.shape == WindowShape::cube ? window.size : 2.0 * window.size;
  const double p = alpha - 6.0;
  // J = int_0^inf z^{alpha-6} sin^2 z dz, first arch on a log scale, then arches, then the tail.
  QuadOptions opt;
  opt.epsrel = 1e-12;
  const QuadResult head = integrate_line(
      [&](double u) {
        const double s = std::sin(std::exp(u));
        return std::exp((p + 1.0) * u) * s * s;
      },
      -kInf, std::log(kPi), 0.0, opt);
  constexpr int kArches = 2000;
  std::vector<double> pts;
  for (int k = 1; k <= kArches; ++k) pts.push_back(k * kPi);
  const QuadResult body = integrate_points(
      [&](double z) {
        const double s = std::sin(z);
        return std::pow(z, p) * s * s;
      },
      pts, opt);
  const double Z = kArches * kPi;
  const double tail = std::pow(Z, p + 1.0) / (2.0 * (-p - 1.0)) + 0.125 * p * std::pow(Z, p - 1.0);
  const double J = head.value + body.value + tail;
  const double a = 0.5 * len * t;
  v.value = 8.0 * std::pow(a, 5.0 - alpha) * J;
  v.abs_error = 8.0 * std::pow(a, 5.0 - alpha) * (head.abs_error + body.abs_error + std::fabs(p) * std::pow(Z, p - 3.0));
  v.converged = head.converged && body.converged;
  return v;
}

}  // namespace supcar
