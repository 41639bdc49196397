#include "supcar/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "supcar/quad.hpp"
#include "supcar/specfun.hpp"

namespace supcar {

namespace {

using cd = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double side_c(const LevyMeasureSpec& w, Side side) { return side == Side::plus ? w.c_plus : w.c_minus; }

// Log density on the requested half-line, x > 0.
double half_log_density(const LevyMeasureSpec& w, double x, Side side) {
  if (!(x > 0.0)) return -kInf;
  switch (w.family) {
    case LevyFamily::none:
      return -kInf;
    case LevyFamily::gamma_subordinator:
      return side == Side::plus ? std::log(w.shape) - w.rate * x - std::log(x) : -kInf;
    case LevyFamily::inverse_gaussian: {
      if (side == Side::minus) return -kInf;
      const double a = w.ig_alpha, m = w.ig_mu;
      return 0.5 * std::log(a / (2.0 * kPi)) - 1.5 * std::log(x) - a * (x - m) * (x - m) / (2.0 * m * m * x);
    }
    case LevyFamily::tempered_stable: {
      const double c = side_c(w, side);
      if (c == 0.0) return -kInf;
      return std::log(c * w.beta) - (1.0 + w.beta) * std::log(x) - w.theta * x;
    }
  }
  return -kInf;
}

double half_density(const LevyMeasureSpec& w, double x, Side side) { return std::exp(half_log_density(w, x, side)); }

bool has_side(const LevyMeasureSpec& w, Side side) {
  switch (w.family) {
    case LevyFamily::none:
      return false;
    case LevyFamily::gamma_subordinator:
    case LevyFamily::inverse_gaussian:
      return side == Side::plus;
    case LevyFamily::tempered_stable:
      return side_c(w, side) > 0.0;
  }
  return false;
}

// int_a^b g(x) W_side(dx) in the variable u = ln x; b may be +inf.
QuadResult half_integral(const LevyMeasureSpec& w, Side side, const std::function<double(double)>& g, double a,
                         double b, double epsrel = 1e-11) {
  QuadOptions opt;
  opt.epsrel = epsrel;
  auto f = [&](double u) {
    const double x = std::exp(u);
    const double gx = g(x);
    if (gx == 0.0) return 0.0;
    const double v = gx * std::exp(half_log_density(w, x, side) + u);
    return std::isfinite(v) ? v : 0.0;
  };
  const double lo = a > 0.0 ? std::log(a) : -kInf;
  const double hi = std::isinf(b) ? kInf : std::log(b);
  if (std::isinf(lo) || std::isinf(hi)) {
    double hint = 0.0;
    if (!std::isinf(lo)) hint = lo;
    if (!std::isinf(hi)) hint = std::min(hint, hi);
    if (w.family == LevyFamily::inverse_gaussian) hint = std::clamp(std::log(w.ig_mu), lo, hi);
    return integrate_line(f, lo, hi, hint, opt);
  }
  if (!(hi > lo)) return {};
  std::vector<double> pts{lo};
  const int n = std::max(1, static_cast<int>(std::ceil(hi - lo)));
  for (int i = 1; i < n; ++i) pts.push_back(lo + (hi - lo) * i / n);
  pts.push_back(hi);
  return integrate_points(f, pts, opt);
}

// sum_{k>=2} binom(beta, k) w^k
cd binom_tail_series(double beta, cd w) {
  cd term = w;
  double coef = beta;
  cd sum = 0.0;
  for (int k = 2; k < 60; ++k) {
    coef *= (beta - (k - 1)) / k;
    term *= w;
    const cd t = coef * term;
    sum += t;
    if (std::abs(t) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Compensated cumulant of one tempered-stable half-line at argument s (s already sign-flipped for minus).
cd ts_side_cumulant(double c, double beta, double theta, double s) {
  if (c == 0.0 || s == 0.0) return 0.0;
  const cd I(0.0, 1.0);
  if (theta == 0.0) {
    if (!(beta > 1.0 && beta < 2.0))
      throw std::domain_error("untempered stable measure needs beta in (1,2) for a compensated cumulant");
    const double mag = std::pow(std::fabs(s), beta);
    const double ang = -kPi * beta / 2.0 * (s > 0 ? 1.0 : -1.0);
    return c * beta * gamma_fn(-beta).value * mag * cd(std::cos(ang), std::sin(ang));
  }
  const double z = s / theta;
  const cd w = -I * z;
  if (beta == 1.0) {
    cd val;
    if (std::fabs(z) < 0.1) {
      // (1+w) ln(1+w) - w = sum_{k>=2} (-1)^k w^k / (k(k-1))
      cd term = w, sum = 0.0;
      for (int k = 2; k < 60; ++k) {
        term *= -w;
        const cd t = term / static_cast<double>(k * (k - 1));
        sum += t;
        if (std::abs(t) < 1e-18 * std::abs(sum)) break;
      }
      val = -sum;
    } else {
      val = (1.0 + w) * std::log(1.0 + w) - w;
    }
    return c * theta * val;
  }
  const double pref = c * beta * gamma_fn(-beta).value * std::pow(theta, beta);
  cd br;
  if (std::fabs(z) < 0.1)
    br = binom_tail_series(beta, w);
  else
    br = std::pow(1.0 + w, beta) - 1.0 - beta * w;
  return pref * br;
}

cd gamma_cumulant(double c, double rho, double s) {
  const cd I(0.0, 1.0);
  const cd w = I * s / rho;
  if (std::fabs(s / rho) < 0.1) {
    cd term = w, sum = 0.0;
    for (int k = 2; k < 80; ++k) {
      term *= w;
      const cd t = term / static_cast<double>(k);
      sum += t;
      if (std::abs(t) < 1e-18 * std::abs(sum)) break;
    }
    return c * sum;
  }
  return c * (-std::log(1.0 - w) - w);
}

cd expm1_minus_id(cd w) {
  if (std::abs(w) < 0.5) {
    cd term = w, sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      term *= w / static_cast<double>(k);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::exp(w) - 1.0 - w;
}

cd ig_cumulant(double alpha, double mu, double s) {
  const cd I(0.0, 1.0);
  const cd z = 2.0 * I * mu * mu * s / alpha;
  const cd root = std::sqrt(1.0 - z);
  const cd w = 2.0 * I * mu * s / (1.0 + root);
  const cd shift = I * mu * s * z / ((1.0 + root) * (1.0 + root));
  return expm1_minus_id(w) + shift;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

LevyMeasureSpec LevyMeasureSpec::gamma_subordinator(double c, double rho) {
  LevyMeasureSpec w;
  w.family = LevyFamily::gamma_subordinator;
  w.shape = c;
  w.rate = rho;
  w.validate();
  return w;
}

LevyMeasureSpec LevyMeasureSpec::inverse_gaussian(double alpha, double mu) {
  LevyMeasureSpec w;
  w.family = LevyFamily::inverse_gaussian;
  w.ig_alpha = alpha;
  w.ig_mu = mu;
  w.validate();
  return w;
}

LevyMeasureSpec LevyMeasureSpec::tempered_stable(double beta, double theta, double c_plus, double c_minus) {
  LevyMeasureSpec w;
  w.family = LevyFamily::tempered_stable;
  w.beta = beta;
  w.theta = theta;
  w.c_plus = c_plus;
  w.c_minus = c_minus;
  w.validate();
  return w;
}

void LevyMeasureSpec::validate() const {
  switch (family) {
    case LevyFamily::none:
      return;
    case LevyFamily::gamma_subordinator:
      if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma_subordinator needs shape > 0, rate > 0");
      return;
    case LevyFamily::inverse_gaussian:
      if (!(ig_alpha > 0.0) || !(ig_mu > 0.0)) throw std::invalid_argument("inverse_gaussian needs alpha > 0, mu > 0");
      return;
    case LevyFamily::tempered_stable:
      if (!(beta > 0.0 && beta < 2.0)) throw std::invalid_argument("tempered_stable needs beta in (0,2)");
      if (!(theta >= 0.0)) throw std::invalid_argument("tempered_stable needs theta >= 0");
      if (!(c_plus >= 0.0) || !(c_minus >= 0.0)) throw std::invalid_argument("tempered_stable needs c+ >= 0, c- >= 0");
      return;
  }
}

std::string LevyMeasureSpec::name() const {
  switch (family) {
    case LevyFamily::none:
      return "none";
    case LevyFamily::gamma_subordinator:
      return "gamma_subordinator";
    case LevyFamily::inverse_gaussian:
      return "inverse_gaussian";
    case LevyFamily::tempered_stable:
      return "tempered_stable";
  }
  return "none";
}

double truncation_tau(double x) {
  if (std::fabs(x) <= 1.0) return x;
  return x > 0 ? 1.0 : -1.0;
}

double levy_log_density(const LevyMeasureSpec& w, double x) {
  if (x > 0.0) return half_log_density(w, x, Side::plus);
  if (x < 0.0) return half_log_density(w, -x, Side::minus);
  return -kInf;
}

double levy_density(const LevyMeasureSpec& w, double x) {
  if (x > 0.0) return half_density(w, x, Side::plus);
  if (x < 0.0) return half_density(w, -x, Side::minus);
  return 0.0;
}

std::complex<double> levy_cumulant(const LevyMeasureSpec& w, double s) {
  if (s == 0.0) return 0.0;
  switch (w.family) {
    case LevyFamily::none:
      return 0.0;
    case LevyFamily::gamma_subordinator:
      return gamma_cumulant(w.shape, w.rate, s);
    case LevyFamily::inverse_gaussian:
      return ig_cumulant(w.ig_alpha, w.ig_mu, s);
    case LevyFamily::tempered_stable:
      return ts_side_cumulant(w.c_plus, w.beta, w.theta, s) + ts_side_cumulant(w.c_minus, w.beta, w.theta, -s);
  }
  return 0.0;
}

std::complex<double> levy_cumulant_quadrature(const LevyMeasureSpec& w, double s) {
  cd total = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    if (!has_side(w, side)) continue;
    const double ss = side == Side::plus ? s : -s;
    auto re = [ss](double x) {
      const double h = std::sin(0.5 * ss * x);
      return -2.0 * h * h;
    };
    auto im = [ss](double x) {
      const double y = ss * x;
      if (std::fabs(y) < 1e-2) {
        const double y2 = y * y;
        return -y * y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0));
      }
      return std::sin(y) - y;
    };
    double r = 0.0, i = 0.0;
    r += half_integral(w, side, re, 0.0, 1.0, 1e-12).value;
    r += half_integral(w, side, re, 1.0, kInf, 1e-12).value;
    i += half_integral(w, side, im, 0.0, 1.0, 1e-12).value;
    i += half_integral(w, side, im, 1.0, kInf, 1e-12).value;
    total += cd(r, i);
  }
  return total;
}

double levy_second_moment(const LevyMeasureSpec& w) {
  switch (w.family) {
    case LevyFamily::none:
      return 0.0;
    case LevyFamily::gamma_subordinator:
      return w.shape / (w.rate * w.rate);
    case LevyFamily::inverse_gaussian:
      return w.ig_mu * w.ig_mu + w.ig_mu * w.ig_mu * w.ig_mu / w.ig_alpha;
    case LevyFamily::tempered_stable:
      return abs_moment(w, 2.0, Side::plus) + abs_moment(w, 2.0, Side::minus);
  }
  return 0.0;
}

double bg_index(const LevyMeasureSpec& w) { return w.family == LevyFamily::tempered_stable ? w.beta : 0.0; }

double tail_mass(const LevyMeasureSpec& w, double x, Side side) {
  if (!(x > 0.0)) throw std::domain_error("tail_mass needs x > 0");
  if (!has_side(w, side)) return 0.0;
  switch (w.family) {
    case LevyFamily::none:
      return 0.0;
    case LevyFamily::gamma_subordinator:
      return w.shape * upper_gamma_general(0.0, w.rate * x).value;
    case LevyFamily::inverse_gaussian: {
      const double r = std::sqrt(w.ig_alpha / x);
      const double a = normal_sf(r * (x / w.ig_mu - 1.0));
      const double z2 = r * (x / w.ig_mu + 1.0);
      const double b = std::exp(2.0 * w.ig_alpha / w.ig_mu + std::log(normal_sf(z2)));
      return std::max(0.0, a - (std::isfinite(b) ? b : 0.0));
    }
    case LevyFamily::tempered_stable: {
      const double c = side_c(w, side);
      if (w.theta == 0.0) return c * std::pow(x, -w.beta);
      return c * w.beta * std::pow(w.theta, w.beta) * upper_gamma_general(-w.beta, w.theta * x).value;
    }
  }
  return 0.0;
}

double abs_moment(const LevyMeasureSpec& w, double p, Side side) {
  if (!has_side(w, side)) return 0.0;
  switch (w.family) {
    case LevyFamily::none:
      return 0.0;
    case LevyFamily::gamma_subordinator:
      if (!(p > 0.0)) return kInf;
      return w.shape * std::exp(lgamma_fn(p) - p * std::log(w.rate));
    case LevyFamily::inverse_gaussian:
      return half_integral(w, side, [p](double x) { return std::pow(x, p); }, 0.0, kInf).value;
    case LevyFamily::tempered_stable: {
      if (!(p > w.beta) || w.theta == 0.0) return kInf;
      const double c = side_c(w, side);
      return c * w.beta * std::exp(lgamma_fn(p - w.beta) + (w.beta - p) * std::log(w.theta));
    }
  }
  return 0.0;
}

double log_moment_tail(const LevyMeasureSpec& w, int k) {
  double total = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    if (!has_side(w, side)) continue;
    if (w.family == LevyFamily::tempered_stable && w.theta == 0.0) {
      if (w.beta <= 1.0) return kInf;
    }
    auto g = [&](double u) {
      const double v = std::pow(u, k) * std::exp(2.0 * u + half_log_density(w, std::exp(u), side));
      return std::isfinite(v) ? v : 0.0;
    };
    const DivergenceCheck dc = truncation_doubling(g, 0.0, +1, 5.0, 6, 1e-3);
    if (dc.divergent) return kInf;
    total += dc.value;
  }
  return total;
}

double abs_moment_band(const LevyMeasureSpec& w, double p, double a, double b) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    if (!has_side(w, side)) continue;
    total += half_integral(w, side, [p](double x) { return std::pow(x, p); }, a, b).value;
  }
  return total;
}

double v0(const LevyMeasureSpec& w, double r) {
  if (!(r > 0.0)) return 0.0;
  double total = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    if (!has_side(w, side)) continue;
    total += half_integral(w, side, [r](double x) { return r * r * x * x; }, 0.0, 1.0 / r).value;
    total += tail_mass(w, 1.0 / r, side);
  }
  return total;
}

double v1(const LevyMeasureSpec& w, double r) {
  if (!(r > 0.0) || r == 1.0) return 0.0;
  const double lo = std::min(1.0, 1.0 / r);
  const double hi = std::max(1.0, 1.0 / r);
  double total = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    if (!has_side(w, side)) continue;
    auto mid = [r](double x) { return r < 1.0 ? r * (x - 1.0) : 1.0 - r * x; };
    double part = half_integral(w, side, mid, lo, hi).value;
    part += (1.0 - r) * tail_mass(w, hi, side);
    total += side == Side::plus ? part : -part;
  }
  return total;
}

std::complex<double> stable_omega(double s, double gamma, double c1, double c2) {
  if (!(gamma > 0.0 && gamma <= 2.0)) throw std::domain_error("stable_omega needs gamma in (0,2]");
  if (gamma == 2.0) return 0.5 * (c1 + c2);
  if (gamma == 1.0) {
    if (c1 != c2) throw std::invalid_argument("stable_omega with gamma = 1 needs c1 = c2");
    return c1 * kPi;
  }
  const double sg = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
  const double k = gamma_fn(2.0 - gamma).value / (1.0 - gamma);
  return k * cd((c1 + c2) * std::cos(kPi * gamma / 2.0), -(c1 - c2) * sg * std::sin(kPi * gamma / 2.0));
}

double ts_mean_above(double c, double beta, double theta, double eps) {
  if (c == 0.0) return 0.0;
  if (theta == 0.0) {
    if (beta <= 1.0) return kInf;
    return c * beta * std::pow(eps, 1.0 - beta) / (beta - 1.0);
  }
  return c * beta * std::pow(theta, beta - 1.0) * upper_gamma_general(1.0 - beta, theta * eps).value;
}

double ts_var_below(double c, double beta, double theta, double eps) {
  if (c == 0.0) return 0.0;
  if (theta == 0.0 || theta * eps < 1e-8) return c * beta * std::pow(eps, 2.0 - beta) / (2.0 - beta);
  return c * beta * std::pow(theta, beta - 2.0) * incomplete_gamma_lower(2.0 - beta, theta * eps).value;
}

IncrementPlan make_increment_plan(const LevyMeasureSpec& w, double b, double eps, double area_ref,
                                  double max_jumps) {
  w.validate();
  IncrementPlan p;
  p.family = w.family;
  p.b = b;
  switch (w.family) {
    case LevyFamily::none:
      break;
    case LevyFamily::gamma_subordinator:
      p.shape = w.shape;
      p.rate = w.rate;
      break;
    case LevyFamily::inverse_gaussian:
      p.ig_alpha = w.ig_alpha;
      p.ig_mu = w.ig_mu;
      break;
    case LevyFamily::tempered_stable: {
      p.beta = w.beta;
      p.theta = w.theta;
      p.c[0] = w.c_plus;
      p.c[1] = w.c_minus;
      const double ctot = w.c_plus + w.c_minus;
      if (eps <= 0.0) {
        const double var_unit = b + levy_second_moment(w);
        const double target = 1e-6 * var_unit;
        auto vb = [&](double e) {
          return ts_var_below(w.c_plus, w.beta, w.theta, e) + ts_var_below(w.c_minus, w.beta, w.theta, e);
        };
        double lo = -700.0, hi = 10.0;
        if (!std::isfinite(var_unit)) hi = lo;
        for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
          const double m = 0.5 * (lo + hi);
          if (vb(std::exp(m)) <= target)
            lo = m;
          else
            hi = m;
        }
        eps = std::exp(lo);
        // jump-count floor: ctot * eps^{-beta} * area_ref <= max_jumps
        if (ctot > 0.0) eps = std::max(eps, std::pow(ctot * area_ref / max_jumps, 1.0 / w.beta));
      }
      p.eps = eps;
      for (int k = 0; k < 2; ++k) {
        p.proposal_rate[k] = p.c[k] * std::pow(eps, -w.beta);
        p.mean_above[k] = ts_mean_above(p.c[k], w.beta, w.theta, eps);
        if (!std::isfinite(p.mean_above[k])) throw std::domain_error("tempered_stable sampler needs a finite mean");
      }
      p.var_below = ts_var_below(p.c[0], w.beta, w.theta, eps) + ts_var_below(p.c[1], w.beta, w.theta, eps);
      break;
    }
  }
  return p;
}

double draw_increment(const IncrementPlan& p, double area, RngStream& rng) {
  double x = 0.0;
  switch (p.family) {
    case LevyFamily::none:
      break;
    case LevyFamily::gamma_subordinator: {
      const double k = p.shape * area;
      x += (rng.gamma(k) - k) / p.rate;
      break;
    }
    case LevyFamily::inverse_gaussian: {
      const std::uint64_t n = rng.poisson(area);
      double sum = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) sum += rng.inverse_gaussian(p.ig_mu, p.ig_alpha);
      x += sum - area * p.ig_mu;
      break;
    }
    case LevyFamily::tempered_stable: {
      for (int k = 0; k < 2; ++k) {
        if (p.c[k] == 0.0) continue;
        const std::uint64_t n = rng.poisson(p.proposal_rate[k] * area);
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
          const double y = p.eps * std::pow(rng.uniform(), -1.0 / p.beta);
          if (p.theta == 0.0 || rng.uniform() < std::exp(-p.theta * y)) sum += y;
        }
        const double centered = sum - p.mean_above[k] * area;
        x += k == 0 ? centered : -centered;
      }
      if (p.var_below > 0.0) x += std::sqrt(p.var_below * area) * rng.normal();
      break;
    }
  }
  if (p.b > 0.0) x += std::sqrt(p.b * area) * rng.normal();
  return x;
}

double sample_increment(const LevyMeasureSpec& w, double b, double area, RngStream& rng) {
  if (!(area > 0.0)) throw std::domain_error("sample_increment needs area > 0");
  return draw_increment(make_increment_plan(w, b, -1.0, area), area, rng);
}

}  // namespace supcar
