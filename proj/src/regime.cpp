#include "supcar/regime.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "supcar/quad.hpp"
#include "supcar/specfun.hpp"

namespace supcar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

double sphere_area(int d) { return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / gamma_fn(0.5 * d).value; }

// int_0^upper f(lambda) pi(dlambda) for a positive f given by its logarithm. The part below
// lambda = upper (capped by the support) is tested for divergence at the origin.
IntegralDiagnostic pi_integral(const std::string& name, const MixingMeasureSpec& m,
                               const std::function<double(double)>& log_f, double upper, double L0 = 5.0) {
  IntegralDiagnostic out;
  out.name = name;
  if (m.family == MixingFamily::point_mass) {
    out.value = m.lambda0 <= upper ? std::exp(log_f(m.lambda0)) : 0.0;
    out.divergent = std::isinf(out.value);
    return out;
  }
  auto g = [&](double u) {
    const double l = std::exp(u);
    const double v = std::exp(u + mixing_log_density(m, l) + log_f(l));
    return std::isnan(v) ? 0.0 : v;
  };
  const double top = std::min(upper, mixing_upper_support(m));
  const double anchor = std::min(std::log(0.5), std::log(top));
  double right = 0.0;
  if (top > std::exp(anchor)) {
    QuadOptions opt;
    opt.epsrel = 1e-9;
    const QuadResult r = std::isinf(top) ? integrate_line(g, anchor, kInf, anchor, opt)
                                         : integrate(g, anchor, std::log(top), opt);
    right = r.value;
  }
  const DivergenceCheck left = truncation_doubling(g, anchor, -1, L0, 6, 1e-3);
  out.divergent = left.divergent || !std::isfinite(left.value) || !std::isfinite(right);
  out.value = out.divergent ? kInf : left.value + right;
  return out;
}

double log_abs_ln_pow(double l, int k) { return k == 0 ? 0.0 : k * std::log(std::fabs(std::log(l))); }

// Cumulative moments A_j(S) = int_{s0}^S s^j h(s) ds on a uniform grid in s.
struct CumulativeTable {
  double s0, ds;
  std::vector<std::vector<double>> A;

  CumulativeTable(const std::function<double(double)>& h, int jmax, double s_lo, double s_hi, double step = 0.02)
      : s0(s_lo), ds(step) {
    const int n = static_cast<int>(std::ceil((s_hi - s0) / ds)) + 1;
    A.assign(jmax + 1, std::vector<double>(n, 0.0));
    double prev = h(s0);
    for (int i = 1; i < n; ++i) {
      const double sa = s0 + (i - 1) * ds, sb = s0 + i * ds;
      const double cur = h(sb);
      for (int j = 0; j <= jmax; ++j)
        A[j][i] = A[j][i - 1] + 0.5 * ds * (std::pow(sa, j) * prev + std::pow(sb, j) * cur);
      prev = cur;
    }
  }

  double at(int j, double S) const {
    if (S <= s0) return 0.0;
    const double x = (S - s0) / ds;
    const size_t i = static_cast<size_t>(x);
    if (i + 1 >= A[j].size()) return A[j].back();
    const double f = x - i;
    return A[j][i] * (1.0 - f) + A[j][i + 1] * f;
  }
};

// int_{e^lo <= |x| <= e^S} |x|^p W(dx) as a function of S, or with `from_top` the integral over
// e^{-S} <= |x| <= e^{-lo}, accumulated from the upper end.
CumulativeTable band_table(const LevyMeasureSpec& w, double p, double lo, double hi, bool from_top = false) {
  auto h = [&w, p, from_top](double t) {
    const double s = from_top ? -t : t;
    const double x = std::exp(s);
    double v = 0.0;
    for (double y : {x, -x}) {
      const double t = std::exp((p + 1.0) * s + levy_log_density(w, y));
      if (std::isfinite(t)) v += t;
    }
    return v;
  };
  return from_top ? CumulativeTable(h, 0, -hi, -lo) : CumulativeTable(h, 0, lo, hi);
}

// int_pi int_{R^d} V(e^{-lambda |y|} / (2 lambda)) dy via the radial substitution s = ln r.
double radial_integral(const MixingMeasureSpec& m, const std::function<double(double)>& V, int d) {
  const CumulativeTable tab([&V](double s) { return std::fabs(V(std::exp(s))); }, d - 1, -60.0, 140.0);
  const double sd = sphere_area(d);
  auto inner = [&](double l) {
    const double S = -std::log(2.0 * l);
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= d - 1; ++j) {
      acc += binom * std::pow(S, d - 1 - j) * (j % 2 == 0 ? 1.0 : -1.0) * tab.at(j, S);
      binom = binom * (d - 1 - j) / (j + 1);
    }
    return std::max(acc, 0.0);
  };
  auto log_f = [&](double l) { return std::log(sd * inner(l)) - d * std::log(l); };
  const IntegralDiagnostic r = pi_integral("radial", m, log_f, kInf, 2.0);
  return r.divergent ? kInf : r.value;
}

Verdict verdict_of(const std::vector<IntegralDiagnostic>& diags) {
  bool failed = false;
  for (const auto& x : diags) {
    if (std::isnan(x.value)) failed = true;
    else if (x.divergent) return Verdict::no;
  }
  return failed ? Verdict::undetermined : Verdict::yes;
}

Verdict threshold_verdict(double value, double threshold) {
  if (same(value, threshold)) return Verdict::undetermined;
  return value > threshold ? Verdict::yes : Verdict::no;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string to_string(Dependence v) {
  switch (v) {
    case Dependence::SRD: return "SRD";
    case Dependence::LRD: return "LRD";
    case Dependence::infinite_variance: return "infinite_variance";
    case Dependence::undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string to_string(LimitRegime v) {
  switch (v) {
    case LimitRegime::brownian: return "brownian";
    case LimitRegime::generalized_brownian: return "generalized_brownian";
    case LimitRegime::stable_integral: return "stable_integral";
    case LimitRegime::stable_levy: return "stable_levy";
    case LimitRegime::boundary: return "boundary";
    case LimitRegime::not_covered: return "not_covered";
  }
  return "not_covered";
}

ExistenceReport check_existence(const CharacteristicQuadruple& q) {
  q.validate();
  ExistenceReport rep;
  const int d = q.d;
  const auto& m = q.mixing;
  const auto& w = q.levy;

  IntegralDiagnostic lm;
  lm.name = "log_moment_W";
  lm.value = w.family == LevyFamily::none ? 0.0 : log_moment_tail(w, d - 1);
  lm.divergent = std::isinf(lm.value);
  rep.diagnostics.push_back(lm);

  if (q.b > 0.0) {
    rep.diagnostics.push_back(pi_integral(
        "log_neg_moment_d2", m, [d](double l) { return log_abs_ln_pow(l, d) - (d + 2.0) * std::log(l); }, kInf));
  } else {
    rep.diagnostics.push_back(pi_integral(
        "log_neg_moment_d1", m, [d](double l) { return log_abs_ln_pow(l, d - 1) - (d + 1.0) * std::log(l); }, kInf));
    if (w.family != LevyFamily::none) {
      // the lambda integrals below reach lambda ~ e^{-330}
      constexpr double kLo = -420.0;
      const CumulativeTable small = band_table(w, 2.0, kLo, 0.0);
      const CumulativeTable band1 = band_table(w, 1.0, kLo, 0.0, true);
      const CumulativeTable band0 = band_table(w, 0.0, kLo, 0.0, true);
      rep.diagnostics.push_back(pi_integral(
          "small_jump_x2", m,
          [&](double l) {
            return log_abs_ln_pow(l, d - 1) - (d + 2.0) * std::log(l) + std::log(small.at(0, std::log(2.0 * l)));
          },
          0.5));
      for (int k = 1; k <= 2; ++k) {
        rep.diagnostics.push_back(pi_integral(
            "band_moment_k" + std::to_string(k), m,
            [&, k](double l) {
              const CumulativeTable& t = k == 1 ? band1 : band0;
              return log_abs_ln_pow(l, d) - (d + 2.0 - k) * std::log(l) + std::log(t.at(0, -std::log(2.0 * l)));
            },
            0.5));
      }
    }
  }
  rep.direct = verdict_of(rep.diagnostics);

  const double alpha = m.rv_exponent();
  if (std::isfinite(alpha)) {
    if (lm.divergent) {
      rep.shortcut = Verdict::no;
    } else if (q.b > 0.0) {
      rep.shortcut = threshold_verdict(alpha, d + 2.0);
    } else {
      const double beta = w.family == LevyFamily::none ? 0.0 : bg_index(w);
      rep.shortcut = threshold_verdict(alpha, std::max(d + beta, d + 1.0));
    }
  }

  if (rep.direct != Verdict::undetermined) {
    rep.exists = rep.direct;
    rep.decided_by = "integral_conditions";
  } else if (rep.shortcut != Verdict::undetermined) {
    rep.exists = rep.shortcut;
    rep.decided_by = "rv_thresholds";
  } else {
    rep.exists = Verdict::undetermined;
    rep.decided_by = "none";
  }
  return rep;
}

bool RajputRosinskiReport::finite() const {
  return std::isfinite(I0) && std::isfinite(I1) && std::isfinite(I_gauss);
}

RajputRosinskiReport check_rajput_rosinski(const CharacteristicQuadruple& q) {
  q.validate();
  RajputRosinskiReport rep;
  const int d = q.d;
  if (q.levy.family != LevyFamily::none) {
    rep.I0 = radial_integral(q.mixing, [&](double r) { return v0(q.levy, r); }, d);
    rep.I1 = radial_integral(q.mixing, [&](double r) { return v1(q.levy, r); }, d);
  }
  if (q.b > 0.0) {
    const double nm = neg_moment(q.mixing, d + 2.0);
    rep.I_gauss = sphere_area(d) * gamma_fn(d).value * std::ldexp(1.0, -d) * nm;
  }
  return rep;
}

Dependence dependence_regime(const CharacteristicQuadruple& q) {
  const int d = q.d;
  if (!std::isfinite(neg_moment(q.mixing, d + 2.0))) return Dependence::infinite_variance;
  const double alpha = q.mixing.rv_exponent();
  return alpha > 2.0 * d + 2.0 ? Dependence::SRD : Dependence::LRD;
}

LimitRegime classify_limit(bool gaussian, double alpha, double beta, int d) {
  if (gaussian) {
    if (same(alpha, 2.0 * d + 2.0) || same(alpha, d + 2.0)) return LimitRegime::boundary;
    if (alpha > 2.0 * d + 2.0) return LimitRegime::brownian;
    if (alpha > d + 2.0) return LimitRegime::generalized_brownian;
    return LimitRegime::not_covered;
  }
  if (same(alpha, d + 1.0) || same(alpha, 2.0 * d + 2.0)) return LimitRegime::boundary;
  if (!(alpha > d + 1.0 && alpha < 2.0 * d + 2.0)) return LimitRegime::not_covered;
  const double g = alpha / (d + 1.0);
  const double top = std::min(2.0, alpha - d);
  if (same(beta, g) || same(beta, top)) return LimitRegime::boundary;
  if (beta > 0.0 && beta < g) return LimitRegime::stable_levy;
  if (beta > g && beta < top) return LimitRegime::stable_integral;
  return LimitRegime::not_covered;
}

RegimeReport limit_regime(const CharacteristicQuadruple& q) {
  RegimeReport rep;
  rep.existence = check_existence(q);
  rep.d = q.d;
  rep.b = q.b;
  rep.alpha = q.mixing.rv_exponent();
  rep.beta_bg = q.levy.family == LevyFamily::none ? kNaN : bg_index(q.levy);
  if (rep.existence.exists == Verdict::no) {
    rep.dependence = Dependence::undetermined;
    rep.limit = LimitRegime::not_covered;
    return rep;
  }
  rep.dependence = dependence_regime(q);
  if (rep.existence.exists != Verdict::yes) return rep;
  const double beta = q.levy.family == LevyFamily::none ? 0.0 : rep.beta_bg;
  rep.limit = classify_limit(q.b > 0.0, rep.alpha, beta, q.d);
  return rep;
}

}  // namespace supcar
