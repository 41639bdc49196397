#pragma once

#include <complex>
#include <string>

#include "supcar/rng.hpp"

namespace supcar {

enum class LevyFamily { none, gamma_subordinator, inverse_gaussian, tempered_stable };
enum class Side { plus, minus };

// Jump measure W. Densities:
//   gamma_subordinator  c x^{-1} e^{-rho x}, x > 0
//   inverse_gaussian    sqrt(alpha / (2 pi x^3)) exp(-alpha (x - mu)^2 / (2 mu^2 x)), x > 0
//   tempered_stable     c_pm beta |x|^{-1-beta} e^{-theta |x|} on each half-line
struct LevyMeasureSpec {
  LevyFamily family = LevyFamily::none;
  double shape = 0.0, rate = 0.0;
  double ig_alpha = 0.0, ig_mu = 0.0;
  double beta = 0.0, theta = 0.0, c_plus = 0.0, c_minus = 0.0;

  static LevyMeasureSpec none() { return {}; }
  static LevyMeasureSpec gamma_subordinator(double c, double rho);
  static LevyMeasureSpec inverse_gaussian(double alpha, double mu);
  static LevyMeasureSpec tempered_stable(double beta, double theta, double c_plus, double c_minus);

  void validate() const;
  std::string name() const;
};

double truncation_tau(double x);

double levy_density(const LevyMeasureSpec& w, double x);
double levy_log_density(const LevyMeasureSpec& w, double x);
// Compensated jump cumulant int (e^{isx} - 1 - isx) W(dx), closed form.
std::complex<double> levy_cumulant(const LevyMeasureSpec& w, double s);
// Same integral by adaptive quadrature split at |x| = 1.
std::complex<double> levy_cumulant_quadrature(const LevyMeasureSpec& w, double s);

// int x^2 W(dx); +inf when infinite.
double levy_second_moment(const LevyMeasureSpec& w);
double bg_index(const LevyMeasureSpec& w);
double tail_mass(const LevyMeasureSpec& w, double x, Side side);
// int over one half-line of |y|^p W(dy); +inf when divergent.
double abs_moment(const LevyMeasureSpec& w, double p, Side side);
// int_{|x| >= 1} |x| (ln |x|)^{k} W(dx); +inf when divergent.
double log_moment_tail(const LevyMeasureSpec& w, int k);
// int_{a <= |x| <= b} |x|^p W(dx), both half-lines.
double abs_moment_band(const LevyMeasureSpec& w, double p, double a, double b);

double v0(const LevyMeasureSpec& w, double r);
double v1(const LevyMeasureSpec& w, double r);

// gamma = 2 is read as the Gaussian limit (c1 + c2) / 2.
std::complex<double> stable_omega(double s, double gamma, double c1, double c2);

// Per-unit-area description of a centered cell increment with Gaussian variance b.
struct IncrementPlan {
  LevyFamily family = LevyFamily::none;
  double b = 0.0;
  double shape = 0.0, rate = 0.0;
  double ig_alpha = 0.0, ig_mu = 0.0;
  double beta = 0.0, theta = 0.0;
  double eps = 0.0;
  double c[2] = {0.0, 0.0};
  double proposal_rate[2] = {0.0, 0.0};
  double mean_above[2] = {0.0, 0.0};
  double var_below = 0.0;
};

// eps <= 0 selects the default small-jump cutoff: discarded-jump sd <= 1e-3 of the cell sd,
// floored so the expected jump count in a cell of area `area_ref` stays below `max_jumps`.
IncrementPlan make_increment_plan(const LevyMeasureSpec& w, double b, double eps = -1.0, double area_ref = 1.0,
                                  double max_jumps = 256.0);
double draw_increment(const IncrementPlan& plan, double area, RngStream& rng);
double sample_increment(const LevyMeasureSpec& w, double b, double area, RngStream& rng);

// Small-jump pieces of a tempered-stable side (used by samplers and diagnostics).
double ts_mean_above(double c, double beta, double theta, double eps);
double ts_var_below(double c, double beta, double theta, double eps);

}  // namespace supcar
