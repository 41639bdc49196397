#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "supcar/quad.hpp"
#include "supcar/rng.hpp"

namespace supcar {

enum class MixingFamily { gamma_mix, reg_var, point_mass };
enum class SlowlyVaryingKind { constant, log_power };

// l(x) = C or C (1 + ln(1 + x))^k
struct SlowlyVaryingSpec {
  SlowlyVaryingKind kind = SlowlyVaryingKind::constant;
  double C = 1.0;
  int k = 1;

  double operator()(double x) const;
  double log_value(double x) const;
};

// gamma_mix:  lambda^{H-1} e^{-lambda} / Gamma(H)
// reg_var:    N l(1/lambda) lambda^{alpha-1} on (0, lambda_max]
// point_mass: all mass at `lambda0`
struct MixingMeasureSpec {
  MixingFamily family = MixingFamily::gamma_mix;
  double H = 1.0;
  double alpha = 0.0;
  SlowlyVaryingSpec sv;
  double lambda_max = 1.0;
  double lambda0 = 1.0;
  double norm = 1.0;  // N for reg_var, filled by the factory

  static MixingMeasureSpec gamma_mix(double H);
  static MixingMeasureSpec reg_var(double alpha, SlowlyVaryingSpec sv, double lambda_max);
  static MixingMeasureSpec point_mass(double lambda0);

  void validate() const;
  std::string name() const;
  // Regular-variation exponent at the origin (H for gamma_mix, +inf for a point mass).
  double rv_exponent() const;
  // Slowly varying part of the density at the origin, N l(x) (1/Gamma(H) for gamma_mix).
  double effective_l(double x) const;
};

double mixing_density(const MixingMeasureSpec& m, double lambda);
double mixing_log_density(const MixingMeasureSpec& m, double lambda);
double mixing_cdf(const MixingMeasureSpec& m, double lambda);
double mixing_quantile(const MixingMeasureSpec& m, double p);
double mixing_sample(const MixingMeasureSpec& m, RngStream& rng);
double mixing_mean(const MixingMeasureSpec& m);
// Right end of the support (+inf for gamma_mix).
double mixing_upper_support(const MixingMeasureSpec& m);

// int_lo^hi f(lambda) pi(dlambda) in the variable u = ln lambda. `hint_u` seeds the tail search.
QuadResult mixing_expectation(const MixingMeasureSpec& m, const RealFn& f, double lo = 0.0,
                              double hi = std::numeric_limits<double>::infinity(),
                              double hint_u = std::numeric_limits<double>::quiet_NaN(), const QuadOptions& opt = {});
// Same with a positive integrand given through its logarithm.
QuadResult mixing_expectation_log(const MixingMeasureSpec& m, const RealFn& log_f, double lo = 0.0,
                                  double hi = std::numeric_limits<double>::infinity(),
                                  double hint_u = std::numeric_limits<double>::quiet_NaN(),
                                  const QuadOptions& opt = {});

// int lambda^{-k} pi(dlambda); +inf when divergent at the origin.
double neg_moment(const MixingMeasureSpec& m, double k);
// int_{lambda > lambda_min} lambda^{-k} pi(dlambda).
double neg_moment_above(const MixingMeasureSpec& m, double k, double lambda_min);

enum class BinRepresentative { conditional_mean, moment_matched };

struct LambdaBin {
  double lambda = 0.0;
  double weight = 0.0;
  double lo = 0.0, hi = 0.0;
};

struct BinSet {
  std::vector<LambdaBin> bins;
  double truncated_mass = 0.0;  // pi((0, lambda_min])
};

// Equal-probability bins of pi restricted to (lambda_min, inf). moment_matched picks
// lambda_j with lambda_j^{-k} equal to the bin average of lambda^{-k}.
BinSet quantile_bins(const MixingMeasureSpec& m, int n_bins, double lambda_min,
                     BinRepresentative rep = BinRepresentative::conditional_mean, double k = 0.0);
// Geometric bins from lambda_min with the given ratio; the last bin is open above.
BinSet log_bins(const MixingMeasureSpec& m, double lambda_min, double lambda_top, double ratio,
                BinRepresentative rep = BinRepresentative::moment_matched, double k = 0.0);

struct DeBruijnResult {
  double value = 0.0;
  double x_star = 0.0;
  int iterations = 0;
  bool converged = false;
};

// l^#(T) for the base function g(x) = (scale * l(x^{d/alpha}))^{-1/d}, through the fixed point
// x = T / g(x); l^#(T) = 1 / g(x*).
DeBruijnResult debruijn_conjugate_at(const SlowlyVaryingSpec& sv, double scale, int d, double alpha, double T);

}  // namespace supcar
