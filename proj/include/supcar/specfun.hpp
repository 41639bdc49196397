#pragma once

#include <stdexcept>
#include <string>

namespace supcar {

struct SpecFunResult {
  double value = 0.0;
  double est_abs_error = 0.0;
  bool underflow = false;
  bool overflow = false;
};

class SpecFunError : public std::domain_error {
public:
  explicit SpecFunError(const std::string& what) : std::domain_error(what) {}
};

// Modified Bessel function of the second kind, real order nu >= 0, x > 0.
SpecFunResult bessel_k(double nu, double x);
// e^x K_nu(x); never underflows on the supported range.
SpecFunResult bessel_k_scaled(double nu, double x);
// log(x^nu K_nu(x)), finite at x -> 0 (limit log(2^{nu-1} Gamma(nu)) for nu > 0).
double log_xnu_bessel_k(double nu, double x);

SpecFunResult gamma_fn(double x);
double lgamma_fn(double x);
// 1/Gamma(x), zero at the poles.
double rgamma_fn(double x);

// Gamma(a, x) for a > 0, x >= 0.
SpecFunResult incomplete_gamma_upper(double a, double x);
// gamma(a, x) for a > 0, x >= 0.
SpecFunResult incomplete_gamma_lower(double a, double x);
// Gamma(a, x) for any real a and x > 0 (a may be zero or negative).
SpecFunResult upper_gamma_general(double a, double x);
// Regularized P(a, x) and its inverse in x.
double gamma_p(double a, double x);
double gamma_p_inv(double a, double p);

SpecFunResult hyp2f1(double a, double b, double c, double z);

}  // namespace supcar
