#pragma once

#include <complex>
#include <string>
#include <vector>

#include "supcar/model.hpp"

namespace supcar {

enum class WindowShape { cube, ball };

// Window Delta centred at the origin: cube of side `size` or ball of radius `size`.
struct WindowSpec {
  WindowShape shape = WindowShape::cube;
  int d = 1;
  double size = 1.0;

  void validate() const;
  double volume() const;
  // Membership of Delta(scale), the window dilated by `scale`.
  bool contains(const double* x, double scale) const;
  std::string name() const;
};

struct AnalyticValue {
  double value = 0.0;
  double abs_error = 0.0;
  bool finite = true;
  bool converged = true;
};

double const_c1(int d);
double const_c2(int d);

double car_covariance(double t, double lambda, double sigma2, int d);
double car_spectral(double omega, double lambda, double sigma2, int d);

// Mixture integrals restricted to lambda > lambda_min (0 keeps the full measure).
AnalyticValue supcar_covariance(double t, const CharacteristicQuadruple& q, double lambda_min = 0.0);
AnalyticValue supcar_covariance_gamma_closed(double t, double H, int d, double k2);
AnalyticValue supcar_spectral(double omega, const CharacteristicQuadruple& q, double lambda_min = 0.0);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  bool finite_variance = true;
};
Moments supcar_moments(const CharacteristicQuadruple& q, double lambda_min = 0.0);

// log E exp(i s X(0)) and, for d = 1, log E exp(i sum s_j X(t_j)).
std::complex<double> marginal_cumulant(const CharacteristicQuadruple& q, double s);
std::complex<double> joint_cumulant(const CharacteristicQuadruple& q, const std::vector<double>& s,
                                    const std::vector<double>& t);

struct AsymptoticConstants {
  AnalyticValue c3;
  double c3_closed = 0.0;
  AnalyticValue c4;
};
AsymptoticConstants asymptotic_constants(const CharacteristicQuadruple& q);

// NaN marks a constant whose theorem does not apply; +inf a divergent defining integral.
struct ModelConstants {
  int d = 1;
  double window_volume = 0.0;
  double base_variance = 0.0;
  double alpha = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double c5 = 0.0;
  // Exact T^{-d} growth rate of Var X*(T): half of c5 times the base variance.
  double brownian_rate = 0.0;
  double c6 = 0.0, c7 = 0.0;
  double c_plus = 0.0, c_minus = 0.0;
};
ModelConstants limit_constants(const CharacteristicQuadruple& q, const WindowSpec& window);

// Variance of the generalized Brownian limit at time t, d = 1.
AnalyticValue genbm_variance(double t, double alpha, const WindowSpec& window);

}  // namespace supcar
