#pragma once

#include <complex>

#include "supcar/levy.hpp"
#include "supcar/mixing.hpp"

namespace supcar {

// (0, b, W, pi) with spatial dimension d.
struct CharacteristicQuadruple {
  double b = 0.0;
  LevyMeasureSpec levy;
  MixingMeasureSpec mixing;
  int d = 1;

  void validate() const;
  double base_variance() const;  // -K''(0)
};

std::complex<double> cumulant(const CharacteristicQuadruple& q, double s);
std::complex<double> cumulant_quadrature(const CharacteristicQuadruple& q, double s);

struct CumulantDerivatives {
  std::complex<double> k1;
  double k2 = 0.0;
};
CumulantDerivatives cumulant_derivatives(const CharacteristicQuadruple& q);

}  // namespace supcar
