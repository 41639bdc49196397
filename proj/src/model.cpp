#include "supcar/model.hpp"

#include <cmath>
#include <stdexcept>

namespace supcar {

void CharacteristicQuadruple::validate() const {
  if (!(b >= 0.0)) throw std::invalid_argument("gaussian variance b must be >= 0");
  if (d < 1) throw std::invalid_argument("dimension d must be >= 1");
  levy.validate();
  mixing.validate();
  if (!(base_variance() > 0.0)) throw std::invalid_argument("degenerate quadruple: zero base variance");
}

double CharacteristicQuadruple::base_variance() const { return b + levy_second_moment(levy); }

std::complex<double> cumulant(const CharacteristicQuadruple& q, double s) {
  return -0.5 * q.b * s * s + levy_cumulant(q.levy, s);
}

std::complex<double> cumulant_quadrature(const CharacteristicQuadruple& q, double s) {
  return -0.5 * q.b * s * s + levy_cumulant_quadrature(q.levy, s);
}

CumulantDerivatives cumulant_derivatives(const CharacteristicQuadruple& q) {
  return {0.0, -q.base_variance()};
}

}  // namespace supcar
