#include "supcar/rng.hpp"

#include <cmath>

namespace supcar {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedcafeu};
  eng_.seed(seq);
}

double RngStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(eng_); }

double RngStream::gamma(double shape) {
  if (shape <= 0.0) return 0.0;
  std::gamma_distribution<double> g(shape, 1.0);
  return g(eng_);
}

std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> p(mean);
  return p(eng_);
}

// Michael, Schucany and Haas transformation method.
double RngStream::inverse_gaussian(double mu, double shape) {
  const double nu = normal();
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * shape) -
                   mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
  if (uniform() <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace supcar
