#pragma once

#include <cstdint>
#include <random>

namespace supcar {

// One independent stream per (master seed, stream index). The engine state is derived from
// both keys through seed_seq, so stream contents never depend on scheduling.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  double uniform();       // (0, 1)
  double normal();        // N(0, 1)
  double gamma(double shape);  // Gamma(shape, 1)
  std::uint64_t poisson(double mean);
  double inverse_gaussian(double mu, double shape);

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace supcar
