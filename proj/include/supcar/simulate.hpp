#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "supcar/model.hpp"
#include "supcar/rng.hpp"

namespace supcar {

enum class BinScheme { quantile, log };

struct SimulationConfig {
  int d = 1;
  int n = 1 << 14;  // cells per axis, power of two
  double h = 0.1;
  int lambda_bins = 16;
  double lambda_min = 0.0;  // <= 0: largest value whose kernel radius fits the padding
  double q = 30.0;          // kernel dropped where e^{-lambda r} < e^{-q}
  int pad = 2;
  BinScheme bin_scheme = BinScheme::quantile;
  double log_ratio = 1.5;
  double lambda_top = 0.0;  // log bins: last edge (<= 0: 0.999 quantile)
  double max_jumps = 256.0;
  std::uint64_t seed = 1;

  void validate() const;
  // Kernel radius in cells for rate lambda.
  int radius_cells(double lambda) const;
  double default_lambda_min() const;
  double resolved_lambda_min() const;
  std::string canonical() const;
};

struct Provenance {
  std::string quadruple_digest;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  bool operator==(const Provenance&) const = default;
};

// Values at cell centers; index (i, j) -> values[i * n + j] for d = 2, axis 0 first.
struct FieldGrid {
  int d = 1;
  int n = 0;
  double h = 1.0;
  double origin = 0.0;  // coordinate of the first cell center on every axis
  std::vector<double> values;
  Provenance provenance;

  std::size_t size() const { return values.size(); }
  double coord(int i) const { return origin + i * h; }
  void validate() const;
};

struct SimulationDiagnostics {
  double lambda_min = 0.0;
  double truncated_mass = 0.0;    // pi((0, lambda_min])
  double kernel_tail = 0.0;       // relative variance of the dropped kernel tail
  double cell_bias = 0.0;         // relative variance lost to the cell-averaged kernel, exact
  int bins = 0;
  int fft_size = 0;
};

std::string quadruple_canonical(const CharacteristicQuadruple& q);
std::string fnv1a_hex(const std::string& s);

// Precomputes bins and kernel spectra once and then draws independent replicates.
class SupcarSimulator {
public:
  SupcarSimulator(const CharacteristicQuadruple& q, const SimulationConfig& cfg);
  ~SupcarSimulator();
  SupcarSimulator(const SupcarSimulator&) = delete;
  SupcarSimulator& operator=(const SupcarSimulator&) = delete;

  FieldGrid simulate(RngStream& rng) const;
  FieldGrid simulate_replicate(std::uint64_t replicate) const;
  std::vector<FieldGrid> ensemble(int replicates, int threads) const;

  struct Bin {
    double lambda;
    double weight;
  };
  const std::vector<Bin>& bins() const { return bins_; }
  const SimulationDiagnostics& diagnostics() const { return diag_; }
  const SimulationConfig& config() const { return cfg_; }
  // Exact covariance of the simulated (binned, untruncated-kernel) field at a physical lag.
  double binned_covariance(double lag) const;

private:
  struct Impl;
  CharacteristicQuadruple q_;
  SimulationConfig cfg_;
  std::vector<Bin> bins_;
  SimulationDiagnostics diag_;
  Provenance prov_;
  std::unique_ptr<Impl> impl_;
};

FieldGrid simulate_car(double lambda, const LevyMeasureSpec& w, double b, const SimulationConfig& cfg,
                       RngStream& rng);
FieldGrid simulate_supcar(const CharacteristicQuadruple& q, const SimulationConfig& cfg, RngStream& rng);

struct CovarianceEstimate {
  double lag = 0.0;
  double estimate = 0.0;
  double se = 0.0;
};

// Lags are physical distances, rounded to whole cells (along the axes for d = 2).
std::vector<CovarianceEstimate> empirical_covariance(const std::vector<FieldGrid>& ensemble,
                                                     const std::vector<double>& lags);

// One replicate's translation average of (X(x) - mean)(X(x + lag) - mean), per lag.
std::vector<double> lag_products(const FieldGrid& g, const std::vector<double>& lags, double mean = 0.0);
// Mean and standard error over replicates; per_replicate[r][k] from lag_products.
std::vector<CovarianceEstimate> ensemble_covariance(const FieldGrid& like, const std::vector<double>& lags,
                                                    const std::vector<std::vector<double>>& per_replicate);

// Cell average of -e^{-lambda |u|} / (2 lambda) over the cell at integer offset `off`.
double cell_kernel(double lambda, double h, int d, const int* off);

}  // namespace supcar
