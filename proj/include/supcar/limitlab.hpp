#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "supcar/analytics.hpp"
#include "supcar/regime.hpp"
#include "supcar/simulate.hpp"

namespace supcar {

// Riemann midpoint sum of the grid over cells whose centers lie in the window scaled by `scale`.
double integrate_window(const FieldGrid& grid, double scale, const WindowSpec& window);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
};

// Least squares of log y on log T. The sample overloads bootstrap replicates within each rung.
ScalingFit power_law_fit(const std::vector<double>& T, const std::vector<double>& y);
ScalingFit variance_scaling_fit(const std::vector<double>& T, const std::vector<double>& variances);
ScalingFit variance_scaling_fit(const std::vector<double>& T, const std::vector<std::vector<double>>& samples,
                                int boot = 200, std::uint64_t seed = 7);
ScalingFit spread_scaling_fit(const std::vector<double>& T, const std::vector<std::vector<double>>& samples,
                              int boot = 200, std::uint64_t seed = 7);
double quantile_spread(std::vector<double> x);  // interquartile range

struct StabilityEstimate {
  double gamma = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  int points = 0;
};
StabilityEstimate stability_index_ecf(const std::vector<double>& samples, int boot = 200, std::uint64_t seed = 7);

struct GaussianityResult {
  double ks_distance = 0.0;
  double threshold = 0.0;          // 1.63 / sqrt(n)
  double threshold_estimated = 0.0;  // 1.031 / sqrt(n), parameters estimated
  bool pass = false;               // against the conservative threshold
};
GaussianityResult gaussianity_test(const std::vector<double>& samples);

enum class LimitMethod { automatic, kernel, grid };

struct LimitExperimentSpec {
  std::vector<double> t_grid{0.25, 0.5, 0.75, 1.0};
  std::vector<double> T_ladder{64, 128, 256, 512};
  int replicates = 400;
  std::uint64_t seed = 1;
  int threads = 1;
  LimitMethod method = LimitMethod::automatic;
  int cells_per_window = 256;  // grid spacing h = window extent / cells
  double lambda_floor = 1e-3;  // kernel method: lambda_min = lambda_floor / T
  double log_ratio = 1.25;
  double growth = 1.05;        // kernel method: outer cell growth factor
  double q = 30.0;
  double max_jumps = 16.0;
  int grid_pad = 4;            // grid method
  int grid_margin_cells = 16;

  void validate() const;
};

struct LimitExperimentReport {
  LimitRegime regime = LimitRegime::not_covered;
  int d = 1;
  double alpha = 0.0, beta = 0.0;
  std::string method;
  std::vector<double> t_grid, T_ladder;
  int replicates = 0;
  std::uint64_t seed = 0;
  // raw[(iT * nt + it) * R + r] = X*(T)(t); z = raw / normalizer[iT]
  std::vector<double> raw, z;
  std::vector<double> normalizer;
  std::vector<double> lambda_min, truncated_mass;
  std::vector<int> bins;
  ModelConstants constants;

  // statistics at t = 1
  std::vector<double> var_raw, var_z;
  std::vector<double> var_exact;      // d = 1 Gaussian regimes, Var X*(T)(1)
  ScalingFit scaling;       // variance (Gaussian regimes) or spread (stable regimes)
  double expected_exponent = 0.0;
  // Gaussian regimes
  std::vector<double> genbm_ratio;     // Var z / genbm target
  double genbm_target = 0.0;
  std::vector<double> cov_top;         // Cov(z[t_i], z[t_j]) at T_max, row-major
  double cov_max_rel_dev = 0.0;        // against min(t_i, t_j)
  GaussianityResult gaussianity;
  double c5_rate_ratio = 0.0;           // brownian_rate / (c5 |K''(0)|)
  // stable regimes
  std::vector<StabilityEstimate> stability;
  std::vector<double> spread_raw;
  double target_index = 0.0;

  double sample(std::size_t iT, std::size_t it, std::size_t r) const {
    return z[(iT * t_grid.size() + it) * replicates + r];
  }
  std::vector<double> samples_at(std::size_t iT, std::size_t it, bool normalized = true) const;
};

// Exact Var X*(T)(1) for d = 1, integrating the covariance over the dilated window.
AnalyticValue window_variance(const CharacteristicQuadruple& q, const WindowSpec& window, double T,
                              double lambda_min = 0.0);

// Normalizer of X*(T) in the given regime.
double limit_normalizer(LimitRegime regime, const CharacteristicQuadruple& q, const ModelConstants& c, double T);

LimitExperimentReport run_limit_experiment(const CharacteristicQuadruple& q, const WindowSpec& window,
                                           const LimitExperimentSpec& spec);

}  // namespace supcar
