#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "supcar/analytics.hpp"
#include "supcar/limitlab.hpp"
#include "supcar/simulate.hpp"

namespace supcar {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProbeSpec {
  std::string function;
  std::vector<double> params;
  std::vector<double> grid;
};

struct ExperimentConfig {
  CharacteristicQuadruple quadruple;
  bool has_quadruple = false;
  SimulationConfig simulation;
  int simulation_replicates = 1;
  double car_lambda = 1.0;
  WindowSpec window;
  LimitExperimentSpec experiment;
  std::vector<double> lags, frequencies;
  double analytics_lambda_min = 0.0;
  ProbeSpec probe;
  std::optional<std::uint64_t> seed;

  void set_seed(std::uint64_t s);
};

// Parses a config document; a manifest is accepted and its embedded config is used.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Fully resolved config as canonical JSON (sorted keys, shortest round-trip numbers).
std::string config_json(const ExperimentConfig& cfg);
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace supcar
