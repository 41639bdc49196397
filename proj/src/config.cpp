#include "supcar/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace supcar {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

double num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

template <class T>
void opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

LevyMeasureSpec parse_levy(const json& j) {
  const std::string where = "quadruple.levy";
  if (!j.is_object() || !j.contains("family")) throw ConfigError(where + " needs a 'family'");
  const std::string f = j.at("family").get<std::string>();
  if (f == "none") {
    check_keys(j, {"family"}, where);
    return LevyMeasureSpec::none();
  }
  if (f == "gamma_subordinator") {
    check_keys(j, {"family", "shape", "rate"}, where);
    return LevyMeasureSpec::gamma_subordinator(num(j, "shape", where), num(j, "rate", where));
  }
  if (f == "inverse_gaussian") {
    check_keys(j, {"family", "alpha", "mu"}, where);
    return LevyMeasureSpec::inverse_gaussian(num(j, "alpha", where), num(j, "mu", where));
  }
  if (f == "tempered_stable") {
    check_keys(j, {"family", "beta", "theta", "c_plus", "c_minus"}, where);
    return LevyMeasureSpec::tempered_stable(num(j, "beta", where), num(j, "theta", where), num(j, "c_plus", where),
                                            num(j, "c_minus", where));
  }
  throw ConfigError("unsupported Levy family '" + f + "'");
}

json levy_json(const LevyMeasureSpec& w) {
  switch (w.family) {
    case LevyFamily::gamma_subordinator:
      return {{"family", w.name()}, {"shape", w.shape}, {"rate", w.rate}};
    case LevyFamily::inverse_gaussian:
      return {{"family", w.name()}, {"alpha", w.ig_alpha}, {"mu", w.ig_mu}};
    case LevyFamily::tempered_stable:
      return {{"family", w.name()}, {"beta", w.beta}, {"theta", w.theta}, {"c_plus", w.c_plus}, {"c_minus", w.c_minus}};
    case LevyFamily::none:
      break;
  }
  return {{"family", "none"}};
}

MixingMeasureSpec parse_mixing(const json& j) {
  const std::string where = "quadruple.mixing";
  if (!j.is_object() || !j.contains("family")) throw ConfigError(where + " needs a 'family'");
  const std::string f = j.at("family").get<std::string>();
  if (f == "gamma_mix") {
    check_keys(j, {"family", "H"}, where);
    return MixingMeasureSpec::gamma_mix(num(j, "H", where));
  }
  if (f == "point_mass") {
    check_keys(j, {"family", "lambda"}, where);
    return MixingMeasureSpec::point_mass(num(j, "lambda", where));
  }
  if (f == "reg_var") {
    check_keys(j, {"family", "alpha", "sv", "lambda_max"}, where);
    SlowlyVaryingSpec sv;
    if (j.contains("sv")) {
      const json& s = j.at("sv");
      check_keys(s, {"kind", "C", "k"}, where + ".sv");
      std::string kind = "constant";
      opt(s, "kind", kind, where + ".sv");
      if (kind == "constant") {
        sv.kind = SlowlyVaryingKind::constant;
        if (s.contains("k")) throw ConfigError("a constant slowly varying function takes no 'k'");
      } else if (kind == "log_power") {
        sv.kind = SlowlyVaryingKind::log_power;
        opt(s, "k", sv.k, where + ".sv");
      } else {
        throw ConfigError("unsupported slowly varying kind '" + kind + "'");
      }
      opt(s, "C", sv.C, where + ".sv");
    }
    double lmax = 1.0;
    opt(j, "lambda_max", lmax, where);
    return MixingMeasureSpec::reg_var(num(j, "alpha", where), sv, lmax);
  }
  throw ConfigError("unsupported mixing family '" + f + "'");
}

json mixing_json(const MixingMeasureSpec& m) {
  switch (m.family) {
    case MixingFamily::gamma_mix:
      return {{"family", m.name()}, {"H", m.H}};
    case MixingFamily::point_mass:
      return {{"family", m.name()}, {"lambda", m.lambda0}};
    case MixingFamily::reg_var: {
      json sv = {{"kind", m.sv.kind == SlowlyVaryingKind::constant ? "constant" : "log_power"}, {"C", m.sv.C}};
      if (m.sv.kind == SlowlyVaryingKind::log_power) sv["k"] = m.sv.k;
      return {{"family", m.name()}, {"alpha", m.alpha}, {"sv", sv}, {"lambda_max", m.lambda_max}};
    }
  }
  return {};
}

const char* method_name(LimitMethod m) {
  switch (m) {
    case LimitMethod::kernel:
      return "kernel";
    case LimitMethod::grid:
      return "grid";
    case LimitMethod::automatic:
      break;
  }
  return "automatic";
}

ExperimentConfig parse_json(const json& root) {
  if (root.is_object() && root.contains("manifest_version")) {
    if (!root.contains("config")) throw ConfigError("manifest carries no config");
    return parse_json(root.at("config"));
  }
  check_keys(root, {"seed", "quadruple", "simulation", "window", "experiment", "analytics", "probe", "$schema"},
             "config");
  ExperimentConfig c;
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }

  int d = 1;
  if (root.contains("quadruple")) {
    const json& q = root.at("quadruple");
    check_keys(q, {"d", "b", "levy", "mixing"}, "quadruple");
    opt(q, "d", d, "quadruple");
    opt(q, "b", c.quadruple.b, "quadruple");
    if (q.contains("levy")) c.quadruple.levy = parse_levy(q.at("levy"));
    if (!q.contains("mixing")) throw ConfigError("quadruple is missing 'mixing'");
    c.quadruple.mixing = parse_mixing(q.at("mixing"));
    c.has_quadruple = true;
  }
  if (d != 1 && d != 2 && root.contains("simulation")) throw ConfigError("simulation supports d = 1 or 2");
  c.quadruple.d = d;

  auto& s = c.simulation;
  s.d = d;
  if (d == 2) s.n = 1 << 9;
  if (root.contains("simulation")) {
    const json& j = root.at("simulation");
    const std::string w = "simulation";
    check_keys(j, {"n", "h", "lambda_bins", "lambda_min", "q", "pad", "bin_scheme", "log_ratio", "lambda_top",
                   "max_jumps", "replicates", "car_lambda"},
               w);
    opt(j, "n", s.n, w);
    opt(j, "h", s.h, w);
    opt(j, "lambda_bins", s.lambda_bins, w);
    opt(j, "lambda_min", s.lambda_min, w);
    opt(j, "q", s.q, w);
    opt(j, "pad", s.pad, w);
    std::string scheme = "quantile";
    opt(j, "bin_scheme", scheme, w);
    if (scheme == "quantile")
      s.bin_scheme = BinScheme::quantile;
    else if (scheme == "log")
      s.bin_scheme = BinScheme::log;
    else
      throw ConfigError("unknown bin_scheme '" + scheme + "'");
    opt(j, "log_ratio", s.log_ratio, w);
    opt(j, "lambda_top", s.lambda_top, w);
    opt(j, "max_jumps", s.max_jumps, w);
    opt(j, "replicates", c.simulation_replicates, w);
    opt(j, "car_lambda", c.car_lambda, w);
  }
  if (c.simulation_replicates < 1) throw ConfigError("simulation.replicates must be >= 1");
  if (!(c.car_lambda > 0.0)) throw ConfigError("simulation.car_lambda must be positive");

  c.window.d = d;
  if (root.contains("window")) {
    const json& j = root.at("window");
    check_keys(j, {"shape", "size"}, "window");
    std::string shape = "cube";
    opt(j, "shape", shape, "window");
    if (shape == "cube")
      c.window.shape = WindowShape::cube;
    else if (shape == "ball")
      c.window.shape = WindowShape::ball;
    else
      throw ConfigError("unknown window shape '" + shape + "'");
    opt(j, "size", c.window.size, "window");
  }

  auto& e = c.experiment;
  if (d == 2) e.T_ladder = {16, 32, 64};
  if (root.contains("experiment")) {
    const json& j = root.at("experiment");
    const std::string w = "experiment";
    check_keys(j, {"t_grid", "T_ladder", "replicates", "method", "cells_per_window", "lambda_floor", "log_ratio",
                   "growth", "q", "max_jumps", "grid_pad", "grid_margin_cells"},
               w);
    opt(j, "t_grid", e.t_grid, w);
    opt(j, "T_ladder", e.T_ladder, w);
    opt(j, "replicates", e.replicates, w);
    std::string method = "automatic";
    opt(j, "method", method, w);
    if (method == "automatic")
      e.method = LimitMethod::automatic;
    else if (method == "kernel")
      e.method = LimitMethod::kernel;
    else if (method == "grid")
      e.method = LimitMethod::grid;
    else
      throw ConfigError("unknown experiment method '" + method + "'");
    opt(j, "cells_per_window", e.cells_per_window, w);
    opt(j, "lambda_floor", e.lambda_floor, w);
    opt(j, "log_ratio", e.log_ratio, w);
    opt(j, "growth", e.growth, w);
    opt(j, "q", e.q, w);
    opt(j, "max_jumps", e.max_jumps, w);
    opt(j, "grid_pad", e.grid_pad, w);
    opt(j, "grid_margin_cells", e.grid_margin_cells, w);
  }

  if (root.contains("analytics")) {
    const json& j = root.at("analytics");
    check_keys(j, {"lags", "frequencies", "lambda_min"}, "analytics");
    opt(j, "lags", c.lags, "analytics");
    opt(j, "frequencies", c.frequencies, "analytics");
    opt(j, "lambda_min", c.analytics_lambda_min, "analytics");
    if (c.analytics_lambda_min < 0.0) throw ConfigError("analytics.lambda_min must be >= 0");
  }

  if (root.contains("probe")) {
    const json& j = root.at("probe");
    check_keys(j, {"function", "params", "grid"}, "probe");
    opt(j, "function", c.probe.function, "probe");
    opt(j, "params", c.probe.params, "probe");
    opt(j, "grid", c.probe.grid, "probe");
  }

  if (c.seed) c.set_seed(*c.seed);
  try {
    if (c.has_quadruple) c.quadruple.validate();
    c.window.validate();
    if (root.contains("simulation")) s.validate();
    if (root.contains("experiment")) e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return c;
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  simulation.seed = s;
  experiment.seed = s;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse_json(root);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_json(const ExperimentConfig& c) {
  json root;
  if (c.seed) root["seed"] = *c.seed;
  if (c.has_quadruple)
    root["quadruple"] = {{"d", c.quadruple.d},
                         {"b", c.quadruple.b},
                         {"levy", levy_json(c.quadruple.levy)},
                         {"mixing", mixing_json(c.quadruple.mixing)}};
  const auto& s = c.simulation;
  root["simulation"] = {{"n", s.n},
                        {"h", s.h},
                        {"lambda_bins", s.lambda_bins},
                        {"lambda_min", s.lambda_min},
                        {"q", s.q},
                        {"pad", s.pad},
                        {"bin_scheme", s.bin_scheme == BinScheme::log ? "log" : "quantile"},
                        {"log_ratio", s.log_ratio},
                        {"lambda_top", s.lambda_top},
                        {"max_jumps", s.max_jumps},
                        {"replicates", c.simulation_replicates},
                        {"car_lambda", c.car_lambda}};
  root["window"] = {{"shape", c.window.shape == WindowShape::ball ? "ball" : "cube"}, {"size", c.window.size}};
  const auto& e = c.experiment;
  root["experiment"] = {{"t_grid", e.t_grid},
                        {"T_ladder", e.T_ladder},
                        {"replicates", e.replicates},
                        {"method", method_name(e.method)},
                        {"cells_per_window", e.cells_per_window},
                        {"lambda_floor", e.lambda_floor},
                        {"log_ratio", e.log_ratio},
                        {"growth", e.growth},
                        {"q", e.q},
                        {"max_jumps", e.max_jumps},
                        {"grid_pad", e.grid_pad},
                        {"grid_margin_cells", e.grid_margin_cells}};
  root["analytics"] = {{"lags", c.lags}, {"frequencies", c.frequencies}, {"lambda_min", c.analytics_lambda_min}};
  root["probe"] = {{"function", c.probe.function}, {"params", c.probe.params}, {"grid", c.probe.grid}};
  return root.dump(2);
}

std::string config_digest(const ExperimentConfig& c) { return fnv1a_hex(config_json(c)); }

}  // namespace supcar
