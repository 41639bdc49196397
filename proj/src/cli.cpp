#include <charconv>
#include "supcar/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "supcar/config.hpp"
#include "supcar/gridio.hpp"
#include "supcar/parallel.hpp"
#include "supcar/regime.hpp"
#include "supcar/specfun.hpp"

namespace supcar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Signals a divergence verdict under --strict after the output has been written.
struct StrictFailure {};

struct Options {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  bool strict = false;
  std::vector<double> lags, freqs;
  int replicates = 0;
  std::string probe_function;
  std::vector<double> probe_params, probe_grid;
};

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17).ptr);
}

class Output {
public:
  Output(const std::string& dir, std::ostream& out) : dir_(dir), out_(out) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool to_stdout() const { return dir_.empty(); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& fn) {
    if (dir_.empty()) {
      fn(out_);
      return;
    }
    const fs::path p = fs::path(dir_) / name;
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    fn(f);
    if (!f) throw std::runtime_error("write failed for '" + p.string() + "'");
    files_.push_back(name);
  }
  void note(const std::string& name) { files_.push_back(name); }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void manifest(const std::string& sub, const ExperimentConfig& cfg) {
    if (dir_.empty()) return;
    std::sort(files_.begin(), files_.end());
    json m;
    m["manifest_version"] = 1;
    m["tool"] = "supcar-lab";
    m["version"] = kVersion;
    m["subcommand"] = sub;
    m["config_digest"] = config_digest(cfg);
    m["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    m["config"] = json::parse(config_json(cfg));
    m["outputs"] = files_;
    std::ofstream f(fs::path(dir_) / "manifest.json");
    f << m.dump(2) << "\n";
    if (!f) throw std::runtime_error("cannot write manifest.json");
  }

private:
  std::string dir_;
  std::ostream& out_;
  std::vector<std::string> files_;
};

json existence_json(const ExistenceReport& e) {
  json j;
  j["exists"] = to_string(e.exists);
  j["decided_by"] = e.decided_by;
  j["direct"] = to_string(e.direct);
  j["shortcut"] = to_string(e.shortcut);
  j["diagnostics"] = json::array();
  for (const auto& d : e.diagnostics)
    j["diagnostics"].push_back({{"name", d.name}, {"value", number(d.value)}, {"divergent", d.divergent}});
  return j;
}

json regime_json(const RegimeReport& r) {
  json j = existence_json(r.existence);
  j["dependence"] = to_string(r.dependence);
  j["limit_regime"] = to_string(r.limit);
  j["alpha"] = number(r.alpha);
  j["beta_bg"] = number(r.beta_bg);
  j["b"] = r.b;
  j["d"] = r.d;
  return j;
}

json constants_json(const ModelConstants& c) {
  return {{"d", c.d},           {"window_volume", number(c.window_volume)},
          {"base_variance", number(c.base_variance)},
          {"alpha", number(c.alpha)},
          {"c1", number(c.c1)}, {"c2", number(c.c2)},
          {"c3", number(c.c3)}, {"c4", number(c.c4)},
          {"c5", number(c.c5)}, {"brownian_rate", number(c.brownian_rate)},
          {"c6", number(c.c6)}, {"c7", number(c.c7)},
          {"c_plus", number(c.c_plus)}, {"c_minus", number(c.c_minus)}};
}

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json fit_json(const ScalingFit& f) {
  return {{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"se", number(f.se)},
          {"ci", {number(f.ci_lo), number(f.ci_hi)}}};
}

json report_json(const LimitExperimentReport& r) {
  json j;
  j["regime"] = to_string(r.regime);
  j["d"] = r.d;
  j["alpha"] = number(r.alpha);
  j["beta"] = number(r.beta);
  j["method"] = r.method;
  j["t_grid"] = vec(r.t_grid);
  j["T_ladder"] = vec(r.T_ladder);
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["normalizer"] = vec(r.normalizer);
  j["lambda_min"] = vec(r.lambda_min);
  j["truncated_mass"] = vec(r.truncated_mass);
  j["bins"] = r.bins;
  j["constants"] = constants_json(r.constants);
  j["var_raw"] = vec(r.var_raw);
  j["var_z"] = vec(r.var_z);
  j["var_exact"] = vec(r.var_exact);
  j["scaling"] = fit_json(r.scaling);
  j["scaling_statistic"] = r.spread_raw.empty() ? "variance" : "spread";
  j["expected_exponent"] = number(r.expected_exponent);
  j["genbm_target"] = number(r.genbm_target);
  j["genbm_ratio"] = vec(r.genbm_ratio);
  j["cov_top"] = vec(r.cov_top);
  j["cov_max_rel_dev"] = number(r.cov_max_rel_dev);
  j["gaussianity"] = {{"ks_distance", number(r.gaussianity.ks_distance)},
                      {"threshold", number(r.gaussianity.threshold)},
                      {"threshold_estimated", number(r.gaussianity.threshold_estimated)},
                      {"pass", r.gaussianity.pass}};
  j["c5_rate_ratio"] = number(r.c5_rate_ratio);
  j["stability"] = json::array();
  for (const auto& s : r.stability)
    j["stability"].push_back(
        {{"index", number(s.gamma)}, {"ci", {number(s.ci_lo), number(s.ci_hi)}}, {"points", s.points}});
  j["spread_raw"] = vec(r.spread_raw);
  j["target_index"] = number(r.target_index);
  return j;
}

using ProbeFn = std::function<SpecFunResult(const std::vector<double>&, double)>;

SpecFunResult plain(double v) { return {v, 0.0, false, false}; }

const std::map<std::string, std::pair<std::size_t, ProbeFn>>& probe_table() {
  static const std::map<std::string, std::pair<std::size_t, ProbeFn>> t = {
      {"bessel_k", {1, [](const auto& p, double x) { return bessel_k(p[0], x); }}},
      {"bessel_k_scaled", {1, [](const auto& p, double x) { return bessel_k_scaled(p[0], x); }}},
      {"log_xnu_bessel_k", {1, [](const auto& p, double x) { return plain(log_xnu_bessel_k(p[0], x)); }}},
      {"gamma", {0, [](const auto&, double x) { return gamma_fn(x); }}},
      {"lgamma", {0, [](const auto&, double x) { return plain(lgamma_fn(x)); }}},
      {"rgamma", {0, [](const auto&, double x) { return plain(rgamma_fn(x)); }}},
      {"gamma_upper", {1, [](const auto& p, double x) { return incomplete_gamma_upper(p[0], x); }}},
      {"gamma_lower", {1, [](const auto& p, double x) { return incomplete_gamma_lower(p[0], x); }}},
      {"gamma_upper_general", {1, [](const auto& p, double x) { return upper_gamma_general(p[0], x); }}},
      {"gamma_p", {1, [](const auto& p, double x) { return plain(gamma_p(p[0], x)); }}},
      {"gamma_p_inv", {1, [](const auto& p, double x) { return plain(gamma_p_inv(p[0], x)); }}},
      {"hyp2f1", {3, [](const auto& p, double x) { return hyp2f1(p[0], p[1], p[2], x); }}},
  };
  return t;
}

bool check_strict(bool ok, const Options& o, std::ostream& err, const std::string& what) {
  if (ok) return true;
  err << "supcar-lab: " << what << "\n";
  if (o.strict) throw StrictFailure{};
  return false;
}

void require_existence(const ExperimentConfig& cfg, const Options& o) {
  const auto ex = check_existence(cfg.quadruple);
  if (ex.exists == Verdict::yes) return;
  if (o.strict) throw StrictFailure{};
  throw std::domain_error("field existence is " + to_string(ex.exists) + " for this quadruple");
}

void write_table(Output& out, const std::string& name, const std::string& head,
                 const std::vector<double>& xs, const std::function<AnalyticValue(double)>& f, const Options& o,
                 std::ostream& err) {
  std::vector<AnalyticValue> vals;
  for (double x : xs) vals.push_back(f(x));
  out.write(name, [&](std::ostream& s) {
    s << head << ",value,est_error\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
      s << fmt(xs[i]) << "," << fmt(vals[i].finite ? vals[i].value : HUGE_VAL) << "," << fmt(vals[i].abs_error)
        << "\n";
  });
  bool ok = true;
  for (const auto& v : vals) ok = ok && v.finite && v.converged;
  check_strict(ok, o, err, "divergent or unconverged values in " + name);
}

int simulate_grids(const std::string& sub, ExperimentConfig& cfg, const Options& o, Output& out) {
  if (!cfg.seed) throw ConfigError("a seed is required: set \"seed\" in the config or pass --seed");
  const int R = cfg.simulation_replicates;
  if (R > 1 && out.to_stdout()) throw ConfigError("ensembles need --out");
  const bool car = sub == "simulate-car";
  std::unique_ptr<SupcarSimulator> sim;
  if (!car) {
    require_existence(cfg, o);
    sim = std::make_unique<SupcarSimulator>(cfg.quadruple, cfg.simulation);
  } else {
    cfg.simulation.validate();
  }
  auto draw = [&](std::size_t r) {
    if (!car) return sim->simulate_replicate(r);
    RngStream rng(cfg.simulation.seed, r);
    FieldGrid g = simulate_car(cfg.car_lambda, cfg.quadruple.levy, cfg.quadruple.b, cfg.simulation, rng);
    g.provenance.replicate = r;
    return g;
  };
  const std::string stem = car ? "car_" : "grid_";
  if (out.to_stdout()) {
    const FieldGrid g = draw(0);
    out.write("", [&](std::ostream& s) { write_grid_csv(g, s); });
    return exit_ok;
  }
  std::vector<std::string> names(R);
  for (int r = 0; r < R; ++r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04d.csv", stem.c_str(), r);
    names[r] = buf;
  }
  const std::vector<double> lags = cfg.lags.empty() ? std::vector<double>{0.0, 0.5, 1.0, 2.0, 4.0} : cfg.lags;
  const double extent = cfg.simulation.n * cfg.simulation.h;
  for (double l : lags)
    if (!(std::fabs(l) < extent - cfg.simulation.h / 2)) throw ConfigError("lag " + fmt(l) + " exceeds the grid");
  std::vector<std::vector<double>> products(R);
  parallel_for(R, o.threads, [&](std::size_t r) {
    const FieldGrid g = draw(r);
    write_grid_csv(g, out.path(names[r]));
    products[r] = lag_products(g, lags);
  });
  for (const auto& n : names) out.note(n);
  if (R < 2) return exit_ok;

  FieldGrid like;
  like.h = cfg.simulation.h;
  const auto est = ensemble_covariance(like, lags, products);
  const int d = cfg.simulation.d;
  out.write("covariance_empirical.csv", [&](std::ostream& s) {
    s << "lag,empirical,se,analytic\n";
    for (const auto& e : est) {
      const double a = car ? car_covariance(e.lag, cfg.car_lambda, cfg.quadruple.base_variance(), d)
                           : supcar_covariance(e.lag, cfg.quadruple, sim->diagnostics().lambda_min).value;
      s << fmt(e.lag) << "," << fmt(e.estimate) << "," << fmt(e.se) << "," << fmt(a) << "\n";
    }
  });
  return exit_ok;
}

int dispatch(const std::string& sub, const Options& o, std::ostream& stdout_, std::ostream& err) {
  if (o.config_path.empty() && sub != "specfun-probe") throw ConfigError("--config is required");
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!cfg.has_quadruple && sub != "specfun-probe") throw ConfigError("config has no quadruple");
  if (o.seed_given) cfg.set_seed(o.seed);
  if (!o.lags.empty()) cfg.lags = o.lags;
  if (!o.freqs.empty()) cfg.frequencies = o.freqs;
  if (o.replicates > 0) {
    cfg.simulation_replicates = o.replicates;
    cfg.experiment.replicates = o.replicates;
  }
  if (!o.probe_function.empty()) cfg.probe.function = o.probe_function;
  if (!o.probe_params.empty()) cfg.probe.params = o.probe_params;
  if (!o.probe_grid.empty()) cfg.probe.grid = o.probe_grid;

  Output out(o.out_dir, stdout_);
  const auto& q = cfg.quadruple;
  int code = exit_ok;
  bool strict_hit = false;
  try {
    if (sub == "classify") {
      const RegimeReport r = limit_regime(q);
      out.write("classify.json", [&](std::ostream& s) { s << regime_json(r).dump(2) << "\n"; });
      check_strict(r.existence.exists == Verdict::yes, o, err, "existence verdict is " + to_string(r.existence.exists));
    } else if (sub == "check-existence") {
      const ExistenceReport e = check_existence(q);
      const RajputRosinskiReport rr = check_rajput_rosinski(q);
      json j = existence_json(e);
      j["rajput_rosinski"] = {
          {"I0", number(rr.I0)}, {"I1", number(rr.I1)}, {"I_gauss", number(rr.I_gauss)}, {"finite", rr.finite()}};
      out.write("existence.json", [&](std::ostream& s) { s << j.dump(2) << "\n"; });
      check_strict(e.exists == Verdict::yes, o, err, "existence verdict is " + to_string(e.exists));
    } else if (sub == "covariance") {
      if (cfg.lags.empty()) throw ConfigError("no lags given (--lags or analytics.lags)");
      write_table(out, "covariance.csv", "lag", cfg.lags,
                  [&](double t) { return supcar_covariance(t, q, cfg.analytics_lambda_min); }, o, err);
    } else if (sub == "spectral") {
      if (cfg.frequencies.empty()) throw ConfigError("no frequencies given (--freqs or analytics.frequencies)");
      write_table(out, "spectral.csv", "frequency", cfg.frequencies,
                  [&](double w) { return supcar_spectral(w, q, cfg.analytics_lambda_min); }, o, err);
    } else if (sub == "constants") {
      const ModelConstants c = limit_constants(q, cfg.window);
      json j = constants_json(c);
      j["window"] = cfg.window.name();
      try {
        const AsymptoticConstants a = asymptotic_constants(q);
        j["asymptotic"] = {{"c3", number(a.c3.value)}, {"c3_closed", number(a.c3_closed)}, {"c4", number(a.c4.value)}};
      } catch (const std::exception& e) {
        j["asymptotic"] = {{"error", e.what()}};
      }
      out.write("constants.json", [&](std::ostream& s) { s << j.dump(2) << "\n"; });
      check_strict(std::isfinite(c.base_variance), o, err, "base variance is infinite");
    } else if (sub == "simulate-car" || sub == "simulate-supcar") {
      code = simulate_grids(sub, cfg, o, out);
    } else if (sub == "limit-experiment") {
      if (!cfg.seed) throw ConfigError("a seed is required: set \"seed\" in the config or pass --seed");
      if (out.to_stdout()) throw ConfigError("limit-experiment needs --out");
      require_existence(cfg, o);
      LimitExperimentSpec spec = cfg.experiment;
      spec.threads = o.threads;
      const LimitExperimentReport r = run_limit_experiment(q, cfg.window, spec);
      out.write("report.json", [&](std::ostream& s) { s << report_json(r).dump(2) << "\n"; });
      out.write("samples.csv", [&](std::ostream& s) {
        s << "t,T,replicate,z\n";
        for (std::size_t iT = 0; iT < r.T_ladder.size(); ++iT)
          for (std::size_t it = 0; it < r.t_grid.size(); ++it)
            for (int k = 0; k < r.replicates; ++k)
              s << fmt(r.t_grid[it]) << "," << fmt(r.T_ladder[iT]) << "," << k << "," << fmt(r.sample(iT, it, k))
                << "\n";
      });
      // variance (Gaussian regimes) or spread (stable regimes) of X*(T)(1) with the fitted power law
      out.write("scaling.csv", [&](std::ostream& s) {
        const auto& y = r.spread_raw.empty() ? r.var_raw : r.spread_raw;
        const bool fitted = r.scaling.slope != 0.0 || r.scaling.intercept != 0.0;
        s << "T,value,fitted,exact\n";
        for (std::size_t iT = 0; iT < r.T_ladder.size(); ++iT) {
          const double T = r.T_ladder[iT];
          s << fmt(T) << "," << fmt(y[iT]) << ","
            << fmt(fitted ? std::exp(r.scaling.intercept + r.scaling.slope * std::log(T)) : std::nan("")) << ","
            << fmt(iT < r.var_exact.size() ? r.var_exact[iT] : std::nan("")) << "\n";
        }
      });
    } else if (sub == "specfun-probe") {
      const auto& tab = probe_table();
      const auto it = tab.find(cfg.probe.function);
      if (it == tab.end()) throw ConfigError("unknown probe function '" + cfg.probe.function + "'");
      if (cfg.probe.params.size() != it->second.first)
        throw ConfigError(cfg.probe.function + " takes " + std::to_string(it->second.first) + " parameter(s)");
      if (cfg.probe.grid.empty()) throw ConfigError("probe grid is empty");
      std::vector<SpecFunResult> vals;
      for (double x : cfg.probe.grid) {
        try {
          vals.push_back(it->second.second(cfg.probe.params, x));
        } catch (const SpecFunError&) {
          vals.push_back({std::nan(""), std::nan(""), false, false});
        }
      }
      out.write("probe.csv", [&](std::ostream& s) {
        s << "x,value,est_error\n";
        for (std::size_t i = 0; i < vals.size(); ++i)
          s << fmt(cfg.probe.grid[i]) << "," << fmt(vals[i].value) << "," << fmt(vals[i].est_abs_error) << "\n";
      });
    } else {
      throw ConfigError("unknown subcommand '" + sub + "'");
    }
  } catch (const StrictFailure&) {
    strict_hit = true;
  }
  out.manifest(sub, cfg);
  return strict_hit ? exit_divergent : code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"supCAR random field laboratory", "supcar-lab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "experiment config (JSON) or a manifest.json");
  app.add_option("--out", o.out_dir, "output directory (default: stdout)");
  auto* seed_opt = app.add_option("--seed", o.seed, "override the config seed");
  app.add_option("--threads", o.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", o.strict, "exit 3 on divergence verdicts");

  app.add_subcommand("classify", "existence, dependence and limit regime of a quadruple");
  app.add_subcommand("check-existence", "integral conditions and the Rajput-Rosinski integrals");
  app.add_subcommand("covariance", "supCAR covariance at given lags")
      ->add_option("--lags", o.lags, "comma-separated lags")
      ->delimiter(',');
  app.add_subcommand("spectral", "supCAR spectral density at given frequencies")
      ->add_option("--freqs", o.freqs, "comma-separated frequencies")
      ->delimiter(',');
  app.add_subcommand("constants", "limit-theorem constants for the configured window");
  auto* car = app.add_subcommand("simulate-car", "CAR(1) field on a grid");
  auto* sup = app.add_subcommand("simulate-supcar", "supCAR field on a grid");
  for (auto* c : {car, sup}) {
    c->add_option("--replicates", o.replicates, "ensemble size")->check(CLI::PositiveNumber);
    c->add_option("--lags", o.lags, "lags of the ensemble covariance table")->delimiter(',');
  }
  auto* lim = app.add_subcommand("limit-experiment", "Monte Carlo check of the window-integral limit");
  lim->add_option("--replicates", o.replicates, "replicates per T")->check(CLI::PositiveNumber);
  auto* probe = app.add_subcommand("specfun-probe", "special function on a grid");
  probe->group("");
  probe->add_option("--function", o.probe_function, "function name");
  probe->add_option("--params", o.probe_params, "comma-separated parameters")->delimiter(',');
  probe->add_option("--grid", o.probe_grid, "comma-separated arguments")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "supcar-lab: " << e.what() << "\n\n" << app.help();
    return exit_config;
  }
  o.seed_given = seed_opt->count() > 0;
  if (o.threads == 0) o.threads = default_threads();
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    return dispatch(sub, o, out, err);
  } catch (const ConfigError& e) {
    err << "supcar-lab: config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "supcar-lab: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace supcar
