#ifndef AIF_EXPERIMENTS_HPP
#define AIF_EXPERIMENTS_HPP

// Batch front-end: experiment configs, (k, K_p) sweeps, figure datasets,
// invariant reports and analysis reports, each written with a manifest that
// is itself a valid config for rerunning the command.

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aif/controller.hpp"
#include "aif/crn.hpp"
#include "aif/ensemble.hpp"
#include "aif/errors.hpp"
#include "aif/io.hpp"
#include "aif/lyapunov.hpp"
#include "aif/mean_ode.hpp"
#include "aif/model_json.hpp"
#include "aif/moment_analysis.hpp"
#include "aif/presets.hpp"

namespace aif {

inline constexpr const char* kToolName = "aifctl";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr std::size_t kPaperScaleTrajectories = 1000000;

using json = nlohmann::json;

enum class Mode { ClosedLoop, OpenLoop, Constitutive };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::ClosedLoop: return "closed_loop";
    case Mode::OpenLoop: return "open_loop";
    case Mode::Constitutive: return "constitutive";
  }
  return "closed_loop";
}

struct ExperimentConfig {
  std::string preset;  // empty for user models
  Network model = gene_expression_network(kGeneParams);
  Mode mode = Mode::ClosedLoop;
  ClosedLoopConfig controller = preset_controller(1);
  std::map<std::string, Count> initial;  // unspecified species start at 0
  std::optional<double> input_rate;      // constitutive mode; default u*
  std::vector<double> sweep_k;
  std::vector<double> sweep_kp;
  std::size_t n = 10000;
  double t_end = 40.0;
  std::size_t grid_points = 401;
  std::uint64_t seed = 1;
  double window = 0.25;
  double band = 0.02;
  double beta = 0.0;  // analyze only
  bool invariants = false;
  std::vector<std::pair<std::string, std::string>> covariances;
  std::string figure;        // set by reproduce
  std::string out = "out";   // never written to manifests

  TimeGrid grid() const { return TimeGrid::uniform(t_end, grid_points); }
  SeedPlan plan() const { return SeedPlan{seed}; }
};

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace detail {

inline FeedbackKind feedback_kind_from(const std::string& s, const std::string& path) {
  if (s == "none") return FeedbackKind::None;
  if (s == "on_off") return FeedbackKind::OnOff;
  if (s == "hill") return FeedbackKind::Hill;
  throw ConfigError(path + ": unknown feedback kind '" + s + "' (expected none, on_off or hill)");
}

inline std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "/" + std::to_string(i) + ": expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "/" + key + ": wrong type");
  }
}

}  // namespace detail

/// Parses an experiment config. A manifest is accepted too: its "config" block is used.
/// Relative model paths resolve against `base_dir`.
inline ExperimentConfig config_from_json(const json& input, const std::filesystem::path& base_dir = {}) {
  const json& j = (input.is_object() && input.contains("config") && input.contains("tool")) ? input.at("config") : input;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;

  cfg.preset = detail::get_as<std::string>(j, "preset", "", "");
  std::optional<Preset> preset;
  if (!cfg.preset.empty()) {
    preset = find_preset(cfg.preset);
    if (!preset) throw ConfigError("/preset: unknown preset '" + cfg.preset + "' (expected gene, maturation or dimerization)");
    cfg.model = preset->plant;
    cfg.controller = preset->controller;
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.is_string()) {
      std::filesystem::path p = m.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      json mj;
      try {
        mj = json::parse(read_text(p));
      } catch (const json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
      }
      cfg.model = network_from_json(mj, p.string() + ":");
    } else {
      cfg.model = network_from_json(m, "/model");
    }
  } else if (!preset) {
    throw ConfigError("config needs either 'preset' or 'model'");
  }

  const auto& names = cfg.model.species_names();
  auto species_at = [&](const std::string& name, const std::string& path) {
    auto i = cfg.model.find(name);
    if (!i) throw ConfigError(path + ": unknown species '" + name + "'");
    return *i;
  };
  if (!preset) {
    cfg.controller = ClosedLoopConfig{};
    cfg.controller.actuated = 0;
  }
  if (j.contains("controller")) {
    const auto& c = j.at("controller");
    if (!c.is_object()) throw ConfigError("/controller: expected an object");
    auto& ctl = cfg.controller;
    ctl.mu = detail::get_as<double>(c, "mu", "/controller", ctl.mu);
    ctl.theta = detail::get_as<double>(c, "theta", "/controller", ctl.theta);
    ctl.eta = detail::get_as<double>(c, "eta", "/controller", ctl.eta);
    ctl.k = detail::get_as<double>(c, "k", "/controller", ctl.k);
    if (c.contains("controlled")) ctl.controlled = species_at(detail::get_as<std::string>(c, "controlled", "/controller", ""), "/controller/controlled");
    else if (!preset) throw ConfigError("/controller: missing key 'controlled'");
    if (c.contains("actuated")) ctl.actuated = species_at(detail::get_as<std::string>(c, "actuated", "/controller", ""), "/controller/actuated");
    if (c.contains("feedback")) {
      const auto& f = c.at("feedback");
      if (!f.is_object()) throw ConfigError("/controller/feedback: expected an object");
      ctl.feedback.kind = detail::feedback_kind_from(detail::get_as<std::string>(f, "kind", "/controller/feedback", "none"),
                                                     "/controller/feedback/kind");
      ctl.feedback.gain = detail::get_as<double>(f, "Kp", "/controller/feedback", 0.0);
    }
  } else if (!preset && detail::get_as<std::string>(j, "mode", "", "closed_loop") != "open_loop") {
    throw ConfigError("config needs a 'controller' block");
  }

  const auto mode = detail::get_as<std::string>(j, "mode", "", "closed_loop");
  if (mode == "closed_loop") cfg.mode = Mode::ClosedLoop;
  else if (mode == "open_loop") cfg.mode = Mode::OpenLoop;
  else if (mode == "constitutive") cfg.mode = Mode::Constitutive;
  else throw ConfigError("/mode: expected closed_loop, open_loop or constitutive");

  if (j.contains("initial")) {
    const auto& init = j.at("initial");
    if (!init.is_object()) throw ConfigError("/initial: expected an object of species -> count");
    for (const auto& [name, v] : init.items()) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("/initial/" + name + ": expected a nonnegative integer");
      cfg.initial[name] = v.get<Count>();
    }
  }
  if (j.contains("input_rate")) cfg.input_rate = detail::get_as<double>(j, "input_rate", "", 0.0);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.contains("k")) cfg.sweep_k = detail::number_list(s.at("k"), "/sweep/k");
    if (s.contains("Kp")) cfg.sweep_kp = detail::number_list(s.at("Kp"), "/sweep/Kp");
  }
  cfg.n = detail::get_as<std::size_t>(j, "n", "", cfg.n);
  cfg.t_end = detail::get_as<double>(j, "t_end", "", cfg.t_end);
  cfg.grid_points = detail::get_as<std::size_t>(j, "grid_points", "", cfg.grid_points);
  cfg.seed = detail::get_as<std::uint64_t>(j, "seed", "", cfg.seed);
  cfg.window = detail::get_as<double>(j, "window", "", cfg.window);
  cfg.band = detail::get_as<double>(j, "band", "", cfg.band);
  cfg.beta = detail::get_as<double>(j, "beta", "", cfg.beta);
  cfg.invariants = detail::get_as<bool>(j, "invariants", "", cfg.invariants);
  cfg.figure = detail::get_as<std::string>(j, "figure", "", "");
  cfg.out = detail::get_as<std::string>(j, "out", "", cfg.out);
  if (j.contains("covariances")) {
    const auto& cv = j.at("covariances");
    if (!cv.is_array()) throw ConfigError("/covariances: expected an array of [a, b] pairs");
    for (std::size_t i = 0; i < cv.size(); ++i) {
      if (!cv[i].is_array() || cv[i].size() != 2 || !cv[i][0].is_string() || !cv[i][1].is_string()) {
        throw ConfigError("/covariances/" + std::to_string(i) + ": expected [\"A\", \"B\"]");
      }
      cfg.covariances.emplace_back(cv[i][0].get<std::string>(), cv[i][1].get<std::string>());
    }
  }

  // Validation
  if (cfg.n < 2) throw ConfigError("/n: ensemble size must be at least 2");
  if (cfg.grid_points < 2) throw ConfigError("/grid_points: at least two grid points required");
  if (!(cfg.t_end > 0.0)) throw ConfigError("/t_end: must be positive");
  if (!(cfg.window > 0.0 && cfg.window <= 1.0)) throw ConfigError("/window: must lie in (0, 1]");
  if (!(cfg.band > 0.0)) throw ConfigError("/band: must be positive");
  for (double k : cfg.sweep_k)
    if (!(k > 0.0)) throw ConfigError("/sweep/k: gains must be positive");
  for (double kp : cfg.sweep_kp)
    if (!(kp >= 0.0)) throw ConfigError("/sweep/Kp: gains must be nonnegative");
  if (!cfg.sweep_kp.empty() && cfg.controller.feedback.kind == FeedbackKind::None) {
    throw ConfigError("/sweep/Kp: a K_p sweep needs /controller/feedback/kind set to on_off or hill");
  }
  if (cfg.mode != Mode::OpenLoop) {
    try {
      cfg.controller.validate();
    } catch (const StructuralError& e) {
      throw ConfigError(std::string("/controller: ") + e.what());
    }
  }
  (void)names;
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  const std::string text = read_text(path);
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

/// Fully resolved config (model inlined, no output directory).
inline json config_to_json(const ExperimentConfig& cfg) {
  const auto& names = cfg.model.species_names();
  json j;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  if (!cfg.figure.empty()) j["figure"] = cfg.figure;
  j["model"] = network_to_json(cfg.model);
  j["mode"] = to_string(cfg.mode);
  const auto& c = cfg.controller;
  j["controller"] = {{"mu", c.mu},
                     {"theta", c.theta},
                     {"eta", c.eta},
                     {"k", c.k},
                     {"feedback", {{"kind", to_string(c.feedback.kind)}, {"Kp", c.feedback.gain}}},
                     {"controlled", names.at(c.controlled)},
                     {"actuated", names.at(c.actuated)}};
  j["initial"] = json::object();
  for (const auto& [k, v] : cfg.initial) j["initial"][k] = v;
  if (cfg.input_rate) j["input_rate"] = *cfg.input_rate;
  if (!cfg.sweep_k.empty() || !cfg.sweep_kp.empty()) {
    j["sweep"] = json::object();
    if (!cfg.sweep_k.empty()) j["sweep"]["k"] = cfg.sweep_k;
    if (!cfg.sweep_kp.empty()) j["sweep"]["Kp"] = cfg.sweep_kp;
  }
  j["n"] = cfg.n;
  j["t_end"] = cfg.t_end;
  j["grid_points"] = cfg.grid_points;
  j["seed"] = cfg.seed;
  j["window"] = cfg.window;
  j["band"] = cfg.band;
  j["beta"] = cfg.beta;
  j["invariants"] = cfg.invariants;
  j["covariances"] = json::array();
  for (const auto& [a, b] : cfg.covariances) j["covariances"].push_back({a, b});
  return j;
}

inline std::string model_hash(const Network& network) { return "sha256:" + sha256_hex(network_to_json(network).dump()); }

/// Seed key of a (k, K_p) cell; depends on the values, not the grid position,
/// so permuting a grid only permutes rows.
inline std::uint64_t cell_key(double k, double kp) {
  return splitmix64(std::bit_cast<std::uint64_t>(k)) ^ (splitmix64(std::bit_cast<std::uint64_t>(kp) ^ 0xa5a5a5a5a5a5a5a5ULL) << 1);
}

inline json make_manifest(const ExperimentConfig& cfg, const std::string& command, const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config"] = config_to_json(cfg);
  m["model_hash"] = model_hash(cfg.model);
  m["seed_plan"] = {{"base_seed", cfg.seed},
                    {"rng", SeedPlan::algorithm},
                    {"cell_seed", "sweep cells and figure panels use SeedPlan{splitmix64(base_seed ^ splitmix64(cell_key(k, Kp)))}"},
                    {"batches", "trajectories split into min(n, 32) contiguous blocks merged in block order"}};
  m["n"] = cfg.n;
  m["grid"] = {{"t_end", cfg.t_end}, {"points", cfg.grid_points}};
  m["outputs"] = outputs;
  return m;
}

// ---------------------------------------------------------------------------
// Experiment assembly

struct Experiment {
  Network network;
  std::optional<ClosedLoopNetwork> closed;
  std::vector<Observable> observables;
  State x0;
  std::size_t controlled = 0;  // index of X_l in network
};

/// Builds the simulated network for `cfg`, optionally overriding k and the feedback gain.
inline Experiment build_experiment(const ExperimentConfig& cfg, std::optional<double> k = {},
                                   std::optional<double> kp = {}) {
  auto ctl = cfg.controller;
  if (k) ctl.k = *k;
  if (kp) ctl.feedback.gain = *kp;

  auto make = [&](Network net, std::optional<ClosedLoopNetwork> closed, std::vector<Observable> obs) {
    State x0{std::vector<Count>(net.dimension(), 0), 0.0};
    for (const auto& [name, v] : cfg.initial) {
      auto i = net.find(name);
      if (!i) throw ConfigError("/initial/" + name + ": unknown species");
      x0.counts[*i] = v;
    }
    return Experiment{std::move(net), std::move(closed), std::move(obs), std::move(x0), ctl.controlled};
  };

  switch (cfg.mode) {
    case Mode::ClosedLoop: {
      auto cl = close_loop(cfg.model, ctl);
      auto obs = closed_loop_observables(cl, cfg.invariants);
      Network net = cl.network;
      return make(std::move(net), std::move(cl), std::move(obs));
    }
    case Mode::OpenLoop:
      return make(cfg.model, std::nullopt, species_observables(cfg.model));
    case Mode::Constitutive: {
      const double u = cfg.input_rate ? *cfg.input_rate
                                      : nominal_input(linearize_propensities(cfg.model), ctl.controlled, ctl.mu,
                                                      ctl.theta, ctl.actuated);
      auto reactions = cfg.model.reactions();
      Reaction r{std::vector<Count>(cfg.model.dimension(), 0), std::vector<Count>(cfg.model.dimension(), 0), MassAction{u}};
      r.products[ctl.actuated] = 1;
      reactions.push_back(std::move(r));
      Network net(cfg.model.species_names(), std::move(reactions), cfg.model.name() + "+constitutive",
                  cfg.model.description());
      auto obs = species_observables(net);
      return make(std::move(net), std::nullopt, std::move(obs));
    }
  }
  throw ConfigError("unknown mode");
}

inline EnsembleStats run_experiment(const Experiment& ex, const ExperimentConfig& cfg, const SeedPlan& plan,
                                    unsigned threads) {
  return run_ensemble(ex.network, ex.x0, cfg.grid(), ex.observables, EnsembleOptions{cfg.n, plan, threads});
}

// ---------------------------------------------------------------------------
// simulate

inline std::string trajectory_csv(const EnsembleStats& stats, const Network& net,
                                  const std::vector<std::pair<std::string, std::string>>& covariances) {
  const auto& names = net.species_names();
  std::vector<std::string> header{"time"};
  for (const auto& s : names) header.push_back("mean:" + s);
  for (const auto& s : names) header.push_back("var:" + s);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [a, b] : covariances) {
    auto ia = stats.find(a), ib = stats.find(b);
    if (!ia || !ib) throw ConfigError("/covariances: unknown observable in pair (" + a + ", " + b + ")");
    pairs.emplace_back(*ia, *ib);
    header.push_back("cov:" + a + ":" + b);
  }
  CsvWriter csv(header);
  for (std::size_t g = 0; g < stats.times.size(); ++g) {
    std::vector<std::string> row{format_number(stats.times[g])};
    const auto& p = stats.points[g];
    for (std::size_t i = 0; i < names.size(); ++i) row.push_back(format_number(p.mean(i)));
    for (std::size_t i = 0; i < names.size(); ++i) row.push_back(format_number(p.variance(i)));
    for (auto [a, b] : pairs) row.push_back(format_number(p.covariance(a, b)));
    csv.row(std::move(row));
  }
  return csv.str();
}

struct CommandOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  std::string summary;
};

inline std::filesystem::path write_manifest(const ExperimentConfig& cfg, const std::string& command,
                                            const std::string& stem, const std::vector<std::string>& outputs) {
  const auto path = std::filesystem::path(cfg.out) / (stem + ".manifest.json");
  write_text(path, make_manifest(cfg, command, outputs).dump(2) + "\n");
  return path;
}

inline CommandOutput cmd_simulate(const ExperimentConfig& cfg, unsigned threads = 1) {
  const auto ex = build_experiment(cfg);
  const auto stats = run_experiment(ex, cfg, cfg.plan(), threads);
  const auto csv_path = std::filesystem::path(cfg.out) / "simulate.csv";
  write_text(csv_path, trajectory_csv(stats, ex.network, cfg.covariances));
  CommandOutput out;
  out.files = {csv_path, write_manifest(cfg, "simulate", "simulate", {"simulate.csv"})};
  try {
    const auto est = stationary_stats(stats, cfg.window);
    const auto& name = ex.network.species_names()[ex.controlled];
    out.summary = "stationary mean " + name + " = " + format_number(est.mean_of(ex.controlled)) + ", variance = " +
                  format_number(est.variance(ex.controlled));
  } catch (const ConfigError&) {
    // grid too coarse for a tail window; the CSV is still complete
  }
  return out;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCell {
  double k = 0.0;
  double kp = 0.0;
  double ssa_mean = NAN;
  double ssa_variance = NAN;
  double ssa_variance_se = NAN;
  std::optional<double> formula_variance;
  std::optional<double> relative_error;
  std::optional<double> settling_time;
  double beta = NAN;
  double beta_se = NAN;
  std::optional<bool> guard_ok;
  bool z2_growing = false;
  std::optional<bool> hurwitz;
  bool settled = false;
  std::string note;
};

/// Lyapunov approximation of Var(X_l) for the plant under PI gains (k, beta).
/// nullopt for non-unimolecular plants; throws DomainError when R is not Hurwitz.
inline std::optional<double> approximate_variance(const ExperimentConfig& cfg, double k, double beta) {
  if (!is_unimolecular(cfg.model)) return std::nullopt;
  const auto& c = cfg.controller;
  const auto lin = linearize_propensities(cfg.model);
  const auto m = build_R_Q(lin, c.controlled, c.actuated, c.mu, c.theta, k, beta);
  const auto sigma = solve_lyapunov(m.R, m.Q);
  const auto l = static_cast<Eigen::Index>(c.controlled);
  return sigma(l, l);
}

inline SweepCell evaluate_cell(const ExperimentConfig& cfg, double k, double kp, unsigned threads = 1) {
  SweepCell cell;
  cell.k = k;
  cell.kp = kp;
  try {
    const auto ex = build_experiment(cfg, k, kp);
    if (!ex.closed) throw ConfigError("sweeps require mode closed_loop");
    const auto stats = run_experiment(ex, cfg, cfg.plan().derive(cell_key(k, kp)), threads);
    const auto est = stationary_stats(stats, cfg.window);
    const auto batches = batch_stationary_stats(stats, cfg.window);
    const std::size_t l = ex.controlled;
    const auto fb = stats.find("F");
    cell.ssa_mean = est.mean_of(l);
    cell.ssa_variance = est.variance(l);
    cell.ssa_variance_se = batch_standard_error(batches, [&](const auto& b) { return b.variance(l); });
    cell.beta = estimate_beta(est, fb, l);
    cell.beta_se = batch_standard_error(batches, [&](const auto& b) { return estimate_beta(b, fb, l); });
    const auto means = stats.mean_series(l);
    cell.settling_time = settling_time(stats.times, means, cfg.controller.set_point(), cfg.band);
    cell.z2_growing = growth_test(stats, ex.closed->z2(), cfg.window).growing;
    cell.settled = cell.settling_time.has_value() && !cell.z2_growing;

    if (is_unimolecular(cfg.model)) {
      const auto& c = cfg.controller;
      const double u = nominal_input(linearize_propensities(cfg.model), c.controlled, c.mu, c.theta, c.actuated);
      const auto guard = ergodicity_guard(c.feedback.kind, kp, u, c.mu);
      cell.guard_ok = guard.ok;
      try {
        cell.formula_variance = approximate_variance(cfg, k, cell.beta);
        cell.hurwitz = true;
        cell.relative_error = std::abs(cell.ssa_variance - *cell.formula_variance) / cell.ssa_variance;
      } catch (const DomainError&) {
        cell.hurwitz = false;
        cell.note = "R not Hurwitz";
      }
    }
    if (cell.z2_growing) cell.note += std::string(cell.note.empty() ? "" : "; ") + "non-ergodic: Z2 mean grows";
    else if (!cell.settling_time) cell.note += std::string(cell.note.empty() ? "" : "; ") + "mean not settled";
  } catch (const std::exception& e) {
    cell.note = std::string("failed: ") + e.what();
  }
  return cell;
}

inline std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg, unsigned threads = 1) {
  const auto ks = cfg.sweep_k.empty() ? std::vector<double>{cfg.controller.k} : cfg.sweep_k;
  const auto kps = cfg.sweep_kp.empty() ? std::vector<double>{cfg.controller.feedback.gain} : cfg.sweep_kp;
  std::vector<SweepCell> out;
  for (double k : ks)
    for (double kp : kps) out.push_back(evaluate_cell(cfg, k, kp, threads));
  return out;
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells, FeedbackKind kind) {
  CsvWriter csv({"k", "Kp", "feedback", "ssa_mean", "ssa_var", "ssa_var_se", "formula_var", "rel_error",
                 "settling_time", "beta", "beta_se", "guard_ok", "z2_growing", "hurwitz", "settled", "note"});
  auto flag = [](std::optional<bool> b) { return b ? std::string(*b ? "1" : "0") : std::string(); };
  for (const auto& c : cells) {
    csv.row({format_number(c.k), format_number(c.kp), to_string(kind), format_number(c.ssa_mean),
             format_number(c.ssa_variance), format_number(c.ssa_variance_se), format_optional(c.formula_variance),
             format_optional(c.relative_error), format_optional(c.settling_time), format_number(c.beta),
             format_number(c.beta_se), flag(c.guard_ok), c.z2_growing ? "1" : "0", flag(c.hurwitz),
             c.settled ? "1" : "0", c.note});
  }
  return csv.str();
}

inline CommandOutput cmd_sweep(const ExperimentConfig& cfg, unsigned threads = 1) {
  const auto cells = run_sweep(cfg, threads);
  const auto path = std::filesystem::path(cfg.out) / "sweep.csv";
  write_text(path, sweep_csv(cells, cfg.controller.feedback.kind));
  CommandOutput out;
  out.files = {path, write_manifest(cfg, "sweep", "sweep", {"sweep.csv"})};
  std::size_t settled = 0;
  for (const auto& c : cells) {
    settled += c.settled;
    if (c.guard_ok && !*c.guard_ok) out.warnings.push_back("k=" + format_number(c.k) + " Kp=" + format_number(c.kp) + ": ergodicity guard violated");
  }
  out.summary = std::to_string(cells.size()) + " cells, " + std::to_string(settled) + " settled";
  return out;
}

// ---------------------------------------------------------------------------
// invariants

inline std::vector<InvariantRow> run_invariants(ExperimentConfig cfg, unsigned threads = 1) {
  cfg.invariants = true;
  const auto ex = build_experiment(cfg);
  if (!ex.closed) throw ConfigError("invariants require mode closed_loop");
  const auto stats = run_experiment(ex, cfg, cfg.plan(), threads);
  return invariant_report(stats, *ex.closed, cfg.window);
}

inline CommandOutput cmd_invariants(ExperimentConfig cfg, unsigned threads = 1) {
  cfg.invariants = true;
  const auto rows = run_invariants(cfg, threads);
  CsvWriter csv({"invariant", "measured", "predicted", "relative_deviation"});
  std::string table;
  for (const auto& r : rows) {
    csv.row({r.name, format_number(r.measured), format_number(r.predicted), format_number(r.relative_deviation)});
    table += r.name + "  measured=" + format_number(r.measured) + "  predicted=" + format_number(r.predicted) +
             "  rel.dev=" + format_number(r.relative_deviation) + "\n";
  }
  const auto path = std::filesystem::path(cfg.out) / "invariants.csv";
  write_text(path, csv.str());
  CommandOutput out;
  out.files = {path, write_manifest(cfg, "invariants", "invariants", {"invariants.csv"})};
  out.summary = table;
  return out;
}

// ---------------------------------------------------------------------------
// analyze

namespace detail {

inline json matrix_json(const Eigen::MatrixXd& M) {
  json out = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace detail

struct AnalysisReport {
  json report;
  bool valid = false;
};

/// Moment-closure analysis at (k, beta) from the config. Throws AnalysisError for
/// non-unimolecular plants; a non-Hurwitz R yields valid == false and no Sigma.
inline AnalysisReport analyze(const ExperimentConfig& cfg) {
  const auto& c = cfg.controller;
  const auto& names = cfg.model.species_names();
  const auto lin = linearize_propensities(cfg.model);
  const auto m = build_R_Q(lin, c.controlled, c.actuated, c.mu, c.theta, c.k, cfg.beta);
  json r;
  r["inputs"] = {{"mu", c.mu}, {"theta", c.theta}, {"eta", c.eta}, {"k", c.k}, {"beta", cfg.beta},
                 {"controlled", names[c.controlled]}, {"actuated", names[c.actuated]}, {"preset", cfg.preset},
                 {"model_hash", model_hash(cfg.model)}};
  r["nominal_input"] = m.c;
  r["stationary_mean"] = detail::vector_json(m.stationary_mean);
  r["R"] = detail::matrix_json(m.R);
  r["Q"] = detail::matrix_json(m.Q);
  r["D"] = detail::vector_json(m.D);
  json ev = json::array();
  const auto eig = eigenvalues(m.R);
  for (Eigen::Index i = 0; i < eig.size(); ++i) ev.push_back({{"re", eig(i).real()}, {"im", eig(i).imag()}});
  r["eigenvalues_R"] = ev;
  const bool hurwitz = is_hurwitz(m.R);
  r["hurwitz"] = hurwitz;
  const auto guard = ergodicity_guard(c.feedback.kind, c.feedback.gain, m.c, c.mu);
  r["ergodicity_guard"] = {{"ok", guard.ok}, {"message", guard.message}};
  const auto zero = pi_zero(c.k, cfg.beta, c.theta);
  r["pi_zero"] = zero ? json(*zero) : json(nullptr);

  AnalysisReport out;
  if (hurwitz) {
    const auto sigma = solve_lyapunov(m.R, m.Q);
    r["Sigma"] = detail::matrix_json(sigma);
    r["lyapunov_residual"] = lyapunov_residual(m.R, m.Q, sigma);
    r["variance_controlled"] = sigma(static_cast<Eigen::Index>(c.controlled), static_cast<Eigen::Index>(c.controlled));
    r["message"] = "";
    out.valid = true;
  } else {
    r["Sigma"] = nullptr;
    r["variance_controlled"] = nullptr;
    r["message"] = "approximation outside validity domain: R is not Hurwitz";
  }

  json closed = json::object();
  if (auto preset = find_preset(cfg.preset); preset && network_to_json(preset->plant) == network_to_json(cfg.model)) {
    if (preset->gene) {
      const auto& p = *preset->gene;
      json g;
      g["openloop_variance"] = gene_openloop_variance(p, c.mu, c.theta);
      g["stability_margin"] = gene_stability_margin(p, c.theta, c.k, cfg.beta);
      g["stable"] = gene_is_stable(p, c.theta, c.k, cfg.beta);
      g["large_beta_limit"] = gene_variance_large_beta_limit(p, c.mu, c.theta);
      g["variance"] = g["stable"].get<bool>() ? json(gene_variance_closed_form(p, c.mu, c.theta, c.k, cfg.beta)) : json(nullptr);
      const bool integral_ok = gene_is_stable(p, c.theta, c.k, 0.0);
      g["integral_variance"] = integral_ok ? json(gene_integral_variance(p, c.mu, c.theta, c.k)) : json(nullptr);
      g["variance_ratio"] = integral_ok ? json(gene_variance_ratio(p, c.mu, c.theta, c.k)) : json(nullptr);
      closed["gene"] = g;
    }
    if (preset->maturation) {
      const auto& p = *preset->maturation;
      const auto co = maturation_stability_coefficients(p, c.theta, c.k);
      json mj;
      mj["openloop_variance"] = maturation_openloop_variance(p, c.mu, c.theta);
      mj["beta_bound"] = co.beta_bound;
      mj["quadratic"] = {co.quad_a, co.sigma1, co.sigma0};
      mj["stable"] = maturation_stability(p, c.theta, c.k, cfg.beta);
      const auto iv = maturation_beta_interval(p, c.theta, c.k);
      mj["beta_interval"] = iv ? json({iv->first, iv->second}) : json(nullptr);
      mj["variance"] = mj["stable"].get<bool>() ? json(maturation_variance_closed_form(p, c.mu, c.theta, c.k, cfg.beta))
                                                : json(nullptr);
      closed["maturation"] = mj;
    }
  }
  r["closed_form"] = closed;
  r["valid"] = out.valid;
  out.report = std::move(r);
  return out;
}

inline CommandOutput cmd_analyze(const ExperimentConfig& cfg) {
  const auto a = analyze(cfg);
  const auto path = std::filesystem::path(cfg.out) / "analysis.json";
  write_text(path, a.report.dump(2) + "\n");
  CommandOutput out;
  out.files = {path, write_manifest(cfg, "analyze", "analysis", {"analysis.json"})};
  if (!a.valid) throw DomainError(a.report["message"].get<std::string>() + " (report written to " + path.string() + ")");
  out.summary = "Var(" + cfg.model.species_names()[cfg.controller.controlled] +
                ") ~ " + format_number(a.report["variance_controlled"].get<double>());
  return out;
}

// ---------------------------------------------------------------------------
// reproduce

/// One figure dataset: network x feedback x panel.
/// Panels: E (mean trajectories), V (variance trajectories), VS (stationary
/// variance grid), ST (settling-time grid), RE (relative error grid), Beta
/// (effective gain grid); plus the analytic maturation panel "mat-NM".
struct FigureSpec {
  std::string id;
  std::string preset;
  FeedbackKind kind = FeedbackKind::OnOff;
  std::string panel;
  std::vector<double> k;
  std::vector<double> kp;
};

inline std::vector<FigureSpec> figure_catalog() {
  struct Family {
    std::string net, preset, fb;
    FeedbackKind kind;
    std::vector<double> k, kp, trajectory_kp;
  };
  const std::vector<Family> families{
      {"gene", "gene", "prop", FeedbackKind::OnOff, {1, 2, 3, 5, 7}, {0, 5, 10, 15, 20, 25}, {0, 5, 10, 20, 30}},
      {"gene", "gene", "hill", FeedbackKind::Hill, {1, 2, 3, 5, 7}, {0, 5, 10, 20, 30}, {0, 5, 10, 20, 30}},
      {"mat", "maturation", "prop", FeedbackKind::OnOff, {1, 2, 3, 4, 5}, {0, 0.5, 1, 2, 3}, {0, 1, 2, 3}},
      {"mat", "maturation", "hill", FeedbackKind::Hill, {1, 2, 3, 4, 5}, {0, 5, 10, 20}, {0, 5, 10, 20}},
      {"dimer", "dimerization", "prop", FeedbackKind::OnOff, {1, 2, 3, 5, 7}, {0, 5, 10, 20}, {0, 5, 10, 20}},
      {"dimer", "dimerization", "hill", FeedbackKind::Hill, {1, 2, 3, 5, 7}, {0, 5, 10, 20}, {0, 5, 10, 20}},
  };
  std::vector<FigureSpec> out;
  for (const auto& f : families) {
    for (const std::string panel : {"E", "V", "VS", "ST", "RE", "Beta"}) {
      if (panel == "RE" && f.net == "dimer") continue;  // no closed form for the bimolecular network
      const bool traj = panel == "E" || panel == "V";
      out.push_back({f.net + "-" + f.fb + "-" + panel, f.preset, f.kind, panel,
                     traj ? std::vector<double>{3.0} : f.k, traj ? f.trajectory_kp : f.kp});
    }
  }
  out.push_back({"mat-NM", "maturation", FeedbackKind::None, "NM", {3.0}, {}});
  return out;
}

inline std::optional<FigureSpec> find_figure(std::string_view id) {
  for (auto& f : figure_catalog())
    if (f.id == id) return f;
  return std::nullopt;
}

inline std::string catalog_listing() {
  std::string s;
  for (const auto& f : figure_catalog()) s += "  " + f.id + "\n";
  return s;
}

/// Default config of a figure: the preset with its feedback kind and grids.
inline ExperimentConfig figure_config(const FigureSpec& fig) {
  json j{{"preset", fig.preset}, {"figure", fig.id}};
  auto cfg = config_from_json(j);
  cfg.controller.feedback.kind = fig.kind;
  cfg.sweep_k = fig.k;
  cfg.sweep_kp = fig.kp;
  return cfg;
}

inline std::string figure_csv(const FigureSpec& fig, const ExperimentConfig& cfg, unsigned threads) {
  const auto& c = cfg.controller;
  if (fig.panel == "NM") {
    const auto& p = *find_preset("maturation")->maturation;
    const double k = cfg.sweep_k.empty() ? c.k : cfg.sweep_k.front();
    const auto iv = maturation_beta_interval(p, c.theta, k);
    if (!iv) throw DomainError("no stable beta interval for k = " + format_number(k));
    const double ol = maturation_openloop_variance(p, c.mu, c.theta);
    CsvWriter csv({"beta", "variance", "log_variance", "log_openloop_variance"});
    const std::size_t N = 200;
    for (std::size_t i = 1; i < N; ++i) {
      const double beta = iv->first + (iv->second - iv->first) * static_cast<double>(i) / static_cast<double>(N);
      const double v = maturation_variance_closed_form(p, c.mu, c.theta, k, beta);
      csv.row({format_number(beta), format_number(v), format_number(std::log(v)), format_number(std::log(ol))});
    }
    return csv.str();
  }

  if (fig.panel == "E" || fig.panel == "V") {
    const double k = cfg.sweep_k.empty() ? c.k : cfg.sweep_k.front();
    std::vector<std::string> header{"time", fig.panel == "E" ? "set_point" : "constitutive_variance"};
    std::vector<std::vector<double>> series;
    std::vector<double> times;
    for (double kp : cfg.sweep_kp) {
      const auto ex = build_experiment(cfg, k, kp);
      const auto stats = run_experiment(ex, cfg, cfg.plan().derive(cell_key(k, kp)), threads);
      series.push_back(fig.panel == "E" ? stats.mean_series(ex.controlled) : stats.variance_series(ex.controlled));
      times = stats.times;
      header.push_back((fig.panel == "E" ? "mean:Kp=" : "var:Kp=") + format_number(kp));
    }
    std::string reference;
    if (fig.panel == "E") {
      reference = format_number(c.set_point());
    } else if (auto preset = find_preset(cfg.preset)) {
      if (preset->gene) reference = format_number(gene_openloop_variance(*preset->gene, c.mu, c.theta));
      if (preset->maturation) reference = format_number(maturation_openloop_variance(*preset->maturation, c.mu, c.theta));
    }
    CsvWriter csv(header);
    for (std::size_t g = 0; g < times.size(); ++g) {
      std::vector<std::string> row{format_number(times[g]), reference};
      for (const auto& s : series) row.push_back(format_number(s[g]));
      csv.row(std::move(row));
    }
    return csv.str();
  }

  const auto cells = run_sweep(cfg, threads);
  if (fig.panel == "VS") {
    CsvWriter csv({"k", "Kp", "ssa_var", "ssa_var_se", "settled"});
    for (const auto& x : cells)
      csv.row({format_number(x.k), format_number(x.kp), format_number(x.ssa_variance), format_number(x.ssa_variance_se),
               x.settled ? "1" : "0"});
    return csv.str();
  }
  if (fig.panel == "ST") {
    CsvWriter csv({"k", "Kp", "settling_time", "settled"});
    for (const auto& x : cells)
      csv.row({format_number(x.k), format_number(x.kp), format_optional(x.settling_time), x.settled ? "1" : "0"});
    return csv.str();
  }
  if (fig.panel == "RE") {
    CsvWriter csv({"k", "Kp", "ssa_var", "formula_var", "rel_error", "beta", "settled"});
    for (const auto& x : cells)
      csv.row({format_number(x.k), format_number(x.kp), format_number(x.ssa_variance),
               format_optional(x.formula_variance), format_optional(x.relative_error), format_number(x.beta),
               x.settled ? "1" : "0"});
    return csv.str();
  }
  CsvWriter csv({"k", "Kp", "beta", "beta_se"});
  for (const auto& x : cells)
    csv.row({format_number(x.k), format_number(x.kp), format_number(x.beta), format_number(x.beta_se)});
  return csv.str();
}

/// Writes <out>/<id>.csv and its manifest. `cfg` defaults to figure_config(id).
inline CommandOutput cmd_reproduce(const std::string& id, std::optional<ExperimentConfig> cfg = {},
                                   unsigned threads = 1) {
  const auto fig = find_figure(id);
  if (!fig) throw ConfigError("unknown figure id '" + id + "'; catalog:\n" + catalog_listing());
  ExperimentConfig c = cfg ? *cfg : figure_config(*fig);
  c.figure = id;
  const auto csv_path = std::filesystem::path(c.out) / (id + ".csv");
  write_text(csv_path, figure_csv(*fig, c, threads));
  CommandOutput out;
  out.files = {csv_path, write_manifest(c, "reproduce", id, {id + ".csv"})};
  out.summary = "wrote " + csv_path.string();
  return out;
}

}  // namespace aif

#endif  // AIF_EXPERIMENTS_HPP
