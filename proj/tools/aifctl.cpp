// aifctl: batch front-end for antithetic integral feedback experiments.
//
//   aifctl simulate   --config exp.json [--n N] [--seed S] [--out DIR] [--threads T]
//   aifctl sweep      --config sweep.json
//   aifctl reproduce  gene-prop-RE [--config overrides.json]
//   aifctl invariants --config exp.json
//   aifctl analyze    --config exp.json
//   aifctl rerun      out/sweep.manifest.json
//
// Exit codes: 0 success, 2 config error, 3 numeric/domain error.

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "aif/experiments.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool paper_scale = false;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Overrides& o, bool config_required) {
  auto* c = app->add_option("--config", o.config, "experiment config (JSON)");
  if (config_required) c->required();
  app->add_option("--n", o.n, "ensemble size");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--paper-scale", o.paper_scale, "use n = 10^6 trajectories");
  app->add_option("--threads", o.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

aif::ExperimentConfig apply(aif::ExperimentConfig cfg, const Overrides& o) {
  if (o.paper_scale) cfg.n = aif::kPaperScaleTrajectories;
  if (o.n) cfg.n = *o.n;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (cfg.n < 2) throw aif::ConfigError("--n: ensemble size must be at least 2");
  return cfg;
}

void report(const aif::CommandOutput& out) {
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  if (!out.summary.empty()) std::cout << out.summary << (out.summary.back() == '\n' ? "" : "\n");
  for (const auto& f : out.files) std::cout << "wrote " << f.string() << "\n";
}

aif::CommandOutput dispatch(const std::string& command, const aif::ExperimentConfig& cfg, unsigned threads) {
  if (command == "simulate") return aif::cmd_simulate(cfg, threads);
  if (command == "sweep") return aif::cmd_sweep(cfg, threads);
  if (command == "invariants") return aif::cmd_invariants(cfg, threads);
  if (command == "analyze") return aif::cmd_analyze(cfg);
  if (command == "reproduce") {
    if (cfg.figure.empty()) throw aif::ConfigError("reproduce manifest lacks config/figure");
    return aif::cmd_reproduce(cfg.figure, cfg, threads);
  }
  throw aif::ConfigError("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antithetic integral feedback experiments"};
  app.require_subcommand(1);

  Overrides sim, sweep, inv, ana, rep, rerun;
  auto* c_sim = app.add_subcommand("simulate", "ensemble moments on a time grid");
  add_common(c_sim, sim, true);
  auto* c_sweep = app.add_subcommand("sweep", "(k, K_p) grid of stationary statistics");
  add_common(c_sweep, sweep, true);
  auto* c_inv = app.add_subcommand("invariants", "check the exact stationary moment identities");
  add_common(c_inv, inv, true);
  auto* c_ana = app.add_subcommand("analyze", "moment-closure analysis (unimolecular plants)");
  add_common(c_ana, ana, true);
  auto* c_rep = app.add_subcommand("reproduce", "dataset for a figure id");
  std::string figure;
  c_rep->add_option("id", figure, "figure id")->required();
  add_common(c_rep, rep, false);
  auto* c_rerun = app.add_subcommand("rerun", "rerun a command from its manifest");
  std::string manifest;
  c_rerun->add_option("manifest", manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  add_common(c_rerun, rerun, false);
  c_rep->footer("Figure ids:\n" + aif::catalog_listing());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_rerun) {
      const auto j = nlohmann::json::parse(aif::read_text(manifest));
      if (!j.contains("command")) throw aif::ConfigError(manifest + ": not a manifest (missing 'command')");
      auto cfg = apply(aif::load_config(manifest), rerun);
      report(dispatch(j.at("command").get<std::string>(), cfg, rerun.threads));
    } else if (*c_rep) {
      std::optional<aif::ExperimentConfig> cfg;
      if (!rep.config.empty()) {
        cfg = aif::load_config(rep.config);
      } else if (auto fig = aif::find_figure(figure)) {
        cfg = aif::figure_config(*fig);
      }
      if (cfg) cfg = apply(*cfg, rep);
      report(aif::cmd_reproduce(figure, cfg, rep.threads));
    } else {
      for (auto [sub, o] : {std::pair{c_sim, &sim}, {c_sweep, &sweep}, {c_inv, &inv}, {c_ana, &ana}}) {
        if (*sub) report(dispatch(sub->get_name(), apply(aif::load_config(o->config), *o), o->threads));
      }
    }
  } catch (const aif::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const aif::StructuralError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const aif::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const aif::AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 3;
  } catch (const aif::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
