#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treedet/config.hpp"
#include "treedet/experiments.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> seed;
  std::vector<std::string> workers;
  std::vector<std::string> out;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--config", o.config_path, "experiment config (JSON)")->required();
  app->add_option("--set", o.sets, "override a config field, key.path=value")
      ->take_all();
  app->add_option("--seed", o.seed, "override the run seed");
  app->add_option("--workers", o.workers, "override the worker count");
  app->add_option("--out", o.out, "override the output path");
}

std::vector<std::string> collect_overrides(const CommonOpts& o) {
  std::vector<std::string> ov = o.sets;
  if (!o.seed.empty()) ov.push_back("seed=" + o.seed.back());
  if (!o.workers.empty()) ov.push_back("workers=" + o.workers.back());
  if (!o.out.empty()) ov.push_back("out=" + o.out.back());
  return ov;
}

int run_main(const CommonOpts& o) {
  const treedet::ExperimentConfig cfg =
      treedet::load_config(o.config_path, collect_overrides(o));
  const auto t0 = std::chrono::steady_clock::now();
  const treedet::ResultTable table = treedet::run_experiment(cfg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  treedet::write_csv_atomic(cfg.out, table);
  treedet::write_metadata(cfg.out, cfg, elapsed, table.rows.size());
  std::cout << cfg.experiment << ": " << table.rows.size() << " rows -> " << cfg.out
            << " (" << treedet::format_number(elapsed) << " s, config "
            << treedet::config_hash(cfg.resolved) << ")\n";
  return 0;
}

int validate_main(const CommonOpts& o) {
  const treedet::ExperimentConfig cfg =
      treedet::load_config(o.config_path, collect_overrides(o));
  std::cout << cfg.resolved.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree-search MIMO detection experiments"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment and write CSV");
  add_common(run_cmd, run_opts);

  CommonOpts val_opts;
  CLI::App* val_cmd =
      app.add_subcommand("validate", "parse a config and print the resolved form");
  add_common(val_cmd, val_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_main(run_opts);
    return validate_main(val_opts);
  } catch (const treedet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
