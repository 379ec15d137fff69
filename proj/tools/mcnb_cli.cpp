#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcnb/errors.hpp"
#include "mcnb/harness.hpp"
#include "mcnb/ntk.hpp"

namespace {

using mcnb::ConfigError;

void reject_unknown_keys(const nlohmann::json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + "." + item.key(), "unknown field");
    }
  }
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw mcnb::IoError("cannot open config " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw mcnb::DataFormatError(std::string("invalid config JSON: ") +
                                e.what());
  }
  return doc;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            bool has_seed, std::uint64_t seed) {
  mcnb::ExperimentConfig cfg = mcnb::load_experiment_config(config_path);
  if (!out_override.empty()) {
    cfg.out_dir = out_override;
  }
  if (has_seed) {
    cfg.seeds = {seed};
  }
  cfg.validate();
  mcnb::RunResult result = mcnb::run_experiment(cfg);
  std::cout << "policy " << cfg.policy_id << ", horizon " << cfg.horizon
            << ", " << result.seeds.size() << " seed(s)\n";
  for (const mcnb::SeedTrace& trace : result.seeds) {
    std::cout << "seed " << trace.seed << ": final cumulative regret "
              << trace.final_cum_regret << "\n";
  }
  std::cout << "artifacts written to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_ntk_report(const std::string& config_path) {
  const nlohmann::json doc = load_json(config_path);
  if (!doc.is_object()) {
    throw ConfigError("(root)", "config must be a JSON object");
  }
  reject_unknown_keys(doc, "(root)",
                      {"contexts", "depth", "t_times_k", "rewards",
                       "empirical_width", "seed"});
  if (!doc.contains("contexts") || !doc.at("contexts").is_array() ||
      doc.at("contexts").empty()) {
    throw ConfigError("contexts", "expected a non-empty array of vectors");
  }
  std::vector<mcnb::ArmContext> contexts;
  for (const auto& row : doc.at("contexts")) {
    if (!row.is_array() || row.empty()) {
      throw ConfigError("contexts", "expected a non-empty array of vectors");
    }
    contexts.push_back(row.get<std::vector<double>>());
    if (contexts.back().size() != contexts.front().size()) {
      throw ConfigError("contexts", "rows must share one dimension");
    }
  }
  const std::size_t depth = doc.value("depth", std::size_t{2});
  if (depth < 2) {
    throw ConfigError("depth", "must be at least 2");
  }
  const std::size_t t_times_k = doc.value("t_times_k", contexts.size());
  if (t_times_k < 1) {
    throw ConfigError("t_times_k", "must be at least 1");
  }
  std::vector<double> rewards(contexts.size(), 0.5);
  if (doc.contains("rewards")) {
    rewards = doc.at("rewards").get<std::vector<double>>();
    if (rewards.size() != contexts.size()) {
      throw ConfigError("rewards", "must match the number of contexts");
    }
  }

  const mcnb::NtkMatrix ntk = mcnb::ntk_matrix(contexts, depth);
  nlohmann::json out;
  out["min_eigenvalue"] = mcnb::min_eigenvalue(ntk);
  out["effective_dimension"] = mcnb::effective_dimension(ntk, t_times_k);
  const mcnb::SComplexity s = mcnb::s_complexity(ntk, rewards);
  if (s.unbounded) {
    out["s_complexity"] = "unbounded";
  } else {
    out["s_complexity"] = s.value;
  }
  if (doc.contains("empirical_width")) {
    const std::size_t width = doc.at("empirical_width").get<std::size_t>();
    if (width < 1) {
      throw ConfigError("empirical_width", "must be at least 1");
    }
    const mcnb::NetworkShape shape{contexts.front().size(), width, depth};
    const std::uint64_t seed = doc.value("seed", std::uint64_t{1});
    out["frobenius_gap"] =
        mcnb::empirical_gram(contexts, shape, seed).frobenius_gap;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& inputs) {
  const mcnb::CompareResult result = mcnb::compare_runs(inputs);
  std::cout << mcnb::compare_to_json(result).dump(2) << "\n";
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  nlohmann::json err = {{"kind", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural contextual bandit laboratory"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  std::uint64_t seed_override = 0;
  CLI::App* run = app.add_subcommand("run", "run a seeded experiment");
  run->add_option("--config", run_config, "experiment config JSON path")
      ->required();
  run->add_option("--out", run_out, "override the output directory");
  CLI::Option* seed_opt = run->add_option(
      "--seed", seed_override, "run one seed, overriding the config list");

  std::string ntk_config;
  CLI::App* ntk =
      app.add_subcommand("ntk-report", "kernel complexity report as JSON");
  ntk->add_option("--config", ntk_config, "report config JSON path")
      ->required();

  std::vector<std::string> inputs;
  CLI::App* cmp =
      app.add_subcommand("compare", "rank finished runs by final regret");
  cmp->add_option("--inputs", inputs, "run output directories")
      ->required()
      ->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", e.what());
    return 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(run_config, run_out, seed_opt->count() > 0,
                     seed_override);
    }
    if (ntk->parsed()) {
      return cmd_ntk_report(ntk_config);
    }
    if (cmp->parsed()) {
      return cmd_compare(inputs);
    }
    print_error("usage_error", "no subcommand given");
    return 2;
  } catch (const mcnb::Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return 1;
  }
}
