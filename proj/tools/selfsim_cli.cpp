// selfsim: run experiment suites from a config file.
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "selfsim/config.hpp"
#include "selfsim/suites.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> threads;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Config file (key = value with [suite] sections)");
  cmd->add_option("--seed", f.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", f.out, "Output directory for runs/ and tables/");
  cmd->add_option("--replicates", f.replicates, "Replicate count (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
}

int run(const std::vector<std::string>& suites, const selfsim::ConfigSource& source, const Flags& f) {
  bool all_pass = true;
  for (const auto& name : suites) {
    selfsim::ExperimentConfig cfg = selfsim::resolve_config(source, name);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out = *f.out;
    if (f.replicates) cfg.replicates = *f.replicates;
    if (f.threads) cfg.threads = *f.threads;
    selfsim::validate(cfg, &source);
    const selfsim::SuiteResult res = selfsim::run_suite(cfg);
    std::cout << "[" << (res.pass() ? "PASS" : "FAIL") << "] " << name << " (" << res.wall_seconds << " s)\n";
    for (const auto& v : res.verdicts) {
      std::cout << "    " << (v.pass ? "ok   " : "FAIL ") << v.name;
      if (!v.detail.empty()) std::cout << ": " << v.detail;
      std::cout << '\n';
    }
    try {
      selfsim::persist(res, cfg);
    } catch (const selfsim::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      all_pass = false;
    }
    all_pass = all_pass && res.pass();
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-increasing Markov chains, their absorption times and self-similar limits"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::string> commands{
      {"simulate-chain", "simulate-chain"}, {"exact-moments", "exact-moments"},
      {"simulate-limit", "simulate-limit"}, {"diagnose-h", "h-diagnostic"},
      {"coalescent", "coalescent"},         {"composition", "composition"},
      {"barrier-triple", "coupling"},       {"suite", ""}};
  std::map<CLI::App*, std::string> lookup;
  for (const auto& [cmd, suite] : commands) {
    const std::string help = suite.empty() ? "Run every suite listed by `suites` in the config"
                                           : "Run the " + suite + " suite";
    CLI::App* sub = app.add_subcommand(cmd, help);
    add_flags(sub, flags);
    lookup[sub] = suite;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const selfsim::ConfigSource source =
        flags.config.empty() ? selfsim::ConfigSource{} : selfsim::ConfigSource::load(flags.config);
    for (const auto& [sub, suite] : lookup) {
      if (!sub->parsed()) continue;
      const std::vector<std::string> suites =
          suite.empty() ? selfsim::selected_suites(source) : std::vector<std::string>{suite};
      return run(suites, source, flags);
    }
  } catch (const selfsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
