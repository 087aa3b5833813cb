#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "selfsim/config.hpp"
#include "selfsim/suites.hpp"

using namespace selfsim;
using doctest::Approx;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("config file parsing") {
  const ConfigSource src = ConfigSource::parse(
      "# comment\n"
      "seed = 42\n"
      "\n"
      "[h-diagnostic]\n"
      "n_grid = 16, 32   # trailing comment\n"
      "kernel = barrier{power_tail{0.5}}\n",
      "x.cfg");
  REQUIRE(src.find("", "seed") != nullptr);
  CHECK(src.find("", "seed")->value == "42");
  CHECK(src.find("h-diagnostic", "n_grid")->value == "16, 32");
  CHECK(src.find("h-diagnostic", "n_grid")->line == 5);
  CHECK(src.find("h-diagnostic", "missing") == nullptr);
}

TEST_CASE("syntax errors carry the line") {
  CHECK(contains(error_of([] { ConfigSource::parse("seed = 1\nnot a pair\n", "a.cfg"); }), "a.cfg:2"));
  CHECK(contains(error_of([] { ConfigSource::parse("[open\n", "b.cfg"); }), "b.cfg:1"));
  CHECK(contains(error_of([] { ConfigSource::parse("seed = 1\nseed = 2\n", "c.cfg"); }), "repeated"));
  CHECK(contains(error_of([] { ConfigSource::load("/no/such/file.cfg"); }), "cannot open"));
}

TEST_CASE("empty n grid is rejected by name") {
  const ConfigSource src = ConfigSource::parse("seed = 1\n[h-diagnostic]\nn_grid =\n", "e.cfg");
  const std::string msg = error_of([&] {
    const ExperimentConfig cfg = resolve_config(src, "h-diagnostic");
    validate(cfg, &src);
  });
  CHECK(contains(msg, "n_grid"));
  ExperimentConfig cfg = default_config("moment-limit");
  cfg.seed = 1;
  cfg.n_grid.clear();
  CHECK(contains(error_of([&] { validate(cfg); }), "n_grid"));
}

TEST_CASE("unknown fields and suites") {
  const ConfigSource src = ConfigSource::parse("seed = 1\n[coupling]\nbogus = 3\n", "u.cfg");
  const std::string msg = error_of([&] { resolve_config(src, "coupling"); });
  CHECK(contains(msg, "u.cfg:3"));
  CHECK(contains(msg, "bogus"));
  CHECK(contains(error_of([] { default_config("no-such-suite"); }), "no-such-suite"));
  const ConfigSource bad = ConfigSource::parse("suites = coupling, nope\n");
  CHECK(contains(error_of([&] { selected_suites(bad); }), "nope"));
}

TEST_CASE("validation rules") {
  ExperimentConfig cfg = default_config("h-diagnostic");
  CHECK(contains(error_of([&] { validate(cfg); }), "seed"));
  cfg.seed = 7;
  CHECK_NOTHROW(validate(cfg));
  ExperimentConfig dec = cfg;
  dec.n_grid = {100, 50};
  CHECK(contains(error_of([&] { validate(dec); }), "n_grid"));
  ExperimentConfig zero = cfg;
  zero.replicates = 0;
  CHECK(contains(error_of([&] { validate(zero); }), "replicates"));
  ExperimentConfig lam = cfg;
  lam.lambda_grid = {1.0, -2.0};
  CHECK(contains(error_of([&] { validate(lam); }), "lambda_grid"));
}

TEST_CASE("override order: defaults, global, section") {
  const ConfigSource src = ConfigSource::parse(
      "seed = 3\nreplicates = 10\nsuites = coupling, composition\n[coupling]\nreplicates = 20\n");
  const ExperimentConfig c = resolve_config(src, "coupling");
  CHECK(c.replicates == 20);
  CHECK(c.seed == 3u);
  CHECK(resolve_config(src, "composition").replicates == 10);
  CHECK(resolve_config(src, "moment-limit").n_grid == default_config("moment-limit").n_grid);
  CHECK(selected_suites(src) == std::vector<std::string>{"coupling", "composition"});
  CHECK(selected_suites(ConfigSource{}) == acceptance_suites());
}

TEST_CASE("digest ignores threads and output directory") {
  ExperimentConfig a = default_config("coupling");
  a.seed = 42;
  ExperimentConfig b = a;
  b.threads = 8;
  b.out = "/tmp/elsewhere";
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 64);
  ExperimentConfig c = a;
  c.seed = 43;
  CHECK(a.digest() != c.digest());
  CHECK(a.digest() == a.digest());
}

TEST_CASE("measure expressions") {
  const FiniteMeasure m = parse_measure("0.5 * lebesgue() + atom(0.25, 0) + atom(0.25, 1)");
  CHECK(m.total_mass() == Approx(1.0));
  CHECK(m.atom0() == Approx(0.25));
  CHECK(m.atom1() == Approx(0.25));
  CHECK(laplace_exponent(parse_measure("barrier(1/2)"), 1.0) == Approx(1.0).epsilon(1e-9));
  CHECK(parse_measure("beta_density(3/2, 1)").total_mass() == Approx(1.0));
  CHECK(parse_measure("beta_density(2, 2, 3)").total_mass() == Approx(3.0));
  CHECK_THROWS_AS(parse_measure("barrier(0.5"), ConfigError);
  CHECK_THROWS_AS(parse_measure("nonsense(1)"), ConfigError);
}

TEST_CASE("step and kernel expressions") {
  const StepDistribution q = parse_step("finite[0, 1/2, 1/2]");
  CHECK(q.pmf(1) == Approx(0.5));
  CHECK(parse_step("power_tail{0.5}").tail(3) == Approx(0.5));
  const ParsedKernel b = parse_kernel("barrier{power_tail{0.5}}");
  CHECK(b.family == "barrier");
  CHECK(b.kernel->gamma() == 0.5);
  CHECK(b.kernel->id() == "barrier{power_tail{0.5}}");
  const ParsedKernel c = parse_kernel("coalescent{beta_density(1.5, 1)}");
  CHECK(c.family == "coalescent");
  CHECK(c.kernel->prob(3, 2) == Approx(2.0 / 3).epsilon(1e-12));
  const ParsedKernel p = parse_kernel("composition{levy_atom(1, log(2))}");
  CHECK(p.kernel->prob(2, 0) == Approx(1.0 / 3).epsilon(1e-12));
  const ParsedKernel k = parse_kernel("canonical{atom(1, 0), 0.5}");
  CHECK(k.kernel->prob(4, 0) == Approx(0.5));
  CHECK(parse_kernel("truncated{finite[0, 1/2, 1/2]}").kernel->prob(1, 0) == Approx(1.0));
  CHECK(parse_kernel("ignored{finite[0, 1/2, 1/2]}").kernel->prob(1, 1) == Approx(0.5));
  CHECK_THROWS_AS(parse_kernel("walk{power_tail{0.5}}"), ConfigError);
}

TEST_CASE("h-diagnostic run is deterministic and persisted") {
  ExperimentConfig cfg = default_config("h-diagnostic");
  cfg.seed = 42;
  cfg.kernel = "barrier{power_tail{0.5}}";
  cfg.n_grid = {128, 256, 512, 1024};
  cfg.lambda_grid = {1.0};
  const SuiteResult a = run_suite(cfg);
  const SuiteResult b = run_suite(cfg);
  CHECK(a.error.empty());
  CHECK(a.estimates.dump() == b.estimates.dump());
  REQUIRE_FALSE(a.tables.empty());

  const auto dir = std::filesystem::temp_directory_path() / "selfsim_config_test";
  std::filesystem::remove_all(dir);
  cfg.out = dir.string();
  persist(a, cfg);
  CHECK(std::filesystem::exists(dir / "runs" / "h-diagnostic.jsonl"));
  std::ifstream in(dir / "runs" / "h-diagnostic.jsonl");
  std::string first;
  std::getline(in, first);
  const auto rec = nlohmann::json::parse(first);
  CHECK(rec["digest"] == cfg.digest());
  CHECK(rec["suite"] == "h-diagnostic");
  CHECK(rec.contains("code_version"));
  persist(a, cfg);  // same digest: allowed
  ExperimentConfig other = cfg;
  other.seed = 43;
  CHECK_THROWS_AS(persist(a, other), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("suite failures become verdicts") {
  ExperimentConfig cfg = default_config("exact-moments");
  cfg.seed = 1;
  cfg.kernel = "canonical{barrier(0.5), 0.5}";
  cfg.n_grid = {20};
  cfg.extra["p_max"] = "2";
  CHECK(run_suite(cfg).pass());  // the runner collapses state 1 before the DP
  cfg.extra["p_max"] = "two";
  const SuiteResult r = run_suite(cfg);
  CHECK_FALSE(r.pass());
  CHECK_FALSE(r.error.empty());
}
