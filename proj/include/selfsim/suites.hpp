#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "selfsim/config.hpp"

namespace selfsim {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Plot data written as tables/<name>.csv.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct SuiteResult {
  std::string suite;
  std::vector<Verdict> verdicts;
  nlohmann::ordered_json estimates = nlohmann::ordered_json::object();
  std::vector<Table> tables;
  std::vector<nlohmann::ordered_json> replicate_records;
  std::string error;  // set when the suite threw; the run goes on with the next suite
  double wall_seconds = 0.0;

  bool pass() const;
};

std::string code_version();

/// Runs one validated suite. Exceptions are caught and reported as a failed verdict.
SuiteResult run_suite(const ExperimentConfig& cfg);

/// The JSON record of a run: digest, version, verdicts, estimates and wall clock.
nlohmann::ordered_json run_record(const SuiteResult& result, const ExperimentConfig& cfg);

/// Writes <out>/runs/<suite>.jsonl and <out>/tables/*.csv. Throws ConfigError when the
/// record file already holds a run with a different config digest.
void persist(const SuiteResult& result, const ExperimentConfig& cfg);

}  // namespace selfsim
