#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfsim/kernels.hpp"
#include "selfsim/measures.hpp"
#include "selfsim/numeric.hpp"

namespace selfsim {

/// Invalid configuration; the message names the file, line and field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parsed config file: `key = value` lines grouped by `[section]` headers. Keys before the
/// first header live in the section named "".
struct ConfigSource {
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::string path = "<config>";
  std::map<std::string, std::map<std::string, Entry>> sections;

  static ConfigSource parse(std::string_view text, std::string path = "<config>");
  static ConfigSource load(const std::string& path);

  const Entry* find(const std::string& section, const std::string& key) const;
};

struct ExperimentConfig {
  std::string suite;
  std::string kernel;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 1;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambda_grid;
  std::vector<double> t_grid;
  std::optional<double> gamma;
  std::string out = ".";
  std::size_t threads = 1;
  /// Suite-specific fields, kept as text and read through the typed getters below.
  std::map<std::string, std::string> extra;

  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

  /// Sorted `key = value` lines of every field except `threads` and `out`.
  std::string canonical_text() const;
  /// SHA-256 of canonical_text(), hex encoded.
  std::string digest() const;
};

/// Suite names known to the runner, in acceptance order first.
const std::vector<std::string>& acceptance_suites();
const std::vector<std::string>& all_suites();
bool is_suite(const std::string& name);

/// Built-in parameters for a suite (seed left unset).
ExperimentConfig default_config(const std::string& suite);

/// default_config(suite), overridden by the global section and then by the [suite] section.
ExperimentConfig resolve_config(const ConfigSource& source, const std::string& suite);

/// Throws ConfigError unless grids are non-empty and increasing, replicates >= 1 and a seed
/// is present.
void validate(const ExperimentConfig& cfg, const ConfigSource* source = nullptr);

/// Suites named by the `suites` key of the global section, or every acceptance suite.
std::vector<std::string> selected_suites(const ConfigSource& source);

// Expression grammar for measures, step laws and kernels.

FiniteMeasure parse_measure(std::string_view text);
StepDistribution parse_step(std::string_view text);

struct ParsedKernel {
  KernelPtr kernel;
  std::string family;  // barrier, truncated, ignored, canonical, coalescent, composition
  std::optional<StepDistribution> steps;
  FiniteMeasure measure;  // the measure argument, when there is one
};
ParsedKernel parse_kernel(std::string_view text);

}  // namespace selfsim
