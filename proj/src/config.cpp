#include "selfsim/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace selfsim {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      std::string piece = trim(s.substr(start, i - start));
      if (!piece.empty()) out.push_back(piece);
      start = i + 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// Expression parser

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  void fail(const std::string& what) const {
    throw ConfigError(fmt::format("cannot parse '{}' at offset {}: {}", s_, pos_, what));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }
  std::string ident() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_ || std::isdigit(static_cast<unsigned char>(s_[start]))) {
      pos_ = start;
      fail("expected a name");
    }
    return std::string(s_.substr(start, pos_ - start));
  }
  bool at_ident() {
    skip();
    return pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_');
  }
  void finish() {
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
  }

  double number() {
    double v = primary();
    while (true) {
      if (accept('/')) {
        const double d = primary();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else if (peek('*') && !next_is_measure_call()) {
        ++pos_;
        v *= primary();
      } else {
        return v;
      }
    }
  }

  FiniteMeasure measure() {
    FiniteMeasure m = measure_term();
    while (accept('+')) m = m + measure_term();
    return m;
  }

  StepDistribution step() {
    const std::string name = ident();
    if (name == "finite") {
      expect('[');
      std::vector<double> q{number()};
      while (accept(',')) q.push_back(number());
      expect(']');
      return StepDistribution::finite(std::move(q));
    }
    if (name == "power_tail") {
      expect('{');
      const double g = number();
      expect('}');
      return StepDistribution::power_tail(g);
    }
    fail(fmt::format("unknown step law '{}'", name));
    return StepDistribution::finite({1.0});
  }

  ParsedKernel kernel() {
    ParsedKernel out;
    out.family = ident();
    expect('{');
    if (out.family == "barrier" || out.family == "truncated" || out.family == "ignored") {
      out.steps = step();
      out.kernel = out.family == "barrier"     ? barrier_kernel(*out.steps)
                   : out.family == "truncated" ? truncated_kernel(*out.steps)
                                               : ignored_jump_kernel(*out.steps);
    } else if (out.family == "canonical") {
      out.measure = measure();
      expect(',');
      const double gamma = number();
      double ell = 1.0;
      if (accept(',')) ell = number();
      out.kernel = canonical_kernel(out.measure, gamma, ell, std::string(s_));
    } else if (out.family == "coalescent") {
      out.measure = measure();
      out.kernel = coalescent_kernel(out.measure, std::string(s_));
    } else if (out.family == "composition") {
      out.measure = measure();
      out.kernel = composition_kernel(LevyMeasure::from_measure(out.measure), std::string(s_));
    } else {
      fail(fmt::format("unknown kernel family '{}'", out.family));
    }
    expect('}');
    return out;
  }

 private:
  bool next_is_measure_call() {
    // "2 * atom(...)" scales a measure; the caller handles that case
    std::size_t p = pos_ + 1;
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    std::size_t q = p;
    while (q < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[q])) || s_[q] == '_')) ++q;
    const std::string name(s_.substr(p, q - p));
    return name == "atom" || name == "beta_density" || name == "barrier" || name == "lebesgue" ||
           name == "power_density" || name == "levy_atom";
  }

  double primary() {
    skip();
    if (accept('(')) {
      const double v = number();
      expect(')');
      return v;
    }
    if (accept('-')) return -primary();
    if (at_ident()) {
      const std::string fn = ident();
      if (fn == "pi") return std::acos(-1.0);
      expect('(');
      const double a = number();
      expect(')');
      if (fn == "log") return std::log(a);
      if (fn == "exp") return std::exp(a);
      if (fn == "sqrt") return std::sqrt(a);
      fail(fmt::format("unknown function '{}'", fn));
    }
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    double v = 0.0;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) fail("expected a number");
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return v;
  }

  std::vector<double> args() {
    std::vector<double> a;
    expect('(');
    if (accept(')')) return a;
    a.push_back(number());
    while (accept(',')) a.push_back(number());
    expect(')');
    return a;
  }

  FiniteMeasure measure_term() {
    double factor = 1.0;
    if (!at_ident()) {
      factor = number();
      expect('*');
    }
    const std::string name = ident();
    const std::vector<double> a = args();
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (a.size() < lo || a.size() > hi) {
        fail(fmt::format("{} takes {} to {} arguments, got {}", name, lo, hi, a.size()));
      }
    };
    FiniteMeasure m;
    if (name == "atom") {
      need(2, 2);
      m = FiniteMeasure::atom(a[0], a[1]);
    } else if (name == "beta_density") {
      need(2, 3);
      m = FiniteMeasure::beta_density(a[0], a[1], a.size() > 2 ? a[2] : 1.0);
    } else if (name == "barrier") {
      need(1, 1);
      m = FiniteMeasure::barrier(a[0]);
    } else if (name == "lebesgue") {
      need(0, 1);
      m = FiniteMeasure::lebesgue(a.empty() ? 1.0 : a[0]);
    } else if (name == "power_density") {
      need(3, 3);
      m = FiniteMeasure::power_density({a[0], a[1], a[2], {}});
    } else if (name == "levy_atom") {
      need(2, 2);
      m = LevyMeasure::atom(a[0], a[1]).x_form();
    } else {
      fail(fmt::format("unknown measure '{}'", name));
    }
    return factor == 1.0 ? m : m.scaled(factor);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------------------
// Field conversion

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("'{}' is not a non-negative integer", s));
  }
  return v;
}

double to_double(const std::string& s) {
  Parser p(s);
  const double v = p.number();
  p.finish();
  return v;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& piece : split(s, ',')) out.push_back(to_double(piece));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& piece : split(s, ',')) out.push_back(static_cast<std::size_t>(to_u64(piece)));
  return out;
}

const std::set<std::string>& extra_fields() {
  static const std::set<std::string> f{"p_max",   "threshold", "mc_n",  "measures",   "measure",
                                       "eps",     "steps",     "kernels", "tolerance", "horizon",
                                       "dump_paths", "dp_n"};
  return f;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{}", i ? "," : "", v[i]);
  return s;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "kernel") {
    cfg.kernel = value;
  } else if (key == "n_grid") {
    cfg.n_grid = to_sizes(value);
  } else if (key == "replicates") {
    cfg.replicates = static_cast<std::size_t>(to_u64(value));
  } else if (key == "seed") {
    cfg.seed = to_u64(value);
  } else if (key == "lambda_grid") {
    cfg.lambda_grid = to_doubles(value);
  } else if (key == "t_grid") {
    cfg.t_grid = to_doubles(value);
  } else if (key == "gamma") {
    cfg.gamma = to_double(value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "threads") {
    cfg.threads = static_cast<std::size_t>(to_u64(value));
  } else if (extra_fields().count(key)) {
    cfg.extra[key] = value;
  } else {
    throw ConfigError("unknown field");
  }
}

bool increasing(const auto& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------------------
// ConfigSource

ConfigSource ConfigSource::parse(std::string_view text, std::string path) {
  ConfigSource src;
  src.path = std::move(path);
  src.sections[""];
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string line(text.substr(start, end - start));
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(fmt::format("{}:{}: unterminated section header", src.path, line_no));
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(fmt::format("{}:{}: empty section name", src.path, line_no));
      src.sections[section];
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(fmt::format("{}:{}: expected 'key = value'", src.path, line_no));
      }
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (key.empty()) throw ConfigError(fmt::format("{}:{}: missing key", src.path, line_no));
      auto& sec = src.sections[section];
      if (sec.count(key)) {
        throw ConfigError(fmt::format("{}:{}: field '{}' repeated (first on line {})", src.path, line_no,
                                      key, sec[key].line));
      }
      sec[key] = {value, line_no};
    }
    if (end == text.size()) break;
  }
  return src;
}

ConfigSource ConfigSource::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const ConfigSource::Entry* ConfigSource::find(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  const auto e = s->second.find(key);
  return e == s->second.end() ? nullptr : &e->second;
}

// ---------------------------------------------------------------------------------------
// ExperimentConfig

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const auto it = extra.find(key);
  return it == extra.end() ? fallback : to_double(it->second);
}

std::size_t ExperimentConfig::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = extra.find(key);
  return it == extra.end() ? fallback : static_cast<std::size_t>(to_u64(it->second));
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = extra.find(key);
  return it == extra.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key,
                                                  std::vector<double> fallback) const {
  const auto it = extra.find(key);
  return it == extra.end() ? fallback : to_doubles(it->second);
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> fields = extra;
  fields["suite"] = suite;
  fields["kernel"] = kernel;
  std::string grid;
  for (std::size_t i = 0; i < n_grid.size(); ++i) grid += fmt::format("{}{}", i ? "," : "", n_grid[i]);
  fields["n_grid"] = grid;
  fields["replicates"] = std::to_string(replicates);
  fields["seed"] = seed ? std::to_string(*seed) : "";
  fields["lambda_grid"] = fmt_list(lambda_grid);
  fields["t_grid"] = fmt_list(t_grid);
  fields["gamma"] = gamma ? fmt::format("{}", *gamma) : "";
  std::string text;
  for (const auto& [k, v] : fields) text += k + " = " + v + "\n";
  return text;
}

std::string ExperimentConfig::digest() const {
  const std::string text = canonical_text();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("config digest: SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

// ---------------------------------------------------------------------------------------
// Suites and defaults

const std::vector<std::string>& acceptance_suites() {
  static const std::vector<std::string> s{
      "moment-limit", "finite-mean", "coalescent",  "subordinator-marginal",
      "exponential-functional", "martingales", "coupling", "composition",
      "h-diagnostic", "marginal-ks", "time-change"};
  return s;
}

const std::vector<std::string>& all_suites() {
  static const std::vector<std::string> s = [] {
    auto v = acceptance_suites();
    v.insert(v.end(), {"simulate-chain", "exact-moments", "simulate-limit"});
    return v;
  }();
  return s;
}

bool is_suite(const std::string& name) {
  const auto& s = all_suites();
  return std::find(s.begin(), s.end(), name) != s.end();
}

ExperimentConfig default_config(const std::string& suite) {
  if (!is_suite(suite)) throw ConfigError(fmt::format("unknown suite '{}'", suite));
  ExperimentConfig c;
  c.suite = suite;
  const std::string barrier = "barrier{power_tail{0.5}}";
  const std::vector<std::size_t> pow2{128, 256, 512, 1024, 2048, 4096, 8192};
  if (suite == "moment-limit") {
    c.kernel = barrier;
    c.n_grid = pow2;
    c.extra = {{"p_max", "2"}, {"threshold", "0.10"}};
  } else if (suite == "finite-mean") {
    c.kernel = "barrier{finite[1/3, 1/3, 1/3]}";
    c.n_grid = {10000};
    c.t_grid = {0.25, 0.5, 0.75};
    c.extra = {{"tolerance", "0.05"}};
  } else if (suite == "coalescent") {
    c.kernel = "coalescent{beta_density(1.5, 1)}";
    c.n_grid = {100, 1000, 10000, 100000};
    c.replicates = 20000;
    c.extra = {{"mc_n", "5000"}, {"threshold", "0.02"}};
  } else if (suite == "subordinator-marginal") {
    c.replicates = 100000;
    c.t_grid = {0.5, 1.0};
    c.lambda_grid = {0.5, 1.0, 2.0};
    c.extra = {{"measures", "barrier(0.5); atom(1, 0)"}};
  } else if (suite == "exponential-functional") {
    c.kernel = barrier;
    c.n_grid = {8192};
    c.replicates = 20000;
    c.extra = {{"threshold", "0.10"}};
  } else if (suite == "martingales") {
    c.kernel = barrier;
    c.n_grid = {1000};
    c.replicates = 10000;
    c.lambda_grid = {1.0};
    c.t_grid = {0.5, 1.0};
    c.extra = {{"eps", "0.1"}, {"steps", "1, 10, 40"}};
  } else if (suite == "coupling") {
    c.kernel = barrier;
    c.n_grid = {500};
    c.replicates = 10000;
  } else if (suite == "composition") {
    c.kernel = "composition{levy_atom(1, log(2))}";
    c.n_grid = {2, 3, 4};
    c.replicates = 10000;
  } else if (suite == "h-diagnostic") {
    c.n_grid = pow2;
    c.lambda_grid = {0.5, 1.0, 2.0};
    c.extra = {{"kernels",
                "barrier{power_tail{0.5}} @ 0.05; truncated{power_tail{0.5}} @ 0.05; "
                "ignored{power_tail{0.5}} @ 0.05; "
                "canonical{lebesgue(0.5) + atom(0.25, 0) + atom(0.25, 1), 1, 1} @ 0.05; "
                "coalescent{beta_density(1.5, 1)} @ 0.10; composition{barrier(0.5)} @ 0.10"}};
  } else if (suite == "marginal-ks") {
    c.kernel = barrier;
    c.n_grid = {125, 250, 1000, 4000};
    c.t_grid = {0.5, 1.0};
    c.replicates = 10000;
    c.extra = {{"threshold", "0.05"}};
  } else if (suite == "time-change") {
    c.replicates = 200;
  } else if (suite == "simulate-chain") {
    c.kernel = barrier;
    c.n_grid = {10, 100};
    c.replicates = 10000;
  } else if (suite == "exact-moments") {
    c.kernel = barrier;
    c.n_grid = {8192};
    c.extra = {{"p_max", "2"}};
  } else if (suite == "simulate-limit") {
    c.kernel = barrier;
    c.replicates = 20000;
  }
  return c;
}

ExperimentConfig resolve_config(const ConfigSource& source, const std::string& suite) {
  ExperimentConfig cfg = default_config(suite);
  for (const std::string& section : {std::string(), suite}) {
    const auto it = source.sections.find(section);
    if (it == source.sections.end()) continue;
    for (const auto& [key, entry] : it->second) {
      if (section.empty() && key == "suites") continue;
      try {
        apply(cfg, key, entry.value);
      } catch (const Error& e) {
        throw ConfigError(fmt::format("{}:{}: field '{}': {}", source.path, entry.line, key, e.what()));
      }
    }
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg, const ConfigSource* source) {
  auto where = [&](const std::string& field) {
    if (source) {
      for (const std::string& section : {cfg.suite, std::string()}) {
        if (const auto* e = source->find(section, field)) return fmt::format("{}:{}: ", source->path, e->line);
      }
      return fmt::format("{}: ", source->path);
    }
    return std::string();
  };
  auto fail = [&](const std::string& field, const std::string& msg) {
    throw ConfigError(fmt::format("{}field '{}': {}", where(field), field, msg));
  };
  const bool needs_n = cfg.suite != "subordinator-marginal" && cfg.suite != "time-change" &&
                       cfg.suite != "simulate-limit";
  if (needs_n && cfg.n_grid.empty()) fail("n_grid", "grid must not be empty");
  if (!increasing(cfg.n_grid)) fail("n_grid", "grid must be increasing");
  if (!increasing(cfg.lambda_grid)) fail("lambda_grid", "grid must be increasing");
  if (!increasing(cfg.t_grid)) fail("t_grid", "grid must be increasing");
  for (double l : cfg.lambda_grid) {
    if (!(l > 0.0)) fail("lambda_grid", "values must be positive");
  }
  for (double t : cfg.t_grid) {
    if (!(t >= 0.0)) fail("t_grid", "values must be non-negative");
  }
  if (cfg.replicates < 1) fail("replicates", "must be at least 1");
  if (cfg.threads < 1) fail("threads", "must be at least 1");
  if (!cfg.seed) fail("seed", "a seed is required (set it in the config or pass --seed)");
  if (cfg.suite == "subordinator-marginal" || cfg.suite == "martingales" || cfg.suite == "marginal-ks") {
    if (cfg.t_grid.empty()) fail("t_grid", "grid must not be empty");
  }
  if ((cfg.suite == "subordinator-marginal" || cfg.suite == "h-diagnostic") && cfg.lambda_grid.empty()) {
    fail("lambda_grid", "grid must not be empty");
  }
  if (!cfg.kernel.empty()) {
    try {
      (void)parse_kernel(cfg.kernel);
    } catch (const Error& e) {
      fail("kernel", e.what());
    }
  }
}

std::vector<std::string> selected_suites(const ConfigSource& source) {
  const auto* e = source.find("", "suites");
  if (!e) return acceptance_suites();
  std::vector<std::string> out = split(e->value, ',');
  for (const auto& s : out) {
    if (!is_suite(s)) {
      throw ConfigError(fmt::format("{}:{}: field 'suites': unknown suite '{}'", source.path, e->line, s));
    }
  }
  if (out.empty()) throw ConfigError(fmt::format("{}:{}: field 'suites': empty list", source.path, e->line));
  return out;
}

// ---------------------------------------------------------------------------------------

FiniteMeasure parse_measure(std::string_view text) {
  Parser p(text);
  FiniteMeasure m = p.measure();
  p.finish();
  return m;
}

StepDistribution parse_step(std::string_view text) {
  Parser p(text);
  StepDistribution q = p.step();
  p.finish();
  return q;
}

ParsedKernel parse_kernel(std::string_view text) {
  const std::string t = trim(text);
  Parser p(t);
  ParsedKernel k = p.kernel();
  p.finish();
  return k;
}

}  // namespace selfsim
