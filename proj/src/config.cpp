#include "hjb/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "hjb/catalog.hpp"

namespace hjb {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::evolve:
      return "evolve";
    case Mode::ergodic:
      return "ergodic";
    case Mode::verify:
      return "verify";
    case Mode::counterexample:
      return "counterexample";
    case Mode::full:
      return "full";
  }
  return "evolve";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::evolve, Mode::ergodic, Mode::verify, Mode::counterexample, Mode::full})
    if (to_string(m) == text) return m;
  throw ConfigError("unknown mode '" + text + "' (expected evolve, ergodic, verify, counterexample or full)");
}

Stages expand_mode(Mode m) {
  Stages s;
  switch (m) {
    case Mode::evolve:
      s.evolve = s.diagnostics = true;
      break;
    case Mode::ergodic:
      s.ergodic = true;
      break;
    case Mode::verify:
      s.verify = true;
      break;
    case Mode::counterexample:
      s.evolve = s.diagnostics = s.exact_error = true;
      break;
    case Mode::full:
      s.verify = s.ergodic = s.evolve = s.diagnostics = true;
      break;
  }
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& where, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError(where + "malformed value '" + text + "' for key '" + key + "'");
  return value;
}

}  // namespace

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where) {
  if (key == "problem") {
    if (value.empty()) throw ConfigError(where + "empty problem name");
    cfg.problem = value;
  } else if (key == "mode") {
    try {
      cfg.mode = parse_mode(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  } else if (key == "n_per_axis") {
    cfg.n_per_axis = parse_number<int>(value, where, key);
    if (cfg.n_per_axis < 8) throw ConfigError(where + "n_per_axis = " + value + " is below the minimum 8");
  } else if (key == "t_final") {
    cfg.t_final = parse_number<double>(value, where, key);
  } else if (key == "lambda_sweep") {
    cfg.lambda_sweep.clear();
    std::istringstream is(value);
    std::string item;
    while (std::getline(is, item, ',')) cfg.lambda_sweep.push_back(parse_number<double>(trim(item), where, key));
  } else if (key == "eta") {
    cfg.eta = parse_number<double>(value, where, key);
  } else if (key == "mu") {
    cfg.mu = parse_number<double>(value, where, key);
  } else if (key == "threshold") {
    cfg.threshold = parse_number<double>(value, where, key);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(value, where, key);
  } else if (key == "out_dir") {
    if (value.empty()) throw ConfigError(where + "empty out_dir");
    cfg.out_dir = value;
  } else if (key == "record_every") {
    cfg.record_every = parse_number<double>(value, where, key);
  } else if (key == "export_every") {
    cfg.export_every = parse_number<double>(value, where, key);
  } else {
    throw ConfigError(where + "unknown key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    const std::string where = "line " + std::to_string(number) + ": ";
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    set_config_key(cfg, key, value, where);
  }
  for (const char* required : {"problem", "mode"})
    if (!seen.count(required))
      throw ConfigError("line " + std::to_string(number + 1) + ": missing required key '" + required + "'");
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  const auto names = catalog_names();
  if (std::find(names.begin(), names.end(), cfg.problem) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown problem '" + cfg.problem + "'; available: " + list);
  }
  if (cfg.n_per_axis < 8) throw ConfigError("n_per_axis must be >= 8");
  if (!(cfg.t_final > 0)) throw ConfigError("t_final must be > 0");
  if (cfg.lambda_sweep.empty()) throw ConfigError("lambda_sweep must not be empty");
  for (double l : cfg.lambda_sweep)
    if (!(l > 0)) throw ConfigError("lambda_sweep entries must be > 0");
  if (!(cfg.eta > 0)) throw ConfigError("eta must be > 0");
  if (!(cfg.mu >= 1)) throw ConfigError("mu must be >= 1");
  if (!(cfg.threshold > 0)) throw ConfigError("threshold must be > 0");
  if (!(cfg.record_every > 0) || cfg.record_every > cfg.t_final)
    throw ConfigError("record_every must lie in (0, t_final]");
  if (!(cfg.export_every >= 0)) throw ConfigError("export_every must be >= 0");
  if (cfg.mode == Mode::counterexample && !build(cfg.problem).exact_solution)
    throw ConfigError("mode counterexample needs a problem with an exact solution");
}

}  // namespace hjb
