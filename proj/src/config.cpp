#include "hotspot/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

namespace hotspot {

namespace {

using FieldPtr = std::variant<double RunConfig::*, int RunConfig::*,
                              uint64_t RunConfig::*, std::string RunConfig::*,
                              std::vector<double> RunConfig::*,
                              std::vector<int> RunConfig::*>;

struct Binding {
  const char* section;
  const char* key;
  FieldPtr field;
  std::vector<std::string> choices;  // non-empty: validated string values
};

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b = {
      {"field", "seed", &RunConfig::field_seed, {}},
      {"field", "width", &RunConfig::field_width, {}},
      {"field", "height", &RunConfig::field_height, {}},
      {"field", "num_bumps", &RunConfig::num_bumps, {}},
      {"field", "global_max", &RunConfig::global_max, {}},
      {"field", "min_separation", &RunConfig::min_separation, {}},
      {"field", "bump_width_min", &RunConfig::bump_width_min, {}},
      {"field", "bump_width_max", &RunConfig::bump_width_max, {}},
      {"field", "baseline", &RunConfig::baseline, {}},
      {"field", "resolution", &RunConfig::resolution, {}},
      {"field", "path", &RunConfig::field_path, {}},
      {"sensing", "altitudes", &RunConfig::altitudes, {}},
      {"sensing", "footprints", &RunConfig::footprints, {}},
      {"sensing", "pixels_per_side", &RunConfig::pixels_per_side, {}},
      {"sensing", "noise_c0", &RunConfig::noise_c0, {}},
      {"sensing", "noise_c1", &RunConfig::noise_c1, {}},
      {"gp", "length_scale", &RunConfig::length_scale, {}},
      {"gp", "signal_variance", &RunConfig::signal_variance, {}},
      {"gp", "jitter_scale", &RunConfig::jitter_scale, {}},
      {"planner", "strategy", &RunConfig::strategy,
       {"mfgpucb", "boustrophedon", "gradient", "variance-reduction",
        "mutual-information", "block-ucl"}},
      {"planner", "variance_mode", &RunConfig::variance_mode, {"cv", "cpv"}},
      {"planner", "window", &RunConfig::window, {}},
      {"planner", "beta_gamma", &RunConfig::beta_gamma, {}},
      {"planner", "beta_rate", &RunConfig::beta_rate, {}},
      {"planner", "beta_offset", &RunConfig::beta_offset, {}},
      {"planner", "inference", &RunConfig::inference, {"exact", "sparse"}},
      {"planner", "inducing", &RunConfig::inducing, {}},
      {"planner", "inducing_method", &RunConfig::inducing_method,
       {"lattice", "kmeans"}},
      {"planner", "sensing_time", &RunConfig::sensing_time, {}},
      {"planner", "budget", &RunConfig::budget, {}},
      {"planner", "start_x", &RunConfig::start_x, {}},
      {"planner", "start_y", &RunConfig::start_y, {}},
      {"planner", "start_z", &RunConfig::start_z, {}},
      {"planner", "fixed_level", &RunConfig::fixed_level, {}},
      {"planner", "block_growth", &RunConfig::block_growth, {}},
      {"bench", "environments", &RunConfig::environments, {}},
      {"bench", "trials", &RunConfig::trials, {}},
      {"bench", "env_seed_base", &RunConfig::env_seed_base, {}},
      {"bench", "budgets", &RunConfig::budgets, {}},
      {"bench", "sparsity", &RunConfig::sparsity, {}},
      {"bench", "sweep_pixels", &RunConfig::sweep_pixels, {}},
      {"bench", "sweep_steps", &RunConfig::sweep_steps, {}},
      {"bench", "workers", &RunConfig::workers, {}},
  };
  return b;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": invalid number '" + v + "'");
  }
}

long long parse_int(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(where + ": invalid integer '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    parts.push_back(trim(cur));
  }
  return parts;
}

std::string format_double(double d) {
  std::ostringstream out;
  out.precision(17);
  out << d;
  return out.str();
}

void assign(RunConfig& cfg, const Binding& b, const std::string& value,
            const std::string& where) {
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, double>) {
          cfg.*member = parse_double(value, where);
        } else if constexpr (std::is_same_v<T, int>) {
          cfg.*member = static_cast<int>(parse_int(value, where));
        } else if constexpr (std::is_same_v<T, uint64_t>) {
          const long long i = parse_int(value, where);
          if (i < 0) throw ConfigError(where + ": seed must be non-negative");
          cfg.*member = static_cast<uint64_t>(i);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!b.choices.empty() &&
              std::find(b.choices.begin(), b.choices.end(), value) ==
                  b.choices.end()) {
            std::string opts;
            for (const auto& c : b.choices) opts += (opts.empty() ? "" : "|") + c;
            throw ConfigError(where + ": '" + value + "' is not one of " + opts);
          }
          cfg.*member = value;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::vector<double> out;
          for (const auto& p : split_list(value)) out.push_back(parse_double(p, where));
          if (out.empty()) throw ConfigError(where + ": empty list");
          cfg.*member = std::move(out);
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
          std::vector<int> out;
          for (const auto& p : split_list(value)) {
            out.push_back(static_cast<int>(parse_int(p, where)));
          }
          if (out.empty()) throw ConfigError(where + ": empty list");
          cfg.*member = std::move(out);
        }
      },
      b.field);
}

std::string read_back(const RunConfig& cfg, const Binding& b) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(cfg.*member);
        } else if constexpr (std::is_same_v<T, int>) {
          return std::to_string(cfg.*member);
        } else if constexpr (std::is_same_v<T, uint64_t>) {
          return std::to_string(cfg.*member);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return cfg.*member;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out;
          for (double d : cfg.*member) {
            out += (out.empty() ? "" : ",") + format_double(d);
          }
          return out;
        } else {
          std::string out;
          for (int i : cfg.*member) {
            out += (out.empty() ? "" : ",") + std::to_string(i);
          }
          return out;
        }
      },
      b.field);
}


}  // namespace

void validate_config(const RunConfig& cfg, const std::string& origin) {
  auto fail = [&](const std::string& msg) { throw ConfigError(origin + ": " + msg); };
  if (cfg.field_width <= 0 || cfg.field_height <= 0) fail("field extent must be positive");
  if (cfg.num_bumps < 1) fail("field.num_bumps must be at least 1");
  if (cfg.global_max <= 0) fail("field.global_max must be positive");
  if (cfg.resolution <= 0) fail("field.resolution must be positive");
  if (cfg.altitudes.size() != cfg.footprints.size()) {
    fail("sensing.altitudes and sensing.footprints must have equal length");
  }
  if (cfg.pixels_per_side < 1) fail("sensing.pixels_per_side must be at least 1");
  if (cfg.noise_c0 < 0 || cfg.noise_c1 < 0) fail("noise coefficients must be non-negative");
  if (cfg.length_scale <= 0 || cfg.signal_variance <= 0) {
    fail("gp.length_scale and gp.signal_variance must be positive");
  }
  if (cfg.window < 0) fail("planner.window must be non-negative");
  if (cfg.budget <= 0) fail("planner.budget must be positive");
  if (cfg.sensing_time < 0) fail("planner.sensing_time must be non-negative");
  if (cfg.inducing < 1) fail("planner.inducing must be positive");
  // reject schedules that go negative for some step
  const double at_one = cfg.beta_gamma * std::exp(cfg.beta_rate) + cfg.beta_offset;
  const bool ok = at_one >= 0.0 &&
                  (cfg.beta_rate < 0.0   ? cfg.beta_offset >= 0.0
                   : cfg.beta_rate == 0.0 ? true
                                          : cfg.beta_gamma >= 0.0);
  if (!ok) fail("planner beta schedule is negative for some step");
  if (cfg.fixed_level < 0 ||
      cfg.fixed_level >= static_cast<int>(cfg.altitudes.size())) {
    fail("planner.fixed_level out of range");
  }
  if (cfg.block_growth < 1.0) fail("planner.block_growth must be at least 1");
  if (cfg.environments < 1 || cfg.trials < 1) {
    fail("bench.environments and bench.trials must be at least 1");
  }
  for (int s : cfg.sparsity) {
    if (s < 0) fail("bench.sparsity entries must be non-negative");
  }
  if (cfg.sweep_pixels < 1 || cfg.sweep_steps < 1) {
    fail("bench.sweep_pixels and bench.sweep_steps must be at least 1");
  }
  if (cfg.workers < 0) fail("bench.workers must be non-negative");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(where + ": key '" + key + "' outside any section");
    }
    const Binding* found = nullptr;
    for (const Binding& b : bindings()) {
      if (section == b.section && key == b.key) {
        found = &b;
        break;
      }
    }
    if (!found) {
      throw ConfigError(where + ": unknown key '" + section + "." + key + "'");
    }
    assign(cfg, *found, value, where);
  }
  validate_config(cfg, origin);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string emit_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Binding& b : bindings()) {
    if (section != b.section) {
      if (!section.empty()) out << '\n';
      section = b.section;
      out << '[' << section << "]\n";
    }
    out << b.key << " = " << read_back(config, b) << '\n';
  }
  return out.str();
}

void save_config(const RunConfig& config, const std::string& path) {
  validate_config(config, path);
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write config file: " + path);
  }
  out << emit_config(config);
}

void set_config_value(RunConfig& config, const std::string& dotted_key,
                      const std::string& value) {
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("expected section.key, got '" + dotted_key + "'");
  }
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  for (const Binding& b : bindings()) {
    if (section == b.section && key == b.key) {
      assign(config, b, value, dotted_key);
      return;
    }
  }
  throw ConfigError("unknown key '" + dotted_key + "'");
}

std::string get_config_value(const RunConfig& config,
                             const std::string& dotted_key) {
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("expected section.key, got '" + dotted_key + "'");
  }
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  for (const Binding& b : bindings()) {
    if (section == b.section && key == b.key) {
      return read_back(config, b);
    }
  }
  throw ConfigError("unknown key '" + dotted_key + "'");
}

}  // namespace hotspot
