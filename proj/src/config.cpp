#include "dcs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dcs::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& text, const std::string& key) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse number '" + text + "'");
  }
  if (pos != text.size())
    throw ConfigError("key '" + key + "': trailing characters in '" + text +
                      "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& key) {
  const double v = parse_double(text, key);
  if (v != std::floor(v))
    throw ConfigError("key '" + key + "': expected an integer, got '" + text +
                      "'");
  return static_cast<long long>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& spec,
                                      const std::string& key) {
  std::vector<double> values;
  for (const std::string& item : split(spec, ',')) {
    if (item.empty())
      throw ConfigError("key '" + key + "': empty list item in '" + spec +
                        "'");
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      values.push_back(parse_double(parts[0], key));
    } else if (parts.size() == 3) {
      const double first = parse_double(parts[0], key);
      const double last = parse_double(parts[1], key);
      const double step = parse_double(parts[2], key);
      if (!(step > 0))
        throw ConfigError("key '" + key + "': range step must be > 0");
      if (last < first)
        throw ConfigError("key '" + key + "': range end before start");
      const long long n = std::llround((last - first) / step);
      if (std::abs(first + n * step - last) > 1e-9 * std::max(1.0, std::abs(last)))
        throw ConfigError("key '" + key + "': range " + item +
                          " is not an integer number of steps");
      for (long long i = 0; i <= n; ++i) values.push_back(first + i * step);
    } else {
      throw ConfigError("key '" + key + "': bad range syntax '" + item +
                        "' (want first:last:step)");
    }
  }
  return values;
}

namespace {

using KeyValues = std::map<std::string, std::string>;

struct ConfigFile {
  KeyValues problem;
  KeyValues sweep;
};

ConfigFile read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");

  ConfigFile file;
  KeyValues* section = nullptr;
  std::string section_name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      section_name = trim(line.substr(1, line.size() - 2));
      if (section_name == "problem")
        section = &file.problem;
      else if (section_name == "sweep")
        section = &file.sweep;
      else
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": unknown section '" + section_name +
                          "' (expected [problem] or [sweep])");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    if (!section)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (section->count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    (*section)[key] = value;
  }
  return file;
}

std::vector<int> to_int_list(const std::vector<double>& values,
                             const std::string& key) {
  std::vector<int> out;
  for (double v : values) {
    if (v != std::floor(v))
      throw ConfigError("key '" + key + "': expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

SweepSpec sweep_from_file(const ConfigFile& file) {
  SweepSpec spec = default_sweep();

  for (const auto& [key, value] : file.problem) {
    if (key == "eta")
      spec.eta = parse_double(value, key);
    else if (key == "domain_side")
      spec.domain_side = parse_double(value, key);
    else if (key == "source")
      spec.source = parse_double(value, key);
    else
      throw ConfigError("unknown key '" + key + "' in [problem]");
  }
  for (const auto& [key, value] : file.sweep) {
    if (key == "p")
      spec.p_values = parse_number_list(value, key);
    else if (key == "q")
      spec.q_values = parse_number_list(value, key);
    else if (key == "layouts")
      spec.layouts = to_int_list(parse_number_list(value, key), key);
    else if (key == "cells")
      spec.cells = static_cast<int>(parse_int(value, key));
    else if (key == "iterations")
      spec.iterations = static_cast<int>(parse_int(value, key));
    else if (key == "seeds") {
      const long long n = parse_int(value, key);
      if (n < 1) throw ConfigError("key 'seeds': seed count must be >= 1");
      spec.seeds.clear();
      for (long long i = 0; i < n; ++i)
        spec.seeds.push_back(static_cast<std::uint64_t>(i));
    } else if (key == "methods") {
      spec.methods.clear();
      for (const std::string& name : split(value, ','))
        spec.methods.push_back(parse_method(name));
    } else {
      throw ConfigError("unknown key '" + key + "' in [sweep]");
    }
  }
  return spec;
}

double single_value(const std::string& spec, const std::string& key) {
  const auto values = parse_number_list(spec, key);
  if (values.size() != 1)
    throw ConfigError("key '" + key + "': expected a single value, got '" +
                      spec + "'");
  return values[0];
}

}  // namespace

ParsedConfig parse_config(const CliOptions& opts) {
  ParsedConfig out;
  out.sweep = opts.sweep || opts.config_path.has_value();

  if (out.sweep && opts.seed)
    throw ConfigError("--seed applies to single runs; use --seeds for sweeps");
  if (out.sweep && opts.init)
    throw ConfigError("--init applies to single runs only");
  if (!out.sweep && opts.seeds)
    throw ConfigError("--seeds applies to sweeps; use --seed for single runs");

  if (out.sweep) {
    SweepSpec spec = opts.config_path
                         ? sweep_from_file(read_config_file(*opts.config_path))
                         : default_sweep();
    if (opts.p) spec.p_values = parse_number_list(*opts.p, "p");
    if (opts.q) spec.q_values = parse_number_list(*opts.q, "q");
    if (opts.layout)
      spec.layouts = to_int_list(parse_number_list(*opts.layout, "layout"),
                                 "layout");
    if (opts.cells) spec.cells = *opts.cells;
    if (opts.iters) spec.iterations = *opts.iters;
    if (opts.seeds) {
      if (*opts.seeds < 1) throw ConfigError("key 'seeds': must be >= 1");
      spec.seeds.clear();
      for (int i = 0; i < *opts.seeds; ++i)
        spec.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (opts.method) {
      spec.methods.clear();
      for (const std::string& name : split(*opts.method, ','))
        spec.methods.push_back(parse_method(name));
    }
    if (opts.eta) spec.eta = *opts.eta;
    if (opts.source) spec.source = *opts.source;
    if (opts.domain_side) spec.domain_side = *opts.domain_side;
    spec.validate();
    out.sweep_spec = std::move(spec);
    return out;
  }

  ddm::RunConfig cfg;
  cfg.decomposition.cells_x = cfg.decomposition.cells_y = 20;
  if (opts.p) cfg.p = single_value(*opts.p, "p");
  if (opts.q) cfg.q = single_value(*opts.q, "q");
  if (opts.layout) {
    const int layout = static_cast<int>(
        to_int_list({single_value(*opts.layout, "layout")}, "layout")[0]);
    cfg.decomposition.subdomains_x = cfg.decomposition.subdomains_y = layout;
  }
  if (opts.cells)
    cfg.decomposition.cells_x = cfg.decomposition.cells_y = *opts.cells;
  if (opts.iters) cfg.iterations = *opts.iters;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.method) cfg.method = parse_method(*opts.method);
  if (opts.eta) cfg.problem.eta = *opts.eta;
  if (opts.domain_side) cfg.decomposition.domain_side = *opts.domain_side;
  if (opts.source && *opts.source != 0.0) {
    const double value = *opts.source;
    cfg.problem.source = [value](double, double) { return value; };
  }
  if (opts.init) {
    if (*opts.init == "zero")
      cfg.init = ddm::Init::Zero;
    else if (*opts.init == "random-robin")
      cfg.init = ddm::Init::RandomRobin;
    else
      throw ConfigError("key 'init': expected zero or random-robin");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  out.run = std::move(cfg);
  return out;
}

}  // namespace dcs::cli
