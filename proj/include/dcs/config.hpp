#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcs/sweep.hpp"

namespace dcs::cli {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raw command-line values before validation. String fields hold number-list
/// specs: comma-separated items, each either a value or an inclusive
/// `first:last:step` range (e.g. "1:20:0.5").
struct CliOptions {
  std::optional<std::string> config_path;
  bool sweep = false;
  std::optional<std::string> p;
  std::optional<std::string> q;
  std::optional<std::string> layout;
  std::optional<int> cells;
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;   // single-run seed
  std::optional<int> seeds;            // sweep: expands to 0..N-1
  std::optional<std::string> method;   // list in sweep mode, single otherwise
  std::optional<double> eta;
  std::optional<double> source;
  std::optional<double> domain_side;
  std::optional<std::string> init;     // zero | random-robin (single runs)
};

struct ParsedConfig {
  bool sweep = false;
  ddm::RunConfig run;        // valid when !sweep
  SweepSpec sweep_spec;      // valid when sweep
};

std::vector<double> parse_number_list(const std::string& spec,
                                      const std::string& key);

/// Reads the `[problem]` / `[sweep]` key-value config file (when given),
/// applies flag overrides, validates, and decides the mode: a config file
/// or --sweep selects a sweep, plain value flags a single run. Unknown
/// file keys are rejected; violations name the offending key.
ParsedConfig parse_config(const CliOptions& opts);

}  // namespace dcs::cli
