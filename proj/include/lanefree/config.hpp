#pragma once

// Simulation config files. Two interchangeable syntaxes:
//
//   # text: sections nest keys, dotted keys work too
//   [road]
//   a = 7.2
//   potential.lambda = 40
//
//   {"road": {"a": 7.2}, "potential": {"lambda": 40}}
//
// Unknown keys and ill-typed values are errors. If potential.L is absent it
// is derived from (vehicle.sigma, road.phi, metric.p) after all other keys.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lanefree/sim.hpp"

namespace lanefree::config {

/// Every accepted key, in schema order.
std::vector<std::string> schema_keys();

/// Applies one "dotted.key=value" assignment. `line` is for diagnostics.
void apply_assignment(sim::SimConfig& config, std::string_view key, std::string_view value,
                      int line = 0);

struct LoadResult {
  sim::SimConfig config;
  std::vector<std::string> warnings;
};

/// Parses text or JSON (detected by a leading '{'), then applies overrides
/// of the form key=value, then derives L and validates.
LoadResult parse_config(std::string_view text, std::span<const std::string> overrides = {});

/// Reads a file (empty path = defaults only) and calls parse_config.
LoadResult load_config(const std::filesystem::path& path,
                       std::span<const std::string> overrides = {});

/// Flattened (key, value) pairs with values rendered for JSON output.
std::vector<std::pair<std::string, std::string>> flatten(const sim::SimConfig& config);

}  // namespace lanefree::config
