#pragma once

#include "shiftlab_cli/csv.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shiftlab::cli {

using Json = nlohmann::json;

struct CliOverrides {
  std::optional<std::string> scenario;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> out;
};

/// Loads the declarative config file, applies flag overrides and fills
/// every scenario default so the echoed config has no hidden values.
/// Throws UsageError on malformed input.
Json resolve_config(const std::string& config_path, const CliOverrides& overrides);

/// Same resolution starting from an in-memory document (for tests).
Json resolve_config_json(Json raw, const CliOverrides& overrides);

std::vector<std::uint64_t> config_seeds(const Json& resolved);

}  // namespace shiftlab::cli
