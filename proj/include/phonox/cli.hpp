#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace phonox {

inline constexpr const char* kRunSchema = "phonox.run/1";

/// Run file: {"schema": "phonox.run/1", "command": ..., "kind": (sweeps only),
/// "settings": {...}}. Unknown settings keys are rejected on resolution.
struct RunFile {
  std::string command;
  std::string kind;
  nlohmann::json settings = nlohmann::json::object();

  static RunFile from_json(const nlohmann::json& j);
  static RunFile load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Commands and sweep kinds accepted by the CLI.
const std::vector<std::string>& cli_commands();
const std::vector<std::string>& sweep_kinds();

/// Defaults of a command (kind only for "sweep").
nlohmann::json default_settings(const std::string& command, const std::string& kind = "");

/// defaults <- run-file settings <- flag overrides; throws ValidationError on
/// unknown keys, type mismatches and missing presets.
nlohmann::json resolve_settings(const std::string& command, const std::string& kind, const nlohmann::json& run_settings,
                                const nlohmann::json& overrides);

/// Entry point. Exit codes: 0 success, 1 validation error or usage, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phonox
