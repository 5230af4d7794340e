/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "ctrack/errors.hpp"
#include "ctrack/sim.hpp"

namespace ctrack {

/// Parse failure with its location.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& key,
              const std::string& message);

  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

/// A scenario plus the output locations named in its [output] section.
struct ConfigFile {
  Scenario scenario;
  std::string csv_path;
  std::string report_path;

  friend bool operator==(const ConfigFile&, const ConfigFile&) = default;
};

/// Parses the sectioned `key = value` format documented in README.md.
/// `source` only labels diagnostics. The result is validated.
ConfigFile parse_config(std::string_view text, const std::string& source = "<config>");
ConfigFile load_config(const std::filesystem::path& path);

/// Writes a config that parses back to an identical ConfigFile.
std::string emit_config(const ConfigFile& config);

/// Name of the optional environment variable that redirects relative
/// output paths.
inline constexpr const char* kOutputDirEnv = "CTRACK_OUTPUT_DIR";

/// Resolves a relative output path against $CTRACK_OUTPUT_DIR when set.
std::filesystem::path resolve_output_path(const std::string& path);

}  // namespace ctrack
