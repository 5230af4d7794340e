/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctrack {

/// Process exit codes shared by every verb.
enum ExitCode : int {
  kExitOk = 0,
  kExitCertificationFailed = 1,
  kExitInvalidInput = 2,
  kExitDiverged = 3,
};

struct CommandOptions {
  std::string config_path;
  std::string out_path;  // overrides [output] csv
  std::vector<std::uint64_t> seeds;
  bool quiet = false;
};

/// Prints the certification report (text, then a JSON line). 0 iff every
/// condition holds.
int cmd_certify(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Simulates the scenario and writes the run CSV. With seeds, one run per
/// seed executes on its own thread and writes `<stem>_seed<N><ext>`.
int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Observer vs. DKF on the same bearing stream. Requires M = 2.
int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Runs every seed concurrently and writes one summary row per seed.
int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Writes `contents` to a sibling temp file and renames it over `path`.
/// Throws std::runtime_error when the parent directory does not exist.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Parses "1,2,5-8" into {1,2,5,6,7,8}. Throws ValidationError.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace ctrack
