/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include <iostream>

#include "CLI11.hpp"
#include "ctrack/cli.hpp"
#include "ctrack/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ctrack: bearing-only distributed consensus observer"};
  app.require_subcommand(1);

  ctrack::CommandOptions opts;
  std::string seeds;

  auto add_verb = [&](const char* name, const char* help, bool with_out) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "Scenario config file")->required();
    if (with_out) {
      sub->add_option("--out", opts.out_path, "Output CSV (overrides [output] csv)");
      sub->add_option("--seeds", seeds, "Seed list, e.g. 1,2,5-8");
    }
    sub->add_flag("--quiet", opts.quiet, "Suppress the summary");
    return sub;
  };
  CLI::App* certify = add_verb("certify", "Check the stability conditions", false);
  CLI::App* run = add_verb("run", "Simulate and write the run CSV", true);
  CLI::App* compare = add_verb("compare", "Observer vs. DKF on one bearing stream", true);
  CLI::App* sweep = add_verb("sweep", "Summary over a seed list", true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ctrack::kExitInvalidInput;
  }

  if (!seeds.empty()) {
    try {
      opts.seeds = ctrack::parse_seed_list(seeds);
    } catch (const ctrack::ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return ctrack::kExitInvalidInput;
    }
  }

  if (certify->parsed()) return ctrack::cmd_certify(opts, std::cout, std::cerr);
  if (run->parsed()) return ctrack::cmd_run(opts, std::cout, std::cerr);
  if (compare->parsed()) return ctrack::cmd_compare(opts, std::cout, std::cerr);
  if (sweep->parsed()) return ctrack::cmd_sweep(opts, std::cout, std::cerr);
  return ctrack::kExitInvalidInput;
}
