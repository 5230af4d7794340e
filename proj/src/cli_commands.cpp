/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "ctrack/config.hpp"
#include "ctrack/sim.hpp"

namespace ctrack {

namespace {

namespace fs = std::filesystem;

constexpr double kEnvelopeSlack = 1e-9;

std::optional<ConfigFile> load(const CommandOptions& opts, std::ostream& err) {
  if (opts.config_path.empty()) {
    err << "error: --config is required\n";
    return std::nullopt;
  }
  try {
    return load_config(opts.config_path);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

// Output path from --out, else [output] csv; empty when neither is set.
std::optional<fs::path> output_path(const CommandOptions& opts, const ConfigFile& cfg,
                                    std::ostream& err) {
  const std::string raw = !opts.out_path.empty() ? opts.out_path : cfg.csv_path;
  if (raw.empty()) {
    err << "error: no output path (use --out or [output] csv)\n";
    return std::nullopt;
  }
  fs::path p = resolve_output_path(raw);
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    err << "error: output directory '" << parent.string() << "' does not exist\n";
    return std::nullopt;
  }
  return p;
}

fs::path seeded_path(const fs::path& base, std::uint64_t seed) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + "_seed" + std::to_string(seed) +
                     base.extension().string());
  return p;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

void print_run_summary(std::ostream& out, const RunLog& log) {
  const std::size_t last = log.rows() - 1;
  out << std::setprecision(6);
  out << "final position error [m]:";
  for (std::size_t i = 0; i < log.n_agents; ++i) out << ' ' << log.position_error(last, i);
  out << '\n';
  out << "final disagreement [m]: " << log.disagreement[last] << '\n';
  const std::size_t viol = log.envelope_violations(kEnvelopeSlack);
  out << "lyapunov envelope: " << (viol == 0 ? "held" : "violated") << " (" << viol << " of "
      << log.rows() << " rows above bound)\n";
  std::uint64_t total = 0;
  for (std::uint64_t c : log.comm_floats[last]) total += c;
  out << "floats broadcast: " << total << " total, " << log.comm_floats[last][0]
      << " per agent\n";
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    throw std::runtime_error("output directory '" + parent.string() + "' does not exist");
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    os << contents;
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto parse_one = [&](std::string_view tok) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    std::uint64_t v = 0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
      throw ValidationError("invalid seed '" + std::string(tok) + "'");
    }
    return v;
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_one(item));
      continue;
    }
    const std::uint64_t lo = parse_one(std::string_view(item).substr(0, dash));
    const std::uint64_t hi = parse_one(std::string_view(item).substr(dash + 1));
    if (hi < lo) throw ValidationError("invalid seed range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ValidationError("empty seed list");
  return out;
}

int cmd_certify(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto cfg = load(opts, err);
  if (!cfg) return kExitInvalidInput;
  CertificationReport report;
  try {
    report = certify_scenario(cfg->scenario);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
  if (!opts.quiet) {
    out << to_text(report);
    out << "json: " << to_json(report) << '\n';
  }
  if (!cfg->report_path.empty()) {
    try {
      write_file_atomic(resolve_output_path(cfg->report_path), to_json(report) + "\n");
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitInvalidInput;
    }
  }
  return report.overall ? kExitOk : kExitCertificationFailed;
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto cfg = load(opts, err);
  if (!cfg) return kExitInvalidInput;
  const auto path = output_path(opts, *cfg, err);
  if (!path) return kExitInvalidInput;

  std::vector<std::uint64_t> seeds = opts.seeds;
  const bool seeded = !seeds.empty();
  if (!seeded) seeds.push_back(cfg->scenario.seed);

  struct Outcome {
    std::optional<RunLog> log;
    std::string error;
    int code = kExitOk;
  };
  std::vector<Outcome> outcomes(seeds.size());
  auto job = [&](std::size_t j) {
    Scenario s = cfg->scenario;
    s.seed = seeds[j];
    try {
      RunLog log = run(s);
      std::ostringstream csv;
      write_run_csv(csv, log);
      write_file_atomic(seeded ? seeded_path(*path, seeds[j]) : *path, csv.str());
      outcomes[j].log = std::move(log);
    } catch (const DivergenceError& e) {
      outcomes[j].error = e.what();
      outcomes[j].code = kExitDiverged;
    } catch (const std::exception& e) {
      outcomes[j].error = e.what();
      outcomes[j].code = kExitInvalidInput;
    }
  };
  if (seeds.size() == 1) {
    job(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < seeds.size(); ++j) pool.emplace_back(job, j);
  }

  int code = kExitOk;
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    const Outcome& o = outcomes[j];
    if (o.code != kExitOk) {
      err << "error (seed " << seeds[j] << "): " << o.error << '\n';
      code = std::max(code, o.code);
      continue;
    }
    if (!opts.quiet) {
      if (seeded) out << "seed " << seeds[j] << ":\n";
      print_run_summary(out, *o.log);
    }
  }
  return code;
}

int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto cfg = load(opts, err);
  if (!cfg) return kExitInvalidInput;
  if (cfg->scenario.observer_order() != 2) {
    err << "error: compare needs a second-order observer (M = 2) because the DKF baseline "
           "uses a constant-velocity model; this config has M = "
        << cfg->scenario.observer_order() << '\n';
    return kExitInvalidInput;
  }
  const auto path = output_path(opts, *cfg, err);
  if (!path) return kExitInvalidInput;
  try {
    const CompareLog log = run_comparison(cfg->scenario);
    std::ostringstream csv;
    write_compare_csv(csv, log);
    write_file_atomic(*path, csv.str());
    if (!opts.quiet) {
      out << std::setprecision(6);
      out << "final observer position error [m]: " << max_of(log.observer_error.back()) << '\n';
      out << "final DKF position error [m]: " << max_of(log.dkf_error.back()) << '\n';
      const std::size_t steps = log.t.size() - 1;
      out << "floats per agent per step: observer "
          << (steps ? log.observer_comm.back() / steps : 0) << ", DKF "
          << log.dkf_comm.front() << '\n';
      out << "bearing stream checksums: " << std::hex << log.observer_checksum << ' '
          << log.dkf_checksum << std::dec
          << (log.observer_checksum == log.dkf_checksum ? " (match)" : " (MISMATCH)") << '\n';
    }
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
  return kExitOk;
}

int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto cfg = load(opts, err);
  if (!cfg) return kExitInvalidInput;
  if (opts.seeds.empty()) {
    err << "error: sweep needs --seeds\n";
    return kExitInvalidInput;
  }
  const auto path = output_path(opts, *cfg, err);
  if (!path) return kExitInvalidInput;

  struct Row {
    double max_pos_err = 0.0;
    double disagreement = 0.0;
    std::size_t violations = 0;
    std::string status = "ok";
  };
  std::vector<Row> rows(opts.seeds.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < opts.seeds.size(); ++j) {
      pool.emplace_back([&, j] {
        Scenario s = cfg->scenario;
        s.seed = opts.seeds[j];
        try {
          const RunLog log = run(s);
          const std::size_t last = log.rows() - 1;
          for (std::size_t i = 0; i < log.n_agents; ++i) {
            rows[j].max_pos_err = std::max(rows[j].max_pos_err, log.position_error(last, i));
          }
          rows[j].disagreement = log.disagreement[last];
          rows[j].violations = log.envelope_violations(kEnvelopeSlack);
        } catch (const DivergenceError&) {
          rows[j].status = "diverged";
        } catch (const std::exception&) {
          rows[j].status = "error";
        }
      });
    }
  }

  std::ostringstream csv;
  csv << std::setprecision(12);
  csv << "seed,final_max_pos_err,final_disagreement,envelope_violations,status\n";
  int code = kExitOk;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    csv << opts.seeds[j] << ',' << rows[j].max_pos_err << ',' << rows[j].disagreement << ','
        << rows[j].violations << ',' << rows[j].status << '\n';
    if (rows[j].status == "diverged") code = std::max<int>(code, kExitDiverged);
    if (rows[j].status == "error") code = std::max<int>(code, kExitInvalidInput);
  }
  try {
    write_file_atomic(*path, csv.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
  if (!opts.quiet) out << csv.str();
  return code;
}

}  // namespace ctrack
