/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ctrack {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& key,
                         const std::string& message)
    : ValidationError(source + ":" + std::to_string(line) + ": " +
                      (key.empty() ? std::string() : "'" + key + "': ") + message),
      line_(line),
      key_(key) {}

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Table = std::map<std::string, Entry>;  // "section.key" -> value

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "target.order",       "target.initial",       "target.input",
      "agents.count",       "agents.positions",     "agents.init_range",
      "agents.init_mode",   "graph.edges",          "gains.k",
      "gains.alpha",        "gains.delta",          "gains.gamma",
      "noise.bearing_std_deg", "sim.step",          "sim.duration",
      "sim.seed",           "sim.dkf_consensus_iters", "output.csv",
      "output.report"};
  return keys;
}

bool is_indexed_key(const std::string& key) {
  for (const char* prefix : {"agents.waypoints.", "agents.loss."}) {
    const std::string p(prefix);
    if (key.size() > p.size() && key.compare(0, p.size(), p) == 0) {
      return key.find_first_not_of("0123456789", p.size()) == std::string::npos;
    }
  }
  return false;
}

class Parser {
 public:
  Parser(std::string_view text, std::string source) : source_(std::move(source)) {
    std::string section;
    std::map<std::string, std::size_t> opened;  // section -> header line
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const std::string_view raw =
          text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;

      std::string_view line = raw;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;

      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "", "unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        static const std::set<std::string> sections{"target", "agents", "graph", "gains",
                                                    "noise",  "sim",    "output"};
        if (!sections.contains(section)) fail(line_no, "", "unknown section [" + section + "]");
        if (const auto [it, fresh] = opened.emplace(section, line_no); !fresh) {
          fail(line_no, "", "section [" + section + "] repeated (first opened on line " +
                                std::to_string(it->second) + ")");
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "", "expected 'key = value'");
      if (section.empty()) fail(line_no, "", "key outside of any section");
      const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
      if (!known_keys().contains(key) && !is_indexed_key(key)) fail(line_no, key, "unknown key");
      if (table_.contains(key)) {
        fail(line_no, key, "duplicate key (first set on line " +
                               std::to_string(table_.at(key).line) + ")");
      }
      table_[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
    }
    // Malformed numbers are reported at their own line before any
    // missing-key error, so the first message points at the real typo.
    for (const auto& [key, entry] : table_) {
      if (key == "agents.init_mode" || key == "output.csv" || key == "output.report") continue;
      std::string_view v = entry.value;
      std::size_t pos = 0;
      while (pos <= v.size()) {
        const auto sep = v.find_first_of("[],", pos);
        const std::string_view tok = trim(v.substr(pos, sep == std::string_view::npos ? std::string_view::npos : sep - pos));
        if (!tok.empty()) (void)number(key, tok);
        if (sep == std::string_view::npos) break;
        pos = sep + 1;
      }
    }
  }

  [[noreturn]] void fail(std::size_t line, const std::string& key, const std::string& msg) const {
    throw ConfigError(source_, line, key, msg);
  }

  bool has(const std::string& key) const { return table_.contains(key); }
  const Table& table() const { return table_; }
  std::size_t line_of(const std::string& key) const {
    auto it = table_.find(key);
    return it == table_.end() ? 0 : it->second.line;
  }

  const Entry& require(const std::string& key) const {
    auto it = table_.find(key);
    if (it == table_.end()) fail(0, key, "missing required key");
    return it->second;
  }

  double number(const std::string& key, std::string_view token) const {
    token = trim(token);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || std::isnan(v)) {
      fail(line_of(key), key, "invalid number '" + std::string(token) + "'");
    }
    return v;
  }

  double scalar(const std::string& key) const { return number(key, require(key).value); }

  std::uint64_t count(const std::string& key, std::string_view token) const {
    token = trim(token);
    std::uint64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      fail(line_of(key), key, "expected a non-negative integer, got '" + std::string(token) + "'");
    }
    return v;
  }

  std::vector<double> list(const std::string& key, std::string_view body) const {
    std::vector<double> out;
    if (trim(body).empty()) return out;
    std::size_t pos = 0;
    while (true) {
      const auto comma = body.find(',', pos);
      out.push_back(number(key, body.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                                   : comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  }

  // "[a, b], [c, d]" with every tuple of length `arity`.
  std::vector<std::vector<double>> tuples(const std::string& key, std::size_t arity) const {
    const std::string& v = require(key).value;
    std::vector<std::vector<double>> out;
    std::size_t pos = 0;
    while (true) {
      const auto open = v.find_first_not_of(" \t", pos);
      if (open == std::string::npos || v[open] != '[') {
        fail(line_of(key), key, "expected a list of [..] tuples");
      }
      const auto close = v.find(']', open);
      if (close == std::string::npos) fail(line_of(key), key, "unterminated '['");
      std::vector<double> t = list(key, std::string_view(v).substr(open + 1, close - open - 1));
      if (t.size() != arity) {
        fail(line_of(key), key, "tuple " + std::to_string(out.size() + 1) + " has " +
                                    std::to_string(t.size()) + " entries, expected " +
                                    std::to_string(arity));
      }
      out.push_back(std::move(t));
      const auto next = v.find_first_not_of(" \t", close + 1);
      if (next == std::string::npos) break;
      if (v[next] != ',') fail(line_of(key), key, "expected ',' between tuples");
      pos = next + 1;
    }
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  Table table_;
};

Vec3 to_vec3(const std::vector<double>& v, std::size_t offset = 0) {
  return {v[offset], v[offset + 1], v[offset + 2]};
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tuple(std::initializer_list<double> values) {
  std::string s = "[";
  bool first = true;
  for (double v : values) {
    if (!first) s += ", ";
    s += num(v);
    first = false;
  }
  return s + "]";
}

std::string vec_tuple(const Vec3& v) { return tuple({v[0], v[1], v[2]}); }

}  // namespace

ConfigFile parse_config(std::string_view text, const std::string& source) {
  const Parser p(text, source);
  ConfigFile cfg;
  Scenario& s = cfg.scenario;

  // [target]
  for (const auto& t : p.tuples("target.initial", 3)) s.target_initial.push_back(to_vec3(t));
  if (p.has("target.order") &&
      p.count("target.order", p.require("target.order").value) != s.target_initial.size()) {
    p.fail(p.line_of("target.order"), "target.order",
           "does not match the " + std::to_string(s.target_initial.size()) +
               " blocks given in target.initial");
  }
  if (p.has("target.input")) {
    for (const auto& t : p.tuples("target.input", 4)) {
      s.input.push_back({t[0], Vec3{t[1], t[2], t[3]}});
    }
  }

  // [agents]
  const auto positions = p.tuples("agents.positions", 3);
  if (p.has("agents.count") &&
      p.count("agents.count", p.require("agents.count").value) != positions.size()) {
    p.fail(p.line_of("agents.count"), "agents.count",
           "does not match the " + std::to_string(positions.size()) + " positions given");
  }
  for (const auto& pos : positions) s.agents.push_back({{Waypoint{0.0, to_vec3(pos)}}, {}});
  for (const auto& [key, entry] : p.table()) {
    if (!is_indexed_key(key)) continue;
    const std::size_t idx = static_cast<std::size_t>(std::stoul(key.substr(key.rfind('.') + 1)));
    if (idx >= s.agents.size()) {
      p.fail(entry.line, key, "agent index out of range (0.." + std::to_string(s.agents.size() - 1) + ")");
    }
    if (key.starts_with("agents.waypoints.")) {
      s.agents[idx].waypoints.clear();
      for (const auto& w : p.tuples(key, 4)) s.agents[idx].waypoints.push_back({w[0], to_vec3(w, 1)});
    } else {
      for (const auto& l : p.tuples(key, 2)) s.agents[idx].loss.push_back({l[0], l[1]});
    }
  }
  if (p.has("agents.init_range")) {
    const auto r = p.list("agents.init_range", p.require("agents.init_range").value);
    if (r.size() != 2) p.fail(p.line_of("agents.init_range"), "agents.init_range", "expected 'min, max'");
    s.init_range_min = r[0];
    s.init_range_max = r[1];
  }
  if (p.has("agents.init_mode")) {
    const std::string& m = p.require("agents.init_mode").value;
    if (m == "per_agent") {
      s.init_mode = InitMode::kPerAgent;
    } else if (m == "average") {
      s.init_mode = InitMode::kAverage;
    } else {
      p.fail(p.line_of("agents.init_mode"), "agents.init_mode", "expected 'per_agent' or 'average'");
    }
  }

  // [graph]
  for (const auto& e : p.tuples("graph.edges", 3)) {
    if (e[0] < 0 || e[1] < 0 || e[0] != std::floor(e[0]) || e[1] != std::floor(e[1])) {
      p.fail(p.line_of("graph.edges"), "graph.edges", "vertex indices must be non-negative integers");
    }
    s.edges.push_back({static_cast<std::size_t>(e[0]), static_cast<std::size_t>(e[1]), e[2]});
  }

  // [gains]
  s.gains.k = p.list("gains.k", p.require("gains.k").value);
  s.gains.alpha = p.scalar("gains.alpha");
  s.gains.delta = p.scalar("gains.delta");
  s.gains.gamma = p.scalar("gains.gamma");

  // [noise], [sim]
  if (p.has("noise.bearing_std_deg")) s.noise_std_deg = p.scalar("noise.bearing_std_deg");
  if (p.has("sim.step")) s.step = p.scalar("sim.step");
  if (p.has("sim.duration")) s.duration = p.scalar("sim.duration");
  if (p.has("sim.seed")) s.seed = p.count("sim.seed", p.require("sim.seed").value);
  if (p.has("sim.dkf_consensus_iters")) {
    s.dkf_consensus_iters = p.count("sim.dkf_consensus_iters", p.require("sim.dkf_consensus_iters").value);
  }

  // [output]
  if (p.has("output.csv")) cfg.csv_path = p.require("output.csv").value;
  if (p.has("output.report")) cfg.report_path = p.require("output.report").value;

  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(source, 0, "", e.what());
  }
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string emit_config(const ConfigFile& config) {
  const Scenario& s = config.scenario;
  std::ostringstream os;
  auto join = [](const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
    return out;
  };

  std::vector<std::string> parts;
  os << "[target]\n";
  os << "order = " << s.target_order() << '\n';
  for (const Vec3& b : s.target_initial) parts.push_back(vec_tuple(b));
  os << "initial = " << join(parts) << '\n';
  if (!s.input.empty()) {
    parts.clear();
    for (const InputSegment& in : s.input) parts.push_back(tuple({in.start, in.u[0], in.u[1], in.u[2]}));
    os << "input = " << join(parts) << '\n';
  }

  os << "\n[agents]\n";
  os << "count = " << s.n_agents() << '\n';
  parts.clear();
  for (const AgentTrack& a : s.agents) parts.push_back(vec_tuple(a.waypoints.front().position));
  os << "positions = " << join(parts) << '\n';
  os << "init_range = " << num(s.init_range_min) << ", " << num(s.init_range_max) << '\n';
  os << "init_mode = " << (s.init_mode == InitMode::kAverage ? "average" : "per_agent") << '\n';
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentTrack& a = s.agents[i];
    if (a.waypoints.size() != 1 || a.waypoints.front().t != 0.0) {
      parts.clear();
      for (const Waypoint& w : a.waypoints) {
        parts.push_back(tuple({w.t, w.position[0], w.position[1], w.position[2]}));
      }
      os << "waypoints." << i << " = " << join(parts) << '\n';
    }
    if (!a.loss.empty()) {
      parts.clear();
      for (const LossInterval& l : a.loss) parts.push_back(tuple({l.start, l.end}));
      os << "loss." << i << " = " << join(parts) << '\n';
    }
  }

  os << "\n[graph]\n";
  parts.clear();
  for (const Edge& e : s.edges) {
    parts.push_back(tuple({static_cast<double>(e.from), static_cast<double>(e.to), e.weight}));
  }
  os << "edges = " << join(parts) << '\n';

  os << "\n[gains]\n";
  parts.clear();
  for (double k : s.gains.k) parts.push_back(num(k));
  os << "k = " << join(parts) << '\n';
  os << "alpha = " << num(s.gains.alpha) << '\n';
  os << "delta = " << num(s.gains.delta) << '\n';
  os << "gamma = " << num(s.gains.gamma) << '\n';

  os << "\n[noise]\n";
  os << "bearing_std_deg = " << num(s.noise_std_deg) << '\n';

  os << "\n[sim]\n";
  os << "step = " << num(s.step) << '\n';
  os << "duration = " << num(s.duration) << '\n';
  os << "seed = " << s.seed << '\n';
  os << "dkf_consensus_iters = " << s.dkf_consensus_iters << '\n';

  if (!config.csv_path.empty() || !config.report_path.empty()) {
    os << "\n[output]\n";
    if (!config.csv_path.empty()) os << "csv = " << config.csv_path << '\n';
    if (!config.report_path.empty()) os << "report = " << config.report_path << '\n';
  }
  return os.str();
}

std::filesystem::path resolve_output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
      return std::filesystem::path(dir) / p;
    }
  }
  return p;
}

}  // namespace ctrack
