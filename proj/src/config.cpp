// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hmor/error.hpp"
#include "hmor/format.hpp"

namespace hmor::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& what) {
  throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(line) + ": " + what);
}

class Reader {
 public:
  explicit Reader(const IniFile& ini) : ini_(ini) {}

  bool has_section(const std::string& s) const { return ini_.sections.count(s) > 0; }

  const Value* find(const std::string& section, const std::string& key) {
    used_[section].insert(key);
    auto s = ini_.sections.find(section);
    if (s == ini_.sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  double number(const Value& v) {
    double out = 0.0;
    const char* b = v.text.data();
    const char* e = b + v.text.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e) fail(ini_.source, v.line, "'" + v.text + "' is not a number");
    return out;
  }

  Index integer(const Value& v) {
    long long out = 0;
    const char* b = v.text.data();
    const char* e = b + v.text.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e) fail(ini_.source, v.line, "'" + v.text + "' is not an integer");
    return static_cast<Index>(out);
  }

  std::vector<double> numbers(const Value& v) {
    std::vector<double> out;
    for (const auto& item : split(v.text, ',')) out.push_back(number(Value{item, v.line}));
    return out;
  }

  std::vector<Index> integers(const Value& v) {
    std::vector<Index> out;
    for (const auto& item : split(v.text, ',')) out.push_back(integer(Value{item, v.line}));
    return out;
  }

  void get(const std::string& s, const std::string& k, double& dst) {
    if (auto* v = find(s, k)) dst = number(*v);
  }
  void get(const std::string& s, const std::string& k, Index& dst) {
    if (auto* v = find(s, k)) dst = integer(*v);
  }

  // Anything present but never looked up is an unknown key.
  void reject_unknown() const {
    for (const auto& [section, keys] : ini_.sections) {
      auto u = used_.find(section);
      for (const auto& [key, value] : keys) {
        if (u == used_.end() || !u->second.count(key)) {
          fail(ini_.source, value.line, "unknown key '" + key + "' in [" + section + "]");
        }
      }
    }
  }

  const std::string& source() const { return ini_.source; }

 private:
  const IniFile& ini_;
  std::map<std::string, std::set<std::string>> used_;
};

rom::NormTag norm_value(const std::string& source, const Value& v) {
  try {
    return rom::parse_norm(v.text);
  } catch (const Error&) {
    fail(source, v.line, "unknown norm '" + v.text + "' (expected two|sup)");
  }
}

const std::set<std::string> kSections{"model", "plan", "reduce", "sweep", "study", "verify", "run"};

}  // namespace

std::string IniFile::canonical() const {
  std::string out;
  for (const auto& [section, keys] : sections) {
    for (const auto& [key, value] : keys) out += section + "." + key + "=" + value.text + "\n";
  }
  return out;
}

IniFile parse_ini(std::istream& in, const std::string& source) {
  IniFile ini;
  ini.source = source;
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty() || text.front() == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(source, line_no, "unterminated section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!kSections.count(section)) fail(source, line_no, "unknown section [" + section + "]");
      ini.sections[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected 'key = value'");
    if (section.empty()) fail(source, line_no, "key outside of any section");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) fail(source, line_no, "empty key");
    if (!ini.sections[section].emplace(key, Value{value, line_no}).second) {
      fail(source, line_no, "duplicate key '" + key + "'");
    }
  }
  return ini;
}

double RunConfig::max_wave_number() const {
  double k = 0.0;
  if (has_plan) {
    for (double k0 : plan.wave_numbers) k = std::max(k, k0);
  }
  if (sections.count("sweep")) k = std::max(k, sweep.grid.max);
  if (sections.count("study")) k = std::max(k, study.grid.max);
  if (sections.count("verify")) k = std::max(k, verify.k0);
  return k;
}

RunConfig parse_run_config(const IniFile& ini) {
  Reader rd(ini);
  RunConfig cfg;
  cfg.source = ini.source;
  for (const auto& [name, keys] : ini.sections) cfg.sections.insert(name);
  cfg.hash = [&] {
    Fnv1a h;
    h.update(ini.canonical());
    return h.hex();
  }();

  // [model]
  rd.get("model", "subdivisions", cfg.model.subdivisions);
  rd.get("model", "neumann_y_min", cfg.model.boundary.neumann_y_min);
  rd.get("model", "neumann_y_max", cfg.model.boundary.neumann_y_max);
  if (auto* v = rd.find("model", "probes"); v && v->text != "default") {
    cfg.model.probes.clear();
    for (const auto& pair : split(v->text, ';')) {
      const auto xy = split(pair, ' ');
      if (xy.size() != 2) fail(ini.source, v->line, "probe '" + pair + "' must be 'x y'");
      cfg.model.probes.push_back({rd.number(Value{xy[0], v->line}), rd.number(Value{xy[1], v->line})});
    }
    if (cfg.model.probes.empty()) fail(ini.source, v->line, "empty probe list");
  }
  if (cfg.model.subdivisions < 1) fail(ini.source, 0, "[model] subdivisions must be >= 1");

  // [plan]
  if (auto* v = rd.find("plan", "points")) {
    cfg.has_plan = true;
    cfg.plan.wave_numbers = rd.numbers(*v);
  }
  if (auto* v = rd.find("plan", "schedule")) {
    if (v->text == "interleaved") cfg.plan.schedule = soar::Schedule::Interleaved;
    else if (v->text == "sequential") cfg.plan.schedule = soar::Schedule::Sequential;
    else fail(ini.source, v->line, "schedule must be interleaved|sequential");
  }
  if (auto* v = rd.find("plan", "budgets")) cfg.plan.budgets = rd.integers(*v);
  if (auto* v = rd.find("plan", "mode")) {
    if (v->text == "complex") cfg.plan.mode = soar::BasisMode::Complex;
    else if (v->text == "real-split") cfg.plan.mode = soar::BasisMode::RealSplit;
    else fail(ini.source, v->line, "mode must be complex|real-split");
  }
  if (auto* v = rd.find("plan", "side")) {
    if (v->text == "input") cfg.plan.side = soar::KrylovSide::Input;
    else if (v->text == "output") cfg.plan.side = soar::KrylovSide::Output;
    else fail(ini.source, v->line, "side must be input|output");
  }
  rd.get("plan", "deflation_tol", cfg.plan.deflation_tol);
  if (cfg.has_plan) {
    try {
      cfg.plan.validate();
    } catch (const Error& e) {
      fail(ini.source, rd.find("plan", "points")->line, e.what());
    }
  }

  // [reduce]
  if (auto* v = rd.find("reduce", "dimension")) {
    cfg.reduce_dimension = rd.integer(*v);
    if (*cfg.reduce_dimension < 1) fail(ini.source, v->line, "dimension must be >= 1");
  }

  // [sweep]
  rd.get("sweep", "k_min", cfg.sweep.grid.min);
  rd.get("sweep", "k_max", cfg.sweep.grid.max);
  rd.get("sweep", "k_count", cfg.sweep.grid.count);
  rd.get("sweep", "rom_dimension", cfg.sweep.rom_dimension);

  // [study]
  auto& st = cfg.study;
  st.model = cfg.model;
  st.plan = cfg.plan;
  rd.get("study", "k_min", st.grid.min);
  rd.get("study", "k_max", st.grid.max);
  rd.get("study", "k_count", st.grid.count);
  if (auto* v = rd.find("study", "checkpoints")) st.checkpoints = rd.integers(*v);
  const Value* step = rd.find("study", "checkpoint_step");
  const Value* upto = rd.find("study", "checkpoint_max");
  if (step || upto) {
    if (!step || !upto || !st.checkpoints.empty()) {
      fail(ini.source, (step ? step : upto)->line,
           "use either checkpoints or checkpoint_step + checkpoint_max");
    }
    const Index s = rd.integer(*step), m = rd.integer(*upto);
    if (s < 1) fail(ini.source, step->line, "checkpoint_step must be >= 1");
    for (Index r = s; r <= m; r += s) st.checkpoints.push_back(r);
  }
  if (auto* v = rd.find("study", "norms")) {
    st.norms.clear();
    for (const auto& item : split(v->text, ',')) st.norms.push_back(norm_value(ini.source, Value{item, v->line}));
  }
  if (auto* v = rd.find("study", "stopping_norm")) st.stopping_norm = norm_value(ini.source, *v);
  rd.get("study", "stop_window", st.stopping.window);
  rd.get("study", "stop_tol", st.stopping.tol);
  rd.get("study", "stop_floor", st.stopping.floor);
  if (auto* v = rd.find("study", "expect_final_e_true")) cfg.expect.final_e_true = rd.number(*v);
  if (auto* v = rd.find("study", "expect_tracking_factor")) cfg.expect.tracking_factor = rd.number(*v);
  rd.get("study", "expect_tracking_floor", cfg.expect.tracking_floor);

  // [verify]
  rd.get("verify", "k0", cfg.verify.k0);
  if (auto* v = rd.find("verify", "orders")) cfg.verify.orders = rd.integers(*v);
  if (auto* v = rd.find("verify", "offsets")) cfg.verify.offsets = rd.numbers(*v);
  if (auto* v = rd.find("verify", "norm")) cfg.verify.norm = norm_value(ini.source, *v);
  rd.get("verify", "min_slope_margin", cfg.verify.min_slope_margin);

  // [run]
  if (auto* v = rd.find("run", "out")) cfg.out = v->text;
  if (auto* v = rd.find("run", "workers")) {
    const Index w = rd.integer(*v);
    if (w < 1) fail(ini.source, v->line, "workers must be >= 1");
    cfg.workers = static_cast<unsigned>(w);
  }
  if (auto* v = rd.find("run", "seed")) cfg.seed = static_cast<std::uint64_t>(rd.integer(*v));
  if (auto* v = rd.find("run", "verbosity")) cfg.verbosity = static_cast<int>(rd.integer(*v));

  rd.reject_unknown();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path.string());
  return parse_run_config(parse_ini(in, path.string()));
}

}  // namespace hmor::config
