// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hmor/fem.hpp"
#include "hmor/rom.hpp"
#include "hmor/soar.hpp"
#include "hmor/study.hpp"

namespace hmor::config {

struct Value {
  std::string text;
  long line = 0;
};

/// `[section]` headers, `key = value` lines, `#` comments (`;` at line start).
struct IniFile {
  std::string source;
  std::map<std::string, std::map<std::string, Value>> sections;

  /// Sorted `section.key=value` lines; comments and spacing do not matter.
  std::string canonical() const;
};

IniFile parse_ini(std::istream& in, const std::string& source);

struct SweepSection {
  study::KGrid grid{1.0, 120.0, 60};
  Index rom_dimension = 0;  // 0: FOM only
};

struct VerifySection {
  double k0 = 20.0;
  std::vector<Index> orders{1, 2, 3};
  std::vector<double> offsets;  // empty: default_offsets(k0)
  rom::NormTag norm = rom::NormTag::Two;
  double min_slope_margin = 0.5;
};

struct StudyExpectations {
  std::optional<double> final_e_true;     // sup E_true at the last checkpoint
  std::optional<double> tracking_factor;  // sup E_hat within [1/f, f] * sup E_true
  double tracking_floor = 1e-9;
};

/// Every quantity carries SI units: wave numbers in 1/m, lengths in m.
struct RunConfig {
  std::filesystem::path source;
  std::string hash;
  std::set<std::string> sections;  // present in the file
  fem::ModelSpec model;
  soar::ExpansionPlan plan;
  bool has_plan = false;
  std::optional<Index> reduce_dimension;
  SweepSection sweep;
  study::StudyConfig study;
  StudyExpectations expect;
  VerifySection verify;
  std::filesystem::path out = "out";
  std::optional<unsigned> workers;
  std::uint64_t seed = 0;
  int verbosity = 1;

  /// Largest wave number requested by the sections present (0 when none).
  double max_wave_number() const;
};

/// Throws ConfigError (with file:line) on syntax errors, unknown sections or
/// keys, and malformed values.
RunConfig parse_run_config(const IniFile& ini);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hmor::config
