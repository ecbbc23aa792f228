// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "hmor/config.hpp"
#include "hmor/error.hpp"

namespace hmor::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kModel = 2, kProperty = 3 };

/// Maps a library error to its exit code.
int exit_code_for(ErrorKind kind);

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<unsigned> workers;
  std::optional<rom::NormTag> norm;
};

/// Applies command-line overrides on top of the config file.
config::RunConfig resolve(config::RunConfig cfg, const Overrides& o);

/// Each command writes into cfg.out, including manifest.json carrying the
/// config hash, and returns an exit code. Library errors propagate.
int cmd_assemble(const config::RunConfig& cfg, std::ostream& log);
int cmd_reduce(const config::RunConfig& cfg, std::ostream& log);
int cmd_sweep(const config::RunConfig& cfg, std::ostream& log);
int cmd_study(const config::RunConfig& cfg, std::ostream& log);
int cmd_verify(const config::RunConfig& cfg, std::ostream& log);

/// Loads the config, dispatches, and converts errors to exit codes.
int run(std::string_view command, const std::filesystem::path& config_path,
        const Overrides& overrides, std::ostream& log, std::ostream& err);

}  // namespace hmor::cli
