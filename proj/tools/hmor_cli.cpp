// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include <CLI11.hpp>

#include "hmor/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Second-order Krylov model reduction for 2D Helmholtz problems"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  unsigned workers = 0;
  std::string norm;

  for (const char* name : {"assemble", "reduce", "sweep", "study", "verify-order"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run config file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "worker threads for k sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--norm", norm, "error norm")->check(CLI::IsMember({"two", "sup"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : hmor::cli::kUsage;
  }

  hmor::cli::Overrides o;
  if (!out.empty()) o.out = out;
  if (workers > 0) o.workers = workers;
  if (!norm.empty()) o.norm = hmor::rom::parse_norm(norm);
  return hmor::cli::run(app.get_subcommands().front()->get_name(), config, o, std::cout, std::cerr);
}
