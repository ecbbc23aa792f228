// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "hmor/config.hpp"
#include "hmor/error.hpp"

namespace hmor::config {
namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(parse_ini(in, "run.ini"));
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    return e.what();
  }
  return "no error";
}

TEST(Ini, SectionsCommentsAndSpacing) {
  std::istringstream in("# header\n[model]\n  subdivisions =  16  # trailing\n; full-line\n\n[run]\nout=x\n");
  const auto ini = parse_ini(in, "a.ini");
  EXPECT_EQ(ini.sections.at("model").at("subdivisions").text, "16");
  EXPECT_EQ(ini.sections.at("model").at("subdivisions").line, 3);
  EXPECT_EQ(ini.sections.at("run").at("out").text, "x");
  EXPECT_EQ(ini.sections.at("run").at("out").line, 7);
}

TEST(Ini, SyntaxErrorsCarryLine) {
  EXPECT_NE(error_of("[model]\nsubdivisions 4\n").find("run.ini:2"), std::string::npos);
  EXPECT_NE(error_of("subdivisions = 4\n").find("run.ini:1"), std::string::npos);
  EXPECT_NE(error_of("[model\n").find("unterminated"), std::string::npos);
  EXPECT_NE(error_of("[bogus]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[model]\nsubdivisions = 4\nsubdivisions = 5\n").find("run.ini:3"), std::string::npos);
}

TEST(RunConfig, UnknownKeyRejectedWithLine) {
  const auto what = error_of("[model]\nsubdivisions = 8\n\n[study]\nk_mx = 4\n");
  EXPECT_NE(what.find("run.ini:5"), std::string::npos) << what;
  EXPECT_NE(what.find("k_mx"), std::string::npos);
}

TEST(RunConfig, MalformedValues) {
  EXPECT_NE(error_of("[model]\nsubdivisions = eight\n").find("not an integer"), std::string::npos);
  EXPECT_NE(error_of("[study]\nk_max = 1e\n").find("not a number"), std::string::npos);
  EXPECT_NE(error_of("[plan]\npoints = 20, 20\n").find("run.ini:2"), std::string::npos);
  EXPECT_NE(error_of("[plan]\npoints = 20\nschedule = random\n").find("run.ini:3"), std::string::npos);
  EXPECT_NE(error_of("[study]\nnorms = fro\n").find("unknown norm"), std::string::npos);
  EXPECT_NE(error_of("[run]\nworkers = 0\n").find("workers"), std::string::npos);
}

TEST(RunConfig, Defaults) {
  const auto cfg = parse("");
  EXPECT_EQ(cfg.model.subdivisions, 64);
  EXPECT_EQ(cfg.model.probes.size(), 13u);
  EXPECT_FALSE(cfg.has_plan);
  EXPECT_EQ(cfg.study.grid.count, 60);
  EXPECT_EQ(cfg.verify.orders, (std::vector<Index>{1, 2, 3}));
  EXPECT_EQ(cfg.out, "out");
}

TEST(RunConfig, FullExample) {
  const auto cfg = parse(
      "[model]\nsubdivisions = 32\nneumann_y_min = 0.5\nprobes = 0.1 0.9; 0.5 0.5\n"
      "[plan]\npoints = 2, 18\nschedule = sequential\nbudgets = 400, 400\nmode = real-split\n"
      "side = output\ndeflation_tol = 1e-9\n"
      "[reduce]\ndimension = 12\n"
      "[sweep]\nk_min = 5\nk_max = 6\nk_count = 2\nrom_dimension = 4\n"
      "[study]\ncheckpoint_step = 50\ncheckpoint_max = 300\nnorms = two\nstopping_norm = two\n"
      "stop_window = 4\nstop_tol = 0.25\nstop_floor = 1e-12\nexpect_final_e_true = 1e-6\n"
      "[verify]\nk0 = 30\norders = 1, 2\noffsets = 3, 1, 0.3, 0.1\nnorm = sup\nmin_slope_margin = 0.25\n"
      "[run]\nout = results\nworkers = 2\nseed = 42\nverbosity = 0\n");
  EXPECT_EQ(cfg.model.subdivisions, 32);
  EXPECT_EQ(cfg.model.boundary.neumann_y_min, 0.5);
  ASSERT_EQ(cfg.model.probes.size(), 2u);
  EXPECT_EQ(cfg.model.probes[1].x, 0.5);
  EXPECT_EQ(cfg.plan.schedule, soar::Schedule::Sequential);
  EXPECT_EQ(cfg.plan.budgets, (std::vector<Index>{400, 400}));
  EXPECT_EQ(cfg.plan.mode, soar::BasisMode::RealSplit);
  EXPECT_EQ(cfg.plan.side, soar::KrylovSide::Output);
  EXPECT_EQ(cfg.plan.deflation_tol, 1e-9);
  EXPECT_EQ(cfg.reduce_dimension, 12);
  EXPECT_EQ(cfg.sweep.rom_dimension, 4);
  EXPECT_EQ(cfg.study.checkpoints, (std::vector<Index>{50, 100, 150, 200, 250, 300}));
  EXPECT_EQ(cfg.study.norms, std::vector<rom::NormTag>{rom::NormTag::Two});
  EXPECT_EQ(cfg.study.stopping.window, 4);
  EXPECT_EQ(cfg.study.plan.wave_numbers, cfg.plan.wave_numbers);
  EXPECT_EQ(cfg.study.model.subdivisions, 32);
  EXPECT_EQ(cfg.expect.final_e_true, 1e-6);
  EXPECT_EQ(cfg.verify.offsets.size(), 4u);
  EXPECT_EQ(cfg.verify.norm, rom::NormTag::Sup);
  EXPECT_EQ(cfg.workers, 2u);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.max_wave_number(), 120.0);
  EXPECT_EQ(parse("[verify]\nk0 = 30\n").max_wave_number(), 30.0);
  EXPECT_EQ(parse("[model]\nsubdivisions = 8\n").max_wave_number(), 0.0);
}

TEST(RunConfig, HashIgnoresFormattingOnly) {
  const auto a = parse("[model]\nsubdivisions = 8\n[plan]\npoints = 20\n");
  const auto b = parse("# note\n[plan]\npoints   =   20   \n\n[model]\nsubdivisions=8 # m\n");
  const auto c = parse("[model]\nsubdivisions = 9\n[plan]\npoints = 20\n");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(a.hash.size(), 16u);
}

TEST(RunConfig, CheckpointFormsAreExclusive) {
  EXPECT_NE(error_of("[study]\ncheckpoints = 5\ncheckpoint_step = 5\ncheckpoint_max = 10\n").find("either"),
            std::string::npos);
  EXPECT_NE(error_of("[study]\ncheckpoint_step = 5\n").find("either"), std::string::npos);
}

TEST(RunConfig, MissingFile) {
  try {
    load_run_config("/nonexistent/run.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
}

}  // namespace
}  // namespace hmor::config
