// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmor/fem.hpp"
#include "hmor/rom.hpp"
#include "hmor/soar.hpp"

namespace hmor::study {

/// Uniform wave-number grid, endpoints included (1/m).
struct KGrid {
  double min = 1.0;
  double max = 120.0;
  Index count = 60;

  std::vector<double> values() const;
};

/// Moving-average plateau rule on the per-checkpoint sup-over-k estimator.
struct StoppingRule {
  Index window = 3;
  double tol = 0.5;
  double floor = 1e-10;
};

enum class Decision { Continue, Stop };
std::string_view to_string(Decision d);

struct StoppingOutcome {
  std::vector<double> smoothed;
  std::vector<Decision> decisions;
  std::optional<std::size_t> stop_index;  // first Stop, if any
};

/// Trailing moving average s_i of width `window` (partial at the start). Stops
/// where |s_i - s_{i-window}| / |s_{i-window}| < tol with both averages full,
/// or where s rises while below `floor`.
StoppingOutcome stopping_decision(std::span<const double> trace, const StoppingRule& rule);

struct StudyConfig {
  fem::ModelSpec model;
  soar::ExpansionPlan plan;
  KGrid grid;
  std::vector<Index> checkpoints;
  std::vector<rom::NormTag> norms{rom::NormTag::Sup, rom::NormTag::Two};
  rom::NormTag stopping_norm = rom::NormTag::Sup;
  StoppingRule stopping;
  unsigned workers = 1;

  void validate() const;
  /// Stable digest of every field that influences the numbers.
  std::string hash() const;
};

struct Row {
  Index r = 0;
  double k = 0.0;
  rom::NormTag norm = rom::NormTag::Two;
  std::optional<rom::ErrorSample> sample;
  std::string skipped_reason;
};

/// Sup over the k-grid of each error column at one checkpoint.
struct Summary {
  Index r = 0;
  rom::NormTag norm = rom::NormTag::Two;
  Index samples = 0;
  double e_true = 0.0;
  double e_hat = 0.0;
  double e_tilde = 0.0;
  double abs_est = 0.0;
  double abs_true = 0.0;
  /// Some k has abs_est < 1e-2 * abs_true (estimator lags a converged error).
  bool underestimates = false;
};

struct CheckpointDiagnostics {
  Index r = 0;
  Index basis_columns = 0;
  bool saturated = false;  // no ROM of order r + 1 could be formed
  double orthonormality_defect = 0.0;
  /// ||G_r(k0) - G(k0)|| / ||G(k0)|| per expansion point; nullopt before the
  /// point has contributed a column.
  std::vector<std::optional<double>> zeroth_moment_error;
};

struct StopRow {
  Index r = 0;
  double sup_e_hat = 0.0;
  double smoothed = 0.0;
  Decision decision = Decision::Continue;
};

struct StudyResult {
  Index n = 0;
  std::vector<double> wave_numbers;
  std::vector<Row> rows;
  std::vector<Summary> summaries;
  std::vector<CheckpointDiagnostics> diagnostics;
  std::vector<StopRow> stopping;
  std::optional<Index> stop_r;
  std::vector<soar::PointCounters> counters;
  std::vector<std::string> warnings;
  std::string config_hash;
  double seconds = 0.0;

  const Summary& summary(Index r, rom::NormTag norm) const;
};

StudyResult run_study(const StudyConfig& cfg);
/// Same, on an already assembled system (cfg.model is ignored).
StudyResult run_study(const SecondOrderSystem& sys, const StudyConfig& cfg);

struct OrderFit {
  Index r = 0;
  std::vector<double> offsets;
  std::vector<double> discrepancy_hat;    // |E_r - E_hat_r|
  std::vector<double> discrepancy_tilde;  // |E_r - E_tilde_r|
  double slope_hat = 0.0;
  double slope_tilde = 0.0;
  double residual_hat = 0.0;
  double residual_tilde = 0.0;
};

/// k0 * 10^{-1, -1.5, -2, -2.5, -3}.
std::vector<double> default_offsets(double k0);

/// Fits log|E_r - E_hat_r| against log(offset) for s = i (k0 + offset) using a
/// single-point complex SOAR basis. Offsets must be positive, strictly
/// decreasing and at most 0.1 k0.
std::vector<OrderFit> verify_order(const SecondOrderSystem& sys, double k0,
                                   std::span<const Index> r_values, std::span<const double> offsets,
                                   rom::NormTag norm = rom::NormTag::Two);

/// Least-squares slope and RMS residual of log10(y) against log10(x).
std::pair<double, double> loglog_slope(std::span<const double> x, std::span<const double> y);

/// CSV header: r,k,norm,E_true,E_hat,E_tilde,abs_est,abs_true,skipped_reason.
/// Throws EmptyResult when the (optionally norm-filtered) table is empty.
void emit_csv(std::ostream& out, const StudyResult& result,
              std::optional<rom::NormTag> only = std::nullopt);
/// CSV header: r,sup_E_hat,smoothed,decision.
void emit_stopping_csv(std::ostream& out, const StudyResult& result);
/// log10 of the sup-over-k error columns against r, one polyline per series.
void emit_svg(std::ostream& out, const StudyResult& result, rom::NormTag norm);

/// Writes study.csv, stopping.csv and errors_<norm>.svg into `dir`.
std::vector<std::filesystem::path> emit_files(const std::filesystem::path& dir,
                                              const StudyResult& result);

}  // namespace hmor::study
