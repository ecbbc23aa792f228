// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "hmor/error.hpp"
#include "hmor/format.hpp"
#include "hmor/parallel.hpp"

namespace hmor::study {

std::vector<double> KGrid::values() const {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "k-grid needs at least one point");
  if (!(min > 0.0) || !(max >= min) || !std::isfinite(max)) {
    throw Error(ErrorKind::InvalidArgument, "k-grid must satisfy 0 < min <= max < inf");
  }
  std::vector<double> ks(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    ks[i] = count == 1 ? min
                       : min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return ks;
}

std::string_view to_string(Decision d) { return d == Decision::Stop ? "stop" : "continue"; }

StoppingOutcome stopping_decision(std::span<const double> trace, const StoppingRule& rule) {
  if (rule.window < 1) throw Error(ErrorKind::InvalidArgument, "stopping window must be >= 1");
  const std::size_t w = static_cast<std::size_t>(rule.window);
  StoppingOutcome out;
  out.smoothed.resize(trace.size());
  out.decisions.assign(trace.size(), Decision::Continue);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += trace[j];
    out.smoothed[i] = sum / static_cast<double>(i - lo + 1);

    // Relative change over the last `window` checkpoints, once both ends are
    // full-window averages.
    bool stop = false;
    if (i >= 2 * w - 1) {
      const double ref = out.smoothed[i - w];
      const double change = std::abs(out.smoothed[i] - ref) / std::abs(ref);
      stop = change < rule.tol;
    }
    if (i >= 1 && out.smoothed[i] > out.smoothed[i - 1] && out.smoothed[i] < rule.floor) stop = true;
    if (stop) {
      out.decisions[i] = Decision::Stop;
      if (!out.stop_index) out.stop_index = i;
    }
  }
  return out;
}

void StudyConfig::validate() const {
  plan.validate();
  (void)grid.values();
  if (checkpoints.empty()) throw Error(ErrorKind::InvalidArgument, "no checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1) throw Error(ErrorKind::InvalidArgument, "checkpoints must be >= 1");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "checkpoints must be strictly increasing");
    }
  }
  if (norms.empty()) throw Error(ErrorKind::InvalidArgument, "no norm selected");
  if (std::find(norms.begin(), norms.end(), stopping_norm) == norms.end()) {
    throw Error(ErrorKind::InvalidArgument, "stopping norm must be one of the reported norms");
  }
  if (stopping.window < 1) throw Error(ErrorKind::InvalidArgument, "stopping window must be >= 1");
}

std::string StudyConfig::hash() const {
  Fnv1a h;
  h.update("m=" + std::to_string(model.subdivisions));
  h.update(model.boundary.neumann_y_min);
  h.update(model.boundary.neumann_y_max);
  for (const auto& p : model.probes) {
    h.update(p.x);
    h.update(p.y);
  }
  for (double k0 : plan.wave_numbers) h.update(k0);
  h.update(soar::to_string(plan.schedule));
  for (Index b : plan.budgets) h.update(std::to_string(b) + ",");
  h.update(soar::to_string(plan.mode));
  h.update(soar::to_string(plan.side));
  h.update(plan.deflation_tol);
  h.update(grid.min);
  h.update(grid.max);
  h.update(std::to_string(grid.count));
  for (Index r : checkpoints) h.update(std::to_string(r) + ",");
  for (auto nt : norms) h.update(rom::to_string(nt));
  h.update(rom::to_string(stopping_norm));
  h.update(std::to_string(stopping.window));
  h.update(stopping.tol);
  h.update(stopping.floor);
  return h.hex();
}

const Summary& StudyResult::summary(Index r, rom::NormTag norm) const {
  for (const auto& s : summaries) {
    if (s.r == r && s.norm == norm) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "no summary for r = " + std::to_string(r));
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  fem::Model model = fem::build_model(cfg.model);
  StudyResult result = run_study(model.system, cfg);
  result.warnings.insert(result.warnings.begin(), model.warnings.begin(), model.warnings.end());
  return result;
}

StudyResult run_study(const SecondOrderSystem& sys, const StudyConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  StudyResult result;
  result.n = sys.n();
  result.config_hash = cfg.hash();
  result.wave_numbers = cfg.grid.values();
  const auto& ks = result.wave_numbers;

  // FOM transfer values, computed once per k and reused by every checkpoint.
  std::vector<std::optional<DenseComplexBlock>> fom(ks.size());
  std::vector<std::string> fom_failure(ks.size());
  parallel_for(ks.size(), cfg.workers, [&](std::size_t i) {
    try {
      fom[i] = rom::eval_fom(sys, ks[i]).value;
    } catch (const Error& e) {
      fom_failure[i] = std::string(to_string(e.kind()));
    }
  });
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!fom[i]) result.warnings.push_back("FOM skipped at k = " + shortest(ks[i]) + ": " + fom_failure[i]);
  }

  const auto& points = cfg.plan.wave_numbers;
  std::vector<DenseComplexBlock> fom_at_points(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) fom_at_points[p] = rom::eval_fom(sys, points[p]).value;

  soar::SoarState state(sys, cfg.plan, cfg.workers);
  const Index block = cfg.plan.side == soar::KrylovSide::Input ? sys.inputs() : sys.outputs();

  for (Index r : cfg.checkpoints) {
    state.extend_to_columns(r + 1);
    const Index cols = state.basis().cols();
    if (cols < r) {
      throw Error(ErrorKind::BasisFull, "checkpoint r = " + std::to_string(r) +
                                            " unreachable: basis stopped at " + std::to_string(cols) +
                                            " columns");
    }
    const bool saturated = cols == r;
    const rom::ReducedSystem rom_top = rom::project(sys, state.basis().leading(saturated ? r : r + 1));
    const rom::ReducedSystem rom_r = saturated ? rom_top : rom_top.leading(r);
    const rom::ReducedSystem& rom_r1 = rom_top;

    CheckpointDiagnostics diag;
    diag.r = r;
    diag.basis_columns = cols;
    diag.saturated = saturated;
    diag.orthonormality_defect = orthonormality_defect(state.basis().leading(rom_top.r()));
    diag.zeroth_moment_error.resize(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (!soar::holds_start_block(state.basis(), r, p, block)) continue;
      const DenseComplexBlock gr = rom::transfer_rom(rom_r, Complex(0.0, points[p]));
      diag.zeroth_moment_error[p] = (gr - fom_at_points[p]).norm() / fom_at_points[p].norm();
    }
    result.diagnostics.push_back(std::move(diag));

    // Per-k rows, written into fixed slots so output order never depends on threads.
    const std::size_t nn = cfg.norms.size();
    std::vector<Row> rows(ks.size() * nn);
    parallel_for(ks.size(), cfg.workers, [&](std::size_t i) {
      std::string reason;
      DenseComplexBlock gr, gr1;
      if (!fom[i]) {
        reason = fom_failure[i];
      } else {
        try {
          gr = rom::transfer_rom(rom_r, Complex(0.0, ks[i]));
          gr1 = saturated ? gr : rom::transfer_rom(rom_r1, Complex(0.0, ks[i]));
        } catch (const Error& e) {
          reason = std::string(to_string(e.kind()));
        }
      }
      for (std::size_t j = 0; j < nn; ++j) {
        Row& row = rows[i * nn + j];
        row.r = r;
        row.k = ks[i];
        row.norm = cfg.norms[j];
        row.skipped_reason = reason;
        if (!reason.empty()) continue;
        try {
          row.sample = rom::error_sample(ks[i], *fom[i], gr, gr1, cfg.norms[j]);
        } catch (const Error& e) {
          row.skipped_reason = std::string(to_string(e.kind()));
        }
      }
    });

    for (auto nt : cfg.norms) {
      Summary s;
      s.r = r;
      s.norm = nt;
      for (const auto& row : rows) {
        if (row.norm != nt || !row.sample) continue;
        const auto& e = *row.sample;
        ++s.samples;
        s.e_true = std::max(s.e_true, e.e_true);
        s.e_hat = std::max(s.e_hat, e.e_hat);
        s.e_tilde = std::max(s.e_tilde, e.e_tilde);
        s.abs_est = std::max(s.abs_est, e.abs_est);
        s.abs_true = std::max(s.abs_true, e.abs_true);
        if (e.abs_est < 1e-2 * e.abs_true) s.underestimates = true;
      }
      result.summaries.push_back(s);
    }
    for (auto& row : rows) {
      if (!row.skipped_reason.empty()) {
        result.warnings.push_back("skipped r = " + std::to_string(r) + ", k = " + shortest(row.k) +
                                  ": " + row.skipped_reason);
      }
      result.rows.push_back(std::move(row));
    }
  }

  std::vector<double> trace;
  for (Index r : cfg.checkpoints) trace.push_back(result.summary(r, cfg.stopping_norm).e_hat);
  const StoppingOutcome stop = stopping_decision(trace, cfg.stopping);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    result.stopping.push_back({cfg.checkpoints[i], trace[i], stop.smoothed[i], stop.decisions[i]});
  }
  if (stop.stop_index) result.stop_r = cfg.checkpoints[*stop.stop_index];
  result.counters = state.counters();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<double> default_offsets(double k0) {
  std::vector<double> out;
  for (double e : {-1.0, -1.5, -2.0, -2.5, -3.0}) out.push_back(k0 * std::pow(10.0, e));
  return out;
}

std::pair<double, double> loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::ShapeError, "fit inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorKind::InsufficientData, "need at least two points");
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log10(x[i]);
    ly[i] = std::log10(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = ly[i] - (my + slope * (lx[i] - mx));
    ss += res * res;
  }
  return {slope, std::sqrt(ss / n)};
}

std::vector<OrderFit> verify_order(const SecondOrderSystem& sys, double k0,
                                   std::span<const Index> r_values, std::span<const double> offsets,
                                   rom::NormTag norm) {
  if (r_values.empty()) throw Error(ErrorKind::InvalidArgument, "no orders to verify");
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!(offsets[i] > 0.0) || offsets[i] > 0.1 * k0 * (1.0 + 1e-12)) {
      throw Error(ErrorKind::InvalidArgument, "offsets must lie in (0, 0.1 k0]");
    }
    if (i > 0 && !(offsets[i] < offsets[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "offsets must be strictly decreasing");
    }
  }
  const Index r_max = *std::max_element(r_values.begin(), r_values.end());
  if (*std::min_element(r_values.begin(), r_values.end()) < 1) {
    throw Error(ErrorKind::InvalidArgument, "orders must be >= 1");
  }

  soar::ExpansionPlan plan;
  plan.wave_numbers = {k0};
  soar::SoarState state(sys, plan);
  if (!state.extend_to_columns(r_max + 1)) {
    throw Error(ErrorKind::BasisFull, "basis saturated before order " + std::to_string(r_max + 1));
  }
  const rom::ReducedSystem top = rom::project(sys, state.basis().leading(r_max + 1));

  std::vector<DenseComplexBlock> g(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) g[i] = rom::transfer_fom(sys, Complex(0.0, k0 + offsets[i]));

  std::vector<OrderFit> fits;
  for (Index r : r_values) {
    const rom::ReducedSystem rom_r = top.leading(r);
    const rom::ReducedSystem rom_r1 = top.leading(r + 1);
    OrderFit fit;
    fit.r = r;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      const Complex s(0.0, k0 + offsets[i]);
      try {
        const auto e = rom::error_sample(k0 + offsets[i], g[i], rom::transfer_rom(rom_r, s),
                                         rom::transfer_rom(rom_r1, s), norm);
        const double dh = std::abs(e.e_true - e.e_hat);
        const double dt = std::abs(e.e_true - e.e_tilde);
        if (!(dh > 0.0) || !(dt > 0.0)) continue;
        fit.offsets.push_back(offsets[i]);
        fit.discrepancy_hat.push_back(dh);
        fit.discrepancy_tilde.push_back(dt);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateDenominator &&
            e.kind() != ErrorKind::SingularReducedOperator) {
          throw;
        }
      }
    }
    if (fit.offsets.size() < 4) {
      throw Error(ErrorKind::InsufficientData, "order " + std::to_string(r) + " has only " +
                                                   std::to_string(fit.offsets.size()) + " usable offsets");
    }
    std::tie(fit.slope_hat, fit.residual_hat) = loglog_slope(fit.offsets, fit.discrepancy_hat);
    std::tie(fit.slope_tilde, fit.residual_tilde) = loglog_slope(fit.offsets, fit.discrepancy_tilde);
    fits.push_back(std::move(fit));
  }
  return fits;
}

void emit_csv(std::ostream& out, const StudyResult& result, std::optional<rom::NormTag> only) {
  std::size_t emitted = 0;
  for (const auto& row : result.rows) emitted += !only || row.norm == *only;
  if (emitted == 0) throw Error(ErrorKind::EmptyResult, "no rows to emit");
  out << "r,k,norm,E_true,E_hat,E_tilde,abs_est,abs_true,skipped_reason\n";
  for (const auto& row : result.rows) {
    if (only && row.norm != *only) continue;
    out << row.r << ',' << shortest(row.k) << ',' << rom::to_string(row.norm) << ',';
    if (row.sample) {
      const auto& e = *row.sample;
      out << shortest(e.e_true) << ',' << shortest(e.e_hat) << ',' << shortest(e.e_tilde) << ','
          << shortest(e.abs_est) << ',' << shortest(e.abs_true) << ',';
    } else {
      out << ",,,,,";
    }
    out << row.skipped_reason << '\n';
  }
}

void emit_stopping_csv(std::ostream& out, const StudyResult& result) {
  if (result.stopping.empty()) throw Error(ErrorKind::EmptyResult, "no stopping trace");
  out << "r,sup_E_hat,smoothed,decision\n";
  for (const auto& s : result.stopping) {
    out << s.r << ',' << shortest(s.sup_e_hat) << ',' << shortest(s.smoothed) << ','
        << to_string(s.decision) << '\n';
  }
}

namespace {

struct Series {
  const char* name;
  const char* color;
  double Summary::*field;
};

constexpr Series kSeries[] = {
    {"E_true", "#1f77b4", &Summary::e_true},
    {"E_hat", "#d62728", &Summary::e_hat},
    {"E_tilde", "#2ca02c", &Summary::e_tilde},
    {"abs_est", "#9467bd", &Summary::abs_est},
};

// log10 clamped so exact zeros still plot.
double plot_log(double v) { return std::log10(std::max(v, 1e-17)); }

}  // namespace

void emit_svg(std::ostream& out, const StudyResult& result, rom::NormTag norm) {
  std::vector<const Summary*> pts;
  for (const auto& s : result.summaries) {
    if (s.norm == norm) pts.push_back(&s);
  }
  if (pts.empty()) throw Error(ErrorKind::EmptyResult, "no summaries for norm " + std::string(rom::to_string(norm)));

  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto* s : pts) {
    for (const auto& ser : kSeries) {
      const double v = plot_log(s->*ser.field);
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  ylo = std::floor(ylo);
  yhi = std::ceil(yhi);
  if (yhi <= ylo) yhi = ylo + 1.0;
  const double xlo = 0.0;
  const double xhi = static_cast<double>(pts.back()->r);

  const double width = 640, height = 400, left = 70, right = 130, top = 30, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double r) { return left + (xhi > xlo ? (r - xlo) / (xhi - xlo) : 0.5) * pw; };
  auto py = [&](double l) { return top + (yhi - l) / (yhi - ylo) * ph; };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">sup over k of error vs r ("
      << rom::to_string(norm) << "-norm)</text>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double l = ylo; l <= yhi + 0.5; l += 1.0) {
    svg << "<line x1=\"" << left << "\" y1=\"" << py(l) << "\" x2=\"" << left + pw << "\" y2=\"" << py(l)
        << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << py(l) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">1e" << static_cast<int>(l) << "</text>\n";
  }
  for (const auto* s : pts) {
    svg << "<text x=\"" << px(static_cast<double>(s->r)) << "\" y=\"" << top + ph + 16
        << "\" font-size=\"11\" text-anchor=\"middle\">" << s->r << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">ROM dimension r</text>\n";
  for (std::size_t i = 0; i < std::size(kSeries); ++i) {
    const auto& ser = kSeries[i];
    svg << "<polyline id=\"" << ser.name << "\" fill=\"none\" stroke=\"" << ser.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j) svg << ' ';
      svg << px(static_cast<double>(pts[j]->r)) << ',' << py(plot_log(pts[j]->*ser.field));
    }
    svg << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(i);
    svg << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << ser.color << "\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << ser.name
        << "</text>\n";
  }
  svg << "</svg>\n";
  out << svg.str();
}

std::vector<std::filesystem::path> emit_files(const std::filesystem::path& dir,
                                              const StudyResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    written.push_back(p);
    return f;
  };
  {
    auto f = open(dir / "study.csv");
    emit_csv(f, result);
  }
  {
    auto f = open(dir / "stopping.csv");
    emit_stopping_csv(f, result);
  }
  std::vector<rom::NormTag> seen;
  for (const auto& s : result.summaries) {
    if (std::find(seen.begin(), seen.end(), s.norm) != seen.end()) continue;
    seen.push_back(s.norm);
    auto f = open(dir / ("errors_" + std::string(rom::to_string(s.norm)) + ".svg"));
    emit_svg(f, result, s.norm);
  }
  for (const auto& p : written) {
    if (!std::filesystem::exists(p)) throw Error(ErrorKind::IoError, "failed to write " + p.string());
  }
  return written;
}

}  // namespace hmor::study
