// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "hmor/fem.hpp"
#include "hmor/format.hpp"
#include "hmor/linalg.hpp"
#include "hmor/matrix_market.hpp"
#include "hmor/parallel.hpp"
#include "hmor/rom.hpp"
#include "hmor/soar.hpp"
#include "hmor/study.hpp"

namespace hmor::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kOrthonormalityTolerance = 1e-10;
constexpr double kMomentTolerance = 1e-8;
constexpr double kMinPointsPerWavelength = 10.0;

unsigned workers_of(const config::RunConfig& cfg) {
  return cfg.workers.value_or(default_workers());
}

void prepare(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

json base_manifest(const config::RunConfig& cfg, std::string_view command) {
  json m;
  m["command"] = command;
  m["config"] = cfg.source.string();
  m["config_hash"] = cfg.hash;
  return m;
}

void write_manifest(const config::RunConfig& cfg, const json& m) {
  auto out = open_out(cfg.out / "manifest.json");
  out << m.dump(2) << '\n';
}

json resolution(const config::RunConfig& cfg, std::ostream& log) {
  const double h = 1.0 / static_cast<double>(cfg.model.subdivisions);
  const double k = cfg.max_wave_number();
  json j;
  j["h"] = h;
  j["k_max"] = k;
  if (k <= 0.0) {
    j["points_per_wavelength"] = nullptr;
    j["warning"] = false;
    return j;
  }
  const double ppw = fem::points_per_wavelength(h, k);
  j["points_per_wavelength"] = ppw;
  j["warning"] = ppw < kMinPointsPerWavelength;
  if (ppw < kMinPointsPerWavelength) {
    log << "warning: lambda/h = " << shortest(ppw) << " < 10 at k = " << shortest(k)
        << "; the mesh under-resolves the largest requested wave number\n";
  }
  return j;
}

json plan_json(const soar::ExpansionPlan& plan) {
  json j;
  j["points"] = plan.wave_numbers;
  j["schedule"] = soar::to_string(plan.schedule);
  j["budgets"] = plan.budgets;
  j["mode"] = soar::to_string(plan.mode);
  j["side"] = soar::to_string(plan.side);
  j["deflation_tol"] = plan.deflation_tol;
  return j;
}

json counters_json(const soar::ExpansionPlan& plan, const std::vector<soar::PointCounters>& c) {
  json arr = json::array();
  for (std::size_t p = 0; p < c.size(); ++p) {
    json j;
    j["point"] = p;
    j["k0"] = plan.wave_numbers[p];
    if (!plan.budgets.empty()) j["budget"] = plan.budgets[p];
    j["slots"] = c[p].slots;
    j["candidates"] = c[p].candidates;
    j["accepted"] = c[p].accepted;
    j["deflated"] = c[p].deflated;
    arr.push_back(j);
  }
  return arr;
}

void require_plan(const config::RunConfig& cfg) {
  if (!cfg.has_plan) {
    throw Error(ErrorKind::ConfigError, cfg.source.string() + ": [plan] points is required");
  }
}

std::vector<std::string> log_warnings(const std::vector<std::string>& w, std::ostream& log) {
  for (const auto& s : w) log << "warning: " << s << '\n';
  return w;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
      return kUsage;
    default:
      return kModel;
  }
}

config::RunConfig resolve(config::RunConfig cfg, const Overrides& o) {
  if (o.out) cfg.out = *o.out;
  if (o.workers) {
    if (*o.workers < 1) throw Error(ErrorKind::ConfigError, "--workers must be >= 1");
    cfg.workers = *o.workers;
  }
  if (o.norm) {
    cfg.study.norms = {*o.norm};
    cfg.study.stopping_norm = *o.norm;
    cfg.verify.norm = *o.norm;
  }
  cfg.study.workers = workers_of(cfg);
  return cfg;
}

int cmd_assemble(const config::RunConfig& cfg, std::ostream& log) {
  const fem::Model model = fem::build_model(cfg.model);
  prepare(cfg.out);
  const auto& sys = model.system;
  mm::save(cfg.out / "M.mtx", sys.M, true);
  mm::save(cfg.out / "D.mtx", sys.D, true);
  mm::save(cfg.out / "K.mtx", sys.K, true);
  mm::save(cfg.out / "B.mtx", sys.B);
  mm::save(cfg.out / "C.mtx", sys.C);
  {
    auto out = open_out(cfg.out / "mesh.txt");
    fem::write_mesh(out, model.mesh);
  }

  json m = base_manifest(cfg, "assemble");
  m["n"] = sys.n();
  m["inputs"] = sys.inputs();
  m["outputs"] = sys.outputs();
  m["subdivisions"] = cfg.model.subdivisions;
  m["mesh_hash"] = sys.metadata.mesh_hash;
  m["boundary"] = sys.metadata.boundary;
  m["nnz"] = {{"M", sys.M.nonZeros()}, {"D", sys.D.nonZeros()}, {"K", sys.K.nonZeros()}};
  m["resolution"] = resolution(cfg, log);
  m["warnings"] = log_warnings(model.warnings, log);
  m["files"] = {"M.mtx", "D.mtx", "K.mtx", "B.mtx", "C.mtx", "mesh.txt"};
  write_manifest(cfg, m);
  log << "assembled n = " << sys.n() << " into " << cfg.out.string() << '\n';
  return kOk;
}

int cmd_reduce(const config::RunConfig& cfg, std::ostream& log) {
  require_plan(cfg);
  const fem::Model model = fem::build_model(cfg.model);
  const auto& sys = model.system;
  soar::SoarState state(sys, cfg.plan, workers_of(cfg));

  bool saturated = false;
  if (cfg.reduce_dimension) {
    saturated = !state.extend_to_columns(*cfg.reduce_dimension);
  } else if (auto total = cfg.plan.total_budget()) {
    state.extend(*total);
  } else {
    throw Error(ErrorKind::ConfigError,
                cfg.source.string() + ": [reduce] dimension is required without plan budgets");
  }
  const auto& basis = state.basis();
  const rom::ReducedSystem rom = rom::project(sys, basis);

  prepare(cfg.out);
  mm::save(cfg.out / "V.mtx", DenseComplexBlock(basis.matrix()));
  {
    auto out = open_out(cfg.out / "provenance.csv");
    soar::write_provenance(out, basis);
  }
  mm::save(cfg.out / "Mr.mtx", rom.M);
  mm::save(cfg.out / "Dr.mtx", rom.D);
  mm::save(cfg.out / "Kr.mtx", rom.K);
  mm::save(cfg.out / "Br.mtx", rom.B);
  mm::save(cfg.out / "Cr.mtx", rom.C);

  // Properties: orthonormal basis, zeroth moment matched at each covered point.
  bool ok = true;
  const double defect = orthonormality_defect(basis.matrix());
  if (defect > kOrthonormalityTolerance) {
    log << "property failure: orthonormality defect " << shortest(defect) << '\n';
    ok = false;
  }
  const Index block = cfg.plan.side == soar::KrylovSide::Input ? sys.inputs() : sys.outputs();
  json moments = json::array();
  for (std::size_t p = 0; p < cfg.plan.wave_numbers.size(); ++p) {
    if (!soar::holds_start_block(basis, basis.cols(), p, block)) {
      moments.push_back(nullptr);
      continue;
    }
    const double k0 = cfg.plan.wave_numbers[p];
    const auto g = rom::eval_fom(sys, k0).value;
    const double err = (rom::eval_rom(rom, k0).value - g).norm() / g.norm();
    moments.push_back(err);
    if (err > kMomentTolerance) {
      log << "property failure: zeroth moment error " << shortest(err) << " at k0 = " << shortest(k0) << '\n';
      ok = false;
    }
  }

  json m = base_manifest(cfg, "reduce");
  m["n"] = sys.n();
  m["r"] = rom.r();
  m["saturated"] = saturated;
  m["slots"] = state.slots_used();
  m["plan"] = plan_json(cfg.plan);
  m["points"] = counters_json(cfg.plan, state.counters());
  m["basis_hash"] = basis.hash();
  m["orthonormality_defect"] = defect;
  m["zeroth_moment_error"] = moments;
  m["resolution"] = resolution(cfg, log);
  m["warnings"] = log_warnings(model.warnings, log);
  m["files"] = {"V.mtx", "provenance.csv", "Mr.mtx", "Dr.mtx", "Kr.mtx", "Br.mtx", "Cr.mtx"};
  write_manifest(cfg, m);

  log << "reduced n = " << sys.n() << " to r = " << rom.r();
  for (std::size_t p = 0; p < state.counters().size(); ++p) {
    log << (p ? "/" : " (") << state.counters()[p].accepted;
  }
  log << (state.counters().empty() ? "" : " columns per point)") << '\n';
  return ok ? kOk : kProperty;
}

int cmd_sweep(const config::RunConfig& cfg, std::ostream& log) {
  if (cfg.sweep.grid.count < 1) {
    throw Error(ErrorKind::ConfigError, cfg.source.string() + ": [sweep] k_count must be >= 1");
  }
  const auto ks = cfg.sweep.grid.values();
  const fem::Model model = fem::build_model(cfg.model);
  const auto& sys = model.system;
  const unsigned workers = workers_of(cfg);

  std::optional<rom::ReducedSystem> rom;
  std::string basis_hash;
  if (cfg.sweep.rom_dimension > 0) {
    require_plan(cfg);
    soar::SoarState state(sys, cfg.plan, workers);
    state.extend_to_columns(cfg.sweep.rom_dimension);
    rom = rom::project(sys, state.basis());
    basis_hash = state.basis().hash();
  }

  std::vector<DenseComplexBlock> fom(ks.size()), red(ks.size());
  std::vector<std::string> failed(ks.size());
  parallel_for(ks.size(), workers, [&](std::size_t i) {
    fom[i] = rom::eval_fom(sys, ks[i]).value;
    if (rom) {
      try {
        red[i] = rom::eval_rom(*rom, ks[i]).value;
      } catch (const Error& e) {
        failed[i] = std::string(to_string(e.kind()));
      }
    }
  });

  prepare(cfg.out);
  {
    auto out = open_out(cfg.out / "transfer.csv");
    out << "k,source,output,input,re,im\n";
    auto emit = [&](double k, std::string_view src, const DenseComplexBlock& g) {
      for (Index o = 0; o < g.rows(); ++o) {
        for (Index i = 0; i < g.cols(); ++i) {
          out << shortest(k) << ',' << src << ',' << o << ',' << i << ',' << shortest(g(o, i).real())
              << ',' << shortest(g(o, i).imag()) << '\n';
        }
      }
    };
    for (std::size_t i = 0; i < ks.size(); ++i) {
      emit(ks[i], "fom", fom[i]);
      if (rom && failed[i].empty()) emit(ks[i], "rom", red[i]);
    }
  }

  std::vector<std::string> warnings = model.warnings;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!failed[i].empty()) warnings.push_back("ROM skipped at k = " + shortest(ks[i]) + ": " + failed[i]);
  }
  json m = base_manifest(cfg, "sweep");
  m["n"] = sys.n();
  m["k"] = {{"min", cfg.sweep.grid.min}, {"max", cfg.sweep.grid.max}, {"count", cfg.sweep.grid.count}};
  m["rom_dimension"] = rom ? rom->r() : 0;
  if (rom) {
    m["plan"] = plan_json(cfg.plan);
    m["basis_hash"] = basis_hash;
  }
  m["resolution"] = resolution(cfg, log);
  m["warnings"] = log_warnings(warnings, log);
  m["files"] = {"transfer.csv"};
  write_manifest(cfg, m);
  log << "swept " << ks.size() << " wave numbers\n";
  return kOk;
}

int cmd_study(const config::RunConfig& cfg, std::ostream& log) {
  require_plan(cfg);
  study::StudyConfig sc = cfg.study;
  sc.workers = workers_of(cfg);
  const study::StudyResult res = study::run_study(sc);
  prepare(cfg.out);
  const auto files = study::emit_files(cfg.out, res);

  bool ok = true;
  json checks = json::array();
  auto check = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    log << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    ok = ok && pass;
  };

  double worst_defect = 0.0, worst_moment = 0.0;
  for (const auto& d : res.diagnostics) {
    worst_defect = std::max(worst_defect, d.orthonormality_defect);
    for (const auto& e : d.zeroth_moment_error) {
      if (e) worst_moment = std::max(worst_moment, *e);
    }
  }
  check("orthonormality", worst_defect <= kOrthonormalityTolerance,
        "max defect " + shortest(worst_defect));
  check("zeroth_moment", worst_moment <= kMomentTolerance, "max relative error " + shortest(worst_moment));

  const Index last = sc.checkpoints.back();
  if (cfg.expect.final_e_true) {
    const double e = res.summary(last, rom::NormTag::Sup).e_true;
    check("final_e_true", e <= *cfg.expect.final_e_true,
          "sup E_true(r=" + std::to_string(last) + ") = " + shortest(e));
  }
  if (cfg.expect.tracking_factor) {
    const double f = *cfg.expect.tracking_factor;
    bool pass = true;
    std::string detail = "within factor " + shortest(f);
    for (Index r : sc.checkpoints) {
      const auto& s = res.summary(r, rom::NormTag::Sup);
      if (s.e_true <= cfg.expect.tracking_floor) continue;
      if (s.e_hat > f * s.e_true || s.e_hat * f < s.e_true) {
        pass = false;
        detail = "r = " + std::to_string(r) + ": E_hat " + shortest(s.e_hat) + " vs E_true " + shortest(s.e_true);
        break;
      }
    }
    check("tracking", pass, detail);
  }

  json m = base_manifest(cfg, "study");
  m["n"] = res.n;
  m["study_hash"] = res.config_hash;
  m["plan"] = plan_json(sc.plan);
  m["checkpoints"] = sc.checkpoints;
  m["points"] = counters_json(sc.plan, res.counters);
  m["stop_r"] = res.stop_r ? json(*res.stop_r) : json(nullptr);
  json sums = json::array();
  for (const auto& s : res.summaries) {
    sums.push_back({{"r", s.r},
                    {"norm", rom::to_string(s.norm)},
                    {"samples", s.samples},
                    {"E_true", s.e_true},
                    {"E_hat", s.e_hat},
                    {"E_tilde", s.e_tilde},
                    {"abs_est", s.abs_est},
                    {"abs_true", s.abs_true},
                    {"underestimates", s.underestimates}});
  }
  m["summaries"] = sums;
  m["checks"] = checks;
  m["resolution"] = resolution(cfg, log);
  m["warnings"] = log_warnings(res.warnings, log);
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  m["files"] = names;
  write_manifest(cfg, m);
  log << "study finished in " << shortest(std::round(res.seconds * 100) / 100) << " s"
      << (res.stop_r ? ", stop at r = " + std::to_string(*res.stop_r) : ", no stop") << '\n';
  return ok ? kOk : kProperty;
}

int cmd_verify(const config::RunConfig& cfg, std::ostream& log) {
  const fem::Model model = fem::build_model(cfg.model);
  const auto& v = cfg.verify;
  const auto offsets = v.offsets.empty() ? study::default_offsets(v.k0) : v.offsets;
  const auto fits = study::verify_order(model.system, v.k0, v.orders, offsets, v.norm);

  prepare(cfg.out);
  bool ok = true;
  json fj = json::array();
  {
    auto out = open_out(cfg.out / "order.csv");
    out << "r,offset,discrepancy_hat,discrepancy_tilde\n";
    for (const auto& f : fits) {
      for (std::size_t i = 0; i < f.offsets.size(); ++i) {
        out << f.r << ',' << shortest(f.offsets[i]) << ',' << shortest(f.discrepancy_hat[i]) << ','
            << shortest(f.discrepancy_tilde[i]) << '\n';
      }
      const double need = static_cast<double>(f.r) + v.min_slope_margin;
      const bool pass = f.slope_hat >= need && f.slope_tilde >= need;
      ok = ok && pass;
      log << (pass ? "PASS" : "FAIL") << " r = " << f.r << ": slope_hat " << shortest(f.slope_hat)
          << ", slope_tilde " << shortest(f.slope_tilde) << " (need >= " << shortest(need) << ")\n";
      fj.push_back({{"r", f.r},
                    {"slope_hat", f.slope_hat},
                    {"slope_tilde", f.slope_tilde},
                    {"residual_hat", f.residual_hat},
                    {"residual_tilde", f.residual_tilde},
                    {"pass", pass}});
    }
  }

  json m = base_manifest(cfg, "verify-order");
  m["n"] = model.system.n();
  m["k0"] = v.k0;
  m["norm"] = rom::to_string(v.norm);
  m["offsets"] = offsets;
  m["fits"] = fj;
  m["resolution"] = resolution(cfg, log);
  m["warnings"] = log_warnings(model.warnings, log);
  m["files"] = {"order.csv"};
  write_manifest(cfg, m);
  return ok ? kOk : kProperty;
}

int run(std::string_view command, const fs::path& config_path, const Overrides& overrides,
        std::ostream& log, std::ostream& err) {
  try {
    const config::RunConfig cfg = resolve(config::load_run_config(config_path), overrides);
    if (command == "assemble") return cmd_assemble(cfg, log);
    if (command == "reduce") return cmd_reduce(cfg, log);
    if (command == "sweep") return cmd_sweep(cfg, log);
    if (command == "study") return cmd_study(cfg, log);
    if (command == "verify-order") return cmd_verify(cfg, log);
    err << "unknown command '" << command << "'\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kModel;
  }
}

}  // namespace hmor::cli
