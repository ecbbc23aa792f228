// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include "hmor/error.hpp"
#include "hmor/fem.hpp"
#include "hmor/linalg.hpp"
#include "hmor/rom.hpp"
#include "hmor/soar.hpp"
#include "test_util.hpp"

namespace hmor::rom {
namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::EmptyResult;
}

const SecondOrderSystem& model(Index m) {
  static std::map<Index, SecondOrderSystem> cache;
  auto it = cache.find(m);
  if (it == cache.end()) {
    fem::ModelSpec spec;
    spec.subdivisions = m;
    it = cache.emplace(m, fem::build_model(spec).system).first;
  }
  return it->second;
}

ReducedSystem single_point_rom(const SecondOrderSystem& sys, double k0, Index r) {
  soar::ExpansionPlan plan;
  plan.wave_numbers = {k0};
  auto state = soar::init_state(sys, plan);
  state.extend_to_columns(r);
  return project(sys, state.basis());
}

TEST(Project, IdentityRecoversFom) {
  const auto& sys = model(4);
  const auto rom = project(sys, Eigen::MatrixXcd::Identity(sys.n(), sys.n()));
  EXPECT_EQ(rom.M, Eigen::MatrixXcd(to_complex(sys.M)));
  EXPECT_EQ(rom.D, Eigen::MatrixXcd(to_complex(sys.D)));
  EXPECT_EQ(rom.K, Eigen::MatrixXcd(to_complex(sys.K)));
  EXPECT_EQ(rom.B, Eigen::MatrixXcd(to_complex(sys.B)));
  EXPECT_EQ(rom.C, Eigen::MatrixXcd(to_complex(sys.C)));
}

TEST(Project, FirstUnitVector) {
  const auto& sys = model(4);
  const auto rom = project(sys, Eigen::MatrixXcd::Identity(sys.n(), 1));
  EXPECT_EQ(rom.r(), 1);
  EXPECT_EQ(rom.M(0, 0), Complex(sys.M.coeff(0, 0)));
  EXPECT_EQ(rom.D(0, 0), Complex(sys.D.coeff(0, 0)));
  EXPECT_EQ(rom.K(0, 0), Complex(sys.K.coeff(0, 0)));
  EXPECT_EQ(kind_of([&] { project(sys, Eigen::MatrixXcd::Identity(3, 1)); }), ErrorKind::ShapeError);
}

TEST(Project, CongruencePreservesSymmetry) {
  const auto& sys = model(8);
  soar::ExpansionPlan plan;
  plan.wave_numbers = {20, 60};
  auto state = soar::init_state(sys, plan);
  state.extend(30);
  const auto rom = project(sys, state.basis());
  EXPECT_LE((rom.M - rom.M.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((rom.K - rom.K.adjoint()).cwiseAbs().maxCoeff(), 1e-12 * rom.K.cwiseAbs().maxCoeff());
  EXPECT_LE((rom.D - rom.D.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  const auto lead = rom.leading(10);
  EXPECT_EQ(lead.r(), 10);
  EXPECT_EQ(lead.K, rom.K.topLeftCorner(10, 10));
  EXPECT_EQ(lead.C, rom.C.leftCols(10));
}

TEST(EvalFom, ScalarFormulas) {
  const auto a = eval_fom(testing::scalar_system(1, 0, 2), 1.0);
  EXPECT_NEAR(std::abs(a.value(0, 0) - Complex(1, 0)), 0.0, 1e-15);
  const auto b = eval_fom(testing::scalar_system(1, 1, 2), 1.0);
  EXPECT_NEAR(std::abs(b.value(0, 0) - Complex(0.5, -0.5)), 0.0, 1e-15);
  EXPECT_EQ(b.source, Source::Fom);
  EXPECT_EQ(kind_of([] { eval_fom(testing::scalar_system(1, 0, 1), 1.0); }), ErrorKind::SingularOperator);
  EXPECT_EQ(kind_of([] { eval_fom(testing::scalar_system(1, 0, 2), 0.0); }), ErrorKind::InvalidArgument);
}

TEST(EvalFom, DeskModelFinite) {
  const auto g = eval_fom(model(64), 20.0);
  EXPECT_EQ(g.value.rows(), 13);
  EXPECT_EQ(g.value.cols(), 1);
  EXPECT_TRUE(g.value.allFinite());
  EXPECT_GT(g.value.norm(), 0.0);
}

TEST(EvalRom, ScalarAndSingular) {
  const auto sys = testing::scalar_system(1, 1, 2);
  const auto rom = project(sys, Eigen::MatrixXcd::Identity(1, 1));
  EXPECT_NEAR(std::abs(eval_rom(rom, 1.0).value(0, 0) - Complex(0.5, -0.5)), 0.0, 1e-15);
  const auto res = project(testing::scalar_system(1, 0, 1), Eigen::MatrixXcd::Identity(1, 1));
  EXPECT_EQ(kind_of([&] { eval_rom(res, 1.0); }), ErrorKind::SingularReducedOperator);
}

TEST(EvalRom, FullProjectionIsExact) {
  const auto& sys = model(6);
  const auto rom = project(sys, Eigen::MatrixXcd::Identity(sys.n(), sys.n()));
  for (double k : {1.0, 7.5, 20.0, 33.3, 60.0}) {
    const auto g = eval_fom(sys, k).value;
    EXPECT_LE((eval_rom(rom, k).value - g).norm(), 1e-10 * g.norm()) << "k " << k;
  }
}

TEST(EvalRom, ZerothMomentAtExpansionPoint) {
  const auto& sys = model(16);
  for (double k0 : {5.0, 20.0, 47.0}) {
    for (Index r : {1, 4, 9}) {
      const auto rom = single_point_rom(sys, k0, r);
      const auto g = eval_fom(sys, k0).value;
      EXPECT_LE((eval_rom(rom, k0).value - g).norm(), 1e-8 * g.norm()) << k0 << " " << r;
    }
  }
}

// Trapezoid rule for the Cauchy integral on a circle around s0: the Taylor
// coefficients of G, computed from transfer values alone.
std::vector<DenseComplexBlock> cauchy_taylor(const SecondOrderSystem& sys, Complex s0, double radius,
                                             int count, int nodes) {
  std::vector<DenseComplexBlock> g(count, DenseComplexBlock::Zero(sys.outputs(), sys.inputs()));
  for (int j = 0; j < nodes; ++j) {
    const double t = 2 * std::numbers::pi * j / nodes;
    const Complex z = std::polar(1.0, t);
    const DenseComplexBlock v = transfer_fom(sys, s0 + radius * z);
    for (int l = 0; l < count; ++l) g[l] += v * std::pow(z, -l) / (nodes * std::pow(radius, l));
  }
  return g;
}

TEST(Moments, MatchCauchyIntegral) {
  const auto& sys = model(8);
  const Complex s0(0, 20);
  const auto ms = moments(sys, s0, 5);
  const auto ref = cauchy_taylor(sys, s0, 0.5, 5, 96);
  for (int l = 0; l < 5; ++l) {
    EXPECT_LE((-ms.moments[l] - ref[l]).norm(), 1e-8 * ref[l].norm()) << "l " << l;
  }
  EXPECT_LE((-ms.moments[0] - transfer_fom(sys, s0)).norm(), 1e-10 * ms.moments[0].norm());
}

TEST(Moments, ScalarSeries) {
  // 1 / (2 + s^2) = 1/2 - s^2/4 + ...
  const auto ms = moments(testing::scalar_system(1, 0, 2), 0.0, 3);
  ASSERT_EQ(ms.moments.size(), 3u);
  EXPECT_NEAR(std::abs(ms.moments[0](0, 0) - Complex(-0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ms.moments[1](0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ms.moments[2](0, 0) - Complex(0.25)), 0.0, 1e-15);
}

TEST(Moments, RomMatchesLeadingMoments) {
  const auto& sys = model(16);
  const Complex s0(0, 20);
  for (Index r : {3, 6}) {
    const auto rom = single_point_rom(sys, 20, r);
    const auto a = moments(sys, s0, r + 1), b = moments(rom, s0, r + 1);
    double worst = 0.0;
    for (Index l = 0; l < r; ++l) {
      const double e = (a.moments[l] - b.moments[l]).norm() / a.moments[l].norm();
      EXPECT_LE(e, 1e-6) << "r " << r << " l " << l;
      worst = std::max(worst, e);
    }
    const double next = (a.moments[r] - b.moments[r]).norm() / a.moments[r].norm();
    EXPECT_GE(next, 1e3 * worst) << "r " << r;
  }
}

TEST(ErrorSample, Definitions) {
  DenseComplexBlock g(3, 1), gr(3, 1), gr1(3, 1);
  g << Complex(1, 1), 2.0, Complex(0, -3);
  gr << Complex(1, 0.5), 2.1, Complex(0, -2.5);
  gr1 << Complex(1, 0.9), 2.0, Complex(0.1, -2.9);
  for (NormTag t : {NormTag::Two, NormTag::Sup}) {
    const auto e = error_sample(4.0, g, gr, gr1, t);
    EXPECT_DOUBLE_EQ(e.abs_true, block_norm(g - gr, t));
    EXPECT_DOUBLE_EQ(e.abs_est, block_norm(gr1 - gr, t));
    EXPECT_DOUBLE_EQ(e.e_true, block_norm(g - gr, t) / block_norm(g, t));
    EXPECT_DOUBLE_EQ(e.e_hat, block_norm(gr1 - gr, t) / block_norm(gr, t));
    EXPECT_DOUBLE_EQ(e.e_tilde, block_norm(gr1 - gr, t) / block_norm(gr1, t));
    EXPECT_NEAR(e.e_tilde * block_norm(gr1, t), e.e_hat * block_norm(gr, t), 1e-15);
    EXPECT_NEAR(e.abs_true, e.e_true * block_norm(g, t), 1e-15);
  }
  EXPECT_DOUBLE_EQ(block_norm(g, NormTag::Sup), 3.0);
  EXPECT_DOUBLE_EQ(block_norm(g, NormTag::Two), std::sqrt(2.0 + 4.0 + 9.0));
}

TEST(ErrorSample, Examples) {
  DenseComplexBlock g(2, 1), gr(2, 1);
  g << 1.0, 2.0;
  gr << 1.5, 2.0;
  EXPECT_EQ(error_sample(1, g, g, gr, NormTag::Two).e_true, 0.0);
  const auto same = error_sample(1, g, gr, gr, NormTag::Two);
  EXPECT_EQ(same.e_hat, 0.0);
  EXPECT_EQ(same.e_tilde, 0.0);
  EXPECT_EQ(same.abs_est, 0.0);
  const DenseComplexBlock zero = DenseComplexBlock::Zero(2, 1);
  EXPECT_EQ(kind_of([&] { error_sample(1, zero, gr, g, NormTag::Two); }), ErrorKind::DegenerateDenominator);
  EXPECT_EQ(kind_of([&] { error_sample(1, g, zero, g, NormTag::Two); }), ErrorKind::DegenerateDenominator);
  TransferSample a{1.0, g}, b{2.0, g};
  EXPECT_EQ(kind_of([&] { error_sample(a, b, a, NormTag::Two); }), ErrorKind::InvalidArgument);
}

TEST(ErrorSample, NormOrderingOnModel) {
  const auto& sys = model(12);
  const auto r5 = single_point_rom(sys, 20, 6);
  const auto r4 = r5.leading(5);
  const double sq = std::sqrt(static_cast<double>(sys.outputs()));
  for (double k = 2; k < 60; k += 3.7) {
    const auto g = eval_fom(sys, k).value, a = eval_rom(r4, k).value, b = eval_rom(r5, k).value;
    const auto two = error_sample(k, g, a, b, NormTag::Two), sup = error_sample(k, g, a, b, NormTag::Sup);
    EXPECT_LE(sup.abs_true, two.abs_true * (1 + 1e-15));
    EXPECT_LE(two.abs_true, sq * sup.abs_true * (1 + 1e-15));
    EXPECT_LE(sup.abs_est, two.abs_est * (1 + 1e-15));
    EXPECT_LE(two.abs_est, sq * sup.abs_est * (1 + 1e-15));
    for (const auto& e : {two, sup}) {
      EXPECT_NEAR(e.e_tilde * e.norm_g_r1, e.e_hat * e.norm_g_r, 1e-12 * e.e_hat * e.norm_g_r);
    }
  }
}

TEST(ErrorSample, InvariantUnderInputScaling) {
  auto sys = model(8);
  auto scaled = sys;
  scaled.B *= 10.0;
  const auto r = single_point_rom(sys, 20, 5), rs = single_point_rom(scaled, 20, 5);
  for (double k : {3.0, 15.0, 31.0}) {
    const auto a = error_sample(k, eval_fom(sys, k).value, eval_rom(r.leading(4), k).value,
                                eval_rom(r, k).value, NormTag::Two);
    const auto b = error_sample(k, eval_fom(scaled, k).value, eval_rom(rs.leading(4), k).value,
                                eval_rom(rs, k).value, NormTag::Two);
    EXPECT_NEAR(a.e_true, b.e_true, 1e-10 * a.e_true);
    EXPECT_NEAR(a.e_hat, b.e_hat, 1e-10 * a.e_hat);
    EXPECT_NEAR(a.e_tilde, b.e_tilde, 1e-10 * a.e_tilde);
  }
}

TEST(Norm, Parse) {
  EXPECT_EQ(parse_norm("two"), NormTag::Two);
  EXPECT_EQ(parse_norm("sup"), NormTag::Sup);
  EXPECT_EQ(to_string(NormTag::Sup), "sup");
  EXPECT_EQ(kind_of([] { parse_norm("fro"); }), ErrorKind::InvalidArgument);
}

TEST(EvalFom, ConcurrentCallsAgree) {
  const auto& sys = model(16);
  std::vector<double> ks;
  for (int i = 0; i < 12; ++i) ks.push_back(1.0 + 4.5 * i);
  std::vector<DenseComplexBlock> serial, par(ks.size());
  for (double k : ks) serial.push_back(eval_fom(sys, k).value);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < 3; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < ks.size(); i += 3) par[i] = eval_fom(sys, ks[i]).value;
      });
    }
  }
  for (std::size_t i = 0; i < ks.size(); ++i) EXPECT_EQ(par[i], serial[i]);
}

}  // namespace
}  // namespace hmor::rom
