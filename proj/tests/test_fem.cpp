// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "hmor/error.hpp"
#include "hmor/fem.hpp"
#include "hmor/linalg.hpp"
#include "test_util.hpp"

namespace hmor::fem {
namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::EmptyResult;
}

Eigen::MatrixXd dense(const SparseMatrixReal& a) { return Eigen::MatrixXd(a); }

TEST(Mesh, Counts) {
  for (Index m : {1, 2, 5, 16}) {
    const Mesh mesh = build_unit_square_mesh(m);
    EXPECT_EQ(static_cast<Index>(mesh.nodes.size()), (m + 1) * (m + 1));
    EXPECT_EQ(static_cast<Index>(mesh.triangles.size()), 2 * m * m);
    EXPECT_EQ(static_cast<Index>(mesh.boundary.size()), 4 * m);
  }
  EXPECT_EQ(kind_of([] { build_unit_square_mesh(0); }), ErrorKind::InvalidArgument);
}

TEST(Mesh, AreasPositiveAndSumToOne) {
  for (Index m : {1, 3, 8, 33}) {
    const Mesh mesh = build_unit_square_mesh(m);
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      ASSERT_GT(mesh.triangle_area(t), 0.0);
      total += mesh.triangle_area(t);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Mesh, BoundaryEdgesBelongToOneTriangle) {
  const Mesh mesh = build_unit_square_mesh(6);
  for (const auto& e : mesh.boundary) {
    int owners = 0;
    for (const auto& t : mesh.triangles) {
      const std::set<Index> s(t.begin(), t.end());
      owners += s.count(e.nodes[0]) && s.count(e.nodes[1]);
    }
    EXPECT_EQ(owners, 1);
  }
}

TEST(Classify, SmallestMeshWithNeumannEdge) {
  const Mesh mesh = classify_boundary(build_unit_square_mesh(4), {});
  int n = 0, r = 0;
  for (const auto& e : mesh.boundary) {
    if (e.label == BoundaryLabel::Neumann) {
      ++n;
      const Point a = mesh.nodes[e.nodes[0]], b = mesh.nodes[e.nodes[1]];
      EXPECT_EQ(a.x, 0.0);
      EXPECT_EQ(b.x, 0.0);
      EXPECT_EQ(std::min(a.y, b.y), 0.75);
      EXPECT_EQ(std::max(a.y, b.y), 1.0);
    } else {
      EXPECT_EQ(e.label, BoundaryLabel::Robin);
      ++r;
    }
  }
  EXPECT_EQ(n, 1);
  EXPECT_EQ(r, 15);
  EXPECT_TRUE(mesh.classified());
}

TEST(Classify, DeskScaleCount) {
  const Mesh mesh = classify_boundary(build_unit_square_mesh(64), {});
  int n = 0;
  for (const auto& e : mesh.boundary) n += e.label == BoundaryLabel::Neumann;
  EXPECT_EQ(n, 16);
}

TEST(Classify, NoNodeOnSegment) {
  EXPECT_EQ(kind_of([] { classify_boundary(build_unit_square_mesh(2), {}); }),
            ErrorKind::EmptyNeumannBoundary);
}

TEST(Assemble, RequiresLabels) {
  EXPECT_EQ(kind_of([] { assemble(build_unit_square_mesh(4)); }), ErrorKind::NotClassified);
}

TEST(Assemble, PartitionOfUnitySums) {
  for (Index m : {4, 8, 20}) {
    const auto sys = assemble(classify_boundary(build_unit_square_mesh(m), {}));
    EXPECT_NEAR(dense(sys.M).sum(), 1.0, 1e-12);
    EXPECT_NEAR(dense(sys.D).sum(), 3.75, 1e-12);
    EXPECT_NEAR(dense(sys.B).sum(), 0.25, 1e-12);
    const Eigen::VectorXd k1 = sys.K * Eigen::VectorXd::Ones(sys.n());
    EXPECT_LE(k1.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(sys.inputs(), 1);
  }
}

TEST(Assemble, SpectralProperties) {
  testing::Rng rng(17);
  for (Index m : {4, 8}) {
    const auto sys = assemble(classify_boundary(build_unit_square_mesh(m), {}));
    const auto M = dense(sys.M), K = dense(sys.K), D = dense(sys.D);
    EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((K - K.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((D - D.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd x(sys.n());
      for (Index i = 0; i < sys.n(); ++i) x(i) = rng.uniform(-1, 1);
      EXPECT_GE(x.dot(K * x), -1e-12 * x.squaredNorm());
      EXPECT_GE(x.dot(D * x), -1e-12 * x.squaredNorm());
    }
  }
}

TEST(Assemble, DampingSupportedOnImpedanceNodes) {
  const Mesh mesh = classify_boundary(build_unit_square_mesh(8), {});
  const auto sys = assemble(mesh);
  std::set<Index> robin;
  for (const auto& e : mesh.boundary) {
    if (e.label == BoundaryLabel::Robin) robin.insert(e.nodes.begin(), e.nodes.end());
  }
  const auto D = dense(sys.D);
  for (Index i = 0; i < sys.n(); ++i) {
    if (D.row(i).cwiseAbs().sum() > 0) EXPECT_TRUE(robin.count(i)) << "node " << i;
  }
}

TEST(Assemble, ReferenceElementMatrices) {
  // m = 1: two triangles; hand-computed P1 matrices.
  Mesh mesh = build_unit_square_mesh(1);
  for (auto& e : mesh.boundary) e.label = BoundaryLabel::Robin;
  const auto sys = assemble(mesh);
  const auto M = dense(sys.M), K = dense(sys.K);
  // Nodes 0 and 3 lie on the shared diagonal.
  EXPECT_NEAR(M(0, 0), 2.0 * (0.5 / 6.0), 1e-15);
  EXPECT_NEAR(M(1, 1), 0.5 / 6.0, 1e-15);
  EXPECT_NEAR(M(0, 3), 2.0 * (0.5 / 12.0), 1e-15);
  EXPECT_NEAR(M(1, 2), 0.0, 1e-15);
  EXPECT_NEAR(K(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(K(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(K(0, 1), -0.5, 1e-15);
  EXPECT_NEAR(K(0, 3), 0.0, 1e-15);
  const auto D = dense(sys.D);
  EXPECT_NEAR(D(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(D(0, 1), 1.0 / 6.0, 1e-15);
}

TEST(Measurement, OneHotAtNode) {
  const Mesh mesh = build_unit_square_mesh(4);
  const auto p = measurement_matrix(mesh, {{0.25, 0.5}, {1.0, 1.0}});
  EXPECT_EQ(p.C.rows(), 2);
  EXPECT_EQ(p.C.coeff(0, 2 * 5 + 1), 1.0);
  EXPECT_EQ(p.C.coeff(1, 24), 1.0);
  EXPECT_EQ(p.C.nonZeros(), 2);
}

TEST(Measurement, TieGoesToLowestId) {
  const Mesh mesh = build_unit_square_mesh(2);
  const auto p = measurement_matrix(mesh, {{0.25, 0.25}});
  EXPECT_EQ(p.probes.nodes[0], 0);
}

TEST(Measurement, DuplicateWarnsAndKeepsRows) {
  const Mesh mesh = build_unit_square_mesh(2);
  const auto p = measurement_matrix(mesh, {{0.5, 0.5}, {0.51, 0.49}});
  EXPECT_EQ(p.C.rows(), 2);
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_NE(p.warnings[0].find("DuplicateProbe"), std::string::npos);
}

TEST(Measurement, OutsideSquare) {
  EXPECT_EQ(kind_of([] { measurement_matrix(build_unit_square_mesh(2), {{1.5, 0.5}}); }),
            ErrorKind::InvalidArgument);
}

TEST(Measurement, DefaultProbes) {
  const auto pts = default_probes();
  ASSERT_EQ(pts.size(), 13u);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_NEAR(std::hypot(pts[j].x, pts[j].y - 1.0), 0.5111, 1e-12);
    EXPECT_NEAR(std::atan2(pts[j].y - 1.0, pts[j].x), -std::numbers::pi / 12 * double(j + 1), 1e-12);
  }
  for (std::size_t j = 5; j < 13; ++j) EXPECT_NEAR(std::hypot(pts[j].x, pts[j].y - 1.0), 0.7611, 1e-12);

  const Mesh mesh = build_unit_square_mesh(64);
  const auto p = measurement_matrix(mesh, pts);
  EXPECT_EQ(p.C.rows(), 13);
  EXPECT_TRUE(p.warnings.empty());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Point q = mesh.nodes[p.probes.nodes[j]];
    EXPECT_LE(std::hypot(q.x - pts[j].x, q.y - pts[j].y), mesh.element_size());
  }
}

TEST(Measurement, SelectionRowsHaveUnitNorm) {
  const Mesh mesh = build_unit_square_mesh(16);
  const auto p = measurement_matrix(mesh, default_probes());
  testing::Rng rng(2);
  Eigen::MatrixXcd v(mesh.nodes.size(), 6);
  for (Index j = 0; j < 6; ++j) v.col(j) = rng.complex_vector(v.rows());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(v.rows(), 6);
  const Eigen::MatrixXcd cv = to_complex(p.C) * q;
  EXPECT_LE(cv.rowwise().norm().maxCoeff(), 1.0 + 1e-12);
}

TEST(Model, DirectSolveSanity) {
  const Model model = build_model({});
  const auto& sys = model.system;
  EXPECT_EQ(sys.n(), 4225);
  EXPECT_EQ(sys.outputs(), 13);
  const auto f = factorize(shifted_stiffness(sys, Complex(0, 20)));
  const DenseComplexBlock p = f.solve(Complex(0, 10) * Eigen::MatrixXcd(to_complex(sys.B)));
  EXPECT_TRUE(p.allFinite());
  EXPECT_GT(p.norm(), 0.0);
}

TEST(Model, ResolutionAndHash) {
  EXPECT_NEAR(points_per_wavelength(1.0 / 64, 20.0), 2 * std::numbers::pi * 64 / 20, 1e-12);
  EXPECT_EQ(build_unit_square_mesh(8).hash(), build_unit_square_mesh(8).hash());
  EXPECT_NE(build_unit_square_mesh(8).hash(), build_unit_square_mesh(9).hash());
  std::ostringstream out;
  write_mesh(out, build_unit_square_mesh(1));
  EXPECT_NE(out.str().find("nodes 4"), std::string::npos);
}

}  // namespace
}  // namespace hmor::fem
