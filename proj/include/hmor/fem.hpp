// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmor/system.hpp"

namespace hmor::fem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryLabel { Unlabeled, Neumann, Robin };

struct BoundaryEdge {
  std::array<Index, 2> nodes;
  BoundaryLabel label = BoundaryLabel::Unlabeled;
};

/// Structured triangulation of the unit square (lengths in meters).
struct Mesh {
  Index subdivisions = 0;
  std::vector<Point> nodes;
  std::vector<std::array<Index, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary;

  double element_size() const { return 1.0 / static_cast<double>(subdivisions); }
  double triangle_area(std::size_t t) const;
  double edge_length(const BoundaryEdge& e) const;
  bool classified() const;
  std::string hash() const;
};

/// Rigid (Neumann) segment {x = 0} x [y_min, y_max]; the rest of the boundary
/// carries the unit impedance condition.
struct BoundarySpec {
  double neumann_y_min = 0.75;
  double neumann_y_max = 1.0;

  std::string describe() const;
};

/// Coordinate snapping tolerance used by boundary classification.
inline constexpr double kSnapTolerance = 1e-12;

/// (m+1)^2 nodes, 2m^2 triangles (each cell cut lower-left to upper-right),
/// 4m unlabeled boundary edges.
Mesh build_unit_square_mesh(Index m);

/// Labels each boundary edge; throws EmptyNeumannBoundary when no edge lies on
/// the Neumann segment.
Mesh classify_boundary(Mesh mesh, const BoundarySpec& spec);

/// P1 assembly of M, K (volume), D (impedance edges) and B (unit Neumann
/// load). C is left empty (0 x n); see measurement_matrix.
SecondOrderSystem assemble(const Mesh& mesh);

struct MeasurementSet {
  std::vector<Point> points;
  std::vector<Index> nodes;  // resolved by measurement_matrix
};

/// 13 probes on two arcs centred at (0, 1): radius 0.5111 at -15 deg * j
/// (j = 1..5) and radius 0.7611 at -10 deg * j (j = 1..8).
std::vector<Point> default_probes();

struct ProbeMatrix {
  SparseMatrixReal C;
  MeasurementSet probes;
  std::vector<std::string> warnings;  // DuplicateProbe notices
};

/// One-hot rows at the nearest node of each point (ties -> lowest node id).
ProbeMatrix measurement_matrix(const Mesh& mesh, const std::vector<Point>& points);

/// Points per wavelength, 2 pi / (k h).
double points_per_wavelength(double h, double k);

struct ModelSpec {
  Index subdivisions = 64;
  BoundarySpec boundary;
  std::vector<Point> probes = default_probes();
};

struct Model {
  Mesh mesh;
  SecondOrderSystem system;
  MeasurementSet probes;
  std::vector<std::string> warnings;
};

/// mesh -> classify -> assemble -> measurement matrix.
Model build_model(const ModelSpec& spec);

/// Plain-text node / triangle / boundary-edge listing.
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace hmor::fem
