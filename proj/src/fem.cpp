// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/fem.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include "hmor/error.hpp"
#include "hmor/format.hpp"

namespace hmor::fem {

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles.at(t);
  const Point& a = nodes[tri[0]];
  const Point& b = nodes[tri[1]];
  const Point& c = nodes[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::edge_length(const BoundaryEdge& e) const {
  const Point& a = nodes[e.nodes[0]];
  const Point& b = nodes[e.nodes[1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

bool Mesh::classified() const {
  if (boundary.empty()) return false;
  for (const auto& e : boundary) {
    if (e.label == BoundaryLabel::Unlabeled) return false;
  }
  return true;
}

std::string Mesh::hash() const {
  Fnv1a h;
  for (const auto& p : nodes) {
    h.update(p.x);
    h.update(p.y);
  }
  for (const auto& t : triangles) {
    for (Index v : t) h.update(std::to_string(v) + ",");
  }
  return h.hex();
}

std::string BoundarySpec::describe() const {
  return "neumann x=0 y=[" + shortest(neumann_y_min) + "," + shortest(neumann_y_max) +
         "]; robin elsewhere";
}

Mesh build_unit_square_mesh(Index m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "subdivisions must be >= 1");
  Mesh mesh;
  mesh.subdivisions = m;
  const double md = static_cast<double>(m);
  const auto id = [m](Index i, Index j) { return j * (m + 1) + i; };

  mesh.nodes.reserve(static_cast<std::size_t>((m + 1) * (m + 1)));
  for (Index j = 0; j <= m; ++j) {
    for (Index i = 0; i <= m; ++i) {
      mesh.nodes.push_back({static_cast<double>(i) / md, static_cast<double>(j) / md});
    }
  }
  mesh.triangles.reserve(static_cast<std::size_t>(2 * m * m));
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Index ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }
  // Counterclockwise walk: bottom, right, top, left.
  for (Index i = 0; i < m; ++i) mesh.boundary.push_back({{id(i, 0), id(i + 1, 0)}});
  for (Index j = 0; j < m; ++j) mesh.boundary.push_back({{id(m, j), id(m, j + 1)}});
  for (Index i = m; i > 0; --i) mesh.boundary.push_back({{id(i, m), id(i - 1, m)}});
  for (Index j = m; j > 0; --j) mesh.boundary.push_back({{id(0, j), id(0, j - 1)}});
  return mesh;
}

Mesh classify_boundary(Mesh mesh, const BoundarySpec& spec) {
  if (!(spec.neumann_y_min < spec.neumann_y_max)) {
    throw Error(ErrorKind::InvalidArgument, "Neumann segment must have y_min < y_max");
  }
  const auto on_neumann = [&](const Point& p) {
    return std::abs(p.x) <= kSnapTolerance && p.y >= spec.neumann_y_min - kSnapTolerance &&
           p.y <= spec.neumann_y_max + kSnapTolerance;
  };
  std::size_t neumann = 0;
  for (auto& e : mesh.boundary) {
    const bool n = on_neumann(mesh.nodes[e.nodes[0]]) && on_neumann(mesh.nodes[e.nodes[1]]);
    e.label = n ? BoundaryLabel::Neumann : BoundaryLabel::Robin;
    neumann += n;
  }
  if (neumann == 0) {
    throw Error(ErrorKind::EmptyNeumannBoundary,
                "no boundary edge lies on " + spec.describe() + " at m = " +
                    std::to_string(mesh.subdivisions));
  }
  return mesh;
}

SecondOrderSystem assemble(const Mesh& mesh) {
  if (!mesh.classified()) throw Error(ErrorKind::NotClassified, "mesh boundary is not labeled");
  const Index n = static_cast<Index>(mesh.nodes.size());
  std::vector<Entry> m_entries, k_entries, d_entries, b_entries;
  m_entries.reserve(9 * mesh.triangles.size());
  k_entries.reserve(9 * mesh.triangles.size());

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point& p0 = mesh.nodes[tri[0]];
    const Point& p1 = mesh.nodes[tri[1]];
    const Point& p2 = mesh.nodes[tri[2]];
    const double area = mesh.triangle_area(t);
    if (!(area > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "triangle " + std::to_string(t) + " has area <= 0");
    }
    // Gradients of the barycentric basis functions are (b_i, c_i) / (2 area).
    const std::array<double, 3> b{p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const std::array<double, 3> c{p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        k_entries.push_back({tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)});
        m_entries.push_back({tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
      }
    }
  }
  for (const auto& e : mesh.boundary) {
    const double len = mesh.edge_length(e);
    if (e.label == BoundaryLabel::Robin) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          d_entries.push_back({e.nodes[i], e.nodes[j], len / 6.0 * (i == j ? 2.0 : 1.0)});
        }
      }
    } else {
      b_entries.push_back({e.nodes[0], 0, 0.5 * len});
      b_entries.push_back({e.nodes[1], 0, 0.5 * len});
    }
  }

  SecondOrderSystem sys;
  sys.M = from_triplets(m_entries, n, n);
  sys.K = from_triplets(k_entries, n, n);
  sys.D = from_triplets(d_entries, n, n);
  sys.B = from_triplets(b_entries, n, 1);
  sys.C = SparseMatrixReal(0, n);
  sys.metadata.mesh_hash = mesh.hash();
  return sys;
}

std::vector<Point> default_probes() {
  std::vector<Point> pts;
  const double deg = std::numbers::pi / 180.0;
  for (int j = 1; j <= 5; ++j) {
    const double a = -15.0 * j * deg;
    pts.push_back({0.5111 * std::cos(a), 1.0 + 0.5111 * std::sin(a)});
  }
  for (int j = 1; j <= 8; ++j) {
    const double a = -10.0 * j * deg;
    pts.push_back({0.7611 * std::cos(a), 1.0 + 0.7611 * std::sin(a)});
  }
  return pts;
}

ProbeMatrix measurement_matrix(const Mesh& mesh, const std::vector<Point>& points) {
  ProbeMatrix out;
  out.probes.points = points;
  std::vector<Entry> entries;
  std::set<Index> seen;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& q = points[p];
    if (q.x < -kSnapTolerance || q.x > 1.0 + kSnapTolerance || q.y < -kSnapTolerance ||
        q.y > 1.0 + kSnapTolerance) {
      throw Error(ErrorKind::InvalidArgument, "probe " + std::to_string(p) + " (" +
                                                  shortest(q.x) + ", " + shortest(q.y) +
                                                  ") lies outside the unit square");
    }
    Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
      const double dx = mesh.nodes[v].x - q.x, dy = mesh.nodes[v].y - q.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<Index>(v);
      }
    }
    if (!seen.insert(best).second) {
      out.warnings.push_back(std::string(to_string(ErrorKind::DuplicateProbe)) + ": probe " +
                             std::to_string(p) + " resolves to node " + std::to_string(best) +
                             " already used by another probe");
    }
    out.probes.nodes.push_back(best);
    entries.push_back({static_cast<Index>(p), best, 1.0});
  }
  out.C = from_triplets(entries, static_cast<Index>(points.size()),
                        static_cast<Index>(mesh.nodes.size()));
  return out;
}

double points_per_wavelength(double h, double k) { return 2.0 * std::numbers::pi / (k * h); }

Model build_model(const ModelSpec& spec) {
  Model model;
  model.mesh = classify_boundary(build_unit_square_mesh(spec.subdivisions), spec.boundary);
  model.system = assemble(model.mesh);
  auto probes = measurement_matrix(model.mesh, spec.probes);
  model.system.C = std::move(probes.C);
  model.system.metadata.boundary = spec.boundary.describe();
  model.probes = std::move(probes.probes);
  model.warnings = std::move(probes.warnings);
  return model;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "nodes " << mesh.nodes.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    out << i << ' ' << shortest(mesh.nodes[i].x) << ' ' << shortest(mesh.nodes[i].y) << '\n';
  }
  out << "triangles " << mesh.triangles.size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    out << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
  out << "boundary " << mesh.boundary.size() << '\n';
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const auto& be = mesh.boundary[e];
    const char* label = be.label == BoundaryLabel::Neumann ? "neumann"
                        : be.label == BoundaryLabel::Robin ? "robin"
                                                           : "unlabeled";
    out << e << ' ' << be.nodes[0] << ' ' << be.nodes[1] << ' ' << label << '\n';
  }
}

}  // namespace hmor::fem
