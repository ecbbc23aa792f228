// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/soar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "hmor/error.hpp"
#include "hmor/format.hpp"
#include "hmor/parallel.hpp"

namespace hmor::soar {

std::string_view to_string(Schedule s) {
  return s == Schedule::Interleaved ? "interleaved" : "sequential";
}
std::string_view to_string(BasisMode m) { return m == BasisMode::Complex ? "complex" : "real-split"; }
std::string_view to_string(KrylovSide s) { return s == KrylovSide::Input ? "input" : "output"; }
std::string_view to_string(Part p) {
  switch (p) {
    case Part::Complex: return "complex";
    case Part::Real: return "real";
    case Part::Imag: return "imag";
  }
  return "?";
}

void ExpansionPlan::validate() const {
  if (wave_numbers.empty()) throw Error(ErrorKind::InvalidArgument, "no expansion points");
  std::set<double> seen;
  for (double k0 : wave_numbers) {
    if (!(k0 > 0.0) || !std::isfinite(k0)) {
      throw Error(ErrorKind::InvalidArgument, "expansion wave number must be > 0, got " + shortest(k0));
    }
    if (!seen.insert(k0).second) {
      throw Error(ErrorKind::InvalidArgument, "expansion wave number " + shortest(k0) + " repeated");
    }
  }
  if (schedule == Schedule::Sequential) {
    if (budgets.size() != wave_numbers.size()) {
      throw Error(ErrorKind::InvalidArgument, "sequential plan needs one budget per point");
    }
    for (Index b : budgets) {
      if (b < 0) throw Error(ErrorKind::InvalidArgument, "negative budget");
    }
  } else if (!budgets.empty() && budgets.size() != wave_numbers.size()) {
    throw Error(ErrorKind::InvalidArgument, "budget count does not match point count");
  }
  if (!(deflation_tol >= 0.0 && deflation_tol < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "deflation tolerance must lie in [0, 1)");
  }
}

std::optional<Index> ExpansionPlan::total_budget() const {
  if (schedule != Schedule::Sequential) return std::nullopt;
  Index total = 0;
  for (Index b : budgets) total += b;
  return total;
}

ProjectionBasis::ProjectionBasis(Index rows, BasisMode mode)
    : rows_(rows), mode_(mode), storage_(rows, 0) {}

ProjectionBasis::ColumnBlock ProjectionBasis::leading(Index r) const {
  if (r < 0 || r > cols_) {
    throw Error(ErrorKind::ShapeError, "basis has " + std::to_string(cols_) + " columns, asked for " +
                                           std::to_string(r));
  }
  return storage_.leftCols(r);
}

void ProjectionBasis::append(const ComplexVector& q, const ColumnTag& tag) {
  if (q.size() != rows_) throw Error(ErrorKind::ShapeError, "column length mismatch");
  if (cols_ == rows_) throw Error(ErrorKind::BasisFull, "basis already spans all " + std::to_string(rows_) + " rows");
  if (cols_ == storage_.cols()) {
    storage_.conservativeResize(Eigen::NoChange, std::max<Index>(8, 2 * storage_.cols()));
  }
  storage_.col(cols_++) = q;
  tags_.push_back(tag);
}

std::string ProjectionBasis::hash() const {
  Fnv1a h;
  for (Index j = 0; j < cols_; ++j) {
    h.update_bytes(storage_.col(j).data(), sizeof(Complex) * static_cast<std::size_t>(rows_));
  }
  return h.hex();
}

struct SoarState::Point {
  double k0 = 0.0;
  Complex s0;
  std::optional<Factorization> lu;
  SparseMatrixComplex dtilde;  // adjoint for the output side
  DenseComplexBlock start;     // -Kt^{-1} B (or -Kt^{-H} C^H)
  Eigen::MatrixXcd q;          // local orthonormal directions (zero after local deflation)
  Eigen::MatrixXcd p;          // SOAR companion vectors
  Index count = 0;
};

SoarState::~SoarState() = default;
SoarState::SoarState(SoarState&&) noexcept = default;
SoarState& SoarState::operator=(SoarState&&) noexcept = default;

SoarState::SoarState(const SecondOrderSystem& sys, ExpansionPlan plan, unsigned workers)
    : plan_(std::move(plan)), basis_(sys.n(), plan_.mode) {
  sys.validate();
  plan_.validate();
  const bool output = plan_.side == KrylovSide::Output;
  mass_ = output ? SparseMatrixComplex(to_complex(sys.M).adjoint()) : to_complex(sys.M);
  const SparseMatrixComplex start_rhs =
      output ? SparseMatrixComplex(to_complex(sys.C).adjoint()) : to_complex(sys.B);
  if (start_rhs.cols() == 0) throw Error(ErrorKind::ShapeError, "empty starting block");

  points_.resize(plan_.wave_numbers.size());
  counters_.resize(plan_.wave_numbers.size());
  parallel_for(points_.size(), workers, [&](std::size_t i) {
    Point& pt = points_[i];
    pt.k0 = plan_.wave_numbers[i];
    pt.s0 = Complex(0.0, pt.k0);
    try {
      pt.lu.emplace(shifted_stiffness(sys, pt.s0));
    } catch (const Error& e) {
      throw Error(e.kind(), "expansion point k0 = " + shortest(pt.k0) + ": " + e.what());
    }
    const SparseMatrixComplex dt = shifted_damping(sys, pt.s0);
    pt.dtilde = output ? SparseMatrixComplex(dt.adjoint()) : dt;
    const DenseComplexBlock rhs = DenseComplexBlock(start_rhs);
    pt.start = output ? DenseComplexBlock(-pt.lu->solve_adjoint(rhs)) : DenseComplexBlock(-pt.lu->solve(rhs));
    pt.q.resize(sys.n(), 0);
    pt.p.resize(sys.n(), 0);
  });
}

SoarState init_state(const SecondOrderSystem& sys, const ExpansionPlan& plan, unsigned workers) {
  return SoarState(sys, plan, workers);
}

const Factorization& SoarState::factorization(std::size_t point) const {
  return *points_.at(point).lu;
}

Index SoarState::total_deflated() const {
  Index d = 0;
  for (const auto& c : counters_) d += c.deflated;
  return d;
}

std::size_t SoarState::scheduled_point(Index slot) const {
  if (plan_.schedule == Schedule::Interleaved) {
    return static_cast<std::size_t>(slot % static_cast<Index>(points_.size()));
  }
  Index acc = 0;
  for (std::size_t i = 0; i < plan_.budgets.size(); ++i) {
    acc += plan_.budgets[i];
    if (slot < acc) return i;
  }
  throw Error(ErrorKind::PlanExhausted,
              "sequential plan budget of " + std::to_string(acc) + " slots is used up");
}

void SoarState::advance_slot() {
  if (basis_.cols() == basis_.rows()) {
    throw Error(ErrorKind::BasisFull, "basis already spans all " + std::to_string(basis_.rows()) + " rows");
  }
  const std::size_t ip = scheduled_point(slots_used_);
  Point& pt = points_[ip];
  PointCounters& ctr = counters_[ip];
  const Index n = basis_.rows();
  const Index block = pt.start.cols();

  // Next raw direction r and its companion s.
  ComplexVector r, s;
  if (pt.count < block) {
    r = pt.start.col(pt.count);
    s = ComplexVector::Zero(n);
  } else {
    const Index src = pt.count - block;
    const ComplexVector rhs = pt.dtilde * pt.q.col(src) + mass_ * pt.p.col(src);
    const DenseComplexBlock sol = plan_.side == KrylovSide::Output ? pt.lu->solve_adjoint(rhs)
                                                                   : pt.lu->solve(rhs);
    r = -sol.col(0);
    s = pt.q.col(src);
  }

  // Local MGS with one re-orthogonalization pass; s follows the same updates.
  const double before = r.norm();
  for (int pass = 0; pass < 2; ++pass) {
    for (Index i = 0; i < pt.count; ++i) {
      const Complex t = pt.q.col(i).dot(r);
      r.noalias() -= t * pt.q.col(i);
      s.noalias() -= t * pt.p.col(i);
    }
  }
  const double after = r.norm();

  if (pt.count == pt.q.cols()) {
    const Index cap = std::max<Index>(8, 2 * pt.q.cols());
    pt.q.conservativeResize(Eigen::NoChange, cap);
    pt.p.conservativeResize(Eigen::NoChange, cap);
  }
  const Index local = pt.count++;
  ++slots_used_;
  ++ctr.slots;
  const Index per_slot = plan_.mode == BasisMode::RealSplit ? 2 : 1;

  if (!(before > 0.0) || after < plan_.deflation_tol * before) {
    // Local deflation: keep the recurrence alive through the companion vector.
    pt.q.col(local).setZero();
    const double snorm = s.norm();
    if (snorm > 0.0) pt.p.col(local) = s / snorm;
    else pt.p.col(local).setZero();
    ctr.candidates += per_slot;
    ctr.deflated += per_slot;
    return;
  }
  pt.q.col(local) = r / after;
  pt.p.col(local) = s / after;

  const ComplexVector dir = pt.q.col(local);
  auto offer = [&](ComplexVector cand, Part part) {
    ++ctr.candidates;
    if (basis_.cols() == basis_.rows()) {
      ++ctr.deflated;
      return;
    }
    auto col = orthonormalize_against(basis_.matrix(), std::move(cand), plan_.deflation_tol);
    if (!col) {
      ++ctr.deflated;
      return;
    }
    basis_.append(*col, ColumnTag{ip, pt.k0, local, part});
    ++ctr.accepted;
  };
  if (plan_.mode == BasisMode::Complex) {
    offer(dir, Part::Complex);
  } else {
    offer(dir.real().cast<Complex>(), Part::Real);
    offer(dir.imag().cast<Complex>(), Part::Imag);
  }
}

void SoarState::extend(Index slots) {
  if (slots < 0) throw Error(ErrorKind::InvalidArgument, "negative slot count");
  for (Index i = 0; i < slots; ++i) advance_slot();
}

bool SoarState::extend_to_columns(Index columns) {
  const Index stall_limit = 4 * static_cast<Index>(points_.size());
  Index idle = 0;
  while (basis_.cols() < columns) {
    if (basis_.cols() == basis_.rows()) return false;
    const Index before = basis_.cols();
    try {
      advance_slot();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::PlanExhausted) return false;
      throw;
    }
    idle = basis_.cols() > before ? 0 : idle + 1;
    if (plan_.schedule == Schedule::Interleaved && idle >= stall_limit) return false;
  }
  return true;
}

std::vector<DenseComplexBlock> raw_krylov_blocks(const SecondOrderSystem& sys, Complex s0,
                                                 Index count) {
  if (count < 1 || count > 10) {
    throw Error(ErrorKind::InvalidArgument, "raw Krylov oracle supports 1..10 blocks");
  }
  sys.validate();
  const Factorization lu(shifted_stiffness(sys, s0));
  const SparseMatrixComplex dt = shifted_damping(sys, s0);
  const SparseMatrixComplex m = to_complex(sys.M);
  std::vector<DenseComplexBlock> blocks;
  blocks.push_back(-lu.solve(DenseComplexBlock(to_complex(sys.B))));
  for (Index i = 1; i < count; ++i) {
    DenseComplexBlock rhs = dt * blocks[i - 1];
    if (i >= 2) rhs += m * blocks[i - 2];
    blocks.push_back(-lu.solve(rhs));
  }
  return blocks;
}

bool holds_start_block(const ProjectionBasis& basis, Index r, std::size_t point, Index block) {
  // RealSplit needs both parts of each start direction.
  const int need = basis.mode() == BasisMode::RealSplit ? 3 : 1;
  std::vector<int> seen(static_cast<std::size_t>(block), 0);
  const auto& tags = basis.tags();
  const Index upto = std::min<Index>(r, static_cast<Index>(tags.size()));
  for (Index j = 0; j < upto; ++j) {
    const auto& t = tags[static_cast<std::size_t>(j)];
    if (t.point != point || t.krylov_index >= block) continue;
    seen[static_cast<std::size_t>(t.krylov_index)] |= t.part == Part::Imag ? 2 : 1;
  }
  return std::all_of(seen.begin(), seen.end(), [need](int b) { return b == need; });
}

void write_provenance(std::ostream& out, const ProjectionBasis& basis) {
  out << "column,point,k0,krylov_index,part\n";
  const auto& tags = basis.tags();
  for (std::size_t j = 0; j < tags.size(); ++j) {
    out << j << ',' << tags[j].point << ',' << shortest(tags[j].k0) << ',' << tags[j].krylov_index
        << ',' << to_string(tags[j].part) << '\n';
  }
}

}  // namespace hmor::soar
