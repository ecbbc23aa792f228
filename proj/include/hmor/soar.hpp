// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmor/linalg.hpp"
#include "hmor/system.hpp"

namespace hmor::soar {

enum class Schedule { Interleaved, Sequential };
enum class BasisMode { Complex, RealSplit };
enum class KrylovSide { Input, Output };

std::string_view to_string(Schedule s);
std::string_view to_string(BasisMode m);
std::string_view to_string(KrylovSide s);

/// Expansion points are wave numbers k0 (1/m); the shift is s0 = i k0.
struct ExpansionPlan {
  std::vector<double> wave_numbers;
  Schedule schedule = Schedule::Interleaved;
  std::vector<Index> budgets;  // per point, Sequential only
  BasisMode mode = BasisMode::Complex;
  KrylovSide side = KrylovSide::Input;
  double deflation_tol = kDefaultDeflationTolerance;

  /// Throws InvalidArgument on non-positive or repeated k0, or on budgets
  /// that do not match the point list.
  void validate() const;
  /// Sum of budgets for Sequential plans; Interleaved plans are open-ended.
  std::optional<Index> total_budget() const;
};

enum class Part { Complex, Real, Imag };
std::string_view to_string(Part p);

struct ColumnTag {
  std::size_t point = 0;
  double k0 = 0.0;
  Index krylov_index = 0;
  Part part = Part::Complex;
};

/// Orthonormal columns with per-column provenance. RealSplit bases keep their
/// real columns in complex storage with zero imaginary parts.
class ProjectionBasis {
 public:
  using ColumnBlock = Eigen::Block<const Eigen::MatrixXcd, Eigen::Dynamic, Eigen::Dynamic, true>;

  ProjectionBasis(Index rows, BasisMode mode);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  BasisMode mode() const { return mode_; }
  const std::vector<ColumnTag>& tags() const { return tags_; }

  ColumnBlock matrix() const { return leading(cols_); }
  ColumnBlock leading(Index r) const;

  /// Appends a column that the caller has already orthonormalized.
  void append(const ComplexVector& q, const ColumnTag& tag);

  std::string hash() const;

 private:
  Index rows_;
  Index cols_ = 0;
  BasisMode mode_;
  Eigen::MatrixXcd storage_;
  std::vector<ColumnTag> tags_;
};

struct PointCounters {
  Index slots = 0;       // scheduling slots consumed
  Index candidates = 0;  // candidate columns offered to the basis
  Index accepted = 0;
  Index deflated = 0;
};

/// Incremental second-order Arnoldi over one or more expansion points sharing
/// a single projection basis. Each point runs its own SOAR recurrence with a
/// local orthonormal set Q and companion vectors P satisfying
///   [A1 A2; I 0] [q_j; p_j] in span{[q_i; p_i]},
/// A1 = -Kt^{-1} Dt, A2 = -Kt^{-1} M. New local directions are then
/// orthonormalized against the shared basis.
class SoarState {
 public:
  SoarState(const SecondOrderSystem& sys, ExpansionPlan plan, unsigned workers = 1);
  ~SoarState();
  SoarState(SoarState&&) noexcept;
  SoarState& operator=(SoarState&&) noexcept;

  /// Advances `slots` scheduling slots. Throws BasisFull once the basis spans
  /// the whole space and PlanExhausted past a Sequential plan's budget.
  void extend(Index slots);

  /// Extends until the basis holds at least `columns` columns. Returns false
  /// when a full round over every point adds nothing (saturated).
  bool extend_to_columns(Index columns);

  const ProjectionBasis& basis() const { return basis_; }
  const ExpansionPlan& plan() const { return plan_; }
  const std::vector<PointCounters>& counters() const { return counters_; }
  Index slots_used() const { return slots_used_; }
  Index total_deflated() const;
  const Factorization& factorization(std::size_t point) const;

 private:
  struct Point;
  std::size_t scheduled_point(Index slot) const;
  void advance_slot();

  ExpansionPlan plan_;
  SparseMatrixComplex mass_;
  ProjectionBasis basis_;
  std::vector<Point> points_;
  std::vector<PointCounters> counters_;
  Index slots_used_ = 0;
};

SoarState init_state(const SecondOrderSystem& sys, const ExpansionPlan& plan,
                     unsigned workers = 1);

/// Unorthonormalized P_0 .. P_{count-1} of the input recurrence at s0:
/// P_0 = -Kt^{-1} B, P_1 = A1 P_0, P_i = A1 P_{i-1} + A2 P_{i-2}. count <= 10.
std::vector<DenseComplexBlock> raw_krylov_blocks(const SecondOrderSystem& sys, Complex s0,
                                                 Index count);

/// True when the leading r columns contain every start-block direction of
/// `point`, i.e. the zeroth moment at that point is matched.
bool holds_start_block(const ProjectionBasis& basis, Index r, std::size_t point, Index block);

/// CSV: column,point,k0,krylov_index,part
void write_provenance(std::ostream& out, const ProjectionBasis& basis);

}  // namespace hmor::soar
