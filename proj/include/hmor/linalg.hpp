// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hmor {

using Complex = std::complex<double>;
using Index = Eigen::Index;

// Row-compressed storage: sorted, duplicate-free column indices per row once
// compressed.
using SparseMatrixReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseMatrixComplex = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Column-major dense block (Krylov directions, transfer values).
using DenseComplexBlock = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct Entry {
  Index row;
  Index col;
  double value;
};

struct SecondOrderSystem;

/// Builds a canonical sparse matrix; duplicate (row, col) entries are summed.
/// Throws InvalidIndex for out-of-range entries.
SparseMatrixReal from_triplets(std::span<const Entry> entries, Index nrows, Index ncols);

SparseMatrixComplex to_complex(const SparseMatrixReal& a);

/// s0^2 M + s0 D + K on the union pattern of M, D, K.
SparseMatrixComplex shifted_stiffness(const SecondOrderSystem& sys, Complex s0);
SparseMatrixComplex shifted_stiffness(const SparseMatrixReal& m, const SparseMatrixReal& d,
                                      const SparseMatrixReal& k, Complex s0);

/// 2 s0 M + D.
SparseMatrixComplex shifted_damping(const SecondOrderSystem& sys, Complex s0);
SparseMatrixComplex shifted_damping(const SparseMatrixReal& m, const SparseMatrixReal& d,
                                    Complex s0);

/// Relative pivot threshold below which a factorization is rejected as singular.
inline constexpr double kSingularPivotTolerance = 1e-14;

/// Sparse LU with COLAMD fill-reducing column ordering and partial pivoting.
/// Solves are const and may run concurrently on a shared instance.
class Factorization {
 public:
  explicit Factorization(const SparseMatrixComplex& a);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  Index size() const { return size_; }

  DenseComplexBlock solve(const DenseComplexBlock& b) const;
  /// Solves A^T x = b (no conjugation).
  DenseComplexBlock solve_transposed(const DenseComplexBlock& b) const;
  /// Solves A^H x = b.
  DenseComplexBlock solve_adjoint(const DenseComplexBlock& b) const;

  /// Hager-Higham estimate of cond_1(A).
  double condition_estimate() const { return condition_estimate_; }
  /// Smallest |u_jj| relative to max|a_ij|.
  double relative_min_pivot() const { return relative_min_pivot_; }
  /// Column permutation applied by the ordering (new -> old).
  const Eigen::VectorXi& column_ordering() const { return column_ordering_; }
  const Eigen::VectorXi& row_permutation() const { return row_permutation_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Index size_ = 0;
  double condition_estimate_ = 0.0;
  double relative_min_pivot_ = 0.0;
  Eigen::VectorXi column_ordering_;
  Eigen::VectorXi row_permutation_;
};

Factorization factorize(const SparseMatrixComplex& a);

/// Solves every column of b; throws ShapeError on a row-count mismatch.
DenseComplexBlock solve_block(const Factorization& f, const DenseComplexBlock& b);

/// Default relative deflation tolerance for basis growth.
inline constexpr double kDefaultDeflationTolerance = 1e-10;

/// Modified Gram-Schmidt against the columns of `basis`, followed by one full
/// re-orthogonalization pass. Returns nullopt when the remaining norm is below
/// deflation_tol times the original norm (or the candidate is zero).
std::optional<ComplexVector> orthonormalize_against(
    const Eigen::Ref<const Eigen::MatrixXcd>& basis, ComplexVector candidate,
    double deflation_tol = kDefaultDeflationTolerance);

/// max_ij |(V^H V - I)_ij|.
double orthonormality_defect(const Eigen::Ref<const Eigen::MatrixXcd>& basis);

/// Sines of the principal angles between span(a) and span(b), ascending.
/// Both inputs need not be orthonormal; they are orthonormalized by QR first.
Eigen::VectorXd principal_angle_sines(const Eigen::Ref<const Eigen::MatrixXcd>& a,
                                      const Eigen::Ref<const Eigen::MatrixXcd>& b);

}  // namespace hmor
