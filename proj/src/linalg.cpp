// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "hmor/error.hpp"
#include "hmor/system.hpp"

namespace hmor {

namespace {

using ColMajorComplex = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using LuSolver = Eigen::SparseLU<ColMajorComplex, Eigen::COLAMDOrdering<int>>;

std::string shape_of(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require_square_same(const SparseMatrixReal& a, const SparseMatrixReal& b, const char* what) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::ShapeError, std::string(what) + ": " + shape_of(a.rows(), a.cols()) +
                                           " vs " + shape_of(b.rows(), b.cols()));
  }
}

double max_abs(const SparseMatrixComplex& a) {
  double m = 0.0;
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrixComplex::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

double norm1(const SparseMatrixComplex& a) {
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(a.cols());
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrixComplex::InnerIterator it(a, k); it; ++it) colsum(it.col()) += std::abs(it.value());
  }
  return colsum.size() ? colsum.maxCoeff() : 0.0;
}

}  // namespace

void SecondOrderSystem::validate() const {
  const Index nn = K.rows();
  require_square_same(K, M, "M vs K");
  require_square_same(K, D, "D vs K");
  if (B.rows() != nn) {
    throw Error(ErrorKind::ShapeError, "B has " + std::to_string(B.rows()) + " rows, expected " +
                                           std::to_string(nn));
  }
  if (C.cols() != nn) {
    throw Error(ErrorKind::ShapeError, "C has " + std::to_string(C.cols()) + " columns, expected " +
                                           std::to_string(nn));
  }
}

SparseMatrixReal from_triplets(std::span<const Entry> entries, Index nrows, Index ncols) {
  if (nrows < 0 || ncols < 0) throw Error(ErrorKind::InvalidArgument, "negative dimension");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= nrows || e.col < 0 || e.col >= ncols) {
      throw Error(ErrorKind::InvalidIndex, "entry (" + std::to_string(e.row) + ", " +
                                               std::to_string(e.col) + ") outside " +
                                               shape_of(nrows, ncols));
    }
    trips.emplace_back(e.row, e.col, e.value);
  }
  SparseMatrixReal a(nrows, ncols);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

SparseMatrixComplex to_complex(const SparseMatrixReal& a) {
  SparseMatrixComplex c = a.cast<Complex>();
  c.makeCompressed();
  return c;
}

SparseMatrixComplex shifted_stiffness(const SparseMatrixReal& m, const SparseMatrixReal& d,
                                      const SparseMatrixReal& k, Complex s0) {
  require_square_same(k, m, "shifted_stiffness M vs K");
  require_square_same(k, d, "shifted_stiffness D vs K");
  SparseMatrixComplex out = (s0 * s0) * to_complex(m) + s0 * to_complex(d) + to_complex(k);
  out.makeCompressed();
  return out;
}

SparseMatrixComplex shifted_stiffness(const SecondOrderSystem& sys, Complex s0) {
  return shifted_stiffness(sys.M, sys.D, sys.K, s0);
}

SparseMatrixComplex shifted_damping(const SparseMatrixReal& m, const SparseMatrixReal& d,
                                    Complex s0) {
  require_square_same(d, m, "shifted_damping M vs D");
  SparseMatrixComplex out = (2.0 * s0) * to_complex(m) + to_complex(d);
  out.makeCompressed();
  return out;
}

SparseMatrixComplex shifted_damping(const SecondOrderSystem& sys, Complex s0) {
  return shifted_damping(sys.M, sys.D, s0);
}

struct Factorization::Impl {
  LuSolver lu;
};

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Factorization::Factorization(const SparseMatrixComplex& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::ShapeError, "factorize needs a square matrix, got " +
                                           shape_of(a.rows(), a.cols()));
  }
  size_ = a.rows();
  const double amax = max_abs(a);
  if (size_ == 0) throw Error(ErrorKind::SingularOperator, "empty matrix");
  if (amax == 0.0) throw Error(ErrorKind::SingularOperator, "zero matrix");

  // Structural check: an empty row or column can never carry a pivot.
  std::vector<char> row_hit(size_, 0), col_hit(size_, 0);
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrixComplex::InnerIterator it(a, k); it; ++it) {
      if (it.value() != Complex(0.0)) {
        row_hit[it.row()] = 1;
        col_hit[it.col()] = 1;
      }
    }
  }
  for (Index i = 0; i < size_; ++i) {
    if (!row_hit[i] || !col_hit[i]) {
      throw Error(ErrorKind::SingularOperator,
                  "structurally singular: empty row/column " + std::to_string(i));
    }
  }

  ColMajorComplex cm = a;
  cm.makeCompressed();
  impl_->lu.analyzePattern(cm);
  impl_->lu.factorize(cm);
  if (impl_->lu.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularOperator, "LU failed: " + impl_->lu.lastErrorMessage());
  }

  // U's diagonal lives in the supernodal L storage.
  const auto lview = impl_->lu.matrixL();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < size_; ++j) {
    double pivot = 0.0;
    for (Eigen::internal::MappedSuperNodalMatrix<Complex, int>::InnerIterator it(lview.m_mapL, j); it; ++it) {
      if (it.row() == j) {
        pivot = std::abs(it.value());
        break;
      }
    }
    min_pivot = std::min(min_pivot, pivot);
  }
  relative_min_pivot_ = min_pivot / amax;
  if (!(relative_min_pivot_ >= kSingularPivotTolerance)) {
    throw Error(ErrorKind::SingularOperator,
                "pivot " + std::to_string(min_pivot) + " below threshold (max|A| = " +
                    std::to_string(amax) + ")");
  }

  column_ordering_ = impl_->lu.colsPermutation().indices();
  row_permutation_ = impl_->lu.rowsPermutation().indices();

  // Hager's 1-norm estimate of ||A^{-1}||_1.
  const Index n = size_;
  ComplexVector x = ComplexVector::Constant(n, Complex(1.0 / static_cast<double>(n)));
  double inv_est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    ComplexVector y = impl_->lu.solve(x);
    const double ynorm = y.cwiseAbs().sum();
    if (iter > 0 && ynorm <= inv_est) break;
    inv_est = ynorm;
    ComplexVector xi(n);
    for (Index i = 0; i < n; ++i) {
      const double mag = std::abs(y(i));
      xi(i) = mag > 0.0 ? y(i) / mag : Complex(1.0);
    }
    ComplexVector z = impl_->lu.adjoint().solve(xi);
    Index jmax = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&jmax);
    if (zmax <= std::real(z.dot(x))) break;
    x.setZero();
    x(jmax) = 1.0;
  }
  condition_estimate_ = norm1(a) * inv_est;
}

DenseComplexBlock Factorization::solve(const DenseComplexBlock& b) const {
  if (b.rows() != size_) {
    throw Error(ErrorKind::ShapeError, "right-hand side has " + std::to_string(b.rows()) +
                                           " rows, operator is " + std::to_string(size_));
  }
  return impl_->lu.solve(b);
}

DenseComplexBlock Factorization::solve_transposed(const DenseComplexBlock& b) const {
  if (b.rows() != size_) {
    throw Error(ErrorKind::ShapeError, "right-hand side has " + std::to_string(b.rows()) +
                                           " rows, operator is " + std::to_string(size_));
  }
  return impl_->lu.transpose().solve(b);
}

DenseComplexBlock Factorization::solve_adjoint(const DenseComplexBlock& b) const {
  if (b.rows() != size_) {
    throw Error(ErrorKind::ShapeError, "right-hand side has " + std::to_string(b.rows()) +
                                           " rows, operator is " + std::to_string(size_));
  }
  return impl_->lu.adjoint().solve(b);
}

Factorization factorize(const SparseMatrixComplex& a) { return Factorization(a); }

DenseComplexBlock solve_block(const Factorization& f, const DenseComplexBlock& b) {
  return f.solve(b);
}

std::optional<ComplexVector> orthonormalize_against(
    const Eigen::Ref<const Eigen::MatrixXcd>& basis, ComplexVector candidate,
    double deflation_tol) {
  if (candidate.size() != basis.rows()) {
    throw Error(ErrorKind::ShapeError, "candidate length " + std::to_string(candidate.size()) +
                                           " vs basis rows " + std::to_string(basis.rows()));
  }
  const double original = candidate.norm();
  if (original == 0.0 || !std::isfinite(original)) return std::nullopt;

  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < basis.cols(); ++j) {
      const Complex h = basis.col(j).dot(candidate);
      candidate.noalias() -= h * basis.col(j);
    }
  }
  const double remaining = candidate.norm();
  if (remaining < deflation_tol * original) return std::nullopt;
  candidate /= remaining;
  return candidate;
}

double orthonormality_defect(const Eigen::Ref<const Eigen::MatrixXcd>& basis) {
  if (basis.cols() == 0) return 0.0;
  Eigen::MatrixXcd gram = basis.adjoint() * basis;
  gram.diagonal().array() -= Complex(1.0);
  return gram.cwiseAbs().maxCoeff();
}

Eigen::VectorXd principal_angle_sines(const Eigen::Ref<const Eigen::MatrixXcd>& a,
                                      const Eigen::Ref<const Eigen::MatrixXcd>& b) {
  if (a.rows() != b.rows()) throw Error(ErrorKind::ShapeError, "principal angles: row mismatch");
  auto orth = [](const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd scaled = m;
    for (Index j = 0; j < scaled.cols(); ++j) {
      const double nrm = scaled.col(j).norm();
      if (nrm > 0.0) scaled.col(j) /= nrm;
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(scaled);
    return Eigen::MatrixXcd(qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), m.cols()));
  };
  const Eigen::MatrixXcd qa = orth(a);
  const Eigen::MatrixXcd qb = orth(b);
  const Eigen::MatrixXcd resid = qb - qa * (qa.adjoint() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(resid);
  Eigen::VectorXd s = svd.singularValues();
  std::sort(s.data(), s.data() + s.size());
  return s;
}

}  // namespace hmor
