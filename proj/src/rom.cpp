// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/rom.hpp"

#include <cmath>

#include "hmor/error.hpp"
#include "hmor/format.hpp"

namespace hmor::rom {

ReducedSystem ReducedSystem::leading(Index q) const {
  if (q < 1 || q > r()) {
    throw Error(ErrorKind::ShapeError,
                "cannot take order " + std::to_string(q) + " from ROM of order " + std::to_string(r()));
  }
  ReducedSystem out;
  out.M = M.topLeftCorner(q, q);
  out.D = D.topLeftCorner(q, q);
  out.K = K.topLeftCorner(q, q);
  out.B = B.topRows(q);
  out.C = C.leftCols(q);
  out.basis_hash = basis_hash;
  return out;
}

ReducedSystem project(const SecondOrderSystem& sys, const Eigen::Ref<const Eigen::MatrixXcd>& v) {
  sys.validate();
  if (v.rows() != sys.n()) {
    throw Error(ErrorKind::ShapeError, "basis has " + std::to_string(v.rows()) +
                                           " rows, system dimension is " + std::to_string(sys.n()));
  }
  const Eigen::MatrixXcd vh = v.adjoint();
  ReducedSystem rom;
  rom.M = vh * (to_complex(sys.M) * v);
  rom.D = vh * (to_complex(sys.D) * v);
  rom.K = vh * (to_complex(sys.K) * v);
  rom.B = vh * DenseComplexBlock(to_complex(sys.B));
  rom.C = to_complex(sys.C) * v;
  return rom;
}

ReducedSystem project(const SecondOrderSystem& sys, const soar::ProjectionBasis& basis) {
  ReducedSystem rom = project(sys, basis.matrix());
  rom.basis_hash = basis.hash();
  return rom;
}

DenseComplexBlock transfer_fom(const SecondOrderSystem& sys, Complex s) {
  sys.validate();
  const Factorization lu(shifted_stiffness(sys, s));
  return to_complex(sys.C) * lu.solve(DenseComplexBlock(to_complex(sys.B)));
}

DenseComplexBlock transfer_rom(const ReducedSystem& rom, Complex s) {
  const Eigen::MatrixXcd a = (s * s) * rom.M + s * rom.D + rom.K;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const Eigen::MatrixXcd x = lu.solve(rom.B);
  if (!x.allFinite() || !(lu.rcond() > 0.0)) {
    throw Error(ErrorKind::SingularReducedOperator,
                "reduced operator of order " + std::to_string(rom.r()) + " is singular at s = " +
                    shortest(s.real()) + "+" + shortest(s.imag()) + "i");
  }
  return rom.C * x;
}

TransferSample eval_fom(const SecondOrderSystem& sys, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "wave number must be > 0");
  try {
    return TransferSample{k, transfer_fom(sys, Complex(0.0, k)), Source::Fom, 0};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularOperator) {
      throw Error(ErrorKind::SingularOperator, "at k = " + shortest(k) + ": " + e.what());
    }
    throw;
  }
}

TransferSample eval_rom(const ReducedSystem& rom, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "wave number must be > 0");
  return TransferSample{k, transfer_rom(rom, Complex(0.0, k)), Source::Rom, rom.r()};
}

namespace {

// X_0 = Kt^{-1} B, X_1 = -Kt^{-1} Dt X_0, X_l = -Kt^{-1} (Dt X_{l-1} + M X_{l-2});
// m_l = -C X_l.
template <typename Solve, typename ApplyDt, typename ApplyM>
MomentSequence moment_recurrence(Complex s0, Index count, const DenseComplexBlock& b,
                                 const Eigen::MatrixXcd& c, Solve solve, ApplyDt apply_dt,
                                 ApplyM apply_m) {
  if (count < 0) throw Error(ErrorKind::InvalidArgument, "negative moment count");
  MomentSequence out{s0, {}};
  DenseComplexBlock prev2, prev1;
  for (Index l = 0; l < count; ++l) {
    DenseComplexBlock x;
    if (l == 0) {
      x = solve(b);
    } else {
      DenseComplexBlock rhs = apply_dt(prev1);
      if (l >= 2) rhs += apply_m(prev2);
      x = -solve(rhs);
    }
    out.moments.push_back(-(c * x));
    prev2 = std::move(prev1);
    prev1 = std::move(x);
  }
  return out;
}

}  // namespace

MomentSequence moments(const SecondOrderSystem& sys, Complex s0, Index count) {
  sys.validate();
  const Factorization lu(shifted_stiffness(sys, s0));
  const SparseMatrixComplex dt = shifted_damping(sys, s0);
  const SparseMatrixComplex m = to_complex(sys.M);
  const Eigen::MatrixXcd c = Eigen::MatrixXcd(to_complex(sys.C));
  return moment_recurrence(
      s0, count, DenseComplexBlock(to_complex(sys.B)), c,
      [&](const DenseComplexBlock& rhs) { return lu.solve(rhs); },
      [&](const DenseComplexBlock& x) { return DenseComplexBlock(dt * x); },
      [&](const DenseComplexBlock& x) { return DenseComplexBlock(m * x); });
}

MomentSequence moments(const ReducedSystem& rom, Complex s0, Index count) {
  const Eigen::MatrixXcd kt = (s0 * s0) * rom.M + s0 * rom.D + rom.K;
  const Eigen::MatrixXcd dt = (2.0 * s0) * rom.M + rom.D;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(kt);
  if (!(lu.rcond() > 0.0)) {
    throw Error(ErrorKind::SingularReducedOperator, "shifted reduced stiffness is singular");
  }
  return moment_recurrence(
      s0, count, rom.B, rom.C, [&](const DenseComplexBlock& rhs) { return DenseComplexBlock(lu.solve(rhs)); },
      [&](const DenseComplexBlock& x) { return DenseComplexBlock(dt * x); },
      [&](const DenseComplexBlock& x) { return DenseComplexBlock(rom.M * x); });
}

std::string_view to_string(NormTag n) { return n == NormTag::Two ? "two" : "sup"; }

NormTag parse_norm(std::string_view s) {
  if (s == "two" || s == "2") return NormTag::Two;
  if (s == "sup" || s == "inf") return NormTag::Sup;
  throw Error(ErrorKind::InvalidArgument, "unknown norm '" + std::string(s) + "' (expected two|sup)");
}

double block_norm(const DenseComplexBlock& g, NormTag norm) {
  if (g.size() == 0) return 0.0;
  return norm == NormTag::Two ? g.norm() : g.cwiseAbs().maxCoeff();
}

ErrorSample error_sample(double k, const DenseComplexBlock& g, const DenseComplexBlock& g_r,
                         const DenseComplexBlock& g_r1, NormTag norm) {
  if (g.rows() != g_r.rows() || g.cols() != g_r.cols() || g.rows() != g_r1.rows() ||
      g.cols() != g_r1.cols()) {
    throw Error(ErrorKind::ShapeError, "transfer samples differ in shape");
  }
  ErrorSample e;
  e.k = k;
  e.norm = norm;
  const double ng = block_norm(g, norm);
  e.norm_g_r = block_norm(g_r, norm);
  e.norm_g_r1 = block_norm(g_r1, norm);
  if (!(ng > 0.0) || !(e.norm_g_r > 0.0) || !(e.norm_g_r1 > 0.0)) {
    throw Error(ErrorKind::DegenerateDenominator, "vanishing transfer value at k = " + shortest(k));
  }
  e.abs_true = block_norm(g - g_r, norm);
  e.abs_est = block_norm(g_r1 - g_r, norm);
  e.e_true = e.abs_true / ng;
  e.e_hat = e.abs_est / e.norm_g_r;
  e.e_tilde = e.abs_est / e.norm_g_r1;
  return e;
}

ErrorSample error_sample(const TransferSample& g, const TransferSample& g_r,
                         const TransferSample& g_r1, NormTag norm) {
  if (g.k != g_r.k || g.k != g_r1.k) {
    throw Error(ErrorKind::InvalidArgument, "error samples need a common wave number");
  }
  return error_sample(g.k, g.value, g_r.value, g_r1.value, norm);
}

}  // namespace hmor::rom
