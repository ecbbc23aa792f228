// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "hmor/linalg.hpp"
#include "hmor/soar.hpp"
#include "hmor/system.hpp"

namespace hmor::rom {

/// Dense Galerkin projection V^H {M, D, K} V, V^H B, C V.
struct ReducedSystem {
  Eigen::MatrixXcd M, D, K, B, C;
  std::string basis_hash;

  Index r() const { return K.rows(); }
  /// The ROM obtained from the first q basis columns.
  ReducedSystem leading(Index q) const;
};

ReducedSystem project(const SecondOrderSystem& sys, const Eigen::Ref<const Eigen::MatrixXcd>& v);
ReducedSystem project(const SecondOrderSystem& sys, const soar::ProjectionBasis& basis);

enum class Source { Fom, Rom };

struct TransferSample {
  double k = 0.0;  // wave number, 1/m
  DenseComplexBlock value;  // p_o x p_i
  Source source = Source::Fom;
  Index r = 0;  // ROM order, 0 for the FOM
};

/// G(s) = C (s^2 M + s D + K)^{-1} B at an arbitrary complex s.
DenseComplexBlock transfer_fom(const SecondOrderSystem& sys, Complex s);
/// Throws SingularReducedOperator when the reduced pencil is singular at s.
DenseComplexBlock transfer_rom(const ReducedSystem& rom, Complex s);

/// G(ik) for k > 0; throws SingularOperator at a singular k.
TransferSample eval_fom(const SecondOrderSystem& sys, double k);
TransferSample eval_rom(const ReducedSystem& rom, double k);

/// Stored moments follow the sign convention G(s) = sum_l -m_l (s - s0)^l.
struct MomentSequence {
  Complex s0;
  std::vector<DenseComplexBlock> moments;
};

MomentSequence moments(const SecondOrderSystem& sys, Complex s0, Index count);
MomentSequence moments(const ReducedSystem& rom, Complex s0, Index count);

enum class NormTag { Two, Sup };
std::string_view to_string(NormTag n);
NormTag parse_norm(std::string_view s);

/// Two: Frobenius (vector 2-norm over outputs for one input). Sup: max |entry|.
double block_norm(const DenseComplexBlock& g, NormTag norm);

struct ErrorSample {
  double k = 0.0;
  NormTag norm = NormTag::Two;
  double e_true = 0.0;    // ||G - G_r|| / ||G||
  double e_hat = 0.0;     // ||G_{r+1} - G_r|| / ||G_r||
  double e_tilde = 0.0;   // ||G_{r+1} - G_r|| / ||G_{r+1}||
  double abs_est = 0.0;   // ||G_{r+1} - G_r||
  double abs_true = 0.0;  // ||G - G_r||
  double norm_g_r = 0.0;
  double norm_g_r1 = 0.0;
};

/// Throws DegenerateDenominator when ||G||, ||G_r|| or ||G_{r+1}|| vanishes,
/// InvalidArgument when the samples sit at different k.
ErrorSample error_sample(const TransferSample& g, const TransferSample& g_r,
                         const TransferSample& g_r1, NormTag norm);
ErrorSample error_sample(double k, const DenseComplexBlock& g, const DenseComplexBlock& g_r,
                         const DenseComplexBlock& g_r1, NormTag norm);

}  // namespace hmor::rom
