// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "hmor/linalg.hpp"

namespace hmor {

struct SystemMetadata {
  std::string mesh_hash;
  std::string boundary;
};

/// (-k^2 M + i k D + K) p = B u,  y = C p.
struct SecondOrderSystem {
  SparseMatrixReal M;
  SparseMatrixReal D;
  SparseMatrixReal K;
  SparseMatrixReal B;  // n x p_i
  SparseMatrixReal C;  // p_o x n
  SystemMetadata metadata;

  Index n() const { return K.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }

  /// Throws ShapeError when the blocks are not mutually consistent.
  void validate() const;
};

}  // namespace hmor
