// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "hmor/linalg.hpp"

namespace hmor::mm {

// Matrix Market exchange format. Coordinate files (real/integer/complex,
// general/symmetric) hold sparse matrices; array files hold dense blocks.
// Symmetric files store the lower triangle and are expanded on read.

void write_sparse(std::ostream& out, const SparseMatrixReal& a, bool symmetric = false);
void write_sparse(std::ostream& out, const SparseMatrixComplex& a);
void write_dense(std::ostream& out, const DenseComplexBlock& a);

/// Throws InvalidArgument if the file holds complex values.
SparseMatrixReal read_sparse_real(std::istream& in);
SparseMatrixComplex read_sparse_complex(std::istream& in);
DenseComplexBlock read_dense(std::istream& in);

void save(const std::filesystem::path& path, const SparseMatrixReal& a, bool symmetric = false);
void save(const std::filesystem::path& path, const SparseMatrixComplex& a);
void save(const std::filesystem::path& path, const DenseComplexBlock& a);

SparseMatrixReal load_sparse_real(const std::filesystem::path& path);
SparseMatrixComplex load_sparse_complex(const std::filesystem::path& path);
DenseComplexBlock load_dense(const std::filesystem::path& path);

}  // namespace hmor::mm
