// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#include "hmor/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hmor/error.hpp"
#include "hmor/format.hpp"

namespace hmor::mm {

namespace {

enum class Layout { Coordinate, Array };
enum class Field { Real, Complex };
enum class Symmetry { General, Symmetric };

struct Header {
  Layout layout;
  Field field;
  Symmetry symmetry;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void bad(const std::string& what, long line) {
  throw Error(ErrorKind::InvalidArgument,
              "Matrix Market line " + std::to_string(line) + ": " + what);
}

Header read_header(std::istream& in, long& line_no) {
  std::string line;
  if (!std::getline(in, line)) bad("missing header", 1);
  line_no = 1;
  std::istringstream hs(line);
  std::string banner, object, layout, field, symmetry;
  hs >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") bad("not a MatrixMarket matrix", 1);
  Header h{};
  layout = lower(layout);
  field = lower(field);
  symmetry = lower(symmetry);
  if (layout == "coordinate") h.layout = Layout::Coordinate;
  else if (layout == "array") h.layout = Layout::Array;
  else bad("unsupported layout '" + layout + "'", 1);
  if (field == "real" || field == "integer" || field == "double") h.field = Field::Real;
  else if (field == "complex") h.field = Field::Complex;
  else bad("unsupported field '" + field + "'", 1);
  if (symmetry == "general") h.symmetry = Symmetry::General;
  else if (symmetry == "symmetric") h.symmetry = Symmetry::Symmetric;
  else bad("unsupported symmetry '" + symmetry + "'", 1);
  return h;
}

// Next non-comment, non-blank line.
bool next_data_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

struct Parsed {
  Header header;
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<Complex>> entries;  // coordinate
  DenseComplexBlock dense;                       // array
};

Parsed parse(std::istream& in) {
  long line_no = 0;
  Parsed p;
  p.header = read_header(in, line_no);
  std::string line;
  if (!next_data_line(in, line, line_no)) bad("missing size line", line_no);
  std::istringstream ss(line);
  const bool complex = p.header.field == Field::Complex;
  if (p.header.layout == Layout::Coordinate) {
    long long nnz = 0;
    if (!(ss >> p.rows >> p.cols >> nnz) || p.rows < 0 || p.cols < 0 || nnz < 0) {
      bad("bad size line", line_no);
    }
    p.entries.reserve(static_cast<std::size_t>(nnz));
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(in, line, line_no)) bad("expected " + std::to_string(nnz) + " entries", line_no);
      std::istringstream es(line);
      long long i = 0, j = 0;
      double re = 0.0, im = 0.0;
      if (!(es >> i >> j >> re) || (complex && !(es >> im))) bad("bad entry", line_no);
      if (i < 1 || i > p.rows || j < 1 || j > p.cols) {
        throw Error(ErrorKind::InvalidIndex,
                    "Matrix Market line " + std::to_string(line_no) + ": index out of range");
      }
      p.entries.emplace_back(i - 1, j - 1, Complex(re, im));
      if (p.header.symmetry == Symmetry::Symmetric && i != j) {
        p.entries.emplace_back(j - 1, i - 1, Complex(re, im));
      }
    }
  } else {
    if (!(ss >> p.rows >> p.cols) || p.rows < 0 || p.cols < 0) bad("bad size line", line_no);
    p.dense = DenseComplexBlock::Zero(p.rows, p.cols);
    // Column-major; symmetric arrays list the lower triangle only.
    for (Index j = 0; j < p.cols; ++j) {
      const Index start = p.header.symmetry == Symmetry::Symmetric ? j : 0;
      for (Index i = start; i < p.rows; ++i) {
        if (!next_data_line(in, line, line_no)) bad("truncated array", line_no);
        std::istringstream es(line);
        double re = 0.0, im = 0.0;
        if (!(es >> re) || (complex && !(es >> im))) bad("bad value", line_no);
        p.dense(i, j) = Complex(re, im);
        if (p.header.symmetry == Symmetry::Symmetric) p.dense(j, i) = Complex(re, im);
      }
    }
  }
  return p;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  return in;
}

}  // namespace

void write_sparse(std::ostream& out, const SparseMatrixReal& a, bool symmetric) {
  Index count = 0;
  for (Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrixReal::InnerIterator it(a, r); it; ++it) {
      if (!symmetric || it.col() <= it.row()) ++count;
    }
  }
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n'
      << a.rows() << ' ' << a.cols() << ' ' << count << '\n';
  for (Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrixReal::InnerIterator it(a, r); it; ++it) {
      if (symmetric && it.col() > it.row()) continue;
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << shortest(it.value()) << '\n';
    }
  }
}

void write_sparse(std::ostream& out, const SparseMatrixComplex& a) {
  out << "%%MatrixMarket matrix coordinate complex general\n"
      << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrixComplex::InnerIterator it(a, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << shortest(it.value().real()) << ' '
          << shortest(it.value().imag()) << '\n';
    }
  }
}

void write_dense(std::ostream& out, const DenseComplexBlock& a) {
  out << "%%MatrixMarket matrix array complex general\n" << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out << shortest(a(i, j).real()) << ' ' << shortest(a(i, j).imag()) << '\n';
    }
  }
}

SparseMatrixReal read_sparse_real(std::istream& in) {
  Parsed p = parse(in);
  if (p.header.layout != Layout::Coordinate) bad("expected coordinate layout", 1);
  if (p.header.field == Field::Complex) bad("complex file where a real matrix was expected", 1);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(p.entries.size());
  for (const auto& t : p.entries) trips.emplace_back(t.row(), t.col(), t.value().real());
  SparseMatrixReal a(p.rows, p.cols);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

SparseMatrixComplex read_sparse_complex(std::istream& in) {
  Parsed p = parse(in);
  if (p.header.layout != Layout::Coordinate) bad("expected coordinate layout", 1);
  SparseMatrixComplex a(p.rows, p.cols);
  a.setFromTriplets(p.entries.begin(), p.entries.end());
  a.makeCompressed();
  return a;
}

DenseComplexBlock read_dense(std::istream& in) {
  Parsed p = parse(in);
  if (p.header.layout != Layout::Array) bad("expected array layout", 1);
  return p.dense;
}

void save(const std::filesystem::path& path, const SparseMatrixReal& a, bool symmetric) {
  auto out = open_out(path);
  write_sparse(out, a, symmetric);
}

void save(const std::filesystem::path& path, const SparseMatrixComplex& a) {
  auto out = open_out(path);
  write_sparse(out, a);
}

void save(const std::filesystem::path& path, const DenseComplexBlock& a) {
  auto out = open_out(path);
  write_dense(out, a);
}

SparseMatrixReal load_sparse_real(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_sparse_real(in);
}

SparseMatrixComplex load_sparse_complex(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_sparse_complex(in);
}

DenseComplexBlock load_dense(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dense(in);
}

}  // namespace hmor::mm
