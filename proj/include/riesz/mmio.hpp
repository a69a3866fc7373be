#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "riesz/core.hpp"
#include "riesz/sparse.hpp"

namespace riesz {

enum class MmFormat { coordinate, array };
enum class MmField { real, complex_number, integer, pattern };
enum class MmSymmetry { general, symmetric, skew_symmetric, hermitian };

struct MatrixMarketHeader {
  MmFormat format = MmFormat::coordinate;
  MmField field = MmField::real;
  MmSymmetry symmetry = MmSymmetry::general;
};

/// Result of reading a Matrix Market file. Coordinate files come back as a
/// SparseMatrix with the symmetric/hermitian/skew storage expanded to
/// general; array files come back dense. Stored and expanded entry counts
/// are reported separately because collections disagree on which one the
/// "nonzeros" of a symmetric matrix means.
struct MmReadResult {
  MatrixMarketHeader header;
  std::variant<SparseMatrix, DenseMatrix> matrix;
  index_t stored_entries = 0;
  index_t expanded_entries = 0;
  std::vector<std::string> warnings;

  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(matrix); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(matrix); }
  const DenseMatrix& dense() const { return std::get<DenseMatrix>(matrix); }
};

namespace detail {

inline std::string to_lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

inline MatrixMarketHeader parse_mm_header(const std::string& line) {
  std::istringstream ss(line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") {
    throw std::runtime_error("matrix market: missing %%MatrixMarket banner");
  }
  if (to_lower(object) != "matrix") {
    throw std::runtime_error("matrix market: unsupported object '" + object + "'");
  }
  MatrixMarketHeader h;
  format = to_lower(format);
  field = to_lower(field);
  symmetry = to_lower(symmetry);
  if (format == "coordinate") {
    h.format = MmFormat::coordinate;
  } else if (format == "array") {
    h.format = MmFormat::array;
  } else {
    throw std::runtime_error("matrix market: unknown format '" + format + "'");
  }
  if (field == "real") {
    h.field = MmField::real;
  } else if (field == "complex") {
    h.field = MmField::complex_number;
  } else if (field == "integer") {
    h.field = MmField::integer;
  } else if (field == "pattern") {
    h.field = MmField::pattern;
  } else {
    throw std::runtime_error("matrix market: unknown field '" + field + "'");
  }
  if (symmetry == "general") {
    h.symmetry = MmSymmetry::general;
  } else if (symmetry == "symmetric") {
    h.symmetry = MmSymmetry::symmetric;
  } else if (symmetry == "skew-symmetric") {
    h.symmetry = MmSymmetry::skew_symmetric;
  } else if (symmetry == "hermitian") {
    h.symmetry = MmSymmetry::hermitian;
  } else {
    throw std::runtime_error("matrix market: unknown symmetry '" + symmetry + "'");
  }
  // Combinations outside the MM 1.0 table are rejected.
  if (h.field == MmField::pattern && h.format == MmFormat::array) {
    throw std::runtime_error("matrix market: pattern field requires coordinate format");
  }
  if (h.field == MmField::pattern &&
      (h.symmetry == MmSymmetry::hermitian || h.symmetry == MmSymmetry::skew_symmetric)) {
    throw std::runtime_error("matrix market: pattern field admits only general/symmetric");
  }
  if (h.symmetry == MmSymmetry::hermitian && h.field != MmField::complex_number) {
    throw std::runtime_error("matrix market: hermitian symmetry requires complex field");
  }
  return h;
}

inline void skip_comments(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.empty()) { continue; }
    if (line[0] == '%') { continue; }
    return;
  }
  throw std::runtime_error("matrix market: unexpected end of file");
}

inline Scalar read_value(std::istream& in, MmField field) {
  switch (field) {
    case MmField::pattern:
      return Scalar{1.0, 0.0};
    case MmField::integer:
    case MmField::real: {
      double v = 0.0;
      if (!(in >> v)) { throw std::runtime_error("matrix market: bad numeric value"); }
      return Scalar{v, 0.0};
    }
    case MmField::complex_number: {
      double re = 0.0;
      double im = 0.0;
      if (!(in >> re >> im)) { throw std::runtime_error("matrix market: bad complex value"); }
      return Scalar{re, im};
    }
  }
  throw std::runtime_error("matrix market: unreachable field");
}

inline void format_value(char* buf, std::size_t len, double v) {
  std::snprintf(buf, len, "%.17g", v);
}

}  // namespace detail

inline MmReadResult read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) { throw std::runtime_error("matrix market: empty input"); }
  MmReadResult result;
  result.header = detail::parse_mm_header(line);
  const MatrixMarketHeader& h = result.header;
  detail::skip_comments(in, line);
  std::istringstream size_line(line);

  if (h.format == MmFormat::coordinate) {
    long long rows = 0;
    long long cols = 0;
    long long entries = 0;
    if (!(size_line >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
      throw std::runtime_error("matrix market: bad coordinate size line");
    }
    if (h.symmetry != MmSymmetry::general && rows != cols) {
      throw std::runtime_error("matrix market: symmetric storage requires a square matrix");
    }
    std::vector<std::tuple<index_t, index_t, Scalar>> triplets;
    triplets.reserve(static_cast<index_t>(entries) * 2);
    for (long long e = 0; e < entries; ++e) {
      long long i1 = 0;
      long long j1 = 0;
      if (!(in >> i1 >> j1)) { throw std::runtime_error("matrix market: truncated entry list"); }
      const Scalar v = detail::read_value(in, h.field);
      if (i1 < 1 || i1 > rows || j1 < 1 || j1 > cols) {
        throw std::runtime_error("matrix market: index out of range");
      }
      if (!is_finite(v)) { throw std::runtime_error("matrix market: non-finite value"); }
      const index_t i = static_cast<index_t>(i1 - 1);
      const index_t j = static_cast<index_t>(j1 - 1);
      triplets.emplace_back(i, j, v);
      if (i != j) {
        switch (h.symmetry) {
          case MmSymmetry::general:
            break;
          case MmSymmetry::symmetric:
            triplets.emplace_back(j, i, v);
            break;
          case MmSymmetry::skew_symmetric:
            triplets.emplace_back(j, i, -v);
            break;
          case MmSymmetry::hermitian:
            triplets.emplace_back(j, i, std::conj(v));
            break;
        }
      }
    }
    index_t duplicates = 0;
    SparseMatrix m = SparseMatrix::from_triplets(static_cast<index_t>(rows),
                                                 static_cast<index_t>(cols),
                                                 std::move(triplets), &duplicates);
    if (duplicates > 0) {
      result.warnings.push_back("summed " + std::to_string(duplicates) +
                                " duplicate coordinate entries");
    }
    result.stored_entries = static_cast<index_t>(entries);
    result.expanded_entries = m.nnz();
    result.matrix = std::move(m);
  } else {
    long long rows = 0;
    long long cols = 0;
    if (!(size_line >> rows >> cols) || rows < 0 || cols < 0) {
      throw std::runtime_error("matrix market: bad array size line");
    }
    if (h.symmetry != MmSymmetry::general && rows != cols) {
      throw std::runtime_error("matrix market: symmetric storage requires a square matrix");
    }
    DenseMatrix m(static_cast<index_t>(rows), static_cast<index_t>(cols));
    index_t stored = 0;
    for (index_t j = 0; j < m.cols; ++j) {
      index_t i0 = 0;
      if (h.symmetry == MmSymmetry::skew_symmetric) {
        i0 = j + 1;  // diagonal implicitly zero
      } else if (h.symmetry != MmSymmetry::general) {
        i0 = j;  // lower triangle stored column-wise
      }
      for (index_t i = i0; i < m.rows; ++i) {
        const Scalar v = detail::read_value(in, h.field);
        if (!is_finite(v)) { throw std::runtime_error("matrix market: non-finite value"); }
        ++stored;
        m(i, j) = v;
        if (i != j) {
          switch (h.symmetry) {
            case MmSymmetry::general:
              break;
            case MmSymmetry::symmetric:
              m(j, i) = v;
              break;
            case MmSymmetry::skew_symmetric:
              m(j, i) = -v;
              break;
            case MmSymmetry::hermitian:
              m(j, i) = std::conj(v);
              break;
          }
        }
      }
    }
    result.stored_entries = stored;
    result.expanded_entries = m.rows * m.cols;
    result.matrix = std::move(m);
  }
  return result;
}

inline MmReadResult read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) { throw std::runtime_error("matrix market: cannot open '" + path + "'"); }
  return read_matrix_market(in);
}

/// Writes coordinate format with general symmetry (the expanded form is what
/// the library holds). The field is real when every imaginary part is zero.
inline void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  bool complex_field = false;
  for (Scalar v : m.values) {
    if (v.imag() != 0.0) {
      complex_field = true;
      break;
    }
  }
  out << "%%MatrixMarket matrix coordinate " << (complex_field ? "complex" : "real")
      << " general\n";
  out << m.n_rows << " " << m.n_cols << " " << m.nnz() << "\n";
  char re[40];
  char im[40];
  for (index_t i = 0; i < m.n_rows; ++i) {
    for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      detail::format_value(re, sizeof re, m.values[k].real());
      out << (i + 1) << " " << (m.col_idx[k] + 1) << " " << re;
      if (complex_field) {
        detail::format_value(im, sizeof im, m.values[k].imag());
        out << " " << im;
      }
      out << "\n";
    }
  }
  if (!out) { throw std::runtime_error("matrix market: write failed"); }
}

inline void write_matrix_market(std::ostream& out, const DenseMatrix& m) {
  bool complex_field = false;
  for (Scalar v : m.data) {
    if (v.imag() != 0.0) {
      complex_field = true;
      break;
    }
  }
  out << "%%MatrixMarket matrix array " << (complex_field ? "complex" : "real")
      << " general\n";
  out << m.rows << " " << m.cols << "\n";
  char re[40];
  char im[40];
  for (index_t j = 0; j < m.cols; ++j) {
    for (index_t i = 0; i < m.rows; ++i) {
      detail::format_value(re, sizeof re, m(i, j).real());
      out << re;
      if (complex_field) {
        detail::format_value(im, sizeof im, m(i, j).imag());
        out << " " << im;
      }
      out << "\n";
    }
  }
  if (!out) { throw std::runtime_error("matrix market: write failed"); }
}

template <typename MatrixT>
inline void write_matrix_market(const std::string& path, const MatrixT& m) {
  std::ofstream out(path);
  if (!out) { throw std::runtime_error("matrix market: cannot open '" + path + "' for write"); }
  write_matrix_market(out, m);
}

}  // namespace riesz
