// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_MATRIX_MARKET_HPP
#define ALGDD_MATRIX_MARKET_HPP

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sparse.hpp"

namespace algdd {

enum class MmField { real, integer, complex_, pattern };
enum class MmSymmetry { general, symmetric, skew, hermitian };

struct MmHeader {
  bool coordinate = true;
  MmField field = MmField::real;
  MmSymmetry symmetry = MmSymmetry::general;
};

namespace detail {

[[noreturn]] inline void mm_fail(const std::string& path, std::size_t line,
                                 const std::string& what) {
  throw std::runtime_error(format_msg(path, ":", line, ": ", what));
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline MmHeader parse_mm_banner(const std::string& path, const std::string& banner,
                                std::size_t line) {
  std::istringstream is(banner);
  std::string tag, object, format, field, symmetry;
  is >> tag >> object >> format >> field >> symmetry;
  if (lower(tag) != "%%matrixmarket" || lower(object) != "matrix")
    mm_fail(path, line, "not a Matrix Market matrix file");
  MmHeader h;
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format == "coordinate")
    h.coordinate = true;
  else if (format == "array")
    h.coordinate = false;
  else
    mm_fail(path, line, "unknown format '" + format + "'");
  if (field == "real")
    h.field = MmField::real;
  else if (field == "integer")
    h.field = MmField::integer;
  else if (field == "complex")
    h.field = MmField::complex_;
  else if (field == "pattern")
    h.field = MmField::pattern;
  else
    mm_fail(path, line, "unknown field '" + field + "'");
  if (symmetry == "general")
    h.symmetry = MmSymmetry::general;
  else if (symmetry == "symmetric")
    h.symmetry = MmSymmetry::symmetric;
  else if (symmetry == "skew-symmetric")
    h.symmetry = MmSymmetry::skew;
  else if (symmetry == "hermitian")
    h.symmetry = MmSymmetry::hermitian;
  else
    mm_fail(path, line, "unknown symmetry '" + symmetry + "'");
  if (h.field == MmField::pattern && !h.coordinate)
    mm_fail(path, line, "pattern matrices must use coordinate format");
  if (h.field == MmField::pattern && h.symmetry == MmSymmetry::skew)
    mm_fail(path, line, "pattern matrices cannot be skew-symmetric");
  if (h.symmetry == MmSymmetry::hermitian && h.field != MmField::complex_)
    mm_fail(path, line, "hermitian symmetry requires the complex field");
  return h;
}

template <scalar K>
K mm_value(const std::string& path, std::size_t line, std::istringstream& is, MmField field) {
  if (field == MmField::pattern) return K(1);
  if (field == MmField::complex_) {
    double re, im;
    if (!(is >> re >> im)) mm_fail(path, line, "expected two numeric values");
    if constexpr (is_complex_v<K>)
      return K(re, im);
    else {
      mm_fail(path, line, "complex entries need a complex scalar type");
    }
  }
  if (field == MmField::integer) {
    long long v;
    if (!(is >> v)) mm_fail(path, line, "expected an integer value");
    return K(static_cast<double>(v));
  }
  double v;
  if (!(is >> v)) mm_fail(path, line, "expected a numeric value");
  return K(v);
}

/// Mirrors an off-diagonal entry according to the declared symmetry.
template <scalar K>
void mm_expand(std::vector<Triplet<K>>& t, index_t r, index_t c, K v, MmSymmetry sym) {
  t.push_back({r, c, v});
  if (r == c || sym == MmSymmetry::general) return;
  if (sym == MmSymmetry::symmetric)
    t.push_back({c, r, v});
  else if (sym == MmSymmetry::skew)
    t.push_back({c, r, -v});
  else
    t.push_back({c, r, conj_of(v)});
}

inline SymmetryHint mm_hint(MmSymmetry sym, bool complex_scalar) {
  switch (sym) {
    case MmSymmetry::symmetric:
      return SymmetryHint::symmetric;
    case MmSymmetry::hermitian:
      return SymmetryHint::hermitian;
    case MmSymmetry::skew:
      return SymmetryHint::general;
    case MmSymmetry::general:
    default:
      return SymmetryHint::general;
  }
  (void)complex_scalar;
}

}  // namespace detail

/// Reads only the banner, so callers can pick the scalar type before parsing.
inline MmHeader peek_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string banner;
  if (!std::getline(in, banner)) detail::mm_fail(path, 1, "empty file");
  return detail::parse_mm_banner(path, banner, 1);
}

template <scalar K>
SparseMatrix<K> read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::size_t lineno = 0;
  std::string line;
  if (!std::getline(in, line)) detail::mm_fail(path, 1, "empty file");
  ++lineno;
  MmHeader h = detail::parse_mm_banner(path, line, lineno);
  if (h.field == MmField::complex_ && !is_complex_v<K>)
    detail::mm_fail(path, lineno, "complex matrix requires the complex reader");

  auto next_data_line = [&](bool required) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos) continue;
      if (line[pos] == '%') continue;
      return true;
    }
    if (required) detail::mm_fail(path, lineno + 1, "unexpected end of file");
    return false;
  };

  next_data_line(true);
  std::istringstream size_line(line);
  long long nr = -1, nc = -1, nnz = -1;
  if (h.coordinate) {
    if (!(size_line >> nr >> nc >> nnz) || nr < 0 || nc < 0 || nnz < 0)
      detail::mm_fail(path, lineno, "malformed size line");
  } else {
    if (!(size_line >> nr >> nc) || nr < 0 || nc < 0)
      detail::mm_fail(path, lineno, "malformed size line");
  }
  if (h.symmetry != MmSymmetry::general && nr != nc)
    detail::mm_fail(path, lineno, "symmetric storage requires a square matrix");

  std::vector<Triplet<K>> t;
  if (h.coordinate) {
    t.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
      next_data_line(true);
      std::istringstream is(line);
      long long i, j;
      if (!(is >> i >> j)) detail::mm_fail(path, lineno, "expected row and column indices");
      if (i < 1 || i > nr || j < 1 || j > nc)
        detail::mm_fail(path, lineno, format_msg("index (", i, ", ", j, ") outside ", nr, " x ", nc));
      K v = detail::mm_value<K>(path, lineno, is, h.field);
      if (h.symmetry != MmSymmetry::general && j > i)
        detail::mm_fail(path, lineno, "upper-triangle entry in symmetric storage");
      if (h.symmetry == MmSymmetry::skew && i == j)
        detail::mm_fail(path, lineno, "diagonal entry in skew-symmetric storage");
      detail::mm_expand(t, static_cast<index_t>(i - 1), static_cast<index_t>(j - 1), v,
                        h.symmetry);
    }
  } else {
    // Array format stores columns densely: the full matrix for general
    // symmetry, the lower triangle otherwise (diagonal excluded for skew).
    for (long long j = 0; j < nc; ++j) {
      long long i0 = h.symmetry == MmSymmetry::general ? 0 : (h.symmetry == MmSymmetry::skew ? j + 1 : j);
      for (long long i = i0; i < nr; ++i) {
        next_data_line(true);
        std::istringstream is(line);
        K v = detail::mm_value<K>(path, lineno, is, h.field);
        if (v != K{})
          detail::mm_expand(t, static_cast<index_t>(i), static_cast<index_t>(j), v, h.symmetry);
      }
    }
  }
  return SparseMatrix<K>(static_cast<index_t>(nr), static_cast<index_t>(nc), std::move(t),
                         detail::mm_hint(h.symmetry, is_complex_v<K>));
}

/// Writes coordinate/general form with 17 significant digits, which
/// round-trips IEEE doubles exactly.
template <scalar K>
void write_matrix_market(const SparseMatrix<K>& a, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate %s general\n",
               is_complex_v<K> ? "complex" : "real");
  std::fprintf(f, "%d %d %d\n", static_cast<int>(a.rows()), static_cast<int>(a.cols()),
               static_cast<int>(a.nnz()));
  for (index_t r = 0; r < a.rows(); ++r) {
    auto rc = a.row_cols(r);
    auto rv = a.row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      if constexpr (is_complex_v<K>)
        std::fprintf(f, "%d %d %.17g %.17g\n", static_cast<int>(r + 1),
                     static_cast<int>(rc[k] + 1), rv[k].real(), rv[k].imag());
      else
        std::fprintf(f, "%d %d %.17g\n", static_cast<int>(r + 1), static_cast<int>(rc[k] + 1),
                     rv[k]);
    }
  }
  std::fclose(f);
}

// Binary cache, little-endian:
//   bytes 0..3   magic "ADDB"
//   bytes 4..7   format version (u32), currently 1
//   byte  8      scalar kind: 0 real double, 1 complex double
//   byte  9      symmetry hint: 0 general, 1 symmetric, 2 hermitian
//   bytes 10..15 reserved, zero
//   bytes 16..39 rows, cols, nnz as i64
//   then rows+1 i64 row offsets, nnz i32 column indices, nnz scalar values
//   (8 bytes per real, 16 per complex).

inline constexpr char kCacheMagic[4] = {'A', 'D', 'D', 'B'};
inline constexpr std::uint32_t kCacheVersion = 1;

template <scalar K>
void write_binary_cache(const SparseMatrix<K>& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), n); };
  put(kCacheMagic, 4);
  put(&kCacheVersion, 4);
  std::uint8_t kind = is_complex_v<K> ? 1 : 0;
  std::uint8_t hint = a.hint() == SymmetryHint::general ? 0
                      : a.hint() == SymmetryHint::symmetric ? 1
                                                            : 2;
  std::uint8_t zero[6] = {};
  put(&kind, 1);
  put(&hint, 1);
  put(zero, 6);
  std::int64_t dims[3] = {a.rows(), a.cols(), a.nnz()};
  put(dims, sizeof dims);
  std::vector<std::int64_t> off(a.row_offsets().begin(), a.row_offsets().end());
  put(off.data(), off.size() * sizeof(std::int64_t));
  put(a.col_indices().data(), a.col_indices().size() * sizeof(index_t));
  put(a.values().data(), a.values().size() * sizeof(K));
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

template <scalar K>
SparseMatrix<K> read_binary_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), n);
    if (!in) throw std::runtime_error("truncated cache file '" + path + "'");
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kCacheMagic, 4) != 0)
    throw std::runtime_error("'" + path + "' is not a matrix cache file");
  std::uint32_t version;
  get(&version, 4);
  if (version != kCacheVersion)
    throw std::runtime_error(format_msg(path, ": unsupported cache version ", version));
  std::uint8_t kind, hint, reserved[6];
  get(&kind, 1);
  get(&hint, 1);
  get(reserved, 6);
  if (kind != (is_complex_v<K> ? 1 : 0))
    throw std::runtime_error(path + ": cache scalar type does not match the reader");
  std::int64_t dims[3];
  get(dims, sizeof dims);
  std::vector<std::int64_t> off(dims[0] + 1);
  get(off.data(), off.size() * sizeof(std::int64_t));
  std::vector<index_t> cols(dims[2]);
  std::vector<K> vals(dims[2]);
  if (dims[2] > 0) {
    get(cols.data(), cols.size() * sizeof(index_t));
    get(vals.data(), vals.size() * sizeof(K));
  }
  std::vector<Triplet<K>> t;
  t.reserve(dims[2]);
  for (std::int64_t r = 0; r < dims[0]; ++r)
    for (std::int64_t k = off[r]; k < off[r + 1]; ++k)
      t.push_back({static_cast<index_t>(r), cols[k], vals[k]});
  SymmetryHint h = hint == 1 ? SymmetryHint::symmetric
                 : hint == 2 ? SymmetryHint::hermitian
                             : SymmetryHint::general;
  return SparseMatrix<K>(static_cast<index_t>(dims[0]), static_cast<index_t>(dims[1]),
                         std::move(t), h);
}

}  // namespace algdd

#endif  // ALGDD_MATRIX_MARKET_HPP
