#pragma once

// Exact integer linear algebra: Smith normal form, basis extension and
// integer kernels. Everything here works over arbitrary-precision integers.

#include <gmpxx.h>

#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace toric::lattice {

using Integer = mpz_class;

/// Dense row-major integer matrix.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(std::span<const std::vector<long>> rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  Integer& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Integer& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  IntMatrix transpose() const;
  std::vector<Integer> column(std::size_t c) const;
  std::vector<Integer> row(std::size_t r) const;

  void swap_rows(std::size_t a, std::size_t b);
  void swap_cols(std::size_t a, std::size_t b);
  /// row[dst] += factor * row[src]
  void add_row_multiple(std::size_t dst, std::size_t src, const Integer& factor);
  void add_col_multiple(std::size_t dst, std::size_t src, const Integer& factor);
  void negate_row(std::size_t r);

  bool is_zero() const;
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Integer> data_;
};

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
std::ostream& operator<<(std::ostream& os, const IntMatrix& m);

/// Exact determinant (fraction-free Bareiss elimination).
Integer determinant(const IntMatrix& m);
std::size_t rank(const IntMatrix& m);

/// left * A * right = diag(diag), diag[i] | diag[i+1], left/right unimodular.
struct SnfResult {
  IntMatrix left;
  IntMatrix right;
  std::vector<Integer> diag;  // min(rows, cols) entries, zeros trailing

  std::size_t rank() const;
};

/// Pivot rule: smallest nonzero absolute value in the active block, ties
/// broken by row-major position.
SnfResult snf(const IntMatrix& a);

struct BasisExtension {
  bool extends = false;
  std::vector<Integer> invariant_factors;
  std::size_t rank = 0;
};

/// Whether the given covectors extend to a Z-basis of Z^n, i.e. span a
/// primitive sublattice of rank k. Throws std::invalid_argument on mixed
/// dimensions or k > n.
BasisExtension extends_to_lattice_basis(std::span<const std::vector<long>> vectors);
BasisExtension extends_to_lattice_basis(const IntMatrix& rows);

/// Z-basis of {v in Z^d : A v = 0}, returned in row Hermite normal form
/// (positive pivots, entries above pivots reduced into [0, pivot)).
std::vector<std::vector<Integer>> kernel_lattice(const IntMatrix& a);

/// Row Hermite normal form of the row lattice; zero rows dropped.
std::vector<std::vector<Integer>> hermite_rows(std::vector<std::vector<Integer>> rows);

std::string to_string(const Integer& z);
std::vector<long> to_longs(std::span<const Integer> v);

}  // namespace toric::lattice
