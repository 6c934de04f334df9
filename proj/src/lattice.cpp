#include "toric/lattice.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace toric::lattice {

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Integer(0)) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("IntMatrix: ragged initializer");
    for (long v : r) data_.emplace_back(v);
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(std::span<const std::vector<long>> rows, std::size_t cols) {
  IntMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw std::invalid_argument("IntMatrix: row length mismatch");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::vector<Integer> IntMatrix::column(std::size_t c) const {
  std::vector<Integer> v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

std::vector<Integer> IntMatrix::row(std::size_t r) const {
  return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
          data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, a), (*this)(r, b));
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src, const Integer& factor) {
  if (factor == 0) return;
  for (std::size_t c = 0; c < cols_; ++c) (*this)(dst, c) += factor * (*this)(src, c);
}

void IntMatrix::add_col_multiple(std::size_t dst, std::size_t src, const Integer& factor) {
  if (factor == 0) return;
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, dst) += factor * (*this)(r, src);
}

void IntMatrix::negate_row(std::size_t r) {
  for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = -(*this)(r, c);
}

bool IntMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Integer& z) { return z == 0; });
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("IntMatrix: shape mismatch in product");
  IntMatrix p(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) p(i, j) += a(i, k) * b(k, j);
    }
  return p;
}

std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
  os << '[';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    os << (r ? ",[" : "[");
    for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
    os << ']';
  }
  return os << ']';
}

Integer determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix not square");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  Integer sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.swap_rows(k, p);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer v = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        a(i, j) = v;
      }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

std::size_t rank(const IntMatrix& m) { return snf(m).rank(); }

std::size_t SnfResult::rank() const {
  return static_cast<std::size_t>(
      std::count_if(diag.begin(), diag.end(), [](const Integer& z) { return z != 0; }));
}

namespace {

struct Pos {
  std::size_t r, c;
};

// Smallest nonzero |entry| in the block [t.., t..], first in row-major order.
std::optional<Pos> find_pivot(const IntMatrix& d, std::size_t t) {
  std::optional<Pos> best;
  Integer best_abs;
  for (std::size_t r = t; r < d.rows(); ++r)
    for (std::size_t c = t; c < d.cols(); ++c) {
      if (d(r, c) == 0) continue;
      Integer a = abs(d(r, c));
      if (!best || a < best_abs) {
        best = Pos{r, c};
        best_abs = a;
      }
    }
  return best;
}

}  // namespace

SnfResult snf(const IntMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  IntMatrix d = a;
  IntMatrix left = IntMatrix::identity(m);
  IntMatrix right = IntMatrix::identity(n);

  auto bring_to = [&](std::size_t t, Pos p) {
    d.swap_rows(t, p.r);
    left.swap_rows(t, p.r);
    d.swap_cols(t, p.c);
    right.swap_cols(t, p.c);
  };

  const std::size_t steps = std::min(m, n);
  for (std::size_t t = 0; t < steps; ++t) {
    auto p = find_pivot(d, t);
    if (!p) break;
    bring_to(t, *p);

    for (;;) {
      bool clean = true;
      const Integer piv = d(t, t);
      for (std::size_t i = t + 1; i < m; ++i) {
        if (d(i, t) == 0) continue;
        Integer q = d(i, t) / piv;  // truncating; remainder has |r| < |piv|
        d.add_row_multiple(i, t, -q);
        left.add_row_multiple(i, t, -q);
        if (d(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (d(t, j) == 0) continue;
        Integer q = d(t, j) / piv;
        d.add_col_multiple(j, t, -q);
        right.add_col_multiple(j, t, -q);
        if (d(t, j) != 0) clean = false;
      }
      if (!clean) {
        bring_to(t, *find_pivot(d, t));
        continue;
      }
      // Row and column t are clear; enforce divisibility on the rest.
      std::optional<std::size_t> bad_row;
      for (std::size_t i = t + 1; i < m && !bad_row; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (d(i, j) % piv != 0) {
            bad_row = i;
            break;
          }
      if (!bad_row) break;
      d.add_row_multiple(t, *bad_row, 1);
      left.add_row_multiple(t, *bad_row, 1);
    }
    if (d(t, t) < 0) {
      d.negate_row(t);
      left.negate_row(t);
    }
  }

  SnfResult out{std::move(left), std::move(right), {}};
  out.diag.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) out.diag.push_back(d(i, i));
  return out;
}

BasisExtension extends_to_lattice_basis(const IntMatrix& rows) {
  if (rows.rows() > rows.cols() && rows.cols() > 0)
    throw std::invalid_argument("extends_to_lattice_basis: more vectors than the dimension");
  BasisExtension out;
  if (rows.rows() == 0) {
    out.extends = true;
    return out;
  }
  SnfResult s = snf(rows);
  out.invariant_factors = s.diag;
  out.rank = s.rank();
  out.extends = out.rank == rows.rows() &&
                std::all_of(s.diag.begin(), s.diag.end(), [](const Integer& z) { return z == 1; });
  return out;
}

BasisExtension extends_to_lattice_basis(std::span<const std::vector<long>> vectors) {
  if (vectors.empty()) return extends_to_lattice_basis(IntMatrix{});
  const std::size_t n = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != n) throw std::invalid_argument("extends_to_lattice_basis: dimension mismatch");
  return extends_to_lattice_basis(IntMatrix::from_rows(vectors, n));
}

std::vector<std::vector<Integer>> hermite_rows(std::vector<std::vector<Integer>> rows) {
  if (rows.empty()) return rows;
  const std::size_t n = rows.front().size();
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < n && pivot_row < rows.size(); ++c) {
    // Euclid on column c over rows [pivot_row, end) until one nonzero remains.
    for (;;) {
      std::optional<std::size_t> best;
      for (std::size_t r = pivot_row; r < rows.size(); ++r)
        if (rows[r][c] != 0 && (!best || abs(rows[r][c]) < abs(rows[*best][c]))) best = r;
      if (!best) break;
      std::swap(rows[pivot_row], rows[*best]);
      bool others = false;
      for (std::size_t r = pivot_row + 1; r < rows.size(); ++r) {
        if (rows[r][c] == 0) continue;
        Integer q = rows[r][c] / rows[pivot_row][c];
        for (std::size_t k = 0; k < n; ++k) rows[r][k] -= q * rows[pivot_row][k];
        if (rows[r][c] != 0) others = true;
      }
      if (!others) break;
    }
    if (rows[pivot_row][c] == 0) continue;
    if (rows[pivot_row][c] < 0)
      for (auto& z : rows[pivot_row]) z = -z;
    const Integer& p = rows[pivot_row][c];
    for (std::size_t r = 0; r < pivot_row; ++r) {
      Integer q;
      mpz_fdiv_q(q.get_mpz_t(), rows[r][c].get_mpz_t(), p.get_mpz_t());
      if (q != 0)
        for (std::size_t k = 0; k < n; ++k) rows[r][k] -= q * rows[pivot_row][k];
    }
    ++pivot_row;
  }
  rows.resize(pivot_row);
  return rows;
}

std::vector<std::vector<Integer>> kernel_lattice(const IntMatrix& a) {
  const std::size_t d = a.cols();
  if (d == 0) return {};
  if (a.rows() == 0) {
    std::vector<std::vector<Integer>> basis(d, std::vector<Integer>(d, 0));
    for (std::size_t i = 0; i < d; ++i) basis[i][i] = 1;
    return basis;
  }
  SnfResult s = snf(a);
  std::vector<std::vector<Integer>> basis;
  for (std::size_t j = s.rank(); j < d; ++j) basis.push_back(s.right.column(j));
  return hermite_rows(std::move(basis));
}

std::string to_string(const Integer& z) { return z.get_str(); }

std::vector<long> to_longs(std::span<const Integer> v) {
  std::vector<long> out;
  out.reserve(v.size());
  for (const auto& z : v) {
    if (!z.fits_slong_p()) throw std::overflow_error("integer does not fit in long");
    out.push_back(z.get_si());
  }
  return out;
}

}  // namespace toric::lattice
