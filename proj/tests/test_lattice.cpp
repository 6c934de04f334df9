#include <doctest.h>

#include "toric/lattice.hpp"

#include <functional>
#include <numeric>
#include <random>

using namespace toric::lattice;

namespace {

// Determinantal divisors: D_k = gcd of all k x k minors. The invariant
// factors are D_k / D_{k-1}; this is independent of any elimination order.
void minors(const IntMatrix& a, std::size_t k, std::vector<std::size_t>& rows, std::size_t r0,
            Integer& g) {
  if (rows.size() == k) {
    std::vector<std::size_t> cols;
    std::function<void(std::size_t)> rec = [&](std::size_t c0) {
      if (cols.size() == k) {
        IntMatrix sub(k, k);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) sub(i, j) = a(rows[i], cols[j]);
        Integer d = determinant(sub);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
        return;
      }
      for (std::size_t c = c0; c < a.cols(); ++c) {
        cols.push_back(c);
        rec(c + 1);
        cols.pop_back();
      }
    };
    rec(0);
    return;
  }
  for (std::size_t r = r0; r < a.rows(); ++r) {
    rows.push_back(r);
    minors(a, k, rows, r + 1, g);
    rows.pop_back();
  }
}

std::vector<Integer> invariant_factor_oracle(const IntMatrix& a) {
  std::vector<Integer> out;
  Integer prev = 1;
  for (std::size_t k = 1; k <= std::min(a.rows(), a.cols()); ++k) {
    Integer g = 0;
    std::vector<std::size_t> rows;
    minors(a, k, rows, 0, g);
    if (g == 0) {
      out.push_back(0);
      prev = 0;
      continue;
    }
    out.push_back(prev == 0 ? Integer(0) : Integer(g / prev));
    prev = g;
  }
  return out;
}

long small_det(const std::vector<std::vector<long>>& v) {
  if (v.size() == 1) return v[0][0];
  if (v.size() == 2) return v[0][0] * v[1][1] - v[0][1] * v[1][0];
  return v[0][0] * (v[1][1] * v[2][2] - v[1][2] * v[2][1]) - v[0][1] * (v[1][0] * v[2][2] - v[1][2] * v[2][0]) +
         v[0][2] * (v[1][0] * v[2][1] - v[1][1] * v[2][0]);
}

// Completes V to a unimodular n x n matrix by searching the remaining rows
// among vectors with entries in [-3, 3].
bool completion_oracle(std::vector<std::vector<long>> v, std::size_t n) {
  if (v.size() == n) return std::labs(small_det(v)) == 1;
  std::vector<long> w(n, -3);
  for (;;) {
    auto trial = v;
    trial.push_back(w);
    if (completion_oracle(trial, n)) return true;
    std::size_t i = 0;
    while (i < n && ++w[i] > 3) w[i++] = -3;
    if (i == n) return false;
  }
}

void check_snf(const IntMatrix& a) {
  SnfResult s = snf(a);
  IntMatrix d = s.left * a * s.right;
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (i == j) CHECK(d(i, j) == s.diag[i]);
      else CHECK(d(i, j) == 0);
    }
  CHECK(abs(determinant(s.left)) == 1);
  CHECK(abs(determinant(s.right)) == 1);
  for (std::size_t i = 0; i + 1 < s.diag.size(); ++i) {
    CHECK(s.diag[i] >= 0);
    if (s.diag[i] != 0) CHECK(s.diag[i + 1] % s.diag[i] == 0);
    else CHECK(s.diag[i + 1] == 0);
  }
  CHECK(s.diag == invariant_factor_oracle(a));
}

}  // namespace

TEST_CASE("snf examples") {
  CHECK(snf(IntMatrix::identity(2)).diag == std::vector<Integer>{1, 1});
  IntMatrix a{{2, 4}, {6, 8}};
  CHECK(snf(a).diag == std::vector<Integer>{2, 4});
  CHECK(invariant_factor_oracle(a) == std::vector<Integer>{2, 4});
  CHECK(snf(IntMatrix{{2, 1}}).diag == std::vector<Integer>{1});
  CHECK(snf(IntMatrix{}).diag.empty());
  check_snf(a);
}

TEST_CASE("snf is deterministic") {
  IntMatrix a{{4, 6, 10}, {6, 9, 15}, {2, 7, 1}};
  SnfResult s1 = snf(a), s2 = snf(a);
  CHECK(s1.left == s2.left);
  CHECK(s1.right == s2.right);
}

TEST_CASE("snf invariants on random matrices") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> ent(-9, 9), dim(1, 4);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t m = static_cast<std::size_t>(dim(rng)), n = static_cast<std::size_t>(dim(rng));
    IntMatrix a(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = trial % 5 == 0 ? 3 * ent(rng) : ent(rng);
    check_snf(a);
  }
}

TEST_CASE("snf survives pivot growth") {
  IntMatrix a{{1000000007L, 998244353L, 123456789L},
              {987654321L, 1000000009L, 555555555L},
              {314159265L, 271828182L, 161803398L}};
  check_snf(a);
}

TEST_CASE("basis extension examples") {
  std::vector<std::vector<long>> e1{{1, 0}};
  CHECK(extends_to_lattice_basis(e1).extends);
  std::vector<std::vector<long>> bad{{0, -1}, {2, 1}};
  auto r = extends_to_lattice_basis(bad);
  CHECK_FALSE(r.extends);
  CHECK(r.invariant_factors == std::vector<Integer>{1, 2});
  std::vector<std::vector<long>> neg{{-1, 0}, {0, -1}};
  CHECK(extends_to_lattice_basis(neg).extends);
  std::vector<std::vector<long>> ragged{{1, 0}, {1}};
  CHECK_THROWS_AS(extends_to_lattice_basis(ragged), std::invalid_argument);
  std::vector<std::vector<long>> many{{1, 0}, {0, 1}, {1, 1}};
  CHECK_THROWS_AS(extends_to_lattice_basis(many), std::invalid_argument);
  std::vector<std::vector<long>> dependent{{1, 2}, {2, 4}};
  CHECK_FALSE(extends_to_lattice_basis(dependent).extends);
}

TEST_CASE("basis extension agrees with brute-force completion") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<long> ent(-3, 3);
  int agree = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = trial % 2 ? 3 : 2;
    std::vector<std::vector<long>> pool(4, std::vector<long>(n));
    for (auto& v : pool)
      for (auto& x : v) x = ent(rng);
    for (unsigned mask = 1; mask < 16; ++mask) {
      std::vector<std::vector<long>> sub;
      for (unsigned i = 0; i < 4; ++i)
        if (mask & (1u << i)) sub.push_back(pool[i]);
      if (sub.size() > n || sub.size() > 3) continue;
      const bool fast = extends_to_lattice_basis(sub).extends;
      const bool slow = completion_oracle(sub, n);
      CHECK(fast == slow);
      agree += fast == slow;
    }
  }
  CHECK(agree > 0);
}

TEST_CASE("kernel lattice examples") {
  IntMatrix square{{-1, 0, 1, 0}, {0, -1, 0, 1}};
  auto k = kernel_lattice(square);
  REQUIRE(k.size() == 2);
  CHECK(k[0] == std::vector<Integer>{1, 0, 1, 0});
  CHECK(k[1] == std::vector<Integer>{0, 1, 0, 1});
  CHECK(kernel_lattice(IntMatrix::identity(3)).empty());
  IntMatrix simplex{{-1, 0, 1}, {0, -1, 1}};
  CHECK(kernel_lattice(simplex) == std::vector<std::vector<Integer>>{{1, 1, 1}});
  IntMatrix interval{{-1, 1}};
  CHECK(kernel_lattice(interval) == std::vector<std::vector<Integer>>{{1, 1}});
}

TEST_CASE("kernel lattice properties on random maps") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> ent(-4, 4);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 3), d = n + 1 + static_cast<std::size_t>(trial % 2);
    IntMatrix a(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) a(i, j) = ent(rng);
    auto basis = kernel_lattice(a);
    for (const auto& v : basis) {
      IntMatrix col(d, 1);
      for (std::size_t j = 0; j < d; ++j) col(j, 0) = v[j];
      CHECK((a * col).is_zero());
    }
    CHECK(basis.size() + rank(a) == d);
    // Saturation: the kernel basis extends to a basis of Z^d.
    if (!basis.empty()) {
      IntMatrix b(basis.size(), d);
      for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) b(i, j) = basis[i][j];
      CHECK(invariant_factor_oracle(b) == std::vector<Integer>(basis.size(), 1));
    }
  }
}

TEST_CASE("determinant") {
  CHECK(determinant(IntMatrix{{2, 1}, {7, 4}}) == 1);
  CHECK(determinant(IntMatrix{{0, 1}, {1, 0}}) == -1);
  CHECK(determinant(IntMatrix{{1, 2, 3}, {4, 5, 6}, {7, 8, 10}}) == -3);
}
