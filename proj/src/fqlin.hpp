#pragma once

// Dense linear algebra over F_p for tiny systems (dimension <= 12 or so).

#include "selmer/intmath.hpp"
#include "selmer/zmat.hpp"

namespace selmer::fqlin {

inline Int mod_nonneg(const Int& x, const Int& q) {
  Int r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), q.get_mpz_t());
  return r;
}

// Kernel of an n x m matrix over F_q, as F_q column vectors (entries in
// [0, q)).  Deterministic basis (one vector per free column, ascending).
inline std::vector<ZVec> fq_kernel(ZMat M, size_t m, const Int& q) {
  size_t n = M.size();
  std::vector<size_t> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t piv = n;
    for (size_t i = r; i < n; ++i)
      if (mod_nonneg(M[i][c], q) != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    std::swap(M[r], M[piv]);
    Int inv = invmod(mod_nonneg(M[r][c], q), q);
    for (size_t j = c; j < m; ++j) M[r][j] = mod_nonneg(M[r][j] * inv, q);
    for (size_t i = 0; i < n; ++i) {
      if (i == r) continue;
      Int f = mod_nonneg(M[i][c], q);
      if (f == 0) continue;
      for (size_t j = c; j < m; ++j)
        M[i][j] = mod_nonneg(M[i][j] - f * M[r][j], q);
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<bool> is_piv(m, false);
  for (size_t c : pivot_col) is_piv[c] = true;
  std::vector<ZVec> ker;
  for (size_t c = 0; c < m; ++c) {
    if (is_piv[c]) continue;
    ZVec v(m, 0);
    v[c] = 1;
    for (size_t k = 0; k < pivot_col.size(); ++k)
      v[pivot_col[k]] = mod_nonneg(-M[k][c], q);
    ker.push_back(v);
  }
  return ker;
}

// Solve M x = b over F_q; nullopt if inconsistent.
inline std::optional<ZVec> fq_solve(ZMat M, ZVec b, const Int& q) {
  size_t n = M.size(), m = M[0].size();
  std::vector<size_t> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t piv = n;
    for (size_t i = r; i < n; ++i)
      if (mod_nonneg(M[i][c], q) != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    std::swap(M[r], M[piv]);
    std::swap(b[r], b[piv]);
    Int inv = invmod(mod_nonneg(M[r][c], q), q);
    for (size_t j = c; j < m; ++j) M[r][j] = mod_nonneg(M[r][j] * inv, q);
    b[r] = mod_nonneg(b[r] * inv, q);
    for (size_t i = 0; i < n; ++i) {
      if (i == r) continue;
      Int f = mod_nonneg(M[i][c], q);
      if (f == 0) continue;
      for (size_t j = c; j < m; ++j)
        M[i][j] = mod_nonneg(M[i][j] - f * M[r][j], q);
      b[i] = mod_nonneg(b[i] - f * b[r], q);
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (size_t i = r; i < n; ++i)
    if (mod_nonneg(b[i], q) != 0) return std::nullopt;
  ZVec x(m, 0);
  for (size_t k = 0; k < pivot_col.size(); ++k) x[pivot_col[k]] = b[k];
  return x;
}

// Rank over F_q.
inline size_t fq_rank(ZMat M, const Int& q) {
  if (M.empty()) return 0;
  size_t m = M[0].size();
  return m - fq_kernel(std::move(M), m, q).size();
}

}  // namespace selmer::fqlin
