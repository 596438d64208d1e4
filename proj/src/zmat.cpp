#include "selmer/zmat.hpp"

#include <stdexcept>

namespace selmer {

ZMat zmat(size_t rows, size_t cols) {
  return ZMat(rows, ZVec(cols, 0));
}

ZMat identity_mat(size_t n) {
  ZMat I = zmat(n, n);
  for (size_t i = 0; i < n; ++i) I[i][i] = 1;
  return I;
}

ZMat mat_mul(const ZMat& A, const ZMat& B) {
  size_t n = A.size(), m = B[0].size(), k = B.size();
  ZMat C = zmat(n, m);
  for (size_t i = 0; i < n; ++i)
    for (size_t l = 0; l < k; ++l) {
      if (A[i][l] == 0) continue;
      for (size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
    }
  return C;
}

ZVec mat_vec(const ZMat& A, const ZVec& v) {
  ZVec r(A.size(), 0);
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) r[i] += A[i][j] * v[j];
  return r;
}

namespace {

void col_addmul(ZMat& M, ZMat* U, size_t dst, size_t src, const Int& c) {
  for (auto& row : M) row[dst] += c * row[src];
  if (U)
    for (auto& row : *U) row[dst] += c * row[src];
}

void col_swap(ZMat& M, ZMat* U, size_t a, size_t b) {
  for (auto& row : M) std::swap(row[a], row[b]);
  if (U)
    for (auto& row : *U) std::swap(row[a], row[b]);
}

void col_neg(ZMat& M, ZMat* U, size_t a) {
  for (auto& row : M) row[a] = -row[a];
  if (U)
    for (auto& row : *U) row[a] = -row[a];
}

}  // namespace

ZMat hnf_lattice(const ZMat& A0, ZMat* U) {
  ZMat M = A0;
  size_t rows = M.size(), cols = M[0].size();
  if (U) *U = identity_mat(cols);
  size_t pc = 0;  // next pivot column
  for (size_t r = 0; r < rows; ++r) {
    // gcd-eliminate row r over columns pc..cols-1
    while (true) {
      // find column with smallest nonzero |entry| at row r
      size_t best = cols;
      for (size_t j = pc; j < cols; ++j)
        if (M[r][j] != 0 && (best == cols || abs(M[r][j]) < abs(M[r][best])))
          best = j;
      if (best == cols) throw std::domain_error("hnf_lattice: rank deficient");
      if (best != pc) col_swap(M, U, pc, best);
      if (M[r][pc] < 0) col_neg(M, U, pc);
      bool clean = true;
      for (size_t j = pc + 1; j < cols; ++j)
        if (M[r][j] != 0) {
          Int q = M[r][j] / M[r][pc];
          // floor division so remainders land in [0, pivot)
          if (M[r][j] - q * M[r][pc] < 0) q -= 1;
          col_addmul(M, U, j, pc, -q);
          if (M[r][j] != 0) clean = false;
        }
      if (clean) break;
    }
    // reduce earlier pivot columns at row r
    for (size_t j = 0; j < pc; ++j) {
      Int q = M[r][j] / M[r][pc];
      if (M[r][j] - q * M[r][pc] < 0) q -= 1;
      col_addmul(M, U, j, pc, -q);
    }
    ++pc;
  }
  // result: first `rows` columns form the HNF basis
  ZMat H = zmat(rows, rows);
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < rows; ++j) H[i][j] = M[i][j];
  return H;
}

ZMat hnf_lattice(const ZMat& A) { return hnf_lattice(A, nullptr); }

Int lattice_index(const ZMat& H) {
  Int d = 1;
  for (size_t i = 0; i < H.size(); ++i) d *= H[i][i];
  return d;
}

bool in_lattice(const ZMat& H, const ZVec& v) {
  ZVec w = v;
  size_t n = H.size();
  for (size_t i = 0; i < n; ++i) {
    if (!mpz_divisible_p(w[i].get_mpz_t(), H[i][i].get_mpz_t())) return false;
    Int c = w[i] / H[i][i];
    for (size_t k = i; k < n; ++k) w[k] -= c * H[k][i];
  }
  return true;
}

ZVec reduce_mod_lattice(const ZMat& H, const ZVec& v) {
  ZVec w = v;
  size_t n = H.size();
  for (size_t i = 0; i < n; ++i) {
    Int q = w[i] / H[i][i];
    if (w[i] - q * H[i][i] < 0) q -= 1;
    for (size_t k = i; k < n; ++k) w[k] -= q * H[k][i];
  }
  return w;
}

std::optional<ZVec> solve_integer(const ZMat& A, const ZVec& b) {
  size_t rows = A.size(), cols = A[0].size();
  // Column HNF ignoring possible rank deficiency: eliminate greedily.
  ZMat M = A;
  ZMat U = identity_mat(cols);
  size_t pc = 0;
  std::vector<size_t> pivot_row;
  for (size_t r = 0; r < rows && pc < cols; ++r) {
    bool any = false;
    for (size_t j = pc; j < cols; ++j)
      if (M[r][j] != 0) any = true;
    if (!any) continue;
    while (true) {
      size_t best = cols;
      for (size_t j = pc; j < cols; ++j)
        if (M[r][j] != 0 && (best == cols || abs(M[r][j]) < abs(M[r][best])))
          best = j;
      if (best != pc) col_swap(M, &U, pc, best);
      if (M[r][pc] < 0) col_neg(M, &U, pc);
      bool clean = true;
      for (size_t j = pc + 1; j < cols; ++j)
        if (M[r][j] != 0) {
          Int q = M[r][j] / M[r][pc];
          if (M[r][j] - q * M[r][pc] < 0) q -= 1;
          col_addmul(M, &U, j, pc, -q);
          if (M[r][j] != 0) clean = false;
        }
      if (clean) break;
    }
    pivot_row.push_back(r);
    ++pc;
  }
  // forward substitution: M y = b with y supported on pivot columns
  ZVec w = b;
  ZVec y(cols, 0);
  for (size_t k = 0; k < pivot_row.size(); ++k) {
    size_t r = pivot_row[k];
    if (!mpz_divisible_p(w[r].get_mpz_t(), M[r][k].get_mpz_t()))
      return std::nullopt;
    Int c = w[r] / M[r][k];
    y[k] = c;
    for (size_t i = 0; i < rows; ++i) w[i] -= c * M[i][k];
  }
  for (size_t i = 0; i < rows; ++i)
    if (w[i] != 0) return std::nullopt;
  return mat_vec(U, y);
}

std::vector<Rat> solve_rational(const std::vector<std::vector<Rat>>& A0,
                                const std::vector<Rat>& b0) {
  auto A = A0;
  auto b = b0;
  size_t n = A.size();
  for (size_t i = 0; i < n; ++i) {
    size_t piv = i;
    while (piv < n && A[piv][i] == 0) ++piv;
    if (piv == n) throw std::domain_error("solve_rational: singular");
    std::swap(A[i], A[piv]);
    std::swap(b[i], b[piv]);
    for (size_t k = 0; k < n; ++k) {
      if (k == i || A[k][i] == 0) continue;
      Rat c = A[k][i] / A[i][i];
      for (size_t j = i; j < n; ++j) A[k][j] -= c * A[i][j];
      b[k] -= c * b[i];
    }
  }
  std::vector<Rat> x(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = b[i] / A[i][i];
    x[i].canonicalize();
  }
  return x;
}

Rat rat_det(std::vector<std::vector<Rat>> A) {
  size_t n = A.size();
  Rat det = 1;
  for (size_t i = 0; i < n; ++i) {
    size_t piv = i;
    while (piv < n && A[piv][i] == 0) ++piv;
    if (piv == n) return Rat(0);
    if (piv != i) {
      std::swap(A[i], A[piv]);
      det = -det;
    }
    det *= A[i][i];
    for (size_t k = i + 1; k < n; ++k) {
      if (A[k][i] == 0) continue;
      Rat c = A[k][i] / A[i][i];
      for (size_t j = i; j < n; ++j) A[k][j] -= c * A[i][j];
    }
  }
  det.canonicalize();
  return det;
}

}  // namespace selmer
