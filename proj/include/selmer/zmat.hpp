#pragma once

#include <optional>
#include <vector>

#include "selmer/intmath.hpp"

namespace selmer {

// Small dense integer matrices, row-major: M[i][j] = entry (row i, col j).
using ZMat = std::vector<std::vector<Int>>;
using ZVec = std::vector<Int>;

ZMat zmat(size_t rows, size_t cols);
ZMat identity_mat(size_t n);
ZMat mat_mul(const ZMat& A, const ZMat& B);
ZVec mat_vec(const ZMat& A, const ZVec& v);

// Column-style Hermite normal form of the lattice spanned by the columns of
// A (rank must equal the row count).  Result H is square lower triangular
// with H[i][i] > 0 and 0 <= H[i][j] < H[i][i] for j < i; unique per lattice.
ZMat hnf_lattice(const ZMat& A);

// As above but also return U with A*U = [H | 0] (U unimodular, cols(A) wide).
ZMat hnf_lattice(const ZMat& A, ZMat* U);

// Lattice index = product of HNF diagonal.
Int lattice_index(const ZMat& H);

// Is v in the lattice with (lower-triangular) HNF basis H?
bool in_lattice(const ZMat& H, const ZVec& v);

// v mod the lattice H: canonical representative with 0 <= r_i < H[i][i]
// after triangular reduction.
ZVec reduce_mod_lattice(const ZMat& H, const ZVec& v);

// Some integer solution x of A x = b, if one exists.
std::optional<ZVec> solve_integer(const ZMat& A, const ZVec& b);

// Rational solve A x = b for square nonsingular A.
std::vector<Rat> solve_rational(const std::vector<std::vector<Rat>>& A,
                                const std::vector<Rat>& b);

Rat rat_det(std::vector<std::vector<Rat>> A);

}  // namespace selmer
