#pragma once

#include <vector>

#include "selmer/cubic_field.hpp"
#include "selmer/zmat.hpp"

namespace selmer {

// ---- ideal arithmetic on HNF lattices (integral coords) ----

ZMat ideal_one();
// O-ideal generated by the given elements (integral coordinates).
ZMat ideal_from_gens(const CubicFieldCtx& K, const std::vector<ZVec>& gens);
ZMat principal_ideal(const CubicFieldCtx& K, const ZVec& x);
ZMat ideal_mul(const CubicFieldCtx& K, const ZMat& A, const ZMat& B);
ZMat ideal_pow(const CubicFieldCtx& K, const ZMat& A, int k);
Int ideal_norm(const ZMat& A);
// colon ideal (A : B) = {x in O : x B <= A}; requires it to be integral,
// which holds whenever B divides A (e.g. A = (gamma), gamma in B).
ZMat ideal_colon(const CubicFieldCtx& K, const ZMat& A, const ZMat& B);

// Kernel lattice of an integer matrix (columns span {x : Ax = 0}).
ZMat kernel_integer(const ZMat& A);

// Splitting shape of p in O_L as (f, e) pairs; cheap (no ideals built)
// when p does not divide the index.
std::vector<std::pair<int, int>> splitting_type(const CubicFieldCtx& K,
                                                const Int& p);

// ---- valuations and residues ----

// v_P of a nonzero element given by integral coordinates.
int valuation_int_elem(const CubicFieldCtx& K, const ZVec& x, const PrimeIdeal& P);
// v_P of a nonzero field element (handles denominators).
int valuation(const CubicFieldCtx& K, const FE& x, const PrimeIdeal& P);
// v_P of a nonzero integral ideal.
int ideal_valuation(const CubicFieldCtx& K, const ZMat& A, const PrimeIdeal& P);

// beta with beta = x * pi^{-v_P(x)} mod P^m (x integral, nonzero).
ZVec unit_part(const CubicFieldCtx& K, const ZVec& x, const PrimeIdeal& P, int m);

// Quadratic residue symbol of the unit part of x at an odd prime P:
// +1 iff x pi^{-v_P(x)} is a square in the residue field.
int odd_symbol(const CubicFieldCtx& K, const FE& x, const PrimeIdeal& P);

// Simultaneous congruences x = r_i mod M_i for pairwise coprime ideal
// moduli; returns the canonical representative mod the product.
ZVec crt_elements(const CubicFieldCtx& K,
                  const std::vector<std::pair<ZMat, ZVec>>& congruences);

}  // namespace selmer
