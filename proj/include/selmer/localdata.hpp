#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "selmer/cubic_field.hpp"
#include "selmer/f2.hpp"
#include "selmer/ideals.hpp"

namespace selmer {

struct NonUnitArgument : std::domain_error {
  using std::domain_error::domain_error;
};

// Square-class machinery of L_p = prod_{P|p} L_P: fixed bit layouts, the
// restriction map from global elements, and the local H^1 = norm-kernel
// subspaces.  Layout at a finite p: one block per prime P above p, in the
// deterministic prime order, each block being
//   [valuation parity, unit-class bits]
// with 1 unit bit at an odd P (residue symbol) and d+1 unit bits at an even
// P of local degree d = e*f (class in U_P/U_P^2).  At the real place: r1
// sign bits.
class LocalData {
 public:
  explicit LocalData(CtxPtr K);

  const CubicFieldCtx& field() const { return *K_; }

  struct Block {
    PrimeIdeal P;
    int unit_dim;  // 1 at odd P; d+1 at even P
    int width() const { return 1 + unit_dim; }
  };
  const std::vector<Block>& blocks(const Int& p) const;
  size_t width(const Int& p) const;

  // class of a nonzero alpha in ⊕_{P|p} L_P*/(L_P*)^2
  F2Vec restriction_vector(const FE& alpha, const Int& p) const;
  // sign bits at the real embeddings
  F2Vec restriction_infinity(const FE& alpha) const;

  // class of an integral u with v_P(u) = 0 in U_P/U_P^2 (P even); d+1 bits
  F2Vec even_unit_class(const ZVec& u, const PrimeIdeal& P) const;

  // (dim H^1(Q_p, E[2]), dim Im delta_p)
  std::pair<int, int> local_h1_dims(const Int& p) const;
  std::pair<int, int> local_h1_dims_infinity() const;

  // F2 basis of H^1(Q_p, E[2]) = ker(norm) inside the local bit space
  const std::vector<F2Vec>& local_h1_subspace(const Int& p) const;
  // same at the real place: sign vectors with trivial product (empty if
  // the field is not totally real)
  const std::vector<F2Vec>& local_h1_subspace_infinity() const;

  // norm-class bits of a nonzero rational in Q_p*/(Q_p*)^2:
  // odd p: [v_p parity, unit residue symbol]; p = 2: [v_2 parity,
  // unit = -1-part, unit = 5-part] (u = (-1)^s 5^t mod 8)
  F2Vec rational_class(const Rat& x, const Int& p) const;

 private:
  CtxPtr K_;
  mutable std::mutex mu_;

  struct EvenBasis {
    int m = 0;      // precision exponent: squares detected mod P^m, m = 2e+1
    ZMat modulus;   // HNF of P^m
    int dim = 0;    // d+1
    std::vector<ZVec> basis_res;  // residues generating U_P/U_P^2
    std::map<ZVec, F2Vec> table;  // canonical residue -> class bits
  };
  const EvenBasis& even_basis_locked(const PrimeIdeal& P) const;

  mutable std::map<ZMat, EvenBasis> even_cache_;
  mutable std::map<Int, std::vector<Block>> block_cache_;
  mutable std::map<Int, std::vector<F2Vec>> h1_cache_;
  mutable std::optional<std::vector<F2Vec>> h1_inf_;
};

}  // namespace selmer
