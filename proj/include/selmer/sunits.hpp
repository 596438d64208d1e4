#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "selmer/cubic_field.hpp"
#include "selmer/f2.hpp"
#include "selmer/ideals.hpp"
#include "selmer/lattice.hpp"

namespace selmer {

struct DimensionMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

struct UnitGroup {
  // 2-saturated generators of a finite odd-index subgroup of O*/{±1};
  // together with -1 they represent O*/(O*)^2.
  std::vector<FE> gens;
  int rank = 0;  // r1 + r2 - 1
};

struct ClassGroupData {
  // one integral ideal per class; reps[0] = O_L
  std::vector<ZMat> reps;
  // composition: cls[i] * cls[j] = cls[mul[i][j]]
  std::vector<std::vector<int>> mul;
  int two_rank = 0;
  // indices into reps forming an F2 basis of Cl[2]
  std::vector<int> two_torsion_basis;
  Int minkowski;  // element-norm bound certifying class representatives
};

// One basis element of L(S,2): a field element together with its exact
// valuations at the S-primes and the square class of its norm.
struct SquareClassVector {
  FE alpha;
  std::vector<int> s_exponents;  // v_P(alpha), aligned with SelmerBasisS::s_primes
  Rat norm_class;                // squarefree part of N(alpha)
};

struct SelmerBasisS {
  std::vector<Int> s_finite;         // finite members of S: 2 first, odd ascending
  std::vector<PrimeIdeal> s_primes;  // all P above s_finite, deterministic order
  std::vector<SquareClassVector> basis;
  size_t dim() const { return basis.size(); }
};

// Heavy per-field invariants (units, class group, S-square-class groups),
// computed lazily and cached; immutable field context shared by reference.
class FieldInvariants {
 public:
  explicit FieldInvariants(CtxPtr K);

  const CubicFieldCtx& field() const { return *K_; }
  CtxPtr field_ptr() const { return K_; }

  // {-1} ∪ 2-saturated fundamental-unit generators; count = 1 + unit rank
  std::vector<FE> unit_square_basis() const;
  const UnitGroup& units() const;

  const ClassGroupData& class_group_2part() const;

  // Exact principality oracle: a generator if A is principal, nullopt if not.
  std::optional<FE> principal_generator(const ZMat& A) const;
  // Index of [A] among class_group reps.
  int class_index(const ZMat& A) const;

  // Basis of L(S,2) = {alpha : v_P(alpha) even for all P outside S};
  // S given by its finite members (must contain 2), infinity implied.
  SelmerBasisS s2_group_basis(const std::vector<Int>& s_finite) const;

  // Kernel of the norm map L(S,2) -> Q(S,2): basis elements have square
  // rational norm.  Dimension is checked against
  // (1 + eps) + sum_q (n_q - 1) + dim Cl_S[2]; DimensionMismatch otherwise.
  SelmerBasisS h1_global(const std::vector<Int>& s_finite) const;

  // 2-rank of the S-class group Cl(L) / <classes of primes above S>.
  int cl_s_two_rank(const std::vector<Int>& s_finite) const;

  // F2 coordinates of alpha's square class with respect to B's basis, or
  // nullopt when the class is outside the span.  Exact: a claimed relation
  // is certified by an algebraic square root.
  std::optional<F2Vec> express(const SelmerBasisS& B, const FE& alpha) const;

 private:
  CtxPtr K_;
  mutable std::mutex mu_;
  mutable std::optional<UnitGroup> units_;
  mutable std::optional<ClassGroupData> cl_;
  mutable std::map<std::vector<Int>, SelmerBasisS> s2_cache_, h1_cache_;

  const UnitGroup& units_locked() const;
  const ClassGroupData& cl_locked() const;
  std::optional<FE> small_generator_locked(const ZMat& C) const;
  std::optional<FE> principal_generator_locked(const ZMat& A) const;
  int class_index_locked(const ZMat& A) const;
  SelmerBasisS s2_locked(const std::vector<Int>& s_finite) const;
};

}  // namespace selmer
