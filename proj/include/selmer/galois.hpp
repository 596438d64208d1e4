#pragma once

#include <string>
#include <vector>

#include "selmer/cubic_field.hpp"
#include "selmer/ideals.hpp"

namespace selmer {

struct EvenPrime : std::domain_error {
  using std::domain_error::domain_error;
};
struct BadSplitting : std::domain_error {
  using std::domain_error::domain_error;
};
struct HypothesisViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Element u + v sqrt(delta) of the Galois closure M = L(sqrt(delta)),
// delta the squarefree part of disc f.
struct ME {
  FE u, v;
  bool operator==(const ME& o) const { return u == o.u && v == o.v; }
};

enum class SplitType { split, inert, ramified };

// Prime of M over an odd rational prime q unramified in M, represented by
// the residue homomorphism z1 -> r0 + r1 W, sqrt(delta) -> w0 + w1 W into
// F_q (f = 1, r1 = w1 = 0) or F_q(W) with W^2 = wsq (f = 2).
struct ClosurePrime {
  Int q;
  Int r0, r1, w0, w1;
  Int wsq;
  int f = 1;
  bool operator==(const ClosurePrime& o) const {
    return q == o.q && r0 == o.r0 && r1 == o.r1 && w0 == o.w0 && w1 == o.w1;
  }
};

// The Galois closure as a relative quadratic extension of L, with the
// explicit S3-action on roots; degenerates to L itself when disc f is a
// square.
class ClosureCtx {
 public:
  explicit ClosureCtx(CtxPtr K);

  const CubicFieldCtx& base() const { return *K_; }
  CtxPtr base_ptr() const { return K_; }

  Int delta;  // squarefree part of disc f
  Int cofac;  // disc f = delta * cofac^2
  bool galois = false;

  // ---- arithmetic in M ----
  ME from_L(const FE& x) const { return {x, FE()}; }
  ME sqrt_delta() const { return {FE(), FE::from_int(1)}; }
  ME add(const ME& x, const ME& y) const { return {x.u + y.u, x.v + y.v}; }
  ME sub(const ME& x, const ME& y) const { return {x.u - y.u, x.v - y.v}; }
  ME mul(const ME& x, const ME& y) const;
  FE norm_L(const ME& x) const;  // x * tau(x) = u^2 - delta v^2
  Rat norm_Q(const ME& x) const {
    // [M:Q] = 3 in the Galois case, where x represents u + v in L
    return galois ? K_->norm(x.u + x.v) : K_->norm(norm_L(x));
  }

  // ---- Galois action: sigma of order 3 fixing sqrt(delta), tau fixing L
  ME tau(const ME& x) const { return {x.u, -x.v}; }
  ME sigma(const ME& x) const;
  ME second_root() const { return z2_; }  // sigma(z1)
  FE sigma_L(const FE& x) const;          // Galois case only

  // ---- primes ----
  // splitting of an odd L-prime in M/L (Kummer: quadratic character of
  // delta in the residue field)
  SplitType split_type(const PrimeIdeal& P) const;

  // primes of M over an odd q unramified in M with n_q = 3 (six primes,
  // residue field F_q) or n_q = 2 unramified (three primes, F_q^2)
  std::vector<ClosurePrime> primes_over(const Int& q) const;
  ClosurePrime apply_sigma(const ClosurePrime& Q) const;
  ClosurePrime apply_tau(const ClosurePrime& Q) const;

  // Legendre symbol of x at Q (x coprime to Q); for f = 2 evaluated
  // through the residue norm to F_q
  int closure_symbol(const ME& x, const ClosurePrime& Q) const;

  // signs of x at the real embeddings of M (empty if none)
  std::vector<int> real_symbols(const ME& x) const;

  // residue of x under the hom of Q, as a pair (component in F_q, W-component)
  std::pair<Int, Int> residue(const ME& x, const ClosurePrime& Q) const;

 private:
  CtxPtr K_;
  ME z2_;  // sigma(z1) = (-z1 + cofac/f'(z1) sqrt(delta)) / 2
};

struct IdentityCheck {
  std::string name;
  int lhs = 0, rhs = 0;
  bool pass = false;
};
struct ActionReport {
  std::vector<IdentityCheck> checks;
  std::string case_tag;  // split_completely | sigmaQ1_eq_tauQ1 | sigmaQ1_eq_Q2
  bool all_pass = true;
};

// Symbol identities relating alpha_i = N_{M/L}(sigma^{i-1} rho1) at the
// L-primes over q to symbols of rho1 at the M-primes over q; rho1 must be a
// prime element over an odd p splitting completely in M, and q an odd prime
// (distinct from p) either split completely in M or unramified with n_q = 2.
// In the n_q = 2 case the label Q1 is one of the two conjugate primes over
// the f = 2 prime of L; conjugate_q1 picks the other one, which flips which
// of the two sigma-action cases is detected.
ActionReport check_action_relations(const ClosureCtx& cc, const ME& rho1,
                                    const Int& q, bool conjugate_q1 = false);
// Galois-case suite: alpha1 a prime element of O_L over a split p, q split
// completely in L.
ActionReport check_action_relations_galois(const ClosureCtx& cc,
                                           const FE& alpha1, const Int& q);

struct ReciprocityReport {
  int lhs = 0, rhs = 0;
  bool pass = false;
};

// (x / rho) = prod over odd unramified primes in the support of x of
// (N_{M/L}(rho) / P); rho must be a totally positive prime element over an
// odd p splitting completely in M with rho = 1 mod 8 O_M.
ReciprocityReport check_reciprocity(const ClosureCtx& cc, const FE& x,
                                    const ME& rho);

}  // namespace selmer
