#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "selmer/intmath.hpp"
#include "selmer/zmat.hpp"

namespace selmer {

struct ReducibleCubic : std::domain_error {
  using std::domain_error::domain_error;
};
struct ZeroDiscriminant : std::domain_error {
  using std::domain_error::domain_error;
};
struct ZeroElement : std::domain_error {
  using std::domain_error::domain_error;
};

// Element of L = Q(z), z a root of x^3 + a x + b, in the power basis 1, z, z^2.
struct FE {
  std::array<Rat, 3> c{};

  static FE from_int(const Int& n) {
    FE r;
    r.c[0] = n;
    return r;
  }
  static FE from_rat(const Rat& q) {
    FE r;
    r.c[0] = q;
    return r;
  }
  static FE gen() {
    FE r;
    r.c[1] = 1;
    return r;
  }
  bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }
  bool is_rational() const { return c[1] == 0 && c[2] == 0; }
  bool operator==(const FE& o) const { return c == o.c; }
};

FE operator+(const FE& x, const FE& y);
FE operator-(const FE& x, const FE& y);
FE operator-(const FE& x);
FE operator*(const Rat& s, const FE& x);

// Prime ideal of O_L, stored as a 3x3 lower-triangular HNF basis in
// integral-basis coordinates, together with ramification data and a
// uniformizer pi with v_P(pi) = 1 and v_Q(pi) = 0 for the other primes
// above the same rational prime.
struct PrimeIdeal {
  Int p;
  int e = 1;
  int f_deg = 1;
  ZMat hnf;
  ZVec pi;

  Int norm() const {
    Int n = 1;
    for (int i = 0; i < f_deg; ++i) n *= p;
    return n;
  }
  bool operator==(const PrimeIdeal& o) const { return p == o.p && hnf == o.hnf; }
};

class CubicFieldCtx;
using CtxPtr = std::shared_ptr<const CubicFieldCtx>;

// A dyadic interval [lo, hi].
struct Ival {
  Rat lo, hi;
  bool contains_zero() const { return lo <= 0 && hi >= 0; }
  int sign() const { return lo > 0 ? 1 : (hi < 0 ? -1 : 0); }
};
Ival operator+(const Ival& x, const Ival& y);
Ival operator-(const Ival& x, const Ival& y);
Ival operator*(const Ival& x, const Ival& y);
Ival ival_exact(const Rat& q);
// Interval containing sqrt of [lo,hi] (lo >= 0), endpoints within 2^-prec.
Ival ival_sqrt(const Ival& x, int prec);

// Real embedding data at a given dyadic precision.
struct Embeddings {
  // real roots of f, ascending, r1 of them
  std::vector<Ival> real_roots;
  // complex pair z = u + v i (present iff r2 = 1); v > 0
  Ival u, v;
};

// The fixed cubic field L = Q(z1) for x^3 + a x + b, with its maximal order.
// Immutable after construction; internal caches are mutex-guarded.
class CubicFieldCtx : public std::enable_shared_from_this<CubicFieldCtx> {
 public:
  Int a, b;
  Int disc_f;     // -4a^3 - 27b^2
  Int field_disc; // disc_f / index^2
  Int index;      // [O_L : Z[z]]
  int r1 = 0, r2 = 0;
  int epsilon = 0;  // 0 if L has a complex embedding, 1 if totally real
  bool is_galois = false;

  // Integral basis: omega[i][j] = power-basis coordinate i of w_j.
  // Triangular: w_0 = 1, w_1 in Q + Q z, w_2 general.
  std::vector<std::vector<Rat>> omega, omega_inv;
  // w_i * w_j = sum_k mult_tab[i][j][k] w_k (integer entries).
  Int mult_tab[3][3][3];

  // ---- element arithmetic ----
  FE mul(const FE& x, const FE& y) const;
  FE pow(FE x, Int e) const;  // e >= 0
  FE inv(const FE& x) const;
  FE div(const FE& x, const FE& y) const { return mul(x, inv(y)); }
  Rat norm(const FE& x) const;
  Rat trace(const FE& x) const;
  // min poly check helper: true if x is a square in L; returns the root.
  std::optional<FE> sqrt_in_L(const FE& x) const;

  // integral-basis coordinates (exact rationals)
  std::vector<Rat> to_integral(const FE& x) const;
  std::optional<ZVec> to_integral_exact(const FE& x) const;  // iff x in O_L
  FE from_integral(const ZVec& v) const;
  FE from_integral_rat(const std::vector<Rat>& v) const;
  bool is_integral(const FE& x) const { return to_integral_exact(x).has_value(); }
  // lcm of denominators of the integral coordinates
  Int denominator(const FE& x) const;

  // multiplication in integral coordinates
  ZVec mul_int(const ZVec& x, const ZVec& y) const;
  // 3x3 matrix of multiplication by x on integral coordinates
  ZMat mul_matrix_int(const ZVec& x) const;

  // ---- embeddings ----
  Embeddings embeddings(int prec_bits) const;
  std::vector<int> real_signs(const FE& x) const;  // length r1, entries +-1

  // ---- shared caches (defined in ideals.cpp) ----
  const std::vector<PrimeIdeal>& primes_above(const Int& p) const;
  const ZMat& prime_power(const PrimeIdeal& P, int k) const;
  int n_p(const Int& p) const { return (int)primes_above(p).size(); }

 private:
  friend CtxPtr build_field(const Int& a, const Int& b);
  CubicFieldCtx() = default;

  mutable std::mutex cache_mu_;
  mutable std::map<Int, std::vector<PrimeIdeal>> prime_cache_;
  mutable std::map<ZMat, std::map<int, ZMat>> power_cache_;
  mutable std::map<int, Embeddings> embed_cache_;
};

// Construct the field context; rejects reducible cubics.
CtxPtr build_field(const Int& a, const Int& b);

// N(x - z1) = f(x) convention helper: the cubic evaluated at a rational.
Rat eval_cubic(const Int& a, const Int& b, const Rat& x);

}  // namespace selmer
