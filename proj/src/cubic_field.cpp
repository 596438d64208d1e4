#include "selmer/cubic_field.hpp"

#include <algorithm>
#include <cassert>

#include "fqlin.hpp"

namespace selmer {

FE operator+(const FE& x, const FE& y) {
  FE r;
  for (int i = 0; i < 3; ++i) {
    r.c[i] = x.c[i] + y.c[i];
    r.c[i].canonicalize();
  }
  return r;
}

FE operator-(const FE& x, const FE& y) {
  FE r;
  for (int i = 0; i < 3; ++i) {
    r.c[i] = x.c[i] - y.c[i];
    r.c[i].canonicalize();
  }
  return r;
}

FE operator-(const FE& x) {
  FE r;
  for (int i = 0; i < 3; ++i) r.c[i] = -x.c[i];
  return r;
}

FE operator*(const Rat& s, const FE& x) {
  FE r;
  for (int i = 0; i < 3; ++i) {
    r.c[i] = s * x.c[i];
    r.c[i].canonicalize();
  }
  return r;
}

Rat eval_cubic(const Int& a, const Int& b, const Rat& x) {
  Rat r = x * x * x + Rat(a) * x + Rat(b);
  r.canonicalize();
  return r;
}

// ---------------------------------------------------------------------------
// intervals

Ival ival_exact(const Rat& q) { return {q, q}; }

Ival operator+(const Ival& x, const Ival& y) {
  Ival r{x.lo + y.lo, x.hi + y.hi};
  r.lo.canonicalize();
  r.hi.canonicalize();
  return r;
}

Ival operator-(const Ival& x, const Ival& y) {
  Ival r{x.lo - y.hi, x.hi - y.lo};
  r.lo.canonicalize();
  r.hi.canonicalize();
  return r;
}

Ival operator*(const Ival& x, const Ival& y) {
  Rat cand[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
  Ival r{cand[0], cand[0]};
  for (int i = 1; i < 4; ++i) {
    if (cand[i] < r.lo) r.lo = cand[i];
    if (cand[i] > r.hi) r.hi = cand[i];
  }
  r.lo.canonicalize();
  r.hi.canonicalize();
  return r;
}

// floor(sqrt(q) * 2^prec) / 2^prec for q >= 0
static Rat rat_sqrt_lower(const Rat& q, int prec) {
  Int n = q.get_num(), d = q.get_den();
  Int scaled = n * d;
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * prec);
  Int s;
  mpz_sqrt(s.get_mpz_t(), scaled.get_mpz_t());
  Int den = d;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), prec);
  Rat r(s, den);
  r.canonicalize();
  return r;
}

Ival ival_sqrt(const Ival& x, int prec) {
  if (x.lo < 0) throw std::domain_error("ival_sqrt: negative interval");
  Rat lo = rat_sqrt_lower(x.lo, prec);
  Rat hi = rat_sqrt_lower(x.hi, prec) + Rat(Int(1), Int(1) << prec);
  hi.canonicalize();
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// element arithmetic

FE CubicFieldCtx::mul(const FE& x, const FE& y) const {
  Rat e0 = x.c[0] * y.c[0];
  Rat e1 = x.c[0] * y.c[1] + x.c[1] * y.c[0];
  Rat e2 = x.c[0] * y.c[2] + x.c[1] * y.c[1] + x.c[2] * y.c[0];
  Rat e3 = x.c[1] * y.c[2] + x.c[2] * y.c[1];
  Rat e4 = x.c[2] * y.c[2];
  // z^3 = -a z - b, z^4 = -a z^2 - b z
  FE r;
  r.c[0] = e0 - Rat(b) * e3;
  r.c[1] = e1 - Rat(a) * e3 - Rat(b) * e4;
  r.c[2] = e2 - Rat(a) * e4;
  for (auto& q : r.c) q.canonicalize();
  return r;
}

FE CubicFieldCtx::pow(FE x, Int e) const {
  assert(e >= 0);
  FE r = FE::from_int(1);
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = mul(r, x);
    x = mul(x, x);
    e >>= 1;
  }
  return r;
}

// columns of multiplication-by-x on the power basis
static std::vector<std::vector<Rat>> power_mul_matrix(const CubicFieldCtx& K,
                                                      const FE& x) {
  std::vector<std::vector<Rat>> M(3, std::vector<Rat>(3));
  FE cols[3] = {x, K.mul(x, FE::gen()), K.mul(K.mul(x, FE::gen()), FE::gen())};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) M[i][j] = cols[j].c[i];
  return M;
}

Rat CubicFieldCtx::norm(const FE& x) const { return rat_det(power_mul_matrix(*this, x)); }

Rat CubicFieldCtx::trace(const FE& x) const {
  auto M = power_mul_matrix(*this, x);
  Rat t = M[0][0] + M[1][1] + M[2][2];
  t.canonicalize();
  return t;
}

FE CubicFieldCtx::inv(const FE& x) const {
  if (x.is_zero()) throw ZeroElement("inverse of zero");
  auto M = power_mul_matrix(*this, x);
  std::vector<Rat> e0 = {Rat(1), Rat(0), Rat(0)};
  auto sol = solve_rational(M, e0);
  FE r;
  for (int i = 0; i < 3; ++i) r.c[i] = sol[i];
  return r;
}

std::vector<Rat> CubicFieldCtx::to_integral(const FE& x) const {
  std::vector<Rat> v(3);
  for (int i = 0; i < 3; ++i) {
    v[i] = omega_inv[i][0] * x.c[0] + omega_inv[i][1] * x.c[1] +
           omega_inv[i][2] * x.c[2];
    v[i].canonicalize();
  }
  return v;
}

std::optional<ZVec> CubicFieldCtx::to_integral_exact(const FE& x) const {
  auto v = to_integral(x);
  ZVec r(3);
  for (int i = 0; i < 3; ++i) {
    if (v[i].get_den() != 1) return std::nullopt;
    r[i] = v[i].get_num();
  }
  return r;
}

FE CubicFieldCtx::from_integral(const ZVec& v) const {
  FE r;
  for (int i = 0; i < 3; ++i) {
    r.c[i] = omega[i][0] * Rat(v[0]) + omega[i][1] * Rat(v[1]) +
             omega[i][2] * Rat(v[2]);
    r.c[i].canonicalize();
  }
  return r;
}

FE CubicFieldCtx::from_integral_rat(const std::vector<Rat>& v) const {
  FE r;
  for (int i = 0; i < 3; ++i) {
    r.c[i] = omega[i][0] * v[0] + omega[i][1] * v[1] + omega[i][2] * v[2];
    r.c[i].canonicalize();
  }
  return r;
}

Int CubicFieldCtx::denominator(const FE& x) const {
  auto v = to_integral(x);
  Int d = 1;
  for (auto& q : v) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), q.get_den().get_mpz_t());
  return d;
}

ZVec CubicFieldCtx::mul_int(const ZVec& x, const ZVec& y) const {
  ZVec r(3, 0);
  for (int i = 0; i < 3; ++i) {
    if (x[i] == 0) continue;
    for (int j = 0; j < 3; ++j) {
      if (y[j] == 0) continue;
      Int c = x[i] * y[j];
      for (int k = 0; k < 3; ++k) r[k] += c * mult_tab[i][j][k];
    }
  }
  return r;
}

ZMat CubicFieldCtx::mul_matrix_int(const ZVec& x) const {
  ZMat M = zmat(3, 3);
  for (int j = 0; j < 3; ++j) {
    ZVec e(3, 0);
    e[j] = 1;
    ZVec col = mul_int(x, e);
    for (int i = 0; i < 3; ++i) M[i][j] = col[i];
  }
  return M;
}

// ---------------------------------------------------------------------------
// maximal order (round 2 at each prime q with q^2 | disc)

namespace {

using fqlin::fq_kernel;
using fqlin::mod_nonneg;

// Order given by integer basis matrix B (columns, power coords) over common
// denominator d.  Canonicalize: HNF with coordinate order (z^2, z, 1) so the
// last column is a rational; then reverse columns, making w_0 = 1.
void canonical_order_basis(ZMat& B, Int& d) {
  // strip common content
  Int g = d;
  for (auto& row : B)
    for (auto& x : row) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
  if (g > 1) {
    d /= g;
    for (auto& row : B)
      for (auto& x : row) x /= g;
  }
  ZMat P = zmat(3, B[0].size());
  for (size_t j = 0; j < B[0].size(); ++j)
    for (int i = 0; i < 3; ++i) P[i][j] = B[2 - i][j];
  ZMat H = hnf_lattice(P);
  ZMat R = zmat(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) R[i][j] = H[2 - i][2 - j];
  B = R;
}

}  // namespace

CtxPtr build_field(const Int& a, const Int& b) {
  // rational root test: a monic integer cubic is reducible over Q iff it has
  // an integer root dividing b
  if (b == 0) throw ReducibleCubic("x^3 + ax + b has root 0");
  for (const Int& dv : divisors(abs(b)))
    for (int s : {1, -1})
      if (eval_cubic(a, b, Rat(s * dv)) == 0)
        throw ReducibleCubic("x^3 + ax + b has a rational root");

  auto K = std::shared_ptr<CubicFieldCtx>(new CubicFieldCtx());
  K->a = a;
  K->b = b;
  K->disc_f = -4 * a * a * a - 27 * b * b;
  if (K->disc_f == 0) throw ZeroDiscriminant("discriminant is zero");

  // round-2 maximalization starting from Z[z]
  ZMat B = identity_mat(3);
  Int d = 1;
  Factorization df = factor(abs(K->disc_f));
  for (auto& [q, e] : df) {
    if (e < 2) continue;
    while (true) {
      // mult table of current basis w_j = (sum_i B[i][j] z^i)/d
      std::vector<std::vector<Rat>> W(3, std::vector<Rat>(3));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          W[i][j] = Rat(B[i][j], d);
          W[i][j].canonicalize();
        }
      FE w[3];
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) w[j].c[i] = W[i][j];
      Int tab[3][3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          FE p = K->mul(w[i], w[j]);
          std::vector<Rat> pc = {p.c[0], p.c[1], p.c[2]};
          auto sol = solve_rational(W, pc);
          for (int k = 0; k < 3; ++k) {
            if (sol[k].get_den() != 1)
              throw std::logic_error("order basis: non-integral structure constants");
            tab[i][j][k] = sol[k].get_num();
          }
        }
      // coords of 1 in the w-basis
      std::vector<Rat> onec = {Rat(1), Rat(0), Rat(0)};
      auto one_sol = solve_rational(W, onec);
      ZVec one(3);
      for (int k = 0; k < 3; ++k) one[k] = one_sol[k].get_num();

      auto tmul = [&](const ZVec& x, const ZVec& y) {
        ZVec r(3, 0);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            Int c = mod_nonneg(x[i] * y[j], q);
            if (c == 0) continue;
            for (int k = 0; k < 3; ++k)
              r[k] = mod_nonneg(r[k] + c * tab[i][j][k], q);
          }
        return r;
      };
      // radical of O/qO = kernel of x -> x^(q^m), q^m >= 3
      Int qm = q;
      while (qm < 3) qm *= q;
      ZMat Frob = zmat(3, 3);
      for (int j = 0; j < 3; ++j) {
        ZVec x(3, 0);
        x[j] = 1;
        ZVec acc = one;
        for (auto& t : acc) t = mod_nonneg(t, q);
        Int e2 = qm;
        ZVec base = x;
        while (e2 > 0) {
          if (mpz_odd_p(e2.get_mpz_t())) acc = tmul(acc, base);
          base = tmul(base, base);
          e2 >>= 1;
        }
        for (int i = 0; i < 3; ++i) Frob[i][j] = acc[i];
      }
      auto rad = fq_kernel(Frob, 3, q);
      // I_q = qO + radical lifts, in w-coords
      ZMat Icols = zmat(3, 3 + rad.size());
      for (int i = 0; i < 3; ++i) Icols[i][i] = q;
      for (size_t k = 0; k < rad.size(); ++k)
        for (int i = 0; i < 3; ++i) Icols[i][3 + k] = rad[k][i];
      ZMat V = hnf_lattice(Icols);
      // multiplier ring: y in O/qO with y * v_j in q I_q for all j
      ZMat C = zmat(9, 3);
      for (int j = 0; j < 3; ++j) {
        ZVec vj(3);
        for (int i = 0; i < 3; ++i) vj[i] = V[i][j];
        for (int i = 0; i < 3; ++i) {
          ZVec wi(3, 0);
          wi[i] = 1;
          ZVec prod(3, 0);
          for (int s = 0; s < 3; ++s)
            for (int t = 0; t < 3; ++t)
              if (wi[s] != 0 && vj[t] != 0)
                for (int k2 = 0; k2 < 3; ++k2)
                  prod[k2] += wi[s] * vj[t] * tab[s][t][k2];
          // V-coords of prod (triangular solve; exact since I_q is an ideal)
          ZVec u(3);
          for (int r2 = 0; r2 < 3; ++r2) {
            Int rem = prod[r2];
            for (int k2 = 0; k2 < r2; ++k2) rem -= V[r2][k2] * u[k2];
            if (!mpz_divisible_p(rem.get_mpz_t(), V[r2][r2].get_mpz_t()))
              throw std::logic_error("round2: ideal coordinates not integral");
            u[r2] = rem / V[r2][r2];
          }
          for (int r2 = 0; r2 < 3; ++r2)
            C[3 * j + r2][i] = mod_nonneg(u[r2], q);
        }
      }
      auto enlarge = fq_kernel(C, 3, q);
      if (enlarge.empty()) break;
      // O' = O + (1/q) * lifts
      ZMat Ncols = zmat(3, 3 + enlarge.size());
      for (int i = 0; i < 3; ++i) Ncols[i][i] = q;
      for (size_t k = 0; k < enlarge.size(); ++k)
        for (int i = 0; i < 3; ++i) Ncols[i][3 + k] = enlarge[k][i];
      // convert w-coords/q to power coords over denominator d*q
      ZMat Bnew = mat_mul(B, Ncols);
      Int dnew = d * q;
      canonical_order_basis(Bnew, dnew);
      B = Bnew;
      d = dnew;
    }
  }
  canonical_order_basis(B, d);

  // det(omega) = 1/index
  std::vector<std::vector<Rat>> W(3, std::vector<Rat>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      W[i][j] = Rat(B[i][j], d);
      W[i][j].canonicalize();
    }
  Rat detW = rat_det(W);
  Rat idx = 1 / detW;
  idx.canonicalize();
  if (idx.get_den() != 1 || idx <= 0)
    throw std::logic_error("order index not a positive integer");
  K->index = idx.get_num();
  K->field_disc = K->disc_f / (K->index * K->index);
  K->omega = W;
  // inverse basis matrix, column by column
  K->omega_inv.assign(3, std::vector<Rat>(3));
  for (int j = 0; j < 3; ++j) {
    std::vector<Rat> e(3, Rat(0));
    e[j] = 1;
    auto col = solve_rational(W, e);
    for (int i = 0; i < 3; ++i) K->omega_inv[i][j] = col[i];
  }
  FE w[3];
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) w[j].c[i] = W[i][j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      auto coords = K->to_integral(K->mul(w[i], w[j]));
      for (int k = 0; k < 3; ++k) {
        if (coords[k].get_den() != 1)
          throw std::logic_error("integral basis mult table not integral");
        K->mult_tab[i][j][k] = coords[k].get_num();
      }
    }

  // signature
  if (K->disc_f > 0) {
    K->r1 = 3;
    K->r2 = 0;
    K->epsilon = 1;
  } else {
    K->r1 = 1;
    K->r2 = 1;
    K->epsilon = 0;
  }
  K->is_galois = (K->disc_f > 0) && is_square(K->disc_f);
  return K;
}

// ---------------------------------------------------------------------------
// embeddings

namespace {

int cubic_sign(const Int& a, const Int& b, const Rat& x) {
  Rat v = eval_cubic(a, b, x);
  return sgn(v.get_num());
}

// bisect for the unique root in [lo, hi] with f(lo) < 0 < f(hi) or reversed
Ival bisect_root(const Int& a, const Int& b, Rat lo, Rat hi, int slo, int prec) {
  Rat width = hi - lo;
  Rat target(Int(1), Int(1) << prec);
  while (width > target) {
    Rat mid = (lo + hi) / 2;
    mid.canonicalize();
    int sm = cubic_sign(a, b, mid);
    if (sm == 0) {
      // rational root cannot occur for an irreducible cubic at dyadic points
      // unless it is exactly the root; shrink to the point
      return {mid, mid};
    }
    if (sm == slo)
      lo = mid;
    else
      hi = mid;
    width = hi - lo;
  }
  return {lo, hi};
}

}  // namespace

Embeddings CubicFieldCtx::embeddings(int prec_bits) const {
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto it = embed_cache_.find(prec_bits);
    if (it != embed_cache_.end()) return it->second;
  }
  Embeddings E;
  Int aa = abs(a), ab = abs(b);
  Int Bnd = 1 + std::max(aa, ab);
  Rat lo = Rat(-Bnd), hi = Rat(Bnd);
  if (disc_f > 0) {
    // three real roots; a < 0; critical points at +-sqrt(-a/3)
    Rat ca = Rat(-a, Int(3));
    ca.canonicalize();
    int p = 8;
    Rat m;
    while (true) {
      Ival s = ival_sqrt(ival_exact(ca), p);
      m = (s.lo + s.hi) / 2;
      m.canonicalize();
      if (cubic_sign(a, b, -m) > 0 && cubic_sign(a, b, m) < 0) break;
      p *= 2;
      if (p > 4096) throw std::logic_error("cannot separate real roots");
    }
    E.real_roots.push_back(bisect_root(a, b, lo, -m, -1, prec_bits));
    E.real_roots.push_back(bisect_root(a, b, -m, m, +1, prec_bits));
    E.real_roots.push_back(bisect_root(a, b, m, hi, -1, prec_bits));
  } else {
    Ival r = bisect_root(a, b, lo, hi, -1, prec_bits + 4);
    E.real_roots.push_back(r);
    // complex pair: z = u + vi with u = -r/2, v = sqrt(3 r^2 + 4a)/2
    Ival mr{-r.hi, -r.lo};
    E.u = Ival{mr.lo / 2, mr.hi / 2};
    E.u.lo.canonicalize();
    E.u.hi.canonicalize();
    Ival disc2 = ival_exact(Rat(3)) * (r * r) + ival_exact(Rat(4 * a));
    if (disc2.lo <= 0) {
      // refine the real root until the quadratic discriminant is positive
      int p = prec_bits + 16;
      while (disc2.lo <= 0 && p <= 1 << 14) {
        r = bisect_root(a, b, lo, hi, -1, p);
        disc2 = ival_exact(Rat(3)) * (r * r) + ival_exact(Rat(4 * a));
        p *= 2;
      }
      if (disc2.lo <= 0) throw std::logic_error("complex pair separation failed");
    }
    Ival v = ival_sqrt(disc2, prec_bits + 2);
    E.v = Ival{v.lo / 2, v.hi / 2};
    E.v.lo.canonicalize();
    E.v.hi.canonicalize();
  }
  std::lock_guard<std::mutex> lk(cache_mu_);
  embed_cache_[prec_bits] = E;
  return E;
}

std::vector<int> CubicFieldCtx::real_signs(const FE& x) const {
  if (x.is_zero()) throw ZeroElement("real_signs of zero");
  if (x.is_rational()) return std::vector<int>(r1, sgn(x.c[0].get_num()));
  std::vector<int> out;
  int prec = 32;
  while (true) {
    out.clear();
    Embeddings E = embeddings(prec);
    bool ok = true;
    for (const Ival& r : E.real_roots) {
      Ival v = ival_exact(x.c[0]) + ival_exact(x.c[1]) * r +
               ival_exact(x.c[2]) * (r * r);
      int s = v.sign();
      if (s == 0) {
        ok = false;
        break;
      }
      out.push_back(s);
    }
    if (ok) return out;
    prec *= 2;
    if (prec > 1 << 14) throw std::logic_error("real_signs: cannot resolve sign");
  }
}

// ---------------------------------------------------------------------------
// exact square root in L via numeric reconstruction + exact verification

namespace {

Rat ival_mid(const Ival& v) {
  Rat m = (v.lo + v.hi) / 2;
  m.canonicalize();
  return m;
}

// approximate sqrt of a rational (>= 0)
Rat approx_sqrt(const Rat& q, int prec) { return rat_sqrt_lower(q, prec); }

}  // namespace

std::optional<FE> CubicFieldCtx::sqrt_in_L(const FE& x0) const {
  if (x0.is_zero()) return FE{};
  Rat nx = norm(x0);
  Rat num2 = nx.get_num() * nx.get_den();
  if (num2 < 0 || !is_square(num2.get_num())) return std::nullopt;
  for (int s : real_signs(x0))
    if (s < 0) return std::nullopt;
  // clear denominators: find sqrt of y = x * d^2 in O_L, coords denominator
  // divides den(omega)
  Int d = denominator(x0);
  FE y = Rat(d * d) * x0;
  Int D = 1;
  for (auto& row : omega)
    for (auto& q : row)
      mpz_lcm(D.get_mpz_t(), D.get_mpz_t(), q.get_den().get_mpz_t());

  for (int prec = 96; prec <= 6144; prec *= 2) {
    Embeddings E = embeddings(prec);
    // per-embedding values of y and candidate square roots
    // real embeddings
    std::vector<Rat> roots;
    for (auto& r : E.real_roots) roots.push_back(ival_mid(r));
    auto eval_at = [&](const Rat& r) {
      Rat v = y.c[0] + y.c[1] * r + y.c[2] * r * r;
      v.canonicalize();
      return v;
    };
    size_t nreal = roots.size();
    std::vector<Rat> rv(nreal);
    for (size_t i = 0; i < nreal; ++i) {
      rv[i] = eval_at(roots[i]);
      if (rv[i] < 0) rv[i] = 0;  // numeric dip below zero near a real zero
    }
    // complex embedding value (if any)
    Rat cu, cv;  // y at z2 = u + vi
    Rat su, sv;  // sqrt, principal branch
    if (r2 == 1) {
      Rat u = ival_mid(E.u), v = ival_mid(E.v);
      // y(u+vi) = c0 + c1(u+vi) + c2(u+vi)^2
      Rat re = y.c[0] + y.c[1] * u + y.c[2] * (u * u - v * v);
      Rat im = y.c[1] * v + y.c[2] * 2 * u * v;
      re.canonicalize();
      im.canonicalize();
      Rat r = approx_sqrt(re * re + im * im, prec);
      Rat half(1, 2);
      Rat a2 = (r + re) * half, b2 = (r - re) * half;
      if (a2 < 0) a2 = 0;
      if (b2 < 0) b2 = 0;
      su = approx_sqrt(a2, prec);
      sv = approx_sqrt(b2, prec);
      if (im < 0) sv = -sv;
      cu = re;
      cv = im;
    }
    // try all sign patterns on the real embeddings (complex branch fixed;
    // the global -beta duplicate is harmless)
    int combos = 1 << nreal;
    for (int mask = 0; mask < combos; ++mask) {
      // build linear system: beta(root_i) = s_i sqrt(rv_i); plus complex
      std::vector<std::vector<Rat>> A;
      std::vector<Rat> rhs;
      for (size_t i = 0; i < nreal; ++i) {
        Rat r = roots[i];
        A.push_back({Rat(1), r, r * r});
        Rat s = approx_sqrt(rv[i], prec);
        rhs.push_back((mask >> i) & 1 ? -s : s);
      }
      if (r2 == 1) {
        Rat u = ival_mid(E.u), v = ival_mid(E.v);
        // real part and imaginary part equations
        A.push_back({Rat(1), u, u * u - v * v});
        rhs.push_back(su);
        A.push_back({Rat(0), v, 2 * u * v});
        rhs.push_back(sv);
      }
      std::vector<Rat> c;
      try {
        c = solve_rational(A, rhs);
      } catch (const std::domain_error&) {
        continue;
      }
      // round each coordinate to nearest multiple of 1/D
      FE beta;
      for (int i = 0; i < 3; ++i) {
        Rat scaled = c[i] * Rat(D);
        Int n = scaled.get_num(), den = scaled.get_den();
        Int qr, rr;
        mpz_fdiv_qr(qr.get_mpz_t(), rr.get_mpz_t(), n.get_mpz_t(), den.get_mpz_t());
        if (2 * rr >= den) qr += 1;
        beta.c[i] = Rat(qr, D);
        beta.c[i].canonicalize();
      }
      if (mul(beta, beta) == y) {
        FE out = Rat(Int(1), d) * beta;
        return out;
      }
    }
  }
  return std::nullopt;
}

}  // namespace selmer
