#include "selmer/ideals.hpp"

#include <algorithm>

#include "fqlin.hpp"
#include "polymod.hpp"

namespace selmer {

using fqlin::fq_kernel;
using fqlin::fq_solve;
using fqlin::mod_nonneg;

ZMat ideal_one() { return identity_mat(3); }

ZMat ideal_from_gens(const CubicFieldCtx& K, const std::vector<ZVec>& gens) {
  ZMat cols = zmat(3, 3 * gens.size());
  for (size_t g = 0; g < gens.size(); ++g) {
    ZMat M = K.mul_matrix_int(gens[g]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cols[i][3 * g + j] = M[i][j];
  }
  return hnf_lattice(cols);
}

ZMat principal_ideal(const CubicFieldCtx& K, const ZVec& x) {
  return hnf_lattice(K.mul_matrix_int(x));
}

ZMat ideal_mul(const CubicFieldCtx& K, const ZMat& A, const ZMat& B) {
  ZMat cols = zmat(3, 9);
  for (int i = 0; i < 3; ++i) {
    ZVec ai = {A[0][i], A[1][i], A[2][i]};
    for (int j = 0; j < 3; ++j) {
      ZVec bj = {B[0][j], B[1][j], B[2][j]};
      ZVec pr = K.mul_int(ai, bj);
      for (int k = 0; k < 3; ++k) cols[k][3 * i + j] = pr[k];
    }
  }
  return hnf_lattice(cols);
}

ZMat ideal_pow(const CubicFieldCtx& K, const ZMat& A, int k) {
  ZMat r = ideal_one();
  for (int i = 0; i < k; ++i) r = ideal_mul(K, r, A);
  return r;
}

Int ideal_norm(const ZMat& A) { return lattice_index(A); }

ZMat kernel_integer(const ZMat& A) {
  size_t rows = A.size(), cols = A[0].size();
  ZMat M = A;
  ZMat U = identity_mat(cols);
  size_t pc = 0;
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
      if (best != pc) {
        for (auto& row : M) std::swap(row[pc], row[best]);
        for (auto& row : U) std::swap(row[pc], row[best]);
      }
      if (M[r][pc] < 0) {
        for (auto& row : M) row[pc] = -row[pc];
        for (auto& row : U) row[pc] = -row[pc];
      }
      bool clean = true;
      for (size_t j = pc + 1; j < cols; ++j)
        if (M[r][j] != 0) {
          Int q = M[r][j] / M[r][pc];
          if (M[r][j] - q * M[r][pc] < 0) q -= 1;
          for (auto& row : M) row[j] -= q * row[pc];
          for (auto& row : U) row[j] -= q * row[pc];
          if (M[r][j] != 0) clean = false;
        }
      if (clean) break;
    }
    ++pc;
  }
  // columns pc..cols-1 of M are zero; the matching columns of U span the kernel
  ZMat ker = zmat(cols, cols - pc);
  for (size_t j = pc; j < cols; ++j)
    for (size_t i = 0; i < cols; ++i) ker[i][j - pc] = U[i][j];
  return ker;
}

ZMat ideal_colon(const CubicFieldCtx& K, const ZMat& A, const ZMat& B) {
  // x with x * b_j in A for the three basis columns b_j of B
  ZMat big = zmat(9, 12);
  for (int j = 0; j < 3; ++j) {
    ZVec bj = {B[0][j], B[1][j], B[2][j]};
    ZMat Mb = K.mul_matrix_int(bj);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        big[3 * j + r][c] = Mb[r][c];
        big[3 * j + r][3 + 3 * j + c] = -A[r][c];
      }
  }
  ZMat ker = kernel_integer(big);
  if (ker[0].empty()) throw std::logic_error("ideal_colon: empty kernel");
  ZMat xs = zmat(3, ker[0].size());
  for (size_t j = 0; j < ker[0].size(); ++j)
    for (int i = 0; i < 3; ++i) xs[i][j] = ker[i][j];
  return hnf_lattice(xs);
}

// ---------------------------------------------------------------------------
// prime splitting

std::vector<std::pair<int, int>> splitting_type(const CubicFieldCtx& K,
                                                const Int& p) {
  using namespace polymod;
  if (mpz_divisible_p(K.index.get_mpz_t(), p.get_mpz_t())) {
    std::vector<std::pair<int, int>> out;
    for (const auto& P : K.primes_above(p)) out.push_back({P.f_deg, P.e});
    return out;
  }
  Poly f = reduce({K.b, K.a, 0, 1}, p);
  std::vector<std::pair<int, int>> out;
  for (auto& [g, m] : factor_monic(f, p)) out.push_back({deg(g), m});
  return out;
}

namespace {

// one semisimple component of O/pO mod its radical
struct Component {
  std::vector<ZVec> basis;  // A-coordinates (length 3 each)
  ZVec identity;
};

struct AlgebraModP {
  const CubicFieldCtx* K;
  Int p;
  std::vector<ZVec> rad;        // radical basis, echelonized
  std::vector<size_t> rad_piv;  // pivot positions

  ZVec mul(const ZVec& x, const ZVec& y) const {
    ZVec r = K->mul_int(x, y);
    for (auto& c : r) c = mod_nonneg(c, p);
    return reduce_mod_rad(r);
  }
  ZVec reduce_mod_rad(ZVec v) const {
    for (size_t k = 0; k < rad.size(); ++k) {
      Int c = mod_nonneg(v[rad_piv[k]], p);
      if (c == 0) continue;
      for (int i = 0; i < 3; ++i)
        v[i] = mod_nonneg(v[i] - c * rad[k][i], p);
    }
    return v;
  }
};

// min poly of x within the span of {id, x, x^2, ...} (algebra semisimple,
// dimension <= 3); monic, ascending coefficients
polymod::Poly min_poly(const AlgebraModP& A, const ZVec& id, const ZVec& x) {
  std::vector<ZVec> pows = {id};
  for (int d = 1; d <= 3; ++d) {
    pows.push_back(A.mul(pows.back(), x));
    // dependence? solve sum_{k<d} c_k pows[k] = pows[d]
    ZMat M = zmat(3, d);
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < 3; ++i) M[i][k] = pows[k][i];
    ZVec b = pows[d];
    auto sol = fq_solve(M, b, A.p);
    if (sol) {
      polymod::Poly m(d + 1, 0);
      m[d] = 1;
      for (int k = 0; k < d; ++k) m[k] = mod_nonneg(-(*sol)[k], A.p);
      return m;
    }
  }
  throw std::logic_error("min_poly: no dependence found");
}

// h(x) evaluated in the algebra
ZVec eval_poly_alg(const AlgebraModP& A, const ZVec& id, const ZVec& x,
                   const polymod::Poly& h) {
  ZVec r(3, 0);
  for (size_t i = h.size(); i-- > 0;) {
    r = A.mul(r, x);
    for (int k = 0; k < 3; ++k)
      r[k] = mod_nonneg(r[k] + h[i] * id[k], A.p);
  }
  return r;
}

void split_component(const AlgebraModP& A, const Component& C,
                     std::vector<Component>& out) {
  size_t dim = C.basis.size();
  if (dim == 1) {
    out.push_back(C);
    return;
  }
  // look for an element with reducible (or full-degree irreducible) min poly
  std::vector<ZVec> cands = C.basis;
  for (size_t i = 0; i < C.basis.size(); ++i)
    for (size_t j = i + 1; j < C.basis.size(); ++j) {
      ZVec s(3);
      for (int k = 0; k < 3; ++k)
        s[k] = mod_nonneg(C.basis[i][k] + C.basis[j][k], A.p);
      cands.push_back(s);
    }
  for (const ZVec& x0 : cands) {
    // project x0 into C: x = x0 * identity
    ZVec x = A.mul(x0, C.identity);
    if (std::all_of(x.begin(), x.end(), [](const Int& v) { return v == 0; }))
      continue;
    polymod::Poly m = min_poly(A, C.identity, x);
    auto fac = polymod::factor_monic(m, A.p);
    if (fac.size() == 1 && fac[0].second == 1) {
      if ((size_t)polymod::deg(fac[0].first) == dim) {
        out.push_back(C);  // C is a field
        return;
      }
      continue;
    }
    // split C along the factors of the (squarefree) min poly
    for (auto& [h, mult] : fac) {
      if (mult != 1) throw std::logic_error("split: non-semisimple min poly");
      ZVec hx = eval_poly_alg(A, C.identity, x, h);
      // kernel of multiplication by h(x) on C
      ZMat M = zmat(3, dim);
      for (size_t j = 0; j < dim; ++j) {
        ZVec col = A.mul(hx, C.basis[j]);
        for (int i = 0; i < 3; ++i) M[i][j] = col[i];
      }
      auto ker = fq_kernel(M, dim, A.p);
      if (ker.empty()) throw std::logic_error("split: factor with empty kernel");
      Component sub;
      for (const ZVec& kv : ker) {
        ZVec v(3, 0);
        for (size_t j = 0; j < dim; ++j)
          for (int i = 0; i < 3; ++i)
            v[i] = mod_nonneg(v[i] + kv[j] * C.basis[j][i], A.p);
        sub.basis.push_back(v);
      }
      // identity of the subalgebra: e in sub with e * b = b for basis b
      size_t sd = sub.basis.size();
      ZMat Me = zmat(3 * sd, sd);
      ZVec be(3 * sd, 0);
      for (size_t bi = 0; bi < sd; ++bi) {
        for (size_t ei = 0; ei < sd; ++ei) {
          ZVec pr = A.mul(sub.basis[ei], sub.basis[bi]);
          for (int i = 0; i < 3; ++i) Me[3 * bi + i][ei] = pr[i];
        }
        for (int i = 0; i < 3; ++i) be[3 * bi + i] = sub.basis[bi][i];
      }
      auto esol = fq_solve(Me, be, A.p);
      if (!esol) throw std::logic_error("split: component has no identity");
      ZVec e(3, 0);
      for (size_t ei = 0; ei < sd; ++ei)
        for (int i = 0; i < 3; ++i)
          e[i] = mod_nonneg(e[i] + (*esol)[ei] * sub.basis[ei][i], A.p);
      sub.identity = e;
      split_component(A, sub, out);
    }
    return;
  }
  throw std::logic_error("split: could not decompose semisimple algebra");
}

}  // namespace

const std::vector<PrimeIdeal>& CubicFieldCtx::primes_above(const Int& p) const {
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto it = prime_cache_.find(p);
    if (it != prime_cache_.end()) return it->second;
  }
  std::vector<PrimeIdeal> primes;
  ZVec one = *to_integral_exact(FE::from_int(1));
  if (!mpz_divisible_p(index.get_mpz_t(), p.get_mpz_t())) {
    // p does not divide the index: split the cubic mod p
    using namespace polymod;
    Poly f = reduce({b, a, 0, 1}, p);
    for (auto& [g, m] : factor_monic(f, p)) {
      // P = pO + g(z)O
      FE gz;
      FE zgen = FE::gen();
      for (size_t i = g.size(); i-- > 0;)
        gz = mul(gz, zgen) + FE::from_int(g[i]);
      auto gzc = to_integral_exact(gz);
      if (!gzc) throw std::logic_error("primes_above: g(z) not integral");
      ZVec pone(3);
      for (int i = 0; i < 3; ++i) pone[i] = p * one[i];
      PrimeIdeal P;
      P.p = p;
      P.e = m;
      P.f_deg = deg(g);
      P.hnf = ideal_from_gens(*this, {pone, *gzc});
      primes.push_back(std::move(P));
    }
  } else {
    // p divides the index: decompose O/pO
    AlgebraModP A{this, p, {}, {}};
    // radical = kernel of x -> x^(p^m), p^m >= 3
    Int pm = p;
    while (pm < 3) pm *= p;
    ZMat Frob = zmat(3, 3);
    for (int j = 0; j < 3; ++j) {
      ZVec x(3, 0);
      x[j] = 1;
      ZVec acc = one, base = x;
      Int e2 = pm;
      while (e2 > 0) {
        if (mpz_odd_p(e2.get_mpz_t())) {
          acc = mul_int(acc, base);
          for (auto& c : acc) c = mod_nonneg(c, p);
        }
        base = mul_int(base, base);
        for (auto& c : base) c = mod_nonneg(c, p);
        e2 >>= 1;
      }
      for (int i = 0; i < 3; ++i) Frob[i][j] = acc[i];
    }
    auto rad0 = fq_kernel(Frob, 3, p);
    // echelonize the radical for reduction
    for (ZVec v : rad0) {
      for (size_t k = 0; k < A.rad.size(); ++k) {
        Int c = mod_nonneg(v[A.rad_piv[k]], p);
        if (c == 0) continue;
        for (int i = 0; i < 3; ++i)
          v[i] = mod_nonneg(v[i] - c * A.rad[k][i], p);
      }
      size_t piv = 3;
      for (size_t i = 0; i < 3; ++i)
        if (v[i] != 0) {
          piv = i;
          break;
        }
      if (piv == 3) continue;
      Int inv = invmod(v[piv], p);
      for (int i = 0; i < 3; ++i) v[i] = mod_nonneg(v[i] * inv, p);
      A.rad.push_back(v);
      A.rad_piv.push_back(piv);
    }
    Component whole;
    ZVec oneq = one;
    for (auto& c : oneq) c = mod_nonneg(c, p);
    whole.identity = A.reduce_mod_rad(oneq);
    // basis of A/rad: standard vectors at non-pivot positions
    for (size_t i = 0; i < 3; ++i) {
      if (std::find(A.rad_piv.begin(), A.rad_piv.end(), i) != A.rad_piv.end())
        continue;
      ZVec v(3, 0);
      v[i] = 1;
      whole.basis.push_back(A.reduce_mod_rad(v));
    }
    std::vector<Component> comps;
    split_component(A, whole, comps);
    // prime for component j: pO + rad + (other components)
    for (size_t cj = 0; cj < comps.size(); ++cj) {
      std::vector<ZVec> cols;
      for (int i = 0; i < 3; ++i) {
        ZVec v(3, 0);
        v[i] = p;
        cols.push_back(v);
      }
      for (const auto& v : A.rad) cols.push_back(v);
      for (size_t ck = 0; ck < comps.size(); ++ck) {
        if (ck == cj) continue;
        for (const auto& v : comps[ck].basis) cols.push_back(v);
      }
      ZMat M = zmat(3, cols.size());
      for (size_t j = 0; j < cols.size(); ++j)
        for (int i = 0; i < 3; ++i) M[i][j] = cols[j][i];
      PrimeIdeal P;
      P.p = p;
      P.f_deg = (int)comps[cj].basis.size();
      P.hnf = hnf_lattice(M);
      // the generated lattice is an ideal: stable under the basis action
      P.hnf = ideal_from_gens(*this, {{P.hnf[0][0], P.hnf[1][0], P.hnf[2][0]},
                                      {P.hnf[0][1], P.hnf[1][1], P.hnf[2][1]},
                                      {P.hnf[0][2], P.hnf[1][2], P.hnf[2][2]}});
      primes.push_back(std::move(P));
    }
  }
  std::sort(primes.begin(), primes.end(),
            [](const PrimeIdeal& x, const PrimeIdeal& y) { return x.hnf < y.hnf; });
  // ramification indices
  ZVec pone(3);
  for (int i = 0; i < 3; ++i) pone[i] = p * one[i];
  int efsum = 0;
  for (auto& P : primes) {
    P.e = valuation_int_elem(*this, pone, P);
    efsum += P.e * P.f_deg;
  }
  if (efsum != 3) throw std::logic_error("primes_above: sum e*f != 3");
  // uniformizers
  for (auto& P : primes) {
    const ZMat& P2 = prime_power(P, 2);
    ZVec t;
    for (int j = 0; j < 3; ++j) {
      ZVec col = {P.hnf[0][j], P.hnf[1][j], P.hnf[2][j]};
      if (!in_lattice(P2, col)) {
        t = col;
        break;
      }
    }
    if (t.empty()) throw std::logic_error("primes_above: P = P^2");
    if (primes.size() == 1) {
      P.pi = t;
    } else {
      std::vector<std::pair<ZMat, ZVec>> cong = {{P2, t}};
      for (const auto& Q : primes)
        if (!(Q == P)) cong.push_back({Q.hnf, one});
      P.pi = crt_elements(*this, cong);
    }
    if (valuation_int_elem(*this, P.pi, P) != 1)
      throw std::logic_error("primes_above: bad uniformizer");
  }
  std::lock_guard<std::mutex> lk(cache_mu_);
  auto [it, inserted] = prime_cache_.emplace(p, std::move(primes));
  return it->second;
}

const ZMat& CubicFieldCtx::prime_power(const PrimeIdeal& P, int k) const {
  if (k < 0) throw std::domain_error("prime_power: negative exponent");
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto& m = power_cache_[P.hnf];
    if (m.empty()) {
      m[0] = identity_mat(3);
      m[1] = P.hnf;
    }
    auto it = m.find(k);
    if (it != m.end()) return it->second;
  }
  // compute from the highest cached power
  ZMat cur;
  int have = 0;
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto& m = power_cache_[P.hnf];
    have = m.rbegin()->first;
    if (have > k) have = 1;
    cur = m[have];
  }
  std::map<int, ZMat> fresh;
  while (have < k) {
    cur = ideal_mul(*this, cur, P.hnf);
    ++have;
    fresh[have] = cur;
  }
  std::lock_guard<std::mutex> lk(cache_mu_);
  auto& m = power_cache_[P.hnf];
  for (auto& [kk, v] : fresh) m.emplace(kk, std::move(v));
  return m[k];
}

// ---------------------------------------------------------------------------
// valuations, residues, CRT

int valuation_int_elem(const CubicFieldCtx& K, const ZVec& x,
                       const PrimeIdeal& P) {
  if (x[0] == 0 && x[1] == 0 && x[2] == 0)
    throw ZeroElement("valuation of zero");
  int v = 0;
  while (v < 100000 && in_lattice(K.prime_power(P, v + 1), x)) ++v;
  if (v >= 100000) throw std::logic_error("valuation: runaway");
  return v;
}

int valuation(const CubicFieldCtx& K, const FE& x, const PrimeIdeal& P) {
  Int d = K.denominator(x);
  FE y = Rat(d) * x;
  auto yc = K.to_integral_exact(y);
  if (!yc) throw std::logic_error("valuation: denominator clearing failed");
  int vd = valuation_int(d, P.p);
  return valuation_int_elem(K, *yc, P) - P.e * vd;
}

int ideal_valuation(const CubicFieldCtx& K, const ZMat& A, const PrimeIdeal& P) {
  int v = 0;
  while (v < 100000) {
    const ZMat& Pk = K.prime_power(P, v + 1);
    bool all = true;
    for (int j = 0; j < 3 && all; ++j)
      all = in_lattice(Pk, {A[0][j], A[1][j], A[2][j]});
    if (!all) break;
    ++v;
  }
  return v;
}

ZVec unit_part(const CubicFieldCtx& K, const ZVec& x, const PrimeIdeal& P,
               int m) {
  int w = valuation_int_elem(K, x, P);
  const ZMat& Pm = K.prime_power(P, m);
  if (w == 0) return reduce_mod_lattice(Pm, x);
  // solve pi^w * beta = x  (mod P^{w+m})
  ZVec piw = {1, 0, 0};
  {
    // pi^w as an element; express 1 via the integral basis first
    auto one = K.to_integral_exact(FE::from_int(1));
    piw = *one;
    for (int i = 0; i < w; ++i) piw = K.mul_int(piw, P.pi);
  }
  ZMat A = K.mul_matrix_int(piw);
  const ZMat& H = K.prime_power(P, w + m);
  ZMat big = zmat(3, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      big[i][j] = A[i][j];
      big[i][3 + j] = H[i][j];
    }
  auto sol = solve_integer(big, x);
  if (!sol) throw std::logic_error("unit_part: no solution");
  ZVec beta = {(*sol)[0], (*sol)[1], (*sol)[2]};
  return reduce_mod_lattice(Pm, beta);
}

namespace {

// t^((Norm(P)-1)/2) in O/P, expected +-1
int residue_symbol(const CubicFieldCtx& K, const ZVec& t, const PrimeIdeal& P) {
  Int e = (P.norm() - 1) / 2;
  ZVec one = *K.to_integral_exact(FE::from_int(1));
  ZVec acc = reduce_mod_lattice(P.hnf, one);
  ZVec base = reduce_mod_lattice(P.hnf, t);
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t()))
      acc = reduce_mod_lattice(P.hnf, K.mul_int(acc, base));
    base = reduce_mod_lattice(P.hnf, K.mul_int(base, base));
    e >>= 1;
  }
  ZVec diff(3), sum(3);
  for (int i = 0; i < 3; ++i) {
    diff[i] = acc[i] - one[i];
    sum[i] = acc[i] + one[i];
  }
  if (in_lattice(P.hnf, diff)) return 1;
  if (in_lattice(P.hnf, sum)) return -1;
  throw std::logic_error("residue_symbol: value is not +-1");
}

}  // namespace

int odd_symbol(const CubicFieldCtx& K, const FE& x, const PrimeIdeal& P) {
  if (P.p == 2) throw std::domain_error("odd_symbol at an even prime");
  if (x.is_zero()) throw ZeroElement("odd_symbol of zero");
  Int d = K.denominator(x);
  FE y = Rat(d * d) * x;
  auto yc = K.to_integral_exact(y);
  ZVec beta = unit_part(K, *yc, P, 1);
  return residue_symbol(K, beta, P);
}

ZVec crt_elements(const CubicFieldCtx& K,
                  const std::vector<std::pair<ZMat, ZVec>>& congruences) {
  if (congruences.empty()) throw std::domain_error("crt: empty input");
  ZMat H = congruences[0].first;
  ZVec r = reduce_mod_lattice(H, congruences[0].second);
  for (size_t i = 1; i < congruences.size(); ++i) {
    const ZMat& H2 = congruences[i].first;
    ZVec r2 = congruences[i].second;
    ZVec diff(3);
    for (int k = 0; k < 3; ++k) diff[k] = r2[k] - r[k];
    ZMat big = zmat(3, 6);
    for (int a2 = 0; a2 < 3; ++a2)
      for (int b2 = 0; b2 < 3; ++b2) {
        big[a2][b2] = H[a2][b2];
        big[a2][3 + b2] = H2[a2][b2];
      }
    auto sol = solve_integer(big, diff);
    if (!sol) throw std::logic_error("crt: moduli not coprime");
    ZVec x(3);
    for (int k = 0; k < 3; ++k) {
      x[k] = r[k];
      for (int j = 0; j < 3; ++j) x[k] += H[k][j] * (*sol)[j];
    }
    H = ideal_mul(K, H, H2);
    r = reduce_mod_lattice(H, x);
  }
  return r;
}

}  // namespace selmer
