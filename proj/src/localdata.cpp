#include "selmer/localdata.hpp"

#include <set>

#include "selmer/sunits.hpp"

namespace selmer {

namespace {

// some integral x with v_P(x) = 0 whose residue is a non-square in O/P
ZVec nonresidue_at(const CubicFieldCtx& K, const PrimeIdeal& P) {
  const Int& p = P.p;
  Int box = p * p * p;
  for (Int t = 1; t < box; ++t) {
    ZVec v = {t % p, (t / p) % p, (t / (p * p)) % p};
    if (in_lattice(P.hnf, v)) continue;
    if (odd_symbol(K, K.from_integral(v), P) == -1) return v;
  }
  throw std::logic_error("nonresidue_at: search exhausted");
}

}  // namespace

LocalData::LocalData(CtxPtr K) : K_(std::move(K)) {}

const std::vector<LocalData::Block>& LocalData::blocks(const Int& p) const {
  std::lock_guard lk(mu_);
  auto it = block_cache_.find(p);
  if (it != block_cache_.end()) return it->second;
  std::vector<Block> bl;
  for (const auto& P : K_->primes_above(p))
    bl.push_back({P, p == 2 ? P.e * P.f_deg + 1 : 1});
  return block_cache_.emplace(p, std::move(bl)).first->second;
}

size_t LocalData::width(const Int& p) const {
  size_t w = 0;
  for (const auto& B : blocks(p)) w += B.width();
  return w;
}

const LocalData::EvenBasis& LocalData::even_basis_locked(const PrimeIdeal& P) const {
  auto it = even_cache_.find(P.hnf);
  if (it != even_cache_.end()) return it->second;
  const CubicFieldCtx& K = *K_;
  EvenBasis eb;
  eb.m = 2 * P.e + 1;
  eb.modulus = K.prime_power(P, eb.m);
  // units of O/P^m, as the canonical box transversal of the HNF lattice
  std::vector<ZVec> units;
  const Int &d0 = eb.modulus[0][0], &d1 = eb.modulus[1][1], &d2 = eb.modulus[2][2];
  for (Int i0 = 0; i0 < d0; ++i0)
    for (Int i1 = 0; i1 < d1; ++i1)
      for (Int i2 = 0; i2 < d2; ++i2) {
        ZVec v = {i0, i1, i2};
        if (!in_lattice(P.hnf, v)) units.push_back(v);
      }
  // squares detected mod P^{2e+1} determine squares in U_P (Hensel)
  std::set<ZVec> squares;
  for (const ZVec& u : units)
    squares.insert(reduce_mod_lattice(eb.modulus, K.mul_int(u, u)));
  // coset decomposition: grow a basis, doubling the known region each step
  std::map<ZVec, int> mask;
  for (const ZVec& s : squares) mask[s] = 0;
  std::vector<ZVec> basis;
  for (const ZVec& u : units) {
    if (mask.count(u)) continue;
    int bit = 1 << basis.size();
    basis.push_back(u);
    std::vector<std::pair<ZVec, int>> snap(mask.begin(), mask.end());
    for (const auto& [r, c] : snap)
      mask[reduce_mod_lattice(eb.modulus, K.mul_int(u, r))] = c | bit;
  }
  if (mask.size() != units.size())
    throw std::logic_error("even_unit_class: coset decomposition incomplete");
  eb.dim = (int)basis.size();
  if (eb.dim != P.e * P.f_deg + 1)
    throw DimensionMismatch("U_P/U_P^2 dimension differs from d+1");
  eb.basis_res = basis;
  for (const auto& [r, c] : mask) {
    F2Vec v(eb.dim);
    for (int k = 0; k < eb.dim; ++k)
      if (c & (1 << k)) v.set(k, true);
    eb.table.emplace(r, v);
  }
  return even_cache_.emplace(P.hnf, std::move(eb)).first->second;
}

F2Vec LocalData::even_unit_class(const ZVec& u, const PrimeIdeal& P) const {
  const EvenBasis* eb;
  {
    std::lock_guard lk(mu_);
    eb = &even_basis_locked(P);
  }
  ZVec r = reduce_mod_lattice(eb->modulus, u);
  if (in_lattice(P.hnf, r))
    throw NonUnitArgument("even_unit_class: element lies in P");
  return eb->table.at(r);
}

F2Vec LocalData::restriction_vector(const FE& alpha, const Int& p) const {
  if (alpha.is_zero()) throw ZeroElement("restriction_vector: zero element");
  const CubicFieldCtx& K = *K_;
  // scale by a square to clear denominators; the class is unchanged
  Int d = K.denominator(alpha);
  FE scaled = Rat(d * d) * alpha;
  ZVec g = *K.to_integral_exact(scaled);
  const auto& bl = blocks(p);
  F2Vec out(width(p));
  size_t off = 0;
  for (const auto& B : bl) {
    int v = valuation_int_elem(K, g, B.P);
    out.set(off, v & 1);
    if (p == 2) {
      ZVec u = unit_part(K, g, B.P, 2 * B.P.e + 1);
      F2Vec uc = even_unit_class(u, B.P);
      for (int k = 0; k < B.unit_dim; ++k) out.set(off + 1 + k, uc.get(k));
    } else {
      out.set(off + 1, odd_symbol(K, scaled, B.P) == -1);
    }
    off += B.width();
  }
  return out;
}

F2Vec LocalData::restriction_infinity(const FE& alpha) const {
  if (alpha.is_zero()) throw ZeroElement("restriction_infinity: zero element");
  auto signs = K_->real_signs(alpha);
  F2Vec out(signs.size());
  for (size_t i = 0; i < signs.size(); ++i) out.set(i, signs[i] < 0);
  return out;
}

std::pair<int, int> LocalData::local_h1_dims(const Int& p) const {
  int n = K_->n_p(p);
  if (p == 2) return {2 * n, n};
  return {2 * (n - 1), n - 1};
}

std::pair<int, int> LocalData::local_h1_dims_infinity() const {
  int e = K_->epsilon;
  return {2 * e, e};
}

F2Vec LocalData::rational_class(const Rat& x, const Int& p) const {
  if (x == 0) throw ZeroElement("rational_class: zero element");
  Int n = x.get_num() * x.get_den();
  int v = valuation_int(n, p);
  Int u = n;
  for (int i = 0; i < v; ++i) u /= p;
  if (p == 2) {
    // u = (-1)^s 5^t mod 8; bits [v mod 2, s, t]
    F2Vec out(3);
    out.set(0, v & 1);
    Int m8 = ((u % 8) + 8) % 8;
    out.set(1, m8 == 3 || m8 == 7);
    out.set(2, m8 == 3 || m8 == 5);
    return out;
  }
  F2Vec out(2);
  out.set(0, v & 1);
  out.set(1, legendre(u, p) == -1);
  return out;
}

const std::vector<F2Vec>& LocalData::local_h1_subspace(const Int& p) const {
  {
    std::lock_guard lk(mu_);
    auto it = h1_cache_.find(p);
    if (it != h1_cache_.end()) return it->second;
  }
  const CubicFieldCtx& K = *K_;
  const auto& bl = blocks(p);
  // global elements whose classes span all of ⊕_P L_P*/(L_P*)^2:
  // uniformizers plus units hitting each unit-class generator at one P
  // while being 1 at the others
  std::vector<FE> gens;
  for (const auto& B : bl) gens.push_back(K.from_integral(B.P.pi));
  ZVec one = {Int(1), Int(0), Int(0)};
  if (p == 2) {
    for (size_t i = 0; i < bl.size(); ++i) {
      std::vector<ZVec> basis_i;
      std::vector<ZMat> moduli(bl.size());
      {
        std::lock_guard lk(mu_);
        basis_i = even_basis_locked(bl[i].P).basis_res;
        for (size_t j = 0; j < bl.size(); ++j)
          moduli[j] = even_basis_locked(bl[j].P).modulus;
      }
      for (const ZVec& b : basis_i) {
        std::vector<std::pair<ZMat, ZVec>> cong;
        for (size_t j = 0; j < bl.size(); ++j)
          cong.push_back({moduli[j], i == j ? b : one});
        gens.push_back(K.from_integral(crt_elements(K, cong)));
      }
    }
  } else {
    for (size_t i = 0; i < bl.size(); ++i) {
      ZVec nr = nonresidue_at(K, bl[i].P);
      std::vector<std::pair<ZMat, ZVec>> cong;
      for (size_t j = 0; j < bl.size(); ++j)
        cong.push_back({bl[j].P.hnf, i == j ? nr : one});
      gens.push_back(K.from_integral(crt_elements(K, cong)));
    }
  }
  std::vector<F2Vec> rvec;
  F2Span full(width(p));
  for (const FE& g : gens) {
    rvec.push_back(restriction_vector(g, p));
    full.add(rvec.back());
  }
  if (full.dim() != width(p))
    throw std::logic_error("local_h1_subspace: generators do not span L_p*/2");
  // kernel of the norm: combinations whose rational norm class is trivial
  size_t nbits = p == 2 ? 3 : 2;
  std::vector<F2Vec> nc;
  for (const FE& g : gens) nc.push_back(rational_class(K.norm(g), p));
  F2Matrix M(gens.size());
  for (size_t j = 0; j < nbits; ++j) {
    F2Vec row(gens.size());
    for (size_t i = 0; i < gens.size(); ++i) row.set(i, nc[i].get(j));
    M.add_row(row);
  }
  F2Span sub(width(p));
  for (const F2Vec& c : M.kernel()) {
    F2Vec v(width(p));
    for (size_t i = 0; i < gens.size(); ++i)
      if (c.get(i)) v ^= rvec[i];
    sub.add(v);
  }
  if ((int)sub.dim() != local_h1_dims(p).first)
    throw DimensionMismatch("local H^1 dimension differs from norm kernel");
  std::lock_guard lk(mu_);
  return h1_cache_.emplace(p, sub.rows()).first->second;
}

const std::vector<F2Vec>& LocalData::local_h1_subspace_infinity() const {
  std::lock_guard lk(mu_);
  if (!h1_inf_) {
    std::vector<F2Vec> rows;
    if (K_->epsilon == 1) {
      // sign vectors with trivial product (= trivial norm class)
      F2Vec v1(3), v2(3);
      v1.set(0, true), v1.set(1, true);
      v2.set(1, true), v2.set(2, true);
      rows = {v1, v2};
    }
    h1_inf_ = std::move(rows);
  }
  return *h1_inf_;
}

}  // namespace selmer
