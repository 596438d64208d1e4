#include "selmer/descent.hpp"

#include <algorithm>

namespace selmer {

namespace {

Int int_pow(const Int& p, unsigned k) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), k);
  return r;
}

// is w a square in Q_p (w != 0)?
bool local_square(const Rat& w, const Int& p) {
  Int n = w.get_num() * w.get_den();
  int v = valuation_int(n, p);
  if (v & 1) return false;
  Int u = n / int_pow(p, v);
  if (p == 2) return ((u % 8) + 8) % 8 == 1;
  return legendre(u, p) == 1;
}

FE x_minus_root(const CurveSpec& C, const Rat& x) {
  // x - D z, whose norm is the twisted cubic at x
  return FE::from_rat(x) - (Rat(C.D) * FE::gen());
}

}  // namespace

DescentEngine::DescentEngine(CtxPtr K)
    : K_(K),
      inv_(std::make_shared<FieldInvariants>(K)),
      loc_(std::make_shared<LocalData>(K)) {}

DescentEngine::DescentEngine(std::shared_ptr<FieldInvariants> inv,
                             std::shared_ptr<LocalData> loc)
    : K_(inv->field_ptr()), inv_(std::move(inv)), loc_(std::move(loc)) {}

CurveSpec DescentEngine::make_curve(const Int& D) const {
  if (D == 0) throw std::domain_error("make_curve: D must be nonzero");
  CurveSpec C;
  C.a = K_->a;
  C.b = K_->b;
  C.D = squarefree_part(D);
  C.s_finite.push_back(2);
  Int bad = abs(C.D * K_->disc_f);
  for (const auto& [q, e] : factor(bad))
    if (q != 2 && K_->n_p(q) > 1) C.s_finite.push_back(q);
  return C;
}

std::vector<F2Vec> DescentEngine::torsion_images(const CurveSpec& C,
                                                 const Int& p) const {
  const CubicFieldCtx& K = *K_;
  int n = K.n_p(p);
  if (n < 2) throw NotApplicable("torsion_images: no local 2-torsion");
  const auto& bl = loc_->blocks(p);
  size_t w = loc_->width(p);
  std::vector<size_t> off(bl.size());
  for (size_t j = 1; j < bl.size(); ++j) off[j] = off[j - 1] + bl[j - 1].width();
  std::vector<int> rational_blocks;  // L_P = Q_p, i.e. e = f = 1
  for (size_t j = 0; j < bl.size(); ++j)
    if (bl[j].P.e == 1 && bl[j].P.f_deg == 1) rational_blocks.push_back(j);
  ZVec zc = *K.to_integral_exact(FE::gen());
  ZVec onec = *K.to_integral_exact(FE::from_int(1));
  for (int k = 16; k <= 4096; k *= 2) {
    Int pk = int_pow(p, k);
    // local roots of f: z = c mod P^k through O/P^k = Z/p^k
    std::map<int, Int> root;
    for (int j : rational_blocks) {
      const ZMat& H = K.prime_power(bl[j].P, k);
      ZMat A = zmat(3, 4);
      for (int r = 0; r < 3; ++r) {
        A[r][0] = onec[r];
        for (int c = 0; c < 3; ++c) A[r][c + 1] = H[r][c];
      }
      auto sol = solve_integer(A, zc);
      if (!sol) throw std::logic_error("torsion_images: root residue missing");
      root[j] = (((*sol)[0] % pk) + pk) % pk;
    }
    // class vectors of (D c_i, 0): component D(c_i - c_j) at the other
    // rational blocks, the derivative of the twisted cubic at the own block,
    // and the restriction of the global substitute D(c_i - z) elsewhere
    bool ok = true;
    std::vector<F2Vec> out;
    for (int i : rational_blocks) {
      F2Vec vec(w);
      FE alpha = Rat(C.D) * (FE::from_int(root[i]) - FE::gen());
      F2Vec rv;
      bool have_rv = false;
      for (size_t j = 0; j < bl.size() && ok; ++j) {
        const PrimeIdeal& P = bl[j].P;
        int margin = p == 2 ? 2 * P.e + 1 : 1;
        if ((int)j == i || root.count((int)j)) {
          Int t = (int)j == i
                      ? Int(C.D * C.D * (3 * root[i] * root[i] + C.a))
                      : Int(C.D * (root[i] - root[(int)j]));
          int v;
          // the approximation is valid only while v_p stays below k - margin
          if (t == 0 || (v = valuation_int(t, p)) + margin > k) {
            ok = false;
            break;
          }
          vec.set(off[j], v & 1);
          // unit part with respect to the block uniformizer, to match the
          // normalization of the local bit layout
          ZVec tc(3);
          for (int r = 0; r < 3; ++r) tc[r] = t * onec[r];
          if (p == 2) {
            F2Vec cls =
                loc_->even_unit_class(unit_part(K, tc, P, 2 * P.e + 1), P);
            for (int t2 = 0; t2 < bl[j].unit_dim; ++t2)
              vec.set(off[j] + 1 + t2, cls.get(t2));
          } else {
            vec.set(off[j] + 1, odd_symbol(K, FE::from_int(t), P) == -1);
          }
        } else {
          int v = valuation(K, alpha, P);
          if (v + margin > k * P.e) {
            ok = false;
            break;
          }
          if (!have_rv) {
            rv = loc_->restriction_vector(alpha, p);
            have_rv = true;
          }
          for (int t2 = 0; t2 < bl[j].width(); ++t2)
            vec.set(off[j] + t2, rv.get(off[j] + t2));
        }
      }
      if (!ok) break;
      out.push_back(vec);
    }
    if (ok) return out;
  }
  throw std::logic_error("torsion_images: precision runaway");
}

LocalImage DescentEngine::image_delta_finite(const CurveSpec& C,
                                             const Int& p) const {
  const CubicFieldCtx& K = *K_;
  int n = K.n_p(p);
  int target = p == 2 ? n : n - 1;
  size_t w = loc_->width(p);
  F2Span span(w);
  if (n >= 2)
    for (const F2Vec& t : torsion_images(C, p)) span.add(t);
  // sample points: rational x with twisted cubic a local square
  int attempts = 0;
  for (int t = 0; t < 4 && (int)span.dim() < target; ++t) {
    Int den = int_pow(p, 2 * t);
    for (Int j = 1; (int)span.dim() < target; ++j) {
      if (attempts >= sample_budget) break;
      if (t > 0 && j % p == 0) continue;
      for (int sg : {1, -1}) {
        ++attempts;
        Rat x(sg * j, den);
        x.canonicalize();
        Rat wv = Rat(C.D * C.D * C.D) *
                 eval_cubic(K.a, K.b, x / Rat(C.D));
        if (wv == 0 || !local_square(wv, p)) continue;
        span.add(loc_->restriction_vector(x_minus_root(C, x), p));
      }
    }
    if (attempts >= sample_budget) break;
  }
  if ((int)span.dim() != target)
    throw SamplingExhausted("image_delta at p=" + p.get_str() + " after " +
                            std::to_string(attempts) + " samples");
  // the image must sit inside the local norm kernel
  F2Span h1(w);
  for (const F2Vec& v : loc_->local_h1_subspace(p)) h1.add(v);
  for (const F2Vec& v : span.rows())
    if (!h1.contains(v))
      throw std::logic_error("image_delta: class outside local H^1");
  LocalImage img;
  img.place = Place::finite(p);
  img.basis = span.rows();
  img.cls = p == 2 ? ImageClass::not_applicable : classify_image(img.basis, p);
  return img;
}

LocalImage DescentEngine::image_delta_infinity(const CurveSpec& C) const {
  const CubicFieldCtx& K = *K_;
  LocalImage img;
  img.place = Place::infinity();
  if (K.epsilon == 0) return img;  // H^1(R) = 0: nothing to record
  // the nontrivial class comes from the bounded real component: any x
  // strictly between the two smallest roots of the twisted cubic
  for (int prec = 64; prec <= 4096; prec *= 2) {
    auto emb = K.embeddings(prec);
    std::vector<Ival> roots;
    for (const Ival& r : emb.real_roots)
      roots.push_back(ival_exact(Rat(C.D)) * r);
    std::sort(roots.begin(), roots.end(),
              [](const Ival& x, const Ival& y) { return x.lo < y.lo; });
    if (roots[0].hi >= roots[1].lo) continue;  // not yet separated
    Rat x = (roots[0].hi + roots[1].lo) / 2;
    Rat wv = Rat(C.D * C.D * C.D) * eval_cubic(K.a, K.b, x / Rat(C.D));
    if (wv <= 0) continue;
    F2Vec cls = loc_->restriction_infinity(x_minus_root(C, x));
    if (cls.is_zero())
      throw std::logic_error("image_delta: trivial class on bounded component");
    img.basis = {cls};
    return img;
  }
  throw SamplingExhausted("image_delta at infinity: roots not separated");
}

const LocalImage& DescentEngine::image_delta(const CurveSpec& C,
                                             const Place& v) const {
  std::pair<Int, Place> key{C.D, v};
  {
    std::lock_guard lk(mu_);
    auto it = img_cache_.find(key);
    if (it != img_cache_.end()) return it->second;
  }
  LocalImage img = v.inf ? image_delta_infinity(C) : image_delta_finite(C, v.p);
  std::lock_guard lk(mu_);
  return img_cache_.emplace(key, std::move(img)).first->second;
}

ImageClass DescentEngine::classify_image(const std::vector<F2Vec>& basis,
                                         const Int& p) const {
  if (p == 2) return ImageClass::not_applicable;
  const auto& bl = loc_->blocks(p);
  std::vector<size_t> valpos;
  size_t off = 0;
  for (const auto& B : bl) {
    valpos.push_back(off);
    off += B.width();
  }
  bool all_unr = true;
  for (const F2Vec& v : basis)
    for (size_t q : valpos)
      if (v.get(q)) all_unr = false;
  if (all_unr) return ImageClass::unramified;
  // does any nonzero element have all valuation bits zero?
  F2Matrix M(basis.size());
  for (size_t q : valpos) {
    F2Vec row(basis.size());
    for (size_t i = 0; i < basis.size(); ++i) row.set(i, basis[i].get(q));
    M.add_row(row);
  }
  for (const F2Vec& c : M.kernel()) {
    F2Vec v(basis.empty() ? 0 : basis[0].size());
    for (size_t i = 0; i < basis.size(); ++i)
      if (c.get(i)) v ^= basis[i];
    if (!v.is_zero()) return ImageClass::mixed;
  }
  return ImageClass::totally_ramified;
}

std::vector<Place> DescentEngine::default_order(const CurveSpec& C) const {
  std::vector<Place> out;
  if (K_->epsilon == 1) out.push_back(Place::infinity());
  for (const Int& q : C.s_finite) out.push_back(Place::finite(q));
  return out;
}

SelmerResult DescentEngine::chain_apply(const CurveSpec& C,
                                        const std::vector<Place>& places) const {
  const CubicFieldCtx& K = *K_;
  SelmerBasisS W = inv_->h1_global(C.s_finite);
  size_t n = W.dim();
  std::vector<F2Vec> coeff;
  for (size_t i = 0; i < n; ++i) {
    F2Vec e(n);
    e.set(i, true);
    coeff.push_back(e);
  }
  SelmerResult R;
  R.curve = C;
  for (const Place& v : places) {
    int before = (int)coeff.size();
    if (v.inf && K.epsilon == 0) {
      // restriction to H^1(R) = 0 is trivial: no condition
      R.chain.push_back({v, before, before});
      continue;
    }
    const LocalImage& img = image_delta(C, v);
    size_t w = v.inf ? (size_t)K.r1 : loc_->width(v.p);
    std::vector<F2Vec> res(n);
    for (size_t i = 0; i < n; ++i)
      res[i] = v.inf ? loc_->restriction_infinity(W.basis[i].alpha)
                     : loc_->restriction_vector(W.basis[i].alpha, v.p);
    F2Span span(w);
    for (const F2Vec& b : img.basis) span.add(b);
    std::vector<F2Vec> cur;
    for (const F2Vec& c : coeff) {
      F2Vec r(w);
      for (size_t i = 0; i < n; ++i)
        if (c.get(i)) r ^= res[i];
      cur.push_back(r);
    }
    std::vector<F2Vec> next;
    for (const F2Vec& k : preimage_basis(cur, span)) {
      F2Vec c(n);
      for (size_t j = 0; j < coeff.size(); ++j)
        if (k.get(j)) c ^= coeff[j];
      next.push_back(c);
    }
    int h1dim = v.inf ? 2 * K.epsilon : loc_->local_h1_dims(v.p).first;
    if (before - (int)next.size() > h1dim - (int)img.basis.size())
      throw std::logic_error("chain_apply: drop exceeds the local bound");
    R.chain.push_back({v, before, (int)next.size()});
    coeff = std::move(next);
  }
  for (const F2Vec& c : coeff) {
    SquareClassVector sc;
    sc.alpha = FE::from_int(1);
    for (size_t i = 0; i < n; ++i)
      if (c.get(i)) sc.alpha = K.mul(sc.alpha, W.basis[i].alpha);
    for (const auto& P : W.s_primes)
      sc.s_exponents.push_back(valuation(K, sc.alpha, P));
    Rat nm = K.norm(sc.alpha);
    sc.norm_class = squarefree_part(nm.get_num() * nm.get_den());
    R.basis.push_back(std::move(sc));
  }
  R.dim = (int)R.basis.size();
  return R;
}

SelmerResult DescentEngine::compute_sel2(const CurveSpec& C,
                                         const std::vector<Place>& order) const {
  std::vector<Place> places = order.empty() ? default_order(C) : order;
  for (const Int& q : C.s_finite)
    if (std::find(places.begin(), places.end(), Place::finite(q)) == places.end())
      throw std::invalid_argument("compute_sel2: order misses place " + q.get_str());
  if (K_->epsilon == 1 &&
      std::find(places.begin(), places.end(), Place::infinity()) == places.end())
    throw std::invalid_argument("compute_sel2: order misses the real place");
  return chain_apply(C, places);
}

SelmerResult DescentEngine::residual_group(const CurveSpec& C,
                                           const Place& v) const {
  std::vector<Place> places;
  for (const Place& q : default_order(C))
    if (!(q == v)) places.push_back(q);
  return chain_apply(C, places);
}

SelmerResult compute_sel2(CtxPtr K, const Int& D) {
  DescentEngine eng(std::move(K));
  return eng.compute_sel2(eng.make_curve(D));
}

}  // namespace selmer
