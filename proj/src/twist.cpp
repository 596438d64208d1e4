#include "selmer/twist.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <thread>

namespace selmer {

namespace {

Int int_pow(const Int& p, unsigned k) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), k);
  return r;
}

Int toggle(const Int& D, const Int& q) {
  return D % q == 0 ? Int(D / q) : Int(D * q);
}

F2Span span_of(size_t width, const std::vector<F2Vec>& basis) {
  F2Span sp(width);
  for (const auto& v : basis) sp.add(v);
  return sp;
}

bool spans_equal(size_t width, const std::vector<F2Vec>& a,
                 const std::vector<F2Vec>& b) {
  if (a.size() != b.size()) return false;
  F2Span sp = span_of(width, a);
  for (const auto& v : b)
    if (!sp.contains(v)) return false;
  return true;
}

// subgroup of the class group generated by the given class indices
std::set<int> class_closure(const ClassGroupData& cl, const std::vector<int>& gens) {
  std::set<int> sub{0};
  std::vector<int> queue{0};
  while (!queue.empty()) {
    int c = queue.back();
    queue.pop_back();
    for (int g : gens) {
      int n = cl.mul[c][g];
      if (sub.insert(n).second) queue.push_back(n);
    }
  }
  return sub;
}

int covered_count(const ClassGroupData& cl, const std::set<int>& sub) {
  int c = 0;
  for (int t : cl.two_torsion_basis)
    if (sub.count(t)) ++c;
  return c;
}

}  // namespace

TwistEngine::TwistEngine(CtxPtr K)
    : K_(K),
      inv_(std::make_shared<FieldInvariants>(K)),
      loc_(std::make_shared<LocalData>(K)),
      eng_(std::make_shared<DescentEngine>(inv_, loc_)) {}

std::vector<Int> TwistEngine::fixed_S() const {
  std::vector<Int> S{2};
  for (const auto& [q, e] : factor(abs(K_->disc_f))) {
    if (q == 2 || K_->n_p(q) != 2) continue;
    for (const auto& P : K_->primes_above(q))
      if (P.e > 1) {
        S.push_back(q);
        break;
      }
  }
  return S;
}

namespace {

// Good reduction test for E_D at an odd q with n_q = 2 unramified: after
// recentering at the rational root z3, the quadratic factor has roots of
// valuation m = v_q(D) + v(z1 - z3) at the inert prime, and their difference
// has valuation v_q(D) + v(z1 - z2).  The twist admits a good model iff m is
// even and v(z1 - z2) = v(z1 - z3); the latter cannot be changed by
// twisting, so nullopt reports an unrepairable shape.
std::optional<bool> good_reduction_n2_impl(const CubicFieldCtx& K,
                                           const CurveSpec& C, const Int& q) {
  const auto& Ps = K.primes_above(q);
  const PrimeIdeal* P1 = nullptr;  // residue degree 1
  const PrimeIdeal* P2 = nullptr;  // residue degree 2
  for (const auto& P : Ps) (P.f_deg == 1 ? P1 : P2) = &P;
  ZVec zc = *K.to_integral_exact(FE::gen());
  ZVec onec = *K.to_integral_exact(FE::from_int(1));
  FE fprime = Rat(3) * K.mul(FE::gen(), FE::gen()) + FE::from_rat(Rat(K.a));
  int uv = valuation(K, fprime, *P2);  // v(z1 - z2) + v(z1 - z3)
  for (int k = 8; k <= 4096; k *= 2) {
    const ZMat& H = K.prime_power(*P1, k);
    ZMat A = zmat(3, 4);
    for (int r = 0; r < 3; ++r) {
      A[r][0] = onec[r];
      for (int c = 0; c < 3; ++c) A[r][c + 1] = H[r][c];
    }
    auto sol = solve_integer(A, zc);
    if (!sol) throw std::logic_error("good_reduction_n2: missing root residue");
    Int qk = int_pow(q, k);
    Int c = (((*sol)[0] % qk) + qk) % qk;
    FE alpha = FE::from_int(c) - FE::gen();
    if (alpha.is_zero()) continue;
    int v = valuation(K, alpha, *P2);
    if (v + 1 > k) continue;  // approximation too coarse; retry deeper
    if (uv - v != v) return std::nullopt;
    return ((valuation_int(C.D, q) + v) % 2) == 0;
  }
  throw std::logic_error("good_reduction_n2: precision runaway");
}

}  // namespace

bool TwistEngine::good_reduction_n2(const CurveSpec& C, const Int& q) const {
  auto g = good_reduction_n2_impl(*K_, C, q);
  return g.has_value() && *g;
}

std::vector<Int> TwistEngine::t_set(const CurveSpec& C) const {
  std::vector<Int> S = fixed_S();
  std::vector<Int> T;
  for (const Int& q : C.s_finite) {
    if (q != 2 && std::find(S.begin(), S.end(), q) != S.end() &&
        eng_->image_delta(C, Place::finite(q)).cls == ImageClass::unramified)
      continue;
    T.push_back(q);
  }
  return T;
}

bool TwistEngine::h1_surjects_at_2(const CurveSpec& C) const {
  const SelmerBasisS& W = inv_->h1_global(t_set(C));
  F2Span sp((loc_->width(2)));
  for (const auto& b : W.basis) sp.add(loc_->restriction_vector(b.alpha, 2));
  return sp.dim() == loc_->local_h1_subspace(2).size();
}

std::optional<FE> TwistEngine::selmer_class_in_S(const CurveSpec& C,
                                                 const SelmerResult& sel) const {
  if (sel.basis.empty()) return std::nullopt;
  const SelmerBasisS& W = inv_->h1_global(C.s_finite);
  const SelmerBasisS& HS = inv_->h1_global(fixed_S());
  F2Span hs(W.dim());
  for (const auto& b : HS.basis) {
    auto co = inv_->express(W, b.alpha);
    if (!co) throw std::logic_error("selmer_class_in_S: S-class outside ambient group");
    hs.add(*co);
  }
  std::vector<F2Vec> img;
  for (const auto& b : sel.basis) {
    auto co = inv_->express(W, b.alpha);
    if (!co) throw std::logic_error("selmer_class_in_S: Selmer class outside ambient group");
    img.push_back(*co);
  }
  for (const auto& c : preimage_basis(img, hs)) {
    if (c.is_zero()) continue;
    FE x = FE::from_int(1);
    for (size_t i = 0; i < sel.basis.size(); ++i)
      if (c.get(i)) x = K_->mul(x, sel.basis[i].alpha);
    return x;
  }
  return std::nullopt;
}

template <class Filter, class Accept>
TwistEngine::AlphaTriple TwistEngine::search_alpha_triple(
    const CurveSpec& C, Filter filter_p, Accept accept,
    const std::string& stage) const {
  std::vector<FE> units = inv_->unit_square_basis();
  int nu = (int)units.size();
  std::vector<int> usign(nu);
  for (int j = 0; j < nu; ++j) usign[j] = K_->norm(units[j]) < 0;
  for (Int p = 3; p < prime_budget; p = next_prime(p)) {
    if (K_->disc_f % p == 0 || C.D % p == 0 || K_->index % p == 0) continue;
    if (!filter_p(p)) continue;
    if (K_->n_p(p) != 3) continue;
    const auto& Ps = K_->primes_above(p);
    std::array<FE, 3> g;
    bool principal = true;
    for (int i = 0; i < 3 && principal; ++i) {
      auto gen = inv_->principal_generator(Ps[i].hnf);
      if (gen)
        g[i] = *gen;
      else
        principal = false;
    }
    if (!principal) continue;
    // generator variants modulo unit squares with a common norm sign, so
    // that every pairwise product has square rational norm
    for (int s = 0; s < 2; ++s) {
      std::array<std::vector<FE>, 3> var;
      bool feasible = true;
      for (int i = 0; i < 3; ++i) {
        int gs = K_->norm(g[i]) < 0;
        for (int mask = 0; mask < (1 << nu); ++mask) {
          int sign = gs;
          for (int j = 0; j < nu; ++j)
            if (mask >> j & 1) sign ^= usign[j];
          if (sign != s) continue;
          FE v = g[i];
          for (int j = 0; j < nu; ++j)
            if (mask >> j & 1) v = K_->mul(v, units[j]);
          var[i].push_back(v);
        }
        if (var[i].empty()) feasible = false;
      }
      if (!feasible) continue;
      for (const FE& a0 : var[0])
        for (const FE& a1 : var[1])
          for (const FE& a2 : var[2]) {
            std::array<FE, 3> al{a0, a1, a2};
            if (accept(p, al)) return {p, al};
          }
    }
  }
  throw SearchBudgetExhausted(stage, stage + ": no qualifying prime below " +
                                         prime_budget.get_str());
}

std::pair<CurveSpec, PropertyECertificate> TwistEngine::establish_property_E(
    const Int& D0) const {
  PropertyECertificate cert;
  cert.a = K_->a;
  cert.b = K_->b;
  cert.S = fixed_S();
  const std::vector<Int>& S = cert.S;
  auto in_S = [&](const Int& q) {
    return std::find(S.begin(), S.end(), q) != S.end();
  };
  Int D = squarefree_part(D0);
  std::map<Int, int> toggled;
  const int max_rounds = 32;
  int round = 0;
  bool done = false;
  for (; round < max_rounds && !done; ++round) {
    CurveSpec C = eng_->make_curve(D);
    D = C.D;
    bool changed = false;

    // item 1: reduction shape at the odd bad primes
    for (const auto& [q, e] : factor(abs(C.D * K_->disc_f))) {
      if (q == 2) continue;
      int n = K_->n_p(q);
      if (n == 2 && !in_S(q)) {
        auto good = good_reduction_n2_impl(*K_, C, q);
        if (!good.has_value())
          throw std::runtime_error(
              "establish_property_E: reduction at " + q.get_str() +
              " cannot be repaired by twisting");
        if (!*good) {
          D = toggle(D, q);
          if (++toggled[q] > 1)
            throw std::runtime_error(
                "establish_property_E: reduction repair oscillates at " +
                q.get_str());
          cert.stages.push_back({q, 1, "reduction shape at n=2 prime"});
          changed = true;
        }
      } else if (n == 3) {
        if (eng_->image_delta(C, Place::finite(q)).cls !=
            ImageClass::totally_ramified) {
          D = toggle(D, q);
          if (++toggled[q] > 1)
            throw std::runtime_error(
                "establish_property_E: image repair oscillates at " +
                q.get_str());
          cert.stages.push_back({q, 1, "totally ramified image at n=3 prime"});
          changed = true;
        }
      }
    }
    if (changed) continue;

    // item 2: Cl(L)[2] generated by classes over the bad split primes
    const ClassGroupData& cl = inv_->class_group_2part();
    if (cl.two_rank > 0) {
      std::vector<int> gens;
      for (const Int& q : C.s_finite) {
        if (q == 2 || K_->n_p(q) != 3) continue;
        for (const auto& P : K_->primes_above(q))
          gens.push_back(inv_->class_index(P.hnf));
      }
      std::set<int> sub = class_closure(cl, gens);
      int covered = covered_count(cl, sub);
      if (covered < (int)cl.two_torsion_basis.size()) {
        bool fixed = false;
        for (Int p = 3; p < prime_budget; p = next_prime(p)) {
          if (K_->disc_f % p == 0 || D % p == 0 || K_->index % p == 0) continue;
          if (K_->n_p(p) != 3) continue;
          std::vector<int> g2 = gens;
          for (const auto& P : K_->primes_above(p))
            g2.push_back(inv_->class_index(P.hnf));
          if (covered_count(cl, class_closure(cl, g2)) > covered) {
            D *= p;
            cert.stages.push_back({p, 2, "class group coverage"});
            fixed = true;
            break;
          }
        }
        if (!fixed)
          throw SearchBudgetExhausted("establish_property_E item 2",
                                      "no class-covering prime found");
        continue;
      }
    }

    // item 3: no Selmer class supported inside S alone
    SelmerResult sel = eng_->compute_sel2(C);
    if (auto z = selmer_class_in_S(C, sel)) {
      bool fixed = false;
      for (Int p = 3; p < prime_budget; p = next_prime(p)) {
        if (K_->disc_f % p == 0 || D % p == 0 || K_->index % p == 0) continue;
        if (K_->n_p(p) != 3) continue;
        for (const auto& P : K_->primes_above(p))
          if (odd_symbol(*K_, *z, P) == -1) {
            D *= p;
            cert.stages.push_back({p, 3, "kill S-supported Selmer class"});
            fixed = true;
            break;
          }
        if (fixed) break;
      }
      if (!fixed)
        throw SearchBudgetExhausted("establish_property_E item 3",
                                    "no detecting prime found");
      continue;
    }

    // item 4: conditions at infinity and at the odd ramified S-primes bite
    std::vector<Place> order;
    if (K_->epsilon) order.push_back(Place::infinity());
    order.push_back(Place::finite(2));
    std::vector<Int> rest;
    for (const Int& q : C.s_finite)
      if (q != 2) rest.push_back(q);
    std::sort(rest.begin(), rest.end(), [&](const Int& x, const Int& y) {
      bool sx = in_S(x), sy = in_S(y);
      if (sx != sy) return sx;
      return x < y;
    });
    for (const Int& q : rest) order.push_back(Place::finite(q));
    SelmerResult chain = eng_->compute_sel2(C, order);
    std::map<Place, int> drop;
    for (const auto& st : chain.chain)
      drop[st.place] = st.dim_before - st.dim_after;

    auto finite_trivial_except = [&](const std::array<FE, 3>& al,
                                     const Int* except) {
      // products alpha_i alpha_j restrict trivially at a finite place iff
      // all three alpha_i restrict to the same class there
      for (const Int& q : C.s_finite) {
        if (except && q == *except) continue;
        F2Vec r0 = loc_->restriction_vector(al[0], q);
        if (loc_->restriction_vector(al[1], q) != r0 ||
            loc_->restriction_vector(al[2], q) != r0)
          return false;
      }
      return true;
    };

    if (K_->epsilon == 1 && drop[Place::infinity()] < 1) {
      const LocalImage& inf = eng_->image_delta(C, Place::infinity());
      F2Span isp = span_of(K_->r1, inf.basis);
      auto accept = [&](const Int&, std::array<FE, 3>& al) {
        if (!finite_trivial_except(al, nullptr)) return false;
        for (int i = 0; i < 3; ++i)
          for (int j = i + 1; j < 3; ++j) {
            F2Vec sg = loc_->restriction_infinity(K_->mul(al[i], al[j]));
            if (!isp.contains(sg)) return true;
          }
        return false;
      };
      AlphaTriple at = search_alpha_triple(
          C, [](const Int&) { return true; }, accept,
          "establish_property_E item 4 (infinity)");
      D *= at.p;
      cert.stages.push_back({at.p, 4, "condition at infinity"});
      continue;
    }

    bool fixed4 = false;
    for (const Int& q : S) {
      if (q == 2) continue;
      const LocalImage& img = eng_->image_delta(C, Place::finite(q));
      if (img.cls == ImageClass::unramified) continue;
      if (drop[Place::finite(q)] >= 1) continue;
      F2Span qsp = span_of(loc_->width(q), img.basis);
      auto accept = [&](const Int&, std::array<FE, 3>& al) {
        if (!finite_trivial_except(al, &q)) return false;
        if (K_->epsilon == 1) {
          F2Vec s0 = loc_->restriction_infinity(al[0]);
          if (loc_->restriction_infinity(al[1]) != s0 ||
              loc_->restriction_infinity(al[2]) != s0)
            return false;
        }
        for (int i = 0; i < 3; ++i)
          for (int j = i + 1; j < 3; ++j) {
            F2Vec rv = loc_->restriction_vector(K_->mul(al[i], al[j]), q);
            if (!qsp.contains(rv)) return true;
          }
        return false;
      };
      AlphaTriple at = search_alpha_triple(
          C, [](const Int&) { return true; }, accept,
          "establish_property_E item 4 (q = " + q.get_str() + ")");
      D *= at.p;
      cert.stages.push_back({at.p, 4, "condition at " + q.get_str()});
      fixed4 = true;
      break;
    }
    if (fixed4) continue;

    // item 5: classes over the bad set surject onto H^1(Q_2)
    if (!h1_surjects_at_2(C)) {
      const SelmerBasisS& W = inv_->h1_global(t_set(C));
      F2Span sp2((loc_->width(2)));
      for (const auto& b : W.basis)
        sp2.add(loc_->restriction_vector(b.alpha, 2));
      auto accept = [&](const Int&, std::array<FE, 3>& al) {
        for (int i = 0; i < 3; ++i)
          for (int j = i + 1; j < 3; ++j) {
            F2Vec rv = loc_->restriction_vector(K_->mul(al[i], al[j]), 2);
            if (!sp2.contains(rv)) return true;
          }
        return false;
      };
      AlphaTriple at = search_alpha_triple(
          C, [](const Int&) { return true; }, accept,
          "establish_property_E item 5");
      D *= at.p;
      cert.stages.push_back({at.p, 5, "image at 2"});
      continue;
    }

    done = true;
  }
  if (!done)
    throw SearchBudgetExhausted("establish_property_E",
                                "hypotheses not established within the round budget");

  // final verification pass
  CurveSpec C = eng_->make_curve(D);
  cert.D = C.D;
  {
    ItemCheck& it = cert.items[0];
    it.item = 1;
    it.pass = true;
    it.vacuous = true;
    for (const auto& [q, e] : factor(abs(C.D * K_->disc_f))) {
      if (q == 2) continue;
      int n = K_->n_p(q);
      if (n == 2 && !in_S(q)) {
        it.vacuous = false;
        if (!good_reduction_n2(C, q)) it.pass = false;
      } else if (n == 3) {
        it.vacuous = false;
        if (eng_->image_delta(C, Place::finite(q)).cls !=
            ImageClass::totally_ramified)
          it.pass = false;
      }
    }
    it.note = it.vacuous ? "no odd bad primes with n > 1 outside S" : "";
  }
  {
    ItemCheck& it = cert.items[1];
    it.item = 2;
    const ClassGroupData& cl = inv_->class_group_2part();
    if (cl.two_rank == 0) {
      it.pass = true;
      it.vacuous = true;
      it.note = "class number odd";
    } else {
      std::vector<int> gens;
      for (const Int& q : C.s_finite) {
        if (q == 2 || K_->n_p(q) != 3) continue;
        for (const auto& P : K_->primes_above(q))
          gens.push_back(inv_->class_index(P.hnf));
      }
      it.pass = covered_count(cl, class_closure(cl, gens)) ==
                (int)cl.two_torsion_basis.size();
    }
  }
  SelmerResult sel = eng_->compute_sel2(C);
  {
    ItemCheck& it = cert.items[2];
    it.item = 3;
    it.pass = !selmer_class_in_S(C, sel).has_value();
  }
  {
    ItemCheck& it = cert.items[3];
    it.item = 4;
    it.pass = true;
    it.vacuous = true;
    std::vector<Place> order;
    if (K_->epsilon) order.push_back(Place::infinity());
    order.push_back(Place::finite(2));
    std::vector<Int> rest;
    for (const Int& q : C.s_finite)
      if (q != 2) rest.push_back(q);
    std::sort(rest.begin(), rest.end(), [&](const Int& x, const Int& y) {
      bool sx = in_S(x), sy = in_S(y);
      if (sx != sy) return sx;
      return x < y;
    });
    for (const Int& q : rest) order.push_back(Place::finite(q));
    SelmerResult chain = eng_->compute_sel2(C, order);
    std::map<Place, int> drop;
    for (const auto& st : chain.chain)
      drop[st.place] = st.dim_before - st.dim_after;
    if (K_->epsilon == 1) {
      it.vacuous = false;
      if (drop[Place::infinity()] < 1) it.pass = false;
    }
    for (const Int& q : S) {
      if (q == 2) continue;
      if (eng_->image_delta(C, Place::finite(q)).cls == ImageClass::unramified)
        continue;
      it.vacuous = false;
      if (drop[Place::finite(q)] < 1) it.pass = false;
    }
    if (it.vacuous) it.note = "no real conditions (eps = 0) and no ramified images in S";
  }
  {
    ItemCheck& it = cert.items[4];
    it.item = 5;
    it.pass = h1_surjects_at_2(C);
  }
  cert.all_pass = true;
  for (const auto& it : cert.items) cert.all_pass &= it.pass;
  if (!cert.all_pass)
    throw std::runtime_error(
        "establish_property_E: verification failed after fixed point");
  return {C, cert};
}

DescentData TwistEngine::choose_descent_data(const CurveSpec& C,
                                             const SelmerResult& sel) const {
  if (sel.dim < 2)
    throw NoEligiblePair("choose_descent_data: dim Sel_2 < 2");
  std::vector<Int> S = fixed_S();
  auto in_S = [&](const Int& q) {
    return std::find(S.begin(), S.end(), q) != S.end();
  };

  // split primes of the bad set, and all primes above the bad set
  std::vector<Int> split_q;
  for (const Int& q : C.s_finite)
    if (q != 2 && K_->n_p(q) == 3 && !in_S(q)) split_q.push_back(q);

  struct Cand {
    FE alpha;
    // per split q: indices of primes above q where the valuation is odd
    std::map<Int, std::vector<int>> odd_at;
  };
  int dim = sel.dim;
  std::vector<Cand> cand(size_t(1) << dim);
  for (int m = 1; m < (1 << dim); ++m) {
    FE x = FE::from_int(1);
    for (int i = 0; i < dim; ++i)
      if (m >> i & 1) x = K_->mul(x, sel.basis[i].alpha);
    Cand c;
    c.alpha = x;
    for (const Int& q : split_q) {
      std::vector<int> odd;
      const auto& Ps = K_->primes_above(q);
      for (int j = 0; j < (int)Ps.size(); ++j)
        if (valuation(*K_, x, Ps[j]) & 1) odd.push_back(j);
      if (!odd.empty()) {
        if (odd.size() != 2)
          throw std::logic_error(
              "choose_descent_data: support at a split prime is not two ideals");
        c.odd_at[q] = odd;
      }
    }
    cand[m] = c;
  }

  for (int mx = 1; mx < (1 << dim); ++mx) {
    const Cand& cx = cand[mx];
    if (cx.odd_at.empty()) continue;
    for (int my = 1; my < (1 << dim); ++my) {
      if (my == mx) continue;
      const Cand& cy = cand[my];
      if (cy.odd_at.empty()) continue;
      Int q1 = cx.odd_at.begin()->first;
      // prefer a y-support prime different from q1
      Int q2 = 0;
      for (const auto& [q, odd] : cy.odd_at)
        if (q != q1) {
          q2 = q;
          break;
        }
      if (q2 == 0) q2 = cy.odd_at.begin()->first;

      DescentData dd;
      dd.x = cx.alpha;
      dd.y = cy.alpha;
      dd.q1 = q1;
      dd.q2 = q2;
      const auto& xodd = cx.odd_at.at(q1);
      dd.xP = {xodd[0], xodd[1]};
      const auto& yodd = cy.odd_at.at(q2);
      dd.yP = {yodd[0], yodd[1]};

      if (q1 == q2) {
        // shared prime shape: x over {P1, P2}, y over {P2, P3} with exactly
        // one prime in common
        std::vector<int> common;
        for (int i : xodd)
          if (std::find(yodd.begin(), yodd.end(), i) != yodd.end())
            common.push_back(i);
        if (common.size() != 1) continue;
        int shared = common[0];
        dd.xP = {xodd[0] == shared ? xodd[1] : xodd[0], shared};
        dd.yP = {shared, yodd[0] == shared ? yodd[1] : yodd[0]};
      } else {
        const auto& P2s = K_->primes_above(q2);
        for (int j = 0; j < 3; ++j)
          dd.d[j] = valuation(*K_, dd.x, P2s[j]) & 1;
        const auto& P1s = K_->primes_above(q1);
        for (int j = 0; j < 3; ++j)
          dd.e[j] = valuation(*K_, dd.y, P1s[j]) & 1;
        if ((dd.d[0] + dd.d[1] + dd.d[2]) % 2 != 0 ||
            (dd.e[0] + dd.e[1] + dd.e[2]) % 2 != 0)
          throw std::logic_error("choose_descent_data: odd total exponent");
        if (dd.d[dd.yP[0]] == 1 && dd.d[dd.yP[1]] == 1) continue;
        if (dd.e[dd.xP[0]] == 1 && dd.e[dd.xP[1]] == 1) continue;
      }

      // condition order with q1, q2 last, to locate the sacrificial place
      std::vector<Place> order;
      if (K_->epsilon) order.push_back(Place::infinity());
      order.push_back(Place::finite(2));
      std::vector<Int> rest;
      for (const Int& q : C.s_finite)
        if (q != 2 && q != q1 && q != q2) rest.push_back(q);
      std::sort(rest.begin(), rest.end(), [&](const Int& a2, const Int& b2) {
        bool sa = in_S(a2), sb = in_S(b2);
        if (sa != sb) return sa;
        return a2 < b2;
      });
      for (const Int& q : rest) order.push_back(Place::finite(q));
      order.push_back(Place::finite(q1));
      if (q2 != q1) order.push_back(Place::finite(q2));
      dd.order = order;

      SelmerResult chain = eng_->compute_sel2(C, order);
      Int qstar = 0;
      for (const auto& st : chain.chain) {
        if (st.place.inf || st.place.p == 2) continue;
        const Int& q = st.place.p;
        if (q == q1 || q == q2) continue;
        if (K_->n_p(q) != 3) continue;
        if (st.dim_before - st.dim_after < 2) {
          qstar = q;
          break;
        }
      }
      if (qstar == 0) {
        dd.qstar = q2;
        dd.case_tag = q1 == q2 ? 'c' : 'b';
        dd.starP = q1 == q2 ? std::array<int, 2>{dd.xP[0], dd.xP[1]} : dd.yP;
      } else {
        dd.qstar = qstar;
        dd.case_tag = q1 == q2 ? 'd' : 'a';
        dd.starP = {0, 1};
      }
      const auto& Pss = K_->primes_above(dd.qstar);
      for (int j = 0; j < 3; ++j) {
        dd.s[j] = valuation(*K_, dd.x, Pss[j]) & 1;
        dd.t[j] = valuation(*K_, dd.y, Pss[j]) & 1;
      }
      return dd;
    }
  }
  throw std::logic_error("choose_descent_data: no admissible pair of classes");
}

SymbolPrime TwistEngine::search_symbol_prime(const CurveSpec& C,
                                             const DescentData& dd,
                                             const Int& above) const {
  const auto& starPs = K_->primes_above(dd.qstar);
  const PrimeIdeal& S1 = starPs[dd.starP[0]];
  const PrimeIdeal& S2 = starPs[dd.starP[1]];
  std::array<int, 3> roles{0, 1, 2};

  auto filter = [&](const Int& p) {
    if (p <= above) return false;
    if (p % 8 != 1) return false;
    if (K_->n_p(p) != 3) return false;
    // x and y must restrict onto independent unramified classes at p
    const auto& Ps = K_->primes_above(p);
    int xb = (odd_symbol(*K_, dd.x, Ps[0]) < 0) |
             ((odd_symbol(*K_, dd.x, Ps[1]) < 0) << 1);
    int yb = (odd_symbol(*K_, dd.y, Ps[0]) < 0) |
             ((odd_symbol(*K_, dd.y, Ps[1]) < 0) << 1);
    return xb != 0 && yb != 0 && xb != yb;
  };

  auto accept = [&](const Int& p, std::array<FE, 3>& al) {
    // sign pattern at qstar: (a1 a2 / P1) = -1, (a1 a2 / P2) = +1,
    //                        (a2 a3 / P1) = +1, (a2 a3 / P2) = -1
    int b[3], c[3];
    for (int i = 0; i < 3; ++i) {
      b[i] = odd_symbol(*K_, al[i], S1) < 0;
      c[i] = odd_symbol(*K_, al[i], S2) < 0;
    }
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& pm : perms) {
      if ((b[pm[0]] ^ b[pm[1]]) == 1 && (c[pm[0]] ^ c[pm[1]]) == 0 &&
          (b[pm[1]] ^ b[pm[2]]) == 0 && (c[pm[1]] ^ c[pm[2]]) == 1) {
        std::array<FE, 3> re{al[pm[0]], al[pm[1]], al[pm[2]]};
        // role i now generates the prime the variant of slot pm[i] came from
        const auto& Ps = K_->primes_above(p);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j)
            if (valuation(*K_, re[i], Ps[j]) == 1) roles[i] = j;
        }
        al = re;
        return true;
      }
    }
    return false;
  };

  AlphaTriple at =
      search_alpha_triple(C, filter, accept, "search_symbol_prime");

  SymbolPrime sp;
  sp.p = at.p;
  sp.alpha = at.alpha;
  const auto& Pp = K_->primes_above(at.p);
  auto fill = [&](const Int& q, std::array<std::array<int, 3>, 3>& T) {
    const auto& Ps = K_->primes_above(q);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) T[i][j] = odd_symbol(*K_, sp.alpha[i], Ps[j]);
  };
  fill(dd.q1, sp.T);
  fill(dd.q2, sp.Tt);
  fill(dd.qstar, sp.Ts);
  for (int i = 0; i < 3; ++i) {
    sp.x_at_p[i] = odd_symbol(*K_, dd.x, Pp[i]);
    sp.y_at_p[i] = odd_symbol(*K_, dd.y, Pp[i]);
  }

  // product-formula cross check: for w in {x, y} and each pair product pi,
  // the symbols of w at the primes generated by the pair match the symbols
  // of the product over the odd support of w, corrected by the real places
  const SelmerBasisS& W = inv_->h1_global(C.s_finite);
  auto check = [&](const char* wn, const FE& w, const char* pn, const FE& pair,
                   int i, int j) {
    int lhs = odd_symbol(*K_, w, Pp[roles[i]]) * odd_symbol(*K_, w, Pp[roles[j]]);
    int rhs = 1;
    for (const auto& P : W.s_primes) {
      if (P.p == 2) continue;
      if (valuation(*K_, w, P) & 1) rhs *= odd_symbol(*K_, pair, P);
    }
    std::vector<int> sw = K_->real_signs(w), spr = K_->real_signs(pair);
    for (size_t k = 0; k < sw.size(); ++k)
      if (sw[k] < 0 && spr[k] < 0) rhs = -rhs;
    IdentityRecord rec{std::string(wn) + " vs " + pn, lhs, rhs, lhs == rhs};
    sp.reciprocity.push_back(rec);
    if (!rec.pass)
      throw std::logic_error("search_symbol_prime: product formula violated");
  };
  FE a12 = K_->mul(sp.alpha[0], sp.alpha[1]);
  FE a23 = K_->mul(sp.alpha[1], sp.alpha[2]);
  check("x", dd.x, "alpha1 alpha2", a12, 0, 1);
  check("x", dd.x, "alpha2 alpha3", a23, 1, 2);
  check("y", dd.y, "alpha1 alpha2", a12, 0, 1);
  check("y", dd.y, "alpha2 alpha3", a23, 1, 2);
  return sp;
}

Int TwistEngine::search_inert_companion(const CurveSpec& C,
                                        const Int& p) const {
  for (Int r = 3; r < prime_budget; r = next_prime(r)) {
    if (r == p || C.D % r == 0 || K_->disc_f % r == 0) continue;
    if (r % 8 != 1) continue;
    if (K_->n_p(r) != 1) continue;
    bool ok = true;
    for (const Int& q : C.s_finite) {
      if (q == 2) continue;
      if (legendre(p, q) * legendre(r, q) != 1) {
        ok = false;
        break;
      }
    }
    if (ok) return r;
  }
  throw SearchBudgetExhausted("search_inert_companion",
                              "no inert companion below " +
                                  prime_budget.get_str());
}

std::pair<CurveSpec, DescentStepCertificate> TwistEngine::descend_once(
    const CurveSpec& C) const {
  SelmerResult sel = eng_->compute_sel2(C);
  DescentData dd = choose_descent_data(C, sel);
  std::vector<Int> rejected;
  Int above = 0;
  while (true) {
    DescentStepCertificate cert;
    cert.D_before = C.D;
    cert.dim_before = sel.dim;
    cert.data = dd;
    // throws SearchBudgetExhausted once the candidates run out
    cert.sp = search_symbol_prime(C, dd, above);
    above = cert.sp.p;
    try {
      cert.r = search_inert_companion(C, cert.sp.p);

      CurveSpec Cn = eng_->make_curve(C.D * cert.sp.p * cert.r);
      cert.D_after = Cn.D;
      cert.h1_before = (int)inv_->h1_global(C.s_finite).dim();
      cert.h1_after = (int)inv_->h1_global(Cn.s_finite).dim();
      if (cert.h1_after != cert.h1_before + 2)
        throw DescentFailed("descend_once: ambient dimension did not jump by 2");

      // the twist by p r is locally square at every old bad place, so the
      // local images there must not move
      cert.images_equal = true;
      std::vector<Place> places{Place::infinity()};
      for (const Int& q : C.s_finite) places.push_back(Place::finite(q));
      for (const Place& v : places) {
        const LocalImage& a = eng_->image_delta(C, v);
        const LocalImage& b = eng_->image_delta(Cn, v);
        size_t w = v.inf ? K_->r1 : loc_->width(v.p);
        if (!spans_equal(w, a.basis, b.basis)) cert.images_equal = false;
      }
      if (!cert.images_equal)
        throw DescentFailed(
            "descend_once: local image moved at an old bad place");

      SelmerResult seln = eng_->compute_sel2(Cn);
      cert.dim_after = seln.dim;
      cert.ledger = seln.chain;
      if (seln.dim >= sel.dim)
        throw DescentFailed("descend_once: dimension did not decrease (" +
                            std::to_string(sel.dim) + " -> " +
                            std::to_string(seln.dim) + " at D = " +
                            Cn.D.get_str() + ")");
      cert.rejected = rejected;
      return {Cn, cert};
    } catch (const DescentFailed&) {
      rejected.push_back(cert.sp.p);
    }
  }
}

TwistSearchResult TwistEngine::find_small_selmer_twist(const Int& D0) const {
  TwistSearchResult out;
  auto [C, prop] = establish_property_E(D0);
  out.prop = prop;
  SelmerResult R = eng_->compute_sel2(C);
  while (R.dim > 1) {
    auto [Cn, cert] = descend_once(C);
    out.steps.push_back(cert);
    C = Cn;
    R = eng_->compute_sel2(C);
  }
  out.D = C.D;
  out.dim = R.dim;
  out.n_steps = (int)out.steps.size();
  return out;
}

std::vector<ScanRow> TwistEngine::distribution_scan(const Int& X,
                                                    int threads) const {
  std::vector<Int> Ds;
  for (Int D = 1 - X; D < X; ++D) {
    if (D == 0) continue;
    if (squarefree_part(D) != D) continue;
    Ds.push_back(D);
  }
  std::vector<ScanRow> rows(Ds.size());
  auto work = [&](int t) {
    for (size_t i = t; i < Ds.size(); i += (size_t)threads) {
      auto t0 = std::chrono::steady_clock::now();
      SelmerResult R = eng_->compute_sel2(eng_->make_curve(Ds[i]));
      auto t1 = std::chrono::steady_clock::now();
      rows[i] = {Ds[i], R.dim, (int)R.chain.size(),
                 (long)std::chrono::duration_cast<std::chrono::milliseconds>(
                     t1 - t0)
                     .count()};
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace selmer
