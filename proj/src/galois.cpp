#include "selmer/galois.hpp"

#include <algorithm>
#include <array>

#include "polymod.hpp"
#include "selmer/localdata.hpp"

namespace selmer {

namespace {

Int pm(const Int& x, const Int& q) {
  Int r = x % q;
  if (r < 0) r += q;
  return r;
}

// residue of an exact rational mod q; the denominator must be a unit
Int ratmod(const Rat& c, const Int& q) {
  Int den = c.get_den();
  if (den % q == 0)
    throw BadSplitting("residue: denominator not coprime to " + q.get_str());
  return pm(pm(c.get_num(), q) * invmod(pm(den, q), q), q);
}

// F_q(W) with W^2 = d (d = 0 marks the prime field): pairs (x0, x1)
struct Fq2 {
  Int q, d;
  using E = std::pair<Int, Int>;
  E make(const Int& x0, const Int& x1) const { return {pm(x0, q), pm(x1, q)}; }
  E add(const E& x, const E& y) const { return make(x.first + y.first, x.second + y.second); }
  E mul(const E& x, const E& y) const {
    return make(x.first * y.first + d * x.second * y.second,
                x.first * y.second + x.second * y.first);
  }
  E scale(const Rat& c, const E& x) const {
    Int s = ratmod(c, q);
    return make(s * x.first, s * x.second);
  }
  Int norm(const E& x) const { return pm(x.first * x.first - d * x.second * x.second, q); }
};

// value of an L-element under z1 -> r
Fq2::E eval_fe(const Fq2& F, const FE& x, const Fq2::E& r) {
  Fq2::E acc = F.scale(x.c[2], {1, 0});
  acc = F.add(F.mul(acc, r), F.scale(x.c[1], {1, 0}));
  acc = F.add(F.mul(acc, r), F.scale(x.c[0], {1, 0}));
  return acc;
}

Ival eval_fe_ival(const FE& x, const Ival& r) {
  Ival acc = ival_exact(x.c[2]);
  acc = acc * r + ival_exact(x.c[1]);
  acc = acc * r + ival_exact(x.c[0]);
  return acc;
}

}  // namespace

ClosureCtx::ClosureCtx(CtxPtr K) : K_(std::move(K)) {
  delta = squarefree_part(K_->disc_f);
  cofac = *exact_sqrt(K_->disc_f / delta);
  galois = (delta == 1);
  // the other roots of f are (-z1 +- cofac/f'(z1) sqrt(delta)) / 2
  FE fprime;
  fprime.c[0] = K_->a;
  fprime.c[2] = 3;
  FE half_s = Rat(cofac, 2) * K_->inv(fprime);
  z2_ = {Rat(-1, 2) * FE::gen(), half_s};
  if (galois) z2_ = {z2_.u + half_s, FE()};
  // sanity: sigma is a field map of order three
  ME z = galois ? from_L(FE::gen()) : ME{FE::gen(), FE()};
  ME im = sigma(sigma(sigma(z)));
  if (!(im == z)) throw std::logic_error("closure: sigma does not have order 3");
  ME fz2 = add(mul(z2_, mul(z2_, z2_)),
               add({Rat(K_->a) * z2_.u, Rat(K_->a) * z2_.v},
                   from_L(FE::from_int(K_->b))));
  if (!(fz2 == ME{}))
    throw std::logic_error("closure: sigma(z1) is not a root of f");
}

ME ClosureCtx::mul(const ME& x, const ME& y) const {
  return {K_->mul(x.u, y.u) + Rat(delta) * K_->mul(x.v, y.v),
          K_->mul(x.u, y.v) + K_->mul(x.v, y.u)};
}

FE ClosureCtx::norm_L(const ME& x) const {
  return K_->mul(x.u, x.u) - Rat(delta) * K_->mul(x.v, x.v);
}

ME ClosureCtx::sigma(const ME& x) const {
  auto on_L = [&](const FE& c) {
    ME acc = from_L(FE::from_rat(c.c[2]));
    acc = add(mul(acc, z2_), from_L(FE::from_rat(c.c[1])));
    acc = add(mul(acc, z2_), from_L(FE::from_rat(c.c[0])));
    return acc;
  };
  ME su = on_L(x.u), sv = on_L(x.v);
  return add(su, mul(sv, sqrt_delta()));
}

FE ClosureCtx::sigma_L(const FE& x) const {
  if (!galois) throw std::logic_error("sigma_L: closure is a proper extension");
  return sigma(from_L(x)).u;
}

SplitType ClosureCtx::split_type(const PrimeIdeal& P) const {
  if (P.p == 2) throw EvenPrime("split_type: even prime");
  FE d = FE::from_int(delta);
  if (valuation(*K_, d, P) > 0) return SplitType::ramified;
  return odd_symbol(*K_, d, P) == 1 ? SplitType::split : SplitType::inert;
}

std::vector<ClosurePrime> ClosureCtx::primes_over(const Int& q) const {
  if (q == 2) throw EvenPrime("primes_over: even prime");
  if (!is_prime(q) || K_->disc_f % q == 0 || K_->index % q == 0)
    throw BadSplitting("primes_over: " + q.get_str() + " not usable");
  auto roots = polymod::roots_squarefree(
      polymod::reduce({K_->b, K_->a, 0, 1}, q), q);
  int ld = legendre(pm(delta, q), q);
  std::vector<ClosurePrime> out;
  if (roots.size() == 3 && ld == 1) {
    Int w = mod_sqrt(pm(delta, q), q);
    for (const Int& r : roots) {
      out.push_back({q, r, 0, w, 0, 0, 1});
      out.push_back({q, r, 0, q - w, 0, 0, 1});
    }
  } else if (roots.size() == 1 && ld == -1) {
    // n_q = 2: the rational root carries the f=1 prime of L, inert in M/L;
    // the conjugate pair (-r0 +- s1 W)/2 with s1 = cofac/f'(r0) carries the
    // f=2 prime P1, split in M/L
    Int r0 = roots[0], d = pm(delta, q);
    Int inv2 = invmod(2, q);
    Int s1 = pm(cofac * invmod(pm(3 * r0 * r0 + K_->a, q), q), q);
    out.push_back({q, r0, 0, 0, 1, d, 2});
    out.push_back({q, pm(-r0 * inv2, q), pm(s1 * inv2, q), 0, 1, d, 2});
    out.push_back({q, pm(-r0 * inv2, q), pm(-s1 * inv2, q), 0, 1, d, 2});
  } else {
    throw BadSplitting("primes_over: splitting type (" +
                       std::to_string(roots.size()) + ", " +
                       std::to_string(ld) + ") unsupported");
  }
  return out;
}

std::pair<Int, Int> ClosureCtx::residue(const ME& x, const ClosurePrime& Q) const {
  Fq2 F{Q.q, Q.wsq};
  Fq2::E r = F.make(Q.r0, Q.r1), w = F.make(Q.w0, Q.w1);
  return F.add(eval_fe(F, x.u, r), F.mul(eval_fe(F, x.v, r), w));
}

ClosurePrime ClosureCtx::apply_tau(const ClosurePrime& Q) const {
  ClosurePrime R = Q;
  R.w0 = pm(-Q.w0, Q.q);
  R.w1 = pm(-Q.w1, Q.q);
  if (R.f == 2 && R.w1 != 1) {
    // normalize the Frobenius orbit back to the w = +W representative
    R.r1 = pm(-R.r1, R.q);
    R.w0 = pm(-R.w0, R.q);
    R.w1 = pm(-R.w1, R.q);
  }
  return R;
}

ClosurePrime ClosureCtx::apply_sigma(const ClosurePrime& Q) const {
  // the moved prime has hom z1 -> old-hom(sigma^2 z1); sqrt(delta) is fixed
  ME z3 = sigma(z2_);
  auto r = residue(z3, Q);
  ClosurePrime R = Q;
  R.r0 = r.first;
  R.r1 = r.second;
  return R;
}

int ClosureCtx::closure_symbol(const ME& x, const ClosurePrime& Q) const {
  auto [A, B] = residue(x, Q);
  Int n = Q.f == 1 ? A : Fq2{Q.q, Q.wsq}.norm({A, B});
  if (n == 0) throw NonUnitArgument("closure_symbol: argument in the prime");
  return legendre(n, Q.q);
}

std::vector<int> ClosureCtx::real_symbols(const ME& x) const {
  if (delta < 0) return {};
  std::vector<int> out;
  for (int prec = 64;; prec *= 2) {
    out.clear();
    Embeddings em = K_->embeddings(prec);
    Ival sd = ival_sqrt(ival_exact(Rat(delta)), prec);
    bool ok = true;
    for (const Ival& r : em.real_roots) {
      Ival u = eval_fe_ival(x.u, r), v = eval_fe_ival(x.v, r);
      for (int s : {1, -1}) {
        Ival val = s == 1 ? u + v * sd : u - v * sd;
        if (val.sign() == 0) {
          ok = false;
          break;
        }
        out.push_back(val.sign());
      }
      if (!ok) break;
    }
    if (ok) return out;
    if (prec > (1 << 14))
      throw std::runtime_error("real_symbols: sign undetermined (zero value?)");
  }
}

namespace {

// certifies rho is a prime element over an odd p splitting completely in M
Int certify_prime_element(const ClosureCtx& cc, const ME& rho) {
  Rat n = cc.norm_Q(rho);
  if (n.get_den() != 1)
    throw HypothesisViolation("rho is not integral at its norm");
  Int p = abs(n.get_num());
  if (!is_prime(p) || p == 2)
    throw HypothesisViolation("N(rho) = " + p.get_str() + " is not an odd prime");
  if (cc.base().n_p(p) != 3 || legendre(pm(cc.delta, p), p) != 1)
    throw HypothesisViolation("p = " + p.get_str() +
                              " does not split completely in the closure");
  return p;
}

void push(ActionReport& rep, std::string name, int lhs, int rhs) {
  bool pass = lhs == rhs;
  rep.checks.push_back({std::move(name), lhs, rhs, pass});
  rep.all_pass = rep.all_pass && pass;
}

}  // namespace

ActionReport check_action_relations(const ClosureCtx& cc, const ME& rho1,
                                    const Int& q, bool conjugate_q1) {
  if (cc.galois)
    throw std::logic_error("check_action_relations: use the Galois variant");
  Int p = certify_prime_element(cc, rho1);
  if (q == p) throw HypothesisViolation("q must differ from p");

  ME rho2 = cc.sigma(rho1), rho3 = cc.sigma(rho2);
  std::array<ME, 3> rho{rho1, rho2, rho3};
  std::array<ME, 3> alpha;
  for (int i = 0; i < 3; ++i) alpha[i] = cc.from_L(cc.norm_L(rho[i]));

  ActionReport rep;
  auto Qs = cc.primes_over(q);

  // N_{L/Q}(alpha_i alpha_j) is a rational square for i != j
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}}) {
    Rat n = cc.base().norm(cc.mul(alpha[i], alpha[j]).u);
    push(rep, "N(a" + std::to_string(i + 1) + "a" + std::to_string(j + 1) + ") square",
         n.get_den() == 1 && is_square(n.get_num()) ? 1 : 0, 1);
  }

  if (Qs[0].f == 1) {
    rep.case_tag = "split_completely";
    std::array<ClosurePrime, 3> Q;
    Q[0] = Qs[0];
    Q[1] = cc.apply_sigma(Q[0]);
    Q[2] = cc.apply_sigma(Q[1]);
    int prod12 = 1;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ClosurePrime tQ = cc.apply_tau(Q[j]);
        std::string nm = "a" + std::to_string(i + 1) + "/P" + std::to_string(j + 1);
        int aij = cc.closure_symbol(alpha[i], Q[j]);
        push(rep, nm, aij,
             cc.closure_symbol(rho[i], Q[j]) * cc.closure_symbol(rho[i], tQ));
        if (i < 2) prod12 *= aij;
        if (i == 1) {
          // the same value through rho1 at the sigma^2-translated primes
          ClosurePrime s2Q = cc.apply_sigma(cc.apply_sigma(Q[j]));
          ClosurePrime s2tQ = cc.apply_sigma(cc.apply_sigma(tQ));
          push(rep, nm + " via rho1", aij,
               cc.closure_symbol(rho1, s2Q) * cc.closure_symbol(rho1, s2tQ));
        }
      }
    }
    // free-variable constraint: the twelve i<=2 symbols multiply to 1
    push(rep, "prod a1,a2 over P1..P3", prod12, 1);
    // a1 a2 a3 = N_{M/Q}(rho1) in Q
    Int np = cc.norm_Q(rho1).get_num();
    for (int j = 0; j < 3; ++j) {
      int lhs = 1;
      for (int i = 0; i < 3; ++i) lhs *= cc.closure_symbol(alpha[i], Q[j]);
      push(rep, "a1a2a3/P" + std::to_string(j + 1), lhs, legendre(pm(np, q), q));
    }
  } else {
    // n_q = 2: P1 the f=2 prime (split in M/L into Q1, tau Q1), P2 the
    // rational-root prime (inert in M/L with the single prime Q2)
    ClosurePrime Q2 = Qs[0], Q1 = Qs[conjugate_q1 ? 2 : 1];
    ClosurePrime tQ1 = cc.apply_tau(Q1);
    ClosurePrime sQ1 = cc.apply_sigma(Q1);
    if (sQ1 == tQ1)
      rep.case_tag = "sigmaQ1_eq_tauQ1";
    else if (sQ1 == Q2)
      rep.case_tag = "sigmaQ1_eq_Q2";
    else
      throw std::logic_error("check_action_relations: sigma fixes Q1");
    for (int i = 0; i < 3; ++i)
      push(rep, "a" + std::to_string(i + 1) + "/P1",
           cc.closure_symbol(alpha[i], Q1),
           cc.closure_symbol(rho[i], Q1) * cc.closure_symbol(rho[i], tQ1));
    ClosurePrime s2Q1 = cc.apply_sigma(sQ1);
    int rhs = cc.closure_symbol(rho1, s2Q1) *
              cc.closure_symbol(rho1, sQ1 == tQ1 ? Q1 : Q2);
    push(rep, "a2/P1 via rho1 (" + rep.case_tag + ")",
         cc.closure_symbol(alpha[1], Q1), rhs);
  }
  return rep;
}

ActionReport check_action_relations_galois(const ClosureCtx& cc,
                                           const FE& alpha1, const Int& q) {
  if (!cc.galois)
    throw std::logic_error("check_action_relations_galois: closure is proper");
  Int p = certify_prime_element(cc, cc.from_L(alpha1));
  if (q == p) throw HypothesisViolation("q must differ from p");
  auto Qs = cc.primes_over(q);
  if (Qs[0].f != 1) throw BadSplitting("q must split completely");

  std::array<ClosurePrime, 3> P;
  P[0] = Qs[0];
  P[1] = cc.apply_sigma(P[0]);
  P[2] = cc.apply_sigma(P[1]);
  std::array<FE, 3> alpha{alpha1, cc.sigma_L(alpha1), cc.sigma_L(cc.sigma_L(alpha1))};

  // (a1/P_j) = (a2/P_{j+1}) = (a3/P_{j+2}), indices mod 3
  ActionReport rep;
  rep.case_tag = "galois";
  for (int j = 0; j < 3; ++j) {
    int base = cc.closure_symbol(cc.from_L(alpha[0]), P[j]);
    for (int i = 1; i < 3; ++i)
      push(rep,
           "a1/P" + std::to_string(j + 1) + " = a" + std::to_string(i + 1) +
               "/P" + std::to_string((j + i) % 3 + 1),
           base, cc.closure_symbol(cc.from_L(alpha[i]), P[(j + i) % 3]));
  }
  int prod = 1;
  for (int j = 0; j < 3; ++j) prod *= cc.closure_symbol(cc.from_L(alpha1), P[j]);
  Int np = cc.base().norm(alpha1).get_num();
  push(rep, "a1 over all P = (N(a1)/q)", prod, legendre(pm(np, q), q));
  return rep;
}

ReciprocityReport check_reciprocity(const ClosureCtx& cc, const FE& x,
                                    const ME& rho) {
  if (cc.galois)
    throw std::logic_error("check_reciprocity: closure is a proper extension");
  const CubicFieldCtx& K = cc.base();
  Int p = certify_prime_element(cc, rho);
  // rho = 1 mod 8 O_M, certified through the suborder O_L + O_L sqrt(delta)
  if (!K.is_integral(Rat(1, 8) * (rho.u - FE::from_int(1))) ||
      !K.is_integral(Rat(1, 8) * rho.v))
    throw HypothesisViolation("rho is not 1 mod 8");
  for (int s : cc.real_symbols(rho))
    if (s < 0) throw HypothesisViolation("rho is not totally positive");

  Rat nx = K.norm(x);
  if (nx == 0) throw HypothesisViolation("x must be nonzero");
  Int supp = abs(nx.get_num() * nx.get_den());
  if (supp % p == 0) throw HypothesisViolation("x must be coprime to p");

  // (x/rho): evaluate x at the residue hom that kills rho
  ReciprocityReport rep;
  {
    bool found = false;
    for (const ClosurePrime& Q : cc.primes_over(p)) {
      auto [A, B] = cc.residue(rho, Q);
      if (A == 0 && B == 0) {
        rep.lhs = cc.closure_symbol(cc.from_L(x), Q);
        found = true;
        break;
      }
    }
    if (!found) throw std::logic_error("check_reciprocity: prime of rho not found");
  }

  // product of (N_{M/L}(rho) / P) over odd unramified P with odd v_P(x);
  // ramified primes of M/L enter x O_M with even exponent and drop out
  FE alpha = cc.norm_L(rho);
  rep.rhs = 1;
  for (auto& [ell, e] : factor(supp)) {
    (void)e;
    for (const PrimeIdeal& P : K.primes_above(ell)) {
      int v = valuation(K, x, P);
      if (v % 2 == 0) continue;
      if (ell == 2)
        throw HypothesisViolation("x must have even valuation at even primes");
      if (valuation(K, FE::from_int(cc.delta), P) > 0) continue;
      rep.rhs *= odd_symbol(K, alpha, P);
    }
  }
  rep.pass = rep.lhs == rep.rhs;
  return rep;
}

}  // namespace selmer
