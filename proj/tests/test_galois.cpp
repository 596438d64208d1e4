#include <doctest.h>

#include <random>
#include <set>

#include "selmer/galois.hpp"
#include "selmer/localdata.hpp"

using namespace selmer;

namespace {

ME random_me(const ClosureCtx&, std::mt19937& rng, int spread) {
  std::uniform_int_distribution<int> d(-spread, spread);
  ME x;
  for (int i = 0; i < 3; ++i) {
    x.u.c[i] = d(rng);
    x.v.c[i] = d(rng);
  }
  return x;
}

// random rho with |N_{M/Q}(rho)| an odd prime splitting completely in M
ME find_prime_element(const ClosureCtx& cc, std::mt19937& rng,
                      const Int& avoid = 1) {
  for (int t = 0; t < 100000; ++t) {
    ME rho = random_me(cc, rng, 4);
    Rat n = cc.norm_Q(rho);
    if (n.get_den() != 1) continue;
    Int p = abs(n.get_num());
    if (p < 3 || !is_prime(p) || p == avoid) continue;
    if (cc.base().disc_f % p == 0 || cc.base().index % p == 0) continue;
    if (cc.base().n_p(p) != 3) continue;
    Int d = cc.delta % p;
    if (legendre(d < 0 ? d + p : d, p) != 1) continue;
    return rho;
  }
  REQUIRE(false);
  return {};
}

// odd primes q <= bound, usable for primes_over, with the requested n_q
std::vector<Int> good_q(const ClosureCtx& cc, int n_q, Int bound) {
  std::vector<Int> out;
  for (Int q = 3; q < bound; q = next_prime(q)) {
    if (cc.base().disc_f % q == 0 || cc.base().index % q == 0) continue;
    if (cc.base().n_p(q) != n_q) continue;
    Int d = cc.delta % q;
    int ld = cc.delta == 1 ? 1 : legendre(d < 0 ? d + q : d, q);
    if ((n_q == 3 && ld == 1) || (n_q == 2 && ld == -1)) out.push_back(q);
  }
  return out;
}

}  // namespace

TEST_CASE("closure construction: discriminant square classes") {
  ClosureCtx c1(build_field(0, -2));  // disc -108 = -3 * 36
  CHECK(c1.delta == -3);
  CHECK(c1.cofac == 6);
  CHECK(!c1.galois);
  ClosureCtx c2(build_field(1, 1));  // disc -31
  CHECK(c2.delta == -31);
  CHECK(c2.cofac == 1);
  ClosureCtx c3(build_field(-3, -1));  // disc 81: Galois, closure is L itself
  CHECK(c3.delta == 1);
  CHECK(c3.cofac == 9);
  CHECK(c3.galois);
  CHECK(build_field(-3, -1)->is_galois);
}

TEST_CASE("sigma and tau generate S3") {
  std::mt19937 rng(7);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}, {3, 2}}) {
    ClosureCtx cc(build_field(a, b));
    ME z = {FE::gen(), FE()};
    ME z2 = cc.second_root();
    // three distinct roots, sigma cycling through them
    CHECK(cc.sigma(z) == z2);
    CHECK(!(z2 == z));
    CHECK(cc.sigma(cc.sigma(cc.sigma(z))) == z);
    CHECK(cc.tau(cc.tau(z2)) == z2);
    // tau sigma tau = sigma^2 on random elements
    for (int t = 0; t < 5; ++t) {
      ME x = random_me(cc, rng, 6);
      CHECK(cc.tau(cc.sigma(cc.tau(x))) == cc.sigma(cc.sigma(x)));
      // sigma and tau are ring maps
      ME y = random_me(cc, rng, 6);
      CHECK(cc.sigma(cc.mul(x, y)) == cc.mul(cc.sigma(x), cc.sigma(y)));
      CHECK(cc.tau(cc.mul(x, y)) == cc.mul(cc.tau(x), cc.tau(y)));
      // norms to L are tau-invariant, norms to Q are S3-invariant
      CHECK(cc.norm_L(x) == cc.norm_L(cc.tau(x)));
      CHECK(cc.norm_Q(x) == cc.norm_Q(cc.sigma(x)));
    }
  }
}

TEST_CASE("sigma on L in the Galois case") {
  ClosureCtx cc(build_field(-3, -1));
  FE z = FE::gen();
  FE z2 = cc.sigma_L(z);
  CHECK(!(z2 == z));
  // a root of f, and the orbit closes after three steps
  const auto& K = cc.base();
  FE fz2 = K.mul(z2, K.mul(z2, z2)) + Rat(-3) * z2 + FE::from_int(-1);
  CHECK(fz2.is_zero());
  CHECK(cc.sigma_L(cc.sigma_L(z2)) == z);
}

TEST_CASE("split type of odd primes in M/L") {
  ClosureCtx cc(build_field(0, -2));  // delta = -3
  const auto& K = cc.base();
  // -3 is a square mod q iff q = 1 mod 3
  CHECK(cc.split_type(K.primes_above(7)[0]) == SplitType::split);
  CHECK(cc.split_type(K.primes_above(5)[0]) == SplitType::inert);
  CHECK(cc.split_type(K.primes_above(31)[0]) == SplitType::split);
  for (const auto& P : K.primes_above(3))
    CHECK(cc.split_type(P) == SplitType::ramified);
  CHECK_THROWS_AS(cc.split_type(K.primes_above(2)[0]), EvenPrime);
}

TEST_CASE("primes over a split-completely rational prime") {
  ClosureCtx cc(build_field(0, -2));
  auto qs = good_q(cc, 3, 200);
  REQUIRE(!qs.empty());
  for (const Int& q : qs) {
    auto Qs = cc.primes_over(q);
    REQUIRE(Qs.size() == 6);
    for (const auto& Q : Qs) {
      CHECK(Q.f == 1);
      CHECK(cc.apply_tau(cc.apply_tau(Q)) == Q);
      CHECK(!(cc.apply_tau(Q) == Q));
      ClosurePrime s3 = cc.apply_sigma(cc.apply_sigma(cc.apply_sigma(Q)));
      CHECK(s3 == Q);
      CHECK(!(cc.apply_sigma(Q) == Q));
      // the moved primes are again in the list
      bool found = false;
      for (const auto& R : Qs) found = found || R == cc.apply_sigma(Q);
      CHECK(found);
    }
  }
  CHECK_THROWS_AS(cc.primes_over(2), EvenPrime);
  CHECK_THROWS_AS(cc.primes_over(3), BadSplitting);   // ramified
  CHECK_THROWS_AS(cc.primes_over(7), BadSplitting);   // inert, n_q = 1
  CHECK(cc.primes_over(31).size() == 6);
}

TEST_CASE("primes over an n_q = 2 prime") {
  ClosureCtx cc(build_field(1, 1));  // delta = -31
  auto qs = good_q(cc, 2, 150);
  REQUIRE(!qs.empty());
  for (const Int& q : qs) {
    auto Qs = cc.primes_over(q);
    REQUIRE(Qs.size() == 3);
    CHECK(cc.apply_tau(Qs[0]) == Qs[0]);  // the inert prime is tau-fixed
    CHECK(cc.apply_tau(Qs[1]) == Qs[2]);
    for (const auto& Q : Qs) {
      CHECK(Q.f == 2);
      CHECK(cc.apply_sigma(cc.apply_sigma(cc.apply_sigma(Q))) == Q);
      bool found = false;
      for (const auto& R : Qs) found = found || R == cc.apply_sigma(Q);
      CHECK(found);
    }
  }
}

TEST_CASE("closure symbol restricts to the odd residue symbol on L") {
  std::mt19937 rng(11);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}}) {
    ClosureCtx cc(build_field(a, b));
    const auto& K = cc.base();
    for (const Int& q : good_q(cc, 3, 120)) {
      auto Qs = cc.primes_over(q);
      for (const auto& Q : Qs) {
        // the L-prime under Q is the one containing z - r
        const PrimeIdeal* under = nullptr;
        for (const auto& P : K.primes_above(q))
          if (valuation(K, FE::gen() - FE::from_int(Q.r0), P) > 0) under = &P;
        REQUIRE(under != nullptr);
        for (int t = 0; t < 4; ++t) {
          FE x = random_me(cc, rng, 9).u;
          if (x.is_zero() || valuation(K, x, *under) != 0) continue;
          CHECK(cc.closure_symbol(cc.from_L(x), Q) == odd_symbol(K, x, *under));
        }
      }
    }
  }
}

TEST_CASE("closure symbol is multiplicative") {
  std::mt19937 rng(13);
  ClosureCtx cc(build_field(1, 1));
  auto check_at = [&](const ClosurePrime& Q) {
    for (int t = 0; t < 10; ++t) {
      ME x = random_me(cc, rng, 9), y = random_me(cc, rng, 9);
      try {
        int s = cc.closure_symbol(cc.mul(x, y), Q);
        CHECK(s == cc.closure_symbol(x, Q) * cc.closure_symbol(y, Q));
      } catch (const NonUnitArgument&) {
      }
    }
  };
  for (const auto& Q : cc.primes_over(good_q(cc, 3, 300)[0])) check_at(Q);
  for (const auto& Q : cc.primes_over(good_q(cc, 2, 300)[0])) check_at(Q);
  CHECK_THROWS_AS(cc.closure_symbol(ME{}, cc.primes_over(good_q(cc, 3, 300)[0])[0]),
                  NonUnitArgument);
}

TEST_CASE("real symbols of closure elements") {
  ClosureCtx cc(build_field(-4, 1));  // totally real, delta = 229
  REQUIRE(cc.delta > 0);
  // six real embeddings
  CHECK(cc.real_symbols(cc.from_L(FE::from_int(1))) ==
        std::vector<int>(6, 1));
  CHECK(cc.real_symbols(cc.from_L(FE::from_int(-2))) ==
        std::vector<int>(6, -1));
  // sqrt(delta) itself changes sign between the two extensions of each
  // embedding of L
  auto s = cc.real_symbols(cc.sqrt_delta());
  REQUIRE(s.size() == 6);
  for (int i = 0; i < 6; i += 2) {
    CHECK(s[i] == 1);
    CHECK(s[i + 1] == -1);
  }
  // complex closure: no real places
  ClosureCtx cn(build_field(0, -2));
  CHECK(cn.real_symbols(cn.sqrt_delta()).empty());
}

TEST_CASE("symbol identities under the S3-action: split completely") {
  std::mt19937 rng(17);
  int instances = 0;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}}) {
    ClosureCtx cc(build_field(a, b));
    auto qs = good_q(cc, 3, 400);
    REQUIRE(qs.size() >= 2);
    for (int t = 0; t < 8; ++t) {
      ME rho = find_prime_element(cc, rng);
      for (size_t k = 0; k < 2; ++k) {
        Int q = qs[(t + k) % qs.size()];
        if (q == abs(cc.norm_Q(rho).get_num())) continue;
        ActionReport rep = check_action_relations(cc, rho, q);
        CHECK(rep.case_tag == "split_completely");
        CHECK(rep.all_pass);
        for (const auto& c : rep.checks) CHECK(c.pass);
        ++instances;
      }
    }
  }
  CHECK(instances >= 25);
}

TEST_CASE("symbol identities under the S3-action: n_q = 2") {
  std::mt19937 rng(19);
  int instances = 0;
  std::set<std::string> tags;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}}) {
    ClosureCtx cc(build_field(a, b));
    auto qs = good_q(cc, 2, 300);
    REQUIRE(!qs.empty());
    for (int t = 0; t < 5; ++t) {
      ME rho = find_prime_element(cc, rng);
      for (size_t k = 0; k < 3 && k < qs.size(); ++k) {
        Int q = qs[(t + k) % qs.size()];
        if (q == abs(cc.norm_Q(rho).get_num())) continue;
        // both labelings of the conjugate pair over the f=2 prime, which
        // flip between the two sigma-action cases
        for (bool conj : {false, true}) {
          ActionReport rep = check_action_relations(cc, rho, q, conj);
          CHECK((rep.case_tag == "sigmaQ1_eq_tauQ1" ||
                 rep.case_tag == "sigmaQ1_eq_Q2"));
          tags.insert(rep.case_tag);
          CHECK(rep.all_pass);
        }
        ++instances;
      }
    }
  }
  CHECK(instances >= 25);
  CHECK(tags.size() == 2);  // both splitting cases occur
}

TEST_CASE("symbol identities in the Galois case") {
  std::mt19937 rng(23);
  ClosureCtx cc(build_field(-3, -1));
  const auto& K = cc.base();
  auto qs = good_q(cc, 3, 400);
  REQUIRE(qs.size() >= 3);
  int instances = 0;
  std::uniform_int_distribution<int> d(-5, 5);
  while (instances < 26) {
    FE alpha;
    for (int i = 0; i < 3; ++i) alpha.c[i] = d(rng);
    Rat n = K.norm(alpha);
    if (n.get_den() != 1) continue;
    Int p = abs(n.get_num());
    if (p < 3 || !is_prime(p) || K.disc_f % p == 0 || K.n_p(p) != 3) continue;
    Int q = qs[instances % qs.size()];
    if (q == p) continue;
    ActionReport rep = check_action_relations_galois(cc, alpha, q);
    CHECK(rep.case_tag == "galois");
    CHECK(rep.all_pass);
    ++instances;
  }
}

TEST_CASE("action relation hypothesis violations") {
  ClosureCtx cc(build_field(0, -2));
  // norm 4: not a prime element
  CHECK_THROWS_AS(check_action_relations(cc, cc.from_L(FE::from_int(2)), 31),
                  HypothesisViolation);
  std::mt19937 rng(29);
  ME rho = find_prime_element(cc, rng);
  Int p = abs(cc.norm_Q(rho).get_num());
  CHECK_THROWS_AS(check_action_relations(cc, rho, p), HypothesisViolation);
  CHECK_THROWS_AS(check_action_relations(cc, rho, 3), BadSplitting);
  ClosureCtx cg(build_field(-3, -1));
  CHECK_THROWS_AS(check_action_relations(cg, rho, 31), std::logic_error);
}

TEST_CASE("reciprocity for totally positive prime elements 1 mod 8") {
  std::mt19937 rng(31);
  int instances = 0;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}}) {
    ClosureCtx cc(build_field(a, b));
    const auto& K = cc.base();
    while (instances < (a == 0 ? 13 : 26)) {
      // rho = 1 + 8 gamma is 1 mod 8 O_M by construction
      ME gamma = random_me(cc, rng, 1);
      ME rho = cc.add(cc.from_L(FE::from_int(1)),
                      {Rat(8) * gamma.u, Rat(8) * gamma.v});
      Rat n = cc.norm_Q(rho);
      Int p = abs(n.get_num());
      if (n.get_den() != 1 || p < 3 || !is_prime(p)) continue;
      if (K.disc_f % p == 0 || K.index % p == 0 || K.n_p(p) != 3) continue;
      Int d = cc.delta % p;
      if (legendre(d < 0 ? d + p : d, p) != 1) continue;
      // x: a random integral element with odd norm coprime to p
      FE x;
      std::uniform_int_distribution<int> dx(-20, 20);
      for (int i = 0; i < 3; ++i) x.c[i] = dx(rng);
      Rat nx = K.norm(x);
      if (nx == 0 || nx.get_num() % 2 == 0 || nx.get_num() % p == 0) continue;
      ReciprocityReport rep = check_reciprocity(cc, x, rho);
      CHECK(rep.pass);
      CHECK(rep.lhs == rep.rhs);
      ++instances;
    }
  }
  CHECK(instances >= 26);
}

TEST_CASE("reciprocity hypothesis violations") {
  ClosureCtx cc(build_field(0, -2));
  std::mt19937 rng(37);
  // a prime element that is not 1 mod 8
  for (int t = 0; t < 100000; ++t) {
    ME rho = random_me(cc, rng, 4);
    Rat n = cc.norm_Q(rho);
    if (n.get_den() != 1) continue;
    Int p = abs(n.get_num());
    if (p < 3 || !is_prime(p) || cc.base().disc_f % p == 0) continue;
    if (cc.base().n_p(p) != 3) continue;
    Int d = cc.delta % p;
    if (legendre(d < 0 ? d + p : d, p) != 1) continue;
    if (cc.base().is_integral(Rat(1, 8) * (rho.u - FE::from_int(1))) &&
        cc.base().is_integral(Rat(1, 8) * rho.v))
      continue;
    CHECK_THROWS_AS(check_reciprocity(cc, FE::from_int(3), rho),
                    HypothesisViolation);
    break;
  }
  // not a prime element at all
  CHECK_THROWS_AS(check_reciprocity(cc, FE::from_int(3), cc.from_L(FE::from_int(15))),
                  HypothesisViolation);
}
