#include <random>

#include "doctest.h"
#include "selmer/ideals.hpp"

using namespace selmer;

TEST_CASE("splitting of small primes in Q(cbrt 2)") {
  auto K = build_field(0, -2);

  // 31: 4^3 = 64 = 2 + 2*31, so x^3 - 2 splits completely
  const auto& P31 = K->primes_above(31);
  CHECK(P31.size() == 3);
  for (const auto& P : P31) {
    CHECK(P.e == 1);
    CHECK(P.f_deg == 1);
    CHECK(P.norm() == 31);
  }

  // 3 is totally ramified: x^3 - 2 = (x+1)^3 mod 3
  const auto& P3 = K->primes_above(3);
  REQUIRE(P3.size() == 1);
  CHECK(P3[0].e == 3);
  CHECK(P3[0].f_deg == 1);

  // 2 is totally ramified
  const auto& P2 = K->primes_above(2);
  REQUIRE(P2.size() == 1);
  CHECK(P2[0].e == 3);

  // 5: x^3 - 2 = (x - 3)(x^2 + 3x + 4) mod 5
  const auto& P5 = K->primes_above(5);
  REQUIRE(P5.size() == 2);
}

TEST_CASE("2 is inert in the field of x^3 + x + 1") {
  auto K = build_field(1, 1);
  const auto& P2 = K->primes_above(2);
  REQUIRE(P2.size() == 1);
  CHECK(P2[0].f_deg == 3);
  CHECK(P2[0].e == 1);
  CHECK(P2[0].norm() == 8);
}

TEST_CASE("splitting at an index prime") {
  auto K = build_field(0, -4);  // index 2
  REQUIRE(K->index == 2);
  const auto& P2 = K->primes_above(2);
  REQUIRE(P2.size() == 1);
  CHECK(P2[0].e == 3);  // 2 is still totally ramified in Q(cbrt 2)
  CHECK(P2[0].f_deg == 1);
}

TEST_CASE("sum of e*f is 3 and degrees match the cubic mod p") {
  for (auto [a, b] :
       std::vector<std::pair<int, int>>{{0, -2}, {1, 1}, {-3, 1}, {2, -1}}) {
    auto K = build_field(a, b);
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 31ull, 97ull}) {
      const auto& Ps = K->primes_above(Int((unsigned long)p));
      int total = 0;
      for (const auto& P : Ps) total += P.e * P.f_deg;
      CHECK(total == 3);
      CHECK(Ps.size() >= 1);
      CHECK(Ps.size() <= 3);
      auto st = splitting_type(*K, Int((unsigned long)p));
      CHECK(st.size() == Ps.size());
    }
  }
}

TEST_CASE("valuations: uniformizers, multiplicativity, z1 over 2") {
  auto K = build_field(0, -2);
  const auto& P2 = K->primes_above(2)[0];
  // z^3 = 2 and e = 3 force v(z) = 1
  CHECK(valuation(*K, FE::gen(), P2) == 1);
  CHECK(valuation(*K, FE::from_int(2), P2) == 3);
  CHECK(valuation(*K, FE::from_int(1), P2) == 0);
  CHECK(valuation(*K, FE::from_rat(Rat(1, 2)), P2) == -3);

  std::mt19937 rng(81);
  const auto& P5 = K->primes_above(5);
  for (int t = 0; t < 50; ++t) {
    FE x, y;
    for (int i = 0; i < 3; ++i) {
      x.c[i] = Int(rng() % 11) - 5;
      y.c[i] = Int(rng() % 11) - 5;
    }
    if (x.is_zero() || y.is_zero()) continue;
    for (const auto& P : P5)
      CHECK(valuation(*K, K->mul(x, y), P) ==
            valuation(*K, x, P) + valuation(*K, y, P));
  }

  // uniformizer has valuation one at its prime, zero at siblings
  const auto& P31 = K->primes_above(31);
  for (const auto& P : P31) {
    FE pi = K->from_integral(P.pi);
    CHECK(valuation(*K, pi, P) == 1);
    for (const auto& Q : P31)
      if (!(Q == P)) CHECK(valuation(*K, pi, Q) == 0);
  }
}

TEST_CASE("principal ideal norm equals element norm") {
  auto K = build_field(1, 1);
  std::mt19937 rng(91);
  for (int t = 0; t < 30; ++t) {
    ZVec v = {Int(rng() % 9) - 4, Int(rng() % 9) - 4, Int(rng() % 9) - 4};
    if (v[0] == 0 && v[1] == 0 && v[2] == 0) continue;
    FE x = K->from_integral(v);
    Rat n = K->norm(x);
    CHECK(ideal_norm(principal_ideal(*K, v)) == abs(n.get_num()));
  }
}

TEST_CASE("ideal multiplication is compatible with valuation and norm") {
  auto K = build_field(0, -2);
  const auto& P5 = K->primes_above(5);
  const auto& P31 = K->primes_above(31);
  ZMat A = ideal_mul(*K, P5[0].hnf, P31[0].hnf);
  CHECK(ideal_norm(A) == P5[0].norm() * P31[0].norm());
  CHECK(ideal_valuation(*K, A, P5[0]) == 1);
  CHECK(ideal_valuation(*K, A, P31[0]) == 1);
  CHECK(ideal_valuation(*K, A, P31[1]) == 0);
  ZMat A2 = ideal_mul(*K, A, A);
  CHECK(ideal_valuation(*K, A2, P5[0]) == 2);
}

TEST_CASE("colon ideal inverts principal multiples") {
  auto K = build_field(0, -2);
  const auto& P = K->primes_above(31)[0];
  // gamma in P: (gamma) : P is integral with (gamma : P) * P = (gamma)
  ZVec gamma = {P.hnf[0][0], P.hnf[1][0], P.hnf[2][0]};
  ZMat G = principal_ideal(*K, gamma);
  ZMat C = ideal_colon(*K, G, P.hnf);
  CHECK(ideal_mul(*K, C, P.hnf) == G);
}

TEST_CASE("odd residue symbols are characters") {
  auto K = build_field(0, -2);
  std::mt19937 rng(101);
  for (const Int& p : std::vector<Int>{5, 7, 31}) {
    for (const auto& P : K->primes_above(p)) {
      CHECK(odd_symbol(*K, FE::from_int(1), P) == 1);
      int checked = 0;
      for (int t = 0; t < 200 && checked < 40; ++t) {
        FE x, y;
        for (int i = 0; i < 3; ++i) {
          x.c[i] = Int(rng() % 25) - 12;
          y.c[i] = Int(rng() % 25) - 12;
        }
        if (x.is_zero() || y.is_zero()) continue;
        if (valuation(*K, x, P) != 0 || valuation(*K, y, P) != 0) continue;
        ++checked;
        CHECK(odd_symbol(*K, K->mul(x, x), P) == 1);
        CHECK(odd_symbol(*K, K->mul(x, y), P) ==
              odd_symbol(*K, x, P) * odd_symbol(*K, y, P));
      }
      CHECK(checked > 0);
    }
  }
}

TEST_CASE("crt solves simultaneous congruences") {
  auto K = build_field(0, -2);
  const auto& P31 = K->primes_above(31);
  ZVec r0 = {Int(1), Int(0), Int(0)};
  ZVec r1 = {Int(2), Int(1), Int(0)};
  ZVec r2 = {Int(0), Int(0), Int(1)};
  ZVec x = crt_elements(
      *K, {{P31[0].hnf, r0}, {P31[1].hnf, r1}, {P31[2].hnf, r2}});
  auto diff = [&](const ZVec& a2, const ZVec& b2) {
    ZVec d(3);
    for (int i = 0; i < 3; ++i) d[i] = a2[i] - b2[i];
    return d;
  };
  CHECK(in_lattice(P31[0].hnf, diff(x, r0)));
  CHECK(in_lattice(P31[1].hnf, diff(x, r1)));
  CHECK(in_lattice(P31[2].hnf, diff(x, r2)));
}

TEST_CASE("unit_part recovers residues after uniformizer division") {
  auto K = build_field(0, -2);
  const auto& P2 = K->primes_above(2)[0];
  // x = z^2 * u with u = 1 + z: unit part of x mod P should equal u mod P
  FE u = FE::from_int(1) + FE::gen();
  FE x = K->mul(K->mul(FE::gen(), FE::gen()), u);
  auto xc = K->to_integral_exact(x);
  REQUIRE(xc.has_value());
  ZVec beta = unit_part(*K, *xc, P2, 1);
  FE bf = K->from_integral(beta);
  CHECK(valuation(*K, bf, P2) == 0);
}
