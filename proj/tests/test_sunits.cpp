#include <doctest.h>

#include <random>

#include "selmer/ideals.hpp"
#include "selmer/sunits.hpp"

using namespace selmer;

TEST_CASE("unit group of Q(cbrt 2): rank 1, 1 - z is a unit") {
  auto K = build_field(0, -2);
  FieldInvariants inv(K);
  auto ub = inv.unit_square_basis();
  CHECK(ub.size() == 2);  // -1 and one fundamental unit
  CHECK(ub[0] == FE::from_int(-1));
  // N(1 - z) = f(1) = -1, so 1 - z generates the units modulo torsion up to
  // odd index; its class must be expressible in the basis
  FE u = FE::from_int(1) - FE::gen();
  CHECK(K->norm(u) == -1);
  for (const FE& g : ub.empty() ? std::vector<FE>{} : std::vector<FE>{ub[1]}) {
    Rat n = K->norm(g);
    CHECK((n == 1 || n == -1));
    CHECK(!K->sqrt_in_L(g).has_value());
  }
  // u itself is not a square, and differs from the basis unit by +-square
  bool expressible = false;
  for (int sg = 0; sg < 2; ++sg)
    for (int e = 0; e < 2; ++e) {
      FE t = FE::from_int(sg ? -1 : 1);
      if (e) t = K->mul(t, ub[1]);
      if (K->sqrt_in_L(K->mul(u, t))) expressible = true;
    }
  CHECK(expressible);
}

TEST_CASE("totally real field has 3 unit square classes") {
  auto K = build_field(-3, 1);
  FieldInvariants inv(K);
  auto ub = inv.unit_square_basis();
  CHECK(ub.size() == 3);
  for (size_t i = 1; i < ub.size(); ++i) {
    Rat n = K->norm(ub[i]);
    CHECK((n == 1 || n == -1));
  }
  // pairwise products are not squares (2-saturated basis)
  for (int mask = 1; mask < 8; ++mask) {
    FE t = FE::from_int(1);
    for (int i = 0; i < 3; ++i)
      if (mask & (1 << i)) t = K->mul(t, ub[i]);
    CHECK(!K->sqrt_in_L(t).has_value());
  }
}

TEST_CASE("class group 2-rank: trivial for disc -108 and -31") {
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}}) {
    auto K = build_field(a, b);
    FieldInvariants inv(K);
    CHECK(inv.class_group_2part().two_rank == 0);
    CHECK(inv.class_group_2part().reps.size() == 1);
  }
}

TEST_CASE("class number 2 field x^3 + 4x - 1 (disc -283)") {
  auto K = build_field(4, -1);
  CHECK(K->field_disc == -283);
  FieldInvariants inv(K);
  const auto& C = inv.class_group_2part();
  CHECK(C.reps.size() == 2);
  CHECK(C.two_rank == 1);
  // the nontrivial class squared is principal, itself is not
  CHECK(!inv.principal_generator(C.reps[1]).has_value());
  auto sq = inv.principal_generator(ideal_mul(*K, C.reps[1], C.reps[1]));
  CHECK(sq.has_value());
}

TEST_CASE("principality oracle recovers generators of principal ideals") {
  std::mt19937 rng(99);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}, {-3, 1}, {4, -1}}) {
    auto K = build_field(a, b);
    FieldInvariants inv(K);
    for (int t = 0; t < 6; ++t) {
      ZVec g = {Int(int(rng() % 9) - 4), Int(int(rng() % 9) - 4),
                Int(int(rng() % 5) - 2)};
      FE x = K->from_integral(g);
      if (x.is_zero()) continue;
      ZMat A = principal_ideal(*K, g);
      auto gen = inv.principal_generator(A);
      REQUIRE(gen.has_value());
      // generator agrees with g up to a unit
      FE q = K->div(x, *gen);
      auto qi = K->to_integral_exact(q);
      REQUIRE(qi.has_value());
      Rat n = K->norm(q);
      CHECK((n == 1 || n == -1));
    }
  }
}

TEST_CASE("L(S,2) for Q(cbrt 2), S = {inf, 2}: dimension 3") {
  auto K = build_field(0, -2);
  FieldInvariants inv(K);
  auto B = inv.s2_group_basis({Int(2)});
  CHECK(B.dim() == 3);  // -1, fundamental unit, z (with 2 = z^3)
  CHECK(B.s_primes.size() == 1);
  // every basis element has even valuation outside S
  for (Int p : {Int(3), Int(5), Int(7), Int(11), Int(31)})
    for (const auto& P : K->primes_above(p))
      for (const auto& sc : B.basis) CHECK(valuation(*K, sc.alpha, P) % 2 == 0);
}

TEST_CASE("enlarging S by a trivial-class prime adds one dimension") {
  auto K = build_field(0, -2);
  FieldInvariants inv(K);
  auto B0 = inv.s2_group_basis({Int(2)});
  auto B1 = inv.s2_group_basis({Int(2), Int(5)});
  // 5 has two primes above it in Q(cbrt 2), both principal (h = 1)
  CHECK(B1.dim() == B0.dim() + 2);
  auto B2 = inv.s2_group_basis({Int(2), Int(31)});
  CHECK(B2.dim() == B0.dim() + 3);  // 31 splits completely
}

TEST_CASE("h1_global frozen dimensions") {
  {
    auto K = build_field(0, -2);
    FieldInvariants inv(K);
    auto H = inv.h1_global({Int(2)});
    CHECK(H.dim() == 1);
    for (const auto& sc : H.basis) CHECK(sc.norm_class == 1);
  }
  {
    // 31 ramifies (disc -31): n_2 = 1, n_31 = 2, so the expected dimension
    // is (1+0) + (0 + 1) + 0 = 2.  Cross-checked against the global Euler
    // characteristic: eps + n_2 + sum over odd q of (n_q - 1) + dim Cl_S[2].
    auto K = build_field(1, 1);
    FieldInvariants inv(K);
    auto H = inv.h1_global({Int(2), Int(31)});
    CHECK(H.dim() == 2);
    for (const auto& sc : H.basis) CHECK(sc.norm_class == 1);
  }
}

TEST_CASE("h1 dimension identity on sampled fields") {
  // the identity check is built into h1_global (DimensionMismatch on
  // failure); a variety of signatures and class groups is exercised here
  std::mt19937 rng(2026);
  int done = 0;
  for (int tries = 0; done < 6 && tries < 60; ++tries) {
    int a = int(rng() % 17) - 8;
    int b = int(rng() % 17) - 8;
    if (b == 0) continue;
    CtxPtr K;
    try {
      K = build_field(a, b);
    } catch (const ReducibleCubic&) {
      continue;
    }
    FieldInvariants inv(K);
    std::vector<Int> S = {Int(2)};
    for (const auto& [p, e] : factor(abs(K->disc_f)))
      if (p != 2 && K->n_p(p) > 1) S.push_back(p);
    CHECK_NOTHROW(inv.h1_global(S));
    ++done;
  }
  CHECK(done == 6);
}

TEST_CASE("express: coordinates in an L(S,2) basis") {
  auto K = build_field(1, 1);
  FieldInvariants inv(K);
  auto B = inv.s2_group_basis({Int(2), Int(31)});
  std::mt19937 rng(7);
  for (int t = 0; t < 5; ++t) {
    // random subset product, multiplied by a random square
    F2Vec want(B.dim());
    FE x = FE::from_int(1);
    for (size_t i = 0; i < B.dim(); ++i)
      if (rng() & 1) {
        want.set(i, true);
        x = K->mul(x, B.basis[i].alpha);
      }
    FE s = K->from_integral({Int(int(rng() % 5) + 1), Int(int(rng() % 3)), Int(0)});
    x = K->mul(x, K->mul(s, s));
    auto got = inv.express(B, x);
    REQUIRE(got.has_value());
    CHECK(*got == want);
  }
  // an element with odd valuation at a prime outside S is not in the span
  FE z5 = FE::from_int(5);
  CHECK(!inv.express(B, z5).has_value());
}

TEST_CASE("principality across a full class-group cycle of large norm") {
  // class number 7: the seventh power of any prime ideal is principal, and
  // the oracle must certify this even when the power has a 76-bit norm
  auto K = build_field(20, -3);
  FieldInvariants inv(K);
  CHECK(inv.class_group_2part().reps.size() == 7);
  for (const auto& P : K->primes_above(1697)) {
    if (P.e != 1 || P.f_deg != 1) continue;
    int ci = inv.class_index(P.hnf);
    CHECK(ci != 0);
    ZMat A = identity_mat(3);
    for (int t = 0; t < 7; ++t) A = ideal_mul(*K, A, P.hnf);
    auto g = inv.principal_generator(A);
    REQUIRE(g.has_value());
    CHECK(abs(K->norm(*g).get_num()) == ideal_norm(A));
  }
}
