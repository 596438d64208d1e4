#include <random>

#include "doctest.h"
#include "selmer/cubic_field.hpp"

using namespace selmer;

TEST_CASE("x^3 - 2: discriminant, signature, monogenic") {
  auto K = build_field(0, -2);
  CHECK(K->disc_f == -108);
  CHECK(K->field_disc == -108);
  CHECK(K->index == 1);
  CHECK(K->r1 == 1);
  CHECK(K->r2 == 1);
  CHECK(K->epsilon == 0);
  CHECK(!K->is_galois);
}

TEST_CASE("x^3 + x + 1: squarefree discriminant forces the power basis") {
  auto K = build_field(1, 1);
  CHECK(K->disc_f == -31);
  CHECK(K->field_disc == -31);
  CHECK(K->index == 1);
  CHECK(K->epsilon == 0);
  // integral basis is the power basis
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(K->omega[i][j] == (i == j ? 1 : 0));
}

TEST_CASE("reducible cubics are rejected") {
  CHECK_THROWS_AS(build_field(-1, 0), ReducibleCubic);   // x(x-1)(x+1)
  CHECK_THROWS_AS(build_field(-7, 6), ReducibleCubic);   // (x-1)(x-2)(x+3)
  CHECK_THROWS_AS(build_field(0, 8), ReducibleCubic);    // root -2
  CHECK_THROWS_AS(build_field(-3, 2), ReducibleCubic);   // (x-1)^2(x+2), disc 0
}

TEST_CASE("x^3 - 4: index 2, same field as x^3 - 2") {
  auto K = build_field(0, -4);
  CHECK(K->disc_f == -432);
  CHECK(K->index == 2);
  CHECK(K->field_disc == -108);
  // z^2/2 = cbrt(2) must be integral
  FE half_z2;
  half_z2.c[2] = Rat(1, 2);
  CHECK(K->is_integral(half_z2));
}

TEST_CASE("x^3 - 3x + 1: cyclic field, square discriminant, totally real") {
  auto K = build_field(-3, 1);
  CHECK(K->disc_f == 81);
  CHECK(K->is_galois);
  CHECK(K->r1 == 3);
  CHECK(K->epsilon == 1);
}

TEST_CASE("norm of x - z1 equals the cubic at x") {
  std::mt19937 rng(21);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}, {-3, 1}}) {
    auto K = build_field(a, b);
    for (int t = 0; t < 100; ++t) {
      Rat x(Int(rng() % 2001) - 1000, Int(rng() % 50) + 1);
      x.canonicalize();
      if (eval_cubic(a, b, x) == 0) continue;
      FE alpha = FE::from_rat(x) - FE::gen();
      CHECK(K->norm(alpha) == eval_cubic(a, b, x));
    }
  }
}

TEST_CASE("field arithmetic: inverses, traces, norms multiply") {
  auto K = build_field(0, -2);
  std::mt19937 rng(31);
  for (int t = 0; t < 50; ++t) {
    FE x, y;
    for (int i = 0; i < 3; ++i) {
      x.c[i] = Rat(Int(rng() % 19) - 9, Int(rng() % 6) + 1);
      y.c[i] = Rat(Int(rng() % 19) - 9, Int(rng() % 6) + 1);
      x.c[i].canonicalize();
      y.c[i].canonicalize();
    }
    if (x.is_zero() || y.is_zero()) continue;
    CHECK(K->norm(K->mul(x, y)) == K->norm(x) * K->norm(y));
    CHECK(K->trace(x + y) == K->trace(x) + K->trace(y));
    CHECK(K->mul(x, K->inv(x)) == FE::from_int(1));
  }
  CHECK(K->trace(FE::from_int(1)) == 3);
  CHECK(K->norm(FE::gen()) == 2);  // N(z) = -b
}

TEST_CASE("integral coordinate round trip") {
  auto K = build_field(0, -4);
  std::mt19937 rng(41);
  for (int t = 0; t < 50; ++t) {
    ZVec v = {Int(rng() % 21) - 10, Int(rng() % 21) - 10, Int(rng() % 21) - 10};
    FE x = K->from_integral(v);
    auto back = K->to_integral_exact(x);
    REQUIRE(back.has_value());
    CHECK(*back == v);
  }
}

TEST_CASE("real embedding signs") {
  auto K = build_field(0, -2);
  // single real embedding at cbrt(2) ~ 1.26
  FE z = FE::gen();
  CHECK(K->real_signs(z - FE::from_int(2)) == std::vector<int>{-1});
  CHECK(K->real_signs(z - FE::from_int(1)) == std::vector<int>{1});
  CHECK(K->real_signs(FE::from_int(1)) == std::vector<int>{1});

  auto C = build_field(-3, 1);  // roots ~ -1.88, 0.35, 1.53
  FE w = FE::gen();
  CHECK(C->real_signs(w) == std::vector<int>{-1, 1, 1});
  CHECK(C->real_signs(w - FE::from_int(1)) == std::vector<int>{-1, -1, 1});
  std::mt19937 rng(51);
  for (int t = 0; t < 20; ++t) {
    FE x;
    for (int i = 0; i < 3; ++i) x.c[i] = Int(rng() % 11) - 5;
    if (x.is_zero()) continue;
    auto s = C->real_signs(C->mul(x, x));
    CHECK(s == std::vector<int>(3, 1));
  }
}

TEST_CASE("embedding intervals actually contain roots") {
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {-3, 1}, {1, 1}}) {
    auto K = build_field(a, b);
    auto E = K->embeddings(64);
    CHECK((int)E.real_roots.size() == K->r1);
    Rat prev(-1000000);
    for (const auto& r : E.real_roots) {
      CHECK(eval_cubic(a, b, r.lo) * eval_cubic(a, b, r.hi) <= 0);
      CHECK(r.hi - r.lo <= Rat(Int(1), Int(1) << 60));
      CHECK(r.lo > prev);
      prev = r.hi;
    }
  }
}

TEST_CASE("exact square roots in L") {
  std::mt19937 rng(61);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}, {-3, 1}}) {
    auto K = build_field(a, b);
    for (int t = 0; t < 15; ++t) {
      FE g;
      for (int i = 0; i < 3; ++i) {
        g.c[i] = Rat(Int(rng() % 13) - 6, Int(rng() % 4) + 1);
        g.c[i].canonicalize();
      }
      if (g.is_zero()) continue;
      FE sq = K->mul(g, g);
      auto r = K->sqrt_in_L(sq);
      REQUIRE(r.has_value());
      CHECK(K->mul(*r, *r) == sq);
      // and a typical non-square is rejected
      FE ns = K->mul(sq, FE::gen());
      auto nr = K->sqrt_in_L(ns);
      if (nr) CHECK(K->mul(*nr, *nr) == ns);
    }
  }
  // 2 is not a square in Q(cbrt 2)
  auto K = build_field(0, -2);
  CHECK(!K->sqrt_in_L(FE::from_int(2)).has_value());
  // but z^2 is
  FE z2;
  z2.c[2] = 1;
  auto r = K->sqrt_in_L(z2);
  REQUIRE(r.has_value());
}
