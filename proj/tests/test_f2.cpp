#include <random>

#include "doctest.h"
#include "selmer/f2.hpp"

using namespace selmer;

TEST_CASE("F2Vec basics") {
  F2Vec v(70);
  v.set(0, true);
  v.set(69, true);
  CHECK(v.get(0));
  CHECK(v.get(69));
  CHECK(!v.get(35));
  CHECK(v.weight() == 2);
  CHECK(v.lowest() == 0);
  v.flip(0);
  CHECK(v.lowest() == 69);
  CHECK(F2Vec::from_string(v.to_string()) == v);
}

TEST_CASE("span dimension and membership") {
  F2Span sp(4);
  CHECK(sp.add(F2Vec::from_string("1100")));
  CHECK(sp.add(F2Vec::from_string("0110")));
  CHECK(!sp.add(F2Vec::from_string("1010")));
  CHECK(sp.dim() == 2);
  CHECK(sp.contains(F2Vec::from_string("1010")));
  CHECK(!sp.contains(F2Vec::from_string("0001")));
}

TEST_CASE("kernel really annihilates") {
  std::mt19937 rng(4);
  for (int t = 0; t < 40; ++t) {
    size_t n = 3 + rng() % 6, m = 2 + rng() % 6;
    F2Matrix M(n);
    for (size_t i = 0; i < m; ++i) {
      F2Vec r(n);
      for (size_t j = 0; j < n; ++j) r.set(j, rng() & 1);
      M.add_row(r);
    }
    auto ker = M.kernel();
    CHECK(ker.size() == n - M.rank());
    for (const auto& x : ker) {
      for (const auto& row : M.rows) {
        int dot = 0;
        for (size_t j = 0; j < n; ++j) dot ^= (row.get(j) && x.get(j)) ? 1 : 0;
        CHECK(dot == 0);
      }
    }
  }
}

TEST_CASE("preimage_basis finds exactly the combinations landing in a span") {
  // img maps e0..e2 into F2^3
  std::vector<F2Vec> img = {F2Vec::from_string("100"),
                            F2Vec::from_string("010"),
                            F2Vec::from_string("110")};
  F2Span target(3);
  target.add(F2Vec::from_string("100"));
  auto pre = preimage_basis(img, target);
  // combos landing in span{100}: e0, e1+e2 -> dimension 2
  CHECK(pre.size() == 2);
  for (const auto& c : pre) {
    F2Vec sum(3);
    for (size_t i = 0; i < 3; ++i)
      if (c.get(i)) sum ^= img[i];
    CHECK(target.contains(sum));
  }
}
