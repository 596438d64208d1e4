#include <doctest.h>

#include <algorithm>
#include <random>

#include "selmer/descent.hpp"

using namespace selmer;

namespace {

bool in_span(const std::vector<F2Vec>& basis, const F2Vec& v) {
  if (basis.empty()) return v.is_zero();
  F2Span sp(v.size());
  for (const auto& b : basis) sp.add(b);
  return sp.contains(v);
}

}  // namespace

TEST_CASE("make_curve: squarefree normalization and bad places") {
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(12);
  CHECK(C.D == 3);
  CurveSpec C1 = eng.make_curve(1);
  // disc -108 = -2^2 3^3; 3 is totally ramified (n_3 = 1) so only 2 remains
  CHECK(C1.s_finite == std::vector<Int>{2});
  CurveSpec C5 = eng.make_curve(5);
  CHECK(C5.s_finite == std::vector<Int>{2, 5});
  CHECK_THROWS_AS(eng.make_curve(0), std::domain_error);
}

TEST_CASE("torsion images live in the local norm kernel") {
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(1);
  auto& L = eng.local();
  {
    auto T = eng.torsion_images(C, 31);  // 31 splits completely
    CHECK(T.size() == 3);
    for (const auto& t : T) {
      CHECK(!t.is_zero());
      CHECK(in_span(L.local_h1_subspace(31), t));
    }
  }
  {
    auto T = eng.torsion_images(C, 5);  // two primes above 5
    CHECK(T.size() == 1);
    CHECK(in_span(L.local_h1_subspace(5), T[0]));
  }
  CHECK_THROWS_AS(eng.torsion_images(C, 7), NotApplicable);  // 7 inert
}

TEST_CASE("torsion images scale with the twist") {
  // for an odd prime not dividing D the twisted roots are D z_i, so the
  // image vectors are classes of D-scaled differences; they still span the
  // same number of independent classes
  DescentEngine eng(build_field(0, -2));
  CurveSpec C1 = eng.make_curve(1), C5 = eng.make_curve(5);
  auto T1 = eng.torsion_images(C1, 31), T5 = eng.torsion_images(C5, 31);
  REQUIRE(T1.size() == T5.size());
  // 5 is a square mod 31 (by reciprocity), so every D-scaling correction is
  // trivial and the images coincide vector by vector
  for (size_t i = 0; i < T1.size(); ++i) CHECK(T1[i] == T5[i]);
  // 3 is not a square mod 31: each image shifts by the class of D at every
  // block except its own (where D^2 cancels)
  auto T3 = eng.torsion_images(eng.make_curve(3), 31);
  F2Vec d3 = eng.local().restriction_vector(FE::from_int(3), 31);
  for (size_t i = 0; i < T1.size(); ++i) {
    F2Vec shift = d3;
    shift.set(2 * i, false);      // own-block valuation bit
    shift.set(2 * i + 1, false);  // own-block symbol bit
    CHECK((T1[i] ^ T3[i]) == shift);
  }
}

TEST_CASE("image_delta dimensions match the local tables") {
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, -2}, {1, 1}, {3, 2}, {-3, 1}}) {
    DescentEngine eng(build_field(a, b));
    CurveSpec C = eng.make_curve(1);
    for (Int p : {Int(2), Int(3), Int(5), Int(7), Int(31)}) {
      const LocalImage& img = eng.image_delta(C, Place::finite(p));
      CHECK((int)img.basis.size() == eng.local().local_h1_dims(p).second);
    }
    const LocalImage& inf = eng.image_delta(C, Place::infinity());
    CHECK((int)inf.basis.size() == eng.field().epsilon);
  }
}

TEST_CASE("rational point classes restrict into every local image") {
  // (3,5) lies on y^2 = x^3 - 2; its descent class is 3 - z
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(1);
  FE cls = FE::from_int(3) - FE::gen();
  CHECK(eng.field().norm(cls) == 25);  // y^2
  for (Int p : {Int(2), Int(5), Int(11), Int(31), Int(43)}) {
    const LocalImage& img = eng.image_delta(C, Place::finite(p));
    CHECK(in_span(img.basis, eng.local().restriction_vector(cls, p)));
  }
}

TEST_CASE("classify_image patterns at a split prime") {
  DescentEngine eng(build_field(0, -2));
  // width 6 at p=31: blocks of (valuation, symbol) bits at positions
  // (0,1),(2,3),(4,5)
  auto vec = [](std::initializer_list<int> bits) {
    F2Vec v(6);
    for (int b : bits) v.set(b, true);
    return v;
  };
  CHECK(eng.classify_image({vec({1}), vec({3, 5})}, 31) == ImageClass::unramified);
  // <(p a, b), (c, p d)>: no nonzero combination is valuation-free
  CHECK(eng.classify_image({vec({0, 3}), vec({1, 2})}, 31) ==
        ImageClass::totally_ramified);
  // <(p a, b), (p c, d)>: the product is valuation-free but nontrivial
  CHECK(eng.classify_image({vec({0, 3}), vec({0, 5})}, 31) == ImageClass::mixed);
  CHECK(eng.classify_image({}, 31) == ImageClass::unramified);
}

TEST_CASE("Sel_2 of y^2 = x^3 - 2 is one-dimensional") {
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(1);
  SelmerResult R = eng.compute_sel2(C);
  CHECK(R.dim == 1);
  REQUIRE(R.basis.size() == 1);
  CHECK(R.basis[0].norm_class == 1);
  // the surviving class is that of the rational point (3,5)
  FE cls = FE::from_int(3) - FE::gen();
  FE ratio = eng.field().div(R.basis[0].alpha, cls);
  CHECK(eng.field().sqrt_in_L(ratio).has_value());
  // explicit order (inf, 2): no condition ever drops the dimension
  SelmerResult R2 =
      eng.compute_sel2(C, {Place::infinity(), Place::finite(2)});
  CHECK(R2.dim == 1);
  for (const auto& st : R2.chain) CHECK(st.dim_before == st.dim_after);
}

TEST_CASE("square-class-equivalent twists give identical results") {
  DescentEngine eng(build_field(1, 1));
  CurveSpec C1 = eng.make_curve(1), C4 = eng.make_curve(4);
  CHECK(C1.D == C4.D);
  CHECK(eng.compute_sel2(C1).dim == eng.compute_sel2(C4).dim);
}

TEST_CASE("order independence of the Selmer dimension") {
  for (auto [a, b, D] : std::vector<std::tuple<int, int, int>>{
           {0, -2, 1}, {1, 1, 1}, {0, -2, 5}}) {
    DescentEngine eng(build_field(a, b));
    CurveSpec C = eng.make_curve(D);
    std::vector<Place> order = eng.default_order(C);
    int dim0 = eng.compute_sel2(C, order).dim;
    std::mt19937 rng(5);
    for (int t = 0; t < 5; ++t) {
      std::shuffle(order.begin(), order.end(), rng);
      CHECK(eng.compute_sel2(C, order).dim == dim0);
    }
  }
}

TEST_CASE("residual group contains the Selmer group") {
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(5);
  SelmerResult S = eng.compute_sel2(C);
  for (const Place& v : eng.default_order(C)) {
    SelmerResult Rv = eng.residual_group(C, v);
    CHECK(Rv.dim >= S.dim);
  }
  // removing a place that carries no condition changes nothing
  SelmerResult Rout = eng.residual_group(C, Place::finite(97));
  CHECK(Rout.dim == S.dim);
}

TEST_CASE("local images are twist-invariant under locally square D") {
  // 11 = 1 mod 5 is a square in Q_5, so E and E_11 have the same image at 5
  DescentEngine eng(build_field(0, -2));
  CurveSpec C1 = eng.make_curve(1), C11 = eng.make_curve(11);
  const LocalImage& a = eng.image_delta(C1, Place::finite(5));
  const LocalImage& b = eng.image_delta(C11, Place::finite(5));
  F2Span sp(eng.local().width(5));
  for (const auto& v : a.basis) sp.add(v);
  CHECK(sp.dim() == b.basis.size());
  for (const auto& v : b.basis) CHECK(sp.contains(v));
  // 2 is a square mod 31, hence a square in Q_31
  const LocalImage& c = eng.image_delta(C1, Place::finite(31));
  const LocalImage& d = eng.image_delta(eng.make_curve(2), Place::finite(31));
  F2Span sp2(eng.local().width(31));
  for (const auto& v : c.basis) sp2.add(v);
  CHECK(sp2.dim() == d.basis.size());
  for (const auto& v : d.basis) CHECK(sp2.contains(v));
}

TEST_CASE("Selmer classes are everywhere-local at extra good primes") {
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(1);
  SelmerResult R = eng.compute_sel2(C);
  REQUIRE(R.dim == 1);
  int used = 0;
  for (Int p = 5; used < 8; p = next_prime(p)) {
    if (eng.field().n_p(p) < 2) continue;
    const LocalImage& img = eng.image_delta(C, Place::finite(p));
    for (const auto& sc : R.basis)
      CHECK(in_span(img.basis, eng.local().restriction_vector(sc.alpha, p)));
    ++used;
  }
}

TEST_CASE("torsion images at a split prime dividing D") {
  // at p | D with p split, the twisted torsion points have odd valuation at
  // some primes above p; the unit part of each component must be taken with
  // respect to the block uniformizer for the class to land in the local H^1
  DescentEngine eng(build_field(0, -2));
  CurveSpec C = eng.make_curve(31);  // 31 splits in Q(cbrt(2))
  const LocalImage& img = eng.image_delta(C, Place::finite(31));
  CHECK(img.cls == ImageClass::totally_ramified);
  CHECK(img.basis.size() == 2);
  const auto& sub = eng.local().local_h1_subspace(31);
  F2Span H(eng.local().width(31));
  for (const auto& v : sub) H.add(v);
  for (const auto& v : img.basis) CHECK(H.contains(v));
}
