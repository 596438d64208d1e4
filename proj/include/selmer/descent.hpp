#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "selmer/localdata.hpp"
#include "selmer/sunits.hpp"

namespace selmer {

struct NotApplicable : std::domain_error {
  using std::domain_error::domain_error;
};

struct SamplingExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Place {
  bool inf = false;
  Int p = 0;

  static Place infinity() { return {true, 0}; }
  static Place finite(const Int& q) { return {false, q}; }
  std::string label() const { return inf ? "inf" : p.get_str(); }
  bool operator==(const Place& o) const { return inf == o.inf && p == o.p; }
  bool operator<(const Place& o) const {
    if (inf != o.inf) return inf < o.inf;
    return p < o.p;
  }
};

// Twist E_D : y^2 = x^3 + a D^2 x + b D^3, D squarefree; the 2-torsion field
// L is independent of D.
struct CurveSpec {
  Int a, b, D;
  std::vector<Int> s_finite;  // 2 first, then odd bad primes with n_p > 1
};

enum class ImageClass { unramified, totally_ramified, mixed, not_applicable };

struct LocalImage {
  Place place;
  std::vector<F2Vec> basis;  // echelonized span of Im delta
  ImageClass cls = ImageClass::not_applicable;
};

struct ChainStep {
  Place place;
  int dim_before = 0, dim_after = 0;
};

struct SelmerResult {
  CurveSpec curve;
  std::vector<ChainStep> chain;
  std::vector<SquareClassVector> basis;
  int dim = 0;
};

// 2-descent on quadratic twists over a fixed 2-torsion field: coboundary
// images, local condition chain, Sel_2(E_D).
class DescentEngine {
 public:
  explicit DescentEngine(CtxPtr K);
  DescentEngine(std::shared_ptr<FieldInvariants> inv, std::shared_ptr<LocalData> loc);

  const CubicFieldCtx& field() const { return *K_; }
  CtxPtr field_ptr() const { return K_; }
  FieldInvariants& invariants() const { return *inv_; }
  LocalData& local() const { return *loc_; }

  // normalizes D to its squarefree part and computes S_D
  CurveSpec make_curve(const Int& D) const;

  // delta-images of the local 2-torsion points at p (NotApplicable if n_p=1)
  std::vector<F2Vec> torsion_images(const CurveSpec& C, const Int& p) const;

  // full Im delta_v, spanned by torsion images and sampled local points up
  // to the mandated dimension (n_p-1 odd, n_2 at 2, eps at infinity);
  // SamplingExhausted if the budget runs out first
  const LocalImage& image_delta(const CurveSpec& C, const Place& v) const;

  // valuation-bit pattern classification at an odd prime
  ImageClass classify_image(const std::vector<F2Vec>& basis, const Int& p) const;

  // infinity first (when real conditions exist), then 2, then odd ascending
  std::vector<Place> default_order(const CurveSpec& C) const;

  // Sel_2(E_D): h1_global over S_D cut down by Im delta_v along the order
  // (default order when empty; must cover the finite places of S_D)
  SelmerResult compute_sel2(const CurveSpec& C,
                            const std::vector<Place>& order = {}) const;

  // all conditions except the one at v
  SelmerResult residual_group(const CurveSpec& C, const Place& v) const;

  int sample_budget = 10000;

 private:
  CtxPtr K_;
  std::shared_ptr<FieldInvariants> inv_;
  std::shared_ptr<LocalData> loc_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<Int, Place>, LocalImage> img_cache_;

  LocalImage image_delta_finite(const CurveSpec& C, const Int& p) const;
  LocalImage image_delta_infinity(const CurveSpec& C) const;
  SelmerResult chain_apply(const CurveSpec& C,
                           const std::vector<Place>& places) const;
};

// convenience wrapper: full pipeline for one twist
SelmerResult compute_sel2(CtxPtr K, const Int& D);

}  // namespace selmer
