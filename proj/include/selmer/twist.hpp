#pragma once

#include <array>
#include <string>
#include <vector>

#include "selmer/descent.hpp"

namespace selmer {

struct SearchBudgetExhausted : std::runtime_error {
  std::string stage;
  SearchBudgetExhausted(std::string st, const std::string& what)
      : std::runtime_error(what), stage(std::move(st)) {}
};
struct DescentFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoEligiblePair : std::domain_error {
  using std::domain_error::domain_error;
};

// One prime multiplied into the twist while arranging the standing
// hypotheses, with the item (1-5) that demanded it.
struct TwistStage {
  Int p;
  int item = 0;
  std::string reason;
};

struct ItemCheck {
  int item = 0;
  bool pass = false;
  bool vacuous = false;
  std::string note;
};

// Certificate that E_D satisfies the five standing hypotheses:
//  1. at odd bad primes, good reduction (n=2 unramified) or totally
//     ramified coboundary image (n=3)
//  2. Cl(L)[2] is generated by classes of primes over bad split primes
//  3. no nonzero Selmer class is supported inside S alone
//  4. the local condition drops the dimension at infinity (by eps) and at
//     each odd ramified prime of S with ramified image (by 1)
//  5. global classes over the bad set surject onto H^1(Q_2)
struct PropertyECertificate {
  Int a, b, D;
  std::vector<Int> S;  // the fixed finite set: 2 and the odd ramified n=2 primes
  std::vector<TwistStage> stages;
  std::array<ItemCheck, 5> items{};
  bool all_pass = false;
};

// The descent data selected from Sel_2(E_D): independent classes x, y with
// squarefree support over split primes q1 (for x) and q2 (for y), the
// sacrificial place qstar, and the exponent vectors of each class at the
// other's primes and at qstar.
struct DescentData {
  FE x, y;
  Int q1, q2, qstar;
  char case_tag = '?';  // a: all distinct, b: q2 = q* != q1,
                        // c: q1 = q2 = q*,  d: q1 = q2 != q*
  // indices into primes_above(): the two support primes of x over q1, of y
  // over q2, and the two marked primes over qstar
  std::array<int, 2> xP{}, yP{}, starP{};
  std::array<int, 3> d{}, e{}, s{}, t{};  // v(x) at q2-primes, v(y) at
                                          // q1-primes, v(x), v(y) at qstar
  std::vector<Place> order;               // condition order used to find qstar
};

struct IdentityRecord {
  std::string name;
  int lhs = 0, rhs = 0;
  bool pass = false;
};

// The auxiliary prime p with generators alpha_i of the primes above it,
// chosen so that the pair products alpha1 alpha2 and alpha2 alpha3 follow
// the prescribed sign pattern at the marked primes over qstar and so that
// x, y restrict onto independent unramified classes at p.
struct SymbolPrime {
  Int p;
  std::array<FE, 3> alpha;
  // symbol tables (alpha_i / P_j) over q1, q2, qstar
  std::array<std::array<int, 3>, 3> T{}, Tt{}, Ts{};
  std::array<int, 3> x_at_p{}, y_at_p{};  // (x / P_i), (y / P_i) over p
  // product-formula consistency of (x / alpha_i alpha_j) computed from both
  // sides of reciprocity in L
  std::vector<IdentityRecord> reciprocity;
};

struct DescentStepCertificate {
  DescentData data;
  SymbolPrime sp;
  Int r = 0;  // inert companion
  Int D_before = 0, D_after = 0;
  int dim_before = 0, dim_after = 0;
  int h1_before = 0, h1_after = 0;  // ambient dimensions; jump must be +2
  bool images_equal = false;        // local images agree at the old bad set
  std::vector<Int> rejected;        // symbol primes that failed verification
  std::vector<ChainStep> ledger;    // condition chain for the new twist
};

struct TwistSearchResult {
  Int D = 1;
  int dim = 0;
  int n_steps = 0;
  PropertyECertificate prop;
  std::vector<DescentStepCertificate> steps;
};

struct ScanRow {
  Int D;
  int dim = 0;
  int n_steps = 0;
  long runtime_ms = 0;
};

// Constructive search for twists with small 2-Selmer group: arrange the
// standing hypotheses, then repeatedly multiply the twist by p * r for an
// auxiliary split prime p (with symbol-conditioned generators) and an inert
// companion r, each step strictly decreasing dim Sel_2.
class TwistEngine {
 public:
  explicit TwistEngine(CtxPtr K);

  DescentEngine& descent() const { return *eng_; }
  const CubicFieldCtx& field() const { return *K_; }

  // bound on auxiliary primes examined by every bounded search
  Int prime_budget = 1000000;

  // the fixed finite set S: 2 together with the odd primes ramified in L
  // with n_q = 2
  std::vector<Int> fixed_S() const;

  // twist D0 by further primes until the five standing hypotheses hold
  std::pair<CurveSpec, PropertyECertificate> establish_property_E(
      const Int& D0 = 1) const;

  // x, y, q1, q2, qstar from Sel_2(E_D); NoEligiblePair if dim < 2
  DescentData choose_descent_data(const CurveSpec& C,
                                  const SelmerResult& sel) const;

  // first qualifying symbol prime above the bound `above`
  SymbolPrime search_symbol_prime(const CurveSpec& C, const DescentData& dd,
                                  const Int& above = 0) const;

  // inert r = 1 mod 8 with (pr / q) = 1 at every odd bad prime
  Int search_inert_companion(const CurveSpec& C, const Int& p) const;

  // one full descent step on E_D: symbol primes are tried in ascending
  // order until the twist by p r strictly decreases dim Sel_2; candidates
  // that fail verification are recorded in the certificate
  std::pair<CurveSpec, DescentStepCertificate> descend_once(
      const CurveSpec& C) const;

  // establish the hypotheses at D0 and descend until dim Sel_2 <= 1
  TwistSearchResult find_small_selmer_twist(const Int& D0 = 1) const;

  // dim Sel_2(E_D) for every squarefree |D| < X, ascending
  std::vector<ScanRow> distribution_scan(const Int& X, int threads = 1) const;

 private:
  CtxPtr K_;
  std::shared_ptr<FieldInvariants> inv_;
  std::shared_ptr<LocalData> loc_;
  std::shared_ptr<DescentEngine> eng_;

  struct AlphaTriple {
    Int p;
    std::array<FE, 3> alpha;
  };
  // ascending search over split primes p with all primes above p principal:
  // accept(p, alphas) ranges over generator choices modulo unit squares
  // (norms forced positive); the first qualifying p wins
  template <class Filter, class Accept>
  AlphaTriple search_alpha_triple(const CurveSpec& C, Filter filter_p,
                                  Accept accept,
                                  const std::string& stage) const;

  bool good_reduction_n2(const CurveSpec& C, const Int& q) const;
  std::vector<Int> t_set(const CurveSpec& C) const;  // bad set minus the odd
                                                     // S-primes with
                                                     // unramified image
  bool h1_surjects_at_2(const CurveSpec& C) const;
  std::optional<FE> selmer_class_in_S(const CurveSpec& C,
                                      const SelmerResult& sel) const;
};

}  // namespace selmer
