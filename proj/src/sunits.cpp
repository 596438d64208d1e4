#include "selmer/sunits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace selmer {

namespace {

// ---------------- disk cache for H^1 bases ----------------
// Records are keyed by (a, b, S) and written under $SELMER2_CACHE when that
// variable is set; with it unset the cache is purely in-memory.

using CacheJson = nlohmann::ordered_json;

std::optional<std::filesystem::path> cache_file(const CubicFieldCtx& K,
                                                const std::vector<Int>& S) {
  const char* dir = std::getenv("SELMER2_CACHE");
  if (!dir || !*dir) return std::nullopt;
  std::string name = "h1_v1_a" + K.a.get_str() + "_b" + K.b.get_str() + "_S";
  for (const Int& q : S) name += "_" + q.get_str();
  return std::filesystem::path(dir) / (name + ".json");
}

CacheJson basis_record(const CubicFieldCtx& K, const std::vector<Int>& S,
                       const SelmerBasisS& B) {
  CacheJson j;
  j["cache_v"] = 1;
  j["a"] = K.a.get_str();
  j["b"] = K.b.get_str();
  CacheJson s = CacheJson::array();
  for (const Int& q : S) s.push_back(q.get_str());
  j["S"] = s;
  CacheJson primes = CacheJson::array();
  for (const PrimeIdeal& P : B.s_primes) {
    CacheJson pj;
    pj["p"] = P.p.get_str();
    pj["e"] = P.e;
    pj["f"] = P.f_deg;
    CacheJson hnf = CacheJson::array(), pi = CacheJson::array();
    for (const auto& row : P.hnf) {
      CacheJson r = CacheJson::array();
      for (const Int& x : row) r.push_back(x.get_str());
      hnf.push_back(r);
    }
    for (const Int& x : P.pi) pi.push_back(x.get_str());
    pj["hnf"] = hnf;
    pj["pi"] = pi;
    primes.push_back(pj);
  }
  j["s_primes"] = primes;
  CacheJson basis = CacheJson::array();
  for (const SquareClassVector& sc : B.basis) {
    CacheJson e;
    CacheJson al = CacheJson::array();
    for (int i = 0; i < 3; ++i) al.push_back(sc.alpha.c[i].get_str());
    e["alpha"] = al;
    e["s_exponents"] = sc.s_exponents;
    e["norm_class"] = sc.norm_class.get_str();
    basis.push_back(e);
  }
  j["basis"] = basis;
  return j;
}

std::optional<SelmerBasisS> basis_from_record(const CacheJson& j,
                                              const CubicFieldCtx& K,
                                              const std::vector<Int>& S) {
  if (!j.contains("cache_v") || j.at("cache_v").get<int>() != 1) return {};
  if (Int(j.at("a").get<std::string>()) != K.a ||
      Int(j.at("b").get<std::string>()) != K.b)
    return {};
  SelmerBasisS B;
  B.s_finite = S;
  auto rat = [](const std::string& s) {
    Rat q(s);
    q.canonicalize();
    return q;
  };
  for (const auto& pj : j.at("s_primes")) {
    PrimeIdeal P;
    P.p = Int(pj.at("p").get<std::string>());
    P.e = pj.at("e").get<int>();
    P.f_deg = pj.at("f").get<int>();
    for (const auto& row : pj.at("hnf")) {
      ZVec r;
      for (const auto& x : row) r.push_back(Int(x.get<std::string>()));
      P.hnf.push_back(r);
    }
    for (const auto& x : pj.at("pi")) P.pi.push_back(Int(x.get<std::string>()));
    B.s_primes.push_back(P);
  }
  for (const auto& e : j.at("basis")) {
    SquareClassVector sc;
    for (int i = 0; i < 3; ++i)
      sc.alpha.c[i] = rat(e.at("alpha").at(i).get<std::string>());
    sc.s_exponents = e.at("s_exponents").get<std::vector<int>>();
    sc.norm_class = rat(e.at("norm_class").get<std::string>());
    B.basis.push_back(sc);
  }
  return B;
}

std::optional<SelmerBasisS> load_cached_basis(const CubicFieldCtx& K,
                                              const std::vector<Int>& S) {
  auto path = cache_file(K, S);
  if (!path) return {};
  std::ifstream in(*path);
  if (!in) return {};
  try {
    CacheJson j = CacheJson::parse(in);
    return basis_from_record(j, K, S);
  } catch (const std::exception&) {
    return {};
  }
}

void store_cached_basis(const CubicFieldCtx& K, const std::vector<Int>& S,
                        const SelmerBasisS& B) {
  auto path = cache_file(K, S);
  if (!path) return;
  std::error_code ec;
  std::filesystem::create_directories(path->parent_path(), ec);
  std::ofstream out(*path);
  if (!out) return;
  out << basis_record(K, S, B).dump(2) << "\n";
}

double d_log_abs_int(const Int& n) {
  if (n == 0) return -1e300;
  long exp2;
  double m = mpz_get_d_2exp(&exp2, n.get_mpz_t());
  return std::log(std::fabs(m)) + exp2 * std::log(2.0);
}

double d_log_abs(const Rat& q) {
  return d_log_abs_int(q.get_num()) - d_log_abs_int(q.get_den());
}

// log |sigma_i(x)| for the three embeddings; the complex-pair value is
// duplicated at positions 1,2 so entries always sum to log |N(x)|.
std::array<double, 3> log_embed(const CubicFieldCtx& K, const FE& x) {
  Embeddings E = K.embeddings(128);
  std::array<double, 3> out{};
  auto eval_real = [&](const Ival& r) {
    Ival v = ival_exact(x.c[0]) + ival_exact(x.c[1]) * r +
             ival_exact(x.c[2]) * (r * r);
    Rat mid = (v.lo + v.hi) / 2;
    return d_log_abs(mid);
  };
  if (K.r1 == 3) {
    for (int i = 0; i < 3; ++i) out[i] = eval_real(E.real_roots[i]);
  } else {
    out[0] = eval_real(E.real_roots[0]);
    Ival re = ival_exact(x.c[0]) + ival_exact(x.c[1]) * E.u +
              ival_exact(x.c[2]) * (E.u * E.u - E.v * E.v);
    Ival im = ival_exact(x.c[1]) * E.v +
              ival_exact(Rat(2) * x.c[2]) * (E.u * E.v);
    Rat n2 = (re.lo + re.hi) * (re.lo + re.hi) / 4 +
             (im.lo + im.hi) * (im.lo + im.hi) / 4;
    double l = d_log_abs(n2) / 2;
    out[1] = out[2] = l;
  }
  return out;
}

double linf3(const std::array<double, 3>& v) {
  return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
}

// Gaussian elimination: some rational solution of (cols of A) * c = b, for
// an m x t system with m >= t; nullopt if inconsistent.
std::optional<std::vector<Rat>> gauss_solve(std::vector<std::vector<Rat>> A,
                                            std::vector<Rat> b) {
  size_t m = A.size();
  size_t t = m ? A[0].size() : 0;
  std::vector<size_t> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < t && r < m; ++c) {
    size_t pr = r;
    while (pr < m && A[pr][c] == 0) ++pr;
    if (pr == m) continue;
    std::swap(A[pr], A[r]);
    std::swap(b[pr], b[r]);
    for (size_t i = 0; i < m; ++i) {
      if (i == r || A[i][c] == 0) continue;
      Rat f = A[i][c] / A[r][c];
      for (size_t j = c; j < t; ++j) A[i][j] -= f * A[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (size_t i = r; i < m; ++i)
    if (b[i] != 0) return std::nullopt;
  std::vector<Rat> c(t, Rat(0));
  for (size_t i = 0; i < pivot_col.size(); ++i)
    c[pivot_col[i]] = b[i] / A[i][pivot_col[i]];
  return c;
}

FE fe_pow_signed(const CubicFieldCtx& K, const FE& x, const Int& e) {
  if (e >= 0) return K.pow(x, e);
  return K.inv(K.pow(x, -e));
}

// Deterministic coordinate functionals on L*/(L*)^2: real signs, valuation
// parities at the support primes, residue symbols at auxiliary odd primes.
// Sound: a nonzero coordinate vector certifies a nontrivial square class.
struct Coords {
  const CubicFieldCtx& K;
  std::vector<PrimeIdeal> support;
  std::vector<Int> avoid;  // rational primes not usable as auxiliaries
  std::vector<PrimeIdeal> aux;
  Int next_p = 3;

  Coords(const CubicFieldCtx& k, std::vector<PrimeIdeal> sup,
         std::vector<Int> av)
      : K(k), support(std::move(sup)), avoid(std::move(av)) {}

  size_t width() const { return K.r1 + support.size() + aux.size(); }

  void grow() {
    while (true) {
      Int p = next_p;
      next_p = next_prime(next_p);
      if (K.disc_f % p == 0 || K.index % p == 0) continue;
      if (std::find(avoid.begin(), avoid.end(), p) != avoid.end()) continue;
      for (const auto& P : K.primes_above(p)) aux.push_back(P);
      return;
    }
  }

  F2Vec of(const FE& x) const {
    F2Vec v(width());
    size_t k = 0;
    for (int s : K.real_signs(x)) v.set(k++, s < 0);
    for (const auto& P : support) v.set(k++, valuation(K, x, P) & 1);
    for (const auto& P : aux) v.set(k++, odd_symbol(K, x, P) < 0);
    return v;
  }
};

std::vector<Int> sorted_s(std::vector<Int> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  auto it = std::find(s.begin(), s.end(), Int(2));
  if (it == s.end()) throw std::invalid_argument("S must contain 2");
  s.erase(it);
  s.insert(s.begin(), Int(2));
  return s;
}

}  // namespace

FieldInvariants::FieldInvariants(CtxPtr K) : K_(std::move(K)) {}

// ---------------- units ----------------

const UnitGroup& FieldInvariants::units_locked() const {
  if (units_) return *units_;
  const CubicFieldCtx& K = *K_;
  UnitGroup U;
  U.rank = K.r1 + K.r2 - 1;

  // factor base: all primes above rational p <= 60
  std::vector<Int> fb_p;
  std::vector<PrimeIdeal> fb;
  for (Int p = 2; p <= 60; p = next_prime(p)) {
    fb_p.push_back(p);
    for (const auto& P : K.primes_above(p)) fb.push_back(P);
  }
  size_t m = fb.size();

  // relation rows: exact prime factorizations of smooth elements;
  // a dependent row yields a multiplicative combination with trivial
  // factorization, i.e. a unit
  std::vector<std::vector<Int>> indep_rows;
  std::vector<FE> indep_elts;
  std::vector<FE> accepted;
  std::vector<std::array<double, 3>> acc_logs;

  auto log_independent = [&](const std::array<double, 3>& l) {
    // Gram-Schmidt residual against accepted logs
    std::array<double, 3> r = l;
    for (const auto& a : acc_logs) {
      double na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
      if (na < 1e-12) continue;
      double d = (r[0] * a[0] + r[1] * a[1] + r[2] * a[2]) / na;
      for (int i = 0; i < 3; ++i) r[i] -= d * a[i];
    }
    return r[0] * r[0] + r[1] * r[1] + r[2] * r[2] > 1e-8;
  };

  auto reduce_unit = [&](FE u) {
    // shrink the log vector against accepted units (and torsion sign)
    bool changed = true;
    int guard = 0;
    while (changed && ++guard < 200) {
      changed = false;
      auto lu = log_embed(K, u);
      double nu = lu[0] * lu[0] + lu[1] * lu[1] + lu[2] * lu[2];
      for (const auto& v : accepted) {
        auto lv = log_embed(K, v);
        double nv = lv[0] * lv[0] + lv[1] * lv[1] + lv[2] * lv[2];
        if (nv < 1e-12) continue;
        long q = std::lround((lu[0] * lv[0] + lu[1] * lv[1] + lu[2] * lv[2]) / nv);
        if (q == 0) continue;
        FE cand = K.div(u, fe_pow_signed(K, v, Int(q)));
        auto lc = log_embed(K, cand);
        if (linf3(lc) < 1e-7) continue;  // collapsed to torsion (v ~ u)
        if (lc[0] * lc[0] + lc[1] * lc[1] + lc[2] * lc[2] < nu - 1e-9) {
          u = cand;
          changed = true;
          break;
        }
      }
    }
    return u;
  };

  auto offer_unit = [&](const FE& u0) {
    if (u0.is_zero()) return;
    Rat n = K.norm(u0);
    if (!(n == 1 || n == -1)) return;
    FE u = reduce_unit(u0);
    auto l = log_embed(K, u);
    if (linf3(l) < 1e-7) return;  // torsion
    if (!log_independent(l)) return;
    accepted.push_back(u);
    acc_logs.push_back(l);
  };

  std::set<std::vector<std::string>> seen;
  double B = 40.0 * (1.0 + std::cbrt(std::fabs(K.disc_f.get_d())));
  for (int pass = 0; pass < 9 && (int)accepted.size() < U.rank; ++pass, B *= 3.5) {
    enumerate_below(K, identity_mat(3), B, [&](const ZVec& v) {
      std::vector<std::string> key = {v[0].get_str(), v[1].get_str(),
                                      v[2].get_str()};
      if (!seen.insert(key).second) return true;
      FE x = K.from_integral(v);
      Rat nr = K.norm(x);
      Int n = abs(nr.get_num());
      if (n == 1) {
        offer_unit(x);
        return (int)accepted.size() < U.rank;
      }
      // smoothness over the rational factor base
      Int rem = n;
      for (const Int& p : fb_p)
        while (rem % p == 0) rem /= p;
      if (rem != 1) return true;
      std::vector<Int> row(m, Int(0));
      for (size_t i = 0; i < m; ++i)
        if (n % fb[i].p == 0) row[i] = valuation_int_elem(K, v, fb[i]);
      // dependent on the kept rows? then combine into a unit
      std::vector<std::vector<Rat>> A(m, std::vector<Rat>(indep_rows.size()));
      std::vector<Rat> rhs(m);
      for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < indep_rows.size(); ++j) A[i][j] = indep_rows[j][i];
        rhs[i] = row[i];
      }
      auto c = indep_rows.empty() ? std::nullopt : gauss_solve(A, rhs);
      if (!c) {
        indep_rows.push_back(row);
        indep_elts.push_back(x);
        return true;
      }
      Int d = 1;
      for (const Rat& ci : *c) {
        Int dd = ci.get_den();
        d = d / gcd(d, dd) * dd;
      }
      FE u = K.pow(x, d);
      for (size_t j = 0; j < c->size(); ++j) {
        Rat e = -(*c)[j] * d;
        if (e == 0) continue;
        u = K.mul(u, fe_pow_signed(K, indep_elts[j], e.get_num()));
      }
      offer_unit(u);
      return (int)accepted.size() < U.rank;
    });
  }
  if ((int)accepted.size() < U.rank)
    throw BoundExceeded("unit search: rank not reached");

  // 2-saturation: no product of generators (up to sign) may be a square
  bool sat_changed = true;
  int guard = 0;
  while (sat_changed && ++guard < 64) {
    sat_changed = false;
    for (int mask = 1; mask < (1 << U.rank) && !sat_changed; ++mask) {
      for (int sg = 0; sg < 2 && !sat_changed; ++sg) {
        FE s = FE::from_int(sg ? -1 : 1);
        for (int i = 0; i < U.rank; ++i)
          if (mask & (1 << i)) s = K.mul(s, accepted[i]);
        if (auto rt = K.sqrt_in_L(s)) {
          int lo = __builtin_ctz(mask);
          accepted[lo] = reduce_unit(*rt);
          sat_changed = true;
        }
      }
    }
  }

  U.gens = accepted;
  units_ = std::move(U);
  return *units_;
}

const UnitGroup& FieldInvariants::units() const {
  std::lock_guard<std::mutex> lk(mu_);
  return units_locked();
}

std::vector<FE> FieldInvariants::unit_square_basis() const {
  std::lock_guard<std::mutex> lk(mu_);
  const UnitGroup& U = units_locked();
  std::vector<FE> out = {FE::from_int(-1)};
  out.insert(out.end(), U.gens.begin(), U.gens.end());
  return out;
}

// ---------------- principality ----------------

std::optional<FE> FieldInvariants::small_generator_locked(const ZMat& C) const {
  const CubicFieldCtx& K = *K_;
  Int N = ideal_norm(C);
  if (N == 1) return FE::from_int(1);
  const UnitGroup& U = units_locked();

  std::vector<std::array<double, 3>> b;
  for (const FE& u : U.gens) b.push_back(log_embed(K, u));

  const double Kfac = 60.0;
  const double delta = std::log(Kfac) / 2;
  int rank = (int)b.size();
  std::vector<int> mj(rank, 1);
  for (int j = 0; j < rank; ++j)
    mj[j] = std::max(1, (int)std::ceil(rank * linf3(b[j]) / (2 * delta)));

  double Nd = N.get_d();
  double bound = 3.0 * std::cbrt(Nd) * std::cbrt(Nd) * Kfac * 1.05;

  std::optional<FE> found;
  std::vector<int> kk(rank, 0);
  while (true) {
    std::array<double, 3> g{};
    for (int j = 0; j < rank; ++j) {
      double t = (kk[j] + 0.5) / mj[j] - 0.5;
      for (int i = 0; i < 3; ++i) g[i] += t * b[j][i];
    }
    double w[3] = {std::exp(-g[0]), std::exp(-g[1]), std::exp(-g[2])};
    enumerate_below(K, C, bound,
                    [&](const ZVec& v) {
                      Rat n = K.norm(K.from_integral(v));
                      Int an = abs(n.get_num());
                      if (an == N) {
                        found = K.from_integral(v);
                        return false;
                      }
                      return true;
                    },
                    20000000, w);
    if (found) return found;
    int j = 0;
    while (j < rank && ++kk[j] == mj[j]) kk[j++] = 0;
    if (j == rank) break;
    if (rank == 0) break;
  }
  return std::nullopt;
}

std::optional<FE> FieldInvariants::principal_generator_locked(const ZMat& A) const {
  const CubicFieldCtx& K = *K_;
  if (lattice_index(A) == 1) return FE::from_int(1);
  ZVec g0 = short_vector(K, A);
  ZMat A2 = ideal_colon(K, principal_ideal(K, g0), A);
  auto beta = small_generator_locked(A2);
  if (!beta) return std::nullopt;
  FE gen = K.div(K.from_integral(g0), *beta);
  auto gi = K.to_integral_exact(gen);
  if (!gi || principal_ideal(K, *gi) != A)
    throw std::logic_error("principal_generator: verification failed");
  return gen;
}

std::optional<FE> FieldInvariants::principal_generator(const ZMat& A) const {
  std::lock_guard<std::mutex> lk(mu_);
  return principal_generator_locked(A);
}

// ---------------- class group ----------------

namespace {

// reduce an ideal to a small-norm ideal in the same class (two colon steps,
// each of which inverts the class)
ZMat reduce_class(const CubicFieldCtx& K, ZMat A) {
  for (int t = 0; t < 2; ++t) {
    ZVec g = short_vector(K, A);
    A = ideal_colon(K, principal_ideal(K, g), A);
  }
  return A;
}

}  // namespace

const ClassGroupData& FieldInvariants::cl_locked() const {
  if (cl_) return *cl_;
  const CubicFieldCtx& K = *K_;
  ClassGroupData C;
  double mk = (6.0 / 27.0) * std::pow(4.0 / 3.14159265358979, K.r2) *
              std::sqrt(std::fabs(K.field_disc.get_d()));
  C.minkowski = Int((long)std::ceil(mk));

  std::vector<PrimeIdeal> fb;
  for (Int p = 2; p <= C.minkowski; p = next_prime(p))
    for (const auto& P : K.primes_above(p))
      if (P.norm() <= C.minkowski) fb.push_back(P);

  std::vector<ZMat> reps = {identity_mat(3)};
  auto find_class = [&](const ZMat& A) -> int {
    ZMat R = reduce_class(K, A);
    for (size_t j = 0; j < reps.size(); ++j)
      if (R == reps[j]) return (int)j;
    for (size_t j = 0; j < reps.size(); ++j) {
      Int nb = ideal_norm(reps[j]);
      ZMat conj = ideal_colon(K, principal_ideal(K, {nb, Int(0), Int(0)}),
                              reps[j]);
      if (principal_generator_locked(ideal_mul(K, R, conj))) return (int)j;
    }
    return -1;
  };

  size_t head = 0;
  while (head < reps.size()) {
    ZMat cur = reps[head++];
    for (const auto& P : fb) {
      ZMat prod = ideal_mul(K, cur, P.hnf);
      if (find_class(prod) == -1) reps.push_back(reduce_class(K, prod));
    }
  }

  size_t h = reps.size();
  C.reps = reps;
  C.mul.assign(h, std::vector<int>(h, 0));
  for (size_t i = 0; i < h; ++i)
    for (size_t j = i; j < h; ++j) {
      int k = find_class(ideal_mul(K, reps[i], reps[j]));
      if (k < 0) throw std::logic_error("class_group: product class missing");
      C.mul[i][j] = C.mul[j][i] = k;
    }

  // F2 basis of the 2-torsion subgroup
  std::vector<int> tor;
  for (size_t i = 0; i < h; ++i)
    if (C.mul[i][i] == 0) tor.push_back((int)i);
  std::set<int> sub = {0};
  for (int t : tor) {
    if (t == 0 || sub.count(t)) continue;
    C.two_torsion_basis.push_back(t);
    std::set<int> ext;
    for (int s : sub) {
      ext.insert(s);
      ext.insert(C.mul[s][t]);
    }
    sub = ext;
  }
  C.two_rank = (int)C.two_torsion_basis.size();
  if ((size_t)1 << C.two_rank != tor.size())
    throw std::logic_error("class_group: 2-torsion count mismatch");
  cl_ = std::move(C);
  return *cl_;
}

const ClassGroupData& FieldInvariants::class_group_2part() const {
  std::lock_guard<std::mutex> lk(mu_);
  return cl_locked();
}

int FieldInvariants::class_index_locked(const ZMat& A) const {
  const ClassGroupData& C = cl_locked();
  ZMat R = reduce_class(*K_, A);
  for (size_t j = 0; j < C.reps.size(); ++j)
    if (R == C.reps[j]) return (int)j;
  for (size_t j = 0; j < C.reps.size(); ++j) {
    Int nb = ideal_norm(C.reps[j]);
    ZMat conj = ideal_colon(*K_, principal_ideal(*K_, {nb, Int(0), Int(0)}),
                            C.reps[j]);
    if (principal_generator_locked(ideal_mul(*K_, R, conj))) return (int)j;
  }
  throw std::logic_error("class_index: class not represented");
}

int FieldInvariants::class_index(const ZMat& A) const {
  std::lock_guard<std::mutex> lk(mu_);
  return class_index_locked(A);
}

// ---------------- L(S,2) ----------------

SelmerBasisS FieldInvariants::s2_locked(const std::vector<Int>& s_in) const {
  std::vector<Int> s_finite = sorted_s(s_in);
  auto hit = s2_cache_.find(s_finite);
  if (hit != s2_cache_.end()) return hit->second;

  const CubicFieldCtx& K = *K_;
  const UnitGroup& U = units_locked();
  const ClassGroupData& C = cl_locked();

  SelmerBasisS out;
  out.s_finite = s_finite;
  for (const Int& q : s_finite)
    for (const auto& P : K.primes_above(q)) out.s_primes.push_back(P);
  size_t s = out.s_primes.size();

  // classes of the S-primes and the subgroup H they generate, with one
  // non-negative exponent-vector expression per member (BFS tree)
  std::vector<int> phi(s);
  for (size_t i = 0; i < s; ++i) phi[i] = class_index_locked(out.s_primes[i].hnf);
  std::map<int, std::vector<Int>> H;
  H[0] = std::vector<Int>(s, Int(0));
  std::vector<int> queue = {0};
  while (!queue.empty()) {
    int h = queue.back();
    queue.pop_back();
    for (size_t i = 0; i < s; ++i) {
      int h2 = C.mul[h][phi[i]];
      if (!H.count(h2)) {
        auto w = H[h];
        w[i] += 1;
        H[h2] = w;
        queue.push_back(h2);
      }
    }
  }

  // kernel lattice of Z^s -> Cl from Schreier generators, HNF basis
  std::vector<std::vector<Int>> lam_gens;
  for (const auto& [h, w] : H)
    for (size_t i = 0; i < s; ++i) {
      int h2 = C.mul[h][phi[i]];
      std::vector<Int> v = w;
      v[i] += 1;
      const auto& w2 = H.at(h2);
      for (size_t t = 0; t < s; ++t) v[t] -= w2[t];
      bool zero = true;
      for (const auto& e : v) zero = zero && e == 0;
      if (!zero) lam_gens.push_back(v);
    }
  for (size_t i = 0; i < s; ++i) {
    // class orders as a fallback generating set (always in the kernel)
    std::vector<Int> v(s, Int(0));
    int acc = phi[i];
    Int o = 1;
    while (acc != 0) {
      acc = C.mul[acc][phi[i]];
      ++o;
    }
    v[i] = o;
    lam_gens.push_back(v);
  }
  ZMat G = zmat(s, lam_gens.size());
  for (size_t j = 0; j < lam_gens.size(); ++j)
    for (size_t i = 0; i < s; ++i) G[i][j] = lam_gens[j][i];
  ZMat lam = hnf_lattice(G);

  // quotient Cl / H: coset labels and the 2-torsion basis of the quotient
  size_t h_cl = C.reps.size();
  std::vector<int> coset(h_cl, -1);
  std::vector<int> coset_rep;
  for (size_t i = 0; i < h_cl; ++i) {
    if (coset[i] != -1) continue;
    int id = (int)coset_rep.size();
    for (const auto& [hh, w] : H) coset[C.mul[i][hh]] = id;
    coset_rep.push_back((int)i);
  }
  size_t qn = coset_rep.size();
  auto qmul = [&](int a, int b) { return coset[C.mul[coset_rep[a]][coset_rep[b]]]; };
  std::vector<int> q_tor;
  for (size_t i = 0; i < qn; ++i)
    if (qmul((int)i, (int)i) == 0) q_tor.push_back((int)i);
  std::vector<int> q_basis;
  std::set<int> q_sub = {0};
  for (int t : q_tor) {
    if (t == 0 || q_sub.count(t)) continue;
    q_basis.push_back(t);
    std::set<int> ext;
    for (int x : q_sub) {
      ext.insert(x);
      ext.insert(qmul(x, t));
    }
    q_sub = ext;
  }

  size_t expected = 1 + U.rank + s + q_basis.size();

  // candidate generators, in the fixed deterministic order
  std::vector<FE> cand;
  cand.push_back(FE::from_int(-1));
  for (const FE& u : U.gens) cand.push_back(u);
  for (size_t j = 0; j < s; ++j) {
    ZMat A = identity_mat(3);
    for (size_t i = 0; i < s; ++i)
      if (lam[i][j] != 0)
        A = ideal_mul(K, A, K.prime_power(out.s_primes[i],
                                          (int)lam[i][j].get_si()));
    auto g = principal_generator_locked(A);
    if (!g) throw std::logic_error("s2_group_basis: kernel ideal not principal");
    cand.push_back(*g);
  }
  for (int qb : q_basis) {
    int ci = coset_rep[qb];
    ZMat A = ideal_mul(K, C.reps[ci], C.reps[ci]);
    // cancel the residual H-part of [A] with S-prime factors
    int idx = class_index_locked(A);
    int inv = -1;
    for (const auto& [hh, w] : H)
      if (C.mul[idx][hh] == 0) inv = hh;
    if (inv == -1) throw std::logic_error("s2_group_basis: quotient torsion");
    const auto& w = H.at(inv);
    for (size_t i = 0; i < s; ++i)
      if (w[i] != 0)
        A = ideal_mul(K, A, K.prime_power(out.s_primes[i], (int)w[i].get_si()));
    auto g = principal_generator_locked(A);
    if (!g) throw std::logic_error("s2_group_basis: lift not principal");
    cand.push_back(*g);
  }

  // certify F2-independence via separating coordinates
  Coords co(K, out.s_primes, s_finite);
  for (int i = 0; i < 8; ++i) co.grow();
  for (int attempt = 0;; ++attempt) {
    F2Span span(co.width());
    std::vector<FE> chosen;
    for (const FE& x : cand)
      if (span.add(co.of(x))) chosen.push_back(x);
    if (chosen.size() == expected && chosen.size() == cand.size()) break;
    if (chosen.size() > expected)
      throw DimensionMismatch("s2_group_basis: dimension exceeds expectation");
    if (attempt >= 24)
      throw DimensionMismatch("s2_group_basis: dimension below expectation");
    co.grow();
  }

  for (const FE& x : cand) {
    SquareClassVector sc;
    sc.alpha = x;
    for (const auto& P : out.s_primes)
      sc.s_exponents.push_back(valuation(K, x, P));
    Rat n = K.norm(x);
    sc.norm_class = Rat(squarefree_part(n.get_num() * n.get_den()));
    out.basis.push_back(sc);
  }
  s2_cache_[s_finite] = out;
  return out;
}

SelmerBasisS FieldInvariants::s2_group_basis(const std::vector<Int>& s_finite) const {
  std::lock_guard<std::mutex> lk(mu_);
  return s2_locked(s_finite);
}

int FieldInvariants::cl_s_two_rank(const std::vector<Int>& s_in) const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<Int> s_finite = sorted_s(s_in);
  const CubicFieldCtx& K = *K_;
  const ClassGroupData& C = cl_locked();
  std::set<int> H = {0};
  for (const Int& q : s_finite)
    for (const auto& P : K.primes_above(q)) {
      int g = class_index_locked(P.hnf);
      std::set<int> ext = H;
      bool grew = true;
      while (grew) {
        grew = false;
        std::set<int> nxt = ext;
        for (int x : ext) {
          if (nxt.insert(C.mul[x][g]).second) grew = true;
        }
        ext = nxt;
      }
      H = ext;
    }
  size_t h_cl = C.reps.size();
  std::vector<int> coset(h_cl, -1);
  std::vector<int> coset_rep;
  for (size_t i = 0; i < h_cl; ++i) {
    if (coset[i] != -1) continue;
    int id = (int)coset_rep.size();
    for (int hh : H) coset[C.mul[i][hh]] = id;
    coset_rep.push_back((int)i);
  }
  int count = 0;
  for (size_t i = 0; i < coset_rep.size(); ++i)
    if (coset[C.mul[coset_rep[i]][coset_rep[i]]] == 0) ++count;
  int rank = 0;
  while ((1 << rank) < count) ++rank;
  if ((1 << rank) != count)
    throw std::logic_error("cl_s_two_rank: torsion count not a 2-power");
  return rank;
}

// ---------------- H1 (norm kernel) ----------------

SelmerBasisS FieldInvariants::h1_global(const std::vector<Int>& s_in) const {
  std::vector<Int> s_finite = sorted_s(s_in);
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto hit = h1_cache_.find(s_finite);
    if (hit != h1_cache_.end()) return hit->second;
  }
  if (auto disk = load_cached_basis(*K_, s_finite)) {
    std::lock_guard<std::mutex> lk(mu_);
    h1_cache_[s_finite] = *disk;
    return *disk;
  }
  SelmerBasisS s2 = s2_group_basis(s_finite);
  const CubicFieldCtx& K = *K_;

  // F2 coordinates of the basis norms in Q*/(Q*)^2
  std::vector<Int> prime_support;
  std::vector<Int> cls(s2.basis.size());
  for (size_t i = 0; i < s2.basis.size(); ++i) {
    cls[i] = s2.basis[i].norm_class.get_num();
    for (const auto& [p, e] : factor(abs(cls[i])))
      if (std::find(prime_support.begin(), prime_support.end(), p) ==
          prime_support.end())
        prime_support.push_back(p);
  }
  std::sort(prime_support.begin(), prime_support.end());
  size_t w = 1 + prime_support.size();
  F2Matrix M(s2.basis.size());
  for (size_t r = 0; r < w; ++r) {
    F2Vec row(s2.basis.size());
    for (size_t i = 0; i < s2.basis.size(); ++i) {
      bool bit = r == 0 ? cls[i] < 0
                        : valuation_int(abs(cls[i]), prime_support[r - 1]) & 1;
      row.set(i, bit);
    }
    M.add_row(row);
  }

  SelmerBasisS out;
  out.s_finite = s2.s_finite;
  out.s_primes = s2.s_primes;
  for (const F2Vec& kv : M.kernel()) {
    FE x = FE::from_int(1);
    for (size_t i = 0; i < s2.basis.size(); ++i)
      if (kv.get(i)) x = K.mul(x, s2.basis[i].alpha);
    SquareClassVector sc;
    sc.alpha = x;
    for (const auto& P : out.s_primes)
      sc.s_exponents.push_back(valuation(K, x, P));
    Rat n = K.norm(x);
    sc.norm_class = Rat(squarefree_part(n.get_num() * n.get_den()));
    if (sc.norm_class != 1)
      throw std::logic_error("h1_global: kernel element has nonsquare norm");
    out.basis.push_back(sc);
  }

  // dimension identity: (1 + eps) + sum_q (n_q - 1) + dim Cl_S[2]
  int expected = 1 + K.epsilon;
  for (const Int& q : out.s_finite) expected += K.n_p(q) - 1;
  expected += cl_s_two_rank(s_finite);
  if ((int)out.basis.size() != expected)
    throw DimensionMismatch("h1_global: dimension formula violated");

  store_cached_basis(*K_, s_finite, out);
  std::lock_guard<std::mutex> lk(mu_);
  h1_cache_[s_finite] = out;
  return out;
}

// ---------------- membership ----------------

std::optional<F2Vec> FieldInvariants::express(const SelmerBasisS& B,
                                              const FE& alpha) const {
  const CubicFieldCtx& K = *K_;
  Coords co(K, B.s_primes, B.s_finite);
  for (int i = 0; i < 8; ++i) co.grow();
  for (int attempt = 0; attempt < 24; ++attempt) {
    // kernel combinations of [basis | alpha]
    F2Matrix M(B.basis.size() + 1);
    std::vector<F2Vec> img;
    for (const auto& b : B.basis) img.push_back(co.of(b.alpha));
    F2Vec av = co.of(alpha);
    for (size_t r = 0; r < co.width(); ++r) {
      F2Vec row(B.basis.size() + 1);
      for (size_t i = 0; i < img.size(); ++i) row.set(i, img[i].get(r));
      row.set(img.size(), av.get(r));
      M.add_row(row);
    }
    std::optional<F2Vec> cand;
    for (const F2Vec& kv : M.kernel())
      if (kv.get(B.basis.size())) {
        cand = kv;
        break;
      }
    if (!cand) return std::nullopt;  // independent: certified by coordinates
    FE prod = alpha;
    for (size_t i = 0; i < B.basis.size(); ++i)
      if (cand->get(i)) prod = K.mul(prod, B.basis[i].alpha);
    if (K.sqrt_in_L(prod)) {
      F2Vec c(B.basis.size());
      for (size_t i = 0; i < B.basis.size(); ++i) c.set(i, cand->get(i));
      return c;
    }
    co.grow();  // false match: refine the separating coordinates
  }
  throw std::logic_error("express: separating coordinates exhausted");
}

}  // namespace selmer
