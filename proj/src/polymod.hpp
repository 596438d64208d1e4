#pragma once

// Small dense polynomials over F_p (ascending coefficients, reduced mod p).
// Only what prime splitting of a cubic needs: degree stays tiny.

#include <stdexcept>
#include <vector>

#include "selmer/intmath.hpp"

namespace selmer::polymod {

using Poly = std::vector<Int>;  // ascending; may have leading zeros until trim

inline Int pmod(const Int& x, const Int& p) {
  Int r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t());
  return r;
}

inline void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

inline int deg(const Poly& f) { return (int)f.size() - 1; }

inline Poly reduce(Poly f, const Int& p) {
  for (auto& c : f) c = pmod(c, p);
  trim(f);
  return f;
}

inline Poly add(const Poly& a, const Poly& b, const Int& p) {
  Poly r(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] = pmod(r[i] + b[i], p);
  trim(r);
  return r;
}

inline Poly sub(const Poly& a, const Poly& b, const Int& p) {
  Poly r(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] = pmod(r[i] - b[i], p);
  trim(r);
  return r;
}

inline Poly mul(const Poly& a, const Poly& b, const Int& p) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return reduce(std::move(r), p);
}

// division with remainder; g monic-izable (leading coeff invertible mod p)
inline std::pair<Poly, Poly> divmod(Poly f, const Poly& g, const Int& p) {
  if (g.empty()) throw std::domain_error("polymod: division by zero");
  Int lead_inv = invmod(g.back(), p);
  Poly q(f.size() > g.size() - 1 ? f.size() - g.size() + 1 : 0, 0);
  while (deg(f) >= deg(g)) {
    Int c = pmod(f.back() * lead_inv, p);
    int shift = deg(f) - deg(g);
    q[shift] = c;
    for (size_t i = 0; i < g.size(); ++i)
      f[shift + i] = pmod(f[shift + i] - c * g[i], p);
    trim(f);
  }
  trim(q);
  return {q, f};
}

inline Poly poly_mod(const Poly& f, const Poly& g, const Int& p) {
  return divmod(f, g, p).second;
}

inline Poly monic(Poly f, const Int& p) {
  if (f.empty()) return f;
  Int inv = invmod(f.back(), p);
  for (auto& c : f) c = pmod(c * inv, p);
  return f;
}

inline Poly gcd(Poly a, Poly b, const Int& p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a, p);
}

inline Poly derivative(const Poly& f, const Int& p) {
  Poly r;
  for (size_t i = 1; i < f.size(); ++i) r.push_back(pmod(f[i] * Int((long)i), p));
  trim(r);
  return r;
}

// base^e mod (g, p)
inline Poly powmod_poly(Poly base, Int e, const Poly& g, const Int& p) {
  Poly r = {1};
  base = poly_mod(base, g, p);
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = poly_mod(mul(r, base, p), g, p);
    base = poly_mod(mul(base, base, p), g, p);
    e >>= 1;
  }
  return r;
}

inline Int eval(const Poly& f, const Int& x, const Int& p) {
  Int r = 0;
  for (size_t i = f.size(); i-- > 0;) r = pmod(r * x + f[i], p);
  return r;
}

// All roots in F_p of a monic squarefree polynomial of degree <= 3.
std::vector<Int> roots_squarefree(const Poly& f, const Int& p);

// Full factorization of a monic polynomial of degree <= 3 over F_p:
// list of (monic irreducible factor, multiplicity), deterministic order.
std::vector<std::pair<Poly, int>> factor_monic(const Poly& f, const Int& p);

}  // namespace selmer::polymod
