#include "polymod.hpp"

#include <algorithm>

namespace selmer::polymod {

namespace {

std::vector<Int> roots_bruteforce(const Poly& f, const Int& p) {
  std::vector<Int> out;
  for (Int x = 0; x < p; ++x)
    if (eval(f, x, p) == 0) out.push_back(x);
  return out;
}

std::vector<Int> roots_quadratic(const Poly& f, const Int& p) {
  // monic x^2 + bx + c over F_p, p odd
  Int b = f[1], c = f[0];
  Int disc = pmod(b * b - 4 * c, p);
  if (disc == 0) return {pmod(-b * invmod(2, p), p)};
  if (legendre(disc, p) != 1) return {};
  Int s = mod_sqrt(disc, p);
  Int inv2 = invmod(2, p);
  Int r1 = pmod((-b + s) * inv2, p), r2 = pmod((-b - s) * inv2, p);
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

}  // namespace

std::vector<Int> roots_squarefree(const Poly& f, const Int& p) {
  if (p < 64) {
    auto r = roots_bruteforce(f, p);
    std::sort(r.begin(), r.end());
    return r;
  }
  int d = deg(f);
  if (d <= 0) return {};
  if (d == 1) return {pmod(-f[0] * invmod(f[1], p), p)};
  if (d == 2) return roots_quadratic(monic(f, p), p);
  // degree 3: isolate the product of linear factors
  Poly xp = powmod_poly({0, 1}, p, f, p);  // x^p mod f
  Poly lin = gcd(sub(xp, {0, 1}, p), f, p);
  int dl = deg(lin);
  if (dl <= 0) return {};
  if (dl == 1) return {pmod(-lin[0], p)};
  if (dl == 2) return roots_quadratic(lin, p);
  // three roots: split with gcd((x+c)^((p-1)/2) - 1, lin), c = 0,1,2,...
  for (Int c = 0; c < 100000; ++c) {
    Poly g = powmod_poly({c, 1}, (p - 1) / 2, lin, p);
    g = sub(g, {1}, p);
    Poly h = gcd(g, lin, p);
    int dh = deg(h);
    if (dh <= 0 || dh >= 3) continue;
    auto [q, rem] = divmod(lin, h, p);
    std::vector<Int> out = (dh == 1) ? std::vector<Int>{pmod(-h[0], p)}
                                     : roots_quadratic(h, p);
    auto rest = (deg(q) == 1) ? std::vector<Int>{pmod(-q[0] * invmod(q[1], p), p)}
                              : roots_quadratic(monic(q, p), p);
    out.insert(out.end(), rest.begin(), rest.end());
    std::sort(out.begin(), out.end());
    return out;
  }
  throw std::logic_error("roots_squarefree: splitting failed");
}

std::vector<std::pair<Poly, int>> factor_monic(const Poly& f0, const Int& p) {
  Poly f = reduce(f0, p);
  if (deg(f) < 1 || f.back() != 1)
    throw std::domain_error("factor_monic: expect monic, degree >= 1");
  // distinct linear part: gcd(x^p - x, f); works regardless of repeated
  // factors since x^p - x is squarefree
  Poly t = powmod_poly({0, 1}, p, f, p);
  t = sub(t, {0, 1}, p);
  Poly lin_part = t.empty() ? f : gcd(t, f, p);
  std::vector<Poly> irr;
  Poly rem = f;
  if (deg(lin_part) >= 1)
    for (const Int& r : roots_squarefree(monic(lin_part, p), p)) {
      Poly lin = {pmod(-r, p), 1};
      irr.push_back(lin);
      while (deg(rem) >= 1) {
        auto [q, rr] = divmod(rem, lin, p);
        if (!rr.empty()) break;
        rem = q;
      }
    }
  // for degree <= 3, what survives after removing all linear factors is a
  // single irreducible factor of degree 2 or 3
  if (deg(rem) >= 1) irr.push_back(monic(rem, p));
  // multiplicities by trial division of f
  std::vector<std::pair<Poly, int>> out;
  for (const Poly& g : irr) {
    int m = 0;
    Poly rem = f;
    while (deg(rem) >= deg(g)) {
      auto [q, rr] = divmod(rem, g, p);
      if (!rr.empty()) break;
      ++m;
      rem = q;
    }
    if (m > 0) out.push_back({g, m});
  }
  // deterministic order: by degree, then coefficients
  std::sort(out.begin(), out.end(), [](const auto& A, const auto& B) {
    if (A.first.size() != B.first.size()) return A.first.size() < B.first.size();
    for (size_t i = A.first.size(); i-- > 0;)
      if (A.first[i] != B.first[i]) return A.first[i] < B.first[i];
    return false;
  });
  // sanity: degrees with multiplicity sum to deg f
  int total = 0;
  for (auto& [g, m] : out) total += deg(g) * m;
  if (total != deg(f)) throw std::logic_error("factor_monic: lost a factor");
  return out;
}

}  // namespace selmer::polymod
