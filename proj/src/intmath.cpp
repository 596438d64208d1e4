#include "selmer/intmath.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace selmer {

bool is_prime(const Int& n) {
  if (n < 2) return false;
  return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

Int next_prime(const Int& n) {
  Int r;
  mpz_nextprime(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

Int powmod(const Int& base, const Int& exp, const Int& mod) {
  Int r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

Int invmod(const Int& a, const Int& mod) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0)
    throw std::domain_error("invmod: not invertible");
  return r;
}

namespace {

Int pollard_rho(const Int& n) {
  // Brent's cycle variant; n odd composite, not a prime power of a tiny prime.
  for (Int c = 1;; ++c) {
    Int x = 2, y = 2, d = 1;
    Int ys, q = 1;
    const int m = 64;
    int r = 1;
    while (d == 1) {
      x = y;
      for (int i = 0; i < r; ++i) y = (y * y + c) % n;
      for (int k = 0; k < r && d == 1; k += m) {
        ys = y;
        for (int i = 0; i < std::min(m, r - k); ++i) {
          y = (y * y + c) % n;
          q = q * ((x > y) ? x - y : y - x) % n;
        }
        d = gcd(q, n);
      }
      r *= 2;
      if (r > (1 << 22)) break;
    }
    if (d == n) {
      // backtrack
      d = 1;
      while (d == 1) {
        ys = (ys * ys + c) % n;
        d = gcd((x > ys) ? x - ys : ys - x, n);
      }
    }
    if (d != n && d != 1) return d;
  }
}

void factor_into(Int n, std::map<Int, int>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out[n]++;
    return;
  }
  // perfect power?
  if (mpz_perfect_power_p(n.get_mpz_t())) {
    for (unsigned long k = 2; k <= mpz_sizeinbase(n.get_mpz_t(), 2); ++k) {
      Int root;
      if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) {
        std::map<Int, int> sub;
        factor_into(root, sub);
        for (auto& [p, e] : sub) out[p] += e * (int)k;
        return;
      }
    }
  }
  Int d = pollard_rho(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace

Factorization factor(const Int& n) {
  if (n == 0) throw std::domain_error("factor(0)");
  Int m = abs(n);
  std::map<Int, int> out;
  for (uint64_t p : small_primes(1 << 16)) {
    if (m == 1) break;
    Int P = (unsigned long)p;
    if (P * P > m) break;
    while (mpz_divisible_p(m.get_mpz_t(), P.get_mpz_t())) {
      out[P]++;
      m /= P;
    }
  }
  if (m > 1) factor_into(m, out);
  return Factorization(out.begin(), out.end());
}

Int squarefree_part(const Int& n) {
  Int r = (n < 0) ? Int(-1) : Int(1);
  for (auto& [p, e] : factor(n))
    if (e & 1) r *= p;
  return r;
}

bool is_square(const Int& n) {
  return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

std::optional<Int> exact_sqrt(const Int& n) {
  if (!is_square(n)) return std::nullopt;
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

int jacobi(const Int& a, const Int& n) {
  return mpz_jacobi(a.get_mpz_t(), n.get_mpz_t());
}

int legendre(const Int& a, const Int& p) {
  int j = mpz_legendre(a.get_mpz_t(), p.get_mpz_t());
  if (j == 0) throw std::domain_error("legendre: argument divisible by p");
  return j;
}

Int mod_sqrt(const Int& a0, const Int& p) {
  Int a = ((a0 % p) + p) % p;
  if (a == 0) return 0;
  if (p == 2) return a;
  if (legendre(a, p) != 1) throw std::domain_error("mod_sqrt: nonresidue");
  if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
  // Tonelli-Shanks with deterministic nonresidue search
  Int q = p - 1;
  int s = 0;
  while (q % 2 == 0) {
    q /= 2;
    ++s;
  }
  Int z = 2;
  while (legendre(z, p) != -1) ++z;
  Int m = s, c = powmod(z, q, p), t = powmod(a, q, p),
      r = powmod(a, (q + 1) / 2, p);
  while (t != 1) {
    Int tt = t;
    int i = 0;
    while (tt != 1) {
      tt = tt * tt % p;
      ++i;
    }
    Int b = c;
    for (Int j = 0; j < m - i - 1; ++j) b = b * b % p;
    m = i;
    c = b * b % p;
    t = t * c % p;
    r = r * b % p;
  }
  return r;
}

int valuation_int(const Int& n, const Int& p) {
  if (n == 0) throw std::domain_error("valuation_int(0)");
  Int m = abs(n);
  int v = 0;
  while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
    m /= p;
    ++v;
  }
  return v;
}

std::vector<Int> divisors(const Int& n) {
  std::vector<Int> ds{1};
  for (auto& [p, e] : factor(n)) {
    size_t sz = ds.size();
    Int pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (size_t i = 0; i < sz; ++i) ds.push_back(ds[i] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

const std::vector<uint64_t>& small_primes(uint64_t bound) {
  static std::mutex mu;
  static std::vector<uint64_t> primes;
  static uint64_t sieved = 0;
  std::lock_guard<std::mutex> lock(mu);
  if (bound > sieved) {
    primes.clear();
    std::vector<bool> comp(bound + 1, false);
    for (uint64_t i = 2; i <= bound; ++i) {
      if (!comp[i]) {
        primes.push_back(i);
        for (uint64_t j = i * i; j <= bound; j += i) comp[j] = true;
      }
    }
    sieved = bound;
  }
  return primes;
}

}  // namespace selmer
