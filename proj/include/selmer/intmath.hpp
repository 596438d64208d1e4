#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace selmer {

using Int = mpz_class;
using Rat = mpq_class;

// Factorization as ordered (prime, exponent) pairs, primes ascending.
using Factorization = std::vector<std::pair<Int, int>>;

bool is_prime(const Int& n);
Int next_prime(const Int& n);

// Full factorization of |n| (trial division + Pollard rho).  n != 0.
Factorization factor(const Int& n);

// Signed squarefree part: n = squarefree_part(n) * square.
Int squarefree_part(const Int& n);

bool is_square(const Int& n);
// sqrt if n is a perfect square
std::optional<Int> exact_sqrt(const Int& n);

// Jacobi symbol (a/n), n odd positive.
int jacobi(const Int& a, const Int& n);

// Legendre symbol (a/p), p an odd prime, p does not divide a.
int legendre(const Int& a, const Int& p);

// A square root of a mod p (p odd prime, (a/p)=1).  Deterministic.
Int mod_sqrt(const Int& a, const Int& p);

Int powmod(const Int& base, const Int& exp, const Int& mod);
Int invmod(const Int& a, const Int& mod);

// v_p(n) for n != 0.
int valuation_int(const Int& n, const Int& p);

// All positive divisors of |n| (n != 0), ascending.
std::vector<Int> divisors(const Int& n);

// Primes in [2, bound], ascending.
const std::vector<uint64_t>& small_primes(uint64_t bound = 1 << 20);

}  // namespace selmer
