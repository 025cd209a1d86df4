"""Small integer arithmetic used everywhere else: sieves, factoring, lcm with
an explicit overflow signal, and a general CRT pair solver.

Everything here is deterministic and exact.  Factoring is plain trial division
up to the square root, which is all the rest of the package needs (inputs stay
well under 10^12).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# lcm_checked signals above this (unsigned 64-bit range).
U64_MAX = 2**64 - 1
# Moduli accepted by the orbit routines.  Kept below 2**62 so a product of two
# reduced residues always fits double-width arithmetic; Python ints would not
# overflow anyway, but the bound is part of the API contract.
MODULUS_MAX = 2**62


def sieve_primes(limit: int) -> list[int]:
    """All primes <= limit, ascending.  Empty list for limit < 2."""
    if limit < 2:
        return []
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return [int(p) for p in np.nonzero(mask)[0]]


def mobius_sieve(limit: int) -> np.ndarray:
    """Array m with m[n] = mu(n) for 1 <= n <= limit (m[0] is 0).

    Linear-space sieve: divide out each prime once, then detect squares.
    """
    if limit < 1:
        raise ValueError("mobius_sieve needs limit >= 1")
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in sieve_primes(limit):
        mu[p::p] *= -1
        pp = p * p
        if pp <= limit:
            mu[pp::pp] = 0
    return mu


@dataclass(frozen=True)
class FactoredInteger:
    """n together with its factorization [(p, e), ...] in ascending p."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def radical(self) -> int:
        r = 1
        for p, _ in self.factors:
            r *= p
        return r

    def prime_set(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def factorize(n: int) -> FactoredInteger:
    """Trial-division factorization of n >= 1."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    m = n
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return FactoredInteger(n, tuple(out))


def largest_prime_factor(n: int) -> int:
    """Largest prime dividing n; errors on n <= 1 (no prime factors)."""
    if n <= 1:
        raise ValueError("largest_prime_factor needs n >= 2")
    return factorize(n).factors[-1][0]


def valuation(n: int, p: int) -> int:
    """Exponent of the prime p in n != 0."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined here")
    if p < 2:
        raise ValueError("p must be at least 2")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def lcm_checked(a: int, b: int) -> int | None:
    """lcm(a, b) for positive a, b, or None if it exceeds the unsigned
    64-bit range.  None is the overflow signal; callers never see a wrapped
    value."""
    if a <= 0 or b <= 0:
        raise ValueError("lcm_checked needs positive arguments")
    v = (a // math.gcd(a, b)) * b
    return v if v <= U64_MAX else None


def prime_powers_upto(limit: int) -> list[tuple[int, int, int]]:
    """All prime powers p^e <= limit as (p, e, p^e), sorted by p^e."""
    out = []
    for p in sieve_primes(limit):
        q, e = p, 1
        while q <= limit:
            out.append((p, e, q))
            q *= p
            e += 1
    out.sort(key=lambda t: t[2])
    return out


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """Solve x = r1 (mod m1), x = r2 (mod m2) for not-necessarily-coprime
    moduli.  Returns (r, lcm(m1, m2)) with 0 <= r < lcm, or None when the
    congruences are inconsistent."""
    if m1 <= 0 or m2 <= 0:
        raise ValueError("moduli must be positive")
    g = math.gcd(m1, m2)
    if (r2 - r1) % g != 0:
        return None
    ll = m1 // g * m2
    # solve r1 + m1*t = r2 (mod m2)  =>  t = (r2-r1)/g * inv(m1/g) mod m2/g
    m2g = m2 // g
    t = ((r2 - r1) // g * pow(m1 // g, -1, m2g)) % m2g if m2g > 1 else 0
    return ((r1 + m1 * t) % ll, ll)
