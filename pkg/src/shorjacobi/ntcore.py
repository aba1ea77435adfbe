"""Exact integer and modular arithmetic primitives.

Everything here works on plain Python ints, so there is no overflow to
guard against; the size caps below exist to keep the slower algorithms
(trial division, brute-force orders, exhaustive censuses) tractable.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import DomainError, ResourceCapError

# n < 2**63 for factoring-driver paths, n <= 10**7 for exhaustive censuses.
FACTOR_CAP = 2**63
CENSUS_CAP = 10**7
TRIAL_DIVISION_LIMIT = 10**6

# Probabilities are carried as stdlib fractions (always in lowest terms,
# positive denominator).
ExactRational = Fraction

# The first 12 primes are a deterministic Miller-Rabin witness set for all
# n < 3.3e24, comfortably above FACTOR_CAP.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

Factorization = dict[int, int]


@dataclass(frozen=True)
class TwoAdicSplit:
    """``value == 2**valuation * odd_part`` with ``odd_part`` odd."""

    valuation: int
    odd_part: int

    @property
    def value(self) -> int:
        return self.odd_part << self.valuation


def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise DomainError(f"gcd expects non-negative integers, got ({a}, {b})")
    if a == 0 and b == 0:
        raise DomainError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """Return ``base**exponent mod modulus`` by square-and-multiply."""
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    if exponent < 0:
        raise DomainError(f"exponent must be non-negative, got {exponent}")
    return pow(base, exponent, modulus)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 3.

    Binary algorithm: strip factors of two using the second supplementary
    law, then flip with quadratic reciprocity. Returns 0 exactly when
    ``gcd(a, n) > 1``.
    """
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Jacobi symbol needs an odd modulus >= 3, got {n}")
    a %= n
    result = 1
    while a:
        while a & 1 == 0:
            a >>= 1
            if n & 7 in (3, 5):
                result = -result
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= 3_317_044_064_679_887_385_961_981:
        raise ResourceCapError(f"{n} is above the deterministic Miller-Rabin range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(limit: int) -> list[int]:
    """All primes ``<= limit`` (sieve of Eratosthenes)."""
    if limit < 2:
        return []
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def _pollard_brent(n: int) -> int:
    """Return a nontrivial factor of the odd composite ``n``."""
    # Fixed polynomial constants keep factorize deterministic.
    for c in range(1, 200):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ResourceCapError(f"Pollard rho failed to split {n}")


def factorize(n: int) -> Factorization:
    """Prime factorization of ``n`` as ``{prime: exponent}``, primes ascending.

    Trial division takes out every prime below 10**6; whatever remains
    is split with Brent's variant of Pollard rho.
    """
    if n < 2:
        raise DomainError(f"factorize needs n >= 2, got {n}")
    if n >= FACTOR_CAP:
        raise ResourceCapError(f"{n} exceeds the factoring cap 2**63")
    found: Counter[int] = Counter()
    while n % 2 == 0:
        found[2] += 1
        n //= 2
    f = 3
    while f * f <= n and f < TRIAL_DIVISION_LIMIT:
        while n % f == 0:
            found[f] += 1
            n //= f
        f += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            found[m] += 1
            continue
        r = math.isqrt(m)
        d = r if r * r == m else _pollard_brent(m)
        stack.extend((d, m // d))
    return dict(sorted(found.items()))


def two_adic_split(m: int) -> TwoAdicSplit:
    if m < 1:
        raise DomainError(f"2-adic split needs m >= 1, got {m}")
    valuation = (m & -m).bit_length() - 1
    return TwoAdicSplit(valuation, m >> valuation)


def merge_factorizations(parts: Iterable[Factorization]) -> Factorization:
    """Factorization of the lcm of the numbers whose factorizations are given."""
    merged: dict[int, int] = {}
    for part in parts:
        for prime, exp in part.items():
            merged[prime] = max(merged.get(prime, 0), exp)
    return dict(sorted(merged.items()))


def multiplicative_order(y: int, n: int, exponent_factored: Factorization) -> int:
    """Least r >= 1 with ``y**r == 1 (mod n)``.

    ``exponent_factored`` must factor a multiple of the exponent of
    (Z/nZ)*, e.g. lcm(p-1, q-1) or phi(n). Starting from that bound,
    each prime is divided out for as long as the power still maps to 1.
    """
    if n < 2:
        raise DomainError(f"modulus must be >= 2, got {n}")
    if math.gcd(y, n) != 1:
        raise DomainError(f"{y} is not a unit modulo {n}")
    bound = math.prod(p**e for p, e in exponent_factored.items())
    y %= n
    if pow(y, bound, n) != 1:
        raise DomainError(f"{bound} is not a multiple of the order of {y} mod {n}")
    order = bound
    for p, e in exponent_factored.items():
        for _ in range(e):
            candidate = order // p
            if pow(y, candidate, n) != 1:
                break
            order = candidate
    return order


def multiplicative_order_bruteforce(y: int, n: int) -> int:
    """Order of ``y`` mod ``n`` by successive multiplication (test oracle)."""
    if n < 2:
        raise DomainError(f"modulus must be >= 2, got {n}")
    if math.gcd(y, n) != 1:
        raise DomainError(f"{y} is not a unit modulo {n}")
    y %= n
    x, r = y, 1
    while x != 1:
        x = x * y % n
        r += 1
    return r


def carmichael_factored(n_factored: Factorization) -> Factorization:
    """Factorization of lambda(n) for squarefree odd ``n`` given its factors."""
    if any(p == 2 or e != 1 for p, e in n_factored.items()):
        raise DomainError("carmichael_factored supports squarefree odd n only")
    return merge_factorizations(factorize(p - 1) for p in n_factored)
