"""Vectorized (numpy int64) counterparts of the scalar ntcore routines.

Used only by the census hot loop. All moduli are bounded by CENSUS_CAP, so
products of two residues stay below 10**14 and never overflow int64.
"""

from __future__ import annotations

import numpy as np

from .ntcore import Factorization


def pow_array(base: np.ndarray, exponents: np.ndarray, n: int) -> np.ndarray:
    """Elementwise ``base**exponents mod n`` with per-element exponents."""
    result = np.ones_like(base)
    b = base % n
    e = exponents.copy()
    while e.any():
        odd = (e & 1).astype(bool)
        result = np.where(odd, result * b % n, result)
        b = b * b % n
        e >>= 1
    return result


def jacobi_array(a: np.ndarray, n: int) -> np.ndarray:
    """Elementwise Jacobi symbol (a/n) for odd ``n``; 0 where gcd > 1."""
    a = a % n
    m = np.full_like(a, n)
    sign = np.ones_like(a)
    active = a != 0
    while active.any():
        while True:
            even = active & ((a & 1) == 0)
            if not even.any():
                break
            a = np.where(even, a >> 1, a)
            m8 = m & 7
            sign = np.where(even & ((m8 == 3) | (m8 == 5)), -sign, sign)
        a, m = np.where(active, m, a), np.where(active, a, m)
        sign = np.where(active & ((a & 3) == 3) & ((m & 3) == 3), -sign, sign)
        a = np.where(active, a % m, a)
        active = a != 0
    return np.where(m == 1, sign, 0)


def order_array(y: np.ndarray, n: int, exponent_factored: Factorization) -> np.ndarray:
    """Elementwise multiplicative order by the factored-exponent reduction."""
    bound = 1
    for p, e in exponent_factored.items():
        bound *= p**e
    order = np.full_like(y, bound)
    for p, e in exponent_factored.items():
        still = np.ones(y.shape, dtype=bool)
        for _ in range(e):
            candidate = order // p
            hit = still & (pow_array(y, candidate, n) == 1)
            if not hit.any():
                break
            order = np.where(hit, candidate, order)
            still = hit
    return order
