"""Exhaustive classification of (Z/nZ)* for small semiprimes n = p*q.

Every counting claim about Jacobi-filtered base selection is checked here
against a full enumeration: the uniform failure probability, the filtered
success probability, the count of filtered bases with y^k = -1, and the
distribution of 2-adic order valuations in (Z/pZ)*.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _vector
from .errors import ConsistencyError, DomainError, ResourceCapError
from .ntcore import (
    CENSUS_CAP,
    Factorization,
    TwoAdicSplit,
    factorize,
    is_prime,
    jacobi,
    merge_factorizations,
    multiplicative_order,
    multiplicative_order_bruteforce,
    primes_up_to,
    two_adic_split,
)

CHUNK_SIZE = 1 << 16
# Every CROSSCHECK_STRIDE-th residue is re-classified with the scalar path;
# every CROSSCHECK_STRIDE**2-th also gets a brute-force order when the
# group exponent is small enough for successive multiplication.
CROSSCHECK_STRIDE = 97
BRUTE_FORCE_EXPONENT_LIMIT = 1 << 17

REPORT_COLUMNS = (
    "n", "p", "q", "m1", "x1", "m2", "x2", "phi",
    "usable_uniform", "odd_order", "minus_one",
    "jacobi_minus_one", "usable_filtered",
    "failure_prob_uniform", "success_prob_filtered",
    "predicted_failure_uniform", "predicted_success_filtered",
)  # fmt: skip


class FailureReason(enum.Enum):
    NONE = "none"
    ODD_ORDER = "odd_order"
    MINUS_ONE = "minus_one"


@dataclass(frozen=True)
class SemiprimeProfile:
    """n = p*q with p-1 = 2**m1 * x1, q-1 = 2**m2 * x2 and m1 <= m2."""

    n: int
    p: int
    q: int
    split_p: TwoAdicSplit
    split_q: TwoAdicSplit

    @property
    def m1(self) -> int:
        return self.split_p.valuation

    @property
    def x1(self) -> int:
        return self.split_p.odd_part

    @property
    def m2(self) -> int:
        return self.split_q.valuation

    @property
    def x2(self) -> int:
        return self.split_q.odd_part

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)

    @property
    def exponent_factored(self) -> Factorization:
        """Factorization of lambda(n) = lcm(p-1, q-1)."""
        return merge_factorizations([factorize(self.p - 1), factorize(self.q - 1)])


@dataclass(frozen=True)
class ElementClassification:
    y: int
    jacobi_symbol: int
    order: int
    order_valuation: int
    order_is_even: bool
    # None when the order is odd (r/2 is not an integer).
    half_power_is_minus_one: bool | None
    usable: bool
    failure_reason: FailureReason


@dataclass
class _Tally:
    units: int = 0
    usable_uniform: int = 0
    odd_order: int = 0
    minus_one: int = 0
    jacobi_minus_one: int = 0
    usable_filtered: int = 0
    filtered_odd_order: int = 0
    filtered_minus_one: int = 0

    def __add__(self, other: _Tally) -> _Tally:
        return _Tally(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))


@dataclass(frozen=True)
class CensusReport:
    profile: SemiprimeProfile
    total_units: int
    usable_count_uniform: int
    odd_order_count: int
    minus_one_count: int
    jacobi_minus_one_count: int
    usable_count_filtered: int
    # Jacobi -1 bases of odd order; must be zero.
    filtered_odd_order_count: int
    filtered_minus_one_count: int
    failure_prob_uniform: Fraction
    success_prob_filtered: Fraction
    predicted_failure_uniform: Fraction
    predicted_success_filtered: Fraction
    predicted_minus_one_failures: int = field(default=0)

    @property
    def failure_count_uniform(self) -> int:
        return self.odd_order_count + self.minus_one_count

    def mismatches(self) -> list[str]:
        """Human-readable list of every prediction the enumeration contradicts."""
        out = []
        if self.failure_prob_uniform != self.predicted_failure_uniform:
            out.append(
                f"n={self.profile.n}: uniform failure {self.failure_prob_uniform}"
                f" != predicted {self.predicted_failure_uniform}"
            )
        if self.success_prob_filtered != self.predicted_success_filtered:
            out.append(
                f"n={self.profile.n}: filtered success {self.success_prob_filtered}"
                f" != predicted {self.predicted_success_filtered}"
            )
        if self.filtered_minus_one_count != self.predicted_minus_one_failures:
            out.append(
                f"n={self.profile.n}: {self.filtered_minus_one_count} filtered y^k=-1 bases"
                f" != predicted {self.predicted_minus_one_failures}"
            )
        if self.filtered_odd_order_count:
            out.append(
                f"n={self.profile.n}: {self.filtered_odd_order_count} Jacobi -1 bases of odd order"
            )
        if self.success_prob_filtered < Fraction(3, 4):
            out.append(f"n={self.profile.n}: filtered success below 3/4")
        if self.jacobi_minus_one_count * 2 != self.total_units:
            out.append(f"n={self.profile.n}: Jacobi -1 class is not half of the units")
        return out

    @property
    def verified(self) -> bool:
        return not self.mismatches()

    def to_dict(self) -> dict:
        pr = self.profile
        values = {
            "n": pr.n, "p": pr.p, "q": pr.q,
            "m1": pr.m1, "x1": pr.x1, "m2": pr.m2, "x2": pr.x2,
            "phi": self.total_units,
            "usable_uniform": self.usable_count_uniform,
            "odd_order": self.odd_order_count,
            "minus_one": self.minus_one_count,
            "jacobi_minus_one": self.jacobi_minus_one_count,
            "usable_filtered": self.usable_count_filtered,
            "failure_prob_uniform": _rational_json(self.failure_prob_uniform),
            "success_prob_filtered": _rational_json(self.success_prob_filtered),
            "predicted_failure_uniform": _rational_json(self.predicted_failure_uniform),
            "predicted_success_filtered": _rational_json(self.predicted_success_filtered),
        }  # fmt: skip
        return values

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv_row(self) -> list[str]:
        row = []
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                value = f"{value['num']}/{value['den']}"
            row.append(str(value))
        return row

    def to_text(self) -> str:
        pr = self.profile
        return "\n".join(
            [
                f"n = {pr.n} = {pr.p} * {pr.q}   (m1={pr.m1}, x1={pr.x1}; m2={pr.m2}, x2={pr.x2})",
                f"  units phi(n)              {self.total_units}",
                f"  usable (uniform)          {self.usable_count_uniform}",
                f"  odd order / y^k = -1      {self.odd_order_count} / {self.minus_one_count}",
                f"  Jacobi -1 bases           {self.jacobi_minus_one_count}",
                f"  usable (Jacobi -1)        {self.usable_count_filtered}",
                f"  uniform failure           {self.failure_prob_uniform}"
                f" (~{float(self.failure_prob_uniform):.6f}), predicted {self.predicted_failure_uniform}",
                f"  filtered success          {self.success_prob_filtered}"
                f" (~{float(self.success_prob_filtered):.6f}), predicted {self.predicted_success_filtered}",
                f"  verified                  {'yes' if self.verified else 'NO'}",
            ]
        )


def _rational_json(value: Fraction) -> dict[str, int]:
    return {"num": value.numerator, "den": value.denominator}


def reports_to_csv(reports: Iterable[CensusReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for report in reports:
        writer.writerow(report.to_csv_row())
    return buf.getvalue()


def build_profile(p: int, q: int) -> SemiprimeProfile:
    """Profile of n = p*q, swapping p and q so that m1 <= m2.

    Ties in the 2-adic valuation are broken by putting the smaller prime
    first, so (p, q) and (q, p) always give the same profile.
    """
    for v in (p, q):
        if v < 3 or v % 2 == 0 or not is_prime(v):
            raise DomainError(f"{v} is not an odd prime")
    if p == q:
        raise DomainError(f"p and q must be distinct, got {p} twice")
    if p * q > CENSUS_CAP:
        raise ResourceCapError(f"n = {p * q} exceeds the census cap {CENSUS_CAP}")
    sp, sq = two_adic_split(p - 1), two_adic_split(q - 1)
    if (sp.valuation, p) > (sq.valuation, q):
        p, q, sp, sq = q, p, sq, sp
    return SemiprimeProfile(p * q, p, q, sp, sq)


def classify_element(
    y: int, profile: SemiprimeProfile, exponent_factored: Factorization | None = None
) -> ElementClassification:
    n = profile.n
    if not 1 <= y < n:
        raise DomainError(f"y must lie in [1, {n}), got {y}")
    if math.gcd(y, n) != 1:
        raise DomainError(f"{y} is not a unit modulo {n}")
    if exponent_factored is None:
        exponent_factored = profile.exponent_factored
    r = multiplicative_order(y, n, exponent_factored)
    valuation = two_adic_split(r).valuation
    even = valuation > 0
    minus_one = pow(y, r // 2, n) == n - 1 if even else None
    if not even:
        reason = FailureReason.ODD_ORDER
    elif minus_one:
        reason = FailureReason.MINUS_ONE
    else:
        reason = FailureReason.NONE
    return ElementClassification(
        y=y,
        jacobi_symbol=jacobi(y, n),
        order=r,
        order_valuation=valuation,
        order_is_even=even,
        half_power_is_minus_one=minus_one,
        usable=reason is FailureReason.NONE,
        failure_reason=reason,
    )


@dataclass(frozen=True)
class ClassifiedRange:
    """Column-wise classification of the units y in a residue range."""

    y: np.ndarray
    jacobi_symbol: np.ndarray
    order: np.ndarray
    minus_one: np.ndarray

    @property
    def even(self) -> np.ndarray:
        return (self.order & 1) == 0

    @property
    def usable(self) -> np.ndarray:
        return self.even & ~self.minus_one


def _classify_range(n: int, lo: int, hi: int, exponent_factored: Factorization) -> ClassifiedRange:
    ys = np.arange(lo, hi, dtype=np.int64)
    ys = ys[np.gcd(ys, n) == 1]
    symbol = _vector.jacobi_array(ys, n)
    order = _vector.order_array(ys, n, exponent_factored)
    even = (order & 1) == 0
    half = _vector.pow_array(ys, np.where(even, order // 2, 0), n)
    return ClassifiedRange(ys, symbol, order, even & (half == n - 1))


def classify_all(profile: SemiprimeProfile) -> ClassifiedRange:
    """Vectorized :func:`classify_element` over every y in (Z/nZ)*."""
    if profile.n > CENSUS_CAP:
        raise ResourceCapError(f"n = {profile.n} exceeds the census cap {CENSUS_CAP}")
    return _classify_range(profile.n, 1, profile.n, profile.exponent_factored)


def _tally_chunk(task: tuple[int, int, int, int, Factorization]) -> _Tally:
    """Classify every unit y in [lo, hi) and count the classes."""
    p, q, lo, hi, exponent_factored = task
    cls = _classify_range(p * q, lo, hi, exponent_factored)
    if cls.y.size == 0:
        return _Tally()
    ys, symbol, order, minus_one = cls.y, cls.jacobi_symbol, cls.order, cls.minus_one
    even, usable = cls.even, cls.usable
    filtered = symbol == -1

    _crosscheck(ys, symbol, order, minus_one, build_profile(p, q), exponent_factored)

    return _Tally(
        units=int(ys.size),
        usable_uniform=int(usable.sum()),
        odd_order=int((~even).sum()),
        minus_one=int(minus_one.sum()),
        jacobi_minus_one=int(filtered.sum()),
        usable_filtered=int((usable & filtered).sum()),
        filtered_odd_order=int((filtered & ~even).sum()),
        filtered_minus_one=int((filtered & minus_one).sum()),
    )


def _crosscheck(ys, symbol, order, minus_one, profile, exponent_factored) -> None:
    bound = math.prod(p**e for p, e in exponent_factored.items())
    picks = np.nonzero((ys - 1) % CROSSCHECK_STRIDE == 0)[0]
    for i in picks:
        y = int(ys[i])
        ref = classify_element(y, profile, exponent_factored)
        got = (int(symbol[i]), int(order[i]), bool(minus_one[i]))
        want = (ref.jacobi_symbol, ref.order, bool(ref.half_power_is_minus_one))
        if got != want:
            raise ConsistencyError(f"n={profile.n}, y={y}: vector {got} != scalar {want}")
        if (y - 1) % CROSSCHECK_STRIDE**2 == 0 and bound <= BRUTE_FORCE_EXPONENT_LIMIT:
            brute = multiplicative_order_bruteforce(y, profile.n)
            if brute != ref.order:
                raise ConsistencyError(f"n={profile.n}, y={y}: order {ref.order} != brute {brute}")


def _chunks(profile: SemiprimeProfile, exponent_factored: Factorization):
    for lo in range(1, profile.n, CHUNK_SIZE):
        yield (profile.p, profile.q, lo, min(lo + CHUNK_SIZE, profile.n), exponent_factored)


def default_workers() -> int:
    return os.cpu_count() or 1


def _tally(profile: SemiprimeProfile, workers: int) -> _Tally:
    if profile.n > CENSUS_CAP:
        raise ResourceCapError(f"n = {profile.n} exceeds the census cap {CENSUS_CAP}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    exponent_factored = profile.exponent_factored
    tasks = list(_chunks(profile, exponent_factored))
    if workers == 1 or len(tasks) == 1:
        parts = map(_tally_chunk, tasks)
        return sum(parts, _Tally())
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(_tally_chunk, tasks), _Tally())


def _report(profile: SemiprimeProfile, t: _Tally) -> CensusReport:
    if t.units != profile.phi:
        raise ConsistencyError(f"enumerated {t.units} units of Z_{profile.n}, expected {profile.phi}")
    return CensusReport(
        profile=profile,
        total_units=t.units,
        usable_count_uniform=t.usable_uniform,
        odd_order_count=t.odd_order,
        minus_one_count=t.minus_one,
        jacobi_minus_one_count=t.jacobi_minus_one,
        usable_count_filtered=t.usable_filtered,
        filtered_odd_order_count=t.filtered_odd_order,
        filtered_minus_one_count=t.filtered_minus_one,
        failure_prob_uniform=Fraction(t.odd_order + t.minus_one, t.units),
        success_prob_filtered=Fraction(t.usable_filtered, t.jacobi_minus_one),
        predicted_failure_uniform=lemma1_failure_probability(profile.m1, profile.m2),
        predicted_success_filtered=theorem_success_probability(profile.m1, profile.m2),
        predicted_minus_one_failures=minus_one_failures_closed_form(profile),
    )


def run_census(profile: SemiprimeProfile, workers: int = 1) -> CensusReport:
    """Enumerate all of (Z/nZ)* and compare exact counts with the closed forms.

    The residue range is cut into fixed-size chunks whose tallies are added,
    so the report does not depend on ``workers``.
    """
    return _report(profile, _tally(profile, workers))


def lemma1_failure_probability(m1: int, m2: int) -> Fraction:
    """P(uniform y in (Z/nZ)* has odd order or y^(r/2) = -1).

    Equals 2**-(m1+m2) * (1 + sum_{j<min(m1,m2)} 4**j), which is at most 1/2.
    """
    if m1 < 1 or m2 < 1:
        raise DomainError(f"2-adic valuations must be >= 1, got ({m1}, {m2})")
    return Fraction(1 + sum(4**j for j in range(min(m1, m2))), 2 ** (m1 + m2))


def theorem_success_probability(m1: int, m2: int) -> Fraction:
    """P(a uniform Jacobi -1 base is usable) = 1 - 2**-(m2-m1+1), or 1 if m1 == m2."""
    if m1 < 1 or m2 < 1:
        raise DomainError(f"2-adic valuations must be >= 1, got ({m1}, {m2})")
    if m1 > m2:
        raise DomainError(f"expected canonical order m1 <= m2, got ({m1}, {m2})")
    if m1 == m2:
        return Fraction(1)
    return 1 - Fraction(1, 2 ** (m2 - m1 + 1))


def minus_one_failures_closed_form(profile: SemiprimeProfile) -> int:
    """phi(n)/4 * 2**-(m2-m1) when m1 != m2, else 0."""
    if profile.m1 == profile.m2:
        return 0
    count = Fraction(profile.phi, 4 * 2 ** (profile.m2 - profile.m1))
    if count.denominator != 1:
        raise ConsistencyError(f"closed form {count} is not an integer for n={profile.n}")
    return int(count)


def count_minus_one_failures(profile: SemiprimeProfile, workers: int = 1) -> int:
    """Enumerated count of y with (y/n) = -1, even order 2k and y^k = -1."""
    return _tally(profile, workers).filtered_minus_one


def _require_odd_prime(p: int) -> None:
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise DomainError(f"{p} is not an odd prime")
    if p > CENSUS_CAP:
        raise ResourceCapError(f"p = {p} exceeds the census cap {CENSUS_CAP}")


def order_valuation_histogram(p: int) -> dict[int, int]:
    """Map k -> #{b in (Z/pZ)* : the order of b has 2-adic valuation k}, k = 0..m."""
    _require_odd_prime(p)
    exponent_factored = factorize(p - 1)
    m = exponent_factored[2]
    hist = dict.fromkeys(range(m + 1), 0)
    for b in range(1, p):
        hist[two_adic_split(multiplicative_order(b, p, exponent_factored)).valuation] += 1
    return hist


def predicted_valuation_histogram(p: int) -> dict[int, int]:
    """x elements of odd order and 2**(k-1) * x of valuation k, for p-1 = 2**m * x."""
    _require_odd_prime(p)
    split = two_adic_split(p - 1)
    x = split.odd_part
    return {0: x, **{k: 2 ** (k - 1) * x for k in range(1, split.valuation + 1)}}


@dataclass(frozen=True)
class NonsquareCheck:
    p: int
    nonsquares: tuple[int, ...]
    orders: tuple[int, ...]
    counterexamples: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def nonsquare_even_order_check(p: int) -> NonsquareCheck:
    """Verify that every quadratic non-residue mod p has even order."""
    _require_odd_prime(p)
    exponent_factored = factorize(p - 1)
    nonsquares, orders, bad = [], [], []
    for a in range(1, p):
        if jacobi(a, p) != -1:
            continue
        r = multiplicative_order(a, p, exponent_factored)
        nonsquares.append(a)
        orders.append(r)
        if r % 2:
            bad.append(a)
    return NonsquareCheck(p, tuple(nonsquares), tuple(orders), tuple(bad))


def sweep_profiles(p_max: int, q_max: int) -> list[SemiprimeProfile]:
    """Profiles for every pair of odd primes p < q with p <= p_max, q <= q_max."""
    ps = [p for p in primes_up_to(p_max) if p > 2]
    qs = [q for q in primes_up_to(q_max) if q > 2]
    return [build_profile(p, q) for p in ps for q in qs if p < q]


def _census_one(profile: SemiprimeProfile) -> CensusReport:
    return run_census(profile, workers=1)


def sweep(p_max: int, q_max: int, workers: int = 1) -> list[CensusReport]:
    profiles = sweep_profiles(p_max, q_max)
    if workers <= 1 or len(profiles) <= 1:
        return [_census_one(pr) for pr in profiles]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_census_one, profiles, chunksize=4))


def sweep_violations(reports: Sequence[CensusReport]) -> list[str]:
    return [msg for r in reports for msg in r.mismatches()]
