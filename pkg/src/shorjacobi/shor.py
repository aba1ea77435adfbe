"""Classical Shor factoring loop with pluggable base selection.

The quantum order-finding step is replaced by an oracle. The default oracle
computes the order classically from the factored group exponent; the
opt-in :class:`MeasurementOrderOracle` instead simulates ideal measurement
peaks and recovers the order from continued-fraction convergents.
"""

from __future__ import annotations

import enum
import functools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .census import lemma1_failure_probability, theorem_success_probability
from .errors import ConsistencyError, DomainError, ResourceCapError
from .ntcore import (
    FACTOR_CAP,
    Factorization,
    carmichael_factored,
    factorize,
    is_prime,
    jacobi,
    multiplicative_order,
    two_adic_split,
)

DEFAULT_MAX_ATTEMPTS = 64

OrderOracle = Callable[[int], int]


class SelectionStrategy(enum.Enum):
    UNIFORM = "uniform"
    JACOBI = "jacobi"


class SampleSpace(enum.Enum):
    """Where candidate bases are drawn from.

    DRIVER draws from {2, ..., n-1} and stops early on a lucky gcd.
    UNITS draws uniformly from all of (Z/nZ)* (1 included, non-units
    redrawn), which is the sample space the census probabilities refer to.
    """

    DRIVER = "driver"
    UNITS = "units"


class OutcomeKind(enum.Enum):
    FACTOR = "factor"
    ODD_ORDER = "odd_order"
    MINUS_ONE = "minus_one"
    LUCKY_GCD = "lucky_gcd"


@dataclass(frozen=True)
class FactorOutcome:
    kind: OutcomeKind
    y: int
    n: int
    order: int | None = None
    factor: int | None = None

    def __post_init__(self):
        if self.factor is not None and not (1 < self.factor < self.n and self.n % self.factor == 0):
            raise ConsistencyError(f"{self.factor} is not a nontrivial factor of {self.n}")
        if self.kind in (OutcomeKind.FACTOR, OutcomeKind.LUCKY_GCD) and self.factor is None:
            raise ConsistencyError(f"{self.kind.value} outcome without a factor")
        if self.kind is OutcomeKind.LUCKY_GCD and self.order is not None:
            raise ConsistencyError("lucky gcd outcomes never compute an order")

    @property
    def succeeded(self) -> bool:
        return self.factor is not None

    @property
    def factors(self) -> tuple[int, int] | None:
        if self.factor is None:
            return None
        return tuple(sorted((self.factor, self.n // self.factor)))


@dataclass
class FactorRun:
    """Final result plus the full attempt log of one :func:`factor` call."""

    n: int
    strategy: SelectionStrategy
    seed: int
    attempts: list[FactorOutcome] = field(default_factory=list)

    @property
    def outcome(self) -> FactorOutcome | None:
        return self.attempts[-1] if self.attempts else None

    @property
    def succeeded(self) -> bool:
        return bool(self.attempts) and self.attempts[-1].succeeded

    @property
    def attempts_used(self) -> int:
        return len(self.attempts)

    @property
    def factors(self) -> tuple[int, int] | None:
        return self.outcome.factors if self.succeeded else None

    def log_records(self) -> Iterator[dict]:
        for i, att in enumerate(self.attempts, start=1):
            rec = {"attempt": i, "y": att.y, "jacobi": jacobi(att.y, self.n), "outcome": att.kind.value}
            if att.order is not None:
                rec["order"] = att.order
            if att.factor is not None:
                rec["factor"] = att.factor
            yield rec

    def result_record(self) -> dict:
        factors = self.factors
        return {
            "n": self.n,
            "strategy": self.strategy.value,
            "seed": self.seed,
            "attempts_used": self.attempts_used,
            "factors": list(factors) if factors else None,
        }

    def to_jsonl(self) -> str:
        """Attempt log as JSON lines followed by the result object."""
        lines = [json.dumps(rec) for rec in self.log_records()]
        lines.append(json.dumps(self.result_record()))
        return "\n".join(lines) + "\n"


@functools.lru_cache(maxsize=256)
def _semiprime_factors(n: int) -> tuple[int, int]:
    if n < 15 or n % 2 == 0:
        raise DomainError(f"n must be an odd composite >= 15, got {n}")
    if n >= FACTOR_CAP:
        raise ResourceCapError(f"{n} exceeds the factoring cap 2**63")
    if is_prime(n):
        raise DomainError(f"{n} is prime")
    fac = factorize(n)
    if len(fac) != 2 or any(e != 1 for e in fac.values()):
        raise DomainError(f"{n} is not a product of two distinct odd primes: {fac}")
    p, q = fac
    return p, q


def validate_semiprime(n: int) -> tuple[int, int]:
    """Return (p, q) for an odd semiprime n, raising DomainError otherwise."""
    return _semiprime_factors(n)


class ClassicalOrderOracle:
    """Exact order of y mod n via the factored Carmichael exponent of n.

    Factoring n here stands in for the quantum subroutine; the driver itself
    never looks at the factors.
    """

    def __init__(self, n: int):
        p, q = validate_semiprime(n)
        self.n = n
        self.exponent_factored: Factorization = carmichael_factored({p: 1, q: 1})

    def __call__(self, y: int) -> int:
        return multiplicative_order(y, self.n, self.exponent_factored)


def sample_base(
    n: int,
    strategy: SelectionStrategy,
    rng: random.Random,
    space: SampleSpace = SampleSpace.DRIVER,
) -> int | FactorOutcome:
    """Draw a candidate base, or a LUCKY_GCD outcome if the draw shares a factor with n.

    The Jacobi strategy rejection-samples until (y/n) = -1; about two draws
    on average since half of the units qualify.
    """
    if n < 15 or n % 2 == 0:
        raise DomainError(f"n must be an odd composite >= 15, got {n}")
    low = 2 if space is SampleSpace.DRIVER else 1
    while True:
        y = rng.randint(low, n - 1)
        g = math.gcd(y, n)
        if g != 1:
            if space is SampleSpace.UNITS:
                continue
            return FactorOutcome(OutcomeKind.LUCKY_GCD, y, n, factor=g)
        if strategy is SelectionStrategy.UNIFORM or jacobi(y, n) == -1:
            return y


def attempt_factor(n: int, y: int, order_oracle: OrderOracle) -> FactorOutcome:
    """One Shor attempt: order r of y, then gcd(y^(r/2) - 1, n)."""
    if math.gcd(y, n) != 1:
        raise DomainError(f"{y} is not a unit modulo {n}")
    r = order_oracle(y)
    if r < 1 or pow(y, r, n) != 1:
        raise ConsistencyError(f"oracle returned {r}, but {y}^{r} != 1 mod {n}")
    if r % 2:
        return FactorOutcome(OutcomeKind.ODD_ORDER, y, n, order=r)
    half = pow(y, r // 2, n)
    if half == n - 1:
        return FactorOutcome(OutcomeKind.MINUS_ONE, y, n, order=r)
    # half is a square root of 1 other than +-1, so the gcd is nontrivial.
    return FactorOutcome(OutcomeKind.FACTOR, y, n, order=r, factor=math.gcd(half - 1, n))


def factor(
    n: int,
    strategy: SelectionStrategy = SelectionStrategy.JACOBI,
    seed: int = 0,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    order_oracle: OrderOracle | None = None,
    space: SampleSpace = SampleSpace.DRIVER,
) -> FactorRun:
    """Repeat sample/attempt until a factor appears or ``max_attempts`` is spent.

    Every draw that reaches the oracle or hits a lucky gcd consumes one
    attempt. Check ``run.succeeded``; an exhausted run still carries its log.
    """
    validate_semiprime(n)
    if max_attempts < 1:
        raise DomainError(f"max_attempts must be positive, got {max_attempts}")
    if order_oracle is None:
        order_oracle = ClassicalOrderOracle(n)
    rng = random.Random(seed)
    run = FactorRun(n, strategy, seed)
    for _ in range(max_attempts):
        draw = sample_base(n, strategy, rng, space)
        outcome = draw if isinstance(draw, FactorOutcome) else attempt_factor(n, draw, order_oracle)
        run.attempts.append(outcome)
        if outcome.succeeded:
            break
    return run


# -- idealized measurement path ---------------------------------------------


@dataclass(frozen=True)
class MeasurementSample:
    c: int
    Q: int
    j: int


def _is_power_of_two(v: int) -> bool:
    return v > 0 and v & (v - 1) == 0


def min_register_size(r: int) -> int:
    """Smallest power of two Q with Q >= r**2."""
    return 1 << (r * r - 1).bit_length() if r > 1 else 1


def peak_position(j: int, r: int, Q: int) -> int:
    """round(j*Q/r), halves rounded up, in exact integer arithmetic."""
    return (2 * j * Q + r) // (2 * r)


def simulate_measurement(r: int, Q: int, rng: random.Random, j: int | None = None) -> MeasurementSample:
    """Ideal peak model: pick j uniformly in [0, r) and return c = round(j*Q/r)."""
    if r < 1:
        raise DomainError(f"order must be positive, got {r}")
    if not _is_power_of_two(Q):
        raise DomainError(f"Q must be a power of two, got {Q}")
    if Q < r * r:
        raise DomainError(f"Q = {Q} is smaller than r^2 = {r * r}")
    if j is None:
        j = rng.randrange(r)
    elif not 0 <= j < r:
        raise DomainError(f"j must lie in [0, {r}), got {j}")
    return MeasurementSample(peak_position(j, r, Q), Q, j)


def continued_fraction_convergents(c: int, Q: int) -> list[tuple[int, int]]:
    """All convergents h/k of c/Q in order; the last one equals c/Q."""
    if Q < 1 or not 0 <= c < Q:
        raise DomainError(f"need Q >= 1 and 0 <= c < Q, got c={c}, Q={Q}")
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    out = []
    num, den = c, Q
    while den:
        a, rem = divmod(num, den)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        out.append((h, k))
        num, den = den, rem
    return out


def recover_order(c: int, Q: int, y: int, n: int) -> int | None:
    """Smallest convergent denominator d < n of c/Q with y^d = 1 mod n, if any."""
    if math.gcd(y, n) != 1:
        raise DomainError(f"{y} is not a unit modulo {n}")
    hits = [d for _, d in continued_fraction_convergents(c, Q) if 0 < d < n and pow(y, d, n) == 1]
    return min(hits) if hits else None


class MeasurementOrderOracle:
    """Order oracle that goes through simulated measurements.

    The hidden order comes from the classical oracle; the value handed back
    is whatever continued-fraction recovery extracts, reduced to the least
    exponent. Measurements repeat until recovery succeeds.
    """

    def __init__(self, n: int, rng: random.Random, max_rounds: int = 256):
        self._hidden = ClassicalOrderOracle(n)
        self.n = n
        self.Q = min_register_size(n)
        self.rng = rng
        self.max_rounds = max_rounds
        self.rounds_used = 0

    def __call__(self, y: int) -> int:
        r = self._hidden(y)
        for _ in range(self.max_rounds):
            self.rounds_used += 1
            sample = simulate_measurement(r, self.Q, self.rng)
            d = recover_order(sample.c, self.Q, y, self.n)
            if d is not None:
                # d is a multiple of the order; strip surplus prime factors.
                return multiplicative_order(y, self.n, factorize(d)) if d > 1 else 1
        raise ResourceCapError(f"no order recovered for y={y} after {self.max_rounds} measurements")


# -- Monte Carlo comparison of strategies -----------------------------------


@dataclass(frozen=True)
class StrategyStats:
    n: int
    strategy: SelectionStrategy
    trials: int
    attempts_total: int
    order_attempts: int
    successes: int
    lucky: int
    predicted_success: Fraction

    @property
    def mean_attempts(self) -> float:
        return self.attempts_total / self.trials if self.trials else math.nan

    @property
    def success_rate(self) -> float:
        """Factor outcomes per attempt that reached the order oracle."""
        return self.successes / self.order_attempts if self.order_attempts else math.nan

    @property
    def standard_error(self) -> float:
        p = float(self.predicted_success)
        return math.sqrt(p * (1 - p) / self.order_attempts) if self.order_attempts else math.nan

    @property
    def z_score(self) -> float:
        if not self.order_attempts:
            return math.nan
        if self.standard_error == 0:
            return 0.0 if self.success_rate == float(self.predicted_success) else math.inf
        return (self.success_rate - float(self.predicted_success)) / self.standard_error

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "strategy": self.strategy.value,
            "trials": self.trials,
            "attempts_total": self.attempts_total,
            "mean_attempts": self.mean_attempts,
            "order_attempts": self.order_attempts,
            "successes": self.successes,
            "lucky_gcd": self.lucky,
            "success_rate": self.success_rate,
            "predicted_success": {"num": self.predicted_success.numerator, "den": self.predicted_success.denominator},
            "z_score": self.z_score,
        }


def predicted_success(n: int, strategy: SelectionStrategy) -> Fraction:
    """Exact per-attempt success probability over (Z/nZ)* for the strategy."""
    p, q = validate_semiprime(n)
    m1, m2 = sorted((two_adic_split(p - 1).valuation, two_adic_split(q - 1).valuation))
    if strategy is SelectionStrategy.JACOBI:
        return theorem_success_probability(m1, m2)
    return 1 - lemma1_failure_probability(m1, m2)


def compare_strategies(
    n: int,
    strategy: SelectionStrategy,
    trials: int,
    seed: int,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    space: SampleSpace = SampleSpace.UNITS,
) -> StrategyStats:
    """Run ``trials`` seeded factoring runs and aggregate per-attempt statistics.

    Trial seeds come from one generator seeded with ``seed``, so the whole
    table is reproducible.
    """
    oracle = ClassicalOrderOracle(n)
    seeds = random.Random(seed)
    total = order_attempts = successes = lucky = 0
    for _ in range(trials):
        run = factor(n, strategy, seeds.getrandbits(64), max_attempts, oracle, space)
        total += run.attempts_used
        for att in run.attempts:
            if att.kind is OutcomeKind.LUCKY_GCD:
                lucky += 1
            else:
                order_attempts += 1
                successes += att.kind is OutcomeKind.FACTOR
    return StrategyStats(n, strategy, trials, total, order_attempts, successes, lucky, predicted_success(n, strategy))
