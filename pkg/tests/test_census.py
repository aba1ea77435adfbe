import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shorjacobi import _vector
from shorjacobi.census import (
    REPORT_COLUMNS,
    FailureReason,
    build_profile,
    classify_element,
    count_minus_one_failures,
    lemma1_failure_probability,
    minus_one_failures_closed_form,
    nonsquare_even_order_check,
    order_valuation_histogram,
    predicted_valuation_histogram,
    reports_to_csv,
    run_census,
    sweep,
    sweep_profiles,
    sweep_violations,
    theorem_success_probability,
)
from shorjacobi.errors import DomainError, ResourceCapError
from shorjacobi.ntcore import jacobi, primes_up_to

ODD_PRIMES = primes_up_to(60)[1:]


def brute_census(p, q):
    """Classify Z_pq* with nothing but successive multiplication."""
    n = p * q
    out = {"units": 0, "odd": 0, "minus": 0, "jm1": 0, "usable_f": 0, "minus_f": 0, "odd_f": 0}
    for y in range(1, n):
        if math.gcd(y, n) != 1:
            continue
        powers = [1, y]
        while powers[-1] != 1:
            powers.append(powers[-1] * y % n)
        r = len(powers) - 1
        odd = r % 2 == 1
        minus = not odd and powers[r // 2] == n - 1
        j = jacobi(y, n) == -1
        out["units"] += 1
        out["odd"] += odd
        out["minus"] += minus
        out["jm1"] += j
        out["usable_f"] += j and not odd and not minus
        out["minus_f"] += j and minus
        out["odd_f"] += j and odd
    return out


def brute_histogram(p):
    hist = {}
    for b in range(1, p):
        x, r = b, 1
        while x != 1:
            x = x * b % p
            r += 1
        k = (r & -r).bit_length() - 1
        hist[k] = hist.get(k, 0) + 1
    return hist


# -- profiles ------------------------------------------------------------------


def test_build_profile_examples():
    pr = build_profile(3, 5)
    assert (pr.n, pr.m1, pr.x1, pr.m2, pr.x2) == (15, 1, 1, 2, 1)
    pr = build_profile(3, 7)
    assert (pr.n, pr.m1, pr.x1, pr.m2, pr.x2) == (21, 1, 1, 1, 3)
    assert build_profile(5, 3) == build_profile(3, 5)
    assert build_profile(7, 3) == build_profile(3, 7)


def test_build_profile_canonical_order():
    pr = build_profile(17, 7)  # 16 = 2^4, 6 = 2*3
    assert (pr.p, pr.q, pr.m1, pr.m2) == (7, 17, 1, 4)


@pytest.mark.parametrize("p,q", [(4, 6), (3, 3), (2, 5), (3, 9), (1, 5)])
def test_build_profile_rejects(p, q):
    with pytest.raises(DomainError):
        build_profile(p, q)


def test_build_profile_cap():
    with pytest.raises(ResourceCapError):
        build_profile(10007, 10009)


# -- element classification ------------------------------------------------------


def test_classify_examples():
    pr = build_profile(3, 5)
    c = classify_element(7, pr)
    assert (c.jacobi_symbol, c.order, c.order_is_even, c.half_power_is_minus_one, c.usable) == (-1, 4, True, False, True)
    assert pow(7, 2, 15) == 4
    c = classify_element(14, pr)
    assert (c.jacobi_symbol, c.order, c.usable, c.failure_reason) == (-1, 2, False, FailureReason.MINUS_ONE)
    c = classify_element(1, pr)
    assert (c.order, c.order_valuation, c.usable, c.failure_reason) == (1, 0, False, FailureReason.ODD_ORDER)
    assert c.half_power_is_minus_one is None


def test_classify_rejects_non_units():
    with pytest.raises(DomainError):
        classify_element(3, build_profile(3, 5))
    with pytest.raises(DomainError):
        classify_element(15, build_profile(3, 5))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(ODD_PRIMES), st.sampled_from(ODD_PRIMES), st.integers(1, 10**6))
def test_jacobi_minus_one_implies_even_order(p, q, y):
    if p == q:
        return
    pr = build_profile(p, q)
    y = y % pr.n
    if math.gcd(y, pr.n) != 1:
        return
    c = classify_element(y, pr)
    if c.jacobi_symbol == -1:
        assert c.order_is_even
    if c.half_power_is_minus_one:
        assert pow(y, c.order // 2, pr.n) == pr.n - 1
    assert c.usable == (c.order_is_even and not c.half_power_is_minus_one)


# -- vector kernels against scalar code ------------------------------------------


@pytest.mark.parametrize("n", [15, 21, 91, 3 * 199, 197 * 199, 9999991])
def test_vector_jacobi_matches_scalar(n):
    ys = np.arange(0, min(n, 3000), dtype=np.int64)
    got = _vector.jacobi_array(ys, n)
    assert [int(v) for v in got] == [jacobi(int(y), n) for y in ys]


def test_vector_pow_matches_builtin():
    rng = np.random.default_rng(5)
    n = 9999991
    base = rng.integers(0, n, 500)
    exps = rng.integers(0, 10**6, 500)
    got = _vector.pow_array(base, exps, n)
    assert [int(g) for g in got] == [pow(int(b), int(e), n) for b, e in zip(base, exps)]


# -- census ----------------------------------------------------------------------


def test_census_n15():
    r = run_census(build_profile(3, 5))
    assert r.total_units == 8
    assert (r.odd_order_count, r.minus_one_count) == (1, 1)  # y = 1 and y = 14
    assert r.failure_prob_uniform == Fraction(1, 4)
    assert r.jacobi_minus_one_count == 4  # {7, 11, 13, 14}
    assert r.usable_count_filtered == 3
    assert r.success_prob_filtered == Fraction(3, 4)
    assert r.verified


def test_census_n21():
    r = run_census(build_profile(3, 7))
    assert r.total_units == 12
    assert (r.odd_order_count, r.minus_one_count) == (3, 3)  # {1,4,16}, {5,17,20}
    assert r.failure_prob_uniform == Fraction(1, 2)
    assert r.success_prob_filtered == 1
    assert r.verified


@pytest.mark.parametrize("p,q", [(p, q) for p in ODD_PRIMES[:8] for q in ODD_PRIMES if p < q][:40])
def test_census_matches_brute_force(p, q):
    r = run_census(build_profile(p, q))
    b = brute_census(p, q)
    assert r.total_units == b["units"]
    assert r.odd_order_count == b["odd"]
    assert r.minus_one_count == b["minus"]
    assert r.jacobi_minus_one_count == b["jm1"]
    assert r.usable_count_filtered == b["usable_f"]
    assert r.filtered_minus_one_count == b["minus_f"]
    assert r.filtered_odd_order_count == b["odd_f"] == 0
    assert r.usable_count_uniform + r.odd_order_count + r.minus_one_count == r.total_units
    assert 2 * r.jacobi_minus_one_count == r.total_units


def test_census_spanning_two_chunks():
    # n = 66013 spans two chunks.
    r = run_census(build_profile(251, 263))
    assert r.verified
    assert r.total_units == 250 * 262


def test_census_report_serialization():
    r = run_census(build_profile(3, 5))
    d = json.loads(r.to_json())
    assert tuple(d) == REPORT_COLUMNS
    assert d["failure_prob_uniform"] == {"num": 1, "den": 4}
    assert d["predicted_success_filtered"] == {"num": 3, "den": 4}
    assert json.dumps(json.loads(r.to_json()), indent=2) == r.to_json()
    lines = reports_to_csv([r]).splitlines()
    assert lines[0].split(",") == list(REPORT_COLUMNS)
    assert lines[1] == "15,3,5,1,1,2,1,8,6,1,1,4,3,1/4,3/4,1/4,3/4"


def test_census_worker_invariance():
    pr = build_profile(251, 263)
    assert run_census(pr, workers=1).to_json() == run_census(pr, workers=2).to_json()


# -- closed forms ------------------------------------------------------------------


def test_uniform_failure_examples():
    assert lemma1_failure_probability(1, 2) == Fraction(1, 4)
    assert lemma1_failure_probability(1, 1) == Fraction(1, 2)
    assert lemma1_failure_probability(2, 3) == Fraction(3, 16)
    # (m1, m2) = (2, 3): p = 5, q = 41.
    assert run_census(build_profile(5, 41)).failure_prob_uniform == Fraction(3, 16)


@given(st.integers(1, 40), st.integers(1, 40))
def test_uniform_failure_at_most_half(m1, m2):
    v = lemma1_failure_probability(m1, m2)
    assert 0 < v <= Fraction(1, 2)
    assert v == lemma1_failure_probability(m2, m1)


def test_uniform_failure_rejects_zero_valuation():
    with pytest.raises(DomainError):
        lemma1_failure_probability(0, 2)


def test_filtered_success_examples():
    assert theorem_success_probability(1, 2) == Fraction(3, 4)
    assert theorem_success_probability(1, 1) == 1
    assert theorem_success_probability(1, 3) == Fraction(7, 8)
    # (m1, m2) = (1, 3): p = 3, q = 41 (40 = 2^3 * 5).
    assert run_census(build_profile(3, 41)).success_prob_filtered == Fraction(7, 8)
    # q = 17 has m2 = 4, giving 15/16.
    assert run_census(build_profile(3, 17)).success_prob_filtered == Fraction(15, 16)


@given(st.integers(1, 40), st.integers(0, 40))
def test_filtered_success_bound(m1, gap):
    v = theorem_success_probability(m1, m1 + gap)
    assert v >= Fraction(3, 4)
    assert (v == 1) == (gap == 0)


def test_filtered_success_requires_canonical_order():
    with pytest.raises(DomainError):
        theorem_success_probability(3, 1)


def test_count_minus_one_examples():
    assert count_minus_one_failures(build_profile(3, 5)) == 1  # only y = 14
    assert count_minus_one_failures(build_profile(3, 7)) == 0
    pr = build_profile(3, 17)  # m1 = 1, m2 = 4: 32 / 4 / 8
    assert count_minus_one_failures(pr) == minus_one_failures_closed_form(pr) == 1
    pr = build_profile(3, 41)  # m1 = 1, m2 = 3: 80 / 4 / 4
    assert count_minus_one_failures(pr) == minus_one_failures_closed_form(pr) == 5


# -- prime-field checks --------------------------------------------------------------


def test_histogram_examples():
    assert order_valuation_histogram(7) == {0: 3, 1: 3}
    assert order_valuation_histogram(5) == {0: 1, 1: 1, 2: 2}
    assert order_valuation_histogram(3) == {0: 1, 1: 1}


@pytest.mark.parametrize("p", primes_up_to(400)[1:])
def test_histogram_matches_brute_force_and_closed_form(p):
    hist = order_valuation_histogram(p)
    assert hist == brute_histogram(p) == predicted_valuation_histogram(p)
    assert sum(hist.values()) == p - 1


@pytest.mark.parametrize("p", [1, 2, 9, 15])
def test_histogram_rejects(p):
    with pytest.raises(DomainError):
        order_valuation_histogram(p)


def test_nonsquare_examples():
    c = nonsquare_even_order_check(7)
    assert (c.nonsquares, c.orders, c.ok) == ((3, 5, 6), (6, 6, 2), True)
    c = nonsquare_even_order_check(3)
    assert (c.nonsquares, c.orders) == ((2,), (2,))
    c = nonsquare_even_order_check(5)
    assert (c.nonsquares, c.orders) == ((2, 3), (4, 4))
    with pytest.raises(DomainError):
        nonsquare_even_order_check(21)


@pytest.mark.parametrize("p", primes_up_to(1000)[1:])
def test_nonsquares_have_even_order(p):
    c = nonsquare_even_order_check(p)
    assert c.ok
    assert len(c.nonsquares) == (p - 1) // 2


# -- sweep -------------------------------------------------------------------------


def test_sweep_small_bounds():
    assert sweep_profiles(3, 3) == []
    assert [(pr.p, pr.q) for pr in sweep_profiles(5, 5)] == [(3, 5)]
    reports = sweep(50, 50)
    assert len(reports) == 91  # C(14, 2) pairs of odd primes below 50
    assert sweep_violations(reports) == []
