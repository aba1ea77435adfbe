"""Jacobi-symbol base selection for Shor's factoring algorithm.

Exact census of (Z/nZ)* for small semiprimes plus a classical factoring
driver that compares uniform and Jacobi-filtered base selection.
"""

from .census import (
    CensusReport,
    ElementClassification,
    SemiprimeProfile,
    build_profile,
    classify_element,
    count_minus_one_failures,
    lemma1_failure_probability,
    nonsquare_even_order_check,
    order_valuation_histogram,
    run_census,
    theorem_success_probability,
)
from .errors import ConsistencyError, DomainError, ResourceCapError
from .ntcore import factorize, gcd, jacobi, mod_pow, multiplicative_order, two_adic_split
from .shor import FactorOutcome, SelectionStrategy, attempt_factor, factor, recover_order

__version__ = "0.1.0"
