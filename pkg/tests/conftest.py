"""Brute-force oracles shared by the test modules.

These deliberately avoid the package's own sieving and counting code.
"""

import math
from fractions import Fraction
from itertools import combinations

import pytest


def brute_free(n, elems):
    return all(n % b for b in elems)


def brute_eta(elems, a, L):
    return [int(brute_free(n, elems)) for n in range(a, a + L)]


def brute_multiples_density(elems):
    """Count multiples over one full period."""
    P = math.lcm(*elems) if elems else 1
    return Fraction(sum(1 for n in range(P) if not brute_free(n, elems)), P)


def ie_density(elems):
    """Inclusion-exclusion over every nonempty subset."""
    total = Fraction(0)
    for r in range(1, len(elems) + 1):
        for sub in combinations(elems, r):
            total += Fraction((-1) ** (r + 1), math.lcm(*sub))
    return total


def naive_primes(n):
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]


def words(bits, n):
    s = "".join(map(str, bits))
    return {s[i:i + n] for i in range(len(s) - n + 1)}


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(2024)
