import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfree.core import BTruncation, ExplicitB, PrimeSquares, ScaledPrimes, parse_bspec, primes_upto, truncate
from bfree.density import (DensityEnclosure, components, davenport_erdos_profile,
                           exact_density_multiples, free_density, logarithmic_density_estimate,
                           lower_density_sequence, period_density, running_minima,
                           subset_density, upper_density_estimate)
from bfree.errors import CapExceededError, ExactnessError, InputError

from conftest import brute_multiples_density, ie_density


def ps_free(K):
    """Pairwise coprime B: the free density is a plain product."""
    return math.prod(Fraction(p * p - 1, p * p) for p in primes_upto(math.isqrt(K)).tolist())


def two_primes_free(K):
    """F_{2P_K}: all odd n, plus 2m with m free of primes <= K/2."""
    return Fraction(1, 2) + Fraction(1, 2) * math.prod(
        Fraction(p - 1, p) for p in primes_upto(K // 2).tolist())


@pytest.mark.parametrize("elems,want", [([2, 3], Fraction(2, 3)), ([2], Fraction(1, 2)),
                                        ([4, 9, 25, 49], Fraction(457, 1225)),
                                        ([], Fraction(0)), ([1, 5], Fraction(1))])
def test_exact_examples(elems, want):
    trunc = BTruncation.from_elements(elems)
    got = exact_density_multiples(trunc)
    assert got.is_exact and got.value == want
    if elems:
        assert ie_density(elems) == want


def test_four_prime_squares_against_period_count():
    trunc = BTruncation.from_elements([4, 9, 25, 49])
    assert period_density(trunc) == Fraction(457, 1225) == brute_multiples_density([4, 9, 25, 49])
    assert 1 - exact_density_multiples(trunc).value == Fraction(768, 1225)


@settings(max_examples=120, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=1, max_size=7))
def test_recursion_matches_subset_enumeration(elems):
    trunc = BTruncation.from_elements(elems)
    rec = exact_density_multiples(trunc, mode="recursive").value
    assert rec == exact_density_multiples(trunc, mode="subset").value
    distinct = sorted(set(elems))
    if math.lcm(*distinct) <= 50_000:
        assert rec == brute_multiples_density(distinct)
    else:
        assert rec == ie_density(distinct)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 2000), min_size=1, max_size=30))
def test_recursion_matches_inclusion_exclusion_wider(elems):
    prim = sorted(set(elems))[:14]
    assert 1 - free_density(prim) == subset_density(prim)


def test_known_infinite_family_prefixes():
    for K in (10, 100, 1000, 10**4):
        assert exact_density_multiples(truncate(PrimeSquares(), K)).value == 1 - ps_free(K)
    for K in (15, 200, 5000):
        assert exact_density_multiples(truncate(ScaledPrimes(2), K)).value == 1 - two_primes_free(K)


def test_scaled_primes_at_ten():
    # B_10 = {4, 6, 10}: 1/4+1/6+1/10-1/12-1/20-1/30+1/60
    assert exact_density_multiples(truncate(ScaledPrimes(2), 10)).value == Fraction(11, 30)


def test_components_split_on_shared_factors():
    parts = sorted(sorted(c) for c in components([4, 6, 9, 25, 35, 11]))
    assert parts == [[4, 6, 9], [11], [25, 35]]


def test_budget_overrun_and_enclosure():
    elems = truncate(ScaledPrimes(1), 3000).elements[:60]
    elems = sorted({a * b for a, b in zip(elems, elems[1:])} | {elems[0] * elems[-1]})
    with pytest.raises(CapExceededError):
        exact_density_multiples(BTruncation.from_elements(elems), mode="recursive", budget=50)
    enc = exact_density_multiples(BTruncation.from_elements(elems), budget=50)
    assert enc.method == "enclosure-pruned" and enc.lower <= enc.upper
    true = exact_density_multiples(BTruncation.from_elements(elems)).value
    assert enc.lower <= true <= enc.upper


def test_subset_cap():
    with pytest.raises(CapExceededError):
        subset_density(list(range(2, 40)), cap=10)


def test_enclosure_type():
    e = DensityEnclosure.exact(Fraction(1, 3))
    assert e.is_exact and e.midpoint == Fraction(1, 3)
    assert e.complement().value == Fraction(2, 3)
    with pytest.raises(InputError):
        exact_density_multiples(BTruncation.from_elements([2]), mode="bogus")


def test_davenport_erdos_profile():
    s = davenport_erdos_profile(PrimeSquares(), [10, 100, 1000])
    assert s.nondecreasing() is True
    assert [float(v) for v in s.values] == pytest.approx([1 - float(ps_free(K)) for K in (10, 100, 1000)])
    assert abs(float(s.limit) - (1 - 6 / math.pi**2)) < 0.005
    flat = davenport_erdos_profile(ExplicitB([2, 3]), [5, 50, 500])
    assert set(flat.values) == {Fraction(2, 3)}
    assert flat.to_csv().splitlines()[0] == "K,lower,upper,value,method"
    with pytest.raises(InputError):
        davenport_erdos_profile(PrimeSquares(), [100, 10])


def test_ell_sequence_for_two_three():
    ell = lower_density_sequence(ExplicitB([2, 3]), 1000, 1000, burn_in=10)
    counts = [sum(1 for k in range(1, l + 1) if k % 2 == 0 or k % 3 == 0) for l in ell.prefixes]
    assert ell.counts == counts
    # each recorded prefix is a strict new minimum of |M cap [1,l]|/l
    ratios = [Fraction(c, l) for c, l in zip(counts, ell.prefixes)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    # the deficit at l = 6k+1 shrinks, so the minimum is reached early
    every = [Fraction(sum(1 for k in range(1, l + 1) if k % 2 == 0 or k % 3 == 0), l)
             for l in range(10, 1001)]
    assert ell.ratios[-1] == min(every) == Fraction(8, 13)


def test_ell_sequence_for_two():
    ell = lower_density_sequence(ExplicitB([2]), 1000, 1000, burn_in=1)
    assert all(l % 2 == 1 for l in ell.prefixes)
    big = lower_density_sequence(ExplicitB([2]), 10**5, 10**5, burn_in=100)
    assert abs(float(big.ratios[-1]) - 0.5) < 0.01


def test_ell_sequence_prime_squares_near_truncation_density():
    # with a long burn-in the running minimum sits close to the exact value
    ell = lower_density_sequence(PrimeSquares(), 10**6, 10**6, burn_in=10**4)
    exact = 1 - ps_free(10**6)
    assert abs(float(ell.ratios[-1]) - float(exact)) < 0.001
    assert ell.to_csv().splitlines()[0] == "ell,ratio_num,ratio_den"


def test_ell_needs_exact_prefix():
    with pytest.raises(ExactnessError):
        lower_density_sequence(PrimeSquares(), 100, 1000)
    with pytest.raises(InputError):
        running_minima(np.array([1, 2, 3]), 10)


def test_log_density_examples():
    L = 10**6
    harmonic = (math.log(L / 2) + 0.5772156649) / 2 / math.log(L)
    est = logarithmic_density_estimate(ExplicitB([2]), L, L)
    assert abs(est - 0.5) < 0.01 and abs(est - harmonic) < 1e-4
    direct = sum(1 / k for k in range(1, L + 1) if k % 2 == 0 or k % 3 == 0) / math.log(L)
    est23 = logarithmic_density_estimate(ExplicitB([2, 3]), L, L)
    assert est23 == pytest.approx(direct, rel=1e-12) and abs(est23 - 2 / 3) < 0.01
    assert logarithmic_density_estimate(ExplicitB([]), 100, 100) == 0


def test_upper_density_examples():
    up = upper_density_estimate(ExplicitB([2, 3]), 10**4, 10**4, burn_in=1000)
    assert abs(up - Fraction(1, 3)) <= Fraction(1, 1000)
    # the free count stays within 8 of n*768/1225, so a burn-in of 10^4 suffices
    up = upper_density_estimate(ExplicitB([4, 9, 25, 49]), 10**6, 10**6, burn_in=10**4)
    assert abs(float(up) - 768 / 1225) < 0.001


@pytest.mark.slow
def test_upper_density_prime_squares_large():
    up = upper_density_estimate(PrimeSquares(), 10**7, 10**7)
    assert abs(float(up) - 6 / math.pi**2) < 0.005


def test_union_spec_density():
    spec = parse_bspec("scaled-primes:2+explicit:9")
    d = exact_density_multiples(truncate(spec, 2000)).value
    odd_free = Fraction(1, 2) * Fraction(8, 9)
    # free set: odd non-multiples of 9, plus evens 2m with m free of primes <= 1000
    assert 1 - d == odd_free + (two_primes_free(2000) - Fraction(1, 2))
