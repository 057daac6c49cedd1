import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bfree.core import (BTruncation, ExplicitB, PrimeSquares, ScaledPrimes, parse_bspec, primes_upto,
                        primitive_subset)
from bfree.structure import (behrend_gauge, bprime_approx, bstar_approx, default_bstar,
                             greedy_coprime, divisibility_check, quotient_sets, taut_check)


def test_quotient_sets_by_hand():
    q = quotient_sets(BTruncation.from_elements([4, 6, 9]), 3)
    assert q == {1: [4, 6, 9], 2: [2, 3], 3: [2, 3]}


def test_greedy_coprime():
    assert greedy_coprime([2, 4, 3, 9, 5, 25, 7], 4) == [2, 3, 5, 7]
    assert greedy_coprime([6, 10, 15], 3) == [6]


def test_finite_primitive_sets_are_taut():
    rep = taut_check(ExplicitB([4, 6, 9]), 100)
    assert rep.overall == "taut" and not rep.truncation_level
    assert [v for *_, v in rep.entries] == ["contributes"] * 3


def test_redundant_element_breaks_tautness():
    # 4 adds no new multiples once 2 is present
    trunc = BTruncation.from_elements([2, 4, 9])
    rep = taut_check(ExplicitB(trunc.elements), 100)
    verdicts = {b: v for b, _, _, v in rep.entries}
    assert verdicts[4] == "redundant" and rep.overall == "not-taut"


def test_taut_report_is_truncation_level_for_infinite_sets():
    rep = taut_check(PrimeSquares(), 100)
    assert rep.truncation_level and rep.overall == "taut"
    assert rep.as_dict()["entries"][0]["b"] == 4


def test_bstar_known_families():
    assert bstar_approx(PrimeSquares(), 1000).result.elements == (1,)
    assert bstar_approx(ScaledPrimes(2), 1000).result.elements == (2,)
    assert bstar_approx(ScaledPrimes(2), 1000).found_D[0] == (2, (2, 3, 5, 7, 11))
    assert default_bstar(parse_bspec("scaled-primes:2+explicit:9"), 100).result.elements == (2, 9)
    star = default_bstar(parse_bspec("scaled-primes:2+scaled-primes:9"), 100)
    assert star.result.elements == (2, 9)


def test_bstar_of_finite_set_is_itself():
    star = bstar_approx(ExplicitB([4, 6, 9]), 100)
    assert star.found_D == [] and star.result.elements == (4, 6, 9) and star.result.complete


def test_bstar_needs_enough_witnesses():
    # below the fifth odd prime the scale 2 has too few coprime quotients
    assert bstar_approx(ScaledPrimes(2), 20).result.elements == (4, 6, 10, 14)
    assert bstar_approx(ScaledPrimes(2), 22).result.elements == (2,)


def test_bprime_for_scaled_primes():
    K = 100
    got = bprime_approx(ScaledPrimes(2), K, epsilon=Fraction(1, 5))
    assert got.result.elements == (2,)
    # gauge for c = 2 is the density of multiples of the primes up to 50
    want = 1 - math.prod(Fraction(p - 1, p) for p in primes_upto(50).tolist())
    assert got.gauges[2] == want and want > Fraction(4, 5)
    assert 1 not in got.gauges or got.gauges[1] <= Fraction(4, 5)
    strict = bprime_approx(ScaledPrimes(2), K)
    assert strict.result.elements == truncate_elems(K)


def truncate_elems(K):
    return tuple(2 * p for p in primes_upto(K // 2).tolist())


def test_behrend_gauge_labels():
    assert behrend_gauge(PrimeSquares(), [10, 100, 1000]).label == "not-behrend-likely"
    g = behrend_gauge(ScaledPrimes(1), [100, 1000], epsilon=Fraction(1, 5))
    assert g.label == "behrend-likely" and g.final > Fraction(4, 5)
    assert g.as_dict()["rigorous"] is False


def test_divisibility_identical_sets():
    v = divisibility_check(ExplicitB([4, 9]), ExplicitB([4, 9]), 100, 100)
    assert v.clause_a and v.clause_b and v.consistent and v.taut_C == "taut"


def test_divisibility_finds_both_failures():
    v = divisibility_check(ExplicitB([4, 9]), ExplicitB([2, 9]), 100, 100)
    assert v.a_every_b_has_c and v.missing_bstar == [2]
    # eta* = 1 at n = 2 while eta_C(2) = 0
    assert v.violations_star_le_C[0] == 2 and not v.clause_b
    assert v.consistent
    assert any(w["n"] == 2 and w["violates"] == "eta* <= eta_C" for w in v.witnesses)


def test_divisibility_prime_squares_against_one():
    v = divisibility_check(PrimeSquares(), ExplicitB([1]), 1000, 1000)
    assert v.clause_a and v.clause_b and v.bstar == [1]


def test_divisibility_rejects_short_truncation():
    with pytest.raises(ValueError):
        divisibility_check(PrimeSquares(), PrimeSquares(), 10, 100)


def test_two_four_is_not_taut():
    rep = taut_check(ExplicitB([2, 4]), 10)
    assert rep.overall == "not-taut"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 80), min_size=1, max_size=6))
def test_random_finite_primitive_sets_are_taut(elems):
    prim = primitive_subset(elems)
    assert taut_check(ExplicitB(prim), 100).overall == "taut"


def test_bstar_contains_multiples_of_truncation():
    for spec in (ScaledPrimes(2), PrimeSquares(), parse_bspec("scaled-primes:2+explicit:9")):
        star = bstar_approx(spec, 300)
        res = star.result.elements
        assert primitive_subset(res) == list(res)
        assert all(any(b % s == 0 for s in res) for b in star.base.elements)


@pytest.mark.parametrize("family", ["scaled-primes:2", "prime-squares",
                                    "scaled-primes:2+explicit:9", "explicit:2,3"])
def test_star_of_prime_approx_matches_star(family):
    spec = parse_bspec(family)
    star = bstar_approx(spec, 1000)
    via = bprime_approx(spec, 1000).result
    # adding the B' scales and then the B* scales lands on B* again
    found = [d for d, _ in star.found_D]
    assert primitive_subset(list(via.elements) + found) == list(star.result.elements)


def test_bprime_leaves_finite_and_square_sets_alone():
    assert bprime_approx(ExplicitB([2, 3]), 100).found_C == []
    assert bprime_approx(PrimeSquares(), 1000).found_C == []


def test_divisibility_prime_squares_against_two_three():
    v = divisibility_check(PrimeSquares(), ExplicitB([2, 3]), 30, 30)
    assert 25 in v.missing_c and not v.clause_a
    assert 25 in v.violations_C_le_eta and not v.clause_b


def test_divisibility_scaled_primes_with_nine():
    B = parse_bspec("scaled-primes:2+explicit:9")
    v = divisibility_check(B, ExplicitB([2, 9]), 10**4, 10**4)
    assert v.clause_a and v.clause_b and v.bstar == [2, 9]
