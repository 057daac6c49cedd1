import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfree.core import (BTruncation, ExplicitB, FileListB, PrimeSquares, ScaledPrimes, UnionB,
                        Window, admissibility_defect, block_codes, block_rows, code_to_word,
                        divisors, eta_window, factorize, parse_bspec, parse_file_list,
                        primes_upto, primitive_subset, read_window, sieve_multiples,
                        smallest_prime_factors, theta_window, truncate, write_window)
from bfree.errors import ExactnessError, GeometryError, InputError

from conftest import brute_eta, naive_primes, words

small_sets = st.lists(st.integers(1, 40), min_size=0, max_size=6)


def test_primes_match_trial_division():
    assert primes_upto(500).tolist() == naive_primes(500)
    assert primes_upto(1).tolist() == []


def test_smallest_prime_factor_table():
    spf = smallest_prime_factors(1000)
    for n in range(2, 1001):
        p = int(spf[n])
        assert n % p == 0 and all(n % q for q in range(2, p))


@given(st.integers(1, 10**6))
def test_factorize_and_divisors(n):
    assert math.prod(p**e for p, e in factorize(n)) == n
    if n <= 5000:
        assert divisors(n) == [d for d in range(1, n + 1) if n % d == 0]


def test_family_truncations():
    assert truncate(PrimeSquares(), 10).elements == (4, 9)
    assert truncate(ScaledPrimes(2), 15).elements == (4, 6, 10, 14)
    t = truncate(ExplicitB([2, 3]), 100)
    assert t.elements == (2, 3) and t.lcm == 6 and t.complete
    assert not truncate(PrimeSquares(), 100).complete


def test_iteration_is_increasing_and_repeatable():
    head = [b for _, b in zip(range(30), ScaledPrimes(3))]
    assert head == [b for _, b in zip(range(30), ScaledPrimes(3))]
    assert all(a < b for a, b in zip(head, head[1:]))
    assert list(ExplicitB([5, 2, 2, 9])) == [2, 5, 9]


def test_union_and_parse():
    spec = parse_bspec("scaled-primes:2+explicit:9")
    assert isinstance(spec, UnionB)
    assert truncate(spec, 20).elements == (4, 6, 9, 10, 14)
    assert [b for _, b in zip(range(6), spec)] == [4, 6, 9, 10, 14, 22]
    assert parse_bspec("primes").describe() == "primes"
    for bad in ("", "nonsense", "scaled-primes:x", "explicit:0"):
        with pytest.raises(InputError):
            parse_bspec(bad)


def test_file_list(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("# header\n4\n9  # nine\n\n25\n")
    spec = FileListB(p)
    assert truncate(spec, 100).elements == (4, 9, 25)
    assert parse_bspec(f"file:{p}").upto(10).tolist() == [4, 9]
    with pytest.raises(InputError):
        parse_file_list("4\n3\n")
    with pytest.raises(InputError):
        truncate(FileListB(tmp_path / "missing.txt"), 10)


def test_lcm_overflow_is_flagged():
    t = truncate(ScaledPrimes(1), 200)
    assert t.overflowed and t.lcm is None


@pytest.mark.parametrize("given_,want", [([2, 4, 5], [2, 5]), ([6, 2, 3, 12], [2, 3]),
                                         ([4, 9, 25], [4, 9, 25]), ([1, 7], [1])])
def test_primitive_subset_examples(given_, want):
    assert primitive_subset(given_) == want


@given(st.lists(st.integers(1, 300), max_size=80))
def test_primitive_subset_matches_definition(elems):
    got = primitive_subset(elems)
    want = sorted({b for b in elems if not any(c != b and b % c == 0 for c in set(elems))})
    assert got == want


def test_sieve_examples():
    w = sieve_multiples(BTruncation.from_elements([2, 3]), 1, 12)
    assert set(w.support().tolist()) == {2, 3, 4, 6, 8, 9, 10, 12}
    w = sieve_multiples(BTruncation.from_elements([4, 9]), 1, 12)
    assert set(w.support().tolist()) == {4, 8, 9, 12}
    assert not sieve_multiples(BTruncation.from_elements([]), -5, 20).bits.any()


@settings(max_examples=60)
@given(small_sets, st.integers(-200, 200), st.integers(1, 300), st.integers(1, 50))
def test_sieve_matches_brute_force(elems, a, L, segment):
    trunc = BTruncation.from_elements(elems)
    w = sieve_multiples(trunc, a, L, segment=segment)
    assert (1 - w.bits.astype(int)).tolist() == brute_eta(set(elems), a, L)


def test_sieve_is_thread_count_invariant():
    trunc = truncate(ScaledPrimes(2), 5000)
    one = sieve_multiples(trunc, -3000, 50_000, segment=4096)
    many = sieve_multiples(trunc, -3000, 50_000, segment=4096, threads=4)
    assert one == many


def test_eta_examples():
    assert str(eta_window(BTruncation.from_elements([2, 3]), 1, 6)) == "100010"
    w = eta_window(BTruncation.from_elements([4, 9]), 1, 10)
    assert set(np.flatnonzero(~w.bits) + 1) == {4, 8, 9}
    w = eta_window(truncate(PrimeSquares(), 100), 1, 100)
    assert w.at(12) == 0 and w.tag == "eta"


def test_eta_refuses_short_truncation():
    with pytest.raises(ExactnessError):
        eta_window(truncate(PrimeSquares(), 10), 1, 100)
    w = eta_window(truncate(PrimeSquares(), 10), 1, 100, strict=False)
    assert w.tag == "eta-K" and w.at(25) == 1


def test_admissibility_and_theta():
    eta = eta_window(BTruncation.from_elements([2, 3]), 1, 6)
    assert admissibility_defect(eta, 2) == {1}
    assert admissibility_defect(Window(0, [1, 1, 1, 1]), 2) == {0, 1}
    assert admissibility_defect(Window(0, [0] * 5), 7) == set()
    eta12 = eta_window(BTruncation.from_elements([2, 3]), 1, 12)
    assert theta_window(eta12, 2) == [0]
    assert theta_window(eta12, 3) == [0]
    assert theta_window(Window(0, [1] * 6), 3) == []
    with pytest.raises(InputError):
        theta_window(Window(0, [1, 1]), 3)


def test_window_geometry():
    w = Window.from_string("0110", offset=-2)
    assert w.stop == 2 and w.at(-1) == 1 and w.support().tolist() == [-1, 0]
    assert w.segment(-1, 2) == Window.from_string("11", offset=-1)
    with pytest.raises(GeometryError):
        w.segment(0, 5)
    assert w.shifted(1).offset == -3
    with pytest.raises(InputError):
        Window(0, [1], tag="nope")
    with pytest.raises(GeometryError):
        Window(0, [1, 0]) <= Window(1, [1, 0])


@given(st.integers(-10**9, 10**9), st.lists(st.booleans(), max_size=200),
       st.sampled_from(["eta", "eta-K", "generic", "eta-star-upper"]))
def test_window_serialization_round_trip(a, bits, tag):
    w = Window(a, bits, tag)
    back = Window.from_text(w.to_text())
    assert back == w and back.tag == tag
    assert Window.from_bytes(w.to_bytes(), tag) == w


def test_window_files(tmp_path):
    w = Window.from_string("1011001", offset=5, tag="eta")
    write_window(tmp_path / "w.txt", w)
    write_window(tmp_path / "w.bin", w, binary=True)
    assert read_window(tmp_path / "w.txt") == w
    assert read_window(tmp_path / "w.bin", binary=True) == w
    with pytest.raises(InputError):
        Window.from_text("window 0 3 eta\n10\n")


@settings(max_examples=50)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=120), st.integers(1, 12))
def test_block_codes_match_string_slicing(bits, n):
    if n > len(bits):
        return
    arr = np.array(bits, dtype=bool)
    codes = block_codes(arr, n)
    s = "".join(map(str, bits))
    assert [code_to_word(c, n) for c in codes.tolist()] == [s[i:i + n] for i in range(len(s) - n + 1)]
    assert len(np.unique(block_rows(arr, n))) == len(words(bits, n))
