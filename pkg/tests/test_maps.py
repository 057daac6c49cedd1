import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfree.core import BTruncation, ExplicitB, PrimeSquares, Window, parse_bspec, truncate
from bfree.errors import GeometryError, InputError, LcmOverflowError
from bfree.maps import (HPoint, assemble, gamma_star, hat_read, map_M, map_M_H, map_N, phi_K,
                        phi_lower_K, phi_window, sample_h, skew_orbit)
from bfree.structure import default_bstar
from bfree.toeplitz import eta_K_window

from conftest import brute_free

T23 = BTruncation.from_elements([2, 3])
bitlists = st.lists(st.booleans(), min_size=1, max_size=60)


def test_hpoint_is_canonical():
    h = HPoint.delta(7, T23)
    assert h.residue == 1 and h == HPoint.delta(13, T23) and h.coordinates() == {2: 1, 3: 1}
    assert h.rotate(5) == HPoint.delta(0, T23)
    assert len({h, HPoint.delta(-5, T23)}) == 1
    with pytest.raises(LcmOverflowError):
        HPoint(0, truncate(parse_bspec("primes"), 300))


def test_uniform_sampling_covers_residues(rng):
    seen = {sample_h(T23, rng).residue for _ in range(200)}
    assert seen == set(range(6))


def test_phi_K_examples():
    assert str(phi_K(HPoint.delta(0, T23), 1, 6)) == "100010"
    assert str(phi_K(HPoint.delta(1, T23), 0, 6)) == "100010"
    # eta at 3..8 is 0,0,1,0,1,0
    assert str(phi_K(HPoint.delta(3, T23), 0, 6)) == "001010"


@settings(max_examples=40)
@given(st.integers(-500, 500), st.integers(-50, 50))
def test_phi_K_equivariance(n, a):
    trunc = BTruncation.from_elements([4, 6, 9])
    h = HPoint.delta(n, trunc)
    moved = phi_K(h.rotate(), a, 30)
    assert np.array_equal(moved.bits, phi_K(h, a + 1, 30).bits)
    assert moved.bits.astype(int).tolist() == [int(brute_free(n + 1 + p, [4, 6, 9])) for p in range(a, a + 30)]


def test_phi_window_is_exact_shift_of_eta():
    h = HPoint.delta(1000, truncate(PrimeSquares(), 100))
    w = phi_window(h, PrimeSquares(), -20, 50)
    squares = [p * p for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)]
    assert w.bits.astype(int).tolist() == [int(brute_free(1000 + p, squares)) for p in range(-20, 30)]


def test_gamma_star_examples():
    g = gamma_star(HPoint.delta(7, BTruncation.from_elements([4, 6])), BTruncation.from_elements([2]))
    assert g.residue == 1 and g.modulus == 2
    trunc = truncate(parse_bspec("scaled-primes:2"), 10)
    assert gamma_star(HPoint.delta(10, trunc), BTruncation.from_elements([2])).residue == 0
    assert gamma_star(HPoint.delta(0, trunc), BTruncation.from_elements([2])) == \
        HPoint.delta(0, BTruncation.from_elements([2]))
    with pytest.raises(InputError):
        gamma_star(HPoint.delta(0, trunc), BTruncation.from_elements([9]))


@given(st.integers(-10**6, 10**6))
def test_gamma_star_homomorphism(n):
    trunc = truncate(parse_bspec("scaled-primes:2+explicit:9"), 30)
    star = BTruncation.from_elements([2, 9])
    h = HPoint.delta(n, trunc)
    assert gamma_star(h.rotate(), star) == gamma_star(h, star).rotate()


def test_M_and_N_examples():
    x = Window.from_string("1010")
    assert map_M(x, Window.from_string("1111")) == x
    assert not map_M(x, Window.from_string("0000")).bits.any()
    assert str(map_M(x, Window.from_string("1100"))) == "1000"
    w, x3 = Window.from_string("000"), Window.from_string("101")
    assert str(map_N(w, x3, Window.from_string("110"))) == "100"
    assert map_N(w, x3, Window.from_string("000")) == w
    assert map_N(w, x3, Window.from_string("111")) == x3
    with pytest.raises(InputError):
        map_N(Window.from_string("010"), x3, x3)
    with pytest.raises(GeometryError):
        map_M(x, Window.from_string("10"))


@settings(max_examples=60)
@given(bitlists, st.data())
def test_N_is_w_plus_y_times_difference(xbits, data):
    n = len(xbits)
    x = np.array(xbits)
    w = x & np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    y = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    out = map_N(Window(0, w), Window(0, x), Window(0, y))
    assert out.bits.astype(int).tolist() == [int(a) + int(c) * (int(b) - int(a)) for a, b, c in zip(w, x, y)]


def test_M_H_endpoints_and_finite_case():
    spec = parse_bspec("scaled-primes:2+explicit:9")
    trunc = truncate(spec, 100)
    star = default_bstar(spec, 100)
    h = HPoint.delta(17, trunc)
    ones = Window(-10, np.ones(40, dtype=bool))
    zeros = Window(-10, np.zeros(40, dtype=bool))
    assert map_M_H(h, ones, spec, star, 9).upper == phi_K(h, -10, 40)
    low, _ = phi_lower_K(h, star, 9, -10, 40)
    assert np.array_equal(map_M_H(h, zeros, spec, star, 9).lower.bits, low.bits)

    fin = ExplicitB([2, 3])
    h = HPoint.delta(5, T23)
    for y in (ones, zeros, Window(-10, np.arange(40) % 3 == 0)):
        enc = map_M_H(h, y, fin, default_bstar(fin, 3), 3)
        assert enc.exact and np.array_equal(enc.lower.bits, phi_window(h, fin, -10, 40).bits)


def test_hat_read_examples():
    x = Window.from_string("10110")
    word, anchor = hat_read(x, Window.from_string("01010"))
    assert str(word) == "01" and anchor == 1 and word.offset == 0
    assert hat_read(x, Window.from_string("11111"))[0] == Window.from_string("10110")
    with pytest.raises(InputError):
        hat_read(x, Window.from_string("00000"))


@settings(max_examples=80)
@given(st.integers(2, 40), st.data())
def test_hat_relation(L, data):
    xs = data.draw(st.lists(st.booleans(), min_size=L, max_size=L))
    zs = data.draw(st.lists(st.booleans(), min_size=L, max_size=L))
    a = data.draw(st.integers(-L + 1, 0))
    x, z = Window(a, xs), Window(a, zs)
    # sigma moves the window one step left: position p of sigma x is x(p+1)
    sx, sz = x.shifted(1), z.shifted(1)
    ahead = z.support()
    if not (ahead >= 1).any():
        return
    lhs, _ = hat_read(sx, sz)
    rhs, _ = hat_read(x, z)
    want = rhs.shifted(1) if z.at(0) else rhs
    assert lhs == want


@settings(max_examples=60)
@given(st.integers(1, 40), st.data())
def test_assemble_inverts_hat(L, data):
    zs = data.draw(st.lists(st.booleans(), min_size=L, max_size=L))
    if not any(zs):
        return
    xs = data.draw(st.lists(st.booleans(), min_size=L, max_size=L))
    z = Window(0, zs)
    w = Window(0, [bool(b) and not c for b, c in zip(data.draw(st.lists(
        st.booleans(), min_size=L, max_size=L)), zs)])
    x = Window(0, xs)
    out, mask = assemble(w, z, hat_read(x, z)[0])
    assert not mask.any()
    assert out.bits.astype(int).tolist() == [int(a) | (int(b) & int(c)) for a, b, c in zip(w.bits, x.bits, z.bits)]


def test_skew_orbit_finite_never_shifts():
    x = Window.from_string("1100101")
    tr = skew_orbit(HPoint.delta(0, T23), x, 50, ExplicitB([2, 3]), T23, 3)
    assert tr.shifts == 0 and tr.x == x and not tr.halted and tr.steps == 50
    assert skew_orbit(HPoint.delta(0, T23), x, 0, ExplicitB([2, 3]), T23, 3).x == x
    assert tr.to_csv().splitlines()[0] == "step,h_residue,shifted,certified"


def test_skew_orbit_shifts_on_difference_set():
    spec = parse_bspec("scaled-primes:2+explicit:9")
    star = default_bstar(spec, 100)
    h = HPoint.delta(1, truncate(spec, 100))
    tr = skew_orbit(h, Window.from_string("10"), 400, spec, star, 18)
    assert not tr.halted
    eta = eta_K_window(spec, 1000, 1, 400).bits
    star_bits = np.array([n % 2 == 1 and n % 9 != 0 for n in range(1, 401)])
    want = eta & ~star_bits
    assert [r[2] for r in tr.rows] == want.astype(int).tolist()
    assert tr.shifts == int(want.sum()) and tr.x.offset == -tr.shifts


def test_skew_orbit_halts_when_uncertified():
    spec = parse_bspec("scaled-primes:2+explicit:9")
    star = default_bstar(spec, 100)
    tr = skew_orbit(HPoint.delta(1, truncate(spec, 100)), Window.from_string("1"), 50, spec, star, 2)
    assert tr.halted and "uncertified" in tr.reason
