"""Periodic parts of eta* and the periodic approximants eta_K, underline-eta_K.

For x = 1_{F_{B*}} the class n + sZ meets bZ exactly when gcd(b, s) | n,
and it lies inside bZ exactly when b | gcd(n, s).  So n is s-periodic
with value 1 when no b* satisfies the first condition, and s-periodic
with value 0 when some b* satisfies the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import BSpec, BTruncation, Window, eta_window, sieve_multiples, truncate
from .density import EllSequence
from .errors import InputError, LcmOverflowError
from .structure import StarApprox, default_bstar

PER_ONE, PER_ZERO, UNDETERMINED = 1, 0, -1
RESIDUE_CAP = 10_000_000


def _star(bstar: StarApprox | BTruncation) -> BTruncation:
    return bstar.result if isinstance(bstar, StarApprox) else bstar


@dataclass(frozen=True, eq=False)
class PerClassification:
    """Per-position status for eta* in ``[a, a+L)`` at period s."""

    s: int
    K_prime: int
    a: int
    codes: np.ndarray

    @property
    def L(self) -> int:
        return len(self.codes)

    def _where(self, code) -> set[int]:
        return set((np.flatnonzero(self.codes == code) + self.a).tolist())

    @property
    def per_one(self) -> set[int]:
        return self._where(PER_ONE)

    @property
    def per_zero(self) -> set[int]:
        return self._where(PER_ZERO)

    @property
    def undetermined(self) -> set[int]:
        return self._where(UNDETERMINED)

    def to_text(self) -> str:
        table = np.frombuffer(b"?01", dtype=np.uint8)
        body = table[self.codes + 1].tobytes().decode()
        return f"per {self.s} {self.K_prime} {self.a} {self.L}\n{body}\n"


def per_positions(bstar: StarApprox | BTruncation, s: int, a: int, L: int,
                  K_prime: int | None = None) -> PerClassification:
    """Classify n in [a, a+L) as per-one, per-zero or undetermined for eta*.

    Only elements of B* up to ``K_prime`` take part.  Raising K_prime can
    only shrink per-one and grow per-zero.
    """
    if s < 1:
        raise InputError("period s must be >= 1")
    if L < 1:
        raise InputError("window length must be >= 1")
    star = _star(bstar)
    K_prime = star.K if K_prime is None else K_prime
    elems = [b for b in star.elements if b <= K_prime]
    hit = np.zeros(L, dtype=bool)
    zero = np.zeros(L, dtype=bool)
    for g in sorted({math.gcd(b, s) for b in elems}):
        hit[(-a) % g :: g] = True
    for b in sorted(b for b in elems if s % b == 0):
        zero[(-a) % b :: b] = True
    codes = np.full(L, UNDETERMINED, dtype=np.int8)
    codes[~hit] = PER_ONE
    codes[zero] = PER_ZERO
    return PerClassification(s, K_prime, a, codes)


def star_lcm(star: BTruncation, K: int) -> int:
    """lcm(B*_K), refusing to proceed past the cap."""
    sub = star.restrict(K)
    if sub.overflowed:
        raise LcmOverflowError(f"lcm of B*_{K} overflows")
    return sub.lcm


@dataclass
class RegularityEntry:
    K: int
    s: int
    aperiodic: Fraction


def regularity_profile(bstar: StarApprox | BTruncation, K_grid: Sequence[int],
                       K_prime: int | None = None,
                       residue_cap: int = RESIDUE_CAP) -> list[RegularityEntry]:
    """Density of positions outside Per(eta*, lcm(B*_K)) for each K."""
    star = _star(bstar)
    out = []
    for K in K_grid:
        s = star_lcm(star, K)
        if s > residue_cap:
            raise LcmOverflowError(f"lcm(B*_{K}) = {s} exceeds the residue cap")
        cls = per_positions(star, s, 0, s, K_prime)
        out.append(RegularityEntry(K, s, Fraction(int(np.sum(cls.codes == UNDETERMINED)), s)))
    return out


def eta_K_window(spec: BSpec | BTruncation, K: int, a: int, L: int) -> Window:
    """1_{F_{B_K}} on [a, a+L), periodic with period lcm(B_K)."""
    trunc = spec.restrict(K) if isinstance(spec, BTruncation) else truncate(spec, K)
    return Window(a, ~sieve_multiples(trunc, a, L).bits, "eta-K")


def underline_eta_K_window(bstar: StarApprox | BTruncation, K: int, a: int, L: int,
                           K_prime: int | None = None,
                           strict: bool = False) -> tuple[Window, np.ndarray]:
    """Lower approximant: 1 exactly on the certified per-one positions.

    Returns the window and the mask of undetermined positions, which are
    set to 0.  ``strict`` refuses windows with undetermined positions.
    """
    star = _star(bstar)
    s = star_lcm(star, K)
    cls = per_positions(star, s, a, L, K_prime)
    undetermined = cls.codes == UNDETERMINED
    if strict and undetermined.any():
        raise InputError(f"{int(undetermined.sum())} undetermined positions in strict mode")
    return Window(a, cls.codes == PER_ONE, "underline-eta-K"), undetermined


def eta_star_window(bstar: StarApprox | BTruncation, a: int, L: int) -> Window:
    """1_{F_{B*}} from the approximation; exact when the approximation is."""
    star = _star(bstar)
    tag = "eta" if star.complete else "eta-star-upper"
    return Window(a, ~sieve_multiples(star, a, L).bits, tag)


@dataclass
class SandwichVerdict:
    K: int
    a: int
    L: int
    lower_le_star: int
    star_le_eta: int
    eta_le_upper: int
    strict: dict
    first_violations: dict

    @property
    def passed(self) -> bool:
        return self.lower_le_star == self.star_le_eta == self.eta_le_upper == 0

    def as_dict(self) -> dict:
        return {"K": self.K, "a": self.a, "L": self.L, "passed": self.passed,
                "violations": {"lower<=star": self.lower_le_star,
                               "star<=eta": self.star_le_eta,
                               "eta<=eta_K": self.eta_le_upper},
                "strict_somewhere": self.strict,
                "first_violations": self.first_violations}


def sandwich_check(spec: BSpec, K: int, a: int, L: int, *, bstar: StarApprox | None = None,
                   K_exact: int | None = None, K_prime: int | None = None) -> SandwichVerdict:
    """Check underline-eta_K <= eta* <= eta <= eta_K on [a, a+L)."""
    K_exact = max(abs(a), abs(a + L - 1)) if K_exact is None else K_exact
    bstar = bstar or default_bstar(spec, K, K_prime)
    lower, _ = underline_eta_K_window(bstar, K, a, L, K_prime)
    star = eta_star_window(bstar, a, L)
    eta = eta_window(truncate(spec, max(K_exact, 1)), a, L)
    upper = eta_K_window(spec, K, a, L)
    pairs = {"lower<=star": (lower, star), "star<=eta": (star, eta), "eta<=eta_K": (eta, upper)}
    counts, strict, first = {}, {}, {}
    for name, (x, y) in pairs.items():
        bad = np.flatnonzero(x.bits & ~y.bits)
        counts[name] = len(bad)
        first[name] = (bad[:10] + a).tolist()
        strict[name] = bool(np.any(~x.bits & y.bits))
    return SandwichVerdict(K, a, L, counts["lower<=star"], counts["star<=eta"],
                           counts["eta<=eta_K"], strict, first)


def density_along(mask_counts: np.ndarray, ell: EllSequence, tail: float = 0.5) -> Fraction:
    """Finite proxy for the upper density of a set along (l_i).

    ``mask_counts[l-1]`` is the number of elements in [1, l].  The proxy
    is the largest ratio over the l_i in the last ``tail`` fraction of
    the sequence (by index), so early transients do not dominate.
    """
    pref = ell.prefixes
    start = min(int(len(pref) * (1 - tail)), len(pref) - 1)
    return max(Fraction(int(mask_counts[l - 1]), l) for l in pref[start:])


@dataclass
class DiscrepancyEntry:
    K: int
    value: Fraction
    lower_side: Fraction
    upper_side: Fraction


def symbolic_discrepancy(spec: BSpec, K_grid: Sequence[int], ell: EllSequence, *,
                         bstar: StarApprox | None = None, K_prime: int | None = None,
                         tail: float = 0.5) -> list[DiscrepancyEntry]:
    """Upper density along (l_i) of {n : (lower_K, eta_K)(n) != (eta*, eta)(n)}."""
    L = ell.last
    bstar = bstar or default_bstar(spec, max(K_grid), K_prime)
    eta = eta_window(truncate(spec, L), 1, L)
    star = eta_star_window(bstar, 1, L)
    out = []
    for K in K_grid:
        lower, _ = underline_eta_K_window(bstar, K, 1, L, K_prime)
        upper = eta_K_window(spec, K, 1, L)
        lo = lower.bits != star.bits
        up = upper.bits != eta.bits
        c = lambda m: np.cumsum(m, dtype=np.int64)
        out.append(DiscrepancyEntry(K, density_along(c(lo | up), ell, tail),
                                    density_along(c(lo), ell, tail),
                                    density_along(c(up), ell, tail)))
    return out
