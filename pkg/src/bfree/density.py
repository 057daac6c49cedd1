"""Densities of sets of multiples.

Exact values of d(M_{B_K}) come from a factored inclusion-exclusion
recursion; an explicit subset enumeration and a one-period count serve
as independent routes for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .core import (BSpec, BTruncation, prime_factors, primitive_subset,
                   sieve_multiples, spf_table, truncate, window_is_exact)
from .errors import CapExceededError, ExactnessError, InputError, LcmOverflowError

SUBSET_CAP = 24
NODE_BUDGET = 200_000
PERIOD_CAP = 50_000_000
METHODS = ("exact-IE", "exact-period", "enclosure-pruned", "empirical")


@dataclass(frozen=True)
class DensityEnclosure:
    lower: Fraction
    upper: Fraction
    method: str
    value: Fraction | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown density method {self.method!r}")
        if self.value is not None and not (self.lower == self.value == self.upper):
            raise ValueError("an exact enclosure must have lower = value = upper")
        if not 0 <= self.lower <= self.upper <= 1:
            raise ValueError(f"bad enclosure [{self.lower}, {self.upper}]")

    @classmethod
    def exact(cls, value: Fraction, method: str = "exact-IE") -> "DensityEnclosure":
        value = Fraction(value)
        return cls(value, value, method, value)

    @property
    def is_exact(self) -> bool:
        return self.value is not None

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def complement(self) -> "DensityEnclosure":
        """The enclosure of 1 - d, e.g. d(F) from d(M)."""
        v = None if self.value is None else 1 - self.value
        return DensityEnclosure(1 - self.upper, 1 - self.lower, self.method, v)

    def as_dict(self) -> dict:
        return {"lower": str(self.lower), "upper": str(self.upper),
                "value": None if self.value is None else str(self.value),
                "method": self.method}


# ------------------------------------------------------ exact computation


class _Budget(Exception):
    pass


def components(elements: Sequence[int]) -> list[list[int]]:
    """Split a set into classes linked by shared prime factors."""
    if not elements:
        return []
    spf = spf_table(max(elements))
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    first_prime = []
    for b in elements:
        ps = prime_factors(b, spf)
        for p in ps:
            parent.setdefault(p, p)
        for p in ps[1:]:
            ra, rb = find(ps[0]), find(p)
            if ra != rb:
                parent[rb] = ra
        first_prime.append(ps[0] if ps else None)
    groups: dict[int, list[int]] = {}
    for b, p in zip(elements, first_prime):
        groups.setdefault(find(p) if p is not None else -1, []).append(b)
    return list(groups.values())


class _FreeDensity:
    """d(F_B) for primitive B by peeling off one element at a time.

    Uses d(F_{B + b}) = d(F_B) - d(F_{Q})/b with
    Q = prim{b'/gcd(b', b) : b' in B}, after splitting B into
    factor-disjoint components whose densities multiply.
    """

    def __init__(self, budget: int):
        self.budget = budget
        self.nodes = 0
        self.memo: dict[tuple[int, ...], Fraction] = {}

    def free(self, elems: tuple[int, ...]) -> Fraction:
        if not elems:
            return Fraction(1)
        if elems[0] == 1:
            return Fraction(0)
        hit = self.memo.get(elems)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Budget
        singles, result = [], Fraction(1)
        for comp in components(list(elems)):
            if len(comp) == 1:
                singles.append(comp[0])
            else:
                result *= self._connected(tuple(comp))
        if singles:
            result *= Fraction(math.prod(b - 1 for b in singles), math.prod(singles))
        self.memo[elems] = result
        return result

    def _connected(self, elems: tuple[int, ...]) -> Fraction:
        # Elements sharing the most common prime p form a core pA with
        # d(F_{pA}) = 1 - (1 - d(F_A))/p; the rest are peeled one by one.
        spf = spf_table(elems[-1])
        tally: dict[int, int] = {}
        for b in elems:
            for q in prime_factors(b, spf):
                tally[q] = tally.get(q, 0) + 1
        p = max(sorted(tally), key=tally.__getitem__)
        core = [b for b in elems if b % p == 0]
        total = 1 - (1 - self.free(tuple(b // p for b in core))) / p
        done = core
        for b in (b for b in elems if b % p):
            self.nodes += len(done) // 64
            quotients = primitive_subset(c // math.gcd(c, b) for c in done)
            total -= self.free(tuple(quotients)) / b
            done.append(b)
        return total


def free_density(elements: Iterable[int], budget: int = NODE_BUDGET) -> Fraction:
    """Exact d(F_B) for a finite B."""
    solver = _FreeDensity(budget)
    try:
        return solver.free(tuple(primitive_subset(elements)))
    except _Budget:
        raise CapExceededError(f"inclusion-exclusion exceeded {budget} nodes") from None


def subset_density(elements: Sequence[int], cap: int = SUBSET_CAP) -> Fraction:
    """d(M_B) by summing over all nonempty subsets; the textbook route."""
    elems = list(elements)
    if len(elems) > cap:
        raise CapExceededError(f"{len(elems)} elements exceed the subset cap {cap}")
    total = Fraction(0)
    for r in range(1, len(elems) + 1):
        sign = 1 if r % 2 else -1
        for sub in combinations(elems, r):
            total += Fraction(sign, math.lcm(*sub))
    return total


def period_density(trunc: BTruncation, cap: int = PERIOD_CAP) -> Fraction:
    """d(M_{B_K}) by counting multiples over one full period [1, lcm]."""
    if trunc.overflowed or trunc.lcm > cap:
        raise LcmOverflowError(f"period of the truncation exceeds the cap {cap}")
    if not trunc.elements:
        return Fraction(0)
    w = sieve_multiples(trunc, 1, trunc.lcm)
    return Fraction(int(w.bits.sum()), trunc.lcm)


def exact_density_multiples(trunc: BTruncation, *, mode: str = "auto",
                            subset_cap: int = SUBSET_CAP, budget: int = NODE_BUDGET,
                            enclosure: bool = True) -> DensityEnclosure:
    """d(M_{B_K}) as an exact rational, or a rigorous enclosure.

    ``mode`` is one of auto, recursive, subset, period.  In auto mode a
    budget overrun falls back to an enclosure when ``enclosure`` is set.
    """
    elems = trunc.elements
    if mode == "subset":
        return DensityEnclosure.exact(subset_density(elems, subset_cap), "exact-IE")
    if mode == "period":
        return DensityEnclosure.exact(period_density(trunc), "exact-period")
    if mode not in ("auto", "recursive"):
        raise InputError(f"unknown density mode {mode!r}")
    try:
        return DensityEnclosure.exact(1 - free_density(elems, budget), "exact-IE")
    except CapExceededError:
        if mode == "recursive" or not enclosure:
            raise
    return _enclosure(elems, budget)


def _enclosure(elems: Sequence[int], budget: int) -> DensityEnclosure:
    # Exact on a prefix, then bound the rest by a union bound.
    prim = primitive_subset(elems)
    m = len(prim)
    while m > 0:
        m //= 2
        try:
            lower = 1 - free_density(prim[:m], budget)
            break
        except CapExceededError:
            continue
    else:
        lower = Fraction(0)
    tail = sum((Fraction(1, b) for b in prim[m:]), Fraction(0))
    return DensityEnclosure(lower, min(Fraction(1), lower + tail), "enclosure-pruned")


# -------------------------------------------------- Davenport-Erdos profile


@dataclass
class DensitySeries:
    entries: list[tuple[int, DensityEnclosure]]
    limit: Fraction
    error: Fraction
    rigorous: bool = False
    source: str = ""

    @property
    def values(self) -> list[Fraction]:
        return [e.value if e.is_exact else e.midpoint for _, e in self.entries]

    def nondecreasing(self) -> bool | None:
        """True/False on exact entries; None when an entry is only enclosed."""
        if not all(e.is_exact for _, e in self.entries):
            return None
        vals = self.values
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def to_csv(self) -> str:
        rows = ["K,lower,upper,value,method"]
        for K, e in self.entries:
            v = "" if e.value is None else str(e.value)
            rows.append(f"{K},{e.lower},{e.upper},{v},{e.method}")
        return "\n".join(rows) + "\n"

    def as_dict(self) -> dict:
        return {"source": self.source,
                "entries": [{"K": K, **e.as_dict(), "float": float(e.midpoint)}
                            for K, e in self.entries],
                "limit": str(self.limit), "limit_float": float(self.limit),
                "error_bar": str(self.error), "error_bar_rigorous": self.rigorous,
                "nondecreasing_certified": self.nondecreasing()}


def _check_grid(K_grid: Sequence[int]) -> list[int]:
    grid = [int(k) for k in K_grid]
    if not grid:
        raise InputError("empty K grid")
    if any(a >= b for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise InputError(f"K grid must be strictly increasing positive, got {grid}")
    return grid


def davenport_erdos_profile(spec: BSpec, K_grid: Sequence[int], **opts) -> DensitySeries:
    grid = _check_grid(K_grid)
    entries = [(K, exact_density_multiples(truncate(spec, K), **opts)) for K in grid]
    vals = [e.value if e.is_exact else e.midpoint for _, e in entries]
    err = abs(vals[-1] - vals[-2]) if len(vals) > 1 else Fraction(0)
    return DensitySeries(entries, vals[-1], err, False, spec.describe())


# ---------------------------------------------------- prefix statistics


def _exact_truncation(spec: BSpec, K: int, L: int) -> BTruncation:
    trunc = truncate(spec, K)
    if not window_is_exact(trunc, 1, L):
        raise ExactnessError(f"K={K} does not reach the prefix [1, {L}]")
    return trunc


def multiples_prefix_counts(spec: BSpec, K: int, L: int, threads: int = 1) -> np.ndarray:
    """counts[l-1] = |M_{B_K} cap [1, l]| for l = 1..L."""
    trunc = _exact_truncation(spec, K, L)
    return np.cumsum(sieve_multiples(trunc, 1, L, threads=threads).bits, dtype=np.int64)


@dataclass
class EllSequence:
    """Prefix lengths at which |M cap [1, l]|/l hits a new running minimum."""

    prefixes: list[int]
    counts: list[int]
    burn_in: int
    K: int
    L_max: int
    source: str = ""

    @property
    def ratios(self) -> list[Fraction]:
        return [Fraction(c, l) for c, l in zip(self.counts, self.prefixes)]

    @property
    def last(self) -> int:
        return self.prefixes[-1]

    def __len__(self):
        return len(self.prefixes)

    def to_csv(self) -> str:
        rows = ["ell,ratio_num,ratio_den"]
        for r, l in zip(self.ratios, self.prefixes):
            rows.append(f"{l},{r.numerator},{r.denominator}")
        return "\n".join(rows) + "\n"

    def as_dict(self) -> dict:
        return {"source": self.source, "K": self.K, "L_max": self.L_max,
                "burn_in": self.burn_in, "length": len(self),
                "first": self.prefixes[0], "last": self.last,
                "final_ratio": str(self.ratios[-1]),
                "final_ratio_float": float(self.ratios[-1])}


def running_minima(counts: np.ndarray, burn_in: int) -> list[int]:
    """Indices l (1-based) where counts[l-1]/l is a strict new minimum."""
    L = len(counts)
    if burn_in > L:
        raise InputError(f"burn-in {burn_in} exceeds the prefix length {L}")
    ell = np.arange(1, L + 1, dtype=np.int64)
    # Correctly rounded quotients keep equal rationals equal and distinct
    # ones ordered while l stays far below 2^26.
    ratio = counts[burn_in - 1 :] / ell[burn_in - 1 :]
    prev = np.minimum.accumulate(ratio)
    rec = np.flatnonzero(ratio[1:] < prev[:-1]) + 1
    return [burn_in] + (rec + burn_in).tolist()


def lower_density_sequence(spec: BSpec, K: int, L_max: int, burn_in: int = 1000,
                           threads: int = 1) -> EllSequence:
    counts = multiples_prefix_counts(spec, K, L_max, threads)
    pref = running_minima(counts, max(1, burn_in))
    return EllSequence(pref, [int(counts[l - 1]) for l in pref], burn_in, K, L_max,
                       spec.describe())


def logarithmic_density_estimate(spec: BSpec, K: int, L: int) -> float:
    """(sum of 1/l over multiples l <= L) / ln L."""
    if L < 2:
        raise InputError("L must be at least 2")
    trunc = _exact_truncation(spec, K, L)
    pos = np.flatnonzero(sieve_multiples(trunc, 1, L).bits) + 1
    return math.fsum((1.0 / pos).tolist()) / math.log(L)


def upper_density_estimate(spec: BSpec, K: int, L: int, burn_in: int = 1000,
                           threads: int = 1) -> Fraction:
    """Largest |F_{B_K} cap [1, n]|/n over n in [burn_in, L]."""
    counts = multiples_prefix_counts(spec, K, L, threads)
    if burn_in > L:
        raise InputError(f"burn-in {burn_in} exceeds L={L}")
    n = np.arange(1, L + 1, dtype=np.int64)
    free = n - counts
    ratio = free[burn_in - 1 :] / n[burn_in - 1 :]
    i = int(np.argmax(ratio)) + burn_in - 1
    return Fraction(int(free[i]), int(n[i]))
