"""Tautness, Behrend gauges, and witness-bounded approximations of B* and B'.

Every verdict here is about a truncation B_K.  Nothing is claimed about
the infinite set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from .core import BSpec, BTruncation, divisors, eta_window, primitive_subset, truncate
from .density import (DensityEnclosure, DensitySeries, davenport_erdos_profile,
                      exact_density_multiples)

WITNESSES = 5
EPSILON = Fraction(1, 20)


def quotient_sets(trunc: BTruncation, bound: int) -> dict[int, list[int]]:
    """d -> sorted {b/d : b in B_K, d | b, b != d} for d <= bound."""
    out: dict[int, list[int]] = {}
    for b in trunc.elements:
        for d in divisors(b):
            if d > bound or d == b:
                continue
            out.setdefault(d, []).append(b // d)
    return out


def greedy_coprime(values: Sequence[int], want: int) -> list[int]:
    """Smallest-first pairwise coprime subset, stopping at ``want`` items."""
    picked: list[int] = []
    for q in values:
        if all(gcd(q, w) == 1 for w in picked):
            picked.append(q)
            if len(picked) >= want:
                break
    return picked


# ----------------------------------------------------------------- tautness


@dataclass
class TautReport:
    K: int
    entries: list[tuple[int, DensityEnclosure, DensityEnclosure, str]]
    overall: str
    truncation_level: bool
    source: str = ""

    def as_dict(self) -> dict:
        return {"source": self.source, "K": self.K, "overall": self.overall,
                "truncation_level": self.truncation_level,
                "entries": [{"b": b, "without_b": w.as_dict(), "with_b": f.as_dict(),
                             "verdict": v} for b, w, f, v in self.entries]}


def _verdict(without: DensityEnclosure, full: DensityEnclosure) -> str:
    if without.upper < full.lower:
        return "contributes"
    if without.is_exact and full.is_exact and without.value == full.value:
        return "redundant"
    return "undecided"


def taut_check(spec: BSpec, K: int) -> TautReport:
    trunc = truncate(spec, K)
    full = exact_density_multiples(trunc)
    entries = []
    for b in trunc.elements:
        rest = BTruncation.from_elements([c for c in trunc.elements if c != b], K)
        without = exact_density_multiples(rest)
        entries.append((b, without, full, _verdict(without, full)))
    verdicts = {v for *_, v in entries}
    if "redundant" in verdicts:
        overall = "not-taut"
    elif verdicts <= {"contributes"}:
        overall = "taut"
    else:
        overall = "undecided-at-K"
    return TautReport(K, entries, overall, not trunc.complete, spec.describe())


# ------------------------------------------------------------------ Behrend


@dataclass
class BehrendGauge:
    series: DensitySeries
    epsilon: Fraction
    label: str

    @property
    def final(self) -> Fraction:
        return self.series.limit

    def as_dict(self) -> dict:
        return {"epsilon": str(self.epsilon), "label": self.label,
                "rigorous": False, "series": self.series.as_dict()}


def behrend_gauge(spec: BSpec, K_grid: Sequence[int], epsilon=EPSILON) -> BehrendGauge:
    eps = Fraction(epsilon)
    series = davenport_erdos_profile(spec, K_grid)
    _, last = series.entries[-1]
    label = "behrend-likely" if last.lower > 1 - eps else "not-behrend-likely"
    return BehrendGauge(series, eps, label)


# ------------------------------------------------------------ B* and B'


@dataclass
class StarApprox:
    base: BTruncation
    found_D: list[tuple[int, tuple[int, ...]]]
    result: BTruncation
    m: int
    d_max: int

    def as_dict(self) -> dict:
        return {"K": self.base.K, "m": self.m, "d_max": self.d_max,
                "source": self.base.source, "base_size": len(self.base),
                "found_D": [{"d": d, "witnesses": list(w)} for d, w in self.found_D],
                "result": list(self.result.elements[:200]),
                "result_size": len(self.result),
                "result_exact": self.result.complete}


def bstar_approx(spec: BSpec, K: int, d_max: int | None = None,
                 m: int = WITNESSES) -> StarApprox:
    """Approximate B* from B_K by counting coprime witnesses for each scale d.

    A finite B that is fully contained in the truncation has no infinite
    coprime families, so the search is skipped and B* = B^prim exactly.
    """
    trunc = truncate(spec, K)
    d_max = K if d_max is None else d_max
    found: list[tuple[int, tuple[int, ...]]] = []
    if not trunc.complete:
        for d, qs in sorted(quotient_sets(trunc, d_max).items()):
            if len(qs) < m:
                continue
            wit = greedy_coprime(qs, m)
            if len(wit) >= m:
                found.append((d, tuple(wit)))
    elems = primitive_subset(list(trunc.elements) + [d for d, _ in found])
    result = BTruncation.from_elements(elems, K, complete=trunc.complete,
                                       source=f"bstar({spec.describe()})")
    return StarApprox(trunc, found, result, m, d_max)


def default_bstar(spec: BSpec, K: int, K_prime: int | None = None) -> StarApprox:
    """B* approximation at the tail witness bound K' (default 10 K, clipped to [10^3, 10^6])."""
    level = K_prime if K_prime is not None else max(1000, min(10 * K, 10**6))
    return bstar_approx(spec, level)


@dataclass
class PrimeApprox:
    base: BTruncation
    found_C: list[tuple[int, Fraction]]
    result: BTruncation
    epsilon: Fraction
    c_max: int
    gauges: dict[int, Fraction] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"K": self.base.K, "epsilon": str(self.epsilon), "c_max": self.c_max,
                "source": self.base.source,
                "found_C": [{"c": c, "gauge": str(g), "gauge_float": float(g)}
                            for c, g in self.found_C],
                "evaluated": {str(c): float(g) for c, g in sorted(self.gauges.items())},
                "result": list(self.result.elements[:200]),
                "result_size": len(self.result)}


def bprime_approx(spec: BSpec, K: int, c_max: int | None = None,
                  epsilon=EPSILON) -> PrimeApprox:
    """Approximate B' by gauging the density of each quotient set {b/c}.

    Candidates whose union bound sum 1/q cannot exceed 1 - epsilon are
    skipped without computing a density.
    """
    eps = Fraction(epsilon)
    trunc = truncate(spec, K)
    c_max = K if c_max is None else c_max
    found, gauges = [], {}
    for c, qs in sorted(quotient_sets(trunc, c_max).items()):
        if float(np.sum(1.0 / np.array(qs, dtype=float))) <= float(1 - eps) * (1 - 1e-9):
            continue
        gauge = exact_density_multiples(BTruncation.from_elements(qs, K // c)).lower
        gauges[c] = gauge
        if gauge > 1 - eps:
            found.append((c, gauge))
    elems = primitive_subset(list(trunc.elements) + [c for c, _ in found])
    result = BTruncation.from_elements(elems, K, complete=trunc.complete,
                                       source=f"bprime({spec.describe()})")
    return PrimeApprox(trunc, found, result, eps, c_max, gauges)


# ------------------------------------------------ divisibility equivalences


@dataclass
class DivisibilityVerdict:
    K: int
    L: int
    a_every_b_has_c: bool
    a_every_c_has_bstar: bool
    b_star_le_C: bool
    b_C_le_eta: bool
    missing_c: list[int]
    missing_bstar: list[int]
    violations_star_le_C: list[int]
    violations_C_le_eta: list[int]
    witnesses: list[dict]
    bstar: list[int]
    taut_C: str
    consistent: bool

    @property
    def clause_a(self) -> bool:
        return self.a_every_b_has_c and self.a_every_c_has_bstar

    @property
    def clause_b(self) -> bool:
        return self.b_star_le_C and self.b_C_le_eta

    def as_dict(self) -> dict:
        return {"K": self.K, "L": self.L,
                "clause_a": self.clause_a, "clause_b": self.clause_b,
                "a_every_b_has_c": self.a_every_b_has_c,
                "a_every_c_has_bstar": self.a_every_c_has_bstar,
                "b_star_le_C": self.b_star_le_C, "b_C_le_eta": self.b_C_le_eta,
                "missing_c": self.missing_c[:20], "missing_bstar": self.missing_bstar[:20],
                "violations_star_le_C": self.violations_star_le_C[:20],
                "violations_C_le_eta": self.violations_C_le_eta[:20],
                "witnesses": self.witnesses[:20], "bstar": self.bstar[:50],
                "taut_C": self.taut_C, "consistent": self.consistent}


def _free_at(elems: Sequence[int], n: int) -> int:
    return int(all(n % b for b in elems))


def divisibility_check(B: BSpec, C: BSpec, K: int, L: int, *, m: int = WITNESSES,
                        star: StarApprox | None = None, taut_limit: int = 24) -> DivisibilityVerdict:
    """Compare divisibility between B, C, B* with the window order eta* <= eta_C <= eta.

    At truncation level these are necessary-condition checks only.  A
    divisibility failure is paired with a concrete position where one of
    the window inequalities breaks.
    """
    if K < L:
        raise ValueError(f"need K >= L, got K={K}, L={L}")
    BK, CK = truncate(B, K), truncate(C, K)
    star = star or bstar_approx(B, K, m=m)
    bs = star.result.elements
    missing_c = [b for b in BK.elements if not any(b % c == 0 for c in CK.elements)]
    missing_star = [c for c in CK.elements if not any(c % s == 0 for s in bs)]

    eta = eta_window(BK, 1, L)
    eta_C = eta_window(CK, 1, L, strict=False)
    eta_s = eta_window(star.result, 1, L, strict=False)
    v1 = (np.flatnonzero(eta_s.bits & ~eta_C.bits) + 1).tolist()
    v2 = (np.flatnonzero(eta_C.bits & ~eta.bits) + 1).tolist()

    witnesses = []
    for b in missing_c[:10]:
        witnesses.append({"n": b, "reason": "b has no divisor in C",
                          "eta_C": _free_at(CK.elements, b), "eta": _free_at(BK.elements, b),
                          "violates": "eta_C <= eta"})
    for c in missing_star[:10]:
        witnesses.append({"n": c, "reason": "c has no divisor in B*",
                          "eta_star": _free_at(bs, c), "eta_C": _free_at(CK.elements, c),
                          "violates": "eta* <= eta_C"})

    taut = taut_check(C, K).overall if len(CK) <= taut_limit else "skipped"
    clause_a = not missing_c and not missing_star
    verdict = DivisibilityVerdict(K, L, not missing_c, not missing_star, not v1, not v2,
                           missing_c, missing_star, v1, v2, witnesses, list(bs), taut,
                           consistent=not (clause_a and (v1 or v2)))
    return verdict
