"""Block complexity p_n and the two counting bounds for it."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import BSpec, BTruncation, Window, block_codes, block_rows, eta_window, truncate
from .density import exact_density_multiples, upper_density_estimate
from .errors import InputError, MemoryBudgetError
from .structure import StarApprox, default_bstar, taut_check
from .toeplitz import eta_star_window

N_GRID = (8, 12, 16, 20, 24, 28)
MEMORY_BUDGET = 1 << 30
CHUNK = 1 << 22
PERIOD_CAP = 5_000_000
MODES = ("exact-set", "sort-merge", "approximate-sketch")


def _bits(w: Window | np.ndarray) -> np.ndarray:
    return w.bits if isinstance(w, Window) else np.asarray(w, dtype=bool)


def _distinct_chunk(bits: np.ndarray, n: int) -> np.ndarray:
    if n <= 64:
        return np.unique(block_codes(bits, n))
    return np.unique(block_rows(bits, n))


@dataclass(frozen=True)
class SketchCount:
    """A flagged estimate; never used in verdicts."""

    estimate: float
    rel_error: float


def block_count(w: Window | np.ndarray, n: int, mode: str = "exact-set", *,
                memory_budget: int = MEMORY_BUDGET, chunk: int = CHUNK,
                threads: int = 1, sketch_k: int = 4096):
    """Number of distinct length-n subwords of the window."""
    bits = _bits(w)
    if not 1 <= n <= len(bits):
        raise InputError(f"need 1 <= n <= {len(bits)}, got n={n}")
    if mode == "exact-set":
        if n > 64:
            raise MemoryBudgetError("exact-set packs blocks into 64 bits; use sort-merge for n > 64")
        if 8 * (len(bits) - n + 1) * 2 > memory_budget:
            raise MemoryBudgetError("exact-set would exceed the memory budget; use sort-merge")
        return int(len(np.unique(block_codes(bits, n))))
    if mode == "sort-merge":
        return int(len(_sort_merge(bits, n, chunk, threads)))
    if mode == "approximate-sketch":
        return _kmv(bits, n, sketch_k)
    raise InputError(f"unknown counting mode {mode!r}")


def _sort_merge(bits: np.ndarray, n: int, chunk: int, threads: int) -> np.ndarray:
    # Chunks overlap by n-1 so every block lies wholly inside one chunk.
    starts = list(range(0, len(bits) - n + 1, chunk))
    pieces = [bits[s : s + chunk + n - 1] for s in starts]
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda p: _distinct_chunk(p, n), pieces))
    else:
        parts = [_distinct_chunk(p, n) for p in pieces]
    while len(parts) > 1:
        merged = [np.union1d(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def _kmv(bits: np.ndarray, n: int, k: int) -> SketchCount:
    # k-minimum-values over a keyed 64-bit hash of each block.
    def digest(row):
        return int.from_bytes(hashlib.blake2b(bytes(row), digest_size=8).digest(), "little")

    rows = block_rows(bits, n)
    hashed = np.unique(np.fromiter((digest(r) for r in rows), dtype=np.uint64, count=len(rows)))
    if len(hashed) <= k:
        return SketchCount(float(len(hashed)), 0.0)
    kth = float(hashed[k - 1]) / 2.0**64
    return SketchCount((k - 1) / kth, 1.0 / math.sqrt(k - 2))


# ------------------------------------------------------------ profiles


@dataclass
class EntropyEntry:
    n: int
    p_n: int
    h_hat: float
    saturated: bool
    p_half: int


@dataclass
class EntropyProfile:
    entries: list[EntropyEntry]
    L: int
    K: int
    mode: str
    source: str = ""

    def h(self, n: int) -> float:
        return next(e.h_hat for e in self.entries if e.n == n)

    def p(self, n: int) -> int:
        return next(e.p_n for e in self.entries if e.n == n)

    def to_csv(self) -> str:
        rows = ["n,p_n,h_hat,mode,saturated"]
        rows += [f"{e.n},{e.p_n},{e.h_hat:.6f},{self.mode},{int(e.saturated)}"
                 for e in self.entries]
        return "\n".join(rows) + "\n"

    def as_dict(self) -> dict:
        return {"source": self.source, "L": self.L, "K": self.K, "mode": self.mode,
                "entries": [{"n": e.n, "p_n": e.p_n, "h_hat": round(e.h_hat, 6),
                             "p_n_half_window": e.p_half, "saturated": e.saturated}
                            for e in self.entries]}


def _count(bits, n, mode, threads):
    return block_count(bits, n, "sort-merge" if mode == "sort-merge" or n > 64 else mode,
                       threads=threads)


def profile_of_bits(bits: np.ndarray, n_grid: Sequence[int], mode: str = "exact-set",
                    threads: int = 1, K: int = 0, source: str = "") -> EntropyProfile:
    if mode == "approximate-sketch":
        raise InputError("profiles use exact counting only")
    L = len(bits)
    entries = []
    for n in n_grid:
        p = _count(bits, n, mode, threads)
        half = _count(bits[: L // 2], n, mode, threads) if L // 2 >= n else 0
        sat = half > 0 and (p - half) <= 0.01 * p
        entries.append(EntropyEntry(n, p, math.log2(p) / n, sat, half))
    return EntropyProfile(entries, L, K, mode, source)


def exact_eta_bits(spec: BSpec, L: int, threads: int = 1) -> np.ndarray:
    return eta_window(truncate(spec, L), 1, L, threads=threads).bits


def entropy_profile(spec: BSpec, K: int, L: int, n_grid: Sequence[int] = N_GRID,
                    mode: str = "exact-set", threads: int = 1) -> EntropyProfile:
    """Profile of log2(p_n)/n on the eta window [1, L]."""
    bits = eta_window(truncate(spec, K), 1, L, threads=threads).bits
    return profile_of_bits(bits, n_grid, mode, threads, K, spec.describe())


# ---------------------------------------------------------- lower bound


@dataclass
class LowerBoundVerdict:
    n: int
    exponent: int
    lhs: int
    rhs: int
    rhs_half: int
    taut: str
    passed: bool

    def as_dict(self) -> dict:
        return {"n": self.n, "exponent": self.exponent, "lhs": self.lhs, "rhs": self.rhs,
                "rhs_half_window": self.rhs_half, "taut": self.taut, "passed": self.passed}


def free_count(elems: Sequence[int], n: int) -> int:
    """|F_B cap [1, n]| by direct enumeration."""
    return sum(1 for k in range(1, n + 1) if all(k % b for b in elems))


def lower_bound_check(spec: BSpec, K: int, n: int, L: int | None = None, *,
                      bits: np.ndarray | None = None, bstar: StarApprox | None = None,
                      taut_K: int = 100, taut: str | None = None) -> LowerBoundVerdict:
    """2^{|F cap [1,n]| - |F_{B*} cap [1,n]|} against p_n measured on [1, L]."""
    bstar = bstar or default_bstar(spec, K)
    BK = truncate(spec, n)
    exponent = free_count(BK.elements, n) - free_count(bstar.result.elements, n)
    if bits is None:
        bits = exact_eta_bits(spec, L or K)
    rhs = _count(bits, n, "exact-set", 1)
    half = _count(bits[: len(bits) // 2], n, "exact-set", 1)
    lhs = 2 ** max(exponent, 0)
    taut = taut or taut_check(spec, min(K, taut_K)).overall
    return LowerBoundVerdict(n, exponent, lhs, rhs, half, taut, lhs <= rhs)


# ---------------------------------------------------------- upper bound


@dataclass
class UpperBoundVerdict:
    n: int
    K: int
    p_eta: int
    p_star: int
    p_K: int
    sup_gap: int
    rhs: int
    exact_factors: dict
    passed: bool

    def as_dict(self) -> dict:
        return {"n": self.n, "K": self.K, "p_eta": self.p_eta, "p_eta_star": self.p_star,
                "p_eta_K": self.p_K, "sup_gap": self.sup_gap, "rhs": self.rhs,
                "exact_factors": self.exact_factors, "passed": self.passed}


def _periodic_or_window(trunc: BTruncation, L: int, n: int, cap: int):
    """Bits of 1_{F_trunc} over one full period plus n-1, or over [1, L]."""
    if not trunc.overflowed and trunc.lcm <= cap:
        return eta_window(trunc, 0, trunc.lcm + n - 1, strict=False).bits, True
    return eta_window(trunc, 1, L, strict=False).bits, False


def upper_bound_check(spec: BSpec, K: int, n: int, L: int, *, bits: np.ndarray | None = None,
                      bstar: StarApprox | None = None, period_cap: int = PERIOD_CAP
                      ) -> UpperBoundVerdict:
    """p_n(eta) <= p_n(eta*) p_n(eta_K) 2^{sup_M gap}, the gap counting
    ones of eta_K minus ones of eta* in a length-n block."""
    bstar = bstar or default_bstar(spec, K)
    star = bstar.result
    BK = truncate(spec, K)
    if bits is None:
        bits = exact_eta_bits(spec, L)
    p_eta = _count(bits, n, "exact-set", 1)
    star_bits, star_exact = _periodic_or_window(star, L, n, period_cap)
    K_bits, K_exact = _periodic_or_window(BK, L, n, period_cap)
    p_star = _count(star_bits, n, "exact-set", 1)
    p_K = _count(K_bits, n, "exact-set", 1)

    joint = None
    if not (star.overflowed or BK.overflowed):
        joint = math.lcm(star.lcm, BK.lcm)
    if joint is not None and joint <= period_cap:
        top = eta_window(BK, 0, joint + n - 1, strict=False).bits
        bot = eta_window(star, 0, joint + n - 1, strict=False).bits
        gap_exact = True
    else:
        top = eta_window(BK, 1, L, strict=False).bits
        bot = eta_window(star, 1, L, strict=False).bits
        gap_exact = False
    diff = np.cumsum(np.concatenate([[0], top.astype(np.int64) - bot.astype(np.int64)]))
    sup_gap = int(np.max(diff[n:] - diff[:-n]))
    rhs = p_star * p_K * 2 ** max(sup_gap, 0)
    exact = {"p_eta_star": star_exact, "p_eta_K": K_exact, "sup_gap": gap_exact}
    return UpperBoundVerdict(n, K, p_eta, p_star, p_K, sup_gap, rhs, exact, p_eta <= rhs)


# ------------------------------------------------------- consolidated


@dataclass
class EntropyGapReport:
    profile: EntropyProfile
    d_upper: Fraction
    d_star: Fraction
    h_pred: float
    h_est: float
    n_est: int
    zero_entropy_flag: bool
    lower: list[LowerBoundVerdict] = field(default_factory=list)
    upper: list[UpperBoundVerdict] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def bounds_hold(self) -> bool:
        return all(v.passed for v in self.lower) and all(v.passed for v in self.upper)

    def as_dict(self) -> dict:
        return {"params": self.params, "profile": self.profile.as_dict(),
                "d_upper_est": str(self.d_upper), "d_upper_est_float": float(self.d_upper),
                "d_star_est": str(self.d_star), "d_star_est_float": float(self.d_star),
                "h_predicted": round(self.h_pred, 6), "h_estimate": round(self.h_est, 6),
                "h_estimate_n": self.n_est, "zero_entropy_flag": self.zero_entropy_flag,
                "lower_bounds": [v.as_dict() for v in self.lower],
                "upper_bounds": [v.as_dict() for v in self.upper],
                "bounds_hold": self.bounds_hold}


def entropy_gap_report(spec: BSpec, L: int, n_grid: Sequence[int] = N_GRID, *,
                     K_bound: int = 10, burn_in: int = 1000, zero_tol: float = 0.01,
                     h_at: int | None = None, bstar: StarApprox | None = None,
                     mode: str = "exact-set", threads: int = 1,
                     bounds: bool = True) -> EntropyGapReport:
    """Entropy profile on [1, L] next to the density prediction d_upper - d*.

    The zero-entropy flag is raised when the two density estimates agree
    within ``zero_tol``; unique ergodicity is then expected.
    """
    bits = exact_eta_bits(spec, L, threads)
    profile = profile_of_bits(bits, n_grid, mode, threads, L, spec.describe())
    bstar = bstar or default_bstar(spec, L)
    full = truncate(spec, L)
    if full.complete:
        # a finite B: the upper density is the exact density of F_B
        d_upper = 1 - exact_density_multiples(full).midpoint
    else:
        d_upper = upper_density_estimate(spec, L, L, min(burn_in, L), threads)
    d_star = 1 - exact_density_multiples(bstar.result).midpoint
    h_at = h_at if h_at is not None else max(n_grid)
    report = EntropyGapReport(profile, d_upper, d_star, float(d_upper - d_star),
                            profile.h(h_at), h_at, float(d_upper - d_star) <= zero_tol,
                            params={"L": L, "n_grid": list(n_grid), "K_bound": K_bound,
                                    "burn_in": burn_in, "zero_tol": zero_tol,
                                    "bstar": list(bstar.result.elements[:50]),
                                    "source": spec.describe()})
    if bounds:
        taut = taut_check(spec, min(L, 100)).overall
        for n in n_grid:
            report.lower.append(lower_bound_check(spec, L, n, bits=bits, bstar=bstar, taut=taut))
            report.upper.append(upper_bound_check(spec, K_bound, n, L, bits=bits, bstar=bstar))
    return report
