"""Block-frequency tables: exact periodic, empirical along (l_i), and sampled.

Words are written left to right starting at the block's first position.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (BSpec, BTruncation, Window, block_codes, block_rows, code_to_word,
                   eta_window, sieve_multiples, truncate, window_is_exact)
from .density import EllSequence
from .errors import ExactnessError, GeometryError, InputError, LcmOverflowError, UncertifiedError
from .structure import PrimeApprox, StarApprox, bprime_approx, default_bstar
from .toeplitz import UNDETERMINED, PER_ONE, density_along, per_positions

PERIOD_CAP = 10_000_000
RNG_ALGORITHM = "numpy Philox4x64-10, SeedSequence.spawn per chunk (offsets, bits)"
CHUNK = 8192
UNCERTIFIED_TOL = 1e-3


def _count_words(bits: np.ndarray, n: int, starts: int) -> Counter:
    if n <= 64:
        codes, counts = np.unique(block_codes(bits, n, starts), return_counts=True)
        return Counter({code_to_word(c, n): int(k) for c, k in zip(codes.tolist(), counts)})
    rows, counts = np.unique(block_rows(bits, n, starts), return_counts=True)
    out = Counter()
    for r, k in zip(rows, counts):
        word = np.unpackbits(np.frombuffer(r.tobytes(), dtype=np.uint8), count=n,
                             bitorder="little")
        out["".join(map(str, word.tolist()))] = int(k)
    return out


@dataclass
class FreqTable:
    n: int
    counts: Counter
    total: int
    provenance: dict
    exact: bool = False

    def freq(self, word: str) -> Fraction:
        return Fraction(self.counts.get(word, 0), self.total)

    def items(self):
        return sorted((w, Fraction(c, self.total)) for w, c in self.counts.items() if c)

    def one_frequency(self, coord: int = 0) -> Fraction:
        return Fraction(sum(c for w, c in self.counts.items() if w[coord] == "1"), self.total)

    def _marginal(self, cut) -> dict[str, Fraction]:
        acc: Counter = Counter()
        for w, c in self.counts.items():
            acc[cut(w)] += c
        return {w: Fraction(c, self.total) for w, c in sorted(acc.items()) if c}

    def drop_last(self) -> dict[str, Fraction]:
        return self._marginal(lambda w: w[:-1])

    def drop_first(self) -> dict[str, Fraction]:
        return self._marginal(lambda w: w[1:])

    def as_dict(self) -> dict:
        entries = []
        for w, f in self.items():
            entries.append({"word": w, "num": f.numerator, "den": f.denominator})
        one = self.one_frequency() if self.total else Fraction(0)
        return {"n": self.n, "provenance": self.provenance, "entries": entries,
                "one_frequency": str(one), "one_frequency_float": float(one)}


@dataclass
class PairFreqTable:
    """Frequencies of joint words; keys are ``top|bottom``."""

    n: int
    counts: Counter
    total: int
    provenance: dict
    uncertified: int = 0

    def freq(self, top: str, bottom: str) -> Fraction:
        return Fraction(self.counts.get(f"{top}|{bottom}", 0), self.total)

    def marginal(self, which: int) -> FreqTable:
        acc: Counter = Counter()
        for key, c in self.counts.items():
            acc[key.split("|")[which]] += c
        return FreqTable(self.n, acc, self.total, dict(self.provenance, marginal=which))

    def as_dict(self) -> dict:
        entries = []
        for key, c in sorted(self.counts.items()):
            f = Fraction(c, self.total)
            entries.append({"word": key, "num": f.numerator, "den": f.denominator})
        return {"n": self.n, "provenance": self.provenance,
                "uncertified_positions": self.uncertified, "entries": entries}


def mirsky_exact(trunc: BTruncation, n: int, period_cap: int = PERIOD_CAP) -> FreqTable:
    """Exact block frequencies of the lcm-periodic sequence 1_{F_{B_K}}."""
    if trunc.overflowed or trunc.lcm > period_cap:
        raise LcmOverflowError("period too large for exact block frequencies")
    P = trunc.lcm
    bits = ~sieve_multiples(trunc, 0, P + n - 1).bits
    counts = _count_words(bits, n, P)
    return FreqTable(n, counts, P, {"kind": "exact-period", "period": P}, exact=True)


def _exact_eta(spec: BSpec, K: int, L: int) -> np.ndarray:
    trunc = truncate(spec, K)
    if not window_is_exact(trunc, 1, L):
        raise ExactnessError(f"K={K} does not reach [1, {L}]")
    return eta_window(trunc, 1, L).bits


def quasi_generic_freq(spec: BSpec, K: int, ell: EllSequence, n: int) -> FreqTable:
    """Frequencies of the blocks of eta starting in [1, l] for the last l_i."""
    L = ell.last
    bits = _exact_eta(spec, K, L + n - 1)
    counts = _count_words(bits, n, L)
    return FreqTable(n, counts, L, {"kind": "empirical", "ell": L, "K": K})


def certifiable_star_lcm(star: BTruncation, cap: int = PERIOD_CAP) -> tuple[int, int]:
    """Largest K with lcm(B*_K) <= cap, and that lcm."""
    best_K, best = 0, 1
    acc = 1
    for b in star.elements:
        acc = acc * b // math.gcd(acc, b)
        if acc > cap:
            break
        best_K, best = b, acc
    return best_K, best


def eta_star_bits(star: BTruncation, a: int, L: int, K_prime: int | None = None,
                  cap: int = PERIOD_CAP) -> tuple[np.ndarray, np.ndarray]:
    """eta* on [a, a+L) from Per-classification, plus the uncertified mask."""
    _, s = certifiable_star_lcm(star, cap)
    cls = per_positions(star, s, a, L, K_prime)
    return cls.codes == PER_ONE, cls.codes == UNDETERMINED


def _pair_counts(top: np.ndarray, bottom: np.ndarray, n: int, starts: int) -> Counter:
    if n <= 32:
        code = (block_codes(top, n, starts) << np.uint64(n)) | block_codes(bottom, n, starts)
        codes, counts = np.unique(code, return_counts=True)
        mask = (1 << n) - 1
        return Counter({f"{code_to_word(c >> n, n)}|{code_to_word(c & mask, n)}": int(k)
                        for c, k in zip(codes.tolist(), counts)})
    out: Counter = Counter()
    for i in range(starts):
        t = "".join("1" if v else "0" for v in top[i : i + n])
        b = "".join("1" if v else "0" for v in bottom[i : i + n])
        out[f"{t}|{b}"] += 1
    return out


def pair_joining_freq(spec: BSpec, K: int, ell: EllSequence, n: int, *,
                      bstar: StarApprox | None = None, K_prime: int | None = None,
                      tolerance: float = UNCERTIFIED_TOL) -> PairFreqTable:
    """Joint block frequencies of (eta*, eta) along [1, l] for the last l_i."""
    L = ell.last
    span = L + n - 1
    eta = _exact_eta(spec, K, span)
    bstar = bstar or default_bstar(spec, K, K_prime)
    star, unc = eta_star_bits(bstar.result, 1, span, K_prime)
    bad = int(unc.sum())
    if bad > tolerance * span:
        raise UncertifiedError(f"{bad} uncertified eta* positions in [1, {span}]")
    counts = _pair_counts(star, eta, n, L)
    return PairFreqTable(n, counts, L, {"kind": "empirical", "ell": L, "K": K,
                                        "bstar": list(bstar.result.elements[:50])}, bad)


# ------------------------------------------------------------- sampler


def _chunk_streams(seed: int, samples: int, chunk: int):
    n_chunks = -(-samples // chunk)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_chunks)):
        offsets_ss, bits_ss = child.spawn(2)
        size = min(chunk, samples - i * chunk)
        yield size, np.random.Generator(np.random.Philox(offsets_ss)), \
            np.random.Generator(np.random.Philox(bits_ss))


def sampled_offsets(seed: int, samples: int, L: int, n: int, chunk: int = CHUNK) -> np.ndarray:
    """The offsets u in [1, L-n] that the sampler draws for this seed."""
    return np.concatenate([g.integers(1, L - n + 1, size=size)
                           for size, g, _ in _chunk_streams(seed, samples, chunk)])


def max_entropy_sampler(spec: BSpec, K: int, L: int, n: int, samples: int, seed: int, *,
                        bstar: StarApprox | None = None, K_prime: int | None = None,
                        y_mode: str = "random", chunk: int = CHUNK,
                        threads: int = 1) -> FreqTable:
    """Sample blocks N(eta*[u,u+n), eta[u,u+n), y) with fair bits y."""
    if not 1 <= n <= 63:
        raise InputError("sampler supports 1 <= n <= 63")
    if L <= n:
        raise InputError("L must exceed n")
    if y_mode not in ("random", "zeros", "ones"):
        raise InputError(f"unknown y mode {y_mode!r}")
    eta_w = eta_window(truncate(spec, K), 1, L, strict=False)
    bstar = bstar or default_bstar(spec, K, K_prime)
    star, unc = eta_star_bits(bstar.result, 1, L)
    if np.any(star & ~eta_w.bits):
        raise AssertionError("eta* approximation exceeds eta")
    star_codes = block_codes(star, n)
    eta_codes = block_codes(eta_w.bits, n)
    full = np.uint64((1 << n) - 1)

    def run(stream):
        size, g_off, g_bits = stream
        u = g_off.integers(1, L - n + 1, size=size)
        if y_mode == "random":
            y = g_bits.integers(0, 1 << n, size=size, dtype=np.uint64)
        elif y_mode == "ones":
            y = np.full(size, full, dtype=np.uint64)
        else:
            y = np.zeros(size, dtype=np.uint64)
        blocks = star_codes[u - 1] | (eta_codes[u - 1] & y)
        codes, counts = np.unique(blocks, return_counts=True)
        return dict(zip(codes.tolist(), counts.tolist()))

    streams = list(_chunk_streams(seed, samples, chunk))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, streams))
    else:
        parts = [run(s) for s in streams]
    total: Counter = Counter()
    for part in parts:
        for c, k in part.items():
            total[code_to_word(c, n)] += k
    prov = {"kind": "sampled", "seed": seed, "samples": samples, "rng": RNG_ALGORITHM,
            "chunk": chunk, "y_mode": y_mode, "L": L, "K": K, "eta_tag": eta_w.tag,
            "uncertified_star_positions": int(unc.sum()),
            "bstar": list(bstar.result.elements[:50])}
    return FreqTable(n, total, samples, prov)


def offset_table(bits: np.ndarray, offsets: np.ndarray, n: int, provenance: dict) -> FreqTable:
    """Blocks of a window [1, L] read at the given 1-based offsets."""
    counts: Counter = Counter()
    for u in offsets.tolist():
        counts["".join("1" if v else "0" for v in bits[u - 1 : u - 1 + n])] += 1
    return FreqTable(n, counts, len(offsets), provenance)


# ------------------------------------------------------ discrepancies


def eta_vs_etaprime_discrepancy(spec: BSpec, K: int, ell: EllSequence, *,
                                bprime: PrimeApprox | None = None, c_max: int | None = None,
                                epsilon=Fraction(1, 20), tail: float = 0.5) -> Fraction:
    """Upper density along (l_i) of {n : eta(n) != eta'(n)}."""
    L = ell.last
    eta = _exact_eta(spec, max(K, L), L)
    bprime = bprime or bprime_approx(spec, K, c_max, epsilon)
    etap = eta_window(bprime.result, 1, L, strict=False).bits
    return density_along(np.cumsum(eta != etap, dtype=np.int64), ell, tail)


def _prefix_mismatch(x: Window, y: Window) -> np.ndarray:
    if not x.same_geometry(y):
        raise GeometryError("premetric needs windows of equal geometry")
    return np.cumsum(x.bits != y.bits, dtype=np.int64)


def dlow_premetric(x: Window, y: Window, burn_in: int = 1) -> Fraction:
    """min over n in [burn_in, L] of the mismatch fraction on the first n positions."""
    c = _prefix_mismatch(x, y)
    if not 1 <= burn_in <= len(c):
        raise InputError("burn-in outside the window")
    n = np.arange(1, len(c) + 1)
    ratio = c[burn_in - 1 :] / n[burn_in - 1 :]
    i = int(np.argmin(ratio)) + burn_in - 1
    return Fraction(int(c[i]), int(n[i]))


def dup_premetric(x: Window, y: Window, burn_in: int = 1) -> Fraction:
    """max over n in [burn_in, L] of the mismatch fraction; proxy for the upper density."""
    c = _prefix_mismatch(x, y)
    if not 1 <= burn_in <= len(c):
        raise InputError("burn-in outside the window")
    n = np.arange(1, len(c) + 1)
    ratio = c[burn_in - 1 :] / n[burn_in - 1 :]
    i = int(np.argmax(ratio)) + burn_in - 1
    return Fraction(int(c[i]), int(n[i]))
