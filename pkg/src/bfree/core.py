"""B-sets, their truncations, and sieved windows of 0-1 sequences.

A window is a finite slice ``[a, a+L)`` of a sequence indexed by the
integers.  Divisibility always uses floored residues, so negative
positions behave like any other integer.
"""

from __future__ import annotations

import heapq
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ExactnessError, GeometryError, InputError

LCM_CAP = 2**63
SEGMENT = 1 << 22

TAGS = ("eta", "eta-star-upper", "eta-K", "underline-eta-K", "multiples", "generic")


def primes_upto(n: int) -> np.ndarray:
    """All primes p <= n, ascending, as int64."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def smallest_prime_factors(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_upto(math.isqrt(n)):
        p = int(p)
        block = spf[p * p :: p]
        block[block == 0] = p
    spf[spf == 0] = np.arange(n + 1)[spf == 0]
    return spf


_SPF_LIMIT = 10_000_000
_spf_cache: dict[str, np.ndarray] = {}


def prime_factors(n: int, spf: np.ndarray | None = None) -> list[int]:
    """Distinct primes dividing n, ascending."""
    out = []
    if spf is not None and n < len(spf):
        while n > 1:
            p = int(spf[n])
            out.append(p)
            while n % p == 0:
                n //= p
        return out
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def spf_table(top: int) -> np.ndarray | None:
    if top > _SPF_LIMIT:
        return None
    cached = _spf_cache.get("spf")
    if cached is None or len(cached) <= top:
        grown = 2 * len(cached) if cached is not None else 0
        size = min(max(top, grown, 1 << 16), _SPF_LIMIT)
        cached = smallest_prime_factors(size)
        _spf_cache["spf"] = cached
    return cached


def factorize(n: int) -> list[tuple[int, int]]:
    out = []
    for p in prime_factors(n, spf_table(n)):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


# ---------------------------------------------------------------- B-sets


class BSpec:
    """A set B of naturals, enumerated in increasing order.

    Subclasses implement ``upto(K)``; iteration is derived from it by
    doubling the cutoff, so it is deterministic and repeatable.
    """

    finite = False

    def upto(self, K: int) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def max_element(self) -> int | None:
        return None

    def __iter__(self) -> Iterator[int]:
        last, K = 0, 64
        while True:
            for b in self.upto(K):
                if b > last:
                    last = int(b)
                    yield last
            top = self.max_element()
            if top is not None and K >= top:
                return
            K *= 2

    def __repr__(self) -> str:
        return f"BSpec({self.describe()})"


class ExplicitB(BSpec):
    finite = True

    def __init__(self, elements: Iterable[int]):
        elems = sorted({int(b) for b in elements})
        if elems and elems[0] < 1:
            raise InputError(f"B-set elements must be >= 1, got {elems[0]}")
        self.elements = tuple(elems)

    def upto(self, K):
        return np.array([b for b in self.elements if b <= K], dtype=np.int64)

    def max_element(self):
        return self.elements[-1] if self.elements else 0

    def describe(self):
        return "explicit:" + ",".join(map(str, self.elements))


class PrimeSquares(BSpec):
    def upto(self, K):
        p = primes_upto(math.isqrt(K))
        return p * p

    def describe(self):
        return "prime-squares"


class ScaledPrimes(BSpec):
    """c times the primes; c = 1 gives all primes."""

    def __init__(self, c: int = 1):
        if c < 1:
            raise InputError(f"scale must be >= 1, got {c}")
        self.c = int(c)

    def upto(self, K):
        return self.c * primes_upto(K // self.c)

    def describe(self):
        return "primes" if self.c == 1 else f"scaled-primes:{self.c}"


class FileListB(BSpec):
    """One natural per line, increasing; ``#`` starts a comment."""

    finite = True

    def __init__(self, path: str | Path):
        self.path = Path(path)

    @cached_property
    def elements(self) -> tuple[int, ...]:
        try:
            text = self.path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read B-set file {self.path}: {exc}") from exc
        return parse_file_list(text, str(self.path))

    def upto(self, K):
        return np.array([b for b in self.elements if b <= K], dtype=np.int64)

    def max_element(self):
        return self.elements[-1] if self.elements else 0

    def describe(self):
        return f"file:{self.path}"


class UnionB(BSpec):
    def __init__(self, parts: Sequence[BSpec]):
        if not parts:
            raise InputError("a union needs at least one part")
        self.parts = tuple(parts)
        self.finite = all(p.finite for p in self.parts)

    def upto(self, K):
        arrays = [p.upto(K) for p in self.parts]
        return np.unique(np.concatenate(arrays)).astype(np.int64)

    def max_element(self):
        if not self.finite:
            return None
        return max(p.max_element() for p in self.parts)

    def __iter__(self):
        last = None
        for b in heapq.merge(*self.parts):
            if b != last:
                last = b
                yield b

    def describe(self):
        return "+".join(p.describe() for p in self.parts)


def parse_file_list(text: str, source: str = "<text>") -> tuple[int, ...]:
    out: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            b = int(line)
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a natural number: {line!r}") from None
        if b < 1:
            raise InputError(f"{source}:{lineno}: elements must be >= 1")
        if out and b <= out[-1]:
            raise InputError(f"{source}:{lineno}: elements must be strictly increasing")
        out.append(b)
    return tuple(out)


def parse_bspec(text: str) -> BSpec:
    """Parse a family string such as ``scaled-primes:2+explicit:9``."""
    parts = [p.strip() for p in text.split("+") if p.strip()]
    if not parts:
        raise InputError("empty B-set description")
    specs = [_parse_one(p) for p in parts]
    return specs[0] if len(specs) == 1 else UnionB(specs)


def _parse_one(text: str) -> BSpec:
    name, _, arg = text.partition(":")
    name = name.strip()
    try:
        if name == "explicit":
            return ExplicitB(int(t) for t in arg.split(",") if t.strip())
        if name == "prime-squares":
            return PrimeSquares()
        if name == "primes":
            return ScaledPrimes(1)
        if name == "scaled-primes":
            return ScaledPrimes(int(arg))
        if name == "file":
            return FileListB(arg)
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad B-set description {text!r}: {exc}") from None
    raise InputError(f"unknown B-set family {name!r}")


# ------------------------------------------------------------ truncations


@dataclass(frozen=True)
class BTruncation:
    """The finite set B_K with its lcm.

    ``lcm`` is None exactly when ``overflowed`` is set.  ``complete``
    records that the elements are all of B, not just those up to K.
    """

    elements: tuple[int, ...]
    K: int
    lcm: int | None
    overflowed: bool = False
    complete: bool = False
    source: str = "explicit"

    @classmethod
    def from_elements(cls, elements: Iterable[int], K: int | None = None, *,
                      complete: bool = True, source: str = "explicit",
                      cap: int = LCM_CAP) -> "BTruncation":
        elems = tuple(sorted({int(b) for b in elements}))
        if elems and elems[0] < 1:
            raise InputError("B-set elements must be >= 1")
        if K is None:
            K = elems[-1] if elems else 1
        lcm, over = capped_lcm(elems, cap)
        return cls(elems, int(K), lcm, over, complete, source)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.elements, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, b) -> bool:
        return b in set(self.elements)

    def covers(self, n: int) -> bool:
        """Whether every b in B with b <= |n| is present."""
        return self.complete or self.K >= abs(n)

    def restrict(self, K: int) -> "BTruncation":
        elems = [b for b in self.elements if b <= K]
        full = self.complete and (not self.elements or self.elements[-1] <= K)
        return BTruncation.from_elements(elems, K, complete=full, source=self.source)


def capped_lcm(elements: Iterable[int], cap: int = LCM_CAP) -> tuple[int | None, bool]:
    acc = 1
    for b in elements:
        acc = acc * b // math.gcd(acc, b)
        if acc > cap:
            return None, True
    return acc, False


def truncate(spec: BSpec, K: int, cap: int = LCM_CAP) -> BTruncation:
    if K < 1:
        raise InputError(f"K must be >= 1, got {K}")
    elems = spec.upto(K)
    top = spec.max_element()
    complete = spec.finite and top is not None and top <= K
    return BTruncation.from_elements(elems.tolist(), K, complete=complete,
                                     source=spec.describe(), cap=cap)


def primitive_subset(elements: Iterable[int]) -> list[int]:
    """Drop every element divisible by a smaller one."""
    elems = sorted(set(int(b) for b in elements))
    if not elems:
        return []
    if elems[0] == 1:
        return [1]
    top = elems[-1]
    if len(elems) > 64 and top <= 50_000_000:
        hit = np.zeros(top + 1, dtype=bool)
        kept = []
        for b in elems:
            if not hit[b]:
                kept.append(b)
                hit[2 * b :: b] = True
        return kept
    kept = []
    for b in elems:
        if all(b % d for d in kept):
            kept.append(b)
    return kept


def primitivize(trunc: BTruncation) -> BTruncation:
    kept = primitive_subset(trunc.elements)
    return BTruncation.from_elements(kept, trunc.K, complete=trunc.complete,
                                     source=trunc.source)


# ----------------------------------------------------------------- windows


@dataclass(frozen=True, eq=False)
class Window:
    """Bits of a 0-1 sequence on ``[offset, offset + len(bits))``."""

    offset: int
    bits: np.ndarray
    tag: str = "generic"

    def __post_init__(self):
        arr = np.array(self.bits, dtype=bool).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)
        object.__setattr__(self, "offset", int(self.offset))
        if self.tag not in TAGS:
            raise InputError(f"unknown window tag {self.tag!r}")

    @classmethod
    def from_string(cls, s: str, offset: int = 0, tag: str = "generic") -> "Window":
        return cls(offset, np.frombuffer(s.encode(), dtype=np.uint8) == ord("1"), tag)

    @property
    def length(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def stop(self) -> int:
        return self.offset + len(self.bits)

    def positions(self) -> np.ndarray:
        return np.arange(self.offset, self.stop, dtype=np.int64)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.bits).astype(np.int64) + self.offset

    def at(self, n: int) -> int:
        i = n - self.offset
        if not 0 <= i < len(self.bits):
            raise IndexError(f"position {n} outside window [{self.offset}, {self.stop})")
        return int(self.bits[i])

    def segment(self, a: int, L: int) -> "Window":
        if a < self.offset or a + L > self.stop:
            raise GeometryError(f"[{a}, {a + L}) not inside [{self.offset}, {self.stop})")
        i = a - self.offset
        return Window(a, self.bits[i : i + L], self.tag)

    def shifted(self, k: int = 1) -> "Window":
        """The same data read as a window of sigma^k x."""
        return Window(self.offset - k, self.bits, self.tag)

    def with_tag(self, tag: str) -> "Window":
        return Window(self.offset, self.bits, tag)

    def same_geometry(self, other: "Window") -> bool:
        return self.offset == other.offset and len(self) == len(other)

    def __eq__(self, other):
        if not isinstance(other, Window):
            return NotImplemented
        return self.same_geometry(other) and bool(np.array_equal(self.bits, other.bits))

    def __le__(self, other: "Window") -> bool:
        _require_same(self, other)
        return not bool(np.any(self.bits & ~other.bits))

    def __str__(self) -> str:
        return (self.bits.astype(np.uint8) + ord("0")).tobytes().decode()

    def __repr__(self) -> str:
        body = str(self) if len(self) <= 40 else str(self.segment(self.offset, 40)) + "..."
        return f"Window(offset={self.offset}, tag={self.tag}, bits={body})"

    # -- serialization

    def to_text(self) -> str:
        return f"window {self.offset} {len(self)} {self.tag}\n{self}\n"

    @classmethod
    def from_text(cls, text: str) -> "Window":
        lines = text.splitlines()
        if len(lines) < 2:
            raise InputError("window text needs a header and a bit line")
        head = lines[0].split()
        if len(head) != 4 or head[0] != "window":
            raise InputError(f"bad window header {lines[0]!r}")
        a, L, tag = int(head[1]), int(head[2]), head[3]
        body = lines[1].strip()
        if len(body) != L or set(body) - {"0", "1"}:
            raise InputError("window body must be exactly L characters of 0/1")
        return cls.from_string(body, a, tag)

    def to_bytes(self) -> bytes:
        packed = np.packbits(self.bits.astype(np.uint8), bitorder="little")
        return struct.pack("<qQ", self.offset, len(self)) + packed.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, tag: str = "generic") -> "Window":
        if len(data) < 16:
            raise InputError("truncated binary window header")
        a, L = struct.unpack("<qQ", data[:16])
        need = (L + 7) // 8
        payload = np.frombuffer(data[16 : 16 + need], dtype=np.uint8)
        if len(payload) != need:
            raise InputError("truncated binary window payload")
        bits = np.unpackbits(payload, count=L, bitorder="little").astype(bool)
        return cls(a, bits, tag)


def _require_same(x: Window, y: Window):
    if not x.same_geometry(y):
        raise GeometryError(
            f"window geometry mismatch: [{x.offset},{x.stop}) vs [{y.offset},{y.stop})")


def write_window(path: str | Path, w: Window, binary: bool = False):
    path = Path(path)
    if binary:
        path.write_bytes(w.to_bytes())
    else:
        path.write_text(w.to_text())


def read_window(path: str | Path, binary: bool = False) -> Window:
    path = Path(path)
    try:
        return Window.from_bytes(path.read_bytes()) if binary else Window.from_text(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read window file {path}: {exc}") from exc


# ------------------------------------------------------------------ sieving


def _mark(view: np.ndarray, start: int, elems: np.ndarray):
    n = len(view)
    small = elems[elems <= n]
    for b in small.tolist():
        view[(-start) % b :: b] = True
    large = elems[elems > n]
    if len(large):
        first = (-start) % large
        view[first[first < n]] = True


def sieve_multiples(trunc: BTruncation, a: int, L: int, *, segment: int = SEGMENT,
                    threads: int = 1) -> Window:
    """Mark positions of ``[a, a+L)`` divisible by some element of the truncation."""
    if L < 1:
        raise InputError(f"window length must be >= 1, got {L}")
    if segment < 1:
        raise InputError("segment size must be positive")
    bits = np.zeros(L, dtype=bool)
    elems = trunc.array
    starts = range(0, L, segment)

    def work(s):
        _mark(bits[s : s + segment], a + s, elems)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for s in starts:
            work(s)
    return Window(a, bits, "multiples")


def window_is_exact(trunc: BTruncation, a: int, L: int) -> bool:
    return trunc.covers(max(abs(a), abs(a + L - 1)))


def eta_window(trunc: BTruncation, a: int, L: int, *, strict: bool = True,
               segment: int = SEGMENT, threads: int = 1) -> Window:
    """Indicator of the B-free positions in ``[a, a+L)``.

    When the truncation does not reach the window the result is the upper
    approximant eta_K; ``strict`` turns that case into an error.
    """
    m = sieve_multiples(trunc, a, L, segment=segment, threads=threads)
    if window_is_exact(trunc, a, L):
        tag = "eta"
    elif strict:
        raise ExactnessError(
            f"truncation at K={trunc.K} does not cover [{a}, {a + L}); "
            "pass a larger K or strict=False for the upper approximant")
    else:
        tag = "eta-K"
    return Window(a, ~m.bits, tag)


def admissibility_defect(w: Window, b: int) -> set[int]:
    """Residues mod b met by the support of w."""
    if b < 1:
        raise InputError("b must be >= 1")
    return set(np.unique(w.support() % b).tolist())


def theta_window(w: Window, b: int) -> list[int]:
    """Residues mod b avoided by the support of w."""
    if len(w) < b:
        raise InputError(f"window of length {len(w)} cannot see all residues mod {b}")
    hit = admissibility_defect(w, b)
    return [r for r in range(b) if r not in hit]


def block_codes(bits: np.ndarray, n: int, starts: int | None = None) -> np.ndarray:
    """Pack each length-n block into a uint64, symbol j at bit j.

    Entry i encodes bits[i:i+n]; ``starts`` limits the number of blocks.
    """
    if not 1 <= n <= 64:
        raise InputError(f"packed blocks need 1 <= n <= 64, got {n}")
    total = len(bits) - n + 1
    if total < 1:
        raise InputError(f"window of length {len(bits)} has no blocks of length {n}")
    count = total if starts is None else min(starts, total)
    src = np.asarray(bits, dtype=np.uint64)
    codes = np.zeros(count, dtype=np.uint64)
    for j in range(n):
        codes |= src[j : j + count] << np.uint64(j)
    return codes


def code_to_word(code: int, n: int) -> str:
    return "".join("1" if (int(code) >> j) & 1 else "0" for j in range(n))


def block_rows(bits: np.ndarray, n: int, starts: int | None = None) -> np.ndarray:
    """Blocks as fixed-width byte strings, for any n."""
    total = len(bits) - n + 1
    count = total if starts is None else min(starts, total)
    view = np.lib.stride_tricks.sliding_window_view(np.asarray(bits, dtype=bool), n)[:count]
    packed = np.packbits(view, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[1]))).ravel()
