"""Points of the truncated group H and the maps built on them.

An HPoint is the orbit point Delta(n) seen through B_K: its truncated
identity is the residue n mod lcm(B_K).  The integer lift n is kept so
that exact windows of sigma^n eta can be produced for the same point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BSpec, BTruncation, Window, eta_window, sieve_multiples, truncate
from .errors import GeometryError, InputError, LcmOverflowError
from .structure import StarApprox
from .toeplitz import (PER_ONE, UNDETERMINED, eta_star_window, per_positions, star_lcm,
                       underline_eta_K_window)


@dataclass(frozen=True, eq=False)
class HPoint:
    n: int
    trunc: BTruncation

    def __post_init__(self):
        if self.trunc.overflowed:
            raise LcmOverflowError("HPoint needs a truncation with a finite lcm")

    @classmethod
    def delta(cls, n: int, trunc: BTruncation) -> "HPoint":
        return cls(int(n), trunc)

    @property
    def modulus(self) -> int:
        return self.trunc.lcm

    @property
    def residue(self) -> int:
        return self.n % self.modulus

    def coordinates(self) -> dict[int, int]:
        return {b: self.n % b for b in self.trunc.elements}

    def rotate(self, k: int = 1) -> "HPoint":
        """R^k: add k on every coordinate."""
        return HPoint(self.n + k, self.trunc)

    def __eq__(self, other):
        if not isinstance(other, HPoint):
            return NotImplemented
        return self.trunc.elements == other.trunc.elements and self.residue == other.residue

    def __hash__(self):
        return hash((self.trunc.elements, self.residue))

    def __repr__(self):
        return f"HPoint({self.residue} mod {self.modulus})"


def sample_h(trunc: BTruncation, rng: np.random.Generator) -> HPoint:
    """A draw from the uniform measure on residues mod lcm(B_K)."""
    return HPoint(int(rng.integers(0, trunc.lcm)), trunc)


def _star(bstar):
    return bstar.result if isinstance(bstar, StarApprox) else bstar


def phi_K(h: HPoint, a: int, L: int) -> Window:
    """bit at p set iff h.n + p is divisible by no element of B_K."""
    m = sieve_multiples(h.trunc, a + h.residue, L)
    return Window(a, ~m.bits, "eta-K")


def phi_window(h: HPoint, spec: BSpec, a: int, L: int) -> Window:
    """sigma^{h.n} eta on [a, a+L), exact."""
    lo, hi = a + h.n, a + h.n + L - 1
    trunc = truncate(spec, max(abs(lo), abs(hi), 1))
    w = eta_window(trunc, lo, L)
    return Window(a, w.bits, w.tag)


def gamma_star(h: HPoint, bstar: StarApprox | BTruncation) -> HPoint:
    """Project h onto the group built from B*: coordinates h_b mod b*."""
    star = _star(bstar)
    for s in star.elements:
        if not any(b % s == 0 for b in h.trunc.elements):
            raise InputError(f"b* = {s} divides no element of the B-truncation")
    return HPoint(h.n, star)


def phi_lower_K(h: HPoint, bstar, K: int, a: int, L: int,
                K_prime: int | None = None) -> tuple[Window, np.ndarray]:
    """Certified underline-phi_K(h) and its undetermined mask."""
    g = gamma_star(h, bstar)
    w, mask = underline_eta_K_window(g.trunc, K, a + g.n, L, K_prime)
    return Window(a, w.bits, w.tag), mask


def phi_lower_upper(h: HPoint, bstar, a: int, L: int) -> Window:
    """sigma^{h.n} of 1_{F_{B*}} from the approximation; an upper bound for eta* shifts."""
    g = gamma_star(h, bstar)
    w = eta_star_window(g.trunc, a + g.n, L)
    return Window(a, w.bits, w.tag)


def _tag(*ws: Window) -> str:
    return "eta-star-upper" if any(w.tag == "eta-star-upper" for w in ws) else "generic"


def _same(*ws: Window):
    for w in ws[1:]:
        if not w.same_geometry(ws[0]):
            raise GeometryError(
                f"window geometry mismatch: [{ws[0].offset},{ws[0].stop}) vs [{w.offset},{w.stop})")


def map_M(x: Window, y: Window) -> Window:
    _same(x, y)
    return Window(x.offset, x.bits & y.bits, _tag(x, y))


def map_N(w: Window, x: Window, y: Window) -> Window:
    """w + y(x - w) for w <= x."""
    _same(w, x, y)
    if np.any(w.bits & ~x.bits):
        bad = int(np.flatnonzero(w.bits & ~x.bits)[0]) + w.offset
        raise InputError(f"map_N needs w <= x; fails at position {bad}")
    return Window(w.offset, w.bits | (x.bits & y.bits), _tag(w, x, y))


@dataclass(frozen=True)
class MHEnclosure:
    lower: Window
    upper: Window
    mask: np.ndarray

    @property
    def exact(self) -> bool:
        return not self.mask.any() and self.lower == self.upper


def map_M_H(h: HPoint, y: Window, spec: BSpec, bstar, K: int,
            K_prime: int | None = None) -> MHEnclosure:
    """Enclosure of phi_(h) + y(phi(h) - phi_(h)) on the geometry of y."""
    a, L = y.offset, len(y)
    low_w, undetermined = phi_lower_K(h, bstar, K, a, L, K_prime)
    phi = phi_window(h, spec, a, L)
    up_w = phi_lower_upper(h, bstar, a, L)
    phik = phi_K(h, a, L)
    lower = map_N(low_w, phi, y)
    upper = map_N(up_w, phik, y)
    mask = undetermined | (low_w.bits != up_w.bits) | (phi.bits != phik.bits)
    return MHEnclosure(lower, upper, mask)


# ------------------------------------------------------------- hat map


def hat_read(x: Window, z: Window) -> tuple[Window, int]:
    """Read x along the support of z.

    Index 0 of the returned word is x at the first support point of z
    at or after position 0; earlier support points get negative indices.
    Returns the word and that anchor position.
    """
    _same(x, z)
    supp = z.support()
    ahead = supp[supp >= 0]
    if len(ahead) == 0:
        raise InputError("z has no support point at or after position 0")
    behind = len(supp) - len(ahead)
    word = x.bits[supp - x.offset]
    return Window(-behind, word), int(ahead[0])


def assemble(w: Window, z: Window, word: Window) -> tuple[Window, np.ndarray]:
    """w + (word placed along supp z); unplaceable support points are masked.

    This inverts the hat map: assemble(w, z, hat_read(x, z)) = w + x z.
    """
    _same(w, z)
    if np.any(w.bits & z.bits):
        raise InputError("w and z must have disjoint supports")
    supp = z.support()
    behind = int(np.sum(supp < 0))
    idx = np.arange(len(supp)) - behind
    inside = (idx >= word.offset) & (idx < word.stop)
    bits = w.bits.copy()
    mask = np.zeros(len(w), dtype=bool)
    pos = supp - w.offset
    bits[pos[inside]] = word.bits[idx[inside] - word.offset]
    mask[pos[~inside]] = True
    return Window(w.offset, bits, _tag(w, z)), mask


# ------------------------------------------------------------ skew product


@dataclass
class Trajectory:
    start: int
    modulus: int
    rows: list[tuple[int, int, int, int]]
    x: Window
    halted: bool = False
    reason: str = ""
    shifts: int = field(default=0)

    @property
    def steps(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        lines = ["step,h_residue,shifted,certified"]
        lines += [f"{s},{r},{sh},{c}" for s, r, sh, c in self.rows]
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"start": self.start, "modulus": self.modulus, "steps": self.steps,
                "shifts": self.shifts, "halted": self.halted, "reason": self.reason}


def skew_orbit(h: HPoint, x: Window, steps: int, spec: BSpec, bstar, K: int,
               K_prime: int | None = None) -> Trajectory:
    """Iterate (h, x) -> (Rh, x) or (Rh, sigma x).

    The shift happens exactly when eta*(n) = 0 < eta(n) = 1 at the current
    lift n.  An uncertified eta* value halts the orbit.
    """
    rows: list[tuple[int, int, int, int]] = []
    if steps <= 0:
        return Trajectory(h.n, h.modulus, rows, x)
    star = _star(bstar)
    s = star_lcm(star, K)
    cls = per_positions(star, s, h.n, steps, K_prime)
    eta = phi_window(HPoint(0, h.trunc), spec, h.n, steps).bits
    shifts = 0
    for i in range(steps):
        code = cls.codes[i]
        if code == UNDETERMINED:
            return Trajectory(h.n, h.modulus, rows, x, True,
                              f"eta* uncertified at n={h.n + i}", shifts)
        star_bit = code == PER_ONE
        if star_bit and not eta[i]:
            raise AssertionError(f"eta* > eta at n={h.n + i}")
        shifted = int(eta[i] and not star_bit)
        if shifted:
            x = x.shifted(1)
            shifts += 1
        rows.append((i, (h.n + i) % h.modulus, shifted, 1))
    return Trajectory(h.n, h.modulus, rows, x, False, "", shifts)
