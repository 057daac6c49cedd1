"""Invariant and acceptance suites.

Each check returns a :class:`Check`.  Wall-clock time is kept apart from
the result so that reports stay byte-identical between runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import (BSpec, BTruncation, ExplicitB, PrimeSquares, Window, divisors, eta_window,
                   parse_bspec, primes_upto, primitive_subset, truncate)
from .density import (davenport_erdos_profile, exact_density_multiples,
                      logarithmic_density_estimate, lower_density_sequence)
from .entropy import entropy_gap_report
from .errors import InputError
from .maps import HPoint, assemble, hat_read, map_N, phi_lower_K, phi_window, skew_orbit
from .measures import max_entropy_sampler, offset_table, sampled_offsets, eta_star_bits
from .scenarios import SCENARIOS, ScenarioConfig, scenario
from .structure import StarApprox, default_bstar, divisibility_check
from .toeplitz import PER_ONE, PER_ZERO, UNDETERMINED, per_positions, sandwich_check, \
    symbolic_discrepancy

ORACLE_LCM = 10_000


@dataclass
class Check:
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.summary}"

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "summary": self.summary,
                "details": self.details}


def timed(name: str, fn: Callable[[], tuple[bool, str, dict]]) -> Check:
    t0 = time.perf_counter()
    ok, summary, details = fn()
    return Check(name, bool(ok), summary, details, time.perf_counter() - t0)


# ------------------------------------------------------------- oracles


def brute_per(star: Sequence[int], s: int) -> np.ndarray:
    """Per-classification codes on [0, P) for P = lcm(B*, s), read off x directly.

    x = 1_{F_{B*}} is P-periodic, so the class n + sZ is visited in full by
    stepping n, n+s, n+2s, ... around one period.
    """
    P = math.lcm(*star, s)
    x = np.ones(P, dtype=bool)
    for b in star:
        x[::b] = False
    codes = np.full(P, UNDETERMINED, dtype=np.int8)
    seen = np.zeros(P, dtype=bool)
    for n in range(P):
        if seen[n]:
            continue
        orbit = (n + s * np.arange(P // math.gcd(s, P))) % P
        seen[orbit] = True
        vals = x[orbit]
        if vals.all():
            codes[orbit] = PER_ONE
        elif not vals.any():
            codes[orbit] = PER_ZERO
    return codes


def per_oracle_mismatches(star: Sequence[int], s: int) -> int:
    P = math.lcm(*star, s)
    trunc = BTruncation.from_elements(star)
    fast = per_positions(trunc, s, 0, P).codes
    return int(np.sum(fast != brute_per(star, s)))


def random_primitive_sets(rng: np.random.Generator, count: int, top: int = 60,
                          cap: int = ORACLE_LCM) -> list[list[int]]:
    out = []
    while len(out) < count:
        size = int(rng.integers(1, 6))
        elems = primitive_subset(int(v) for v in rng.integers(2, top, size=size))
        if math.lcm(*elems) <= cap:
            out.append(elems)
    return out


def oracle_pairs(star: Sequence[int], cap: int = ORACLE_LCM) -> list[int]:
    """Periods s to test against B*: divisors of lcm(B*) plus small s, within the cap."""
    P = math.lcm(*star)
    cands = set(divisors(P)) | set(range(1, 31))
    return sorted(s for s in cands if math.lcm(P, s) <= cap)


def hat_relation_violations(rng: np.random.Generator, pairs: int) -> tuple[int, int]:
    """Random (x, z) windows; returns (checked, violations) for the shift relation."""
    checked = bad = 0
    while checked < pairs:
        L = int(rng.integers(2, 80))
        a = -int(rng.integers(1, L)) if L > 1 else 0
        if not a <= 0 < a + L - 1:
            continue
        x = Window(a, rng.random(L) < 0.5)
        z = Window(a, rng.random(L) < float(rng.uniform(0.1, 0.9)))
        if not np.any(z.support() >= 1):
            continue
        word, _ = hat_read(x, z)
        sword, _ = hat_read(x.shifted(1), z.shifted(1))
        expect = word.shifted(1) if z.at(0) else word
        checked += 1
        bad += sword != expect
    return checked, bad


def skew_commutation(spec: BSpec, bstar: StarApprox, K: int, h: HPoint, x_bits: np.ndarray,
                     steps: int, checkpoints: int = 20) -> dict:
    """Follow a certified skew trajectory and compare both sides of the commutation rules.

    Window geometry is [-steps, 2 steps).  At each checkpoint k the word
    carried by the trajectory must equal the hat of sigma^k x along the
    independently computed difference z(R^k h), and shifting the assembled
    point must equal assembling at R^k h.
    """
    a, L = -steps, 3 * steps
    x = Window(a, x_bits[:L])

    def parts(g: HPoint, off: int):
        phi = phi_window(g, spec, off, L)
        low, mask = phi_lower_K(g, bstar, K, off, L)
        return phi, low, mask

    phi, low, mask = parts(h, a)
    out = {"start": h.n, "steps": steps, "uncertified": int(mask.sum()), "violations": []}
    if mask.any() or np.any(low.bits & ~phi.bits):
        out["violations"].append("start not certified or lower > phi")
        return out
    z = Window(a, phi.bits & ~low.bits)
    if not np.any(z.support() >= 0):
        out["no_support"] = True
        word0 = None
    else:
        word0, _ = hat_read(x, z)
        built, hole = assemble(low, z, word0)
        if hole.any() or built != map_N(low, phi, x).with_tag("generic"):
            out["violations"].append("M_H != Phi o Psi at start")
    carrier = word0 if word0 is not None else Window(0, np.zeros(0, bool))
    traj = skew_orbit(h, carrier, steps, spec, bstar, K)
    out["halted"] = traj.halted
    if traj.halted:
        out["violations"].append(traj.reason)
        return out
    cum = np.concatenate([[0], np.cumsum([r[2] for r in traj.rows])])
    zcum = np.concatenate([[0], np.cumsum(z.bits[-a : -a + steps])])
    if not np.array_equal(cum, zcum):
        out["violations"].append("shift count differs from the support count of z")
    for k in sorted(set(np.linspace(1, steps, checkpoints, dtype=int).tolist())):
        hk = h.rotate(k)
        phik, lowk, maskk = parts(hk, a - k)
        zk = Window(a - k, phik.bits & ~lowk.bits)
        if maskk.any() or zk != z.shifted(k):
            out["violations"].append(f"z(R^{k} h) != sigma^{k} z")
            continue
        if word0 is None:
            continue
        wk = word0.shifted(int(cum[k]))
        if hat_read(x.shifted(k), zk)[0] != wk:
            out["violations"].append(f"hat relation fails after {k} steps")
        lhs, _ = assemble(low, z, word0)
        rhs, _ = assemble(lowk, zk, wk)
        if lhs.shifted(k) != rhs.with_tag(lhs.tag):
            out["violations"].append(f"sigma^{k} Phi != Phi R~^{k}")
    out["shifts"] = traj.shifts
    return out


def h_truncation(spec: BSpec, star: BTruncation, K: int) -> BTruncation:
    """A finite-lcm piece of B_K on which every b* of the approximation divides some b.

    For each b* the smallest multiple in B_K is taken, then further
    elements of B_K in increasing order while the lcm stays below the cap.
    """
    elems = truncate(spec, K).elements
    picked = []
    for s in star.elements:
        m = next((b for b in elems if b % s == 0), None)
        if m is None:
            raise InputError(f"no element of B_{K} is a multiple of b* = {s}")
        picked.append(m)
    for b in elems:
        trial = BTruncation.from_elements(sorted(set(picked) | {b}), K)
        if trial.overflowed:
            break
        picked = list(trial.elements)
    return BTruncation.from_elements(sorted(set(picked)), K, complete=False,
                                     source=f"H-piece({spec.describe()})")


def trajectory_checks(spec: BSpec, K_grid: Sequence[int], steps: int, count: int,
                      seed: int) -> tuple[int, list[dict]]:
    rng = np.random.default_rng(seed)
    K = max(K_grid)
    bstar = default_bstar(spec, K)
    trunc = h_truncation(spec, bstar.result, K)
    reports = []
    for _ in range(count):
        h = HPoint(int(rng.integers(0, 10**6)), trunc)
        reports.append(skew_commutation(spec, bstar, K, h, rng.random(3 * steps) < 0.5, steps))
    return sum(len(r["violations"]) for r in reports), reports


# ---------------------------------------------------- scenario suite


def _density_dual(cfg: ScenarioConfig):
    trunc = truncate(cfg.spec, cfg.K_grid[-1])
    fast = exact_density_multiples(trunc)
    if trunc.lcm is not None and trunc.lcm <= 2_000_000:
        other = exact_density_multiples(trunc, mode="period")
        route = "period count"
    else:
        head = BTruncation.from_elements(trunc.elements[:16])
        fast = exact_density_multiples(head)
        other = exact_density_multiples(head, mode="subset")
        route = "subset enumeration on the first 16 elements"
    ok = fast.is_exact and fast.value == other.value
    return ok, f"recursion {fast.value} vs {route} {other.value}", \
        {"recursive": str(fast.value), "oracle": str(other.value), "route": route}


def _de(cfg: ScenarioConfig):
    series = davenport_erdos_profile(cfg.spec, cfg.K_grid)
    mono = series.nondecreasing()
    return mono is True, f"d(M_B_K) over K={list(cfg.K_grid)} nondecreasing: {mono}", \
        series.as_dict()


def _sandwich(spec: BSpec, grid: Sequence[int], L: int):
    bstar = default_bstar(spec, max(grid))
    rows = [sandwich_check(spec, K, 1, L, bstar=bstar).as_dict() for K in grid]
    bad = sum(sum(r["violations"].values()) for r in rows)
    return bad == 0, f"{bad} violations over K={list(grid)}, L={L}", {"entries": rows}


def _per_oracle(stars: Sequence[Sequence[int]]):
    pairs = bad = 0
    worst = []
    for star in stars:
        for s in oracle_pairs(star):
            m = per_oracle_mismatches(star, s)
            pairs += 1
            bad += m
            if m and len(worst) < 10:
                worst.append({"bstar": list(star), "s": s, "mismatches": m})
    return bad == 0, f"{pairs} (B*, s) pairs, {bad} mismatched positions", \
        {"pairs": pairs, "mismatches": bad, "first": worst}


def _star_sets(spec: BSpec, K: int) -> list[list[int]]:
    sets = []
    star = list(default_bstar(spec, K).result.elements)
    if math.lcm(*star) <= ORACLE_LCM:
        sets.append(star)
    prim = primitive_subset(truncate(spec, K).elements)
    for m in range(1, len(prim) + 1):
        if math.lcm(*prim[:m]) > ORACLE_LCM:
            break
        sets.append(prim[:m])
    return sets


def _bounds(spec: BSpec, L: int, n_grid: Sequence[int], threads: int = 1):
    rep = entropy_gap_report(spec, L, n_grid, threads=threads)
    rows = [{"n": lo.n, "lhs": lo.lhs, "p_n": lo.rhs, "rhs": up.rhs,
             "lower_ok": lo.passed, "upper_ok": up.passed}
            for lo, up in zip(rep.lower, rep.upper)]
    bad = sum((not r["lower_ok"]) + (not r["upper_ok"]) for r in rows)
    return bad == 0, f"{bad} violations for n in {list(n_grid)}", {"entries": rows}


def _sampler_endpoints(spec: BSpec, K: int, L: int, n: int, samples: int, seed: int):
    bstar = default_bstar(spec, K)
    zeros = max_entropy_sampler(spec, K, L, n, samples, seed, bstar=bstar, y_mode="zeros")
    ones = max_entropy_sampler(spec, K, L, n, samples, seed, bstar=bstar, y_mode="ones")
    offs = sampled_offsets(seed, samples, L, n)
    eta = eta_window(truncate(spec, K), 1, L, strict=False).bits
    star, _ = eta_star_bits(bstar.result, 1, L)
    ok0 = zeros.counts == offset_table(star, offs, n, {}).counts
    ok1 = ones.counts == offset_table(eta, offs, n, {}).counts
    return ok0 and ok1, f"y=0 reproduces eta*: {ok0}; y=1 reproduces eta: {ok1}", \
        {"zeros": ok0, "ones": ok1}


def _hat(pairs: int, seed: int):
    checked, bad = hat_relation_violations(np.random.default_rng(seed), pairs)
    return bad == 0, f"{checked} random window pairs, {bad} violations", \
        {"pairs": checked, "violations": bad}


def _trajectories(spec: BSpec, grid, steps: int, count: int, seed: int):
    bad, reps = trajectory_checks(spec, grid, steps, count, seed)
    return bad == 0, f"{count} trajectories of {steps} steps, {bad} violations", \
        {"trajectories": reps}


def scenario_suite(cfg: ScenarioConfig, threads: int = 1) -> list[Check]:
    """Invariant checks on one scenario at its configured scale."""
    spec = cfg.spec
    L = cfg.L
    n_grid = [n for n in cfg.n_grid if n <= 64]
    return [
        timed("exact-density", lambda: _density_dual(cfg)),
        timed("davenport-erdos-monotone", lambda: _de(cfg)),
        timed("sandwich", lambda: _sandwich(spec, cfg.K_grid, L)),
        timed("per-set-oracle", lambda: _per_oracle(_star_sets(spec, cfg.K_grid[-1]))),
        timed("counting-bounds", lambda: _bounds(spec, L, n_grid, threads)),
        timed("sampler-endpoints", lambda: _sampler_endpoints(
            spec, max(cfg.sample_K, 2), L, cfg.sample_n, min(cfg.samples, 20_000), cfg.seed)),
        timed("hat-relation", lambda: _hat(cfg.hat_pairs, cfg.seed)),
        timed("skew-commutation", lambda: _trajectories(spec, cfg.K_grid, cfg.orbit_steps,
                                                        3, cfg.seed)),
    ]


# --------------------------------------------------- acceptance suite


def criterion_1() -> Check:
    def run():
        t0 = time.perf_counter()
        a = exact_density_multiples(BTruncation.from_elements([2, 3])).value
        b = exact_density_multiples(BTruncation.from_elements([4, 9, 25, 49])).value
        # independent route: count multiples over one period by direct sieving
        w = np.zeros(44100, dtype=bool)
        for q in (4, 9, 25, 49):
            w[q - 1 :: q] = True
        oracle = Fraction(int(w.sum()), 44100)
        secs = time.perf_counter() - t0
        ok = a == Fraction(2, 3) and b == Fraction(457, 1225) == oracle and secs < 1
        return ok, f"{{2,3}} -> {a}; {{4,9,25,49}} -> {b}, period count {oracle}", \
            {"d23": str(a), "d4_9_25_49": str(b), "oracle": str(oracle)}
    return timed("criterion 1 exact densities", run)


def criterion_2() -> Check:
    def run():
        t0 = time.perf_counter()
        series = davenport_erdos_profile(PrimeSquares(), [10, 100, 1000, 10_000])
        mono = series.nondecreasing()
        d1000 = dict(series.entries)[1000].value
        log_est = logarithmic_density_estimate(PrimeSquares(), 10**6, 10**6)
        gap = abs(log_est - float(d1000))
        secs = time.perf_counter() - t0
        ok = mono is True and gap <= 0.01 and secs < 30
        return ok, (f"nondecreasing={mono}; log-density estimate {log_est:.5f} vs "
                    f"d(M_B_1000) {float(d1000):.5f}, gap {gap:.4f} (tol 0.01)"), \
            {"profile": [str(v) for v in series.values], "log_estimate": log_est,
             "d1000": str(d1000), "gap": gap}
    return timed("criterion 2 Davenport-Erdos", run)


def criterion_3(L: int = 10**6) -> Check:
    def run():
        total, rows = 0, {}
        for name in SCENARIOS:
            cfg = scenario(name)
            ok, summary, det = _sandwich(cfg.spec, cfg.K_grid, L)
            rows[name] = summary
            total += sum(sum(e["violations"].values()) for e in det["entries"])
        return total == 0, f"{total} violations on windows of length {L}", rows
    return timed("criterion 3 sandwich", run)


def criterion_4(random_sets: int = 100, seed: int = 4) -> Check:
    def run():
        stars = []
        for name in SCENARIOS:
            stars += _star_sets(scenario(name).spec, 1000)
        stars += random_primitive_sets(np.random.default_rng(seed), random_sets)
        return _per_oracle(stars)
    return timed("criterion 4 per-set oracle", run)


def criterion_5() -> Check:
    def run():
        t0 = time.perf_counter()
        fin = entropy_gap_report(ExplicitB([2, 3]), 10**5, list(range(4, 33)), bounds=False)
        p_ok = all(e.p_n == 6 for e in fin.profile.entries)
        i_ok = p_ok and fin.profile.h(32) <= 0.09 and fin.h_pred == 0

        K = 10**7
        sq = entropy_gap_report(PrimeSquares(), K, [24], bounds=False)
        target = math.prod(1 - 1 / p**2 for p in primes_upto(math.isqrt(K)).tolist())
        ii_ok = abs(sq.profile.h(24) - target) <= 0.08

        tp = entropy_gap_report(scenario("two-primes-plus-9").spec, 10**6, [24], bounds=False)
        iii_ok = tp.h_pred <= 0.01 and tp.profile.h(24) <= 0.05 and tp.zero_entropy_flag
        secs = time.perf_counter() - t0
        summary = (f"(i) p_n=6 on 4..32: {p_ok}, h_32={fin.profile.h(32):.4f}, gap={fin.h_pred}; "
                   f"(ii) h_24={sq.profile.h(24):.4f} vs {target:.4f}; "
                   f"(iii) gap={tp.h_pred:.4f}, h_24={tp.profile.h(24):.4f} (<= 0.05 needed, "
                   f"p_24={tp.profile.p(24)})")
        return i_ok and ii_ok and iii_ok and secs < 300, summary, \
            {"i": i_ok, "ii": ii_ok, "iii": iii_ok, "seconds_ok": secs < 300}
    return timed("criterion 5 entropy at desk scale", run)


def criterion_6() -> Check:
    def run():
        rows, bad = {}, 0
        for name in SCENARIOS:
            cfg = scenario(name)
            ok, summary, det = _bounds(cfg.spec, cfg.L, cfg.n_grid)
            rows[name] = det["entries"]
            bad += sum((not r["lower_ok"]) + (not r["upper_ok"]) for r in det["entries"])
        return bad == 0, f"{bad} violations across {len(rows)} scenarios", rows
    return timed("criterion 6 counting bounds", run)


def criterion_7(samples: int = 100_000, seed: int = 20240601, L: int = 441_000) -> Check:
    def run():
        spec, K, n = PrimeSquares(), 49, 4
        table = max_entropy_sampler(spec, K, L, n, samples, seed)
        p = Fraction(384, 1225)
        got = table.one_frequency(0)
        sigma = math.sqrt(float(p) * (1 - float(p)) / samples)
        z = abs(float(got) - float(p)) / sigma
        ok_ends, ends, _ = _sampler_endpoints(spec, K, L, n, samples, seed)
        return z <= 3 and ok_ends, f"1-frequency {float(got):.5f} vs {float(p):.5f} " \
            f"({z:.2f} sigma); {ends}", {"frequency": str(got), "z": z}
    return timed("criterion 7 maximal-entropy frequencies", run)


DIVISIBILITY_PAIRS: list[tuple[str, BSpec, BSpec, bool]] = [
    # (label, B, C, clause (a) expected)
    ("B={2,3}, C=B", ExplicitB([2, 3]), ExplicitB([2, 3]), True),
    ("B={2,4,9}, C={2,9}", ExplicitB([2, 4, 9]), ExplicitB([2, 9]), True),
    ("B={2,3}, C={2,3,6,9}", ExplicitB([2, 3]), ExplicitB([2, 3, 6, 9]), True),
    ("B={6,10,15}, C=B", ExplicitB([6, 10, 15]), ExplicitB([6, 10, 15]), True),
    ("B={4,6,9}, C={4,6,9,12}", ExplicitB([4, 6, 9]), ExplicitB([4, 6, 9, 12]), True),
    ("B=2P, C={2}", None, ExplicitB([2]), True),
    ("B=2P+{9}, C={2,9}", None, ExplicitB([2, 9]), True),
    ("B=prime squares, C={1}", PrimeSquares(), ExplicitB([1]), True),
    ("B=2P+9P, C={2,9}", None, ExplicitB([2, 9]), True),
    ("B={5,7}, C={5,7,35}", ExplicitB([5, 7]), ExplicitB([5, 7, 35]), True),
    ("B={2,3}, C={2}", ExplicitB([2, 3]), ExplicitB([2]), False),
    ("B={2,3}, C={2,3,5}", ExplicitB([2, 3]), ExplicitB([2, 3, 5]), False),
    ("B={4,9}, C={2,9}", ExplicitB([4, 9]), ExplicitB([2, 9]), False),
    ("B={6,10}, C={6}", ExplicitB([6, 10]), ExplicitB([6]), False),
    ("B={2,3}, C={4,9}", ExplicitB([2, 3]), ExplicitB([4, 9]), False),
    ("B=2P, C={4}", None, ExplicitB([4]), False),
    ("B=2P+{9}, C={2}", None, ExplicitB([2]), False),
    ("B=prime squares, C={4,9}", PrimeSquares(), ExplicitB([4, 9]), False),
    ("B={3,5,7}, C={3,5,11}", ExplicitB([3, 5, 7]), ExplicitB([3, 5, 11]), False),
    ("B={10,14}, C={2,7}", ExplicitB([10, 14]), ExplicitB([2, 7]), False),
]


def _divisibility_b(label: str) -> BSpec:
    if label.startswith("B=2P+{9}"):
        return parse_bspec("scaled-primes:2+explicit:9")
    if label.startswith("B=2P+9P"):
        return parse_bspec("scaled-primes:2+scaled-primes:9")
    return parse_bspec("scaled-primes:2")


def divisibility_suite(K: int = 2000, L: int = 2000) -> tuple[int, list[dict]]:
    """Run the hand-picked pairs; returns (exceptions, rows)."""
    rows, exceptions = [], 0
    for label, B, C, expect_a in DIVISIBILITY_PAIRS:
        B = B if B is not None else _divisibility_b(label)
        v = divisibility_check(B, C, K, L)
        row = {"pair": label, "clause_a": v.clause_a, "expected_a": expect_a,
               "clause_b": v.clause_b, "witnesses": v.witnesses[:3]}
        problems = []
        if v.clause_a != expect_a:
            problems.append("clause (a) differs from the hand classification")
        if v.clause_a and not v.clause_b:
            problems.append("(a) holds but the window order fails")
        if not v.clause_a:
            real = [w for w in v.witnesses if _witness_breaks(w)]
            if not real:
                problems.append("(a) fails without a concrete witness position")
        row["problems"] = problems
        exceptions += len(problems)
        rows.append(row)
    return exceptions, rows


def _witness_breaks(w: dict) -> bool:
    if w["violates"] == "eta_C <= eta":
        return w["eta_C"] == 1 and w["eta"] == 0
    return w["eta_star"] == 1 and w["eta_C"] == 0


def criterion_8() -> Check:
    def run():
        bad, rows = divisibility_suite()
        return bad == 0, f"{len(rows)} pairs, {bad} exceptions", {"pairs": rows}
    return timed("criterion 8 divisibility equivalences", run)


def criterion_9(L: int = 10**6, burn_in: int = 1000) -> Check:
    def run():
        spec, grid = PrimeSquares(), [10, 100, 1000]
        ell = lower_density_sequence(spec, L, L, burn_in)
        disc = symbolic_discrepancy(spec, grid, ell)
        d_full = 1 - Fraction(6) / Fraction(math.pi**2)
        prof = davenport_erdos_profile(spec, grid)
        rows, ok = [], True
        vals = [float(e.value) for e in disc]
        ok &= all(a > b for a, b in zip(vals, vals[1:]))
        for e, (K, d) in zip(disc, prof.entries):
            pred = float(d_full - d.value)
            diff = float(e.value) - pred
            ok &= abs(diff) <= 0.005
            rows.append({"K": K, "discrepancy": float(e.value), "predicted": pred,
                         "difference": diff})
        return ok, "; ".join(f"K={r['K']}: {r['discrepancy']:.5f} vs {r['predicted']:.5f}"
                             for r in rows), {"entries": rows}
    return timed("criterion 9 discrepancy trend", run)


def criterion_10(pairs: int = 10_000, steps: int = 1000, seed: int = 10) -> Check:
    def run():
        checked, bad_hat = hat_relation_violations(np.random.default_rng(seed), pairs)
        bad_traj, count = 0, 0
        for name in SCENARIOS:
            cfg = scenario(name)
            b, reps = trajectory_checks(cfg.spec, cfg.K_grid, steps, 4, seed)
            bad_traj += b
            count += len(reps)
        return bad_hat == 0 and bad_traj == 0, (
            f"{checked} window pairs with {bad_hat} violations; {count} trajectories "
            f"of {steps} steps with {bad_traj} violations"), \
            {"pairs": checked, "hat_violations": bad_hat, "trajectory_violations": bad_traj}
    return timed("criterion 10 hat relation and commutation", run)


def criterion_11(scenario_name: str = "finite-23") -> Check:
    def run():
        import shutil
        import tempfile
        from .runner import compare_trees, run_subcommand
        with tempfile.TemporaryDirectory() as tmp:
            cfg = scenario(scenario_name, out=f"{tmp}/out")
            where = f"{tmp}/out/{scenario_name}/verify"
            kept = []
            for tag, threads in (("first", 1), ("repeat", 1), ("eight", 8)):
                run_subcommand("verify", cfg, threads=threads, echo=False)
                shutil.copytree(where, f"{tmp}/{tag}")
                kept.append(f"{tmp}/{tag}")
            same = compare_trees(kept[0], kept[1])
            threads_same = compare_trees(kept[0], kept[2])
        return not same and not threads_same, (
            f"repeat run differs in {len(same)} files; 1 vs 8 threads differ in "
            f"{len(threads_same)} files"), {"repeat": same, "threads": threads_same}
    return timed("criterion 11 determinism", run)


ACCEPTANCE: list[Callable[[], Check]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11,
]


def acceptance_suite(select: Sequence[int] | None = None) -> list[Check]:
    chosen = range(1, len(ACCEPTANCE) + 1) if select is None else select
    for i in chosen:
        if not 1 <= i <= len(ACCEPTANCE):
            raise InputError(f"no acceptance criterion {i}")
    return [ACCEPTANCE[i - 1]() for i in chosen]
