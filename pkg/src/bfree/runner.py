"""Subcommand bodies and report persistence.

Every report file embeds the effective configuration.  Timestamps,
durations, versions and the thread count go to ``metadata.json`` only, so
that the other files are byte-identical between runs of the same
configuration.
"""

from __future__ import annotations

import filecmp
import json
import logging
import platform
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import eta_window, truncate
from .density import (davenport_erdos_profile, logarithmic_density_estimate,
                      lower_density_sequence, upper_density_estimate)
from .entropy import entropy_gap_report
from .errors import BFreeError, LcmOverflowError
from .measures import (PERIOD_CAP, max_entropy_sampler, mirsky_exact, pair_joining_freq,
                       quasi_generic_freq)
from .scenarios import ScenarioConfig, to_ini
from .structure import behrend_gauge, bprime_approx, default_bstar, taut_check
from .toeplitz import (per_positions, regularity_profile, sandwich_check, star_lcm,
                       symbolic_discrepancy)
from .verification import scenario_suite

log = logging.getLogger("bfree")

SUBCOMMANDS = ("sieve", "density", "structure", "toeplitz", "entropy", "measures",
               "verify", "report")
TAUT_SIZE = 200


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (set, tuple)):
        return sorted(obj) if isinstance(obj, set) else list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class Bundle:
    """Files of one subcommand run under ``out/<scenario>/<subcommand>``."""

    def __init__(self, cfg: ScenarioConfig, sub: str):
        self.cfg = cfg
        self.dir = Path(cfg.out) / cfg.name / sub
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def _header(self) -> str:
        return "# config: " + json.dumps(self.cfg.as_dict(), sort_keys=True) + "\n"

    def json(self, name: str, payload: dict):
        doc = {"config": self.cfg.as_dict(), **payload}
        self._write(name, json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def csv(self, name: str, text: str):
        self._write(name, self._header() + text)

    def text(self, name: str, text: str):
        self._write(name, self._header() + text)

    def _write(self, name: str, text: str):
        (self.dir / name).write_text(text)
        self.files.append(name)

    def metadata(self, started: datetime, seconds: float, threads: int, extra: dict | None = None):
        meta = {"started": started.isoformat(), "seconds": round(seconds, 3),
                "threads": threads, "python": platform.python_version(),
                "numpy": np.__version__, "files": sorted(self.files)}
        if extra:
            meta.update(extra)
        (self.dir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------- subcommands


def do_sieve(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    trunc = truncate(cfg.spec, cfg.K)
    w = eta_window(trunc, 1, cfg.L, strict=False, threads=threads)
    (b.dir / "eta.bin").write_bytes(w.to_bytes())
    b.files.append("eta.bin")
    b.json("sieve.json", {
        "window": {"offset": w.offset, "length": len(w), "tag": w.tag},
        "truncation": {"K": trunc.K, "size": len(trunc), "complete": trunc.complete,
                       "lcm": trunc.lcm, "lcm_overflowed": trunc.overflowed},
        "free_count": int(w.bits.sum()),
        "head": str(w.segment(1, min(200, len(w))))})
    log.info("sieved [1, %d]: %d free positions (%s)", cfg.L, int(w.bits.sum()), w.tag)
    return 0


def do_density(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    spec = cfg.spec
    series = davenport_erdos_profile(spec, cfg.K_grid)
    level = max(cfg.K, cfg.L)
    burn = min(cfg.burn_in, cfg.L)
    ell = lower_density_sequence(spec, level, cfg.L, burn, threads)
    payload = {"davenport_erdos": series.as_dict(), "ell_sequence": ell.as_dict()}
    if cfg.L >= 2:
        payload["log_density_estimate"] = round(logarithmic_density_estimate(spec, level, cfg.L), 12)
    up = upper_density_estimate(spec, level, cfg.L, burn, threads)
    payload["upper_density_free_estimate"] = {"value": str(up), "float": float(up)}
    b.csv("density_profile.csv", series.to_csv())
    b.csv("ell_sequence.csv", ell.to_csv())
    b.json("density.json", payload)
    for K, e in series.entries:
        log.info("K=%d d(M_B_K) in [%s, %s] (%s)", K, e.lower, e.upper, e.method)
    return 0


def do_structure(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    spec = cfg.spec
    K_top = max(cfg.K_grid)
    taut_K = cfg.taut_K
    if len(truncate(spec, taut_K)) > TAUT_SIZE:
        taut_K = max(k for k in range(1, taut_K + 1) if len(truncate(spec, k)) <= TAUT_SIZE)
    taut = taut_check(spec, taut_K)
    gauge = behrend_gauge(spec, cfg.K_grid, cfg.eps)
    star = default_bstar(spec, K_top, cfg.K_prime)
    prime = bprime_approx(spec, cfg.K, epsilon=cfg.eps)
    b.json("structure.json", {"taut": taut.as_dict(), "behrend": gauge.as_dict(),
                              "bstar": star.as_dict(), "bprime": prime.as_dict()})
    log.info("taut at K=%d: %s; B* ~ %s; B' found %d scales", taut_K, taut.overall,
             list(star.result.elements[:10]), len(prime.found_C))
    return 0


def do_toeplitz(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    spec = cfg.spec
    star = default_bstar(spec, max(cfg.K_grid), cfg.K_prime)
    payload: dict = {"bstar": list(star.result.elements[:50])}
    try:
        reg = regularity_profile(star, cfg.K_grid, cfg.K_prime)
        payload["regularity"] = [{"K": r.K, "s": r.s, "aperiodic": str(r.aperiodic)}
                                 for r in reg]
        b.csv("regularity.csv", "K,s,aperiodic\n" +
              "".join(f"{r.K},{r.s},{r.aperiodic}\n" for r in reg))
    except LcmOverflowError as exc:
        payload["regularity"] = {"error": str(exc)}
    payload["sandwich"] = [sandwich_check(spec, K, 1, cfg.L, bstar=star,
                                          K_prime=cfg.K_prime).as_dict() for K in cfg.K_grid]
    try:
        s = star_lcm(star.result, max(cfg.K_grid))
        span = min(s, 10_000) if s > 1 else min(cfg.L, 10_000)
        cls = per_positions(star, s, 0, span, cfg.K_prime)
        b.text("per.txt", cls.to_text())
        if log.isEnabledFor(logging.DEBUG):
            log.debug("certification mask %s", cls.to_text().splitlines()[1][:400])
    except LcmOverflowError as exc:
        payload["per"] = {"error": str(exc)}
    ell = lower_density_sequence(spec, max(cfg.K, cfg.L), cfg.L, min(cfg.burn_in, cfg.L), threads)
    disc = symbolic_discrepancy(spec, cfg.K_grid, ell, bstar=star, K_prime=cfg.K_prime)
    payload["discrepancy"] = [{"K": d.K, "value": str(d.value), "float": float(d.value),
                               "lower_side": str(d.lower_side), "upper_side": str(d.upper_side)}
                              for d in disc]
    b.json("toeplitz.json", payload)
    return 0


def do_entropy(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    star = default_bstar(cfg.spec, cfg.L, cfg.K_prime)
    rep = entropy_gap_report(cfg.spec, cfg.L, cfg.n_grid, K_bound=cfg.K_bound,
                           burn_in=cfg.burn_in, zero_tol=cfg.zero_tol, bstar=star,
                           threads=threads)
    b.csv("entropy_profile.csv", rep.profile.to_csv())
    b.json("entropy_gap.json", rep.as_dict())
    log.info("h estimate %.4f at n=%d; predicted %.4f; zero-entropy flag %s",
             rep.h_est, rep.n_est, rep.h_pred, rep.zero_entropy_flag)
    return 0


def _table_csv(table) -> str:
    rows = ["word,count,frequency"]
    rows += [f"{w},{table.counts[w]},{table.freq(w)}" for w in sorted(table.counts)]
    return "\n".join(rows) + "\n"


def do_measures(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    spec, n = cfg.spec, cfg.sample_n
    payload: dict = {}
    trunc = truncate(spec, cfg.K)
    if trunc.complete and trunc.lcm is not None and trunc.lcm <= PERIOD_CAP:
        mirsky = mirsky_exact(trunc, n)
    else:
        level = max(cfg.K, cfg.L)
        ell = lower_density_sequence(spec, level, cfg.L - n, min(cfg.burn_in, cfg.L - n), threads)
        mirsky = quasi_generic_freq(spec, level, ell, n)
    payload["mirsky"] = mirsky.as_dict()
    b.csv("mirsky.csv", _table_csv(mirsky))
    star = default_bstar(spec, cfg.sample_K, cfg.K_prime)
    sample = max_entropy_sampler(spec, cfg.sample_K, cfg.L, n, cfg.samples, cfg.seed,
                                 bstar=star, threads=threads)
    payload["sampler"] = sample.as_dict()
    b.csv("sampler.csv", _table_csv(sample))
    try:
        ell = lower_density_sequence(spec, max(cfg.K, cfg.L), cfg.L - n,
                                     min(cfg.burn_in, cfg.L - n), threads)
        joint = pair_joining_freq(spec, max(cfg.K, cfg.L), ell, n,
                                  bstar=default_bstar(spec, max(cfg.K_grid), cfg.K_prime))
        payload["joining"] = joint.as_dict()
    except BFreeError as exc:
        payload["joining"] = {"error": str(exc)}
    b.json("measures.json", payload)
    log.info("sampler 1-frequency %.5f over %d samples", float(sample.one_frequency()),
             cfg.samples)
    return 0


def do_verify(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    checks = scenario_suite(cfg, threads=threads)
    lines = [c.line() for c in checks]
    if b.echo:
        for line in lines:
            print(line)
    failed = sum(not c.passed for c in checks)
    b.json("verify.json", {"checks": [c.as_dict() for c in checks], "failed": failed})
    b.text("verify.txt", "\n".join(lines) + "\n")
    b.timings = {c.name: round(c.seconds, 3) for c in checks}
    return 1 if failed else 0


def do_report(cfg: ScenarioConfig, b: Bundle, threads: int) -> int:
    status, parts = 0, {}
    for sub in SUBCOMMANDS[:-1]:
        code = run_subcommand(sub, cfg, threads=threads, echo=b.echo)
        status = max(status, code)
        parts[sub] = {"exit": code,
                      "files": sorted(p.name for p in (Path(cfg.out) / cfg.name / sub).iterdir()
                                      if p.name != "metadata.json")}
    summary = _summary(cfg)
    b.text("summary.txt", summary)
    b.json("index.json", {"parts": parts})
    if b.echo:
        print(summary, end="")
    return status


def _load(cfg: ScenarioConfig, sub: str, name: str) -> dict:
    return json.loads((Path(cfg.out) / cfg.name / sub / name).read_text())


def _summary(cfg: ScenarioConfig) -> str:
    lines = [f"scenario {cfg.name}: B = {cfg.family}", ""]
    d = _load(cfg, "density", "density.json")
    for e in d["davenport_erdos"]["entries"]:
        lines.append(f"  d(M_B_K) at K={e['K']}: {e['float']:.6f} ({e['method']})")
    lines.append(f"  lower density along l_i: {d['ell_sequence']['final_ratio_float']:.6f}")
    s = _load(cfg, "structure", "structure.json")
    lines.append(f"  tautness: {s['taut']['overall']}; Behrend gauge: {s['behrend']['label']}")
    lines.append(f"  B* approximation: {s['bstar']['result'][:10]}")
    e = _load(cfg, "entropy", "entropy_gap.json")
    lines.append(f"  entropy estimate {e['h_estimate']:.4f} at n={e['h_estimate_n']}, "
                 f"density prediction {e['h_predicted']:.4f}, "
                 f"zero-entropy flag {e['zero_entropy_flag']}, bounds hold {e['bounds_hold']}")
    m = _load(cfg, "measures", "measures.json")
    lines.append(f"  sampled 1-frequency: {m['sampler']['one_frequency_float']:.5f}")
    v = _load(cfg, "verify", "verify.json")
    for c in v["checks"]:
        lines.append(f"  {'PASS' if c['passed'] else 'FAIL'} {c['name']}")
    return "\n".join(lines) + "\n"


HANDLERS = {"sieve": do_sieve, "density": do_density, "structure": do_structure,
            "toeplitz": do_toeplitz, "entropy": do_entropy, "measures": do_measures,
            "verify": do_verify, "report": do_report}


def run_subcommand(sub: str, cfg: ScenarioConfig, threads: int = 1, echo: bool = True) -> int:
    """Run one subcommand; returns its exit status.  ``echo`` prints results to stdout."""
    if sub not in HANDLERS:
        raise ValueError(f"unknown subcommand {sub!r}")
    b = Bundle(cfg, sub)
    b.echo = echo
    (b.dir / "config.ini").write_text(to_ini(cfg))
    b.files.append("config.ini")
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    log.info("%s on %s", sub, cfg.name)
    code = HANDLERS[sub](cfg, b, threads)
    b.metadata(started, time.perf_counter() - t0, threads,
               {"timings": getattr(b, "timings", {})})
    return code


def compare_trees(left: str | Path, right: str | Path) -> list[str]:
    """Names of files that differ between two report directories, metadata excluded."""
    left, right = Path(left), Path(right)
    names = {p.name for p in left.iterdir()} | {p.name for p in right.iterdir()}
    names.discard("metadata.json")
    out = []
    for name in sorted(names):
        a, b = left / name, right / name
        if not (a.exists() and b.exists() and filecmp.cmp(a, b, shallow=False)):
            out.append(name)
    return out
