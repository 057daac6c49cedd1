"""Scenario library and run configuration.

A configuration is a set of ``key = value`` pairs grouped in sections
(INI) or the equivalent JSON object.  Unknown keys are rejected by name.
Precedence is command-line flags, then the config file, then the
scenario's own defaults, then the global defaults.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from .core import BSpec, parse_bspec
from .errors import InputError

SECTIONS = ("scenario", "parameters", "tolerances", "output")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "finite-23"
    family: str = "explicit:2,3"
    K: int = 1000
    K_prime: int | None = None
    L: int = 100_000
    K_grid: tuple[int, ...] = (10, 100, 1000)
    n_grid: tuple[int, ...] = (4, 8, 16, 24)
    burn_in: int = 1000
    taut_K: int = 100
    K_bound: int = 10
    seed: int = 12345
    samples: int = 100_000
    sample_K: int = 49
    sample_n: int = 4
    hat_pairs: int = 2000
    orbit_steps: int = 1000
    zero_tol: float = 0.01
    epsilon: str = "1/20"
    sigma: float = 3.0
    out: str = "out"

    @property
    def spec(self) -> BSpec:
        return parse_bspec(self.family)

    @property
    def eps(self) -> Fraction:
        return Fraction(self.epsilon)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["K_grid"] = list(self.K_grid)
        d["n_grid"] = list(self.n_grid)
        return d


_SECTION_OF = {
    "name": "scenario", "family": "scenario",
    "zero_tol": "tolerances", "epsilon": "tolerances", "sigma": "tolerances",
    "out": "output",
}
_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _int_list(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(",", " ").split())


def _coerce(key: str, value):
    if key in ("K_grid", "n_grid"):
        out = _int_list(value)
        if not out:
            raise InputError(f"config key {key!r}: empty list")
        return out
    if key == "K_prime":
        return None if value in (None, "", "none", "None") else int(value)
    default = _FIELDS[key].default
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def _check_values(cfg: ScenarioConfig) -> ScenarioConfig:
    for key in ("K", "L", "burn_in", "taut_K", "K_bound", "samples", "sample_K",
                "sample_n", "orbit_steps"):
        if getattr(cfg, key) < 1:
            raise InputError(f"config key {key!r} must be >= 1")
    if cfg.hat_pairs < 0:
        raise InputError("config key 'hat_pairs' must be >= 0")
    if list(cfg.K_grid) != sorted(set(cfg.K_grid)):
        raise InputError("config key 'K_grid' must be strictly increasing")
    if min(cfg.n_grid) < 1:
        raise InputError("config key 'n_grid' entries must be >= 1")
    try:
        cfg.spec
    except InputError as exc:
        raise InputError(f"config key 'family': {exc}") from None
    try:
        eps = cfg.eps
    except (ValueError, ZeroDivisionError):
        raise InputError(f"config key 'epsilon': bad fraction {cfg.epsilon!r}") from None
    if not 0 < eps < 1:
        raise InputError("config key 'epsilon' must lie in (0, 1)")
    return cfg


def apply(cfg: ScenarioConfig, values: dict) -> ScenarioConfig:
    """Overlay flat ``values`` on ``cfg``, rejecting unknown keys."""
    changes = {}
    for key, value in values.items():
        if key not in _FIELDS:
            raise InputError(f"unknown config key {key!r}")
        try:
            changes[key] = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"config key {key!r}: {exc}") from None
    return _check_values(replace(cfg, **changes))


def _flatten(tree: dict, origin: str) -> dict:
    flat = {}
    for key, value in tree.items():
        if isinstance(value, dict):
            if key not in SECTIONS:
                raise InputError(f"unknown config section {key!r} in {origin}")
            for k, v in value.items():
                flat[k] = v
        else:
            flat[key] = value
    return flat


def read_config(path: str | Path) -> dict:
    """Flat key/value mapping from an INI or JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            return _flatten(json.loads(text), str(path))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise InputError(f"{path}: {exc}") from None
    tree = {s: dict(parser[s]) for s in parser.sections()}
    return _flatten(tree, str(path))


def to_ini(cfg: ScenarioConfig) -> str:
    """The configuration as INI text, readable by :func:`read_config`."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for s in SECTIONS:
        parser[s] = {}
    for key, value in cfg.as_dict().items():
        sec = _SECTION_OF.get(key, "parameters")
        if isinstance(value, list):
            value = ",".join(map(str, value))
        parser[sec][key] = "none" if value is None else str(value)
    lines = []
    for s in SECTIONS:
        lines.append(f"[{s}]")
        lines += [f"{k} = {v}" for k, v in parser[s].items()]
        lines.append("")
    return "\n".join(lines)


# ------------------------------------------------------------ library

SCENARIOS: dict[str, dict] = {
    "finite-23": {"family": "explicit:2,3", "K": 100, "L": 100_000,
                  "K_grid": (2, 3, 10), "n_grid": (4, 8, 16, 32)},
    "prime-squares": {"family": "prime-squares", "K": 10_000_000, "L": 10_000_000,
                      "K_grid": (10, 100, 1000), "n_grid": (8, 12, 16, 20, 24)},
    "scaled-primes-2": {"family": "scaled-primes:2", "K": 1_000_000, "L": 1_000_000,
                        "K_grid": (10, 100, 1000), "n_grid": (8, 12, 16, 20, 24)},
    "two-primes-plus-9": {"family": "scaled-primes:2+explicit:9", "K": 1_000_000,
                          "L": 1_000_000, "K_grid": (10, 100, 1000),
                          "n_grid": (8, 12, 16, 20, 24)},
    "star-29": {"family": "scaled-primes:2+scaled-primes:9", "K": 1_000_000,
                "L": 1_000_000, "K_grid": (10, 100, 1000), "n_grid": (8, 12, 16, 20, 24)},
}


def scenario(name: str, **overrides) -> ScenarioConfig:
    if name not in SCENARIOS:
        raise InputError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return apply(ScenarioConfig(), {"name": name, **SCENARIOS[name], **overrides})


def load(name: str | None = None, path: str | Path | None = None,
         flags: dict | None = None) -> ScenarioConfig:
    """Resolve the effective configuration.

    The scenario name comes from the flags, else the file, else the
    default.  Scenario defaults are applied first, then the file, then
    the flags.  A name given as a flag must be a bundled scenario; a
    config file may name its own run.
    """
    if name is not None and name not in SCENARIOS:
        scenario(name)
    from_file = read_config(path) if path is not None else {}
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    chosen = name or flags.pop("name", None) or from_file.get("name") or ScenarioConfig.name
    base = scenario(chosen) if chosen in SCENARIOS else apply(ScenarioConfig(), {"name": chosen})
    return replace(apply(apply(base, from_file), flags), name=chosen)
