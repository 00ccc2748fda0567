"""Structured-text (TOML) configuration: worlds, learners, experiments.

Numbers may be written exactly as fraction strings ("3/8") or as plain
ints/floats; fraction strings keep exact-rational enumeration available.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .worlds import LearnerSpec, OutcomeSpace, RowKernel, WorldSpec

__all__ = [
    "parse_scalar",
    "load_toml",
    "load_world_file",
    "LoadedWorld",
    "bundled_world_paths",
    "ExperimentConfig",
    "config_digest",
]

DATA_DIR = Path(__file__).parent / "data" / "worlds"


def parse_scalar(value):
    """Fraction strings become Fractions; ints and floats pass through."""
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad numeric literal {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}")
    return value


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _split_key(key: str, what: str) -> tuple:
    parts = key.split("|")
    if len(parts) != 2:
        raise ConfigError(f"{what} key {key!r} must look like 'left|right'")
    return tuple(parts)


@dataclass(frozen=True)
class LoadedWorld:
    name: str
    world: WorldSpec
    learner: LearnerSpec
    n: int
    exact_ok: bool


def _parse_pair_table(raw: dict, what: str) -> dict:
    return {_split_key(k, what): parse_scalar(v) for k, v in raw.items()}


def load_world_file(path) -> LoadedWorld:
    """Load a (world, learner, horizon) bundle from one TOML file."""
    doc = load_toml(path)
    try:
        wsec = doc["world"]
        lsec = doc["learner"]
        atoms = tuple(wsec["atoms"])
        n = int(wsec["n"])
        default = _parse_pair_table(wsec["pair_table"], "pair_table")
        space = OutcomeSpace(atoms=atoms)

        states = tuple(lsec["states"])
        init = lsec["init"]
        if init not in states:
            raise ConfigError(f"init state {init!r} not among states")
        update_table = {}
        for key, val in lsec["update"].items():
            prev, z = _split_key(key, "update")
            if isinstance(val, dict):
                update_table[(prev, z)] = {w: parse_scalar(p)
                                           for w, p in val.items()}
            else:
                update_table[(prev, z)] = {val: Fraction(1)}
        loss_table = {_split_key(k, "loss"): parse_scalar(v)
                      for k, v in lsec["loss"].items()}

        wsec_by_last = wsec.get("pair_table_by_last", {})
        weight_cfg = lsec.get("weight", {"kind": "one"})
        kind = weight_cfg.get("kind", "one")
        if kind == "one":
            weight = lambda t, hist: Fraction(1)
        elif kind == "constant":
            c = parse_scalar(weight_cfg["value"])
            weight = lambda t, hist: c
        elif kind == "per_round":
            cs = [parse_scalar(v) for v in weight_cfg["per_round"]]
            if len(cs) < n:
                raise ConfigError("per_round weights shorter than horizon")
            weight = lambda t, hist: cs[t - 1]
        else:
            raise ConfigError(f"unknown weight kind {kind!r}")

        learner = LearnerSpec(
            states=states,
            update=None,
            loss=lambda w, z: loss_table[(w, z)],
            weight=weight,
        )
        learner.update = lambda hist, z, _s=learner: \
            update_table[(_s.last(hist, "w", init), z)]

        tables = {z: _parse_pair_table(tab, f"pair_table_by_last.{z}")
                  for z, tab in wsec_by_last.items()}
        key_fn = None
        if tables:
            key_fn = lambda hist, _s=learner: _s.last(hist, "z")
        kernel = RowKernel(
            default, tables=tables, key_fn=key_fn,
            exchangeable=bool(wsec.get("exchangeable", False)),
            conditional_product=bool(wsec.get("conditional_product", False)))

        exact_ok = all(
            isinstance(v, (Fraction, int))
            for table in [default, *tables.values(), loss_table]
            for v in table.values())
        name = doc.get("name", Path(path).stem)
        return LoadedWorld(name=name, world=WorldSpec(space, kernel),
                           learner=learner, n=n, exact_ok=exact_ok)
    except KeyError as exc:
        raise ConfigError(f"{path}: missing required key {exc}") from exc


def bundled_world_paths() -> list:
    return sorted(DATA_DIR.glob("*.toml"))


@dataclass
class ExperimentConfig:
    """Resolved run configuration (CLI flags override file values)."""

    kind: str
    seed: int = 0
    seeds: int = 1000
    horizon: int = 10 ** 4
    worlds: int = 200
    tolerance: float = 1e-10
    out: str = "out"
    parallel: int = 1
    schedule: str = "default"
    bandit_means: tuple = (0.9, 0.5)
    world_files: tuple = ()
    selector_bias: float | None = None
    replay: int | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, kind: str, path=None, **overrides):
        doc = load_toml(path) if path else {}
        merged = dict(doc.get("experiment", {}))
        merged.update({k: v for k, v in overrides.items() if v is not None})
        if "bandit" in doc:
            means = doc["bandit"].get("means")
            if means and "bandit_means" not in overrides:
                merged["bandit_means"] = tuple(float(m) for m in means)
        allowed = {f for f in cls.__dataclass_fields__ if f not in ("kind",)}
        unknown = set(merged) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(kind=kind, **merged)


def config_digest(config: ExperimentConfig) -> str:
    payload = {k: (list(v) if isinstance(v, tuple) else v)
               for k, v in vars(config).items() if k != "extra"}
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
