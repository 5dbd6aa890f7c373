"""Run configuration and its TOML file format.

A config file looks like::

    experiment = "scatter"
    seed = 0
    output = "runs"

    [grid]
    n = 1
    N = 4096
    L = 256.0

    [physics]
    kappa = 13.0
    omega = -1.0
    s = 0.0

    [solver]
    dt = 0.01
    tol = 1e-10
    nodes = 256
    M_max = 50

    [sweep]
    eps = []
    nu = []
    lam = []
    T = [2.0, 4.0, 8.0]

    [params]
    amp = 0.01

Keys missing from a file fall back to the experiment's defaults.  Unknown
keys are rejected.
"""
from __future__ import annotations

import copy
import hashlib
import json
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from ..errors import ConfigError
from ..spectral import GridSpec

FORMAT_VERSION = 1

_LAYOUT = {
    "grid": ("n", "N", "L"),
    "physics": ("kappa", "omega", "s"),
    "solver": ("dt", "tol", "nodes", "M_max"),
    "sweep": ("eps", "nu", "lam", "T"),
}
_TOP = ("experiment", "seed", "output")
_TYPES = {"n": int, "N": int, "L": float, "kappa": float, "omega": float, "s": float,
          "dt": float, "tol": float, "nodes": int, "M_max": int, "seed": int}
_SWEEPS = _LAYOUT["sweep"]


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    n: int = 1
    N: int = 256
    L: float = 40.0
    kappa: float = 3.0
    omega: float = -1.0
    s: float = 1.0
    dt: float = 1e-3
    tol: float = 1e-10
    nodes: int = 256
    M_max: int = 50
    eps: Tuple[float, ...] = ()
    nu: Tuple[float, ...] = ()
    lam: Tuple[float, ...] = ()
    T: Tuple[float, ...] = ()
    seed: int = 0
    output: str = "runs"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name, typ in _TYPES.items():
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{name} must be numeric, got {val!r}", f"{name} numeric")
            if typ is int and int(val) != val:
                raise ConfigError(f"{name} must be an integer, got {val!r}", f"{name} integer")
            object.__setattr__(self, name, typ(val))
        for name in _SWEEPS:
            try:
                object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"sweep {name} must be a list of numbers", f"{name} list") from exc
        for k, v in self.params.items():
            if not isinstance(v, (bool, int, float, str)):
                raise ConfigError(f"param {k} must be a scalar, got {v!r}", "scalar params")

    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.N, self.L)

    def param(self, key, default=None):
        return self.params.get(key, default)

    def with_updates(self, **kw):
        params = dict(self.params)
        params.update(kw.pop("params", {}))
        return replace(self, params=params, **kw)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in _TOP}
        for sec, keys in _LAYOUT.items():
            out[sec] = {k: list(getattr(self, k)) if k in _SWEEPS else getattr(self, k) for k in keys}
        out["params"] = dict(sorted(self.params.items()))
        return out

    @classmethod
    def from_dict(cls, d: dict, base: "RunConfig" = None) -> "RunConfig":
        d = copy.deepcopy(d)
        if "experiment" not in d and base is None:
            raise ConfigError("config lacks 'experiment'", "experiment given")
        kw = {}
        params = {}
        for key, val in d.items():
            if key in _TOP:
                kw[key] = val
            elif key in _LAYOUT:
                if not isinstance(val, dict):
                    raise ConfigError(f"[{key}] must be a table")
                for sub, v in val.items():
                    if sub not in _LAYOUT[key]:
                        raise ConfigError(f"unknown key {key}.{sub}", f"keys of [{key}]: {_LAYOUT[key]}")
                    kw[sub] = v
            elif key == "params":
                if not isinstance(val, dict):
                    raise ConfigError("[params] must be a table")
                params = val
            else:
                raise ConfigError(f"unknown top-level key {key!r}")
        if base is not None and kw.get("experiment", base.experiment) == base.experiment:
            return base.with_updates(params=params, **kw)
        return cls(params=params, **kw)

    def canonical(self) -> str:
        d = self.to_dict()
        d.pop("output")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def dump(self, path):
        with open(path, "wb") as fh:
            tomli_w.dump(self.to_dict(), fh)


def loads(text: str, defaults=None) -> RunConfig:
    """Parse TOML text; ``defaults`` maps an experiment tag to its base config."""
    try:
        d = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", "TOML syntax") from exc
    base = None
    if defaults is not None and "experiment" in d:
        base = defaults(d["experiment"])
    return RunConfig.from_dict(d, base)


def load(path, defaults=None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), defaults)


def config_fields():
    return [f.name for f in fields(RunConfig)]
