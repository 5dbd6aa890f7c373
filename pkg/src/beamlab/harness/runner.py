"""Dispatch a config to its experiment and persist the results.

Each run writes into ``<output>/<experiment>-<hash>/``:

* ``report.json``: config echo, results, format version.  Byte-identical for
  identical configs.
* ``series.csv``: the tabular series (RFC 4180, CRLF line endings).
* ``config.toml``: the resolved config, loadable with ``beamlab run --config``.
* ``snapshots/*.bin``: optional fields in the binary snapshot format.
* ``timing.json``: wall-clock seconds (kept apart so the report stays deterministic).
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..spectral import write_snapshot
from .config import FORMAT_VERSION, RunConfig
from .experiments import REGISTRY, default_config


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become the strings ``"nan"``, ``"inf"``, ``"-inf"``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def series_csv(rows) -> str:
    if not rows:
        return ""
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in cols])
    return buf.getvalue()


def _cell(v):
    v = to_jsonable(v)
    if isinstance(v, float):
        return repr(v)
    return v


@dataclass
class ExperimentReport:
    config: RunConfig
    results: dict
    series: list = field(default_factory=list)
    wall_clock: float = 0.0
    run_dir: Optional[Path] = None

    @property
    def config_hash(self):
        return self.config.config_hash()

    def as_dict(self):
        return {"format_version": FORMAT_VERSION, "experiment": self.config.experiment,
                "config_hash": self.config_hash, "config": self.config.to_dict(),
                "results": self.results}

    def to_json(self):
        return dumps_json(self.as_dict())


def run(cfg: RunConfig, write: bool = True, output: Optional[str] = None) -> ExperimentReport:
    """Validate ``cfg``, run its experiment and (optionally) persist the outputs."""
    default_config(cfg.experiment)
    exp = REGISTRY[cfg.experiment]
    if exp.uses_grid:
        cfg.grid()
    start = time.perf_counter()
    outcome = exp.runner(cfg)
    elapsed = time.perf_counter() - start
    report = ExperimentReport(cfg, outcome.results, outcome.series, elapsed)
    if write:
        root = Path(output if output is not None else cfg.output)
        run_dir = root / f"{cfg.experiment}-{cfg.config_hash()}"
        os.makedirs(run_dir, exist_ok=True)
        (run_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
        with open(run_dir / "series.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(series_csv(outcome.series))
        cfg.dump(run_dir / "config.toml")
        (run_dir / "timing.json").write_text(dumps_json({"wall_clock_s": elapsed}), encoding="utf-8")
        if outcome.snapshots:
            snap = run_dir / "snapshots"
            os.makedirs(snap, exist_ok=True)
            for name, f in sorted(outcome.snapshots.items()):
                write_snapshot(snap / f"{name}.bin", f)
        report.run_dir = run_dir
    return report
