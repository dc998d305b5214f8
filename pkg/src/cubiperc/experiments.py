"""Monte-Carlo sweeps over window sizes and coloring probabilities.

Each (L, p, iterate) triple is an independent task with its own seed,
``derive_seed(master, d, L, p_index, iterate)``; with coupling on, all ``p``
of one (L, iterate) threshold the same field seeded by
``derive_seed(master, d, L, iterate)``.  Results are stored per task and
merged by key, so output does not depend on how tasks were scheduled.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .clusters import component_table, format_key, key_betti, parse_key
from .complex import MODES
from .errors import DomainError, FitError, SizeError
from .lattice import derive_seed, sample_coloring, sample_coupling_field, threshold
from .measures import COUNTING_RULES, TailCurve, fit_tail_decay

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "d", "L", "p", "mode", "key", "count",
    "a_mean", "a_stderr", "c100_mean", "c100_stderr",
]
TAIL_COLUMNS = ["d", "L", "p", "mode", "k", "n", "count", "mass"]
BUNDLE_FORMAT = "cubiperc-sweep"


def p_mesh(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic mesh, rounded to kill accumulated float error."""
    if step <= 0:
        raise DomainError("mesh step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(max(n, 0))]


@dataclass
class SweepConfig:
    d: int = 2
    L: list = field(default_factory=lambda: [250])
    p: list = field(default_factory=lambda: [0.25, 0.40, 0.55, 0.70, 0.85])
    iterates: int = 20
    seed: int = 0
    mode: str = "closed"
    counting: str = "N"
    k_max: int = 10
    n_max: int = 20
    coupling: bool = False
    threads: int = 1
    out_csv: str | None = None
    out_json: str | None = None

    def validate(self) -> "SweepConfig":
        if self.d not in (2, 3, 4):
            raise DomainError(f"d must be 2, 3 or 4, got {self.d}")
        if not self.L or any(int(L) < 1 for L in self.L):
            raise SizeError(f"window sides must be >= 1, got {self.L}")
        if not self.p:
            raise DomainError("probability mesh is empty")
        for p in self.p:
            if not 0.0 <= float(p) <= 1.0:
                raise DomainError(f"probability {p} lies outside [0, 1]")
        if self.iterates < 1:
            raise DomainError(f"iterates must be >= 1, got {self.iterates}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "closed" and self.d > 3:
            raise DomainError("closed mode supports d <= 3")
        if self.counting not in COUNTING_RULES:
            raise DomainError(f"counting must be one of {COUNTING_RULES}, got {self.counting!r}")
        if self.k_max < 0 or self.n_max < 1:
            raise DomainError("k_max must be >= 0 and n_max >= 1")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")
        self.L = [int(L) for L in self.L]
        self.p = [float(p) for p in self.p]
        return self

    def echo(self) -> dict:
        """Everything that determines the results (paths and threads excluded)."""
        out = asdict(self)
        for k in ("threads", "out_csv", "out_json"):
            out.pop(k)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepConfig":
        names = set(cls.__dataclass_fields__)
        unknown = set(obj) - names
        if unknown:
            raise DomainError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class IterateRecord:
    counts: dict
    b0: int
    black: int
    components: int
    seed: int
    error: str | None = None


def _run_task(task) -> IterateRecord:
    d, L, p, mode, counting, seed, coupled = task
    try:
        dims = (L,) * d
        origin = tuple(-(L // 2) for _ in range(d))
        if coupled:
            grid = threshold(sample_coupling_field(dims, origin, seed), p)
        else:
            grid = sample_coloring(dims, origin, p, seed)
        table = component_table(grid, mode)
        counts = table.key_counts(include_boundary=(counting == "Nstar"))
        return IterateRecord(counts, sum(counts.values()), grid.black_count, table.count, seed)
    except Exception as exc:  # recorded per task; the sweep carries on
        return IterateRecord({}, 0, 0, 0, seed, f"{type(exc).__name__}: {exc}")


def _mean_se(values) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, math.nan
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


@dataclass
class SweepCell:
    d: int
    L: int
    p: float
    records: list

    @property
    def ok_records(self) -> list:
        return [r for r in self.records if r.error is None]

    @property
    def volume(self) -> int:
        return self.L**self.d

    def total_counts(self) -> dict:
        out: dict = {}
        for r in self.ok_records:
            for k, v in r.counts.items():
                out[k] = out.get(k, 0) + v
        return out

    def total_b0(self) -> int:
        return sum(r.b0 for r in self.ok_records)

    def undefined_iterates(self) -> int:
        return sum(1 for r in self.ok_records if r.b0 == 0)

    def c100(self, key) -> tuple[float, float]:
        return _mean_se([100.0 * r.counts.get(key, 0) / self.volume for r in self.ok_records])

    def a(self, key) -> tuple[float, float]:
        return _mean_se([r.counts.get(key, 0) / r.b0 for r in self.ok_records if r.b0 > 0])

    def tail(self, k: int, n_max: int) -> TailCurve | None:
        """Tail masses of the iterate-pooled measure; None if it is undefined."""
        b0 = self.total_b0()
        if b0 == 0:
            return None
        counts = self.total_counts()
        pts, hits = [], []
        for n in range(1, n_max + 1):
            hit = sum(v for key, v in counts.items() if key_betti(key, k) >= n)
            pts.append((n, hit / b0))
            hits.append(hit)
        meta = {"L": self.L, "p": self.p, "iterates": len(self.ok_records)}
        return TailCurve(k, self.d, tuple(pts), meta, tuple(hits))


@dataclass
class SweepResult:
    config: SweepConfig
    cells: list
    elapsed: float = 0.0

    def cell(self, L: int, p: float) -> SweepCell:
        for c in self.cells:
            if c.L == L and math.isclose(c.p, p, abs_tol=1e-12):
                return c
        raise KeyError((L, p))

    def failures(self) -> list[tuple[int, float, str]]:
        return [(c.L, c.p, r.error) for c in self.cells for r in c.records if r.error]

    def keys(self) -> list:
        if self.config.d == 2:
            return list(range(self.config.k_max + 1))
        seen = set()
        for c in self.cells:
            seen.update(c.total_counts())
        return sorted(seen)


def build_tasks(config: SweepConfig) -> list[tuple]:
    tasks = []
    for L in config.L:
        for pi, p in enumerate(config.p):
            for it in range(config.iterates):
                if config.coupling:
                    seed = derive_seed(config.seed, config.d, L, it)
                else:
                    seed = derive_seed(config.seed, config.d, L, pi, it)
                tasks.append((config.d, L, p, config.mode, config.counting, seed, config.coupling))
    return tasks


def run_sweep(config: SweepConfig) -> SweepResult:
    config.validate()
    tasks = build_tasks(config)
    start = time.perf_counter()
    if config.threads > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * config.threads))
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=chunk))
    else:
        records = [_run_task(t) for t in tasks]
    cells = []
    i = 0
    for L in config.L:
        for p in config.p:
            cells.append(SweepCell(config.d, L, p, records[i : i + config.iterates]))
            i += config.iterates
    result = SweepResult(config, cells, time.perf_counter() - start)
    for L, p, err in result.failures():
        log.warning("task failed at L=%d p=%g: %s", L, p, err)
    return result


@dataclass(frozen=True)
class OptimalProbability:
    k: object
    p: float
    count: int
    ties: tuple


def optimal_probability(result: SweepResult, key, L: int | None = None) -> OptimalProbability | None:
    """Mesh point maximizing the pooled count of ``key``; ties go to the smaller p.

    Returns None when the key was never observed.
    """
    L = result.config.L[0] if L is None else L
    cells = sorted((c for c in result.cells if c.L == L), key=lambda c: c.p)
    if len(cells) < 3:
        raise DomainError("need a mesh of at least 3 probabilities")
    counts = [c.total_counts().get(key, 0) for c in cells]
    best = max(counts)
    if best == 0:
        return None
    ties = tuple(c.p for c, n in zip(cells, counts) if n == best)
    return OptimalProbability(key, ties[0], best, ties)


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(x, ".6g")


def _num(x: float):
    if x is None or math.isnan(x):
        return None
    return float(format(x, ".6g"))


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    cfg = result.config
    for c in result.cells:
        totals = c.total_counts()
        for key in result.keys():
            a_m, a_s = c.a(key)
            c_m, c_s = c.c100(key)
            w.writerow([
                cfg.d, c.L, _fmt(c.p), cfg.mode, format_key(key), totals.get(key, 0),
                _fmt(a_m), _fmt(a_s), _fmt(c_m), _fmt(c_s),
            ])
    return buf.getvalue()


def tails_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TAIL_COLUMNS)
    cfg = result.config
    for c in result.cells:
        for k in range(1, cfg.d):
            curve = c.tail(k, cfg.n_max)
            if curve is None:
                continue
            for (n, mass), hit in zip(curve.points, curve.counts):
                w.writerow([cfg.d, c.L, _fmt(c.p), cfg.mode, k, n, hit, _fmt(mass)])
    return buf.getvalue()


def bundle(result: SweepResult) -> dict:
    cfg = result.config
    cells = []
    for c in result.cells:
        summary = []
        for key in result.keys():
            a_m, a_s = c.a(key)
            c_m, c_s = c.c100(key)
            summary.append({
                "key": format_key(key), "count": c.total_counts().get(key, 0),
                "a_mean": _num(a_m), "a_stderr": _num(a_s),
                "c100_mean": _num(c_m), "c100_stderr": _num(c_s),
            })
        tails = {}
        for k in range(1, cfg.d):
            curve = c.tail(k, cfg.n_max)
            if curve is not None:
                tails[str(k)] = [_num(m) for _, m in curve.points]
        cells.append({
            "L": c.L,
            "p": c.p,
            "undefined_iterates": c.undefined_iterates(),
            "iterates": [
                {
                    "seed": r.seed,
                    "b0": r.b0,
                    "black": r.black,
                    "components": r.components,
                    "counts": {format_key(k): v for k, v in sorted(r.counts.items())},
                    "error": r.error,
                }
                for r in c.records
            ],
            "summary": summary,
            "tails": tails,
        })
    return {
        "format": BUNDLE_FORMAT,
        "version": 1,
        "software": f"cubiperc {__version__}",
        "config": cfg.echo(),
        "seeds": {
            "master": cfg.seed,
            "scheme": "SeedSequence(master, spawn_key=(d, L, p_index, iterate)); "
            "coupled: spawn_key=(d, L, iterate); generator Philox4x64-10",
        },
        "cells": cells,
    }


def json_text(result: SweepResult) -> str:
    return json.dumps(bundle(result), indent=1, sort_keys=True) + "\n"


def export(result: SweepResult, fmt: str = "csv", path=None) -> str:
    """Render ``result`` as ``csv``, ``tails-csv`` or ``json``; write it if ``path`` is given."""
    if fmt == "csv":
        text = csv_text(result)
    elif fmt == "tails-csv":
        text = tails_csv_text(result)
    elif fmt == "json":
        text = json_text(result)
    else:
        raise DomainError(f"unknown export format {fmt!r}")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {fmt} export to {path}: {exc}") from exc
    return text


def load_bundle(path) -> SweepResult:
    obj = json.loads(Path(path).read_text())
    if obj.get("format") != BUNDLE_FORMAT:
        raise DomainError(f"{path} is not a sweep bundle")
    cfg = SweepConfig.from_dict(obj["config"])
    cells = []
    for c in obj["cells"]:
        records = [
            IterateRecord(
                {parse_key(k): v for k, v in r["counts"].items()},
                r["b0"], r["black"], r["components"], r["seed"], r["error"],
            )
            for r in c["iterates"]
        ]
        cells.append(SweepCell(cfg.d, c["L"], c["p"], records))
    return SweepResult(cfg, cells)


def load_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["d"], r["L"], r["count"] = int(r["d"]), int(r["L"]), int(r["count"])
        r["p"] = float(r["p"])
        r["key"] = parse_key(r["key"])
        for k in ("a_mean", "a_stderr", "c100_mean", "c100_stderr"):
            r[k] = float(r[k])
    return rows


def tail_fits(cell: SweepCell, k: int, n_max: int, fit_range=None, weighted: bool = False) -> dict:
    """Exponential and stretched fits of one cell's pooled tail, or the fit error."""
    curve = cell.tail(k, n_max)
    out = {}
    for model in ("exponential", "stretched"):
        if curve is None:
            out[model] = FitError("undefined measure")
            continue
        try:
            out[model] = fit_tail_decay(curve, model, fit_range, weighted)
        except FitError as exc:
            out[model] = exc
    return out


def default_threads() -> int:
    return os.cpu_count() or 1
