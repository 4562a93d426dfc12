"""Seeded Monte-Carlo recovery experiments and sample-complexity summaries."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .estimators import METHODS, MethodSpec, fit_methods
from .model import (ConnectivityMatrix, graph_stats, lattice_topology,
                    random_regular_topology)
from .sampler import SamplerConfig, draw_samples
from .solver import SolverOptions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopologyConfig:
    kind: str = "lattice"  # "lattice" or "random_regular"
    coupling: float = 0.5  # lattice
    degree: int = 3  # random_regular
    weight_low: float = 0.7
    weight_high: float = 0.9

    def __post_init__(self):
        if self.kind not in ("lattice", "random_regular"):
            raise ValueError(f"unknown topology {self.kind!r}")

    def build(self, p: int, seed: int) -> ConnectivityMatrix:
        if self.kind == "lattice":
            side = math.isqrt(p)
            if side * side != p:
                raise ValueError(f"lattice needs a square p, got {p}")
            return lattice_topology(side, self.coupling)
        return random_regular_topology(p, self.degree, self.weight_low, self.weight_high, seed)


@dataclass(frozen=True)
class ExperimentConfig:
    p_list: tuple = (9,)
    n_list: tuple = tuple(range(500, 4001, 500))
    repetitions: int = 30
    methods: tuple = METHODS
    master_seed: int = 0
    topology: TopologyConfig = TopologyConfig()
    sampler: SamplerConfig = SamplerConfig()
    epsilon: float = 1e-3
    t_max: int = 300
    workers: int = 1
    # stop increasing n at a given p for each method once its m* (<= max_failures) is known
    stop_when_resolved: bool = False
    max_failures: int = 3
    cache_dir: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        n_list = tuple(int(n) for n in self.n_list)
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ValueError("n_list must be strictly increasing")
        object.__setattr__(self, "n_list", n_list)
        object.__setattr__(self, "p_list", tuple(int(p) for p in self.p_list))
        object.__setattr__(self, "methods", tuple(self.methods))
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "n_list" not in d and "n_start" in d:
            start, step, count = d.pop("n_start"), d.pop("n_step", 500), d.pop("n_count")
            d["n_list"] = tuple(start + step * i for i in range(count))
        if isinstance(d.get("topology"), dict):
            d["topology"] = TopologyConfig(**d["topology"])
        if isinstance(d.get("sampler"), dict):
            d["sampler"] = SamplerConfig(**d["sampler"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def specs(self) -> list[MethodSpec]:
        opts = SolverOptions(epsilon=self.epsilon, t_max=self.t_max)
        return [MethodSpec(m, opts=opts) for m in self.methods]


@dataclass
class RunRecord:
    method: str
    p: int
    n: int
    repetition: int
    seed: int
    recovered: bool
    l2_error: float
    wall_time: float = 0.0
    error: str = ""


RECORD_FIELDS = ("method", "p", "n", "repetition", "seed", "recovered", "l2_error", "error")


def cell_seed(master_seed: int, p: int, n: int, repetition: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, p, n, repetition])


def run_cell(config: ExperimentConfig, p: int, n: int, repetition: int) -> list[RunRecord]:
    """One (p, n, repetition) cell: draw W*, train and validation sets, fit every method."""
    ss = cell_seed(config.master_seed, p, n, repetition)
    seed_int = int(ss.generate_state(1)[0])
    topo_ss, train_ss, val_ss = ss.spawn(3)

    def failed(msg):
        return [RunRecord(m, p, n, repetition, seed_int, False, math.nan, 0.0, msg)
                for m in config.methods]

    try:
        W = config.topology.build(p, int(topo_ss.generate_state(1)[0]))
        eta = graph_stats(W).min_edge_weight
        train = draw_samples(W, n, config.sampler, seed=train_ss)
        val = draw_samples(W, n, config.sampler, seed=val_ss)
    except Exception as err:  # noqa: BLE001 - a bad cell must not abort the grid
        log.warning("cell p=%d n=%d rep=%d failed: %s", p, n, repetition, err)
        return failed(f"{type(err).__name__}: {err}")

    truth = W.edge_set()
    records = []
    for spec in config.specs():
        t0 = time.perf_counter()
        try:
            est = fit_methods(train, [spec], val, eta=eta)[spec.method]
        except Exception as err:  # noqa: BLE001
            log.warning("%s failed on p=%d n=%d rep=%d: %s", spec.method, p, n, repetition, err)
            records.append(RunRecord(spec.method, p, n, repetition, seed_int, False, math.nan,
                                     time.perf_counter() - t0, f"{type(err).__name__}: {err}"))
            continue
        l2 = float(np.linalg.norm(est.W_raw.weights - W.weights))
        records.append(RunRecord(spec.method, p, n, repetition, seed_int,
                                 est.W_hat.edge_set() == truth, l2, time.perf_counter() - t0))
    return records


def _sort_key(r: RunRecord):
    return (r.method, r.p, r.n, r.repetition)


def _cell_key(config: ExperimentConfig) -> str:
    """Digest of every setting that changes a cell's records (not the grids or method list)."""
    from . import __version__

    d = config_to_dict(config)
    for k in ("p_list", "n_list", "repetitions", "methods", "workers", "stop_when_resolved",
              "max_failures", "cache_dir"):
        d.pop(k)
    d["version"] = __version__
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _cached_cell(config: ExperimentConfig, p: int, n: int, rep: int) -> list[RunRecord]:
    # records of one method do not depend on which other methods share the cell,
    # so the cache holds one file per method
    if config.cache_dir is None:
        return run_cell(config, p, n, rep)
    root = Path(config.cache_dir) / _cell_key(config)
    paths = {m: root / f"p{p}_n{n}_r{rep}_{m}.json" for m in config.methods}
    missing = [m for m, path in paths.items() if not path.exists()]
    fresh = {}
    if missing:
        root.mkdir(parents=True, exist_ok=True)
        for r in run_cell(replace(config, methods=tuple(missing)), p, n, rep):
            fresh[r.method] = r
            tmp = paths[r.method].with_suffix(".tmp")
            tmp.write_text(json.dumps(asdict(r)))
            tmp.replace(paths[r.method])
    return [fresh[m] if m in fresh else RunRecord(**json.loads(paths[m].read_text()))
            for m in config.methods]


def _run_cells(config: ExperimentConfig, cells, pool) -> list[RunRecord]:
    if pool is None:
        return [r for c in cells for r in _cached_cell(config, *c)]
    futures = [pool.submit(_cached_cell, config, *c) for c in cells]
    return [r for fut in futures for r in fut.result()]


def run_grid(config: ExperimentConfig, progress: bool = False) -> list[RunRecord]:
    """Every (p, n, repetition) cell of the grid; records sorted by method, p, n, repetition.

    With ``stop_when_resolved`` a method is dropped at a given p once its m* is
    known, so larger n carry records only for the methods still unresolved.
    """
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    records: list[RunRecord] = []
    try:
        for p in config.p_list:
            active = tuple(config.methods)
            for n in config.n_list:
                sub = replace(config, methods=active)
                records.extend(_run_cells(sub, [(p, n, rep) for rep in range(config.repetitions)],
                                          pool))
                if progress:
                    log.info("p=%d n=%d done (%s)", p, n, ", ".join(active))
                if config.stop_when_resolved:
                    active = tuple(m for m in active
                                   if sample_complexity(records, m, p, config.max_failures) is None)
                    if not active:
                        break
    finally:
        if pool is not None:
            pool.shutdown()
    return sorted(records, key=_sort_key)


def _cell(records, method, p, n):
    return [r for r in records if r.method == method and r.p == p and r.n == n]


def success_ratio(records, method: str, p: int, n: int) -> float:
    cell = _cell(records, method, p, n)
    if not cell:
        raise ValueError(f"no records for method={method} p={p} n={n}")
    return sum(bool(r.recovered) for r in cell) / len(cell)


def failures_by_n(records, method: str, p: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for r in records:
        if r.method == method and r.p == p:
            out[r.n] = out.get(r.n, 0) + (not r.recovered)
    return dict(sorted(out.items()))


def sample_complexity(records, method: str, p: int, max_failures: int = 3) -> int | None:
    """Smallest n on the grid with at most ``max_failures`` failed recoveries."""
    for n, fails in failures_by_n(records, method, p).items():
        if fails <= max_failures:
            return n
    return None


def cumulative_complexity(m_star_by_p: dict) -> dict:
    """Running maximum of m*(q) over q <= p; undefined from the first missing m* on."""
    out, running = {}, 0
    for p in sorted(m_star_by_p):
        m = m_star_by_p[p]
        if running is None or m is None:
            running = None
        else:
            running = max(running, m)
        out[p] = running
    return out


def phase_table(records, method: str, p: int) -> list[tuple[int, float, float, float]]:
    """Rows (n, success_ratio, mean_l2, sd_l2) for one method and graph size."""
    rows = []
    ns = sorted({r.n for r in records if r.method == method and r.p == p})
    for n in ns:
        cell = _cell(records, method, p, n)
        l2 = np.array([r.l2_error for r in cell], dtype=float)
        l2 = l2[np.isfinite(l2)]
        mean = float(l2.mean()) if l2.size else math.nan
        sd = float(l2.std(ddof=1)) if l2.size > 1 else 0.0 if l2.size else math.nan
        rows.append((n, success_ratio(records, method, p, n), mean, sd))
    return rows


def complexity_table(records, max_failures: int = 3) -> list[tuple[int, str, int | None, int | None]]:
    methods = sorted({r.method for r in records}, key=lambda m: METHODS.index(m) if m in METHODS else 99)
    ps = sorted({r.p for r in records})
    rows = []
    for m in methods:
        mstar = {p: sample_complexity(records, m, p, max_failures) for p in ps
                 if any(r.method == m and r.p == p for r in records)}
        nstar = cumulative_complexity(mstar)
        rows.extend((p, m, mstar[p], nstar[p]) for p in mstar)
    return sorted(rows)


def config_to_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["p_list"], d["n_list"], d["methods"] = list(config.p_list), list(config.n_list), list(config.methods)
    return d
