"""Benchmark harness: random problem suite, pluggable solvers, comparison metrics.

One polynomial is generated per (nx, deg, card) configuration. The
coordinate solver runs at every ``Ntrials`` variant and each adapter runs
once. Values are compared through

  delta_h       = f_h - f_ref                   (f_ref: coordinate solver, Ntrials=1)
  I_j(th)       = #{problems : (f_j - f_ref) / |f_ref| <= -th}

Every random draw derives from ``(cfg.seed, problem index[, solver])``, so
all results except the cpu columns are independent of scheduling.
"""

from __future__ import annotations

import csv
import itertools
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigInvalid, EmptyInput, MissingVariant, UnknownSolver, ValidationError
from .generate import GenSpec, generate_random_pol
from .poly import Polynomial, eval_batch
from .solver import MINIMIZE, Box, Objective, SolveOptions, make_grid, solve

log = logging.getLogger(__name__)

REFERENCE = "coordinate"
SOLVED, FAILED, INCONSISTENT = "solved", "failed", "inconsistent"

RESULTS_COLUMNS = ["problem_id", "nx", "deg", "card", "solver", "ntrials", "f", "cpu_s", "rounds", "status"]
SUMMARY_COLUMNS = ["solver", "solved", "failed", "mean_delta", "median_delta", "frac_delta_positive"]
IMPROVEMENT_COLUMNS = ["j", "th", "count"]
HISTOGRAM_COLUMNS = ["solver", "cumulative", "bin_lo", "bin_hi", "count"]

# |f_ref| below this is left out of the relative-improvement ratio
NEAR_ZERO_REF = 1e-12


def reference_label(ntrials: int) -> str:
    return f"{REFERENCE}@{ntrials}"


@dataclass
class BenchConfig:
    set_nx: list[int] = field(default_factory=lambda: [3, 5, 10, 20, 50])
    set_deg: list[int] = field(default_factory=lambda: list(range(2, 10)))
    set_card: list[int] = field(default_factory=lambda: list(range(5, 30)))
    box_lo: float = -1.0
    box_hi: float = 2.0
    ngrid: int = 1000
    eps: float = 1e-2
    iter_max: int = 100
    ntrials_variants: list[int] = field(default_factory=lambda: [1, 3, 5])
    th_grid: list[float] = field(
        default_factory=lambda: [0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0])
    hist_bins: int = 20
    seed: int = 0

    def validate(self) -> None:
        for name in ("set_nx", "set_deg", "set_card", "ntrials_variants"):
            values = getattr(self, name)
            if not values or any(int(v) != v or v < 1 for v in values):
                raise ConfigInvalid(f"{name} must be a non-empty list of positive integers")
        if 1 not in self.ntrials_variants:
            raise ConfigInvalid("ntrials_variants must include 1 (the reference run)")
        if len(set(self.ntrials_variants)) != len(self.ntrials_variants):
            raise ConfigInvalid("ntrials_variants contains duplicates")
        if not (np.isfinite(self.box_lo) and np.isfinite(self.box_hi) and self.box_lo <= self.box_hi):
            raise ConfigInvalid(f"bad box [{self.box_lo}, {self.box_hi}]")
        if self.ngrid < 2 or self.iter_max < 1 or not self.eps >= 0:
            raise ConfigInvalid("need ngrid >= 2, iter_max >= 1, eps >= 0")
        if self.hist_bins < 1:
            raise ConfigInvalid("hist_bins must be >= 1")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigInvalid("seed must be a non-negative integer")

    @property
    def size(self) -> int:
        return len(self.set_nx) * len(self.set_deg) * len(self.set_card)


# -- adapters --------------------------------------------------------------

@dataclass
class AdapterResult:
    x: np.ndarray | None
    f: float
    status: str = SOLVED


@dataclass
class SolverAdapter:
    """A named minimizer ``solve(pol, box, rng) -> AdapterResult``.

    Exceptions raised by ``solve`` are caught by the harness and recorded as
    a failure. With ``jobs > 1`` the callable must be picklable.
    """

    name: str
    solve: Callable[[Polynomial, Box, np.random.Generator], AdapterResult]


class _RandomSearch:
    def __init__(self, samples: int, chunk: int = 100_000):
        if samples < 1:
            raise ValidationError("random search needs at least one sample")
        self.samples = int(samples)
        self.chunk = chunk

    def __call__(self, pol, box, rng):
        best_x, best_f = None, np.inf
        remaining = self.samples
        while remaining > 0:
            m = min(remaining, self.chunk)
            X = rng.uniform(box.xmin, box.xmax, size=(m, box.n))
            with np.errstate(over="ignore", invalid="ignore"):
                vals = eval_batch(pol, X)
            vals = np.where(np.isfinite(vals), vals, np.inf)
            k = int(np.argmin(vals))
            if vals[k] < best_f:
                best_x, best_f = X[k].copy(), float(vals[k])
            remaining -= m
        if best_x is None:
            return AdapterResult(None, float("nan"), FAILED)
        return AdapterResult(best_x, best_f)


def random_search_adapter(samples: int, name: str = "random_search") -> SolverAdapter:
    return SolverAdapter(name, _RandomSearch(samples))


# Refuse tensor grids with more points than this.
TENSOR_GRID_CAP = 10**7


def tensor_grid_minimum(pol: Polynomial, box: Box, per_axis: int,
                        objective: Objective | str = MINIMIZE,
                        cap: int = TENSOR_GRID_CAP, chunk: int = 1 << 16) -> tuple[np.ndarray, float]:
    """Exhaustive minimum of ``psi(P)`` over the product of per-axis grids.

    Returns the first minimizing point in C order and its psi-value.
    """
    obj = Objective.parse(objective)
    total = per_axis ** pol.nx
    if total > cap:
        raise ValidationError(f"tensor grid of {per_axis}^{pol.nx} points exceeds cap {cap}")
    grids = [make_grid(lo, hi, per_axis) for lo, hi in zip(box.xmin, box.xmax)]
    shape = (per_axis,) * pol.nx
    best_idx, best_v = -1, np.inf
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.unravel_index(flat, shape)
        X = np.column_stack([g[i] for g, i in zip(grids, idx)])
        with np.errstate(over="ignore", invalid="ignore"):
            v = obj(eval_batch(pol, X))
        v = np.where(np.isfinite(v), v, np.inf)
        k = int(np.argmin(v))
        if v[k] < best_v:
            best_idx, best_v = int(flat[k]), float(v[k])
    if best_idx < 0:
        raise ArithmeticError("objective is non-finite on the whole tensor grid")
    idx = np.unravel_index(best_idx, shape)
    return np.array([g[i] for g, i in zip(grids, idx)]), best_v


class _TensorGrid:
    def __init__(self, per_axis: int, cap: int = TENSOR_GRID_CAP):
        if per_axis < 2:
            raise ValidationError("tensor grid needs at least 2 points per axis")
        self.per_axis = int(per_axis)
        self.cap = cap

    def __call__(self, pol, box, rng):
        if self.per_axis ** pol.nx > self.cap:
            return AdapterResult(None, float("nan"), FAILED)
        x, v = tensor_grid_minimum(pol, box, self.per_axis, cap=self.cap)
        return AdapterResult(x, v)


def tensor_grid_oracle_adapter(per_axis: int, name: str = "tensor_grid") -> SolverAdapter:
    return SolverAdapter(name, _TensorGrid(per_axis))


ADAPTER_KINDS = {
    "random_search": (random_search_adapter, "samples"),
    "tensor_grid": (tensor_grid_oracle_adapter, "per_axis"),
}


def adapter_from_spec(spec: Mapping[str, Any]) -> SolverAdapter:
    """Build a built-in adapter from e.g. ``{"kind": "random_search", "samples": 5000}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in ADAPTER_KINDS:
        raise ConfigInvalid(f"adapters: unknown kind {kind!r}; expected one of {sorted(ADAPTER_KINDS)}")
    factory, budget = ADAPTER_KINDS[kind]
    name = spec.pop("name", kind)
    if budget not in spec:
        raise ConfigInvalid(f"adapters: {kind} needs {budget!r}")
    value = spec.pop(budget)
    if spec:
        raise ConfigInvalid(f"adapters: unknown keys {sorted(spec)} for {kind}")
    return factory(value, name=name)


def load_config(doc: Mapping[str, Any]) -> tuple[BenchConfig, list[SolverAdapter]]:
    """Parse a bench config document (BenchConfig fields plus ``adapters``)."""
    if not isinstance(doc, Mapping):
        raise ConfigInvalid("config must be a JSON object")
    doc = dict(doc)
    adapter_specs = doc.pop("adapters", [])
    known = {f.name for f in fields(BenchConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {unknown}")
    try:
        cfg = BenchConfig(**doc)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc
    cfg.validate()
    adapters = [adapter_from_spec(s) for s in adapter_specs]
    names = [a.name for a in adapters]
    if len(set(names)) != len(names) or REFERENCE in names:
        raise ConfigInvalid(f"adapter names must be unique and not {REFERENCE!r}")
    return cfg, adapters


# -- records ---------------------------------------------------------------

@dataclass
class Outcome:
    solver: str
    ntrials: int | None
    f: float
    cpu: float
    status: str
    rounds: tuple[int, ...] = ()

    @property
    def label(self) -> str:
        return reference_label(self.ntrials) if self.solver == REFERENCE else self.solver


@dataclass
class BenchRecord:
    problem_id: int
    nx: int
    deg: int
    card: int
    outcomes: dict[str, Outcome] = field(default_factory=dict)

    @property
    def f_ref(self) -> float | None:
        ref = self.outcomes.get(reference_label(1))
        return ref.f if ref is not None and ref.status == SOLVED else None

    def value(self, label: str) -> float | None:
        out = self.outcomes.get(label)
        return out.f if out is not None and out.status == SOLVED else None


def build_configurations(cfg: BenchConfig) -> list[tuple[int, int, int]]:
    return list(itertools.product(cfg.set_nx, cfg.set_deg, cfg.set_card))


def problem_seed(base_seed: int, problem_id: int) -> int:
    return int(np.random.SeedSequence([base_seed, problem_id]).generate_state(1)[0])


def _adapter_rng(base_seed: int, problem_id: int, name: str) -> np.random.Generator:
    return np.random.default_rng([base_seed, problem_id, zlib.crc32(name.encode())])


def _run_adapter(adapter: SolverAdapter, pol: Polynomial, box: Box, rng) -> Outcome:
    t0 = time.perf_counter()
    try:
        res = adapter.solve(pol, box, rng)
    except Exception as exc:  # adapters must never take the harness down
        log.warning("adapter %s raised %s: %s", adapter.name, type(exc).__name__, exc)
        return Outcome(adapter.name, None, float("nan"), time.perf_counter() - t0, FAILED)
    cpu = time.perf_counter() - t0
    if res is None or res.status != SOLVED or res.x is None:
        return Outcome(adapter.name, None, float("nan"), cpu, FAILED)
    x = np.asarray(res.x, dtype=np.float64)
    if x.shape != (pol.nx,) or not box.contains(x):
        return Outcome(adapter.name, None, float("nan"), cpu, INCONSISTENT)
    f = float(eval_batch(pol, x[None, :])[0])
    status = SOLVED if np.isclose(f, res.f, rtol=1e-9, atol=1e-12) else INCONSISTENT
    return Outcome(adapter.name, None, f, cpu, status)


def run_problem(cfg: BenchConfig, adapters: Sequence[SolverAdapter], problem_id: int,
                triplet: tuple[int, int, int]) -> BenchRecord:
    nx, deg, card = triplet
    seed = problem_seed(cfg.seed, problem_id)
    pol = generate_random_pol(GenSpec(nx, deg, card, seed))
    box = Box.uniform(cfg.box_lo, cfg.box_hi, nx)
    rec = BenchRecord(problem_id, nx, deg, card)
    for j in cfg.ntrials_variants:
        opts = SolveOptions(x0=box.xmin, Ntrials=j, ngrid=cfg.ngrid, iter_max=cfg.iter_max,
                            eps=cfg.eps, seed=seed)
        try:
            sol = solve(pol, box, opts)
            out = Outcome(REFERENCE, j, sol.f, sol.cpu, SOLVED, tuple(sol.rounds_per_trial))
        except Exception as exc:
            log.warning("problem %d: reference solver failed: %s", problem_id, exc)
            out = Outcome(REFERENCE, j, float("nan"), 0.0, FAILED)
        rec.outcomes[out.label] = out
    for adapter in adapters:
        out = _run_adapter(adapter, pol, box, _adapter_rng(cfg.seed, problem_id, adapter.name))
        rec.outcomes[out.label] = out
    return rec


def _run_problem_star(args):
    return run_problem(*args)


def run_benchmark(cfg: BenchConfig, adapters: Sequence[SolverAdapter] = (), jobs: int = 1) -> list[BenchRecord]:
    cfg.validate()
    work = [(cfg, list(adapters), i, c) for i, c in enumerate(build_configurations(cfg))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_problem_star, work, chunksize=4))
    return [_run_problem_star(w) for w in work]


# -- metrics ---------------------------------------------------------------

def solver_labels(records: Sequence[BenchRecord]) -> list[str]:
    labels: list[str] = []
    for rec in records:
        for label in rec.outcomes:
            if label not in labels:
                labels.append(label)
    return labels


def delta_metric(records: Sequence[BenchRecord], solver: str) -> tuple[np.ndarray, int]:
    """Delta of ``solver`` against the Ntrials=1 reference.

    Returns the deltas over problems where both sides solved, and the number
    of problems excluded because either side did not.
    """
    if solver not in solver_labels(records):
        raise UnknownSolver(f"no results for solver {solver!r}")
    deltas, excluded = [], 0
    for rec in records:
        f_h, f_ref = rec.value(solver), rec.f_ref
        if f_h is None or f_ref is None:
            excluded += 1
        else:
            deltas.append(f_h - f_ref)
    return np.array(deltas, dtype=np.float64), excluded


def improvement_count(records: Sequence[BenchRecord], j: int, th_grid) -> tuple[np.ndarray, int]:
    """Count problems where Ntrials=j beats Ntrials=1 by relative margin ``th``.

    ``th == 0`` counts strict improvements only; ``th > 0`` counts ratios
    ``<= -th``. Problems with ``|f_ref| < NEAR_ZERO_REF`` are left out and
    their number is returned alongside the counts.
    """
    label = reference_label(j)
    if label not in solver_labels(records):
        raise MissingVariant(f"no results for Ntrials={j}")
    ratios, near_zero = [], 0
    for rec in records:
        f_j, f_ref = rec.value(label), rec.f_ref
        if f_j is None or f_ref is None:
            continue
        if abs(f_ref) < NEAR_ZERO_REF:
            near_zero += 1
            continue
        ratios.append((f_j - f_ref) / abs(f_ref))
    r = np.array(ratios, dtype=np.float64)
    counts = []
    for th in np.atleast_1d(np.asarray(th_grid, dtype=np.float64)):
        counts.append(int(np.sum(r < 0)) if th == 0 else int(np.sum(r <= -th)))
    return np.array(counts, dtype=np.int64), near_zero


def histogram_export(values, bins: int, cumulative: bool = False) -> tuple[np.ndarray, np.ndarray]:
    if bins < 1:
        raise ValidationError(f"bins must be >= 1, got {bins}")
    v = np.asarray(values, dtype=np.float64).ravel()
    v = v[np.isfinite(v)]
    if v.size == 0:
        raise EmptyInput("no finite values to histogram")
    counts, edges = np.histogram(v, bins=int(bins))
    if cumulative:
        counts = np.cumsum(counts)
    return edges, counts


def rounds_percentile(records: Sequence[BenchRecord], q: float = 95.0) -> float:
    rounds = [r for rec in records for out in rec.outcomes.values()
              if out.solver == REFERENCE for r in out.rounds]
    return float(np.percentile(rounds, q)) if rounds else float("nan")


# -- CSV output ------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def write_results_csv(records: Sequence[BenchRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_COLUMNS)
        for rec in records:
            for out in rec.outcomes.values():
                w.writerow([rec.problem_id, rec.nx, rec.deg, rec.card, out.solver,
                            _fmt(out.ntrials), _fmt(float(out.f)), f"{out.cpu:.6f}",
                            ";".join(map(str, out.rounds)), out.status])


def summary_rows(records: Sequence[BenchRecord]) -> list[list[Any]]:
    rows = []
    for label in solver_labels(records):
        solved = sum(1 for r in records if r.value(label) is not None)
        deltas, _ = delta_metric(records, label)
        if deltas.size:
            row = [float(deltas.mean()), float(np.median(deltas)), float(np.mean(deltas > 0))]
        else:
            row = [float("nan")] * 3
        rows.append([label, solved, len(records) - solved, *row])
    return rows


def write_outputs(records: Sequence[BenchRecord], cfg: BenchConfig, out_dir) -> dict[str, Path]:
    """Write results, summary, improvement and histogram CSVs into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / f"{name}.csv" for name in ("results", "summary", "improvement", "histograms")}
    write_results_csv(records, paths["results"])

    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in summary_rows(records):
            w.writerow([_fmt(v) for v in row])

    with open(paths["improvement"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(IMPROVEMENT_COLUMNS)
        for j in cfg.ntrials_variants:
            counts, _ = improvement_count(records, j, cfg.th_grid)
            for th, c in zip(cfg.th_grid, counts):
                w.writerow([j, _fmt(float(th)), int(c)])

    with open(paths["histograms"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTOGRAM_COLUMNS)
        for label in solver_labels(records):
            deltas, _ = delta_metric(records, label)
            if not np.isfinite(deltas).any():
                continue
            for cumulative in (False, True):
                edges, counts = histogram_export(deltas, cfg.hist_bins, cumulative)
                for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                    w.writerow([label, int(cumulative), _fmt(float(lo)), _fmt(float(hi)), int(c)])
    return paths


def config_to_dict(cfg: BenchConfig) -> dict:
    return asdict(cfg)
