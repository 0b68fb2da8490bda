"""Box-constrained polynomial optimization by cyclic coordinate enumeration.

Each trial repeats rounds; a round visits the coordinates in ascending order,
restricts the polynomial to that coordinate (others frozen), evaluates the
restriction on a dense uniform grid spanning the coordinate's bounds and
moves the coordinate to the best grid point unless the current value is
strictly better.  A trial stops when a round improves the transformed cost
``J = psi(P(x))`` by no more than ``eps * |J_previous|`` or after
``iter_max`` rounds.

Trial 1 starts from the (clamped) user guess; trial ``k >= 2`` starts from a
point drawn uniformly from the coordinate grids with
``numpy.random.default_rng((seed, k))`` (PCG64 fed by a SeedSequence), so a
trial's start does not depend on how many trials are run or in which order
they execute. Starting on the grid keeps every iterate on the grid, hence the
result can never undercut an exhaustive search of the same tensor grid.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import AllNonFinite, BadGrid, BadOptions, DimensionMismatch, InvalidBox
from .poly import Polynomial, ScalarPoly, eval_batch, eval_scalar, extract_scalar


@dataclass(frozen=True, eq=False)
class Box:
    xmin: np.ndarray
    xmax: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.xmin, dtype=np.float64)).copy()
        hi = np.atleast_1d(np.asarray(self.xmax, dtype=np.float64)).copy()
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise InvalidBox(f"xmin and xmax must be vectors of equal length, got {lo.shape} and {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidBox("box bounds must be finite")
        if np.any(lo > hi):
            j = int(np.flatnonzero(lo > hi)[0])
            raise InvalidBox(f"xmin[{j}] = {lo[j]} exceeds xmax[{j}] = {hi[j]}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "xmin", lo)
        object.__setattr__(self, "xmax", hi)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "Box":
        return cls(np.full(n, float(lo)), np.full(n, float(hi)))

    @property
    def n(self) -> int:
        return self.xmin.size

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(self.xmin <= x) and np.all(x <= self.xmax))

    def clamp(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=np.float64), self.xmin, self.xmax)


@dataclass(frozen=True)
class Objective:
    """What gets minimized: ``psi(P(x))``.

    ``psi`` must accept and return float arrays elementwise.
    """

    name: str
    psi: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def custom(cls, psi: Callable[[np.ndarray], np.ndarray], name: str = "custom") -> "Objective":
        return cls(name, psi)

    @classmethod
    def parse(cls, mode: "Objective | str") -> "Objective":
        if isinstance(mode, Objective):
            return mode
        try:
            return _MODES[str(mode).lower()]
        except KeyError:
            raise BadOptions(f"unknown mode {mode!r}; expected one of min, max, root") from None

    def __call__(self, v) -> np.ndarray:
        return np.asarray(self.psi(np.asarray(v, dtype=np.float64)), dtype=np.float64)


def _negate(v):
    return -v


def _identity(v):
    return v


MINIMIZE = Objective("min", _identity)
MAXIMIZE = Objective("max", _negate)
ROOT = Objective("root", np.abs)

_MODES = {
    "min": MINIMIZE, "minimize": MINIMIZE,
    "max": MAXIMIZE, "maximize": MAXIMIZE,
    "root": ROOT, "rootfind": ROOT,
}


@dataclass
class SolveOptions:
    x0: Sequence[float] | np.ndarray | None = None  # None means the origin
    Ntrials: int = 1
    ngrid: int = 1000
    iter_max: int = 100
    eps: float = 1e-2
    mode: Objective | str = "min"
    seed: int = 0

    def validate(self) -> None:
        if int(self.Ntrials) != self.Ntrials or self.Ntrials < 1:
            raise BadOptions(f"Ntrials must be a positive integer, got {self.Ntrials}")
        if int(self.ngrid) != self.ngrid or self.ngrid < 2:
            raise BadOptions(f"ngrid must be an integer >= 2, got {self.ngrid}")
        if int(self.iter_max) != self.iter_max or self.iter_max < 1:
            raise BadOptions(f"iter_max must be a positive integer, got {self.iter_max}")
        if not (np.isfinite(self.eps) and self.eps >= 0):
            raise BadOptions(f"eps must be a finite non-negative number, got {self.eps}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise BadOptions(f"seed must be a non-negative integer, got {self.seed}")
        Objective.parse(self.mode)


@dataclass
class Solution:
    x: np.ndarray
    f: float
    cpu: float
    rounds_per_trial: list[int]
    trial_values: list[float]
    round_values: list[list[float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "f": self.f,
            "cpu": self.cpu,
            "rounds_per_trial": list(self.rounds_per_trial),
            "trial_values": list(self.trial_values),
        }


class TrialResult(NamedTuple):
    x: np.ndarray
    value: float
    rounds: int
    history: list[float]  # J before the first round, then after every round


def make_grid(lo: float, hi: float, ngrid: int) -> np.ndarray:
    if ngrid < 2:
        raise BadGrid(f"ngrid must be >= 2, got {ngrid}")
    if not lo <= hi:
        raise BadGrid(f"grid bounds out of order: {lo} > {hi}")
    # linspace pins both endpoints exactly
    return np.linspace(lo, hi, int(ngrid))


def _finite_or_inf(values: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(values), values, np.inf)


def scalar_grid_argmin(q: ScalarPoly, grid: np.ndarray, mode: Objective | str = MINIMIZE) -> tuple[float, float]:
    """Best grid point for ``psi(q(t))``; the lowest index wins ties."""
    obj = Objective.parse(mode)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise BadGrid("empty grid")
    with np.errstate(over="ignore", invalid="ignore"):
        vals = _finite_or_inf(np.broadcast_to(obj(eval_scalar(q, grid)), grid.shape))
    k = int(np.argmin(vals))
    if not np.isfinite(vals[k]):
        raise AllNonFinite("objective is non-finite at every grid point")
    return float(grid[k]), float(vals[k])


def _psi_at(p: Polynomial, x: np.ndarray, obj: Objective) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        v = float(obj(eval_batch(p, x[None, :]))[0])
    return v if np.isfinite(v) else np.inf


def solve_single_trial(p: Polynomial, box: Box, start, opts: SolveOptions,
                       grids: Sequence[np.ndarray] | None = None) -> TrialResult:
    obj = Objective.parse(opts.mode)
    if grids is None:
        grids = [make_grid(lo, hi, opts.ngrid) for lo, hi in zip(box.xmin, box.xmax)]
    x = np.array(start, dtype=np.float64)
    J = _psi_at(p, x, obj)
    history = [J]
    rounds = 0
    while rounds < opts.iter_max:
        J_prev = J
        for j in range(p.nx):
            with np.errstate(over="ignore", invalid="ignore"):
                q = extract_scalar(p, x, j)
            t, v = scalar_grid_argmin(q, grids[j], obj)
            # ties go to the grid point; an off-grid value survives only if strictly better
            if v <= J:
                x[j] = t
                J = v
        rounds += 1
        history.append(J)
        if np.isfinite(J_prev) and J_prev - J <= opts.eps * abs(J_prev):
            break
    return TrialResult(x, _psi_at(p, x, obj), rounds, history)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for trial number ``trial`` (1-based) under ``seed``."""
    return np.random.default_rng([int(seed), int(trial)])


def sample_start(box: Box, rng: np.random.Generator, ngrid: int | None = None) -> np.ndarray:
    """Uniform random point in ``box``.

    With ``ngrid`` the draw is uniform over the ``ngrid`` grid points of each
    coordinate instead, so the start lies on the solver's tensor grid.
    """
    if ngrid is None:
        return rng.uniform(box.xmin, box.xmax)
    k = rng.integers(0, ngrid, size=box.n)
    return np.array([make_grid(lo, hi, ngrid)[i] for lo, hi, i in zip(box.xmin, box.xmax, k)])


def solve(p: Polynomial, box: Box, opts: SolveOptions | None = None) -> Solution:
    """Multi-start cyclic coordinate enumeration over ``box``.

    The returned ``f`` is the raw polynomial value at the best point; trials
    are ranked by their psi-values (lowest wins, earliest trial on ties).
    """
    t0 = time.perf_counter()
    opts = opts or SolveOptions()
    opts.validate()
    if box.n != p.nx:
        raise DimensionMismatch(f"box has {box.n} components, polynomial has {p.nx} variables")
    x0 = np.zeros(p.nx) if opts.x0 is None else np.atleast_1d(np.asarray(opts.x0, dtype=np.float64))
    if x0.shape != (p.nx,):
        raise DimensionMismatch(f"x0 must have {p.nx} components, got shape {x0.shape}")
    if not np.all(np.isfinite(x0)):
        raise BadOptions("x0 must be finite")

    grids = [make_grid(lo, hi, opts.ngrid) for lo, hi in zip(box.xmin, box.xmax)]
    results = []
    for k in range(1, int(opts.Ntrials) + 1):
        start = box.clamp(x0) if k == 1 else sample_start(box, trial_rng(opts.seed, k), opts.ngrid)
        results.append(solve_single_trial(p, box, start, opts, grids))

    values = [r.value for r in results]
    best = results[int(np.argmin(values))]
    f = float(eval_batch(p, best.x[None, :])[0])
    return Solution(
        x=best.x,
        f=f,
        cpu=time.perf_counter() - t0,
        rounds_per_trial=[r.rounds for r in results],
        trial_values=values,
        round_values=[r.history for r in results],
    )
