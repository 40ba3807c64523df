"""Concentration sweeps over one moiety total, serial or in worker processes."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .activity import ActivityModel
from .equilibrium import ConvergenceError, SolverConfig, solve
from .scheme import Scheme

COLUMNS_TAIL = ("pH", "pH_a", "pH_I0", "I", "gamma", "status", "newton_iters", "corr_iters")


@dataclass(frozen=True)
class SweepSpec:
    """Vary one total over ``start..stop`` with the others held fixed.

    Give either ``step`` or ``points``; with ``step`` the grid is
    ``start + i*step`` up to ``stop`` inclusive (within 1e-9).
    """

    vary: str
    start: float
    stop: float
    step: float | None = None
    points: int | None = None
    fixed: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if (self.step is None) == (self.points is None):
            raise ValueError("give exactly one of step or points")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.points is not None and self.points < 1:
            raise ValueError("points must be at least 1")
        if self.start > self.stop:
            raise ValueError("start must not exceed stop")
        if self.vary in self.fixed:
            raise ValueError(f"{self.vary!r} is both varied and fixed")
        for name, value in [(self.vary, self.start), (self.vary, self.stop), *self.fixed.items()]:
            if not 0 < value <= 1:
                raise ValueError(f"total {name}={value} outside (0, 1] mol/L")

    def grid(self) -> np.ndarray:
        if self.points is not None:
            if self.points == 1:
                return np.array([self.start])
            return np.linspace(self.start, self.stop, self.points)
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        # Rounding keeps 0.1 + 10*0.02 from printing as 0.30000000000000004.
        return np.round(self.start + self.step * np.arange(count), 12)


@dataclass
class SweepRow:
    totals: dict[str, float]
    pH: float = math.nan
    pH_a: float = math.nan
    pH_I0: float = math.nan
    I: float = math.nan
    gamma: float = math.nan
    status: str = "ok"
    newton_iters: int = 0
    corr_iters: int = 0


def solve_point(scheme: Scheme, totals: dict[str, float], config: SolverConfig | None = None,
                model: ActivityModel | None = None, ionic: bool = True) -> SweepRow:
    """One sweep point; failures become a row with a status, never an exception."""
    row = SweepRow(totals=dict(totals))
    try:
        state = solve(scheme, totals, config, model, ionic=ionic)
    except (ConvergenceError, ValueError, np.linalg.LinAlgError) as exc:
        row.status = "error:" + type(exc).__name__
        return row
    row.pH, row.pH_a, row.pH_I0 = state.pH, state.pH_a, state.pH_I0
    row.I, row.gamma = state.I, state.gamma
    row.newton_iters, row.corr_iters = state.newton_iters, state.correction_iters
    row.status = "ok" if state.converged else "not-converged"
    return row


def _point(args):
    return solve_point(*args)


def run_sweep(scheme: Scheme, spec: SweepSpec, config: SolverConfig | None = None,
              model: ActivityModel | None = None, ionic: bool = True,
              jobs: int = 1) -> list[SweepRow]:
    """Rows come back in grid order whatever ``jobs`` is."""
    tasks = []
    for value in spec.grid():
        totals = {spec.vary: float(value), **spec.fixed}
        tasks.append((scheme, totals, config, model, ionic))
    if jobs <= 1 or len(tasks) < 2:
        return [_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _total_names(spec: SweepSpec | None, names=None) -> list[str]:
    if names is not None:
        return list(names)
    return [spec.vary, *spec.fixed]


def csv_header(spec: SweepSpec | None, names=None) -> list[str]:
    """``C_<varied>, C_<fixed>..., pH, ...``; ``names`` overrides the total columns."""
    return [*(f"C_{k}" for k in _total_names(spec, names)), *COLUMNS_TAIL]


def csv_record(row: SweepRow, spec: SweepSpec | None, precision: int = 4,
               names=None) -> list[str]:
    def ph(x):
        return "nan" if math.isnan(x) else f"{x:.{precision}f}"

    def sci(x):
        return "nan" if math.isnan(x) else f"{x:.6e}"

    totals = [sci(row.totals[k]) for k in _total_names(spec, names)]
    return [*totals, ph(row.pH), ph(row.pH_a), ph(row.pH_I0), sci(row.I),
            ph(row.gamma), row.status, str(row.newton_iters), str(row.corr_iters)]
