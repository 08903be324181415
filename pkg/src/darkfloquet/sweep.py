"""Parameter scans: Min(P1), quasi-energy branches, dark-mode populations.

Grid points are independent work items evaluated by a pure function and
gathered by index, so results are identical for any worker count and two runs
of the same spec write byte-identical CSV.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import floquet
from .errors import NumericalError
from .integrate import (
    DEFAULT_SAMPLES_PER_PERIOD,
    DEFAULT_STEPS_PER_PERIOD,
    default_z_end,
    min_population,
    period_table,
    propagate,
)
from .lattice import LatticeConfig, unit_excitation
from .tableio import csv_text, fmt, write_csv

__all__ = [
    "SweepSpec",
    "SweepResult",
    "PARAMETERS",
    "config_for",
    "evaluate_point",
    "run_sweep",
    "sweep_csv_text",
    "write_sweep_csv",
    "write_spec_json",
    "local_minima",
    "local_maxima",
    "sub_level_regions",
    "width_at_level",
    "refine_extrema",
    "default_workers",
]

PARAMETERS = ("omega2", "amplitude_over_omega", "omega")
WORKERS_ENV = "DARKFLOQUET_WORKERS"


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter scan specification.

    ``parameter`` selects which knob the grid drives: the boundary coupling,
    the drive amplitude in units of the drive frequency, or the drive
    frequency itself.  ``z_end=None`` applies the default horizon policy of
    :func:`darkfloquet.integrate.default_z_end` per grid point.
    """

    base: LatticeConfig
    parameter: str
    grid: np.ndarray
    initial_site: int = 1
    z_end: float | None = None
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD
    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD
    eps_tol: float | None = None

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {PARAMETERS}, got {self.parameter!r}")
        grid = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", grid)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid must be a non-empty 1-d array")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly ascending")
        if not 1 <= self.initial_site <= self.base.n_sites:
            raise ValueError(f"initial_site must be in 1..{self.base.n_sites}")
        # fail fast if any grid value yields an invalid configuration
        for v in grid:
            config_for(self, float(v))

    def to_dict(self) -> dict:
        return {
            "lattice": {
                "n_sites": self.base.n_sites,
                "omega1": self.base.omega1,
                "omega2": self.base.omega2,
                "amplitude": self.base.amplitude,
                "omega": self.base.omega,
            },
            "sweep": {
                "parameter": self.parameter,
                "grid": self.grid.tolist(),
                "initial_site": self.initial_site,
                "z_end": self.z_end,
                "steps_per_period": self.steps_per_period,
                "samples_per_period": self.samples_per_period,
                "eps_tol": self.eps_tol,
            },
        }


def config_for(spec: SweepSpec, value: float) -> LatticeConfig:
    """Lattice configuration at one grid point."""
    if spec.parameter == "omega2":
        return spec.base.replace(omega2=value)
    if spec.parameter == "amplitude_over_omega":
        return spec.base.replace(amplitude=value * spec.base.omega)
    return spec.base.replace(omega=value)


@dataclass(frozen=True)
class SweepResult:
    """Per-grid-point scan outputs (row count equals grid size)."""

    spec: SweepSpec
    param: np.ndarray
    min_p1: np.ndarray
    quasienergies: np.ndarray
    dark_present: np.ndarray
    dark_populations: np.ndarray
    failed: np.ndarray
    messages: tuple = field(default_factory=tuple)

    @property
    def n_sites(self) -> int:
        return self.quasienergies.shape[1]


def evaluate_point(spec: SweepSpec, value: float) -> tuple:
    """Pure evaluation of one grid point.

    Returns (min_p1, quasienergies, dark_present, dark_populations).
    The one-period RK4 table is shared between the trajectory and the Floquet
    analysis.
    """
    cfg = config_for(spec, float(value))
    table = period_table(cfg, spec.steps_per_period, spec.samples_per_period)
    z_end = default_z_end(cfg) if spec.z_end is None else spec.z_end
    traj = propagate(cfg, unit_excitation(cfg.n_sites, spec.initial_site), z_end,
                     spec.steps_per_period, spec.samples_per_period, table=table)
    mp = min_population(traj, spec.initial_site)
    sol = floquet.solve(cfg, eps_tol=spec.eps_tol, table=table)
    if sol.dark_index is not None:
        dark = sol.avg_populations[sol.dark_index].copy()
        present = True
    else:
        dark = np.full(cfg.n_sites, np.nan)
        present = False
    return mp, sol.quasienergies, present, dark


def _point_worker(args) -> tuple:
    spec, value = args
    try:
        return (*evaluate_point(spec, value), False, "")
    except NumericalError as exc:
        n = spec.base.n_sites
        nan = np.full(n, np.nan)
        return (math.nan, nan, False, nan, True, str(exc))


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate every grid point; integrator failures flag the point only.

    ``workers`` caps process parallelism (default: DARKFLOQUET_WORKERS or the
    machine CPU count).  Aggregation is index-ordered, never completion-ordered.
    """
    if workers is None:
        workers = default_workers()
    jobs = [(spec, float(v)) for v in spec.grid]
    if workers <= 1 or len(jobs) == 1:
        rows = [_point_worker(j) for j in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_point_worker, jobs, chunksize=chunk))

    n = spec.base.n_sites
    g = spec.grid.size
    min_p1 = np.array([r[0] for r in rows])
    eps = np.array([r[1] for r in rows]).reshape(g, n)
    present = np.array([r[2] for r in rows], dtype=bool)
    dark = np.array([r[3] for r in rows]).reshape(g, n)
    failed = np.array([r[4] for r in rows], dtype=bool)
    messages = tuple((i, r[5]) for i, r in enumerate(rows) if r[4])
    return SweepResult(spec, spec.grid.copy(), min_p1, eps, present, dark, failed, messages)


def _sweep_rows(result: SweepResult):
    for i in range(result.param.size):
        row = [fmt(result.param[i]), fmt(result.min_p1[i])]
        row.extend(fmt(e) for e in result.quasienergies[i])
        row.append("1" if result.dark_present[i] else "0")
        row.extend(fmt(p) for p in result.dark_populations[i])
        yield row


def _sweep_header(n: int) -> list[str]:
    header = ["param", "min_p1"]
    header += [f"eps_{j}" for j in range(1, n + 1)]
    header.append("dark_present")
    header += [f"dark_p{j}" for j in range(1, n + 1)]
    return header


def sweep_csv_text(result: SweepResult) -> str:
    return csv_text(_sweep_header(result.n_sites), _sweep_rows(result))


def write_sweep_csv(result: SweepResult, path) -> None:
    write_csv(path, _sweep_header(result.n_sites), _sweep_rows(result))


def write_spec_json(spec: SweepSpec, path) -> None:
    """Reproducibility sidecar: the full resolved spec."""
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# feature extraction on scan curves


def local_minima(values: np.ndarray, below: float = math.inf) -> np.ndarray:
    """Indices of strict local minima with value < below."""
    v = np.asarray(values)
    idx = [i for i in range(1, v.size - 1)
           if v[i] < v[i - 1] and v[i] <= v[i + 1] and v[i] < below]
    return np.array(idx, dtype=int)


def local_maxima(values: np.ndarray, above: float = -math.inf) -> np.ndarray:
    """Indices of strict local maxima with value > above."""
    v = np.asarray(values)
    idx = [i for i in range(1, v.size - 1)
           if v[i] > v[i - 1] and v[i] >= v[i + 1] and v[i] > above]
    return np.array(idx, dtype=int)


def sub_level_regions(param: np.ndarray, values: np.ndarray, level: float) -> list[tuple]:
    """Contiguous runs where values < level.

    Returns (param_lo, param_hi, param_argmin) per run; a broad flat dip is
    one region rather than a cloud of noise-level minima.
    """
    below = np.asarray(values) < level
    regions = []
    i = 0
    while i < below.size:
        if below[i]:
            j = i
            while j + 1 < below.size and below[j + 1]:
                j += 1
            k = i + int(np.argmin(values[i:j + 1]))
            regions.append((float(param[i]), float(param[j]), float(param[k])))
            i = j + 1
        else:
            i += 1
    return regions


def width_at_level(param: np.ndarray, values: np.ndarray, center: float,
                   level: float) -> float:
    """Full width of the feature around ``center`` at the given level.

    Walks outward from the sample nearest ``center`` until values cross the
    level on both sides, interpolating the crossings linearly.  NaN when the
    center sample is not below the level.
    """
    p = np.asarray(param, dtype=float)
    v = np.asarray(values, dtype=float)
    i0 = int(np.argmin(np.abs(p - center)))
    if not v[i0] < level:
        return math.nan

    def cross(direction: int) -> float:
        i = i0
        while 0 <= i + direction < v.size and v[i + direction] < level:
            i += direction
        j = i + direction
        if j < 0 or j >= v.size:
            return p[i]
        frac = (level - v[i]) / (v[j] - v[i])
        return p[i] + frac * (p[j] - p[i])

    return cross(+1) - cross(-1)


def refine_extrema(spec: SweepSpec, result: SweepResult, kind: str = "minima",
                   radius: int = 5, factor: int = 10,
                   workers: int | None = None) -> SweepResult:
    """Second pass around detected extrema at ``factor`` times the density.

    Re-samples +-``radius`` grid steps around each extremum of min_p1 and
    returns the merged, param-sorted result.
    """
    finder = local_minima if kind == "minima" else local_maxima
    idx = finder(result.min_p1)
    if idx.size == 0:
        return result
    step = float(np.median(np.diff(spec.grid))) if spec.grid.size > 1 else 1.0
    extra = []
    for i in idx:
        lo = spec.grid[max(0, i - radius)]
        hi = spec.grid[min(spec.grid.size - 1, i + radius)]
        extra.append(np.arange(lo, hi + step / factor / 2, step / factor))
    values = np.unique(np.concatenate(extra))
    values = values[~np.isin(values, spec.grid)]
    if values.size == 0:
        return result
    fine = run_sweep(replace(spec, grid=values), workers=workers)

    merged_param = np.concatenate([result.param, fine.param])
    order = np.argsort(merged_param, kind="stable")

    def cat(a, b):
        return np.concatenate([a, b])[order]

    return SweepResult(
        spec,
        merged_param[order],
        cat(result.min_p1, fine.min_p1),
        np.vstack([result.quasienergies, fine.quasienergies])[order],
        cat(result.dark_present, fine.dark_present),
        np.vstack([result.dark_populations, fine.dark_populations])[order],
        cat(result.failed, fine.failed),
        result.messages + fine.messages,
    )
