"""Continuum check of the discrete model: paraxial beam propagation.

Solves i dE/dz = -1/2 d2E/dx2 - p R(x,z) E on a periodic transverse grid with
symmetric split-step Fourier stepping.  R is a row of super-Gaussian channels
exp(-((x-X_j)/w_x)**6); only the top channel (largest X) is modulated along z,
R_top factor 1 + mu*sin(omega*z).  Per-guide powers are bin integrals between
midpoints of adjacent guide centers.  The scheme is unitary, so total power is
monitored rather than renormalized, and a band at the domain edge guards
against wrap-around of radiated light.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .analysis import bessel_zeros
from .errors import (
    BeatNotFoundError,
    BoundaryLeakError,
    ConvergenceError,
    NoBoundModeError,
    PowerDriftError,
)
from .tableio import csv_text, fmt, write_csv

__all__ = [
    "ContinuumGrid",
    "ContinuumConfig",
    "Field",
    "Mode",
    "BpmResult",
    "CouplingCalibration",
    "DriveCalibration",
    "chain_positions",
    "chain_config",
    "refractive_index",
    "fundamental_mode",
    "top_guide_mode",
    "bpm_propagate",
    "calibrate_coupling",
    "calibrate_drive",
    "power_csv_text",
    "write_power_csv",
    "write_field_txt",
]

POWER_DRIFT_LIMIT = 1e-4
LEAK_LIMIT = 1e-3


@dataclass(frozen=True)
class ContinuumGrid:
    """Uniform periodic transverse grid plus longitudinal stepping.

    The dz default is set by the grid-convergence requirement on the
    split-step beat phases, which accumulate error ~ 12 * dz**2 per unit z in
    the resonant three-guide runs.
    """

    half_width: float = 20.0
    n_x: int = 2048
    dz: float = 0.005
    z_max: float = 400.0

    def __post_init__(self):
        if self.half_width <= 0 or self.n_x < 16 or self.dz <= 0 or self.z_max <= 0:
            raise ValueError("invalid grid parameters")

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_x, endpoint=False)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_x

    @cached_property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_x, d=self.dx)


@dataclass(frozen=True)
class ContinuumConfig:
    """Waveguide row: index contrast p, channel width w_x, modulation mu, omega.

    ``guide_positions`` are strictly decreasing transverse centers; the first
    (largest x) is the driven top guide.
    """

    n_guides: int
    p: float
    w_x: float
    mu: float
    omega: float
    guide_positions: tuple
    grid: ContinuumGrid

    def __post_init__(self):
        pos = tuple(float(x) for x in self.guide_positions)
        object.__setattr__(self, "guide_positions", pos)
        if self.n_guides != len(pos):
            raise ValueError("n_guides does not match guide_positions")
        if len(pos) > 1 and not all(a > b for a, b in zip(pos, pos[1:])):
            raise ValueError("guide_positions must be strictly decreasing (top first)")
        if self.w_x <= 0:
            raise ValueError("w_x must be positive")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        margin = 5.0 * self.w_x
        if max(abs(p) for p in pos) + margin > self.grid.half_width:
            raise ValueError("domain must contain all guides with a 5*w_x margin")


@dataclass(frozen=True)
class Field:
    """Complex field samples on the transverse grid at coordinate z."""

    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))


@dataclass(frozen=True)
class Mode:
    """Unit-power bound mode of an isolated channel and its propagation constant."""

    field: np.ndarray
    beta: float


def chain_positions(n_guides: int, ws1: float, ws2: float) -> tuple:
    """Centers of a chain with uniform spacing ws1 and bottom spacing ws2.

    Top guide at x = ws1, second at 0, then downward; the last gap is ws2.
    """
    if n_guides < 2:
        raise ValueError("need at least two guides")
    pos = [ws1 - j * ws1 for j in range(n_guides - 1)]
    pos.append(pos[-1] - ws2)
    return tuple(pos)


def chain_config(n_guides: int, ws1: float, ws2: float, p: float = 2.78,
                 w_x: float = 0.3, mu: float = 0.2,
                 omega: float = 3.45 * math.pi / 100.0,
                 grid: ContinuumGrid | None = None) -> ContinuumConfig:
    if grid is None:
        grid = ContinuumGrid()
    return ContinuumConfig(n_guides, p, w_x, mu, omega,
                           chain_positions(n_guides, ws1, ws2), grid)


def _profiles(config: ContinuumConfig, x: np.ndarray) -> np.ndarray:
    """Super-Gaussian profile of each guide, shape (n_guides, len(x))."""
    x = np.asarray(x, dtype=float)
    out = np.empty((config.n_guides, x.size))
    for j, c in enumerate(config.guide_positions):
        out[j] = np.exp(-(((x - c) / config.w_x) ** 6))
    return out


def refractive_index(config: ContinuumConfig, x, z: float) -> np.ndarray | float:
    """R(x, z) = sum_j [1 + f_j(z)] exp(-((x - X_j)/w_x)**6), f only on top."""
    scalar = np.isscalar(x)
    prof = _profiles(config, np.atleast_1d(np.asarray(x, dtype=float)))
    r = prof.sum(axis=0) + config.mu * math.sin(config.omega * z) * prof[0]
    return float(r[0]) if scalar else r


def fundamental_mode(p: float, w_x: float, grid: ContinuumGrid,
                     center: float = 0.0) -> Mode:
    """Ground mode of a single channel by normalized imaginary-axis relaxation.

    Split-step relaxation with a staged pseudo-time step; the eigenvalue is a
    Rayleigh quotient, iterated until its relative change falls below 1e-12.
    beta = -eigenvalue must come out positive, otherwise the channel binds no
    mode and :class:`NoBoundModeError` is raised.
    """
    x, dx, k = grid.x, grid.dx, grid.k
    if w_x <= 0:
        raise ValueError("w_x must be positive")
    v = -p * np.exp(-(((x - center) / w_x) ** 6))
    kin = 0.5 * k**2

    def energy(psi):
        psi_k = np.fft.fft(psi)
        t = np.sum(kin * np.abs(psi_k) ** 2) * dx / x.size
        u = np.sum(v * np.abs(psi) ** 2) * dx
        return t + u

    psi = np.exp(-(((x - center) / (2.0 * w_x)) ** 2)).astype(complex)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    e_old = energy(psi)
    for tau in (0.5, 0.1, 0.02):
        half_kin = np.exp(-0.5 * tau * kin)
        pot = np.exp(-tau * v)
        for _ in range(20000):
            psi = np.fft.ifft(half_kin * np.fft.fft(psi))
            psi *= pot
            psi = np.fft.ifft(half_kin * np.fft.fft(psi))
            psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * dx)
            e = energy(psi)
            if abs(e - e_old) <= 1e-12 * max(1.0, abs(e)):
                e_old = e
                break
            e_old = e
        else:
            raise ConvergenceError("mode relaxation did not converge")
    beta = -e_old
    if beta <= 1e-10:
        raise NoBoundModeError(f"no bound mode (beta = {beta:.3e})")
    # fix the arbitrary global phase: make the field real and positive at peak
    peak = psi[np.argmax(np.abs(psi))]
    psi *= np.conj(peak) / abs(peak)
    return Mode(psi, float(beta))


def top_guide_mode(config: ContinuumConfig) -> Field:
    """Fundamental mode of the isolated top channel, used as the input beam."""
    mode = fundamental_mode(config.p, config.w_x, config.grid,
                            center=config.guide_positions[0])
    return Field(mode.field, z=0.0)


def _bin_slices(config: ContinuumConfig) -> np.ndarray:
    """Start indices of per-guide bins (ascending x), edges at midpoints."""
    pos_asc = np.sort(np.asarray(config.guide_positions))
    edges = 0.5 * (pos_asc[:-1] + pos_asc[1:])
    starts = np.concatenate([[0], np.searchsorted(config.grid.x, edges)])
    return starts


@dataclass(frozen=True)
class BpmResult:
    """Propagation record: per-guide powers (top guide first) along z."""

    config: ContinuumConfig
    z: np.ndarray
    guide_powers: np.ndarray
    total_power: np.ndarray
    edge_power: np.ndarray
    snapshots: tuple = ()
    intensity: np.ndarray | None = None

    @property
    def guide_fractions(self) -> np.ndarray:
        return self.guide_powers / self.total_power[:, None]


def bpm_propagate(config: ContinuumConfig, input_field: Field,
                  record_every: int = 10, snapshot_zs: tuple = (),
                  record_intensity: bool = False,
                  leak_limit: float = LEAK_LIMIT) -> BpmResult:
    """Symmetric split-step propagation to grid.z_max.

    Half kinetic step in k-space, full potential step with R evaluated at the
    z-midpoint, half kinetic step.  Raises :class:`PowerDriftError` when total
    power drifts beyond 1e-4 relative and :class:`BoundaryLeakError` when the
    outermost 10% of the domain carries more than ``leak_limit`` of the power.
    """
    grid = config.grid
    e = np.array(input_field.values, dtype=complex)
    if e.shape != (grid.n_x,):
        raise ValueError("input field does not match the grid")
    p0 = float(np.sum(np.abs(e) ** 2) * grid.dx)
    if abs(p0 - 1.0) > 1e-6:
        raise ValueError(f"input power must be normalized to 1, got {p0}")

    n_steps = int(round(grid.z_max / grid.dz))
    dz = grid.dz
    half_kin = np.exp(-0.25j * dz * grid.k**2)
    prof = _profiles(config, grid.x)
    base = prof.sum(axis=0)
    top = prof[0]
    edge_band = np.abs(grid.x) >= 0.9 * grid.half_width
    starts = _bin_slices(config)
    snap_steps = {int(round(z / dz)): float(z) for z in snapshot_zs}

    n_rec = n_steps // record_every + 1
    z_rec = np.empty(n_rec)
    powers = np.empty((n_rec, config.n_guides))
    totals = np.empty(n_rec)
    edges = np.empty(n_rec)
    intens = np.empty((n_rec, grid.n_x)) if record_intensity else None
    snapshots = []

    def record(i_rec: int, step: int):
        dens = np.abs(e) ** 2
        z_rec[i_rec] = step * dz
        powers[i_rec] = (np.add.reduceat(dens, starts) * grid.dx)[::-1]  # top first
        totals[i_rec] = dens.sum() * grid.dx
        edges[i_rec] = dens[edge_band].sum() * grid.dx
        if intens is not None:
            intens[i_rec] = dens
        drift = abs(totals[i_rec] / p0 - 1.0)
        if drift > POWER_DRIFT_LIMIT:
            raise PowerDriftError(f"power drift {drift:.3e} at z={z_rec[i_rec]:g}")
        if edges[i_rec] / totals[i_rec] > leak_limit:
            raise BoundaryLeakError(
                f"edge-band power fraction {edges[i_rec]/totals[i_rec]:.3e} at z={z_rec[i_rec]:g}"
            )

    record(0, 0)
    i_rec = 1
    for step in range(n_steps):
        z_mid = (step + 0.5) * dz
        phase = np.exp(1j * config.p * dz *
                       (base + config.mu * math.sin(config.omega * z_mid) * top))
        e = np.fft.ifft(half_kin * np.fft.fft(e))
        e *= phase
        e = np.fft.ifft(half_kin * np.fft.fft(e))
        done = step + 1
        if done in snap_steps:
            snapshots.append(Field(e.copy(), z=done * dz))
        if done % record_every == 0:
            record(i_rec, done)
            i_rec += 1

    return BpmResult(config, z_rec, powers, totals, edges, tuple(snapshots),
                     intens)


@dataclass(frozen=True)
class CouplingCalibration:
    """Dual-core beat measurement: Omega = pi / T_b."""

    coupling: float
    beat_period: float


def calibrate_coupling(spacing: float, p: float = 2.78, w_x: float = 0.3,
                       grid: ContinuumGrid | None = None) -> CouplingCalibration:
    """Coupling of two identical unmodulated guides from their beating period.

    Launches the single-guide mode in guide 1 and finds the first z where the
    guide-1 power returns to a maximum (quadratic interpolation of samples).
    Raises :class:`BeatNotFoundError` if no full beat fits in grid.z_max.
    """
    if grid is None:
        grid = ContinuumGrid()
    config = ContinuumConfig(2, p, w_x, 0.0, 1.0,
                             (spacing / 2.0, -spacing / 2.0), grid)
    mode = top_guide_mode(config)
    # propagate in stages so short beats are caught before mode-mismatch
    # radiation (about 1e-3 of the power at sub-channel spacings, harmless
    # here) builds up in the edge band of the periodic domain
    stages = sorted({min(s, grid.z_max) for s in (25.0, 100.0, grid.z_max)})
    for z_max in stages:
        run_grid = ContinuumGrid(grid.half_width, grid.n_x, grid.dz, z_max)
        run_config = ContinuumConfig(2, p, w_x, 0.0, 1.0,
                                     (spacing / 2.0, -spacing / 2.0), run_grid)
        result = bpm_propagate(run_config, mode, record_every=1, leak_limit=5e-3)
        frac = result.guide_fractions[:, 0]
        dropped = False
        for i in range(1, frac.size - 1):
            if frac[i] < 0.5:
                dropped = True
            elif dropped and frac[i] >= frac[i - 1] and frac[i] > frac[i + 1]:
                denom = frac[i - 1] - 2.0 * frac[i] + frac[i + 1]
                offset = 0.5 * (frac[i - 1] - frac[i + 1]) / denom if denom else 0.0
                t_b = float(result.z[i] + offset * (result.z[1] - result.z[0]))
                return CouplingCalibration(math.pi / t_b, t_b)
    raise BeatNotFoundError(
        f"no full beat within z_max={grid.z_max:g} (min fraction {frac.min():.3f})"
    )


@dataclass(frozen=True)
class DriveCalibration:
    """Empirical map from modulation depth mu to the discrete drive amplitude.

    Found by locating the modulation depth where a modulated dual-core coupler
    first suppresses tunneling; at that depth the effective drive amplitude
    over frequency equals the first zero of J0.
    """

    amplitude_per_mu: float
    mu_at_cdt: float
    mu_values: np.ndarray
    suppression: np.ndarray

    def amplitude(self, mu: float) -> float:
        return self.amplitude_per_mu * mu


def calibrate_drive(spacing: float, omega: float, p: float = 2.78,
                    w_x: float = 0.3, grid: ContinuumGrid | None = None,
                    mu_values: np.ndarray | None = None,
                    z_span: float | None = None) -> DriveCalibration:
    """Scan the modulation depth of a dual-core coupler for the first CDT point.

    The suppression metric is the minimum guide-1 power fraction over
    ``z_span`` (default two beat periods); its first interior maximum marks
    the modulation depth mu* where the coupler decouples, identified with the
    first zero of J0.
    """
    if grid is None:
        grid = ContinuumGrid()
    if mu_values is None:
        mu_values = np.arange(0.04, 0.345, 0.02)
    mu_values = np.asarray(mu_values, dtype=float)
    if z_span is None:
        z_span = 2.0 * calibrate_coupling(spacing, p, w_x, grid).beat_period
    run_grid = ContinuumGrid(grid.half_width, grid.n_x, grid.dz,
                             math.ceil(z_span / grid.dz) * grid.dz)

    suppression = np.empty(mu_values.size)
    for i, mu in enumerate(mu_values):
        config = ContinuumConfig(2, p, w_x, float(mu), omega,
                                 (spacing / 2.0, -spacing / 2.0), run_grid)
        result = bpm_propagate(config, top_guide_mode(config), record_every=5,
                               leak_limit=5e-3)
        suppression[i] = float(result.guide_fractions[:, 0].min())
    k = int(np.argmax(suppression))
    if k == 0 or k == mu_values.size - 1:
        raise ConvergenceError("CDT suppression maximum not bracketed by mu_values")
    denom = suppression[k - 1] - 2.0 * suppression[k] + suppression[k + 1]
    offset = 0.5 * (suppression[k - 1] - suppression[k + 1]) / denom if denom else 0.0
    mu_star = float(mu_values[k] + offset * (mu_values[1] - mu_values[0]))
    j0_first = float(bessel_zeros(0, 1)[0])
    return DriveCalibration(j0_first * omega / mu_star, mu_star, mu_values, suppression)


def _power_rows(result: BpmResult):
    for i in range(result.z.size):
        row = [fmt(result.z[i])]
        row.extend(fmt(v) for v in result.guide_powers[i])
        row.append(fmt(result.total_power[i]))
        yield row


def _power_header(n: int) -> list[str]:
    return ["z"] + [f"P_guide{j}" for j in range(1, n + 1)] + ["P_total"]


def power_csv_text(result: BpmResult) -> str:
    return csv_text(_power_header(result.config.n_guides), _power_rows(result))


def write_power_csv(result: BpmResult, path) -> None:
    write_csv(path, _power_header(result.config.n_guides), _power_rows(result))


def write_field_txt(field: Field, grid: ContinuumGrid, path) -> None:
    """Text dump of a field snapshot: columns x, re, im."""
    rows = ([fmt(x), fmt(v.real), fmt(v.imag)] for x, v in zip(grid.x, field.values))
    write_csv(path, ["x", "re", "im"], rows)
