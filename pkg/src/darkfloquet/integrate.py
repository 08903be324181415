"""Norm-preserving z-integration of i da/dz = H(z) a and trajectory diagnostics.

The integrator is classical fixed-step RK4 with step h = T/steps_per_period.
Because the equation is linear and H is T-periodic, the flow over any number
of periods is generated by the one-period step maps: :func:`period_table`
composes the RK4 steps of a single period once (recording intermediate
propagators on the sample grid) and :func:`propagate` reuses that table for
every subsequent period.  This is the same RK4 discretization as stepping the
state vector directly -- :func:`evolve_state` keeps the plain loop around as
the reference path -- but it makes long-horizon parameter sweeps cheap.

Norm is never renormalized; drift is monitored and reported so that an
integration step that is too coarse fails loudly instead of silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonFiniteStateError, NormDriftError
from .lattice import LatticeConfig, StateVector, hopping_matrix
from .tableio import fmt, write_csv

__all__ = [
    "Trajectory",
    "PeriodTable",
    "period_table",
    "evolve_state",
    "propagate",
    "min_population",
    "default_z_end",
    "trajectory_csv_text",
    "write_trajectory_csv",
]

NORM_DRIFT_LIMIT = 1e-6
DEFAULT_STEPS_PER_PERIOD = 2000
DEFAULT_SAMPLES_PER_PERIOD = 200


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the coupled-mode equation.

    ``amplitudes[i]`` is the state at ``z_samples[i]``; the first sample is
    always z = 0.
    """

    z_samples: np.ndarray
    amplitudes: np.ndarray
    norm_drift: float

    @property
    def n_sites(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def populations(self) -> np.ndarray:
        """|a_j(z)|^2, shape (n_samples, n_sites)."""
        return np.abs(self.amplitudes) ** 2

    @property
    def final_state(self) -> StateVector:
        return StateVector(self.amplitudes[-1], z=float(self.z_samples[-1]))


class PeriodTable(NamedTuple):
    """RK4 propagators over one modulation period.

    ``samples[m]`` maps a period-start state to the state ``m * stride`` steps
    later (``samples[0]`` is the identity); ``monodromy`` spans the full
    period.
    """

    monodromy: np.ndarray
    samples: np.ndarray
    stride: int
    step: float


def _rk4_span(config: LatticeConfig, state: np.ndarray, z0: float, n_steps: int,
              h: float, record_every: int = 0) -> tuple[np.ndarray, list[np.ndarray]]:
    """Advance ``state`` (vector or matrix of columns) by n_steps of RK4.

    When ``record_every`` > 0, a copy of the state is stored before steps
    0, record_every, 2*record_every, ...
    """
    h0 = hopping_matrix(config)
    amp, om = config.amplitude, config.omega
    recorded: list[np.ndarray] = []
    y = np.array(state, dtype=complex)
    # a diverging under-resolved run is reported via the norm/finiteness
    # checks, not as overflow warnings from the stages that produced it
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            if record_every and k % record_every == 0:
                recorded.append(y.copy())
            z = z0 + k * h
            s1 = amp * math.sin(om * z)
            s2 = amp * math.sin(om * (z + 0.5 * h))
            s3 = amp * math.sin(om * (z + h))

            k1 = h0 @ y
            k1[0] += s1 * y[0]
            k1 *= -1j
            y2 = y + (0.5 * h) * k1
            k2 = h0 @ y2
            k2[0] += s2 * y2[0]
            k2 *= -1j
            y3 = y + (0.5 * h) * k2
            k3 = h0 @ y3
            k3[0] += s2 * y3[0]
            k3 *= -1j
            y4 = y + h * k3
            k4 = h0 @ y4
            k4[0] += s3 * y4[0]
            k4 *= -1j
            y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return y, recorded


def period_table(config: LatticeConfig, steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
                 samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD) -> PeriodTable:
    """Compose the RK4 steps of one period, recording sample-grid propagators.

    Equivalent to propagating the N canonical basis vectors simultaneously
    from z = 0 to z = T.
    """
    _check_stepping(steps_per_period, samples_per_period)
    stride = steps_per_period // samples_per_period
    h = config.period / steps_per_period
    eye = np.eye(config.n_sites, dtype=complex)
    mono, recorded = _rk4_span(config, eye, 0.0, steps_per_period, h, record_every=stride)
    return PeriodTable(mono, np.array(recorded), stride, h)


def _check_stepping(steps_per_period: int, samples_per_period: int) -> None:
    if steps_per_period < 100:
        raise ValueError(f"steps_per_period must be >= 100, got {steps_per_period}")
    if samples_per_period < 1:
        raise ValueError("samples_per_period must be >= 1")
    if steps_per_period % samples_per_period:
        raise ValueError(
            f"steps_per_period ({steps_per_period}) must be divisible by "
            f"samples_per_period ({samples_per_period})"
        )


def evolve_state(config: LatticeConfig, amplitudes: np.ndarray, z_start: float,
                 z_end: float, n_steps: int) -> np.ndarray:
    """Plain RK4 loop from z_start to z_end (either direction) in n_steps.

    Reference path for cross-checks; :func:`propagate` produces the same
    discrete flow via the period table.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    h = (z_end - z_start) / n_steps
    out, _ = _rk4_span(config, np.asarray(amplitudes, dtype=complex), z_start, n_steps, h)
    return out


def default_z_end(config: LatticeConfig) -> float:
    """Propagation horizon for Min(P1) scans.

    Long enough to capture the slow beats that develop near resonances:
    50 modulation periods or 200 coupling lengths, whichever is larger.
    """
    slow = min(config.omega1, max(config.omega2, config.omega1))
    return max(50.0 * config.period, 200.0 / slow)


def propagate(config: LatticeConfig, initial: StateVector, z_end: float,
              steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
              samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD,
              table: PeriodTable | None = None) -> Trajectory:
    """Integrate i da/dz = H(z) a from z = 0 with fixed-step RK4.

    ``z_end`` is rounded up to the sample grid (multiples of T/samples_per_period).
    Raises :class:`NormDriftError` if the squared norm drifts by more than
    1e-6 at any sample, and :class:`NonFiniteStateError` on NaN/Inf.
    A precomputed :class:`PeriodTable` for the same config and stepping may be
    passed to share work with a Floquet analysis.
    """
    if z_end <= 0:
        raise ValueError(f"z_end must be positive, got {z_end}")
    if initial.n_sites != config.n_sites:
        raise ValueError("initial state size does not match n_sites")
    if initial.z != 0.0:
        raise ValueError("propagation starts at z=0; initial state must have z=0")
    if table is None:
        table = period_table(config, steps_per_period, samples_per_period)
    stride, h = table.stride, table.step
    per_period = len(table.samples)

    n_steps = stride * math.ceil(z_end / (stride * h) - 1e-12)
    n_steps = max(n_steps, stride)
    full_periods, rem = divmod(n_steps, steps_per_period)

    n_out = n_steps // stride + 1
    states = np.empty((n_out, config.n_sites), dtype=complex)
    a = initial.amplitudes.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for p in range(full_periods):
            states[p * per_period:(p + 1) * per_period] = table.samples @ a
            a = table.monodromy @ a
        if rem:
            states[full_periods * per_period:n_out - 1] = table.samples[: rem // stride] @ a
            states[n_out - 1] = table.samples[rem // stride] @ a
        else:
            states[n_out - 1] = a

    if not np.all(np.isfinite(states)):
        raise NonFiniteStateError("propagation produced non-finite amplitudes")
    norms = np.sum(np.abs(states) ** 2, axis=1)
    drift = float(np.max(np.abs(norms - norms[0])))
    if drift > NORM_DRIFT_LIMIT:
        raise NormDriftError(
            f"norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e}; increase steps_per_period"
        )

    z_samples = np.arange(n_out) * (stride * h)
    return Trajectory(z_samples, states, drift)


def min_population(traj: Trajectory, site: int = 1) -> float:
    """Minimum of |a_site(z)|^2 over the trajectory samples (site is 1-based).

    Values near 1 mean the light stayed trapped in the guide; near 0 means it
    fully tunneled away at some point.
    """
    if not 1 <= site <= traj.n_sites:
        raise ValueError(f"site must be in 1..{traj.n_sites}, got {site}")
    if traj.z_samples.size == 0:
        raise ValueError("empty trajectory")
    return float(traj.populations[:, site - 1].min())


def _trajectory_rows(traj: Trajectory):
    pops = traj.populations
    for i, z in enumerate(traj.z_samples):
        row = [fmt(z)]
        for a in traj.amplitudes[i]:
            row.append(fmt(a.real))
            row.append(fmt(a.imag))
        row.extend(fmt(p) for p in pops[i])
        yield row


def _trajectory_header(n: int) -> list[str]:
    header = ["z"]
    for j in range(1, n + 1):
        header += [f"re_a{j}", f"im_a{j}"]
    header += [f"p{j}" for j in range(1, n + 1)]
    return header


def trajectory_csv_text(traj: Trajectory) -> str:
    from .tableio import csv_text

    return csv_text(_trajectory_header(traj.n_sites), _trajectory_rows(traj))


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with columns z, re/im of each amplitude, then populations."""
    write_csv(path, _trajectory_header(traj.n_sites), _trajectory_rows(traj))
