"""One-period propagator, quasi-energies, Floquet modes and the dark mode.

Quasi-energies are folded into the first Brillouin zone (-omega/2, omega/2]
via eps = -arg(lambda)/T with the principal argument, which keeps the exact
zero branch representable.  Eigenvectors of the monodromy are re-orthonormalized
within (near-)degenerate eigenvalue clusters, where the individual vectors are
not well defined anyway.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDarkModeError, NonFloquetModeError, UnitarityError
from .integrate import (
    DEFAULT_SAMPLES_PER_PERIOD,
    DEFAULT_STEPS_PER_PERIOD,
    PeriodTable,
    period_table,
)
from .lattice import LatticeConfig, StateVector

__all__ = [
    "FloquetSolution",
    "monodromy",
    "unitarity_defect",
    "quasienergies",
    "solve",
    "avg_populations",
    "dark_floquet",
    "match_modes",
    "nonzero_branch_gap",
    "solution_to_json",
]

UNITARITY_LIMIT = 1e-6
_CLUSTER_TOL = 1e-7  # eigenvalue separation on the unit circle


@dataclass(frozen=True)
class FloquetSolution:
    """Eigen-decomposition of the one-period propagator.

    ``modes[:, k]`` is the k-th Floquet mode at z = 0 and
    ``avg_populations[k, j]`` its time-averaged population on site j+1.
    ``dark_index`` is the unique zero-quasi-energy mode, or None when no mode
    (or more than one, see ``n_zero_modes``) matches.
    """

    omega: float
    quasienergies: np.ndarray
    modes: np.ndarray
    avg_populations: np.ndarray
    dark_index: int | None
    n_zero_modes: int
    defect: float

    @property
    def n_sites(self) -> int:
        return self.quasienergies.size

    def mode_state(self, k: int) -> StateVector:
        return StateVector(self.modes[:, k], z=0.0)


def monodromy(config: LatticeConfig,
              steps_per_period: int = DEFAULT_STEPS_PER_PERIOD) -> np.ndarray:
    """U(T, 0): RK4 propagation of the N canonical basis vectors over one period."""
    table = period_table(config, steps_per_period, samples_per_period=1)
    _require_unitary(table.monodromy)
    return table.monodromy


def unitarity_defect(u: np.ndarray) -> float:
    """max |U^dag U - I|."""
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())


def _require_unitary(u: np.ndarray) -> float:
    defect = unitarity_defect(u)
    if defect > UNITARITY_LIMIT:
        raise UnitarityError(
            f"unitarity defect {defect:.3e} exceeds {UNITARITY_LIMIT:.0e}"
        )
    return defect


def _fold(eps: np.ndarray, omega: float) -> np.ndarray:
    """Fold values into (-omega/2, omega/2]."""
    folded = eps - omega * np.round(eps / omega)
    return np.where(folded <= -0.5 * omega, folded + omega, folded)


def quasienergies(u: np.ndarray, omega: float) -> np.ndarray:
    """Quasi-energies eps_k = -arg(lambda_k)/T in (-omega/2, omega/2], ascending."""
    _require_unitary(u)
    lam = np.linalg.eigvals(u)
    t = 2.0 * np.pi / omega
    return np.sort(_fold(-np.angle(lam) / t, omega))


def _orthonormal_eigensystem(u: np.ndarray, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of unitary U with cluster-wise re-orthonormalization.

    Returns (eps ascending, modes as columns).  Eigenvectors whose eigenvalues
    sit closer than _CLUSTER_TOL on the unit circle span a (numerically)
    degenerate subspace; a QR pass makes them orthonormal without leaving it.
    """
    lam, vec = np.linalg.eig(u)
    t = 2.0 * np.pi / omega
    eps = _fold(-np.angle(lam) / t, omega)
    order = np.argsort(eps, kind="stable")
    eps, lam, vec = eps[order], lam[order], vec[:, order]
    vec /= np.linalg.norm(vec, axis=0)

    n = lam.size
    # cluster consecutive eigenvalues on the unit circle, including the wrap
    # between the last and first of the sorted list
    adjacent = np.abs(lam - np.roll(lam, -1)) < _CLUSTER_TOL  # i joined to i+1 (mod n)
    clusters: list[list[int]] = []
    current = [0]
    for i in range(n - 1):
        if adjacent[i]:
            current.append(i + 1)
        else:
            clusters.append(current)
            current = [i + 1]
    clusters.append(current)
    if len(clusters) > 1 and adjacent[n - 1]:
        clusters[0] = clusters.pop() + clusters[0]
    for group in clusters:
        if len(group) > 1:
            q, _ = np.linalg.qr(vec[:, group])
            vec[:, group] = q
    return eps, vec


def solve(config: LatticeConfig,
          steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
          samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD,
          eps_tol: float | None = None,
          table: PeriodTable | None = None) -> FloquetSolution:
    """Full Floquet analysis of one configuration.

    ``eps_tol`` is the zero-quasi-energy window for dark-mode identification
    (default 1e-6 * omega).  A precomputed :class:`PeriodTable` may be passed
    to share work with a trajectory computation.
    """
    if table is None:
        table = period_table(config, steps_per_period, samples_per_period)
    defect = _require_unitary(table.monodromy)
    eps, modes = _orthonormal_eigensystem(table.monodromy, config.omega)

    # time-averaged populations: trapezoidal average over one period (the
    # integrand is T-periodic, so this is the plain mean over the sample grid)
    stacked = table.samples @ modes  # (samples, site, mode)
    avg = np.mean(np.abs(stacked) ** 2, axis=0).T.copy()  # (mode, site)

    tol = 1e-6 * config.omega if eps_tol is None else eps_tol
    zero = np.flatnonzero(np.abs(eps) < tol)
    dark = int(zero[0]) if zero.size == 1 else None
    return FloquetSolution(config.omega, eps, modes, avg, dark, int(zero.size), defect)


def avg_populations(config: LatticeConfig, mode: StateVector,
                    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
                    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD) -> np.ndarray:
    """Time-averaged populations <P_j> of one Floquet mode over a period.

    The input must be an eigenvector of the monodromy: U v = lambda v within
    1e-6 in max-norm, otherwise :class:`NonFloquetModeError` is raised.
    """
    table = period_table(config, steps_per_period, samples_per_period)
    _require_unitary(table.monodromy)
    v = mode.amplitudes
    lam = np.vdot(v, table.monodromy @ v)
    residual = float(np.abs(table.monodromy @ v - lam * v).max())
    if residual > 1e-6:
        raise NonFloquetModeError(
            f"vector is not a Floquet mode (eigen-residual {residual:.3e})"
        )
    states = table.samples @ v
    return np.mean(np.abs(states) ** 2, axis=0)


def dark_floquet(solution: FloquetSolution, eps_tol: float | None = None) -> int | None:
    """Index of the unique mode with |eps| < eps_tol, or None if there is none.

    Raises :class:`DegenerateDarkModeError` when several quasi-energies fall
    inside the window (exact crossings), where the identification is ill-posed.
    """
    tol = 1e-6 * solution.omega if eps_tol is None else eps_tol
    zero = np.flatnonzero(np.abs(solution.quasienergies) < tol)
    if zero.size == 0:
        return None
    if zero.size > 1:
        raise DegenerateDarkModeError(
            f"{zero.size} modes within |eps| < {tol:.3e}; dark mode is ambiguous"
        )
    return int(zero[0])


def match_modes(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Greedy maximum-overlap matching between two mode bases (columns).

    Returns ``perm`` such that ``current[:, perm[k]]`` continues
    ``previous[:, k]``.  Sorted quasi-energy order alone swaps branches at
    close approaches; overlap continuity keeps a branch identity across a
    parameter sweep.
    """
    overlap = np.abs(previous.conj().T @ current)
    n = overlap.shape[0]
    perm = np.full(n, -1, dtype=int)
    work = overlap.copy()
    for _ in range(n):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        perm[i] = j
        work[i, :] = -1.0
        work[:, j] = -1.0
    return perm


def nonzero_branch_gap(eps: np.ndarray, omega: float) -> float:
    """Closest approach (circular distance) of the branches away from zero.

    Drops the quasi-energy nearest zero and returns the minimum pairwise
    Brillouin-zone distance among the rest.
    """
    eps = np.asarray(eps, dtype=float)
    if eps.size < 3:
        raise ValueError("need at least three quasi-energies")
    rest = np.delete(eps, int(np.argmin(np.abs(eps))))
    gaps = []
    for i in range(rest.size):
        for j in range(i + 1, rest.size):
            d = abs(rest[i] - rest[j]) % omega
            gaps.append(min(d, omega - d))
    return float(min(gaps))


def solution_to_json(solution: FloquetSolution, indent: int | None = None) -> str:
    """JSON export: quasi-energies, dark index and per-mode populations."""
    payload = {
        "omega": solution.omega,
        "quasienergies": solution.quasienergies.tolist(),
        "dark_index": solution.dark_index,
        "n_zero_modes": solution.n_zero_modes,
        "avg_populations": solution.avg_populations.tolist(),
        "unitarity_defect": solution.defect,
    }
    return json.dumps(payload, indent=indent, sort_keys=True)
