"""Driven tight-binding chain: Hamiltonian construction and static results.

The model is an N-site chain where sites 1..N-1 are coupled by ``omega1``,
the boundary bond (N-1, N) has its own strength ``omega2``, and only site 1
carries a harmonic on-site modulation ``amplitude * sin(omega * z)``.  Site
indices are 1-based in every docstring and public argument (site 1 = driven
"top" guide, site N = "bottom" boundary guide); storage is 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LatticeConfig",
    "StateVector",
    "hamiltonian_at",
    "hopping_matrix",
    "unmodulated_spectrum",
    "dark_state_unmodulated",
    "unit_excitation",
]


@dataclass(frozen=True)
class LatticeConfig:
    """Parameters of the driven chain.

    All rates are in units of inverse propagation length (1/z).
    """

    n_sites: int
    omega1: float
    omega2: float
    amplitude: float
    omega: float

    def __post_init__(self):
        if not isinstance(self.n_sites, int) or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.omega1 > 0:
            raise ValueError(f"omega1 must be positive, got {self.omega1}")
        if self.omega2 < 0:
            raise ValueError(f"omega2 must be non-negative, got {self.omega2}")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")

    @property
    def period(self) -> float:
        """Modulation period T = 2*pi/omega."""
        return 2.0 * math.pi / self.omega

    def drive(self, z: float) -> float:
        """On-site modulation of site 1, sigma(z) = amplitude*sin(omega*z)."""
        return self.amplitude * math.sin(self.omega * z)

    def replace(self, **changes) -> "LatticeConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class StateVector:
    """N complex amplitudes at propagation coordinate z, unit total norm."""

    amplitudes: np.ndarray
    z: float = 0.0
    norm_tol: float = field(default=1e-6, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-d array with >= 2 entries")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > self.norm_tol:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {self.norm_tol}")

    @property
    def n_sites(self) -> int:
        return self.amplitudes.size

    @property
    def populations(self) -> np.ndarray:
        """|a_j|^2 per site."""
        return np.abs(self.amplitudes) ** 2


def unit_excitation(n_sites: int, site: int = 1) -> StateVector:
    """All light in one guide: a_site = 1 (site is 1-based)."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site must be in 1..{n_sites}, got {site}")
    amps = np.zeros(n_sites, dtype=complex)
    amps[site - 1] = 1.0
    return StateVector(amps, z=0.0)


def hopping_matrix(config: LatticeConfig) -> np.ndarray:
    """Static (drive-off) part of the Hamiltonian.

    Nearest-neighbour couplings omega1 on bonds (1,2)..(N-2,N-1) and omega2 on
    the boundary bond (N-1,N); zero diagonal.  For N=2 the single bond carries
    omega2.
    """
    n = config.n_sites
    h = np.zeros((n, n), dtype=complex)
    for j in range(n - 2):
        h[j, j + 1] = h[j + 1, j] = config.omega1
    h[n - 2, n - 1] = h[n - 1, n - 2] = config.omega2
    return h


def hamiltonian_at(config: LatticeConfig, z: float) -> np.ndarray:
    """Hermitian H(z) of the coupled-mode equation i da/dz = H(z) a.

    H[0, 0] = amplitude*sin(omega*z); all other diagonal entries are zero.
    """
    h = hopping_matrix(config)
    h[0, 0] = config.drive(z)
    return h


def unmodulated_spectrum(config: LatticeConfig) -> np.ndarray:
    """Eigenvalues of the static Hamiltonian, ascending.

    For N=3 these are 0 and +-sqrt(omega1**2 + omega2**2).  The chain is
    bipartite, so the spectrum is symmetric about zero and odd N always
    contributes an exact zero eigenvalue.
    """
    return np.linalg.eigvalsh(hopping_matrix(config))


def dark_state_unmodulated(config: LatticeConfig) -> StateVector:
    """Zero-energy eigenstate (-omega2/omega1, 0, 1)/norm of the static 3-site chain.

    Only defined for N=3.  Its site-1 weight omega2**2/(omega1**2 + omega2**2)
    exceeds 1/2 whenever omega2 > omega1, which is the static self-trapping
    condition.
    """
    if config.n_sites != 3:
        raise ValueError(f"dark state is defined for n_sites=3, got {config.n_sites}")
    v = np.array([-config.omega2 / config.omega1, 0.0, 1.0], dtype=complex)
    v /= np.linalg.norm(v)
    return StateVector(v, z=0.0)
