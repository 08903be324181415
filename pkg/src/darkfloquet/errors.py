"""Exception types shared across the package.

Configuration problems raise plain ``ValueError``; everything that can only be
detected while crunching numbers derives from :class:`NumericalError` so the
CLI can map it to a dedicated exit code.
"""


class NumericalError(RuntimeError):
    """A numerical invariant was violated during a computation."""


class NormDriftError(NumericalError):
    """State norm drifted beyond tolerance (integration step too coarse)."""


class NonFiniteStateError(NumericalError):
    """Integration produced NaN or Inf amplitudes."""


class UnitarityError(NumericalError):
    """One-period propagator failed the unitarity check."""


class NonFloquetModeError(NumericalError):
    """Input vector is not an eigenvector of the one-period propagator."""


class DegenerateDarkModeError(NumericalError):
    """More than one mode matched the zero-quasi-energy criterion."""


class PowerDriftError(NumericalError):
    """Total optical power drifted beyond tolerance in a continuum run."""


class BoundaryLeakError(NumericalError):
    """Too much power reached the edge band of the transverse domain."""


class BeatNotFoundError(NumericalError):
    """No full coupling beat observed within the propagation window."""


class NoBoundModeError(NumericalError):
    """Mode relaxation converged to a non-bound (beta <= 0) state."""


class ConvergenceError(NumericalError):
    """An iterative solver exhausted its iteration budget."""
