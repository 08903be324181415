import math

import numpy as np
import pytest

from darkfloquet import continuum as ct
from darkfloquet.lattice import LatticeConfig

CONTINUUM_OMEGA = 3.45 * math.pi / 100.0


@pytest.fixture
def three_guide():
    """Reference driven three-guide chain (strong-drive regime)."""
    return LatticeConfig(3, 1.0, 1.0, 6.6, 3.0)


@pytest.fixture
def static_three_guide():
    return LatticeConfig(3, 1.0, 3.0, 0.0, 3.0)


def random_configs(count: int, seed: int = 7):
    """Deterministic assortment of valid configurations for invariant tests."""
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(count):
        configs.append(LatticeConfig(
            int(rng.integers(2, 7)),
            float(rng.uniform(0.2, 2.0)),
            float(rng.uniform(0.0, 6.0)),
            float(rng.uniform(-8.0, 8.0)),
            float(rng.uniform(0.5, 6.0)),
        ))
    return configs


@pytest.fixture(scope="session")
def beat_calibrations():
    """Dual-core beat periods for the three studied bottom spacings."""
    return {s: ct.calibrate_coupling(s) for s in (3.2, 2.22, 1.2)}


@pytest.fixture(scope="session")
def fig6_results():
    """Full-length three-guide continuum runs for the three bottom spacings."""
    out = {}
    for ws2 in (3.2, 2.22, 1.2):
        config = ct.chain_config(3, 3.2, ws2, omega=CONTINUUM_OMEGA)
        out[ws2] = ct.bpm_propagate(config, ct.top_guide_mode(config),
                                    record_every=10)
    return out
