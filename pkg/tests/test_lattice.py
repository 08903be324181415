import math

import numpy as np
import pytest

from darkfloquet.lattice import (
    LatticeConfig,
    dark_state_unmodulated,
    hamiltonian_at,
    hopping_matrix,
    unit_excitation,
    unmodulated_spectrum,
)

from conftest import random_configs


class TestConfigValidation:
    def test_rejects_single_site(self):
        with pytest.raises(ValueError):
            LatticeConfig(1, 1.0, 1.0, 6.6, 3.0)

    @pytest.mark.parametrize("kwargs", [
        dict(omega=0.0), dict(omega=-1.0), dict(omega1=0.0),
        dict(omega1=-0.5), dict(omega2=-0.1), dict(amplitude=math.inf),
    ])
    def test_rejects_bad_rates(self, kwargs):
        base = dict(n_sites=3, omega1=1.0, omega2=1.0, amplitude=6.6, omega=3.0)
        base.update(kwargs)
        with pytest.raises(ValueError):
            LatticeConfig(**base)

    def test_period(self):
        assert LatticeConfig(3, 1.0, 1.0, 6.6, 3.0).period == pytest.approx(2 * math.pi / 3)


class TestHamiltonian:
    def test_three_guide_structure_at_zero_phase(self):
        cfg = LatticeConfig(3, 1.0, 3.0, 6.6, 3.0)
        h = hamiltonian_at(cfg, 0.0)
        assert np.allclose(h, [[0, 1, 0], [1, 0, 3], [0, 3, 0]])

    def test_drive_vanishes_at_half_period(self):
        cfg = LatticeConfig(4, 1.0, 2.0, 6.6, 3.0)
        h = hamiltonian_at(cfg, math.pi / cfg.omega)
        assert abs(h[0, 0]) < 1e-15

    def test_five_guide_peak_drive(self):
        cfg = LatticeConfig(5, 1.0, 2.8, 6.6, 3.0)
        h = hamiltonian_at(cfg, math.pi / (2 * cfg.omega))
        assert h[0, 0] == pytest.approx(6.6)
        off = np.diag(h, 1)
        assert np.allclose(off, [1.0, 1.0, 1.0, 2.8])

    def test_two_guide_bond_is_boundary_coupling(self):
        # for N=2 the single bond is the boundary one
        cfg = LatticeConfig(2, 1.0, 0.7, 0.0, 3.0)
        h = hamiltonian_at(cfg, 0.3)
        assert h[0, 1] == pytest.approx(0.7)

    @pytest.mark.parametrize("cfg", random_configs(8))
    @pytest.mark.parametrize("zfrac", [0.0, 0.13, 0.5, 0.77])
    def test_hermitian_everywhere(self, cfg, zfrac):
        h = hamiltonian_at(cfg, zfrac * cfg.period)
        assert np.array_equal(h, h.conj().T)

    def test_only_top_site_driven(self):
        cfg = LatticeConfig(5, 1.0, 2.0, 6.6, 3.0)
        h = hamiltonian_at(cfg, 0.4)
        diag = np.diag(h)
        assert diag[0] == pytest.approx(6.6 * math.sin(3.0 * 0.4))
        assert np.all(diag[1:] == 0)


class TestSpectrum:
    def test_three_guide_closed_form(self):
        cfg = LatticeConfig(3, 1.0, 3.0, 0.0, 3.0)
        ev = unmodulated_spectrum(cfg)
        root = math.sqrt(10.0)
        assert np.allclose(ev, [-root, 0.0, root], atol=1e-12)

    def test_decoupled_boundary(self):
        ev = unmodulated_spectrum(LatticeConfig(3, 1.0, 0.0, 0.0, 3.0))
        assert np.allclose(ev, [-1.0, 0.0, 1.0], atol=1e-12)

    def test_five_guide_against_characteristic_polynomial(self):
        # independent oracle: roots of det(H - x I) expanded symbolically for
        # the 5-site chain with couplings (a, a, a, b):
        # x * (x**4 - (3 a^2 + b^2) x^2 + a^2 (a^2 + 2 b^2)) = 0
        a, b = 1.0, 2.8
        coeffs = [1.0, 0.0, -(3 * a**2 + b**2), 0.0, a**2 * (a**2 + 2 * b**2), 0.0]
        roots = np.sort(np.real(np.roots(coeffs)))
        ev = unmodulated_spectrum(LatticeConfig(5, a, b, 0.0, 3.0))
        assert np.allclose(ev, roots, atol=1e-9)
        assert ev[2] == pytest.approx(0.0, abs=1e-12)
        # the outer level spacing sits at the drive frequency used for the
        # five-guide one-photon resonance
        assert ev[-1] == pytest.approx(2.9972, abs=2e-4)

    @pytest.mark.parametrize("cfg", random_configs(10, seed=11))
    def test_spectrum_symmetric_about_zero(self, cfg):
        ev = unmodulated_spectrum(cfg)
        assert np.allclose(ev, -ev[::-1], atol=1e-12)

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_odd_chain_has_zero_eigenvalue(self, n):
        cfg = LatticeConfig(n, 0.9, 2.3, 0.0, 3.0)
        ev = unmodulated_spectrum(cfg)
        assert np.min(np.abs(ev)) < 1e-12


class TestDarkState:
    def test_imbalanced_form(self):
        cfg = LatticeConfig(3, 1.0, 3.0, 0.0, 3.0)
        v = dark_state_unmodulated(cfg).amplitudes
        expected = np.array([-3.0, 0.0, 1.0]) / math.sqrt(10.0)
        assert np.allclose(v, expected, atol=1e-15)

    def test_balanced_couplings(self):
        cfg = LatticeConfig(3, 1.0, 1.0, 0.0, 3.0)
        v = dark_state_unmodulated(cfg).amplitudes
        assert np.allclose(np.abs(v) ** 2, [0.5, 0.0, 0.5], atol=1e-15)

    def test_trapping_weight(self):
        cfg = LatticeConfig(3, 1.0, 2.828, 0.0, 3.0)
        v = dark_state_unmodulated(cfg).amplitudes
        weight = abs(v[0]) ** 2
        assert weight == pytest.approx(2.828**2 / (1 + 2.828**2), rel=1e-12)
        assert weight > 0.5

    @pytest.mark.parametrize("omega2", [0.0, 0.4, 1.0, 3.0, 7.5])
    def test_annihilated_by_static_hamiltonian(self, omega2):
        cfg = LatticeConfig(3, 1.3, omega2, 0.0, 3.0)
        v = dark_state_unmodulated(cfg).amplitudes
        assert np.abs(hopping_matrix(cfg) @ v).max() < 1e-12

    def test_rejects_other_sizes(self):
        with pytest.raises(ValueError):
            dark_state_unmodulated(LatticeConfig(4, 1.0, 1.0, 0.0, 3.0))


class TestStateVector:
    def test_unit_excitation(self):
        s = unit_excitation(4, site=2)
        assert np.allclose(s.amplitudes, [0, 1, 0, 0])

    def test_rejects_out_of_range_site(self):
        with pytest.raises(ValueError):
            unit_excitation(3, site=4)

    def test_rejects_unnormalized(self):
        from darkfloquet.lattice import StateVector
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 1.0, 0.0]))
