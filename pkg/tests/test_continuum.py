import math

import numpy as np
import pytest
import scipy.linalg as sla

from darkfloquet import continuum as ct
from darkfloquet.errors import BeatNotFoundError, BoundaryLeakError, NoBoundModeError
from darkfloquet.integrate import propagate as cm_propagate
from darkfloquet.lattice import LatticeConfig, unit_excitation

from conftest import CONTINUUM_OMEGA

SMALL_GRID = ct.ContinuumGrid(half_width=12.0, n_x=1024, dz=0.02, z_max=60.0)


class TestRefractiveIndex:
    def test_single_guide_peak(self):
        cfg = ct.ContinuumConfig(1, 2.78, 0.3, 0.0, 1.0, (0.0,), SMALL_GRID)
        assert ct.refractive_index(cfg, 0.0, 0.37) == pytest.approx(1.0, abs=1e-12)

    def test_modulated_top_guide_peak(self):
        omega = CONTINUUM_OMEGA
        cfg = ct.chain_config(3, 3.2, 3.2, mu=0.2, omega=omega)
        z = math.pi / (2 * omega)
        assert ct.refractive_index(cfg, 3.2, z) == pytest.approx(1.2, abs=1e-12)

    def test_super_gaussian_tail_negligible(self):
        cfg = ct.ContinuumConfig(1, 2.78, 0.3, 0.0, 1.0, (0.0,), SMALL_GRID)
        assert ct.refractive_index(cfg, 2 * 0.3, 0.0) == pytest.approx(math.exp(-64.0), rel=1e-9)

    def test_only_top_guide_modulated(self):
        cfg = ct.chain_config(3, 3.2, 3.2, mu=0.2, omega=1.0)
        z = math.pi / 2
        for x in (0.0, -3.2):  # middle and bottom guide centers
            assert ct.refractive_index(cfg, x, z) == pytest.approx(1.0, abs=1e-12)


class TestGeometry:
    def test_chain_positions(self):
        assert ct.chain_positions(3, 3.2, 2.22) == (3.2, 0.0, -2.22)
        assert ct.chain_positions(5, 1.0, 0.5) == (1.0, 0.0, -1.0, -2.0, -2.5)

    def test_positions_must_decrease(self):
        with pytest.raises(ValueError):
            ct.ContinuumConfig(2, 2.78, 0.3, 0.0, 1.0, (0.0, 1.0), SMALL_GRID)

    def test_domain_margin_enforced(self):
        grid = ct.ContinuumGrid(half_width=4.0, n_x=256, dz=0.02, z_max=10.0)
        with pytest.raises(ValueError):
            ct.ContinuumConfig(2, 2.78, 0.3, 0.0, 1.0, (3.0, -3.0), grid)


class TestFundamentalMode:
    def test_symmetric_single_lobed(self):
        mode = ct.fundamental_mode(2.78, 0.3, SMALL_GRID)
        field = np.real(mode.field)
        mirrored = np.roll(field[::-1], 1)  # grid omits +half_width
        assert np.abs(field - mirrored).max() < 1e-8
        assert np.all(field > -1e-10)  # no interior sign change

    def test_beta_regression_and_fd_cross_check(self):
        grid = ct.ContinuumGrid()
        mode = ct.fundamental_mode(2.78, 0.3, grid)
        assert mode.beta == pytest.approx(0.7648550, abs=1e-5)
        # independent oracle: dense finite-difference eigensolve on the grid
        x, dx = grid.x, grid.dx
        v = -2.78 * np.exp(-(((x) / 0.3) ** 6))
        w = sla.eigh_tridiagonal(1.0 / dx**2 + v,
                                 np.full(x.size - 1, -0.5 / dx**2),
                                 select="i", select_range=(0, 0))[0]
        assert mode.beta == pytest.approx(-w[0], abs=5e-4)

    def test_unit_power(self):
        mode = ct.fundamental_mode(2.78, 0.3, SMALL_GRID)
        assert np.sum(np.abs(mode.field) ** 2) * SMALL_GRID.dx == pytest.approx(1.0, abs=1e-10)

    def test_deep_well_confines_mode(self):
        mode = ct.fundamental_mode(500.0, 0.3, SMALL_GRID)
        inside = np.abs(SMALL_GRID.x) < 0.3
        assert np.sum(np.abs(mode.field[inside]) ** 2) * SMALL_GRID.dx > 0.9

    def test_flat_potential_has_no_bound_mode(self):
        with pytest.raises(NoBoundModeError):
            ct.fundamental_mode(0.0, 0.3, SMALL_GRID)


class TestBpm:
    def test_power_conserved_and_recorded(self):
        cfg = ct.chain_config(3, 3.2, 3.2, omega=CONTINUUM_OMEGA,
                              grid=ct.ContinuumGrid(z_max=50.0))
        res = ct.bpm_propagate(cfg, ct.top_guide_mode(cfg), record_every=10)
        assert np.abs(res.total_power / res.total_power[0] - 1.0).max() < 1e-10
        assert res.z[0] == 0.0 and res.z[-1] == pytest.approx(50.0)
        assert res.guide_powers.shape == (res.z.size, 3)
        # per-guide bins partition the domain
        assert np.allclose(res.guide_powers.sum(axis=1), res.total_power)

    def test_rejects_unnormalized_input(self):
        cfg = ct.chain_config(3, 3.2, 3.2, omega=CONTINUUM_OMEGA,
                              grid=ct.ContinuumGrid(z_max=10.0))
        field = ct.top_guide_mode(cfg)
        with pytest.raises(ValueError):
            ct.bpm_propagate(cfg, ct.Field(2.0 * field.values), record_every=10)

    def test_tilted_beam_trips_edge_guard(self):
        grid = ct.ContinuumGrid(half_width=20.0, n_x=2048, dz=0.02, z_max=30.0)
        cfg = ct.ContinuumConfig(1, 2.78, 0.3, 0.0, 1.0, (0.0,), grid)
        mode = ct.fundamental_mode(2.78, 0.3, grid)
        tilted = mode.field * np.exp(3.0j * grid.x)
        with pytest.raises(BoundaryLeakError):
            ct.bpm_propagate(cfg, ct.Field(tilted), record_every=10)

    def test_symmetric_supermode_is_static(self):
        # an even superposition of the two shifted single-guide modes
        # approximates the symmetric supermode, so per-guide powers barely move
        grid = ct.ContinuumGrid(z_max=100.0)
        cfg = ct.ContinuumConfig(2, 2.78, 0.3, 0.0, 1.0, (1.6, -1.6), grid)
        up = ct.fundamental_mode(2.78, 0.3, grid, center=1.6).field
        dn = ct.fundamental_mode(2.78, 0.3, grid, center=-1.6).field
        combo = up + dn
        combo /= math.sqrt(np.sum(np.abs(combo) ** 2) * grid.dx)
        res = ct.bpm_propagate(cfg, ct.Field(combo), record_every=25)
        frac = res.guide_fractions[:, 0]
        assert np.abs(frac - frac[0]).max() < 0.02

    def test_grid_convergence(self):
        # doubling the transverse resolution and halving dz moves the traces
        # by less than 1e-3
        base_grid = ct.ContinuumGrid(20.0, 2048, 0.005, 100.0)
        fine_grid = ct.ContinuumGrid(20.0, 4096, 0.0025, 100.0)
        base_cfg = ct.chain_config(3, 3.2, 2.22, omega=CONTINUUM_OMEGA, grid=base_grid)
        fine_cfg = ct.chain_config(3, 3.2, 2.22, omega=CONTINUUM_OMEGA, grid=fine_grid)
        base = ct.bpm_propagate(base_cfg, ct.top_guide_mode(base_cfg), record_every=40)
        fine = ct.bpm_propagate(fine_cfg, ct.top_guide_mode(fine_cfg), record_every=80)
        assert np.allclose(base.z, fine.z)
        assert np.abs(base.guide_fractions - fine.guide_fractions).max() < 1e-3

    def test_snapshots_and_field_dump(self, tmp_path):
        grid = ct.ContinuumGrid(half_width=12.0, n_x=512, dz=0.02, z_max=5.0)
        cfg = ct.ContinuumConfig(2, 2.78, 0.3, 0.0, 1.0, (1.6, -1.6), grid)
        res = ct.bpm_propagate(cfg, ct.top_guide_mode(cfg), record_every=10,
                               snapshot_zs=(2.0,))
        assert len(res.snapshots) == 1
        snap = res.snapshots[0]
        assert snap.z == pytest.approx(2.0)
        path = tmp_path / "field.txt"
        ct.write_field_txt(snap, grid, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,re,im"
        assert len(lines) == grid.n_x + 1


class TestCalibration:
    def test_beat_periods_match_quoted_values(self, beat_calibrations):
        assert beat_calibrations[3.2].beat_period == pytest.approx(99.41, abs=0.2)
        assert beat_calibrations[2.22].beat_period == pytest.approx(28.52, abs=0.1)
        ratio = beat_calibrations[3.2].beat_period / beat_calibrations[2.22].beat_period
        assert ratio == pytest.approx(3.45, abs=0.05)

    def test_coupling_from_beat(self, beat_calibrations):
        cal = beat_calibrations[3.2]
        assert cal.coupling == pytest.approx(math.pi / cal.beat_period, rel=1e-12)

    def test_decoupled_guides_raise(self):
        with pytest.raises(BeatNotFoundError):
            ct.calibrate_coupling(12.0, grid=ct.ContinuumGrid(z_max=100.0))

    def test_supermode_splitting_cross_check(self, beat_calibrations):
        # independent oracle: T_b = 2 pi / (E_antisym - E_sym) from a dense
        # eigensolve of the dual-core potential
        grid = ct.ContinuumGrid()
        x, dx = grid.x, grid.dx
        v = -2.78 * (np.exp(-(((x - 1.6) / 0.3) ** 6)) + np.exp(-(((x + 1.6) / 0.3) ** 6)))
        w = sla.eigh_tridiagonal(1.0 / dx**2 + v,
                                 np.full(x.size - 1, -0.5 / dx**2),
                                 select="i", select_range=(0, 1))[0]
        t_b = 2.0 * math.pi / (w[1] - w[0])
        assert beat_calibrations[3.2].beat_period == pytest.approx(t_b, rel=0.02)


class TestDriveCalibrationAndCrossModel:
    @pytest.fixture(scope="class")
    def drive_calibration(self):
        return ct.calibrate_drive(3.2, CONTINUUM_OMEGA)

    def test_slope_agrees_with_perturbative_overlap(self, drive_calibration):
        # independent route: first-order shift of the guided mode's
        # propagation constant, dA/dmu = p * <mode| profile |mode>
        grid = ct.ContinuumGrid()
        mode = ct.fundamental_mode(2.78, 0.3, grid)
        overlap = float(np.sum(np.abs(mode.field) ** 2
                               * np.exp(-((grid.x / 0.3) ** 6))) * grid.dx)
        perturbative = 2.78 * overlap
        assert abs(drive_calibration.amplitude_per_mu - perturbative) \
            / perturbative < 0.15

    def test_cdt_depth_is_interior(self, drive_calibration):
        mu = drive_calibration.mu_at_cdt
        assert drive_calibration.mu_values[0] < mu < drive_calibration.mu_values[-1]

    def test_coupled_mode_model_reproduces_continuum_minima(
            self, drive_calibration, beat_calibrations, fig6_results):
        # the discrete model with calibrated couplings and drive reproduces
        # the continuum top-guide minimum within 0.15 for all three spacings
        omega1 = beat_calibrations[3.2].coupling
        amplitude = drive_calibration.amplitude(0.2)
        for ws2, run in fig6_results.items():
            omega2 = beat_calibrations[ws2].coupling
            cfg = LatticeConfig(3, omega1, omega2, amplitude, CONTINUUM_OMEGA)
            traj = cm_propagate(cfg, unit_excitation(3, 1), 400.0)
            discrete = traj.populations[:, 0].min()
            continuum_min = run.guide_fractions[:, 0].min()
            assert abs(discrete - continuum_min) < 0.15


class TestPowerCsv:
    def test_header_and_shape(self, tmp_path):
        grid = ct.ContinuumGrid(half_width=12.0, n_x=512, dz=0.02, z_max=4.0)
        cfg = ct.ContinuumConfig(2, 2.78, 0.3, 0.0, 1.0, (1.6, -1.6), grid)
        res = ct.bpm_propagate(cfg, ct.top_guide_mode(cfg), record_every=20)
        path = tmp_path / "power.csv"
        ct.write_power_csv(res, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "z,P_guide1,P_guide2,P_total"
        assert len(lines) == res.z.size + 1
