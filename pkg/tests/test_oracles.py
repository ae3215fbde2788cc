import numpy as np
import pytest

from src.errors import ParameterError, RelaxationError
from src.experiments.figures import OVERSHOOT_STEP, overshoot_grid
from src.kinetics.tumbling import KineticParams
from src.oracles.macroscopic import (MacroParams, diffusion_limit_diffusivity, macro_density,
                                     macro_speed, macro_upsilon)
from src.oracles.overshoot import overshoot_detect
from src.oracles.relaxation import cell_centres, l1_distance, relax_to_steady
from src.spectral.case_modes import dispersion_roots
from src.spectral.transfer import solve_weights
from src.waves.wave_finder import stationary_cluster


@pytest.fixture
def macro():
    return MacroParams(chi_s=0.48, chi_n=0.44, alpha=50.0, d_s=0.5)


@pytest.fixture
def relax_params():
    return KineticParams(chi_s=0.45, chi_n=0.05)


class TestMacroscopic:
    def test_speed(self, macro):
        c = macro_speed(macro)
        assert c == pytest.approx(0.41986, abs=1e-3)
        assert 0 < c < macro.chi_n

    def test_speed_without_nutrient(self):
        assert macro_speed(MacroParams(chi_s=0.3, chi_n=0.0, alpha=1.0, d_s=1.0)) == 0.0

    def test_upsilon_vanishes_at_speed(self, macro):
        assert macro_upsilon(macro, macro_speed(macro)) == pytest.approx(0.0, abs=1e-10)

    def test_upsilon_changes_sign(self, macro):
        assert macro_upsilon(macro, 0.0) > 0
        assert macro_upsilon(macro, macro.chi_n) < 0

    def test_inadmissible_speed(self, macro):
        lo, hi = macro.admissible_interval()
        assert (lo, hi) == pytest.approx((-0.04, 0.92))
        with pytest.raises(ParameterError):
            macro_upsilon(macro, 1.0)
        with pytest.raises(ParameterError):
            macro_density(macro, -0.5, 0.0)

    def test_density(self, macro):
        c = 0.1
        lam_minus, lam_plus = macro.exponents(c)
        assert macro_density(macro, c, 0.0) == 1.0
        assert macro_density(macro, c, 2.0) == pytest.approx(np.exp(-2.0 * lam_plus))
        assert macro_density(macro, c, -2.0) == pytest.approx(np.exp(-2.0 * lam_minus))
        assert macro_density(macro, c, np.array([-1.0, 1.0])).shape == (2,)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            MacroParams(chi_s=0.0, chi_n=0.1, alpha=1.0, d_s=1.0)
        with pytest.raises(ParameterError):
            MacroParams(chi_s=0.3, chi_n=-0.1, alpha=1.0, d_s=1.0)

    def test_kinetic_exponents_approach_diffusion_limit(self, two_velocity):
        params = KineticParams(chi_s=0.05, chi_n=0.02)
        c = 0.01
        basis = dispersion_roots(two_velocity, params, c)
        d_rho = diffusion_limit_diffusivity(two_velocity)
        assert d_rho == pytest.approx(1.0)
        lam_minus, lam_plus = MacroParams(chi_s=0.05, chi_n=0.02, alpha=1.0, d_s=1.0,
                                          d_rho=d_rho).exponents(c)
        assert basis.principal_left.exponent == pytest.approx(lam_minus, rel=1e-2)
        assert basis.principal_right.exponent == pytest.approx(lam_plus, rel=1e-2)


class TestRelaxation:
    def test_cell_centres_avoid_origin(self):
        z = cell_centres(30.0, 600)
        assert z.size == 600
        assert np.min(np.abs(z)) == pytest.approx(0.05)
        assert z[0] == pytest.approx(-29.95)

    def test_converges_to_fixed_point(self, two_velocity, relax_params):
        result = relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=600,
                                 t_end=1500.0, tol=1e-9)
        assert result.converged
        assert result.residuals[-1] < 1e-9
        assert result.dz * np.sum(result.f @ two_velocity.weights) == pytest.approx(1.0)
        assert np.all(result.f > 0)
        assert result.interface_flux.shape == (601,)
        assert result.faces.size == 601

        restart = relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=600,
                                  t_end=1.0, tol=0.0, initial=result.f)
        assert np.all(restart.residuals < 1e-8)

    def test_modal_profile_is_nearly_steady(self, two_velocity, relax_params):
        profile = solve_weights(dispersion_roots(two_velocity, relax_params, 0.05))
        result = relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=3000,
                                 t_end=5.0, initial=profile)
        assert l1_distance(result, profile) < 1e-3

    @pytest.mark.slow
    def test_random_data_relax_to_modal_profile(self, two_velocity, relax_params):
        profile = solve_weights(dispersion_roots(two_velocity, relax_params, 0.05))
        result = relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=3000,
                                 t_end=600.0, tol=1e-10)
        assert l1_distance(result, profile) < 1e-3
        interior = np.abs(result.faces) <= 15.0
        assert np.max(np.abs(result.interface_flux[interior])) < 1e-5

    def test_four_velocity_modal_profile_is_nearly_steady(self, four_velocity, relax_params):
        basis = dispersion_roots(four_velocity, relax_params, 0.05)
        assert len(basis.left_modes) == 2 and len(basis.right_modes) == 2
        profile = solve_weights(basis)
        result = relax_to_steady(four_velocity, relax_params, 0.05, L=30.0, nz=3000,
                                 t_end=5.0, initial=profile)
        assert l1_distance(result, profile) < 1e-3

    @pytest.mark.slow
    def test_four_velocity_random_data_relax_to_modal_profile(self, four_velocity, relax_params):
        profile = solve_weights(dispersion_roots(four_velocity, relax_params, 0.05))
        result = relax_to_steady(four_velocity, relax_params, 0.05, L=30.0, nz=3000,
                                 t_end=600.0, tol=1e-10, seed=3)
        assert np.all(result.f > 0)
        assert l1_distance(result, profile) < 1e-3

    def test_cfl_violation(self, two_velocity, relax_params):
        dz = 2 * 30.0 / 600
        with pytest.raises(RelaxationError):
            relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=600, dt=2 * dz / 1.05)

    @pytest.mark.parametrize("nz, order", [(601, 2), (600, 3), (2, 2)])
    def test_invalid_grid_or_order(self, two_velocity, relax_params, nz, order):
        with pytest.raises(ParameterError):
            relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=nz, order=order)

    def test_bad_initial_shape(self, two_velocity, relax_params):
        with pytest.raises(ParameterError):
            relax_to_steady(two_velocity, relax_params, 0.05, L=30.0, nz=600,
                            initial=np.ones((10, 2)))


class TestOvershoot:
    def test_two_velocity_profiles_peak_at_origin(self, two_velocity, moderate_params):
        profile = solve_weights(dispersion_roots(two_velocity, moderate_params, 0.1))
        report = overshoot_detect(np.linspace(-20.0, 20.0, 4001), profile)
        assert not report.present
        assert report.threshold_index is None

    def test_stationary_cluster_overshoots_at_fast_velocities(self, uniform64):
        params = KineticParams(chi_s=0.48, chi_n=0.0)
        wave = stationary_cluster(uniform64, params, 50.0, 0.5)
        z = np.linspace(-20.0, 20.0, 8001)
        report = overshoot_detect(z, wave.profile)
        assert 63 in report.right_overshoot
        assert 0 in report.left_overshoot
        assert report.contiguous
        assert report.threshold_index > 32
        rho = wave.profile.rho_grid(z[z > 0])
        assert np.all(np.diff(rho) < 0)

    def test_cluster_overshoot_on_the_reported_grid(self, uniform64):
        wave = stationary_cluster(uniform64, KineticParams(chi_s=0.48, chi_n=0.0), 50.0, 0.5)
        z = overshoot_grid(wave.profile)
        assert np.count_nonzero(z == 0.0) == 1
        assert np.diff(z) == pytest.approx(OVERSHOOT_STEP)
        assert z[-1] >= 10.0 * wave.profile.decay_scale()
        report = overshoot_detect(z, wave.profile)
        assert 63 in report.right_overshoot
        assert 0 in report.left_overshoot
        assert report.contiguous

    def test_contiguity_on_synthetic_profiles(self):
        z = np.linspace(-1.0, 1.0, 201)
        bumps = [np.exp(-(z - shift) ** 2 * 50) for shift in (0.0, 0.5, 0.5)]
        report = overshoot_detect(z, np.column_stack(bumps))
        assert report.right_overshoot == [1, 2]
        assert report.threshold_index == 1
        assert report.contiguous

        gapped = overshoot_detect(z, np.column_stack([bumps[1], bumps[0], bumps[2]]))
        assert gapped.right_overshoot == [0, 2]
        assert not gapped.contiguous
