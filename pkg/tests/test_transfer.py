import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.errors import NullSpaceError
from src.spectral.case_modes import dispersion_roots
from src.spectral.transfer import (eval_f, eval_I, eval_rho, eval_rho_side, monotonicity_report,
                                   null_vector, sandwich_report, solve_weights,
                                   transfer_matrix, tumbling_inequality_report)


def profile_for(measure, params, c):
    return solve_weights(dispersion_roots(measure, params, c))


def grid_for(profile, lengths=10.0, points=401):
    """Each side out to `lengths` of its own principal decay length."""
    left = lengths / profile.basis.principal_left.exponent
    right = lengths / profile.basis.principal_right.exponent
    return np.concatenate([np.linspace(-left, 0.0, points), np.linspace(0.0, right, points)[1:]])


def test_null_vector_of_rank_one_matrix():
    matrix = np.array([[1.0, 2.0], [2.0, 4.0]])
    x = null_vector(matrix)
    assert np.max(np.abs(x)) > 0
    np.testing.assert_allclose(matrix @ x, 0.0, atol=1e-14)


def test_null_vector_rejects_regular_matrix():
    with pytest.raises(NullSpaceError):
        null_vector(np.eye(3))


def test_null_vector_rejects_two_dimensional_null_space():
    with pytest.raises(NullSpaceError):
        null_vector(np.zeros((3, 3)))


def test_transfer_matrix_has_known_left_null_vector(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    matrix = transfer_matrix(basis)
    left = four_velocity.weights * (four_velocity.velocities - 0.2)
    assert matrix.shape == (4, 4)
    np.testing.assert_allclose(left @ matrix, 0.0, atol=1e-8 * np.abs(matrix).max())


@pytest.mark.parametrize("c", [0.05, 0.2, 0.7])
def test_profile_is_continuous_positive_and_normalized(four_velocity, strong_params, c):
    profile = profile_for(four_velocity, strong_params, c)
    assert profile.mass() == pytest.approx(1.0, abs=1e-12)
    assert profile.continuity_residual() < 1e-10 * np.max(np.abs(profile.f_grid(0.0)))
    z = grid_for(profile)
    assert np.all(profile.f_grid(z) > 0)
    flux = profile.flux(z)
    assert np.max(np.abs(flux)) < 1e-8 * np.max(profile.rho_grid(z))


def test_profile_mass_matches_quadrature(four_velocity, strong_params):
    profile = profile_for(four_velocity, strong_params, 0.2)
    z = np.linspace(-40 * profile.decay_scale(), 40 * profile.decay_scale(), 400001)
    assert trapezoid(profile.rho_grid(z), z) == pytest.approx(1.0, rel=1e-4)


def test_two_velocity_profile_is_two_sided_exponential(two_velocity, moderate_params):
    profile = profile_for(two_velocity, moderate_params, 0.1)
    lam_minus = profile.basis.principal_left.exponent
    lam_plus = profile.basis.principal_right.exponent
    rho0 = eval_rho(profile, 0.0)
    assert eval_rho(profile, 2.0) == pytest.approx(rho0 * np.exp(-2.0 * lam_plus), rel=1e-12)
    assert eval_rho(profile, -2.0) == pytest.approx(rho0 * np.exp(-2.0 * lam_minus), rel=1e-12)
    assert rho0 == pytest.approx(1.0 / (1.0 / lam_minus + 1.0 / lam_plus), rel=1e-12)


def test_scalar_evaluators(four_velocity, strong_params):
    profile = profile_for(four_velocity, strong_params, 0.2)
    f = profile.f_grid(0.3)[0]
    assert eval_f(profile, 0.3, 1) == pytest.approx(f[1])
    assert eval_rho(profile, 0.3) == pytest.approx(np.dot(four_velocity.weights, f))
    both = eval_rho_side(profile, 0.3, -1) + eval_rho_side(profile, 0.3, 1)
    assert both == pytest.approx(eval_rho(profile, 0.3))
    assert eval_I(profile, 0.3) > 0
    assert isinstance(eval_rho(profile, 0.3), float)
    assert eval_rho(profile, np.array([0.1, 0.2])).shape == (2,)


def test_asymptotic_amplitudes_of_single_mode_sides(two_velocity, moderate_params):
    profile = profile_for(two_velocity, moderate_params, 0.1)
    assert profile.kappa_plus == pytest.approx(profile.b[0], rel=1e-12)
    assert profile.kappa_minus == pytest.approx(profile.a[0], rel=1e-12)


@pytest.mark.parametrize("c", [0.05, 0.2, 0.7])
def test_side_densities_are_monotone(four_velocity, strong_params, c):
    profile = profile_for(four_velocity, strong_params, c)
    report = monotonicity_report(profile, grid_for(profile))
    assert report.clean, report.violations


def test_tumbling_density_sandwich(two_velocity, moderate_params, four_velocity, strong_params):
    for measure, params in ((two_velocity, moderate_params), (four_velocity, strong_params)):
        profile = profile_for(measure, params, 0.2)
        report = sandwich_report(profile, grid_for(profile))
        assert report.clean


def test_tumbling_inequality_for_slow_velocities(four_velocity, strong_params):
    profile = profile_for(four_velocity, strong_params, 0.2)
    report = tumbling_inequality_report(profile, grid_for(profile))
    assert report.ok
    assert 0 < report.max_ratio < 1
