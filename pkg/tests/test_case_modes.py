import numpy as np
import pytest

from src.errors import AnsatzError, BracketError, CollisionError, PoleError
from src.kinetics.tumbling import KineticParams
from src.measures.velocity_measure import DensitySpec, quadrature
from src.spectral.case_modes import (LEFT, RIGHT, dispersion_roots, dispersion_value,
                                     mode_profile, pole_positions)


def two_velocity_exponents(params, c):
    r = params.rates
    lam_minus = 0.5 * (r.T_mm / (1 + c) - r.T_mp / (1 - c))
    lam_plus = 0.5 * (r.T_pp / (1 - c) - r.T_pm / (1 + c))
    return lam_minus, lam_plus


@pytest.mark.parametrize("c", [-0.15, 0.0, 0.1, 0.35])
def test_two_velocity_exponents_closed_form(two_velocity, moderate_params, c):
    basis = dispersion_roots(two_velocity, moderate_params, c)
    lam_minus, lam_plus = two_velocity_exponents(moderate_params, c)
    assert basis.K == 1
    assert basis.principal_left.exponent == pytest.approx(lam_minus, rel=1e-11)
    assert basis.principal_right.exponent == pytest.approx(lam_plus, rel=1e-11)


@pytest.mark.parametrize("c, left, right", [(0.2, 2, 2), (0.7, 3, 1), (0.0, 2, 2)])
def test_mode_counts(four_velocity, strong_params, c, left, right):
    basis = dispersion_roots(four_velocity, strong_params, c)
    assert len(basis.left_modes) == left
    assert len(basis.right_modes) == right
    assert [m.index for m in basis.left_modes] == list(range(1, left + 1))
    assert [m.index for m in basis.right_modes] == list(range(left + 1, 5))


def test_exponent_ordering(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    assert np.all(np.diff(basis.exponents(LEFT)) > 0)
    assert np.all(np.diff(basis.exponents(RIGHT)) < 0)
    assert basis.principal_right.exponent == basis.exponents(RIGHT).min()
    assert basis.principal_left.exponent == basis.exponents(LEFT).min()


def test_roots_interlace_with_poles(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    for side in (LEFT, RIGHT):
        poles = pole_positions(four_velocity, strong_params, 0.2, side)
        roots = np.sort(basis.exponents(side))
        lower = np.concatenate(([0.0], poles[:-1]))
        assert np.all(roots > lower)
        assert np.all(roots < poles)
        lo, hi = basis.brackets(side)
        assert np.all((lo < roots) & (roots < hi))


def zero_flux_scale(measure, rel, mode):
    """Rounding scale of <(v - c) F> at a root resolved to floating-point precision."""
    spread = measure.average(np.abs(rel * mode.profile))
    stiffness = mode.exponent * measure.average((rel * mode.profile) ** 2)
    return max(spread + stiffness, 1.0)


def test_principal_profiles_positive_and_higher_modes_change_sign(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    assert np.all(basis.principal_left.profile > 0)
    assert np.all(basis.principal_right.profile > 0)
    # Higher modes sit beyond the pole of the fastest velocity on their side
    assert basis.left_modes[1].profile[0] < 0
    assert basis.right_modes[0].profile[-1] < 0


def test_mode_profiles_have_zero_flux(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    rel = four_velocity.velocities - 0.2
    for mode in basis.left_modes + basis.right_modes:
        assert np.all(np.isfinite(mode.profile))
        flux = four_velocity.average(rel * mode.profile)
        assert abs(flux) < 1e-11 * zero_flux_scale(four_velocity, rel, mode)
        assert mode.average == pytest.approx(four_velocity.average(mode.profile))


def test_mode_profile_positivity_is_required_for_principal_modes_only(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    higher = basis.left_modes[1]
    with pytest.raises(AnsatzError):
        mode_profile(four_velocity, strong_params, 0.2, LEFT, higher.exponent)
    mode = mode_profile(four_velocity, strong_params, 0.2, LEFT, higher.exponent, principal=False)
    np.testing.assert_array_equal(mode.profile, higher.profile)


def test_mode_profile_on_a_pole(four_velocity, strong_params):
    pole = pole_positions(four_velocity, strong_params, 0.2, LEFT)[0]
    with pytest.raises(PoleError):
        mode_profile(four_velocity, strong_params, 0.2, LEFT, pole, principal=False)


def test_modes_carry_unit_tumbling_average(four_velocity, strong_params):
    basis = dispersion_roots(four_velocity, strong_params, 0.2)
    rel = four_velocity.velocities - 0.2
    for mode in basis.left_modes:
        tumbled = four_velocity.average(strong_params.side_rates(-1, rel) * mode.profile)
        assert tumbled == pytest.approx(1.0, rel=1e-9)
    for mode in basis.right_modes:
        tumbled = four_velocity.average(strong_params.side_rates(1, rel) * mode.profile)
        assert tumbled == pytest.approx(1.0, rel=1e-9)


def test_dispersion_value_vanishes_at_two_velocity_root(two_velocity, moderate_params):
    lam_minus, lam_plus = two_velocity_exponents(moderate_params, 0.1)
    assert dispersion_value(two_velocity, moderate_params, 0.1, LEFT, lam_minus) == pytest.approx(0.0, abs=1e-12)
    assert dispersion_value(two_velocity, moderate_params, 0.1, RIGHT, lam_plus) == pytest.approx(0.0, abs=1e-12)


def test_dispersion_value_at_pole(two_velocity, moderate_params):
    pole = pole_positions(two_velocity, moderate_params, 0.1, LEFT)[0]
    with pytest.raises(PoleError):
        dispersion_value(two_velocity, moderate_params, 0.1, LEFT, pole)


def test_collision_with_velocity(four_velocity, strong_params):
    with pytest.raises(CollisionError):
        dispersion_roots(four_velocity, strong_params, 0.5)


def test_speed_outside_window(two_velocity, moderate_params):
    with pytest.raises(BracketError):
        dispersion_roots(two_velocity, moderate_params, 0.41)


def test_principal_exponents_converge_with_quadrature():
    params = KineticParams(chi_s=0.3, chi_n=0.1)
    values = []
    for n in (50, 100, 200):
        basis = dispersion_roots(quadrature(DensitySpec('uniform'), n), params, 0.123)
        values.append((basis.principal_left.exponent, basis.principal_right.exponent))
    values = np.array(values)
    assert np.all(np.abs(values[1] - values[0]) < 2.0 / 50)
    assert np.all(np.abs(values[2] - values[1]) < 2.0 / 100)


@pytest.mark.parametrize("gap", [5e-5, 1e-5])
def test_exchanged_exponent_explodes_next_to_a_velocity(four_velocity, strong_params, gap):
    below = dispersion_roots(four_velocity, strong_params, 0.5 - gap)
    assert below.right_modes[0].exponent > 1e3
    assert np.all(below.exponents(LEFT) < 10)
    assert np.all(below.exponents(RIGHT)[1:] < 10)

    above = dispersion_roots(four_velocity, strong_params, 0.5 + gap)
    assert above.left_modes[-1].exponent > 1e3
    assert np.all(above.exponents(LEFT)[:-1] < 10)
    assert np.all(above.exponents(RIGHT) < 10)


@pytest.mark.parametrize("c", [0.0, 0.2, 0.4, 0.6])
def test_exponents_monotone_in_speed(four_velocity, strong_params, c):
    dc = 1e-4
    here = dispersion_roots(four_velocity, strong_params, c)
    there = dispersion_roots(four_velocity, strong_params, c + dc)
    assert here.K == there.K
    assert np.all(there.exponents(LEFT) < here.exponents(LEFT))
    assert np.all(there.exponents(RIGHT) > here.exponents(RIGHT))
