import numpy as np
import pytest

from src.errors import ParameterError
from src.fields.ansatz import ansatz_check
from src.fields.chemoattractant import (SignalField, _difference_quotient, green_exponents,
                                        signal_profile, symmetric_grid, upsilon,
                                        upsilon_quadrature)
from src.fields.nutrient import (MAX_STEP, NutrientSolution, default_nutrient_length,
                                 nutrient_profile)
from src.spectral.case_modes import dispersion_roots
from src.spectral.transfer import solve_weights


@pytest.fixture
def two_velocity_profile(two_velocity, moderate_params):
    return solve_weights(dispersion_roots(two_velocity, moderate_params, 0.1))


@pytest.mark.parametrize("c", [-0.3, 0.0, 0.1, 0.6])
def test_green_exponents_solve_characteristic_equations(c):
    g = green_exponents(c, alpha=2.0, d_s=0.5)
    assert g.d_s * g.mu_plus ** 2 - c * g.mu_plus - g.alpha == pytest.approx(0.0, abs=1e-12)
    assert g.d_s * g.mu_minus ** 2 + c * g.mu_minus - g.alpha == pytest.approx(0.0, abs=1e-12)
    assert g.mu_plus > 0 and g.mu_minus > 0
    assert g.s0 == pytest.approx(1.0 / np.sqrt(c * c + 4.0 * 2.0 * 0.5))


@pytest.mark.parametrize("alpha, d_s", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_green_exponents_reject_nonpositive_coefficients(alpha, d_s):
    with pytest.raises(ParameterError):
        green_exponents(0.1, alpha, d_s)


def test_upsilon_matches_quadrature(two_velocity_profile):
    closed = upsilon(two_velocity_profile, 1.0, 1.0)
    assert closed == pytest.approx(upsilon_quadrature(two_velocity_profile, 1.0, 1.0), abs=1e-6)


def test_upsilon_is_normalized_signal_slope_at_origin(two_velocity_profile):
    h = 1e-4
    field = signal_profile(two_velocity_profile, 1.0, 1.0, np.array([-h, 0.0, h]))
    slope = (field.s[2] - field.s[0]) / (2 * h)
    assert slope == pytest.approx(field.green.s0 * upsilon(two_velocity_profile, 1.0, 1.0), abs=1e-7)
    assert field.ds[1] == pytest.approx(slope, abs=1e-7)


def test_signal_derivative_matches_finite_differences(two_velocity_profile):
    z = np.linspace(-3.0, 3.0, 6001)
    field = signal_profile(two_velocity_profile, 1.0, 1.0, z)
    numeric = np.gradient(field.s, z)
    away = np.abs(z) > 0.01
    np.testing.assert_allclose(field.ds[away][1:-1], numeric[away][1:-1], atol=1e-6)


def test_signal_solves_the_elliptic_equation(two_velocity_profile):
    c, alpha, d_s = 0.1, 1.0, 1.0
    z = np.linspace(-3.0, 3.0, 6001)
    field = signal_profile(two_velocity_profile, alpha, d_s, z)
    second = np.gradient(field.ds, z)
    residual = -c * field.ds - d_s * second + alpha * field.s - two_velocity_profile.rho_grid(z)
    away = (np.abs(z) > 0.01) & (np.abs(z) < 2.9)
    rho_max = np.max(two_velocity_profile.rho_grid(z))
    assert np.max(np.abs(residual[away])) < 1e-4 * rho_max


def test_signal_is_positive_and_peaks_near_origin(two_velocity_profile):
    field = signal_profile(two_velocity_profile, 1.0, 1.0, symmetric_grid(40.0))
    assert np.all(field.s > 0)
    report = ansatz_check(field)
    assert report.s_increasing_left and report.s_decreasing_right


def test_difference_quotient_resonant_limit():
    tau = np.array([0.0, 0.5, 2.0])
    exact = tau * np.exp(-tau)
    np.testing.assert_allclose(_difference_quotient(1.0, 1.0, tau), exact)
    np.testing.assert_allclose(_difference_quotient(1.0, 1.0 + 1e-6, tau), exact, rtol=1e-5, atol=1e-12)


def test_symmetric_grid_layout():
    z = symmetric_grid(10.0)
    assert np.all(np.diff(z) > 0)
    assert z[0] == pytest.approx(-10.0) and z[-1] == pytest.approx(10.0)
    assert np.min(np.abs(z)) < 1e-12
    np.testing.assert_allclose(z, -z[::-1], atol=1e-12)
    assert np.max(np.diff(z[np.abs(z) <= 1.0])) == pytest.approx(1e-3, rel=1e-6)
    short = symmetric_grid(0.5)
    assert short[-1] == pytest.approx(0.5)


def test_nutrient_profile_shape(two_velocity_profile):
    sol = nutrient_profile(two_velocity_profile, 0.1, gamma=1.0, d_n=1.0)
    assert sol.u[0] == 0.0
    assert np.all(sol.u[1:] > 0)
    assert np.all(np.diff(sol.n) >= 0)
    assert sol.n[-1] > sol.n[0]
    # N is flat to rounding in the far tails; it must rise wherever u is not negligible
    active = sol.u[:-1] > 1e-8 * sol.u.max()
    assert np.all(np.diff(sol.n)[active] > 0)
    assert sol.n[-1] == pytest.approx(1.0)
    assert sol.z.size % 2 == 1
    assert np.max(np.diff(sol.z)) <= MAX_STEP + 1e-12


def test_nutrient_profile_is_insensitive_to_domain_length(two_velocity_profile):
    c = 0.1
    L0 = default_nutrient_length(two_velocity_profile, c, 1.0)
    short = nutrient_profile(two_velocity_profile, c, gamma=1.0, d_n=1.0, L=L0)
    n0 = short.z.size
    long = nutrient_profile(two_velocity_profile, c, gamma=1.0, d_n=1.0, L=2 * L0, n_grid=2 * n0 - 1)
    offset = (n0 - 1) // 2
    common = long.n[offset:offset + n0]
    np.testing.assert_allclose(long.z[offset:offset + n0], short.z, atol=1e-9)
    np.testing.assert_allclose(common, short.n, atol=1e-8)


def test_nutrient_needs_positive_speed(two_velocity_profile):
    with pytest.raises(ParameterError):
        nutrient_profile(two_velocity_profile, 0.0, gamma=1.0, d_n=1.0)


def synthetic_signal(s_values):
    z = np.linspace(-5.0, 5.0, 1001)
    s = s_values(z)
    return SignalField(z=z, s=s, ds=np.gradient(s, z), green=green_exponents(0.1, 1.0, 1.0))


def synthetic_nutrient(n):
    z = np.linspace(-5.0, 5.0, n.size)
    return NutrientSolution(z=z, u=np.gradient(np.log(n), z), n=n, n_plus=float(n[-1]),
                            d_n=1.0, gamma=1.0, c=0.1)


def test_ansatz_accepts_peaked_signal_and_increasing_nutrient():
    signal = synthetic_signal(lambda z: np.exp(-np.abs(z)))
    report = ansatz_check(signal, synthetic_nutrient(np.linspace(0.1, 1.0, 50)))
    assert report.valid
    assert report.n_check == 'pass'
    assert report.s_argmax == pytest.approx(0.0, abs=1e-12)


def test_ansatz_rejects_shifted_peak():
    report = ansatz_check(synthetic_signal(lambda z: np.exp(-(z - 1.0) ** 2)))
    assert not report.s_argmax_at_origin
    assert report.s_argmax == pytest.approx(1.0)
    assert not report.valid


def test_ansatz_rejects_decreasing_nutrient():
    signal = synthetic_signal(lambda z: np.exp(-np.abs(z)))
    report = ansatz_check(signal, synthetic_nutrient(np.linspace(1.0, 0.1, 50)))
    assert report.n_check == 'fail'
    assert not report.valid


def test_ansatz_without_nutrient():
    report = ansatz_check(synthetic_signal(lambda z: np.exp(-np.abs(z))))
    assert report.n_check == 'not-applicable'
    assert report.valid
