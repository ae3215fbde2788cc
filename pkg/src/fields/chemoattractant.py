"""Chemoattractant field S and the matching function Upsilon.

S solves -c S' - D_S S'' + alpha S = rho (beta = 1). Its Green function is
G(z) = s0 e^{mu_- z} for z < 0 and s0 e^{-mu_+ z} for z > 0 with
s0 = 1/sqrt(c^2 + 4 alpha D_S). Convolving G with the modal density gives S
in closed form.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from src.errors import ParameterError
from src.spectral.case_modes import LEFT, RIGHT
from src.spectral.transfer import WaveProfile

RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class GreenExponents:
    """Decay rates of the Green function on each side of the origin."""

    c: float
    alpha: float
    d_s: float
    mu_minus: float
    mu_plus: float
    s0: float
    beta: float = 1.0


def green_exponents(c: float, alpha: float, d_s: float) -> GreenExponents:
    """
    Green exponents mu_-, mu_+ and normalization s0 at speed c.

    Raises:
        ParameterError: alpha or d_s not positive
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not d_s > 0:
        raise ParameterError(f"d_s must be positive, got {d_s}")
    disc = math.sqrt(c * c + 4.0 * alpha * d_s)
    return GreenExponents(
        c=c, alpha=alpha, d_s=d_s,
        mu_minus=(-c + disc) / (2.0 * d_s) if c <= 0 else 2.0 * alpha / (c + disc),
        mu_plus=(c + disc) / (2.0 * d_s) if c >= 0 else 2.0 * alpha / (-c + disc),
        s0=1.0 / disc,
    )


def _modal_amplitudes(profile: WaveProfile):
    basis = profile.basis
    amp_left = profile.a * basis.averages(LEFT)
    amp_right = profile.b * basis.averages(RIGHT)
    return amp_left, basis.exponents(LEFT), amp_right, basis.exponents(RIGHT)


def upsilon(profile: WaveProfile, alpha: float, d_s: float) -> float:
    """
    Matching function Upsilon(c) = S'(0) / s0 in the modal representation.

    Upsilon = sum_k A_k lam_k/(lam_k + mu_+) - sum_k B_k nu_k/(nu_k + mu_-)
    with A_k = a_k <F_-^k>, B_k = b_k <F_+^k>.
    """
    g = green_exponents(profile.c, alpha, d_s)
    amp_l, lam_l, amp_r, lam_r = _modal_amplitudes(profile)
    left = np.sum(amp_l * lam_l / (lam_l + g.mu_plus))
    right = np.sum(amp_r * lam_r / (lam_r + g.mu_minus))
    return float(left - right)


def upsilon_quadrature(profile: WaveProfile, alpha: float, d_s: float,
                       L: Optional[float] = None, n: int = 200001) -> float:
    """
    Upsilon by Simpson quadrature of the integral representation (n odd).

    S'(0)/s0 = int_{z>0} mu_- e^{-mu_- z} rho dz - int_{z<0} mu_+ e^{mu_+ z} rho dz
    """
    g = green_exponents(profile.c, alpha, d_s)
    if L is None:
        L = 40.0 / min(g.mu_minus, g.mu_plus)
    z = np.linspace(0.0, L, n + 1 - n % 2)
    right = simpson(g.mu_minus * np.exp(-g.mu_minus * z) * profile.rho_grid(z), z)
    z_neg = -z[::-1]
    left = simpson(g.mu_plus * np.exp(g.mu_plus * z_neg) * profile.rho_grid(z_neg), z_neg)
    return float(right - left)


@dataclass(frozen=True, eq=False)
class SignalField:
    """Tabulated chemoattractant S and its derivative on a grid."""

    z: np.ndarray
    s: np.ndarray
    ds: np.ndarray
    green: GreenExponents


def _difference_quotient(x, y, tau):
    """(e^{-y tau} - e^{-x tau}) / (x - y) for tau >= 0, with its x -> y limit."""
    diff = x - y
    resonant = np.abs(diff) < RESONANCE_TOL
    safe = np.where(resonant, 1.0, diff)
    regular = (np.exp(-y * tau) - np.exp(-x * tau)) / safe
    limit = tau * np.exp(-x * tau)
    return np.where(resonant, limit, regular)


def _difference_quotient_dtau(x, y, tau):
    diff = x - y
    resonant = np.abs(diff) < RESONANCE_TOL
    safe = np.where(resonant, 1.0, diff)
    regular = (x * np.exp(-x * tau) - y * np.exp(-y * tau)) / safe
    limit = (1.0 - x * tau) * np.exp(-x * tau)
    return np.where(resonant, limit, regular)


def signal_profile(profile: WaveProfile, alpha: float, d_s: float, grid) -> SignalField:
    """
    Closed-form S = G * rho on a grid.

    Each mode exponential convolved with the two-sided Green kernel yields a
    short sum of exponentials; when a mode exponent meets a Green exponent
    within RESONANCE_TOL the z e^{-mu |z|} limit is used.

    Args:
        profile: Assembled kinetic profile
        alpha: Signal degradation rate
        d_s: Signal diffusivity
        grid: z values

    Returns:
        SignalField: S and dS/dz on the grid
    """
    g = green_exponents(profile.c, alpha, d_s)
    mu_m, mu_p = g.mu_minus, g.mu_plus
    amp_l, lam_l, amp_r, lam_r = _modal_amplitudes(profile)

    z = np.asarray(grid, dtype=float)
    s = np.empty_like(z)
    ds = np.empty_like(z)

    pos = z >= 0
    t = z[pos][:, None]
    if t.size:
        e_mu = np.exp(-mu_p * t)
        e_nu = np.exp(-lam_r * t)
        q = _difference_quotient(mu_p, lam_r, t)
        dq = _difference_quotient_dtau(mu_p, lam_r, t)
        s[pos] = (
            (amp_l / (mu_p + lam_l) * e_mu).sum(axis=1)
            + (amp_r * q).sum(axis=1)
            + (amp_r / (mu_m + lam_r) * e_nu).sum(axis=1)
        )
        ds[pos] = (
            (-mu_p * amp_l / (mu_p + lam_l) * e_mu).sum(axis=1)
            + (amp_r * dq).sum(axis=1)
            + (-lam_r * amp_r / (mu_m + lam_r) * e_nu).sum(axis=1)
        )

    neg = ~pos
    t = -z[neg][:, None]
    if t.size:
        e_mu = np.exp(-mu_m * t)
        e_lam = np.exp(-lam_l * t)
        q = _difference_quotient(mu_m, lam_l, t)
        dq = _difference_quotient_dtau(mu_m, lam_l, t)
        s[neg] = (
            (amp_l / (mu_p + lam_l) * e_lam).sum(axis=1)
            + (amp_l * q).sum(axis=1)
            + (amp_r / (mu_m + lam_r) * e_mu).sum(axis=1)
        )
        # d/dz = -d/dt on this side
        ds[neg] = (
            (lam_l * amp_l / (mu_p + lam_l) * e_lam).sum(axis=1)
            - (amp_l * dq).sum(axis=1)
            + (mu_m * amp_r / (mu_m + lam_r) * e_mu).sum(axis=1)
        )

    return SignalField(z=z, s=g.s0 * s, ds=g.s0 * ds, green=g)


def symmetric_grid(L: float, core: float = 1.0, h_core: float = 1e-3, n_tail: int = 400) -> np.ndarray:
    """Uniform grid of step h_core on [-core, core] with geometric tails out to L."""
    core = min(core, L)
    m = int(round(core / h_core))
    inner = np.linspace(-core, core, 2 * m + 1)
    if L <= core:
        return inner
    tail = np.geomspace(core, L, n_tail + 1)[1:]
    return np.concatenate([-tail[::-1], inner, tail])
