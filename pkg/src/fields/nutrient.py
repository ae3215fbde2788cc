"""Nutrient field through the Riccati equation for u = d/dz log N.

u' = -(c/D_N) u - u^2 + (gamma/D_N) rho, integrated rightward from
u(-L) = 0 with classical fixed-step RK4, then N(z) = N_+ exp(-int_z^L u).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.errors import IntegrationError, ParameterError
from src.spectral.transfer import WaveProfile

logger = logging.getLogger(__name__)

DEFAULT_GRID = 4097
MAX_STEP = 0.05
TAIL_DIGITS = 12
BLOWUP = 1e8


@dataclass(frozen=True, eq=False)
class NutrientSolution:
    """Tabulated log-derivative u and nutrient N on [-L, L]."""

    z: np.ndarray
    u: np.ndarray
    n: np.ndarray
    n_plus: float
    d_n: float
    gamma: float
    c: float

    @property
    def L(self) -> float:
        return float(self.z[-1])


def default_nutrient_length(profile: WaveProfile, c: float, d_n: float) -> float:
    """Half-width so that every decaying tail (density and u) drops below 1e-12."""
    rate = min(
        profile.basis.principal_left.exponent,
        profile.basis.principal_right.exponent,
        c / d_n,
    )
    return TAIL_DIGITS * math.log(10.0) / rate


def solve_nutrient(z: np.ndarray, rho: Callable[[np.ndarray], np.ndarray], c: float,
                   gamma: float, d_n: float, n_plus: float = 1.0) -> NutrientSolution:
    """
    Integrate the Riccati equation on a uniform grid.

    Args:
        z: Uniform increasing grid
        rho: Cell density, vectorized in z
        c: Wave speed (> 0)
        gamma: Nutrient consumption rate
        d_n: Nutrient diffusivity
        n_plus: Nutrient level far ahead of the wave

    Returns:
        NutrientSolution

    Raises:
        ParameterError: c <= 0 or nonpositive coefficients
        IntegrationError: u blows up
    """
    if not c > 0:
        raise ParameterError(f"Nutrient profile needs c > 0, got {c}")
    if not d_n > 0 or gamma < 0 or not n_plus > 0:
        raise ParameterError(f"Invalid nutrient coefficients d_n={d_n}, gamma={gamma}, n_plus={n_plus}")

    h = float(z[1] - z[0])
    half = np.empty(2 * z.size - 1)
    half[0::2] = z
    half[1::2] = z[:-1] + 0.5 * h
    source = (gamma / d_n) * np.asarray(rho(half), dtype=float)
    drift = c / d_n

    u = np.zeros(z.size)
    value = 0.0
    for j in range(z.size - 1):
        s0, s_mid, s1 = source[2 * j], source[2 * j + 1], source[2 * j + 2]
        k1 = -drift * value - value * value + s0
        y = value + 0.5 * h * k1
        k2 = -drift * y - y * y + s_mid
        y = value + 0.5 * h * k2
        k3 = -drift * y - y * y + s_mid
        y = value + h * k3
        k4 = -drift * y - y * y + s1
        value = value + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(value) or abs(value) > BLOWUP:
            raise IntegrationError(f"Riccati integration blew up at z={z[j + 1]:.6g}")
        u[j + 1] = value

    integral = cumulative_trapezoid(u, z, initial=0.0)
    n = n_plus * np.exp(integral - integral[-1])
    return NutrientSolution(z=z, u=u, n=n, n_plus=n_plus, d_n=d_n, gamma=gamma, c=c)


def nutrient_profile(profile: WaveProfile, c: float, gamma: float, d_n: float,
                     L: Optional[float] = None, n_grid: int = DEFAULT_GRID,
                     n_plus: float = 1.0) -> NutrientSolution:
    """
    Nutrient field consumed by the cell density of a wave profile.

    The grid is symmetric with an odd number of points so z = 0 is a node,
    and is refined until the step is at most MAX_STEP. L defaults to
    default_nutrient_length.
    """
    if not c > 0:
        raise ParameterError(f"Nutrient profile needs c > 0, got {c}")
    if L is None:
        L = default_nutrient_length(profile, c, d_n)
    n_grid = max(n_grid, int(math.ceil(2.0 * L / MAX_STEP)) + 1)
    if n_grid % 2 == 0:
        n_grid += 1
    z = np.linspace(-L, L, n_grid)
    logger.debug("Nutrient grid: L=%.4g, %d points", L, n_grid)
    return solve_nutrient(z, profile.rho_grid, c, gamma, d_n, n_plus)
