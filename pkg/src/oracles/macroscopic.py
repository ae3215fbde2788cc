"""Diffusion-limit travelling wave in closed form.

rho(z) = e^{lambda_- z} (z < 0), e^{-lambda_+ z} (z > 0) with
lambda_-(c) = (-c + chi_S + chi_N)/D_rho and lambda_+(c) = (c + chi_S - chi_N)/D_rho.
The wave speed solves chi_N - c = chi_S c / sqrt(c^2 + 4 alpha D_S).
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import bisect

from src.errors import ParameterError
from src.fields.chemoattractant import green_exponents
from src.measures.velocity_measure import VelocityMeasure

SPEED_XTOL = 1e-13


@dataclass(frozen=True)
class MacroParams:
    """Macroscopic wave parameters; d_rho is the cell diffusivity."""

    chi_s: float
    chi_n: float
    alpha: float
    d_s: float
    d_rho: float = 1.0

    def __post_init__(self):
        for name in ('chi_s', 'alpha', 'd_s', 'd_rho'):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.chi_n < 0:
            raise ParameterError(f"chi_n must be nonnegative, got {self.chi_n}")

    def exponents(self, c: float) -> Tuple[float, float]:
        """(lambda_-(c), lambda_+(c))."""
        lam_minus = (-c + self.chi_s + self.chi_n) / self.d_rho
        lam_plus = (c + self.chi_s - self.chi_n) / self.d_rho
        return lam_minus, lam_plus

    def signal_exponents(self, c: float) -> Tuple[float, float]:
        """(mu_-(c), mu_+(c)) of the signal Green function."""
        g = green_exponents(c, self.alpha, self.d_s)
        return g.mu_minus, g.mu_plus

    def admissible(self, c: float) -> bool:
        lam_minus, lam_plus = self.exponents(c)
        return lam_minus > 0 and lam_plus > 0

    def admissible_interval(self) -> Tuple[float, float]:
        return self.chi_n - self.chi_s, self.chi_s + self.chi_n


def _speed_residual(macro: MacroParams, c: float) -> float:
    return macro.chi_n - c - macro.chi_s * c / math.sqrt(c * c + 4.0 * macro.alpha * macro.d_s)


def macro_speed(macro: MacroParams) -> float:
    """
    Unique speed in (0, chi_N) of the macroscopic wave; 0 when chi_N = 0.
    """
    if macro.chi_n == 0:
        return 0.0
    return bisect(lambda c: _speed_residual(macro, c), 0.0, macro.chi_n,
                  xtol=SPEED_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def macro_upsilon(macro: MacroParams, c: float) -> float:
    """
    Matching function of the macroscopic wave, up to a positive factor.

    Raises:
        ParameterError: c is not admissible (some exponent nonpositive)
    """
    if not macro.admissible(c):
        raise ParameterError(f"Speed c={c} is not admissible for the macroscopic wave")
    lam_minus, lam_plus = macro.exponents(c)
    mu_minus, mu_plus = macro_signal_exponents(macro, c)
    return -mu_plus / (mu_plus + lam_minus) + mu_minus / (mu_minus + lam_plus)


def macro_signal_exponents(macro: MacroParams, c: float) -> Tuple[float, float]:
    return macro.signal_exponents(c)


def macro_density(macro: MacroParams, c: float, z):
    """Two-sided exponential cell density with rho(0) = 1."""
    if not macro.admissible(c):
        raise ParameterError(f"Speed c={c} is not admissible for the macroscopic wave")
    lam_minus, lam_plus = macro.exponents(c)
    z_arr = np.asarray(z, dtype=float)
    rho = np.where(z_arr < 0, np.exp(lam_minus * np.minimum(z_arr, 0.0)),
                   np.exp(-lam_plus * np.maximum(z_arr, 0.0)))
    return float(rho) if rho.ndim == 0 else rho


def diffusion_limit_diffusivity(measure: VelocityMeasure) -> float:
    """Cell diffusivity of the unit-rate velocity-jump process, <v^2>."""
    return measure.second_moment()
