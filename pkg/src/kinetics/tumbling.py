"""Tumbling rates, mean run length and the critical wave speeds."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from src.errors import BracketError, ParameterError
from src.measures.velocity_measure import VelocityMeasure

logger = logging.getLogger(__name__)

CRITICAL_XTOL = 1e-13


@dataclass(frozen=True)
class TumblingRates:
    """The four frozen tumbling rates, T_<sign z>^<sign v-c>."""

    T_mm: float
    T_mp: float
    T_pm: float
    T_pp: float


@dataclass(frozen=True)
class KineticParams:
    """
    Chemotactic sensitivities to the signal (chi_s) and the nutrient (chi_n).

    Raises:
        ParameterError: chi_s outside (0, 1/2) or chi_n outside [0, 1/2)
    """

    chi_s: float
    chi_n: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.chi_s < 0.5:
            raise ParameterError(f"chi_s must lie in (0, 0.5), got {self.chi_s}")
        if not 0.0 <= self.chi_n < 0.5:
            raise ParameterError(f"chi_n must lie in [0, 0.5), got {self.chi_n}")

    @property
    def chi_plus(self) -> float:
        return self.chi_s - self.chi_n

    @property
    def chi_minus(self) -> float:
        return self.chi_s + self.chi_n

    @property
    def rates(self) -> TumblingRates:
        return TumblingRates(
            T_mm=1.0 + self.chi_s + self.chi_n,
            T_mp=1.0 - self.chi_s - self.chi_n,
            T_pm=1.0 - self.chi_s + self.chi_n,
            T_pp=1.0 + self.chi_s - self.chi_n,
        )

    def side_rates(self, z_sign: int, rel_velocities) -> np.ndarray:
        """
        Tumbling rate on one side of the origin for each relative velocity v - c.

        Args:
            z_sign: -1 for z < 0, +1 for z > 0
            rel_velocities: Array of v - c (nonzero)

        Returns:
            np.ndarray: T(z, v - c) per entry
        """
        rel = np.asarray(rel_velocities, dtype=float)
        rates = self.rates
        if z_sign < 0:
            return np.where(rel > 0, rates.T_mp, rates.T_mm)
        return np.where(rel > 0, rates.T_pp, rates.T_pm)


def tumbling_rate(params: KineticParams, z_sign: int, v_minus_c_sign: int) -> float:
    """
    Four-quadrant tumbling rate selected by the signs of z and v - c.

    Raises:
        ParameterError: Either sign argument is zero
    """
    if z_sign == 0 or v_minus_c_sign == 0:
        raise ParameterError("Tumbling rate is undefined on z = 0 or v = c; pick a side")
    rates = params.rates
    if z_sign < 0:
        return rates.T_mp if v_minus_c_sign > 0 else rates.T_mm
    return rates.T_pp if v_minus_c_sign > 0 else rates.T_pm


def mean_run_length(measure: VelocityMeasure, params: KineticParams, c: float,
                    side: str = 'plus') -> float:
    """
    Mean algebraic run length sum_i w_i (v_i - c) / T(v_i - c).

    Args:
        measure: Velocity measure
        params: Kinetic parameters
        c: Wave speed
        side: 'plus' uses the z > 0 rates (R, zero at c_*), 'minus' the z < 0 rates

    Returns:
        float: Run length, decreasing in c
    """
    rel = measure.velocities - c
    z_sign = 1 if side == 'plus' else -1
    return measure.average(rel / params.side_rates(z_sign, rel))


@dataclass(frozen=True)
class SpeedWindow:
    """Admissible wave speeds (c_star_lo, c_star_hi)."""

    c_star_lo: float
    c_star_hi: float

    def scan_bounds(self):
        """Scan window restricted to nonnegative speeds."""
        return max(0.0, self.c_star_lo), self.c_star_hi

    def contains(self, c: float) -> bool:
        return self.c_star_lo < c < self.c_star_hi


def _run_length_zero(measure: VelocityMeasure, params: KineticParams, side: str) -> float:
    lo, hi = float(measure.velocities[0]), float(measure.velocities[-1])
    f_lo = mean_run_length(measure, params, lo, side)
    f_hi = mean_run_length(measure, params, hi, side)
    if not (f_lo > 0 > f_hi):
        raise BracketError(
            f"Mean run length ({side}) not bracketed on [{lo}, {hi}]: "
            f"R(lo)={f_lo:.3e}, R(hi)={f_hi:.3e}"
        )
    return bisect(lambda c: mean_run_length(measure, params, c, side), lo, hi,
                  xtol=CRITICAL_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def critical_speeds(measure: VelocityMeasure, params: KineticParams) -> SpeedWindow:
    """
    Critical speeds bounding the admissible wave-speed window.

    c_* is the zero of the plus-side run length, c^* the zero of the
    minus-side one. Both are found by bisection on the velocity range.

    Raises:
        BracketError: Either run length does not change sign on the velocity range
    """
    lo = _run_length_zero(measure, params, 'plus')
    hi = _run_length_zero(measure, params, 'minus')
    logger.debug("Critical speeds: c_* = %.12f, c^* = %.12f", lo, hi)
    return SpeedWindow(c_star_lo=lo, c_star_hi=hi)
