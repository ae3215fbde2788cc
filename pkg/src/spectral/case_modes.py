"""Case normal modes: dispersion relations, localized roots and mode profiles.

Left modes decay as e^{lambda z} for z -> -inf, right modes as e^{-lambda z}
for z -> +inf. For a speed c with K velocities below it there are exactly K
left roots and N - K right roots, each isolated between consecutive poles of
the dispersion function.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.errors import AnsatzError, BracketError, CollisionError, ParameterError, PoleError
from src.kinetics.tumbling import KineticParams
from src.measures.velocity_measure import VelocityMeasure

logger = logging.getLogger(__name__)

COLLISION_TOL = 1e-9
BRACKET_INSET = 1e-10
ROOT_RTOL = 1e-12
MAX_BISECTIONS = 400

LEFT = 'left'
RIGHT = 'right'


def _check_side(side: str):
    if side not in (LEFT, RIGHT):
        raise ParameterError(f"side must be '{LEFT}' or '{RIGHT}', got {side!r}")


def check_collision(measure: VelocityMeasure, c: float):
    """Raise CollisionError when c sits on a discrete velocity."""
    gap = np.min(np.abs(measure.velocities - c))
    if gap <= COLLISION_TOL * measure.v0:
        raise CollisionError(f"Speed c={c!r} collides with a discrete velocity (gap {gap:.2e})")


def _slopes(measure: VelocityMeasure, params: KineticParams, c: float, side: str) -> np.ndarray:
    """T(v_i - c) / (v_i - c) with the side's rates."""
    rel = measure.velocities - c
    z_sign = -1 if side == LEFT else 1
    return params.side_rates(z_sign, rel) / rel


def dispersion_value(measure: VelocityMeasure, params: KineticParams, c: float,
                     side: str, lam: float) -> float:
    """
    Dispersion function Q_-(lam) (left) or Q_+(lam) (right).

    Q_-(lam) = sum_i w_i / (T_-(v_i-c)/(v_i-c) + lam), decreasing between poles.
    Q_+(lam) = sum_i w_i / (T_+(v_i-c)/(v_i-c) - lam), increasing between poles.

    Raises:
        PoleError: lam coincides with a pole
    """
    _check_side(side)
    slopes = _slopes(measure, params, c, side)
    den = slopes + lam if side == LEFT else slopes - lam
    if np.any(np.abs(den) <= 4 * np.finfo(float).eps * np.maximum(np.abs(slopes), 1.0)):
        raise PoleError(f"Dispersion function ({side}) evaluated at a pole, lambda={lam!r}")
    return float(np.dot(measure.weights, 1.0 / den))


def pole_positions(measure: VelocityMeasure, params: KineticParams, c: float, side: str) -> np.ndarray:
    """
    Poles of the dispersion function on the positive half-line, ascending.

    Left: T_-^-/(c - v_i) for v_i < c. Right: T_+^+/(v_i - c) for v_i > c.
    """
    _check_side(side)
    rates = params.rates
    v = measure.velocities
    if side == LEFT:
        poles = rates.T_mm / (c - v[v < c])
    else:
        poles = rates.T_pp / (v[v > c] - c)
    return np.sort(poles)


@dataclass(frozen=True, eq=False)
class CaseMode:
    """
    One exponential mode of the stationary kinetic equation.

    Attributes:
        side: 'left' or 'right'
        exponent: Positive decay rate lambda
        profile: F(v_i) over the measure's velocities; strictly positive for the
            principal mode of each side
        index: Mode index k (left 1..K by increasing exponent, right K+1..N
            by decreasing exponent)
        average: Weighted velocity average <F>
    """

    side: str
    exponent: float
    profile: np.ndarray
    index: int
    average: float


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """All Case modes at speed c."""

    measure: VelocityMeasure
    params: KineticParams
    c: float
    K: int
    left_modes: Tuple[CaseMode, ...]
    right_modes: Tuple[CaseMode, ...]

    @property
    def n(self) -> int:
        return self.measure.size

    @property
    def principal_left(self) -> CaseMode:
        """Left mode with the smallest exponent (slowest decay)."""
        return self.left_modes[0]

    @property
    def principal_right(self) -> CaseMode:
        """Right mode with the smallest exponent (slowest decay)."""
        return self.right_modes[-1]

    def exponents(self, side: str) -> np.ndarray:
        modes = self.left_modes if side == LEFT else self.right_modes
        return np.array([m.exponent for m in modes])

    def profiles(self, side: str) -> np.ndarray:
        """Matrix with one row per velocity and one column per mode."""
        modes = self.left_modes if side == LEFT else self.right_modes
        if not modes:
            return np.zeros((self.n, 0))
        return np.column_stack([m.profile for m in modes])

    def averages(self, side: str) -> np.ndarray:
        modes = self.left_modes if side == LEFT else self.right_modes
        return np.array([m.average for m in modes])

    def brackets(self, side: str) -> Tuple[np.ndarray, np.ndarray]:
        """Isolating intervals of this side's roots, ascending in lambda."""
        return root_brackets(self.measure, self.params, self.c, side)


def mode_profile(measure: VelocityMeasure, params: KineticParams, c: float,
                 side: str, lam: float, index: int = 0, principal: bool = True) -> CaseMode:
    """
    Velocity profile of the mode with exponent lam.

    Only the principal mode of a side (smallest exponent, below the first
    pole) is positive on every velocity. Higher modes lie beyond at least
    one pole and change sign; positivity of the assembled f is checked in
    the transfer step.

    Args:
        measure: Velocity measure
        params: Kinetic parameters
        c: Wave speed
        side: 'left' or 'right'
        lam: Dispersion root
        index: Mode index stored on the result
        principal: Require a strictly positive profile

    Returns:
        CaseMode: F = 1/(T_-(v-c) + lam (v-c)) on the left, 1/(T_+(v-c) - lam (v-c)) on the right

    Raises:
        PoleError: lam sits on a pole, so some F(v_i) is undefined
        AnsatzError: principal is set and some F(v_i) is not strictly positive
    """
    _check_side(side)
    rel = measure.velocities - c
    if side == LEFT:
        rates = params.side_rates(-1, rel)
        den = rates + lam * rel
    else:
        rates = params.side_rates(1, rel)
        den = rates - lam * rel
    tiny = 4 * np.finfo(float).eps * np.maximum(rates, np.abs(lam * rel))
    if not np.all(np.isfinite(den)) or np.any(np.abs(den) <= tiny):
        raise PoleError(f"{side.capitalize()} mode lambda={lam!r} at c={c:.6g} sits on a pole")
    if principal and np.any(den < 0):
        bad = int(np.argmin(den))
        raise AnsatzError(
            f"{side.capitalize()} principal mode lambda={lam:.6g} at c={c:.6g} has negative "
            f"denominator at v={measure.velocities[bad]:.6g}"
        )
    profile = 1.0 / den
    profile.setflags(write=False)
    return CaseMode(side=side, exponent=float(lam), profile=profile, index=index,
                    average=measure.average(profile))


def _bisect_brackets(weights, slopes, sign, lo, hi, decreasing):
    """Bisect all brackets at once down to floating-point resolution."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        stalled = (mid <= lo) | (mid >= hi)
        if np.all(stalled):
            break
        values = (weights / (slopes[None, :] + sign * mid[:, None])).sum(axis=1)
        go_right = (values > 0 if decreasing else values < 0) & ~stalled
        go_left = ~go_right & ~stalled
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_left, mid, hi)
    roots = 0.5 * (lo + hi)
    if np.any(hi - lo > ROOT_RTOL * hi):
        raise BracketError("Dispersion bisection did not reach relative tolerance")
    return roots


def root_brackets(measure: VelocityMeasure, params: KineticParams, c: float,
                  side: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    (lo, hi) brackets between consecutive poles, the first starting at 0,
    each pulled inside by a relative BRACKET_INSET.

    Raises:
        BracketError: Two poles too close to separate
    """
    poles = pole_positions(measure, params, c, side)
    if poles.size == 0:
        return poles, poles.copy()
    lo = np.concatenate(([0.0], poles[:-1])) * (1.0 + BRACKET_INSET)
    hi = poles * (1.0 - BRACKET_INSET)
    if np.any(lo >= hi):
        raise BracketError(f"Dispersion poles ({side}) too close to separate at c={c:.12g}")
    return lo, hi


def _side_roots(measure: VelocityMeasure, params: KineticParams, c: float, side: str) -> np.ndarray:
    lo, hi = root_brackets(measure, params, c, side)
    if lo.size == 0:
        return lo

    slopes = _slopes(measure, params, c, side)
    sign = 1.0 if side == LEFT else -1.0
    decreasing = side == LEFT

    w = measure.weights
    q_lo = (w / (slopes[None, :] + sign * lo[:, None])).sum(axis=1)
    q_hi = (w / (slopes[None, :] + sign * hi[:, None])).sum(axis=1)
    ok = (q_lo > 0) & (q_hi < 0) if decreasing else (q_lo < 0) & (q_hi > 0)
    if not np.all(ok):
        k = int(np.argmin(ok))
        raise BracketError(
            f"Dispersion sign check ({side}) failed on bracket {k} at c={c:.12g}: "
            f"Q(lo)={q_lo[k]:.3e}, Q(hi)={q_hi[k]:.3e}"
        )
    return _bisect_brackets(w, slopes, sign, lo, hi, decreasing)


def dispersion_roots(measure: VelocityMeasure, params: KineticParams, c: float) -> ModeBasis:
    """
    Enumerate all Case modes at speed c.

    Each root is isolated between consecutive poles (the first bracket
    starts at lambda = 0) and bisected with explicit sign verification at
    the inset bracket ends.

    Args:
        measure: Velocity measure
        params: Kinetic parameters
        c: Wave speed in (c_*, c^*), away from every discrete velocity

    Returns:
        ModeBasis: K left modes and N - K right modes

    Raises:
        CollisionError: c collides with a discrete velocity
        BracketError: c outside the admissible window, or a degenerate bracket
        AnsatzError: A principal root produced a nonpositive profile
    """
    check_collision(measure, c)
    K = measure.count_below(c)

    left = _side_roots(measure, params, c, LEFT)
    right_ascending = _side_roots(measure, params, c, RIGHT)

    left_modes = tuple(
        mode_profile(measure, params, c, LEFT, lam, index=k + 1, principal=k == 0)
        for k, lam in enumerate(left)
    )
    # Right modes in index order K+1..N, i.e. decreasing exponent.
    n_right = right_ascending.size
    right_modes = tuple(
        mode_profile(measure, params, c, RIGHT, lam, index=K + 1 + k, principal=k == n_right - 1)
        for k, lam in enumerate(right_ascending[::-1])
    )
    logger.debug("c=%.10g: %d left / %d right modes", c, len(left_modes), len(right_modes))
    return ModeBasis(measure=measure, params=params, c=float(c), K=K,
                     left_modes=left_modes, right_modes=right_modes)
