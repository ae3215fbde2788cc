"""Discrete velocity measures, given as atoms or by quadrature of a density."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from src.errors import MeasureError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
RULES = ('midpoint', 'gauss-legendre')


@dataclass(frozen=True, eq=False)
class VelocityMeasure:
    """
    Sorted discrete velocities carrying positive weights of total mass 1.

    Attributes:
        velocities: Strictly increasing velocities
        weights: Positive weights, same length, summing to 1
        symmetric: True when the atoms are invariant under v -> -v
    """

    velocities: np.ndarray
    weights: np.ndarray
    symmetric: bool

    @property
    def size(self) -> int:
        return int(self.velocities.size)

    @property
    def v0(self) -> float:
        """Maximal speed of the support."""
        return float(np.max(np.abs(self.velocities)))

    def average(self, values) -> float:
        """Weighted velocity average <g> = sum_i w_i g(v_i)."""
        return float(np.dot(self.weights, values))

    def second_moment(self) -> float:
        return self.average(self.velocities ** 2)

    def mirror_indices(self) -> np.ndarray:
        """Index of -v_i for each i; only meaningful for symmetric measures."""
        return np.arange(self.size)[::-1]

    def count_below(self, c: float) -> int:
        """Number of velocities strictly below c."""
        return int(np.searchsorted(self.velocities, c, side='left'))


@dataclass(frozen=True)
class DensitySpec:
    """
    Continuous velocity density on [-support, support].

    Attributes:
        kind: Density family name
        params: Family parameters (exp-bump: a, b, rate; custom-table: v, density)
        support: Half-width of the support
    """

    kind: str
    params: Mapping = field(default_factory=dict)
    support: float = 1.0

    def __post_init__(self):
        if self.kind not in _DENSITIES:
            raise MeasureError(
                f"Unknown density kind '{self.kind}'; expected one of {sorted(_DENSITIES)}"
            )
        if not self.support > 0:
            raise MeasureError(f"Density support must be positive, got {self.support}")

    def evaluate(self, v) -> np.ndarray:
        """Density values at velocities v (scaled to the support)."""
        x = np.asarray(v, dtype=float) / self.support
        return _DENSITIES[self.kind](x, self.params) / self.support


def _uniform(x, params):
    return np.full_like(x, 0.5)


def _circle_projection(x, params):
    return 1.0 / (np.pi * np.sqrt(1.0 - x ** 2))


def _disk_projection(x, params):
    return 2.0 / np.pi * np.sqrt(1.0 - x ** 2)


def _ball3d_projection(x, params):
    return 0.75 * (1.0 - x ** 2)


def _exp_bump(x, params):
    a = float(params.get('a', 1.0))
    b = float(params.get('b', 5.0))
    rate = float(params.get('rate', 4.0))
    return a + b * np.exp(-rate * np.abs(x))


def _custom_table(x, params):
    try:
        table_v = np.asarray(params['v'], dtype=float)
        table_d = np.asarray(params['density'], dtype=float)
    except KeyError as e:
        raise MeasureError(f"custom-table density needs 'v' and 'density' lists (missing {e})")
    if table_v.shape != table_d.shape or table_v.size < 2:
        raise MeasureError("custom-table 'v' and 'density' must have equal length >= 2")
    if np.any(np.diff(table_v) <= 0):
        raise MeasureError("custom-table 'v' must be strictly increasing")
    return np.interp(x, table_v, table_d)


_DENSITIES = {
    'uniform': _uniform,
    'sphere-projection': _uniform,
    'semicircle': _circle_projection,
    'circle-projection': _circle_projection,
    'disk-projection': _disk_projection,
    'ball3d-projection': _ball3d_projection,
    'exp-bump': _exp_bump,
    'custom-table': _custom_table,
}


def _is_symmetric(velocities: np.ndarray, weights: np.ndarray) -> bool:
    return bool(
        np.all(np.abs(velocities + velocities[::-1]) <= SYMMETRY_TOL)
        and np.all(np.abs(weights - weights[::-1]) <= SYMMETRY_TOL)
    )


def make_discrete(velocities: Sequence[float], weights: Sequence[float]) -> VelocityMeasure:
    """
    Build a normalized discrete measure from atoms.

    Args:
        velocities: Velocity atoms, any order
        weights: Positive weights, same length (rescaled to sum 1)

    Returns:
        VelocityMeasure: Sorted, normalized measure with symmetry detected

    Raises:
        MeasureError: Empty or single-atom input, length mismatch,
            nonpositive weight or duplicate velocity
    """
    v = np.asarray(velocities, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()

    if v.size == 0:
        raise MeasureError("Velocity measure is empty")
    if v.size != w.size:
        raise MeasureError(f"Got {v.size} velocities but {w.size} weights")
    if v.size < 2:
        raise MeasureError(f"Velocity measure needs at least 2 atoms, got {v.size}")
    if not np.all(np.isfinite(v)) or not np.all(np.isfinite(w)):
        raise MeasureError("Velocities and weights must be finite")
    if np.any(w <= 0):
        raise MeasureError(f"Weights must be positive, got min {w.min()}")

    order = np.argsort(v, kind='stable')
    v, w = v[order], w[order]
    if np.any(np.diff(v) <= 0):
        dup = v[1:][np.diff(v) <= 0][0]
        raise MeasureError(f"Duplicate velocity {dup}")

    w = w / w.sum()
    symmetric = _is_symmetric(v, w)
    if symmetric:
        # Snap mirrored pairs so v -> -v is exact.
        v = 0.5 * (v - v[::-1])
        w = 0.5 * (w + w[::-1])
        w = w / w.sum()

    v.setflags(write=False)
    w.setflags(write=False)
    return VelocityMeasure(velocities=v, weights=w, symmetric=symmetric)


def quadrature(density: DensitySpec, n: int, rule: str = 'midpoint') -> VelocityMeasure:
    """
    Discretize a continuous density with a quadrature rule.

    Args:
        density: Density on [-support, support]
        n: Number of nodes
        rule: 'midpoint' (default, never samples the endpoints) or 'gauss-legendre'

    Returns:
        VelocityMeasure: Weights proportional to rule weight times density

    Raises:
        MeasureError: Unknown rule, n < 2, negative or non-finite density
    """
    if rule not in RULES:
        raise MeasureError(f"Unknown quadrature rule '{rule}'; expected one of {RULES}")
    if n < 2:
        raise MeasureError(f"Quadrature needs n >= 2 nodes, got {n}")

    v0 = density.support
    if rule == 'midpoint':
        h = 2.0 * v0 / n
        nodes = -v0 + (np.arange(n) + 0.5) * h
        nodes = 0.5 * (nodes - nodes[::-1])
        rule_weights = np.full(n, h)
    else:
        ref_nodes, ref_weights = np.polynomial.legendre.leggauss(n)
        nodes = v0 * ref_nodes
        rule_weights = v0 * ref_weights

    values = density.evaluate(nodes)
    if not np.all(np.isfinite(values)):
        raise MeasureError(f"Density '{density.kind}' is not finite at the quadrature nodes")
    if np.any(values < 0):
        raise MeasureError(f"Density '{density.kind}' evaluates negative (min {values.min()})")
    if np.any(values == 0):
        raise MeasureError(f"Density '{density.kind}' vanishes at a quadrature node")

    logger.debug("Discretized %s density with %d %s nodes", density.kind, n, rule)
    return make_discrete(nodes, rule_weights * values)


def measure_from_config(section: Dict, n: Optional[int] = None, rule: Optional[str] = None) -> VelocityMeasure:
    """
    Build a measure from the `measure` config section.

    Args:
        section: Either {velocities, weights} or {density: {kind, params, support}, n, rule}
        n: Optional override of the node count
        rule: Optional override of the quadrature rule

    Returns:
        VelocityMeasure
    """
    if 'density' in section and section['density'] is not None:
        spec = section['density']
        if isinstance(spec, str):
            spec = {'kind': spec}
        density = DensitySpec(
            kind=spec.get('kind', 'uniform'),
            params=dict(spec.get('params') or {}),
            support=float(spec.get('support', 1.0)),
        )
        count = n if n is not None else section.get('n')
        if count is None:
            raise MeasureError("Density measure requires 'n'")
        return quadrature(density, int(count), rule or section.get('rule', 'midpoint'))

    if 'velocities' not in section:
        raise MeasureError("Measure needs either 'velocities' or 'density'")
    velocities = section['velocities']
    weights = section.get('weights')
    if weights is None:
        weights = [1.0] * len(velocities)
    return make_discrete(velocities, weights)
