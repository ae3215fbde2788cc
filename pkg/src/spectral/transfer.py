"""Transfer problem at the origin and evaluation of the assembled profile.

Continuity of f at z = 0 couples the left expansion sum_k a_k e^{lambda_k z} F_-^k
to the right expansion sum_k b_k e^{-lambda_k z} F_+^k. The coefficients span
the null space of the N x N matrix (-F_- | F_+), whose known left null vector
is w_i (v_i - c).
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy import linalg

from src.errors import AnsatzError, NullSpaceError
from src.spectral.case_modes import LEFT, RIGHT, ModeBasis

logger = logging.getLogger(__name__)

PIVOT_RATIO_TOL = 1e-8
SINGULARITY_TOL = 1e-6
NULLITY_TOL = 1e-12
POSITIVITY_SAMPLES = 200
UNDERFLOW_FLOOR = 1e-280


def transfer_matrix(basis: ModeBasis) -> np.ndarray:
    """Matrix (-F_- | F_+): column j < K holds -F_-^j(v_i), columns j >= K hold F_+^j(v_i)."""
    return np.hstack([-basis.profiles(LEFT), basis.profiles(RIGHT)])


def _svd_null_vector(scaled: np.ndarray) -> np.ndarray:
    _, s, vh = linalg.svd(scaled)
    if s[-1] > SINGULARITY_TOL * s[0]:
        raise NullSpaceError(f"Transfer matrix is not singular (s_min/s_max = {s[-1] / s[0]:.2e})")
    if s.size > 1 and s[-2] <= NULLITY_TOL * s[0]:
        raise NullSpaceError(
            f"Transfer matrix null space has dimension > 1 (s[-2]/s_max = {s[-2] / s[0]:.2e}); "
            "perturb c"
        )
    return vh[-1]


def null_vector(matrix: np.ndarray) -> np.ndarray:
    """
    Right null vector of a rank N-1 square matrix.

    Columns are scaled to unit max-norm, then full-pivoting elimination
    reduces the matrix to upper-triangular form; the last unknown is set to 1
    and the leading (N-1)-system is back-substituted. When the smallest kept
    pivot is below PIVOT_RATIO_TOL relative to the first, the singular value
    decomposition is used instead.

    Args:
        matrix: Square matrix with a one-dimensional null space

    Returns:
        np.ndarray: Null vector (unnormalized)

    Raises:
        NullSpaceError: Null space is trivial or more than one-dimensional
    """
    n = matrix.shape[0]
    col_scale = np.max(np.abs(matrix), axis=0)
    col_scale[col_scale == 0] = 1.0
    a = matrix / col_scale
    scaled = a.copy()

    col_perm = np.arange(n)
    pivots = []
    for k in range(n - 1):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        if i != k:
            a[[k, i], :] = a[[i, k], :]
        if j != k:
            a[:, [k, j]] = a[:, [j, k]]
            col_perm[[k, j]] = col_perm[[j, k]]
        pivot = a[k, k]
        pivots.append(abs(pivot))
        if pivot == 0:
            break
        a[k + 1:, k:] -= np.outer(a[k + 1:, k] / pivot, a[k, k:])

    if len(pivots) < n - 1 or pivots[-1] <= PIVOT_RATIO_TOL * pivots[0]:
        logger.info("Transfer elimination near-degenerate; falling back to SVD")
        return _svd_null_vector(scaled) / col_scale

    if abs(a[n - 1, n - 1]) > SINGULARITY_TOL * pivots[0]:
        raise NullSpaceError(
            f"Transfer matrix is not singular (last pivot {abs(a[n - 1, n - 1]):.2e})"
        )

    y = linalg.solve_triangular(a[:n - 1, :n - 1], -a[:n - 1, n - 1], lower=False)
    permuted = np.append(y, 1.0)
    x = np.empty(n)
    x[col_perm] = permuted
    return x / col_scale


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """
    Assembled kinetic profile at speed c.

    Attributes:
        basis: Case modes at speed c
        a: Left weights (one per left mode)
        b: Right weights (one per right mode, index order K+1..N)
        kappa_plus: Asymptotic amplitude of the principal right mode
        kappa_minus: Asymptotic amplitude of the principal left mode
    """

    basis: ModeBasis
    a: np.ndarray
    b: np.ndarray
    kappa_plus: float
    kappa_minus: float

    @property
    def c(self) -> float:
        return self.basis.c

    @property
    def measure(self):
        return self.basis.measure

    def f_grid(self, z) -> np.ndarray:
        """f(z, v_i) as a (len(z), N) array; z >= 0 uses the right expansion."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty((z.size, self.basis.n))
        left = z < 0
        if np.any(left):
            lam = self.basis.exponents(LEFT)
            amp = np.exp(np.outer(z[left], lam)) * self.a
            out[left] = amp @ self.basis.profiles(LEFT).T
        if np.any(~left):
            lam = self.basis.exponents(RIGHT)
            amp = np.exp(-np.outer(z[~left], lam)) * self.b
            out[~left] = amp @ self.basis.profiles(RIGHT).T
        return out

    def rho_grid(self, z) -> np.ndarray:
        return self.f_grid(z) @ self.measure.weights

    def rho_side_grid(self, z, sign: int) -> np.ndarray:
        """Density carried by velocities with sign(v - c) == sign."""
        rel = self.measure.velocities - self.c
        mask = rel > 0 if sign > 0 else rel < 0
        return self.f_grid(z) @ (self.measure.weights * mask)

    def tumbling_grid(self, z) -> np.ndarray:
        """Tumbling density I(z) = sum_i w_i T(z, v_i - c) f(z, v_i)."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        rel = self.measure.velocities - self.c
        w = self.measure.weights
        f = self.f_grid(z)
        rates = np.where(
            (z < 0)[:, None],
            self.basis.params.side_rates(-1, rel)[None, :],
            self.basis.params.side_rates(1, rel)[None, :],
        )
        return (f * rates) @ w

    def flux(self, z) -> np.ndarray:
        """Relative flux sum_i w_i (v_i - c) f(z, v_i)."""
        rel = self.measure.velocities - self.c
        return self.f_grid(z) @ (self.measure.weights * rel)

    def mass(self) -> float:
        return _mass(self.basis, self.a, self.b)

    def continuity_residual(self) -> float:
        left = self.basis.profiles(LEFT) @ self.a
        right = self.basis.profiles(RIGHT) @ self.b
        return float(np.max(np.abs(left - right)))

    def decay_scale(self) -> float:
        """Length beyond which both principal tails are below e^{-1}."""
        return 1.0 / min(self.basis.principal_left.exponent, self.basis.principal_right.exponent)


def _mass(basis: ModeBasis, a: np.ndarray, b: np.ndarray) -> float:
    left = np.sum(a / basis.exponents(LEFT) * basis.averages(LEFT))
    right = np.sum(b / basis.exponents(RIGHT) * basis.averages(RIGHT))
    return float(left + right)


def _kappa(basis: ModeBasis, f0: np.ndarray, side: str) -> float:
    mode = basis.principal_right if side == RIGHT else basis.principal_left
    rel2 = (basis.measure.velocities - basis.c) ** 2
    w = basis.measure.weights
    num = np.dot(w, f0 * rel2 * mode.profile)
    den = np.dot(w, rel2 * mode.profile ** 2)
    return float(num / den)


def positivity_grid(basis: ModeBasis, samples: int = POSITIVITY_SAMPLES) -> np.ndarray:
    """Sample points on both sides, out to 20 principal decay lengths."""
    z_left = 20.0 / basis.principal_left.exponent
    z_right = 20.0 / basis.principal_right.exponent
    return np.concatenate([
        -np.linspace(z_left, 0.0, samples, endpoint=False),
        np.linspace(0.0, z_right, samples),
    ])


def solve_weights(basis: ModeBasis) -> WaveProfile:
    """
    Solve the transfer problem and normalize to unit mass.

    Args:
        basis: Case modes at speed c

    Returns:
        WaveProfile: Positive profile of unit mass

    Raises:
        NullSpaceError: Transfer null space is not one-dimensional
        AnsatzError: f is not positive after the sign fix
    """
    x = null_vector(transfer_matrix(basis))
    return build_profile(basis, x[:basis.K], x[basis.K:])


def build_profile(basis: ModeBasis, a: np.ndarray, b: np.ndarray) -> WaveProfile:
    """
    Scale mode weights to unit mass and attach the asymptotic amplitudes.

    A negative total mass flips the sign of both weight vectors.

    Raises:
        NullSpaceError: Zero or non-finite total mass
        AnsatzError: f is not positive on the sample grid
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mass = _mass(basis, a, b)
    if mass == 0 or not np.isfinite(mass):
        raise NullSpaceError(f"Transfer solution at c={basis.c:.10g} has zero total mass")
    a = a / mass
    b = b / mass

    f0 = basis.profiles(RIGHT) @ b
    profile = WaveProfile(
        basis=basis, a=a, b=b,
        kappa_plus=_kappa(basis, f0, RIGHT),
        kappa_minus=_kappa(basis, basis.profiles(LEFT) @ a, LEFT),
    )

    f = profile.f_grid(positivity_grid(basis))
    if np.any(f <= 0):
        raise AnsatzError(
            f"Assembled distribution at c={basis.c:.10g} is not positive (min {f.min():.3e})"
        )
    return profile


def eval_f(profile: WaveProfile, z, i: int):
    """f(z, v_i); scalar in, scalar out."""
    values = profile.f_grid(z)[:, i]
    return float(values[0]) if np.ndim(z) == 0 else values


def eval_rho(profile: WaveProfile, z):
    values = profile.rho_grid(z)
    return float(values[0]) if np.ndim(z) == 0 else values


def eval_rho_side(profile: WaveProfile, z, sign: int):
    values = profile.rho_side_grid(z, sign)
    return float(values[0]) if np.ndim(z) == 0 else values


def eval_I(profile: WaveProfile, z):
    values = profile.tumbling_grid(z)
    return float(values[0]) if np.ndim(z) == 0 else values


def _strict(values: np.ndarray, decreasing: bool) -> np.ndarray:
    """Indices where strict monotonicity fails, ignoring underflowed pairs."""
    diff = np.diff(values)
    alive = np.maximum(np.abs(values[:-1]), np.abs(values[1:])) > UNDERFLOW_FLOOR
    bad = diff >= 0 if decreasing else diff <= 0
    return np.nonzero(bad & alive)[0]


@dataclass
class MonotonicityReport:
    """Monotonicity of the side densities rho_<sign z>^<sign v-c>."""

    rho_plus_plus_decreasing: bool
    rho_plus_minus_decreasing: bool
    rho_minus_plus_increasing: bool
    rho_minus_minus_increasing: bool
    violations: List[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations


def monotonicity_report(profile: WaveProfile, grid) -> MonotonicityReport:
    """
    Check that the side densities decay away from the origin.

    Args:
        profile: Assembled profile
        grid: z samples (0 is ignored)

    Returns:
        MonotonicityReport: Four flags and a list of violations
    """
    grid = np.asarray(grid, dtype=float)
    z_pos = np.sort(grid[grid > 0])
    z_neg = np.sort(grid[grid < 0])
    violations = []
    flags = {}

    checks = (
        ('rho_plus_plus_decreasing', z_pos, +1, True),
        ('rho_plus_minus_decreasing', z_pos, -1, True),
        ('rho_minus_plus_increasing', z_neg, +1, False),
        ('rho_minus_minus_increasing', z_neg, -1, False),
    )
    for name, z, sign, decreasing in checks:
        if z.size < 2:
            flags[name] = True
            continue
        bad = _strict(profile.rho_side_grid(z, sign), decreasing)
        flags[name] = bad.size == 0
        for k in bad[:5]:
            violations.append(f"{name}: fails between z={z[k]:.6g} and z={z[k + 1]:.6g}")

    return MonotonicityReport(violations=violations, **flags)


@dataclass
class SandwichReport:
    """Two-sided exponential bounds on the tumbling density."""

    right_ok: bool
    left_ok: bool
    worst_lower_gap: float
    worst_upper_gap: float

    @property
    def clean(self) -> bool:
        return self.right_ok and self.left_ok


def sandwich_report(profile: WaveProfile, grid, rtol: float = 1e-9) -> SandwichReport:
    """
    Check kappa e^{-lambda |z|} <= I(z) <= I(0) e^{-lambda |z|} on each side.

    lambda is the principal exponent and kappa the asymptotic amplitude of
    the side; I(0) is the one-sided limit.
    """
    grid = np.asarray(grid, dtype=float)
    basis = profile.basis
    rel = profile.measure.velocities - profile.c
    w = profile.measure.weights
    params = basis.params

    f0_right = basis.profiles(RIGHT) @ profile.b
    f0_left = basis.profiles(LEFT) @ profile.a
    i0_right = float(np.dot(w, params.side_rates(1, rel) * f0_right))
    i0_left = float(np.dot(w, params.side_rates(-1, rel) * f0_left))

    lower_gap = 0.0
    upper_gap = 0.0
    results = {}
    sides = (
        ('right_ok', grid[grid > 0], basis.principal_right.exponent, profile.kappa_plus, i0_right),
        ('left_ok', grid[grid < 0], basis.principal_left.exponent, profile.kappa_minus, i0_left),
    )
    for name, z, lam, kappa, i0 in sides:
        if z.size == 0:
            results[name] = True
            continue
        scaled = profile.tumbling_grid(z) * np.exp(lam * np.abs(z))
        lower = (kappa - scaled) / kappa
        upper = (scaled - i0) / i0
        lower_gap = max(lower_gap, float(np.max(lower)))
        upper_gap = max(upper_gap, float(np.max(upper)))
        results[name] = bool(np.all(lower <= rtol) and np.all(upper <= rtol))

    return SandwichReport(worst_lower_gap=lower_gap, worst_upper_gap=upper_gap, **results)


@dataclass
class TumblingInequalityReport:
    """T_+^- f(z, v_i) < I_+(z) for every v_i < c on z > 0."""

    ok: bool
    max_ratio: float


def tumbling_inequality_report(profile: WaveProfile, grid) -> TumblingInequalityReport:
    grid = np.asarray(grid, dtype=float)
    z = grid[grid > 0]
    below = profile.measure.velocities < profile.c
    if z.size == 0 or not np.any(below):
        return TumblingInequalityReport(ok=True, max_ratio=0.0)
    tumbling = profile.tumbling_grid(z)
    alive = tumbling > UNDERFLOW_FLOOR
    scaled = profile.basis.params.rates.T_pm * profile.f_grid(z)[:, below]
    ratio = scaled[alive] / tumbling[alive, None]
    max_ratio = float(np.max(ratio)) if ratio.size else 0.0
    return TumblingInequalityReport(ok=max_ratio < 1.0, max_ratio=max_ratio)
