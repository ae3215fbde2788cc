"""Time-marching relaxation of the frozen-rate kinetic equation.

Solves d_t f + (v - c) d_z f = I - T f on [-L, L] with finite volumes:
upwind fluxes from van Leer limited slopes (or donor cell for order=1),
Heun (SSP-RK2) time stepping, zero inflow at both ends, and the mass
renormalized to 1 after every step. T is frozen by sign(z) and sign(v - c),
so the steady state is the discrete counterpart of the Case-mode profile.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.errors import ParameterError, RelaxationError
from src.kinetics.tumbling import KineticParams
from src.measures.velocity_measure import VelocityMeasure
from src.spectral.case_modes import check_collision
from src.spectral.transfer import WaveProfile

logger = logging.getLogger(__name__)

CFL = 0.4
DIVERGENCE_FACTOR = 100.0
LOG_EVERY = 5000


@dataclass(frozen=True, eq=False)
class RelaxationResult:
    """
    Final state of a relaxation run.

    Attributes:
        z: Cell centres, shape (nz,)
        f: Distribution at the cell centres, shape (nz, N)
        residuals: Weighted L1 norm of (f^{n+1} - f^n)/dt per step
        t: Final time
        converged: True when the last residual is below the tolerance
        interface_flux: sum_i w_i (v_i - c) F_i at the nz + 1 cell faces
    """

    z: np.ndarray
    f: np.ndarray
    residuals: np.ndarray
    t: float
    converged: bool
    interface_flux: np.ndarray

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def faces(self) -> np.ndarray:
        return np.concatenate([self.z - 0.5 * self.dz, [self.z[-1] + 0.5 * self.dz]])


def cell_centres(L: float, nz: int) -> np.ndarray:
    dz = 2.0 * L / nz
    return -L + (np.arange(nz) + 0.5) * dz


def _van_leer(left_diff: np.ndarray, right_diff: np.ndarray) -> np.ndarray:
    prod = left_diff * right_diff
    total = left_diff + right_diff
    out = np.zeros_like(prod)
    np.divide(2.0 * prod, total, out=out, where=prod > 0)
    return out


class _Stepper:
    """Upwind finite-volume operator for the N transport rows."""

    def __init__(self, measure: VelocityMeasure, params: KineticParams, c: float,
                 z: np.ndarray, order: int):
        self.weights = measure.weights
        self.speed = measure.velocities - c
        self.dz = float(z[1] - z[0])
        self.order = order
        self.positive = self.speed > 0
        left = params.side_rates(-1, self.speed)
        right = params.side_rates(1, self.speed)
        self.rates = np.where((z < 0)[None, :], left[:, None], right[:, None])

    def _padded(self, f: np.ndarray) -> np.ndarray:
        """Two ghost cells per end: zero on the inflow side, copies on the outflow side."""
        first = np.where(self.positive, 0.0, f[:, 0])[:, None]
        last = np.where(self.positive, f[:, -1], 0.0)[:, None]
        return np.hstack([first, first, f, last, last])

    def face_values(self, f: np.ndarray) -> np.ndarray:
        """Upwinded states at the nz + 1 faces, shape (N, nz + 1)."""
        g = self._padded(f)
        if self.order == 1:
            upwind_left = g[:, 1:-2]
            upwind_right = g[:, 2:-1]
            return np.where(self.positive[:, None], upwind_left, upwind_right)

        diff = np.diff(g, axis=1)
        slope = _van_leer(diff[:, :-1], diff[:, 1:])
        # slope[:, k] belongs to padded cell k + 1
        centre = g[:, 1:-1]
        left_state = centre[:, :-1] + 0.5 * slope[:, :-1]
        right_state = centre[:, 1:] - 0.5 * slope[:, 1:]
        return np.where(self.positive[:, None], left_state, right_state)

    def rhs(self, f: np.ndarray) -> np.ndarray:
        faces = self.face_values(f)
        transport = -self.speed[:, None] * np.diff(faces, axis=1) / self.dz
        tumbling = self.rates * f
        source = self.weights @ tumbling
        return transport + source[None, :] - tumbling

    def mass(self, f: np.ndarray) -> float:
        return float(self.dz * np.sum(self.weights @ f))

    def flux(self, f: np.ndarray) -> np.ndarray:
        return (self.weights * self.speed) @ self.face_values(f)


def _initial_state(initial, measure: VelocityMeasure, z: np.ndarray, seed: int) -> np.ndarray:
    n = measure.size
    if initial is None:
        rng = np.random.default_rng(seed)
        return rng.uniform(0.1, 1.0, size=(n, z.size))
    if isinstance(initial, WaveProfile):
        return initial.f_grid(z).T.copy()
    f = np.asarray(initial, dtype=float)
    if f.shape == (z.size, n):
        return f.T.copy()
    raise ParameterError(f"Initial state must have shape ({z.size}, {n}), got {f.shape}")


def relax_to_steady(measure: VelocityMeasure, params: KineticParams, c: float, L: float,
                    nz: int, dt: Optional[float] = None, t_end: float = 400.0,
                    order: int = 2, initial: Union[None, np.ndarray, WaveProfile] = None,
                    seed: int = 0, tol: float = 1e-10) -> RelaxationResult:
    """
    March the frozen-rate kinetic equation to its steady state.

    Args:
        measure: Velocity measure
        params: Kinetic parameters
        c: Wave speed (no velocity equal to c)
        L: Half-width of the domain
        nz: Number of cells (even, so no centre sits at z = 0)
        dt: Time step, default 0.4 dz / max|v - c|
        t_end: Final time if the residual never drops below tol
        order: 2 for limited MUSCL, 1 for donor cell
        initial: None for random positive data, a (nz, N) array, or a WaveProfile
        seed: Seed of the random initial data
        tol: Stop once the residual is below this value

    Returns:
        RelaxationResult

    Raises:
        ParameterError: Invalid grid or order
        CollisionError: c equals a velocity
        RelaxationError: CFL violation or divergence
    """
    check_collision(measure, c)
    if not L > 0 or nz < 4 or nz % 2:
        raise ParameterError(f"Need L > 0 and an even nz >= 4, got L={L}, nz={nz}")
    if order not in (1, 2):
        raise ParameterError(f"order must be 1 or 2, got {order}")

    z = cell_centres(L, nz)
    dz = float(z[1] - z[0])
    max_speed = float(np.max(np.abs(measure.velocities - c)))
    limit = dz / max_speed
    if dt is None:
        dt = CFL * limit
    if not 0 < dt <= limit:
        raise RelaxationError(f"Time step dt={dt:.4g} violates the CFL bound {limit:.4g}")

    stepper = _Stepper(measure, params, c, z, order)
    f = _initial_state(initial, measure, z, seed)
    f /= stepper.mass(f)

    steps = int(np.ceil(t_end / dt))
    residuals = []
    t = 0.0
    converged = False
    logger.info("Relaxing N=%d, nz=%d, dt=%.3g up to t=%.4g", measure.size, nz, dt, t_end)
    for step in range(steps):
        stage = f + dt * stepper.rhs(f)
        new = 0.5 * (f + stage + dt * stepper.rhs(stage))
        new /= stepper.mass(new)
        residual = float(dz * np.sum(measure.weights @ np.abs(new - f))) / dt
        f = new
        t += dt
        residuals.append(residual)

        if not np.isfinite(residual) or residual > DIVERGENCE_FACTOR * max(residuals[0], 1.0):
            raise RelaxationError(f"Relaxation diverged at t={t:.4g} (residual {residual:.3e})")
        if step % LOG_EVERY == 0:
            logger.debug("t=%.4g residual=%.3e", t, residual)
        if residual < tol:
            converged = True
            break

    if not converged:
        logger.warning("Relaxation stopped at t=%.4g with residual %.3e", t, residuals[-1])
    return RelaxationResult(
        z=z, f=f.T.copy(), residuals=np.asarray(residuals), t=t, converged=converged,
        interface_flux=stepper.flux(f),
    )


def l1_distance(result: RelaxationResult, profile: WaveProfile) -> float:
    """Weighted L1 distance dz sum_j sum_i w_i |f - f_modal| at the cell centres."""
    modal = profile.f_grid(result.z)
    return float(result.dz * np.sum(np.abs(result.f - modal) @ profile.measure.weights))
