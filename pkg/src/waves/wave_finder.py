"""Scan the matching function over admissible speeds and assemble waves."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from src.errors import (CollisionError, ExtrapolationError, MeasureError, NumericalError,
                        ParameterError, ScanError)
from src.fields.ansatz import AnsatzReport, ansatz_check
from src.fields.chemoattractant import (SignalField, green_exponents, signal_profile,
                                        symmetric_grid, upsilon)
from src.fields.nutrient import DEFAULT_GRID, NutrientSolution, nutrient_profile
from src.kinetics.tumbling import KineticParams, SpeedWindow, critical_speeds
from src.measures.velocity_measure import VelocityMeasure
from src.spectral.case_modes import LEFT, CaseMode, ModeBasis, dispersion_roots
from src.spectral.transfer import WaveProfile, build_profile, solve_weights

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-10
ROOT_XTOL = 1e-14
SIDE_OFFSET = 1e-6
MIN_DC = 1e-4
DC_DIVISOR = 30.0
JUMP_EPSILONS = (1e-4, 1e-5, 1e-6)
JUMP_AGREEMENT = 0.05
MAX_FAILED_SHARE = 0.5

STATIONARY_CLUSTER = 'stationary_cluster'
TRAVELLING = 'travelling'


def profile_at(measure: VelocityMeasure, params: KineticParams, c: float) -> WaveProfile:
    return solve_weights(dispersion_roots(measure, params, c))


def upsilon_at(measure: VelocityMeasure, params: KineticParams, c: float,
               alpha: float, d_s: float) -> float:
    """Matching function at a single speed."""
    return upsilon(profile_at(measure, params, c), alpha, d_s)


def default_dc(measure: VelocityMeasure) -> float:
    """Smallest velocity gap over 30, floored at 1e-4."""
    return max(float(np.min(np.diff(measure.velocities))) / DC_DIVISOR, MIN_DC)


@dataclass
class JumpRecord:
    """One-sided limits of Upsilon across a discrete velocity."""

    v_index: int
    v: float
    upsilon_below: float
    upsilon_above: float
    amplitude_below: Optional[float] = None
    amplitude_above: Optional[float] = None
    amplitude_bound: Optional[float] = None
    exploding_below: List[float] = field(default_factory=list)
    exploding_above: List[float] = field(default_factory=list)

    @property
    def jump(self) -> float:
        return self.upsilon_above - self.upsilon_below

    @property
    def sign(self) -> int:
        return int(np.sign(self.jump))

    @property
    def crosses_zero(self) -> bool:
        return self.upsilon_below * self.upsilon_above < 0


@dataclass
class UpsilonScan:
    """Upsilon sampled on a grid of admissible speeds."""

    c_values: np.ndarray
    upsilon_values: np.ndarray
    interval_ids: np.ndarray
    interval_boundaries: np.ndarray
    jump_records: List[JumpRecord]
    window: SpeedWindow
    dc: float
    alpha: float
    d_s: float

    def jump_crossings(self) -> List[JumpRecord]:
        """Velocities across which Upsilon changes sign by jumping."""
        return [record for record in self.jump_records if record.crosses_zero]

    @property
    def failed_count(self) -> int:
        """Grid speeds where Upsilon could not be evaluated."""
        return int(np.count_nonzero(~np.isfinite(self.upsilon_values)))


@dataclass
class TravellingWave:
    """Assembled wave at a root of Upsilon."""

    c: float
    profile: WaveProfile
    upsilon: float
    signal: SignalField
    nutrient: Optional[NutrientSolution]
    ansatz: AnsatzReport
    ansatz_valid: bool
    kind: str
    symmetry_residual: Optional[float] = None


def _scan_grid(measure: VelocityMeasure, window: SpeedWindow, dc: float) -> np.ndarray:
    lo, hi = window.scan_bounds()
    v0 = measure.v0
    start = 0 if lo > window.c_star_lo else 1
    count = int(math.ceil((hi - lo) / dc)) + 1
    grid = lo + dc * np.arange(start, count)
    grid = grid[grid < hi - SIDE_OFFSET * v0]

    out = []
    for c in grid:
        nearest = measure.velocities[np.argmin(np.abs(measure.velocities - c))]
        if abs(c - nearest) < SIDE_OFFSET * v0:
            below = nearest - SIDE_OFFSET * v0
            above = nearest + SIDE_OFFSET * v0
            c = below if below > lo else above
            logger.debug("Scan point displaced to %.12g (velocity %.6g)", c, nearest)
        out.append(c)
    return np.unique(np.asarray(out, dtype=float))


def _safe_upsilon(measure, params, alpha, d_s, c):
    try:
        return upsilon_at(measure, params, c, alpha, d_s)
    except NumericalError as e:
        logger.debug("Upsilon evaluation failed at c=%.12g: %s", c, e)
        return float('nan')


def upsilon_scan(measure: VelocityMeasure, params: KineticParams, alpha: float, d_s: float,
                 dc: Optional[float] = None, threads: int = 1,
                 max_failed_share: float = MAX_FAILED_SHARE) -> UpsilonScan:
    """
    Sample Upsilon on a uniform grid of the window (max(0, c_*), c^*).

    Grid points within 1e-6 v0 of a velocity are displaced to v - 1e-6 v0
    (or v + 1e-6 v0 at the window edge). Each interior velocity gets a jump
    record from one-sided evaluations at the same offset. Points where the
    evaluation fails are kept as NaN.

    Args:
        measure: Velocity measure
        params: Kinetic parameters
        alpha: Signal degradation rate
        d_s: Signal diffusivity
        dc: Grid step (default_dc when None)
        threads: Worker threads for independent evaluations
        max_failed_share: Largest tolerated share of failed evaluations

    Returns:
        UpsilonScan

    Raises:
        ParameterError: Empty window, dc <= 0 or max_failed_share outside [0, 1)
        ScanError: Every evaluation, or more than max_failed_share of them, failed
    """
    if not 0.0 <= max_failed_share < 1.0:
        raise ParameterError(f"max_failed_share must lie in [0, 1), got {max_failed_share}")
    green_exponents(0.0, alpha, d_s)  # validates alpha, d_s
    window = critical_speeds(measure, params)
    lo, hi = window.scan_bounds()
    if not lo < hi:
        raise ParameterError(f"Empty scan window ({lo:.6g}, {hi:.6g})")
    if dc is None:
        dc = default_dc(measure)
    if not dc > 0:
        raise ParameterError(f"dc must be positive, got {dc}")

    c_values = _scan_grid(measure, window, dc)
    v = measure.velocities
    offset = SIDE_OFFSET * measure.v0
    boundaries = v[(v - offset > lo) & (v + offset < hi)]
    boundary_ids = np.nonzero((v - offset > lo) & (v + offset < hi))[0]

    side_points = []
    for vi in boundaries:
        side_points.extend([vi - offset, vi + offset])
    points = list(c_values) + side_points

    logger.info("Scanning %d speeds on (%.6g, %.6g) with dc=%.3g", len(points), lo, hi, dc)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda c: _safe_upsilon(measure, params, alpha, d_s, c), points))
    else:
        values = [_safe_upsilon(measure, params, alpha, d_s, c) for c in points]

    failed = int(np.count_nonzero(~np.isfinite(np.asarray(values, dtype=float))))
    if failed > max_failed_share * len(points):
        raise ScanError(f"Upsilon evaluation failed at {failed} of {len(points)} speeds")
    if failed:
        logger.warning("Upsilon evaluation failed at %d of %d speeds", failed, len(points))

    n_grid = c_values.size
    upsilon_values = np.asarray(values[:n_grid], dtype=float)
    records = [
        JumpRecord(v_index=int(idx), v=float(vi),
                   upsilon_below=values[n_grid + 2 * k], upsilon_above=values[n_grid + 2 * k + 1])
        for k, (idx, vi) in enumerate(zip(boundary_ids, boundaries))
    ]
    return UpsilonScan(
        c_values=c_values,
        upsilon_values=upsilon_values,
        interval_ids=np.searchsorted(boundaries, c_values),
        interval_boundaries=boundaries,
        jump_records=records,
        window=window,
        dc=float(dc),
        alpha=alpha,
        d_s=d_s,
    )


def assemble_wave(profile: WaveProfile, alpha: float, d_s: float, gamma: float = 1.0,
                  d_n: float = 1.0, n_plus: float = 1.0, L: Optional[float] = None,
                  n_grid: int = DEFAULT_GRID) -> TravellingWave:
    """
    Tabulate S and N for a profile and run the ansatz check.

    L and n_grid set the nutrient grid (see nutrient_profile).

    Waves with c <= 0 and chi_n > 0 are flagged invalid since the nutrient
    field is only defined for c > 0.
    """
    c = profile.c
    params = profile.basis.params
    g = green_exponents(c, alpha, d_s)
    length = 30.0 * max(profile.decay_scale(), 1.0 / min(g.mu_minus, g.mu_plus))
    signal = signal_profile(profile, alpha, d_s, symmetric_grid(length))

    nutrient = None
    if c > 0:
        nutrient = nutrient_profile(profile, c, gamma, d_n, L=L, n_grid=n_grid, n_plus=n_plus)
    report = ansatz_check(signal, nutrient)
    valid = report.valid and not (c <= 0 and params.chi_n > 0)
    kind = STATIONARY_CLUSTER if c == 0 and params.chi_n == 0 else TRAVELLING
    return TravellingWave(
        c=c, profile=profile, upsilon=upsilon(profile, alpha, d_s), signal=signal,
        nutrient=nutrient, ansatz=report, ansatz_valid=valid, kind=kind,
    )


def _refine_root(measure, params, alpha, d_s, lo, hi) -> float:
    root = bisect(lambda c: upsilon_at(measure, params, c, alpha, d_s), lo, hi,
                  xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
    value = upsilon_at(measure, params, root, alpha, d_s)
    if abs(value) >= ROOT_TOL:
        logger.warning("Root at c=%.14g reached xtol with |Upsilon|=%.2e", root, abs(value))
    return root


def find_waves(scan: UpsilonScan, measure: VelocityMeasure, params: KineticParams,
               alpha: float, d_s: float, gamma: float = 1.0, d_n: float = 1.0,
               n_plus: float = 1.0, L: Optional[float] = None,
               n_grid: int = DEFAULT_GRID) -> List[TravellingWave]:
    """
    Refine every sign change of Upsilon inside a continuity interval.

    Scan values already below ROOT_TOL count as roots. Waves failing the
    ansatz check are returned flagged. L and n_grid set the nutrient grid.

    Returns:
        list: TravellingWave per root, sorted by speed (possibly empty)
    """
    c, y, ids = scan.c_values, scan.upsilon_values, scan.interval_ids
    exact = np.isfinite(y) & (np.abs(y) < ROOT_TOL)
    roots = [float(ci) for ci in c[exact]]

    for j in range(c.size - 1):
        if ids[j] != ids[j + 1] or exact[j] or exact[j + 1]:
            continue
        if not (np.isfinite(y[j]) and np.isfinite(y[j + 1])):
            continue
        if y[j] * y[j + 1] < 0:
            roots.append(_refine_root(measure, params, alpha, d_s, c[j], c[j + 1]))

    waves = []
    for root in sorted(roots):
        wave = assemble_wave(profile_at(measure, params, root), alpha, d_s, gamma, d_n, n_plus,
                             L=L, n_grid=n_grid)
        if not wave.ansatz_valid:
            logger.warning("Wave at c=%.10g fails the ansatz check", root)
        waves.append(wave)
    logger.info("Found %d root(s) of Upsilon", len(waves))
    return waves


def _extrapolate(values: Sequence[float], label: str) -> float:
    """Linear-in-epsilon extrapolation from three points with ratio 10."""
    y1, y2, y3 = values
    early = y2 + (y2 - y1) / 9.0
    late = y3 + (y3 - y2) / 9.0
    scale = max(abs(late), 1e-6)
    if abs(early - late) > JUMP_AGREEMENT * scale:
        raise ExtrapolationError(
            f"One-sided limit of {label} does not stabilise: {early:.6g} vs {late:.6g}"
        )
    return late


def jump_at(measure: VelocityMeasure, params: KineticParams, v_index: int,
            alpha: float, d_s: float, epsilons: Sequence[float] = JUMP_EPSILONS) -> JumpRecord:
    """
    One-sided limits of Upsilon and of the exchanged mode across v_i.

    Below v_i the exchanged mode is the fastest-decaying right mode (index
    K+1); above v_i it is the fastest-decaying left mode. Limits are
    extrapolated from c = v_i -/+ eps v0 over the given epsilons.

    Raises:
        ParameterError: v_i not interior to the speed window
        ExtrapolationError: Limits do not stabilise
    """
    if not 0 <= v_index < measure.size:
        raise ParameterError(f"v_index {v_index} out of range")
    window = critical_speeds(measure, params)
    v = float(measure.velocities[v_index])
    v0 = measure.v0
    if not (window.contains(v - max(epsilons) * v0) and window.contains(v + max(epsilons) * v0)):
        raise ParameterError(f"Velocity {v} is not interior to the window "
                             f"({window.c_star_lo:.6g}, {window.c_star_hi:.6g})")

    rates = params.rates
    below_ups, above_ups = [], []
    below_amp, above_amp = [], []
    below_lam, above_lam = [], []
    bounds = []
    for eps in sorted(epsilons, reverse=True):
        below = profile_at(measure, params, v - eps * v0)
        mode = below.basis.right_modes[0]
        below_ups.append(upsilon(below, alpha, d_s))
        below_amp.append(below.b[0] * mode.average)
        below_lam.append(mode.exponent)
        rho_slow = float(below.rho_side_grid(0.0, -1)[0])
        bounds.append(measure.weights[v_index] * 4.0 * params.chi_s * rho_slow
                      / (rates.T_pp * rates.T_mp))

        above = profile_at(measure, params, v + eps * v0)
        mode = above.basis.left_modes[-1]
        above_ups.append(upsilon(above, alpha, d_s))
        above_amp.append(above.a[-1] * mode.average)
        above_lam.append(mode.exponent)

    return JumpRecord(
        v_index=v_index,
        v=v,
        upsilon_below=_extrapolate(below_ups, 'Upsilon (below)'),
        upsilon_above=_extrapolate(above_ups, 'Upsilon (above)'),
        amplitude_below=_extrapolate(below_amp, 'transferred amplitude (below)'),
        amplitude_above=_extrapolate(above_amp, 'transferred amplitude (above)'),
        amplitude_bound=_extrapolate(bounds, 'amplitude bound'),
        exploding_below=below_lam,
        exploding_above=above_lam,
    )


def _mirror_basis(basis: ModeBasis) -> ModeBasis:
    """Replace the left modes by mirror images of the right modes."""
    mirror = basis.measure.mirror_indices()
    left = tuple(
        CaseMode(side=LEFT, exponent=mode.exponent, profile=mode.profile[mirror].copy(),
                 index=k + 1, average=mode.average)
        for k, mode in enumerate(reversed(basis.right_modes))
    )
    return ModeBasis(measure=basis.measure, params=basis.params, c=basis.c, K=basis.K,
                     left_modes=left, right_modes=basis.right_modes)


def symmetry_residual(profile: WaveProfile, z) -> float:
    """max |f(z, v_i) - f(-z, v_{N+1-i})| relative to max f."""
    z = np.asarray(z, dtype=float)
    f = profile.f_grid(z)
    mirrored = profile.f_grid(-z)[:, profile.measure.mirror_indices()]
    return float(np.max(np.abs(f - mirrored)) / np.max(np.abs(f)))


def stationary_cluster(measure: VelocityMeasure, params: KineticParams, alpha: float,
                       d_s: float, gamma: float = 1.0, d_n: float = 1.0) -> TravellingWave:
    """
    Symmetric stationary cluster at c = 0.

    Raises:
        ParameterError: chi_n != 0
        MeasureError: Asymmetric measure
        CollisionError: 0 is one of the velocities
    """
    if params.chi_n != 0:
        raise ParameterError(f"Stationary cluster needs chi_n = 0, got {params.chi_n}")
    if not measure.symmetric:
        raise MeasureError("Stationary cluster needs a symmetric velocity measure")
    if np.any(measure.velocities == 0):
        raise CollisionError("Velocity 0 collides with the cluster speed c = 0")

    profile = profile_at(measure, params, 0.0)
    basis = _mirror_basis(profile.basis)
    b = 0.5 * (profile.b + profile.a[::-1])
    symmetric = build_profile(basis, b[::-1], b)

    wave = assemble_wave(symmetric, alpha, d_s, gamma, d_n)
    wave.kind = STATIONARY_CLUSTER
    wave.symmetry_residual = symmetry_residual(symmetric, wave.signal.z)
    return wave
