"""Tables for profiles, scans, modes and waves."""
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.fields.chemoattractant import SignalField
from src.fields.nutrient import NutrientSolution
from src.kinetics.tumbling import KineticParams
from src.measures.velocity_measure import VelocityMeasure
from src.spectral.case_modes import LEFT, RIGHT, ModeBasis
from src.spectral.transfer import WaveProfile
from src.waves.wave_finder import TravellingWave, UpsilonScan


def velocity_columns(n: int, prefix: str = 'f') -> List[str]:
    return [f"{prefix}_v{i + 1}" for i in range(n)]


def profile_frame(profile: WaveProfile, z, signal: Optional[SignalField] = None,
                  nutrient: Optional[NutrientSolution] = None,
                  with_fields: bool = False) -> pd.DataFrame:
    """
    Gridded profile: z, rho, rho_minus, rho_plus, I, f_v1..f_vN.

    S, N and u are appended when a field is passed or with_fields is set.
    Fields are interpolated onto z; points outside a field's grid and a
    missing nutrient are left blank (NaN).
    """
    z = np.asarray(z, dtype=float)
    f = profile.f_grid(z)
    columns: Dict[str, np.ndarray] = {
        'z': z,
        'rho': profile.rho_grid(z),
        'rho_minus': profile.rho_side_grid(z, -1),
        'rho_plus': profile.rho_side_grid(z, 1),
        'I': profile.tumbling_grid(z),
    }
    for name, values in zip(velocity_columns(profile.basis.n), f.T):
        columns[name] = values

    if with_fields or signal is not None or nutrient is not None:
        columns['S'] = _on_grid(z, signal.z, signal.s) if signal is not None else np.full(z.size, np.nan)
        if nutrient is not None:
            columns['N'] = _on_grid(z, nutrient.z, nutrient.n)
            columns['u'] = _on_grid(z, nutrient.z, nutrient.u)
        else:
            columns['N'] = np.full(z.size, np.nan)
            columns['u'] = np.full(z.size, np.nan)
    return pd.DataFrame(columns)


def _on_grid(z, z_field, values):
    return np.interp(z, z_field, values, left=np.nan, right=np.nan)


def gridded_frame(z, f, measure: VelocityMeasure, params: KineticParams, c: float) -> pd.DataFrame:
    """Same schema as profile_frame for a gridded distribution of shape (len(z), N)."""
    z = np.asarray(z, dtype=float)
    f = np.asarray(f, dtype=float)
    w = measure.weights
    rel = measure.velocities - c
    rates = np.where((z < 0)[:, None], params.side_rates(-1, rel)[None, :],
                     params.side_rates(1, rel)[None, :])
    columns: Dict[str, np.ndarray] = {
        'z': z,
        'rho': f @ w,
        'rho_minus': f @ (w * (rel < 0)),
        'rho_plus': f @ (w * (rel > 0)),
        'I': (f * rates) @ w,
    }
    for name, values in zip(velocity_columns(f.shape[1]), f.T):
        columns[name] = values
    return pd.DataFrame(columns)


def scan_frame(scan: UpsilonScan) -> pd.DataFrame:
    """One row per grid speed; failed marks evaluations left as NaN."""
    return pd.DataFrame({
        'c': scan.c_values,
        'upsilon': scan.upsilon_values,
        'interval_id': scan.interval_ids.astype(int),
        'failed': ~np.isfinite(scan.upsilon_values),
    })


def jump_frame(scan: UpsilonScan) -> pd.DataFrame:
    return pd.DataFrame({
        'v_index': [r.v_index for r in scan.jump_records],
        'v': [r.v for r in scan.jump_records],
        'upsilon_below': [r.upsilon_below for r in scan.jump_records],
        'upsilon_above': [r.upsilon_above for r in scan.jump_records],
        'jump': [r.jump for r in scan.jump_records],
    }, columns=['v_index', 'v', 'upsilon_below', 'upsilon_above', 'jump'])


def modes_frame(basis: ModeBasis) -> pd.DataFrame:
    """One row per mode: side, k, lambda, F_v1..F_vN."""
    rows = []
    names = velocity_columns(basis.n, prefix='F')
    for mode in basis.left_modes + basis.right_modes:
        row = {'side': mode.side, 'k': mode.index, 'lambda': mode.exponent}
        row.update(zip(names, mode.profile))
        rows.append(row)
    return pd.DataFrame(rows, columns=['side', 'k', 'lambda'] + names)


def wave_record(wave: TravellingWave) -> Dict:
    """JSON record of one wave."""
    basis = wave.profile.basis
    record = {
        'c': wave.c,
        'kind': wave.kind,
        'upsilon': wave.upsilon,
        'lambda_minus': basis.exponents(LEFT).tolist(),
        'lambda_plus': basis.exponents(RIGHT).tolist(),
        'a': wave.profile.a.tolist(),
        'b': wave.profile.b.tolist(),
        'kappa_minus': wave.profile.kappa_minus,
        'kappa_plus': wave.profile.kappa_plus,
        'ansatz_valid': wave.ansatz_valid,
        'ansatz': {
            's_increasing_left': wave.ansatz.s_increasing_left,
            's_decreasing_right': wave.ansatz.s_decreasing_right,
            's_argmax': wave.ansatz.s_argmax,
            'n_check': wave.ansatz.n_check,
        },
    }
    if wave.symmetry_residual is not None:
        record['symmetry_residual'] = wave.symmetry_residual
    return record


def waves_payload(waves: List[TravellingWave]) -> Dict:
    return {
        'count': len(waves),
        'valid_count': sum(1 for w in waves if w.ansatz_valid),
        'waves': [wave_record(w) for w in waves],
    }


def profile_grid(profile: WaveProfile, lengths: float = 10.0, points: int = 801) -> np.ndarray:
    """Uniform grid over a multiple of the principal decay lengths; contains 0 when points is odd."""
    half = lengths * profile.decay_scale()
    return np.linspace(-half, half, points)
