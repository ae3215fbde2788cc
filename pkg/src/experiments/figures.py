"""Datasets behind the figure presets.

Each `reproduce_<preset>` writes CSV/JSON files into an output directory and
returns a summary mapping; `reproduce` dispatches on the preset name and
stores the summary as summary.json.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np
import pandas as pd

from src.errors import ConfigError, NumericalError
from src.kinetics.tumbling import KineticParams, critical_speeds
from src.measures.velocity_measure import VelocityMeasure, make_discrete
from src.oracles.overshoot import overshoot_detect
from src.spectral.transfer import monotonicity_report
from src.utils.config_loader import RunConfig
from src.utils.csv_handler import save_json, save_to_csv
from src.waves.export import (jump_frame, profile_frame, profile_grid, scan_frame,
                              waves_payload)
from src.waves.wave_finder import (TravellingWave, find_waves, jump_at, profile_at,
                                   stationary_cluster, upsilon_scan)

logger = logging.getLogger(__name__)

PROFILE_POINTS = 801
OVERSHOOT_STEP = 0.005
VELOCITY_PROFILE_LENGTHS = (0.0, 0.25, 0.5, 1.0, 2.0)


def scan_and_find(config: RunConfig, measure: VelocityMeasure = None,
                  params: KineticParams = None):
    """Upsilon scan plus root refinement with the configured coefficients and nutrient grid."""
    measure = measure or config.measure
    params = params or config.kinetics
    fields = config.fields
    scan = upsilon_scan(measure, params, fields.alpha, fields.d_s, dc=config.scan.dc,
                        threads=config.scan.threads,
                        max_failed_share=config.scan.max_failed_share)
    waves = find_waves(scan, measure, params, fields.alpha, fields.d_s,
                       gamma=fields.gamma, d_n=fields.d_n, n_plus=fields.n_plus,
                       L=config.grid.L, n_grid=config.grid.n_grid)
    return scan, waves


def write_waves(waves: List[TravellingWave], out_dir: Path, prefix: str = 'wave'):
    """waves.json plus one profile CSV per wave."""
    save_json(waves_payload(waves), out_dir / f"{prefix}s.json")
    for k, wave in enumerate(waves, 1):
        z = profile_grid(wave.profile, points=PROFILE_POINTS)
        frame = profile_frame(wave.profile, z, signal=wave.signal, nutrient=wave.nutrient,
                              with_fields=True)
        save_to_csv(frame, out_dir / f"{prefix}_{k}_profile.csv")


def overshoot_grid(profile, lengths: float = 10.0, step: float = OVERSHOOT_STEP) -> np.ndarray:
    """Grid of nodes k * step out to a multiple of the decay length; contains 0."""
    cells = int(np.ceil(lengths * profile.decay_scale() / step))
    return step * np.arange(-cells, cells + 1)


def reproduce_fig3(config: RunConfig, out_dir: Path) -> Dict:
    fields = config.fields
    wave = stationary_cluster(config.measure, config.kinetics, fields.alpha, fields.d_s,
                              gamma=fields.gamma, d_n=fields.d_n)
    profile = wave.profile
    z = profile_grid(profile, points=PROFILE_POINTS)
    save_to_csv(profile_frame(profile, z, signal=wave.signal, with_fields=True),
                out_dir / 'cluster_profile.csv')

    # Velocity profiles normalized by the slowest velocity at each z
    v = config.measure.velocities
    slow = int(np.argmin(np.abs(v)))
    columns = {'v': v}
    for multiple in VELOCITY_PROFILE_LENGTHS:
        at = multiple * profile.decay_scale()
        f = profile.f_grid(at)[0]
        columns[f"z_{at:.6g}"] = f / f[slow]
    save_to_csv(pd.DataFrame(columns), out_dir / 'velocity_profiles.csv')

    # The argmax shift of the fast velocities is a fraction of the profile grid cell
    overshoot = overshoot_detect(overshoot_grid(profile), profile)
    monotonicity = monotonicity_report(profile, z)
    rho_right = profile.rho_grid(z[z > 0])
    return {
        'c': wave.c,
        'kind': wave.kind,
        'symmetry_residual': wave.symmetry_residual,
        'ansatz_valid': wave.ansatz_valid,
        'right_overshoot': overshoot.right_overshoot,
        'left_overshoot': overshoot.left_overshoot,
        'threshold_index': overshoot.threshold_index,
        'overshoot_contiguous': overshoot.contiguous,
        'side_densities_monotone': monotonicity.clean,
        'rho_decreasing_right': bool(np.all(np.diff(rho_right) < 0)),
    }


def reproduce_fig5(config: RunConfig, out_dir: Path) -> Dict:
    measure, params = config.measure, config.kinetics
    window = critical_speeds(measure, params)
    deltas = [float(d) for d in config.experiment.get('deltas', [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])]
    lengths = float(config.experiment.get('profile_lengths', 10.0))

    rows, curves = [], []
    for side, base, direction in (('lower', window.c_star_lo, 1.0),
                                  ('upper', window.c_star_hi, -1.0)):
        for delta in deltas:
            c = base + direction * delta
            try:
                profile = profile_at(measure, params, c)
            except NumericalError as e:
                logger.warning("Skipping c=%.12g: %s", c, e)
                continue
            lam_minus = profile.basis.principal_left.exponent
            lam_plus = profile.basis.principal_right.exponent
            rows.append({'side': side, 'delta': delta, 'c': c,
                         'lambda_minus': lam_minus, 'lambda_plus': lam_plus})
            z = np.linspace(-lengths, lengths, PROFILE_POINTS)
            rho = profile.rho_grid(z)
            curves.append(pd.DataFrame({'side': side, 'c': c, 'z': z,
                                        'rho': rho / profile.rho_grid(0.0)[0]}))

    exponents = pd.DataFrame(rows, columns=['side', 'delta', 'c', 'lambda_minus', 'lambda_plus'])
    save_to_csv(exponents, out_dir / 'principal_exponents.csv')
    if curves:
        save_to_csv(pd.concat(curves, ignore_index=True), out_dir / 'density_profiles.csv')

    lower = exponents[exponents['side'] == 'lower']
    upper = exponents[exponents['side'] == 'upper']
    return {
        'c_star_lo': window.c_star_lo,
        'c_star_hi': window.c_star_hi,
        'lambda_plus_closest_lower': float(lower['lambda_plus'].iloc[-1]) if len(lower) else None,
        'lambda_minus_closest_upper': float(upper['lambda_minus'].iloc[-1]) if len(upper) else None,
    }


def reproduce_fig7(config: RunConfig, out_dir: Path) -> Dict:
    measure, params, fields = config.measure, config.kinetics, config.fields
    v_index = int(config.experiment.get('v_index', measure.size // 2))
    offset = float(config.experiment.get('offset', 0.01))
    v = float(measure.velocities[v_index])

    for label, c in (('below', v - offset), ('above', v + offset)):
        profile = profile_at(measure, params, c)
        z = profile_grid(profile, points=PROFILE_POINTS)
        save_to_csv(profile_frame(profile, z), out_dir / f"profile_{label}.csv")

    record = jump_at(measure, params, v_index, fields.alpha, fields.d_s)
    payload = {
        'v_index': record.v_index,
        'v': record.v,
        'upsilon_below': record.upsilon_below,
        'upsilon_above': record.upsilon_above,
        'jump': record.jump,
        'amplitude_below': record.amplitude_below,
        'amplitude_above': record.amplitude_above,
        'amplitude_bound': record.amplitude_bound,
        'exploding_below': record.exploding_below,
        'exploding_above': record.exploding_above,
    }
    save_json(payload, out_dir / 'jump.json')
    return {key: payload[key] for key in ('v', 'jump', 'amplitude_below', 'amplitude_bound')}


def reproduce_fig8(config: RunConfig, out_dir: Path) -> Dict:
    scan, waves = scan_and_find(config)
    save_to_csv(scan_frame(scan), out_dir / 'scan.csv')
    save_to_csv(jump_frame(scan), out_dir / 'jumps.csv')
    write_waves(waves, out_dir)
    return {
        'wave_speeds': [w.c for w in waves],
        'valid_speeds': [w.c for w in waves if w.ansatz_valid],
        'jumps': {f"{r.v:.6g}": r.jump for r in scan.jump_records},
        'failed_count': scan.failed_count,
    }


def reproduce_fig9(config: RunConfig, out_dir: Path) -> Dict:
    vmins = [float(x) for x in config.experiment.get('vmins', [0.1, 0.5, 0.8])]
    weights = config.measure.weights
    summary = {}
    for vmin in vmins:
        measure = make_discrete([-1.0, -vmin, vmin, 1.0], weights)
        scan, waves = scan_and_find(config, measure=measure)
        tag = f"vmin_{vmin:g}"
        save_to_csv(scan_frame(scan), out_dir / f"scan_{tag}.csv")
        write_waves(waves, out_dir, prefix=f"{tag}_wave")
        summary[tag] = [w.c for w in waves if w.ansatz_valid]
    return {'valid_speeds': summary}


def reproduce_fig10(config: RunConfig, out_dir: Path) -> Dict:
    scan, waves = scan_and_find(config)
    save_to_csv(scan_frame(scan), out_dir / 'scan.csv')
    save_to_csv(jump_frame(scan), out_dir / 'jumps.csv')
    write_waves(waves, out_dir)
    finite = scan.upsilon_values[np.isfinite(scan.upsilon_values)]
    return {
        'scan_points': int(scan.c_values.size),
        'failed_count': scan.failed_count,
        'max_upsilon': float(finite.max()) if finite.size else None,
        'wave_count': len(waves),
        'valid_count': sum(1 for w in waves if w.ansatz_valid),
    }


REPRODUCERS: Dict[str, Callable[[RunConfig, Path], Dict]] = {
    'fig3': reproduce_fig3,
    'fig5': reproduce_fig5,
    'fig7': reproduce_fig7,
    'fig8': reproduce_fig8,
    'fig9': reproduce_fig9,
    'fig10': reproduce_fig10,
}


def reproduce(preset: str, config: RunConfig, out_dir) -> Dict:
    """
    Write the dataset of one preset to <out_dir>/<preset>/.

    Raises:
        ConfigError: Unknown preset
    """
    if preset not in REPRODUCERS:
        raise ConfigError(f"Unknown preset '{preset}'; expected one of {sorted(REPRODUCERS)}")
    target = Path(out_dir) / preset
    target.mkdir(parents=True, exist_ok=True)
    logger.info("Reproducing %s into %s", preset, target)
    summary = REPRODUCERS[preset](config, target)
    summary['preset'] = preset
    save_json(summary, target / 'summary.json')
    return summary
