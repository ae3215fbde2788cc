"""Command-line front end for the kinetic travelling-wave solver."""
import argparse
import logging
import sys
from dataclasses import replace

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from src.errors import ConfigError, KinwaveError, NumericalError
from src.experiments.figures import REPRODUCERS, reproduce, scan_and_find, write_waves
from src.kinetics.tumbling import critical_speeds
from src.oracles.macroscopic import MacroParams, macro_density, macro_speed, macro_upsilon
from src.oracles.relaxation import l1_distance, relax_to_steady
from src.spectral.case_modes import dispersion_roots
from src.utils.config_loader import load_config, resolve_threads
from src.utils.csv_handler import save_json, save_to_csv
from src.waves.export import (gridded_frame, jump_frame, modes_frame, profile_frame,
                              profile_grid, scan_frame, wave_record)
from src.waves.wave_finder import profile_at, stationary_cluster

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_WAVE = 3
EXIT_NUMERICAL = 4

MACRO_PROFILE_POINTS = 801


def banner(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def require_speed(config):
    if config.c is None:
        raise ConfigError("This command needs a wave speed (--c or 'c' in the config)")
    return config.c


def cmd_rates(config, out_dir):
    """Print and save the four frozen tumbling rates."""
    banner("Tumbling rates")
    rates = config.kinetics.rates
    table = pd.DataFrame({
        'name': ['T_mm', 'T_mp', 'T_pm', 'T_pp'],
        'z_sign': [-1, -1, 1, 1],
        'v_minus_c_sign': [-1, 1, -1, 1],
        'value': [rates.T_mm, rates.T_mp, rates.T_pm, rates.T_pp],
    })
    for row in table.itertuples():
        print(f"  {row.name} (z {row.z_sign:+d}, v-c {row.v_minus_c_sign:+d}) = {row.value:.6g}")
    save_to_csv(table, out_dir / 'rates.csv')
    print(f"✓ Saved to {out_dir / 'rates.csv'}")
    return EXIT_OK


def cmd_critical(config, out_dir):
    """Print and save the admissible speed window (c_*, c^*)."""
    banner("Critical speeds")
    window = critical_speeds(config.measure, config.kinetics)
    lo, hi = window.scan_bounds()
    print(f"✓ c_* = {window.c_star_lo:.12g}")
    print(f"✓ c^* = {window.c_star_hi:.12g}")
    print(f"✓ Scanned window: ({lo:.12g}, {hi:.12g})")
    save_json({'c_star_lo': window.c_star_lo, 'c_star_hi': window.c_star_hi,
               'scan_lo': lo, 'scan_hi': hi}, out_dir / 'critical_speeds.json')
    return EXIT_OK


def cmd_modes(config, out_dir):
    """Enumerate the Case modes at the requested speed."""
    c = require_speed(config)
    banner(f"Case modes at c = {c:.12g}")
    basis = dispersion_roots(config.measure, config.kinetics, c)
    for mode in basis.left_modes + basis.right_modes:
        print(f"  {mode.side:<5} k={mode.index:<3d} lambda={mode.exponent:.12g}")
    save_to_csv(modes_frame(basis), out_dir / 'modes.csv')
    print(f"✓ {len(basis.left_modes)} left and {len(basis.right_modes)} right modes")
    print(f"✓ Saved to {out_dir / 'modes.csv'}")
    return EXIT_OK


def cmd_scan(config, out_dir):
    """Sample Upsilon over the admissible window."""
    banner("Upsilon scan")
    scan, _ = scan_and_find(config)
    save_to_csv(scan_frame(scan), out_dir / 'scan.csv')
    save_to_csv(jump_frame(scan), out_dir / 'jumps.csv')
    print(f"✓ {scan.c_values.size} speeds scanned with dc = {scan.dc:.4g}")
    if scan.failed_count:
        print(f"✗ Upsilon failed at {scan.failed_count} speed(s)")
    for record in scan.jump_records:
        mark = " (sign change)" if record.crosses_zero else ""
        print(f"  jump at v={record.v:.6g}: {record.jump:+.6g}{mark}")
    print(f"✓ Saved to {out_dir / 'scan.csv'}")
    return EXIT_OK


def cmd_wave(config, out_dir):
    """Find every travelling wave; exit 3 when none is ansatz-valid."""
    banner("Travelling waves")
    scan, waves = scan_and_find(config)
    save_to_csv(scan_frame(scan), out_dir / 'scan.csv')
    write_waves(waves, out_dir)
    if scan.failed_count:
        print(f"✗ Upsilon failed at {scan.failed_count} of {scan.c_values.size} speeds")

    for wave in waves:
        mark = "✓" if wave.ansatz_valid else "✗"
        print(f"{mark} c = {wave.c:.12g} (ansatz {'valid' if wave.ansatz_valid else 'invalid'})")
    valid = [w for w in waves if w.ansatz_valid]
    if not valid:
        print("✗ No ansatz-valid travelling wave")
        return EXIT_NO_WAVE
    print(f"✓ {len(valid)} valid wave(s); saved to {out_dir / 'waves.json'}")
    return EXIT_OK


def cmd_cluster(config, out_dir):
    """Symmetric stationary cluster (chi_N = 0)."""
    banner("Stationary cluster")
    fields = config.fields
    wave = stationary_cluster(config.measure, config.kinetics, fields.alpha, fields.d_s,
                              gamma=fields.gamma, d_n=fields.d_n)
    z = profile_grid(wave.profile)
    save_to_csv(profile_frame(wave.profile, z, signal=wave.signal, with_fields=True),
                out_dir / 'cluster_profile.csv')
    save_json(wave_record(wave), out_dir / 'cluster.json')
    print(f"✓ Symmetry residual {wave.symmetry_residual:.3e}")
    print(f"✓ Saved to {out_dir / 'cluster_profile.csv'}")
    return EXIT_OK if wave.ansatz_valid else EXIT_NO_WAVE


def cmd_macro(config, out_dir):
    """Closed-form diffusion-limit wave."""
    banner("Macroscopic wave")
    fields, params = config.fields, config.kinetics
    macro = MacroParams(chi_s=params.chi_s, chi_n=params.chi_n, alpha=fields.alpha,
                        d_s=fields.d_s, d_rho=fields.d_rho)
    c = macro_speed(macro)
    lam_minus, lam_plus = macro.exponents(c)
    mu_minus, mu_plus = macro.signal_exponents(c)
    save_json({
        'speed': c,
        'lambda_minus': lam_minus,
        'lambda_plus': lam_plus,
        'mu_minus': mu_minus,
        'mu_plus': mu_plus,
        'upsilon': macro_upsilon(macro, c),
        'd_rho': macro.d_rho,
    }, out_dir / 'macro.json')

    half = 10.0 / min(lam_minus, lam_plus)
    z = np.linspace(-half, half, MACRO_PROFILE_POINTS)
    save_to_csv(pd.DataFrame({'z': z, 'rho': macro_density(macro, c, z)}),
                out_dir / 'macro_profile.csv')
    print(f"✓ Macroscopic speed c = {c:.12g}")
    print(f"✓ Exponents lambda_- = {lam_minus:.6g}, lambda_+ = {lam_plus:.6g}")
    return EXIT_OK


def cmd_relax(config, out_dir):
    """Relaxation oracle compared with the Case-mode profile."""
    c = require_speed(config)
    banner(f"Relaxation at c = {c:.12g}")
    relax = config.relax
    profile = profile_at(config.measure, config.kinetics, c)
    result = relax_to_steady(config.measure, config.kinetics, c, relax.L, relax.nz,
                             t_end=relax.t_end, order=relax.order, seed=relax.seed,
                             tol=relax.tol)
    distance = l1_distance(result, profile)

    save_to_csv(gridded_frame(result.z, result.f, config.measure, config.kinetics, c),
                out_dir / 'relax_profile.csv')
    save_to_csv(pd.DataFrame({'step': np.arange(1, result.residuals.size + 1),
                              'residual': result.residuals}),
                out_dir / 'relax_residuals.csv')
    save_json({
        'c': c,
        'converged': result.converged,
        't': result.t,
        'steps': int(result.residuals.size),
        'final_residual': float(result.residuals[-1]),
        'l1_distance': distance,
        'max_flux': float(np.max(np.abs(result.interface_flux))),
    }, out_dir / 'relax_report.json')

    mark = "✓" if result.converged else "✗"
    print(f"{mark} Converged: {result.converged} at t = {result.t:.4g}")
    print(f"✓ L1 distance to the modal profile {distance:.3e}")
    return EXIT_OK


def cmd_reproduce(config, out_dir):
    """Write the dataset of a figure preset."""
    if config.preset is None:
        raise ConfigError(f"reproduce needs a preset, one of {sorted(REPRODUCERS)}")
    banner(f"Reproducing {config.preset}")
    summary = reproduce(config.preset, config, out_dir)
    for key, value in sorted(summary.items()):
        print(f"  {key}: {value}")
    print(f"✓ Saved to {out_dir / config.preset}")
    return EXIT_OK


COMMANDS = {
    'rates': cmd_rates,
    'critical-speeds': cmd_critical,
    'critical': cmd_critical,
    'modes': cmd_modes,
    'scan': cmd_scan,
    'wave': cmd_wave,
    'cluster': cmd_cluster,
    'macro': cmd_macro,
    'relax': cmd_relax,
    'reproduce': cmd_reproduce,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='YAML or JSON run configuration')
    common.add_argument('--preset', help='Named preset from config/presets.yaml')
    common.add_argument('--out', help='Output directory')
    common.add_argument('--c', type=float, help='Wave speed')
    common.add_argument('--dc', type=float, help='Scan step')
    common.add_argument('--threads', type=int, help='Worker threads (default: $KINWAVE_THREADS or 1)')
    common.add_argument('--n', type=int, help='Quadrature node count')
    common.add_argument('--rule', choices=['midpoint', 'gauss-legendre'], help='Quadrature rule')
    common.add_argument('--verbose', action='store_true', help='Log progress at INFO level')

    parser = argparse.ArgumentParser(
        description='Travelling waves of the kinetic chemotaxis system with discrete velocities')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('rates', parents=[common], help='Frozen tumbling rates')
    sub.add_parser('critical-speeds', aliases=['critical'], parents=[common],
                   help='Admissible speed window')
    sub.add_parser('modes', parents=[common], help='Case modes at --c')
    sub.add_parser('scan', parents=[common], help='Sample Upsilon over the window')
    sub.add_parser('wave', parents=[common], help='Find travelling waves')
    sub.add_parser('cluster', parents=[common], help='Stationary cluster')
    sub.add_parser('macro', parents=[common], help='Diffusion-limit wave')
    sub.add_parser('relax', parents=[common], help='Relaxation oracle at --c')
    reproduce_parser = sub.add_parser('reproduce', parents=[common], help='Figure datasets')
    reproduce_parser.add_argument('name', nargs='?', choices=sorted(REPRODUCERS),
                                  help='Preset to reproduce')
    return parser


def cli_overrides(args):
    overrides = {}
    if args.c is not None:
        overrides['c'] = args.c
    if args.dc is not None:
        overrides['scan'] = {'dc': args.dc}
    if args.out is not None:
        overrides['output'] = {'dir': args.out}
    return overrides


def _with_threads(config, threads):
    return replace(config, scan=replace(config.scan, threads=threads))


def main(argv=None):
    """Main execution flow; returns the process exit code."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')

    preset = getattr(args, 'name', None) or args.preset
    try:
        config = load_config(args.config, preset=preset, overrides=cli_overrides(args),
                             n=args.n, rule=args.rule)
        threads = resolve_threads(args.threads, config.scan.threads)
        if threads != config.scan.threads:
            config = _with_threads(config, threads)
        out_dir = config.out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](config, out_dir)
    except NumericalError as e:
        print(f"ERROR: {e}")
        return EXIT_NUMERICAL
    except KinwaveError as e:
        print(f"ERROR: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
