"""Command-line interface.

Subcommands: simulate, analyze, sweep, oracle, synth-thermal, triplet.
Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.  TWINWAVE_WORKERS overrides the worker-thread count.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .errors import ConfigError, NumericError
from . import config as cfgmod
from . import io as twio
from .dynamics import TRAJECTORY_COLUMNS, TripletState, integrate, trajectory_to_rows
from .ensemble import RNG_ALGORITHM, run_ensemble
from .gauss1d import SENSITIVITY_COLUMNS, sensitivity_table
from .geometry import STRIP_NAMES
from .stats import GroupingSpec, autocorrelation_profile, fwhm, g2bar_map
from .synthetic import SyntheticSpec, apply_camera_noise, small_geometry, synth_stack
from .sweep import run_sweep


def _workers(args):
    env = os.environ.get("TWINWAVE_WORKERS")
    if args.workers is not None:
        return args.workers
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"TWINWAVE_WORKERS must be an integer, got {env!r}") from None
    return None


def cmd_simulate(args):
    from dataclasses import replace

    cfg = cfgmod.parse_config(args.config) if args.config else cfgmod.default_config()
    if args.shots:
        cfg = replace(cfg, shots=args.shots)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    started = time.time()
    stack = run_ensemble(cfg, workers=_workers(args))
    if args.read_noise or args.gain != 1.0:
        stack = apply_camera_noise(
            stack, read_noise=args.read_noise, gain=args.gain, seed=cfg.master_seed
        )
    out = twio.save_frames(stack, args.out)
    twio.write_manifest(out, cfg.echo, cfg.master_seed, RNG_ALGORITHM, started)
    print(f"wrote {stack.shots} shots to {out}")
    return 0


def cmd_analyze(args):
    stack = twio.load_frames(args.frames)
    strip = STRIP_NAMES[args.strip]
    window = tuple(args.window) if args.window else None
    grouping = GroupingSpec(size=args.group, axis=args.axis)
    g2map = g2bar_map(stack, grouping, window=window, strip=strip)
    from pathlib import Path

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    twio.write_csv(
        out / "g2_map.csv",
        ("radial_mrad", "wavelength_nm", "g2bar", "stderr", "m_g"),
        twio.g2map_rows(g2map),
        units={"grouping": f"{args.group} px along {args.axis}", "strip": args.strip},
    )
    twio.write_pgm(np.atleast_2d(g2map.values), out / "g2_map.pgm")
    profile = autocorrelation_profile(stack, args.axis, strip=strip)
    try:
        width = fwhm(profile)
    except NumericError:
        width = float("nan")
    twio.write_csv(
        out / "autocorrelation.csv",
        ("lag", "value"),
        list(zip(profile.lag, profile.value)),
        units={"axis": profile.axis, "fwhm": width},
    )
    twio.write_manifest(
        out,
        stack.meta.get("config_echo", []),
        stack.meta.get("master_seed", 0),
        stack.meta.get("rng_algorithm", ""),
        started,
    )
    print(f"g2 map {g2map.values.shape}, AC fwhm = {width:.4g}; outputs in {out}")
    return 0


def cmd_sweep(args):
    cfg = cfgmod.parse_config(args.config) if args.config else cfgmod.default_config()
    from dataclasses import replace

    if args.shots:
        cfg = replace(cfg, shots=args.shots)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    powers = None
    if args.powers and args.powers != "auto":
        try:
            start, stop, step = (float(v) for v in args.powers.split(":"))
        except ValueError:
            raise ConfigError(
                f"--powers must be start:stop:step or 'auto', got {args.powers!r}"
            ) from None
        if step <= 0 or stop < start:
            raise ConfigError(f"bad power range {args.powers!r}")
        powers = np.arange(start, stop + 0.5 * step, step)
    result = run_sweep(
        cfg, powers=powers, out_dir=args.out, workers=_workers(args), progress=True
    )
    print(
        f"sweep of {len(result.points)} points done in {result.wall_seconds:.0f} s; "
        f"threshold ~ {result.threshold_power_mw:.3g} mW; outputs in {args.out}"
    )
    return 0


def cmd_oracle(args):
    grid = np.geomspace(args.min, args.max, args.points)
    table = sensitivity_table(grid)
    twio.write_csv(args.out, SENSITIVITY_COLUMNS, [tuple(r) for r in table])
    print(f"wrote {args.points} points to {args.out}")
    return 0


def cmd_synth_thermal(args):
    geometry = small_geometry(args.rows, args.cols)
    spec = SyntheticSpec(
        kind=args.kind,
        m_modes=args.modes,
        kernel_sigma_freq=args.sigma_freq,
        kernel_sigma_radial=args.sigma_radial,
        shots=args.shots,
        geometry=geometry,
    )
    stack = synth_stack(spec, args.seed)
    started = time.time()
    out = twio.save_frames(stack, args.out)
    twio.write_manifest(
        out, [("synthetic", args.kind)], args.seed, stack.meta["rng_algorithm"], started
    )
    print(f"wrote synthetic '{args.kind}' stack ({args.shots} shots) to {out}")
    return 0


def cmd_triplet(args):
    state = TripletState(
        a_p=complex(np.sqrt(args.pump_photons)),
        a_s=complex(args.seed_signal),
        a_i=complex(args.seed_idler),
    )
    dz = args.z_end / args.steps if args.steps else None
    traj = integrate(state, args.coupling, args.z_end, dz=dz)
    twio.write_csv(
        args.out,
        TRAJECTORY_COLUMNS,
        trajectory_to_rows(traj),
        units={"z": "crystal-length units", "amplitudes": "sqrt photons"},
    )
    n = traj.photon_numbers()
    print(
        f"integrated {traj.z.size - 1} steps; pump {n[0, 0]:.4g} -> {n[-1, 0]:.4g} photons; "
        f"wrote {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinwave",
        description="Monte Carlo twin-beam simulator and coherence statistics toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the ensemble and store frames")
    p.add_argument("--config", help="TOML config file (defaults apply when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--shots", type=int, default=0, help="override shot count")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--workers", type=int, default=None, help="worker threads")
    p.add_argument("--read-noise", type=float, default=0.0, help="camera read noise (rms)")
    p.add_argument("--gain", type=float, default=1.0, help="camera gain factor")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="g2 map and autocorrelation of stored frames")
    p.add_argument("--frames", required=True, help="frame directory from simulate")
    p.add_argument("--group", type=int, default=1, choices=(1, 4, 8))
    p.add_argument("--axis", default="freq", choices=("freq", "radial"))
    p.add_argument("--strip", default="signal", choices=tuple(STRIP_NAMES))
    p.add_argument(
        "--window", type=int, nargs=4, metavar=("R0", "R1", "C0", "C1"), default=None
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="power sweep with calibration and aggregation")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--powers", default="auto", help="start:stop:step in mW, or 'auto'")
    p.add_argument("--out", required=True)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="detection-volume model table")
    p.add_argument("--min", type=float, default=0.01)
    p.add_argument("--max", type=float, default=100.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("synth-thermal", help="synthetic stacks with known statistics")
    p.add_argument("--kind", default="thermal", choices=("thermal", "gauss-kernel", "white"))
    p.add_argument("--modes", type=int, default=1, help="thermal modes per pixel")
    p.add_argument("--sigma-freq", type=float, default=1.0)
    p.add_argument("--sigma-radial", type=float, default=1.0)
    p.add_argument("--shots", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--rows", type=int, default=16)
    p.add_argument("--cols", type=int, default=32)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_thermal)

    p = sub.add_parser("triplet", help="integrate one triplet and dump the trajectory")
    p.add_argument("--pump-photons", type=float, default=1e6)
    p.add_argument("--seed-signal", type=float, default=1.0)
    p.add_argument("--seed-idler", type=float, default=1.0)
    p.add_argument("--coupling", type=float, default=0.01)
    p.add_argument("--z-end", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=0, help="0 chooses automatically")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_triplet)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
