"""Command line interface: ``modal-arrays {estimate,sweep,crb,beampattern,selftest}``.

Exit status is 0 on success, 1 on configuration errors and 2 when an
estimator fails at run time in ``estimate``.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import analysis, output
from .config import ExperimentConfig, load_config
from .errors import ConfigError, ModalArraysError
from .estimation import IqmlOptions, estimate
from .geometry import make_geometry
from .model import NoiseModel, SnapshotMatrix, synthesize
from .selftest import run_selftest

log = logging.getLogger("modal_arrays")

EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_geometry_args(p):
    g = p.add_argument_group("geometry")
    g.add_argument("--kind", choices=("ula", "sparse", "coprime"), required=True)
    g.add_argument("--m", type=int, help="sensor count (ula, sparse)")
    g.add_argument("--d", type=int, help="sublattice spacing (sparse)")
    g.add_argument("--M", type=int, help="extra sensor location (sparse)")
    g.add_argument("--m1", type=int, help="co-prime parameter m1")
    g.add_argument("--m2", type=int, help="co-prime parameter m2")


_GEOMETRY_FIELDS = {"ula": ("m",), "sparse": ("m", "d", "M"), "coprime": ("m1", "m2")}


def _geometry_from_args(args):
    params = {}
    for name in _GEOMETRY_FIELDS[args.kind]:
        value = getattr(args, name)
        if value is None:
            raise ConfigError(f"--{name} is required for a {args.kind} geometry", field=name)
        params[name] = value
    try:
        return make_geometry(args.kind, **params)
    except ModalArraysError as exc:
        raise ConfigError(str(exc), field="geometry") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modal-arrays", allow_abbrev=False, description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", allow_abbrev=False,
                       help="estimate modes from a data file or a synthetic config")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment config; one synthetic dataset is drawn")
    src.add_argument("--data", help="text file of complex samples, one row per sensor")
    p.add_argument("--kind", choices=("ula", "sparse", "coprime"))
    for name in ("m", "d", "M", "m1", "m2"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("-p", "--modes", type=int, dest="p", help="number of modes (with --data)")
    p.add_argument("--snr-db", type=float, help="per-sensor SNR for --config (default: first grid value)")

    p = sub.add_parser("sweep", allow_abbrev=False, help="Monte Carlo RMSE versus SNR")
    p.add_argument("configs", nargs="+")
    p.add_argument("--out", help="CSV path (default: output.csv of the first config)")
    p.add_argument("--svg", help="SVG path (default: output.svg of the first config)")
    p.add_argument("--threads", type=int, help="worker threads (overrides MODAL_ARRAYS_THREADS)")

    p = sub.add_parser("crb", allow_abbrev=False, help="CRB of z1 = 1 versus interferer position")
    _add_geometry_args(p)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--out", required=True)

    p = sub.add_parser("beampattern", allow_abbrev=False, help="array beampattern")
    _add_geometry_args(p)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg")

    p = sub.add_parser("selftest", allow_abbrev=False, help="noiseless recovery checks")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_estimate(args):
    if args.config:
        cfg = load_config(args.config)
        geometry = cfg.geometry()
        snr = cfg.snr_db[0] if args.snr_db is None else args.snr_db
        rng = analysis.trial_rng(cfg.seed, 0, 0)
        X = analysis.draw_weights(cfg, rng)
        sigma2 = 0.0 if np.isinf(snr) else analysis.sigma2_for_snr(cfg.mode_values, X, geometry, snr)
        Y = synthesize(cfg.mode_values, X, geometry, NoiseModel(sigma2, cfg.seed))
        p, opts = cfg.p, cfg.iqml
    else:
        if args.kind is None:
            raise ConfigError("--kind is required with --data", field="kind")
        if args.p is None:
            raise ConfigError("-p is required with --data", field="p")
        geometry = _geometry_from_args(args)
        try:
            data = np.loadtxt(args.data, dtype=complex, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read {args.data}: {exc}", field="data") from None
        try:
            Y = SnapshotMatrix(data, geometry)
        except ModalArraysError as exc:
            raise ConfigError(str(exc), field="data") from None
        p, opts = args.p, IqmlOptions()
    try:
        est = estimate(Y, p, opts)
    except (ModalArraysError, np.linalg.LinAlgError) as exc:
        print(f"error: estimation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print("mode,re,im,magnitude,phase")
    for k, z in enumerate(est.modes.modes):
        z = complex(z)
        print(f"{k},{z.real!r},{z.imag!r},{abs(z)!r},{float(np.angle(z))!r}")
    d = est.diagnostics
    log.info("iterations=%s residual=%.3e", d.iterations, d.residual_energy)
    return 0


def _cmd_sweep(args):
    configs: list[ExperimentConfig] = [load_config(path) for path in args.configs]
    if args.threads is not None and args.threads < 0:
        raise ConfigError("must be >= 0", field="threads")
    workers = None if not args.threads else args.threads
    rows = []
    for cfg in configs:
        log.info("sweeping %s over %s dB, %d trials", cfg.geometry().label, cfg.snr_db, cfg.trials)
        rows.extend(analysis.rmse_sweep(cfg, workers=workers))
    csv_path = args.out or configs[0].output_csv
    if csv_path is None:
        raise ConfigError("no CSV destination; pass --out or set output.csv", field="output.csv")
    output.write_results(rows, csv_path)
    svg_path = args.svg or configs[0].output_svg
    if svg_path:
        output.emit_svg(output.sweep_figure(rows), svg_path)
    return 0


def _cmd_crb(args):
    geometry = _geometry_from_args(args)
    if args.grid < 2:
        raise ConfigError("must be >= 2", field="grid")
    mags, phases, crb = analysis.crb_surface(geometry, snr_db=args.snr_db, grid=args.grid)
    output.write_crb(geometry.label, mags, phases, crb, args.out)
    return 0


def _cmd_beampattern(args):
    geometry = _geometry_from_args(args)
    if args.grid < 2:
        raise ConfigError("must be >= 2", field="grid")
    curve = analysis.beampattern(geometry, analysis.theta_grid(args.grid))
    output.write_beampattern(curve, args.out or sys.stdout)
    if args.svg:
        output.emit_svg(output.beampattern_figure({geometry.label: curve}), args.svg)
    return 0


def _cmd_selftest(args):
    return 0 if run_selftest(args.trials, args.seed) else 1


COMMANDS = {
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
    "crb": _cmd_crb,
    "beampattern": _cmd_beampattern,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
