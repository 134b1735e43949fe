"""
Command-line interface.

    twistspdc report --beta 0.1 --twist 1
    twistspdc sweep --config sweep.json --out surface.csv
    twistspdc verify --trials 1000 --seed 0
    twistspdc decompose --beta 0.5 --twist 0.5 --samples 100000 --mode williamson

Exit codes: 0 success, 1 verification failure, 2 invalid parameters,
3 decomposition infeasible, 4 config parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time

import numpy as np

from .estimator import (
    DEFAULT_LENGTH_M,
    DEFAULT_SIGMA_M,
    DEFAULT_WAVELENGTH_M,
    SPDCEntanglementTransformer,
)
from .exceptions import InfeasibleWaist, InvalidParams
from .gaussian import purity
from .pump import (
    NormalizedPoint,
    covariance_z_scores,
    mixture_model,
    params_from_normalized,
    pump_cm,
    sample_component_means,
)
from .spdc import EXTRA_FIELDS, ROW_FIELDS
from .sweep import (
    BOOL_FIELDS,
    ConfigError,
    Grid,
    SweepSpec,
    format_csv,
    load_spec,
    run_sweep,
    write_csv,
)
from .verification import format_table, run_verification

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4


def _json_number(value):
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.8e}")


def report_dict(columns: dict, i: int = 0) -> dict:
    """Flat JSON-ready report for row ``i`` of ``spdc.evaluate`` output."""
    out = {}
    for name in ROW_FIELDS + EXTRA_FIELDS:
        value = columns[name][i]
        out[name] = bool(value) if name in BOOL_FIELDS else _json_number(value)
    return out


def _physical_args(p):
    p.add_argument("--sigma-m", type=float, default=None, help="pump waist (m)")
    p.add_argument("--wavelength-m", type=float, default=None, help="pump wavelength (m)")
    p.add_argument("--length-m", type=float, default=None, help="crystal length (m)")
    p.add_argument(
        "--inv-curvature-m", type=float, default=None, help="1/R of the pump (1/m)"
    )


def _point_args(p):
    p.add_argument("--beta", type=float, required=True, help="normalized coherence in (0, 1]")
    p.add_argument("--twist", type=float, required=True, help="normalized twist in [0, 1]")
    p.add_argument("--twist-sign", type=int, choices=(1, -1), default=1)


def _or(value, default):
    return default if value is None else value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistspdc",
        description="Spatial entanglement of SPDC pumped by twisted Gaussian Schell-model beams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="entanglement report for one (beta, t) point")
    _point_args(p)
    _physical_args(p)

    p = sub.add_parser("sweep", help="(beta, t) grid to CSV")
    p.add_argument("--config", help="JSON file with SweepSpec fields")
    p.add_argument("--out", help="output CSV path (overrides output_path)")
    _physical_args(p)
    for axis in ("beta", "twist"):
        p.add_argument(f"--{axis}-min", type=float, default=None)
        p.add_argument(f"--{axis}-max", type=float, default=None)
        p.add_argument(f"--{axis}-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("verify", help="randomized invariant and oracle suite")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--tolerance", type=float, default=None, help="override every check tolerance"
    )

    p = sub.add_parser("decompose", help="incoherent-mixture Monte Carlo for the pump")
    _point_args(p)
    _physical_args(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("williamson", "symmetric-waist"), default="williamson")
    p.add_argument("--waist-m", type=float, default=None, help="symmetric-waist component waist")
    return parser


def _fail(code, message):
    print(f"twistspdc: {message}", file=sys.stderr)
    return code


def cmd_report(args) -> int:
    try:
        NormalizedPoint(args.beta, args.twist, args.twist_sign)
        model = SPDCEntanglementTransformer(
            wavelength_m=_or(args.wavelength_m, DEFAULT_WAVELENGTH_M),
            sigma_m=_or(args.sigma_m, DEFAULT_SIGMA_M),
            crystal_length_m=_or(args.length_m, DEFAULT_LENGTH_M),
            curvature_inv_m=_or(args.inv_curvature_m, 0.0),
            twist_sign=args.twist_sign,
        )
        X = np.array([[args.beta, args.twist]])
        columns = model.fit(X).evaluate(X)
    except (InvalidParams, ValueError) as exc:
        return _fail(EXIT_INVALID, str(exc))
    print(json.dumps(report_dict(columns)))
    return EXIT_OK


def _sweep_spec(args) -> SweepSpec:
    spec = load_spec(args.config) if args.config else SweepSpec()
    changes = {}
    for flag, key in (
        ("sigma_m", "sigma_m"),
        ("wavelength_m", "wavelength_m"),
        ("length_m", "crystal_length_m"),
        ("inv_curvature_m", "curvature_inv_m"),
        ("seed", "seed"),
        ("out", "output_path"),
    ):
        if getattr(args, flag) is not None:
            changes[key] = getattr(args, flag)
    for axis, key in (("beta", "beta_grid"), ("twist", "twist_grid")):
        grid = getattr(spec, key)
        lo = _or(getattr(args, f"{axis}_min"), grid.min)
        hi = _or(getattr(args, f"{axis}_max"), grid.max)
        count = _or(getattr(args, f"{axis}_count"), grid.count)
        changes[key] = Grid(lo, hi, count)
    return dataclasses.replace(spec, **changes)


def cmd_sweep(args) -> int:
    try:
        spec = _sweep_spec(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        columns = run_sweep(spec)
    except (InvalidParams, ValueError) as exc:
        return _fail(EXIT_INVALID, str(exc))
    if spec.output_path == "-":
        sys.stdout.write(format_csv(columns))
    else:
        write_csv(columns, spec.output_path)
        n = len(columns["beta"])
        print(f"wrote {n} rows to {spec.output_path}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        return _fail(EXIT_INVALID, "--trials must be >= 1")
    start = time.perf_counter()
    results = run_verification(args.trials, args.seed, tolerance=args.tolerance)
    elapsed = time.perf_counter() - start
    print(format_table(results))
    print(f"{args.trials} trials, seed {args.seed}, {elapsed:.2f} s")
    failed = [r for r in results if not r.passed]
    for r in failed:
        point, value = r.failures[0]
        print(f"FAIL {r.name}: {value:.3e} at {point}")
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _scaled_residual(approx, target):
    d = np.sqrt(np.diag(target))
    return float(np.max(np.abs(approx - target) / np.outer(d, d)))


def cmd_decompose(args) -> int:
    if args.samples < 100:
        return _fail(EXIT_INVALID, "--samples must be >= 100")
    try:
        pt = NormalizedPoint(args.beta, args.twist, args.twist_sign)
        wavelength = _or(args.wavelength_m, DEFAULT_WAVELENGTH_M)
        if not wavelength > 0:
            raise InvalidParams("wavelength must be positive")
        pump = params_from_normalized(
            pt,
            sigma=_or(args.sigma_m, DEFAULT_SIGMA_M),
            k=2 * math.pi / wavelength,
            inv_R=_or(args.inv_curvature_m, 0.0),
        )
    except (InvalidParams, ValueError) as exc:
        return _fail(EXIT_INVALID, str(exc))

    doc = {"beta": args.beta, "t_norm": args.twist, "mode": args.mode}
    target = pump_cm(pump)
    try:
        model = mixture_model(pump, mode=args.mode, waist=args.waist_m)
    except InfeasibleWaist as exc:
        doc.update(feasible=False, min_scaled_eigenvalue=exc.min_eigenvalue)
        print(json.dumps(doc))
        return _fail(EXIT_INFEASIBLE, str(exc))
    except InvalidParams as exc:
        return _fail(EXIT_INVALID, str(exc))

    samples = sample_component_means(model, args.samples, args.seed)
    z = covariance_z_scores(samples, model.ensemble_cov)
    doc.update(
        feasible=True,
        waist_m=model.waist,
        samples=args.samples,
        seed=args.seed,
        reconstruction_residual=_scaled_residual(model.covariance, target),
        component_purity=purity(model.component_cm),
        max_abs_z=float(np.max(np.abs(z))),
        z_scores=z.tolist(),
        ensemble_cov=model.ensemble_cov.tolist(),
        component_cm=model.component_cm.tolist(),
    )
    print(json.dumps(doc))
    return EXIT_OK


COMMANDS = {
    "report": cmd_report,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "decompose": cmd_decompose,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
