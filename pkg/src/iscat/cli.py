"""Command-line interface.

Subcommands: simulate, bp, reconstruct, evaluate, render, benchmark,
fresnel. Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
import torch

from . import data_io, report
from .bp import bp_current, bp_permittivity
from .forward import (
    FieldSet,
    SolverError,
    add_awgn,
    incident_fields,
    scattered_fields,
    solve_total_field,
)
from .operators import build_operators
from .scene import GeometryError, builtin_profile, default_grid, default_setup, rasterize_scene
from .train import TrainConfig, reconstruct

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger("iscat")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0, help="0 = torch default")
    p.add_argument("--strict-deterministic", action="store_true")
    p.add_argument("--log-level", default="warning",
                   choices=["debug", "info", "warning", "error"])


def _load_scene_arg(args):
    if args.scene:
        return data_io.load_scene(args.scene)
    shapes = builtin_profile(args.profile)
    return shapes, default_grid(), default_setup()


def _scene_options(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scene", help="scene JSON file")
    g.add_argument("--profile", help="builtin profile name")


def cmd_simulate(args) -> int:
    shapes, grid, setup = _load_scene_arg(args)
    truth = rasterize_scene(shapes, grid)
    ops = build_operators(grid, setup)
    e_inc = incident_fields(setup, grid)
    _, j = solve_total_field(truth, e_inc, ops, tol=args.tol)
    e_sca = scattered_fields(j, ops)
    if args.snr is not None:
        e_sca = add_awgn(e_sca, args.snr, args.seed)
    data_io.save_fields_csv(args.out, e_sca)
    logger.info("wrote %s", args.out)
    return EXIT_OK


def cmd_bp(args) -> int:
    _, grid, setup = _load_scene_arg(args)
    e_mea = data_io.load_fields_csv(args.fields)
    ops = build_operators(grid, setup)
    j0 = bp_current(e_mea, ops)
    eps = bp_permittivity(j0, incident_fields(setup, grid), ops)
    data_io.save_eps_csv(args.out, eps)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    shapes, grid, setup = _load_scene_arg(args)
    e_mea = data_io.load_fields_csv(args.fields)
    cfg = TrainConfig(
        lr0=args.lr,
        max_epochs=args.epochs,
        alpha=args.alpha,
        beta0=args.beta0,
        dropout_p=args.dropout,
        hidden=args.hidden,
        seed=args.seed,
        dtype=args.dtype,
        strict_deterministic=args.strict_deterministic,
        log_every=args.log_every,
    )
    result = reconstruct(e_mea, setup, grid, cfg)
    extra = {"hardware": report.hardware_descriptor()}
    if shapes:
        truth = rasterize_scene(shapes, grid)
        extra["rrmse_vs_scene_truth"] = report.metric_rrmse(result.eps_r_pre, truth)
        extra["rrmse_bp_vs_scene_truth"] = report.metric_rrmse(result.eps_r_bp, truth)
    data_io.save_result(args.out, result, cfg, extra_meta=extra)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    shapes, grid, setup = _load_scene_arg(args)
    truth = rasterize_scene(shapes, grid)
    eps = data_io.load_eps_csv(args.eps, grid)
    out = {
        "rrmse": report.metric_rrmse(eps, truth),
        "support_mean_re": report.support_mean(eps, truth).real,
        "support_mean_im": report.support_mean(eps, truth).imag,
    }
    Path(args.out).write_text(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_render(args) -> int:
    _, grid, _ = _load_scene_arg(args)
    eps = data_io.load_eps_csv(args.eps, grid)
    report.render_map(eps, (args.vmin, args.vmax), args.out, part=args.part)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cases = args.cases.split(",")
    grid = default_grid(args.grid_m)
    setup = default_setup()
    results = {}
    for name in cases:
        shapes = builtin_profile(name)
        sw = report.Stopwatch()
        truth = rasterize_scene(shapes, grid)
        ops = build_operators(grid, setup)
        e_inc = incident_fields(setup, grid)
        _, j = solve_total_field(truth, e_inc, ops)
        e_sca = scattered_fields(j, ops)
        setup_s = sw.lap()
        cfg = TrainConfig(max_epochs=args.epochs, seed=args.seed,
                          strict_deterministic=args.strict_deterministic)
        t0 = time.perf_counter()
        reconstruct(e_sca, setup, grid, cfg, ops=ops)
        total = time.perf_counter() - t0
        results[name] = {
            "setup_s": setup_s,
            "epoch_mean_s": total / args.epochs,
            "total_s": setup_s + total,
        }
    report.write_benchmark_csv(args.out, report.benchmark(results))
    return EXIT_OK


def cmd_fresnel(args) -> int:
    desc = data_io.load_descriptor(args.descriptor)
    records = data_io.parse_fresnel(args.file)
    records = data_io.select_frequency(records, args.freq)
    if not records:
        raise data_io.DataFormatError(
            f"no records at {args.freq:g} Hz in {args.file}"
        )
    tx_angles, rx_angles, _, _ = data_io.records_grid(records)
    from .scene import ImagingSetup

    setup = ImagingSetup(
        freq=args.freq,
        n_tx=len(tx_angles),
        n_rx=len(rx_angles),
        ring_radius=float(desc["rx_radius"]),
    )
    fields, cal_report = data_io.calibrate_fresnel(records, setup)
    data_io.save_fields_csv(args.out, fields)
    print(json.dumps({
        "mean_residual": cal_report["mean_residual"],
        "max_residual": cal_report["max_residual"],
    }, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iscat",
                                description="2-D TM inverse scattering toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="synthesize scattered-field data")
    _scene_options(s)
    s.add_argument("--out", required=True)
    s.add_argument("--snr", type=float, default=None, help="SNR in dB")
    s.add_argument("--tol", type=float, default=1e-6)
    _add_common(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bp", help="backpropagation initial permittivity")
    _scene_options(s)
    s.add_argument("--fields", required=True)
    s.add_argument("--out", required=True)
    _add_common(s)
    s.set_defaults(func=cmd_bp)

    s = sub.add_parser("reconstruct", help="run the full inversion")
    _scene_options(s)
    s.add_argument("--fields", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--epochs", type=int, default=1500)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--alpha", type=float, default=1e-4)
    s.add_argument("--beta0", type=float, default=1e-5)
    s.add_argument("--dropout", type=float, default=0.1)
    s.add_argument("--hidden", type=int, default=512)
    s.add_argument("--dtype", default="float32", choices=["float32", "float64"])
    s.add_argument("--log-every", type=int, default=0)
    _add_common(s)
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("evaluate", help="compare a map against scene truth")
    _scene_options(s)
    s.add_argument("--eps", required=True, help="eps_r.csv to evaluate")
    s.add_argument("--out", required=True, help="metrics JSON")
    _add_common(s)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("render", help="render a permittivity map to PNG")
    _scene_options(s)
    s.add_argument("--eps", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--vmin", type=float, default=1.0)
    s.add_argument("--vmax", type=float, default=2.5)
    s.add_argument("--part", default="real", choices=["real", "imag"])
    _add_common(s)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("benchmark", help="per-case timing table")
    s.add_argument("--cases", default="austria,overlap-ring,three-discs,"
                                      "overlap-disc,concentric,corner-overlap")
    s.add_argument("--epochs", type=int, default=1500)
    s.add_argument("--grid-m", type=int, default=64)
    s.add_argument("--out", required=True)
    _add_common(s)
    s.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("fresnel", help="ingest a Fresnel measurement file")
    s.add_argument("--file", required=True)
    s.add_argument("--freq", type=float, required=True, help="Hz")
    s.add_argument("--descriptor", required=True)
    s.add_argument("--out", required=True)
    _add_common(s)
    s.set_defaults(func=cmd_fresnel)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()))
    if getattr(args, "threads", 0):
        torch.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (GeometryError, data_io.DataFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
