"""Command-line entry point: curve simulation, scans, waveform export, and
frame-reduction verification.

Exit codes: 0 success, 1 runtime or model failure, 2 configuration error.
All numeric output is written with 17 significant digits so determinism can
be checked byte for byte.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import FitFailure, scan_alpha
from .config import ConfigError, build_manifest, load_config, write_manifest
from .drive import LabFrameParams, PhaseMod, alpha_of, compile_iq, omega2_mhz
from .evolve import (SimulationConfig, ensemble_curve, fid_curve,
                     hahn_echo_curve, verify_rwa, verify_second_frame)

FMT = "%.17g"


def _fmt(value: float) -> str:
    return FMT % value


def _default_workers() -> int:
    env = os.environ.get("CDDSIM_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CDDSIM_WORKERS = {env!r} is not an integer",
                              key="CDDSIM_WORKERS") from None
    return os.cpu_count() or 1


def _parse_float_list(raw: str, flag: str) -> list[float]:
    parts = [p for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{flag} must be a non-empty comma-separated list",
                          key=flag)
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{flag} = {raw!r} is not a list of numbers",
                          key=flag) from None


def _write_curve_csv(path: Path, curve) -> None:
    with open(path, "w") as fh:
        fh.write("time_us,fidelity,stderr\n")
        for t, f, s in zip(curve.times, curve.fidelity, curve.stderr):
            fh.write(f"{_fmt(t)},{_fmt(f)},{_fmt(s)}\n")


def _apply_overrides(config: SimulationConfig, args) -> SimulationConfig:
    if getattr(args, "seed", None) is not None:
        config = replace(config, master_seed=args.seed)
    if getattr(args, "init_axis", None) is not None:
        config = replace(config, init_axis=args.init_axis)
    config.validate()
    return config


def _run_curve(args, kind: str) -> int:
    start = time.monotonic()
    config = load_config(args.config, require_scheme=(kind == "simulate"))
    config = _apply_overrides(config, args)
    workers = args.workers or _default_workers()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if kind == "simulate":
        curve = ensemble_curve(config, workers=workers)
        csv_name = "decoherence_curve.csv"
    elif kind == "fid":
        curve = fid_curve(config, workers=workers)
        csv_name = "fid_curve.csv"
    else:
        curve = hahn_echo_curve(config, workers=workers)
        csv_name = "echo_curve.csv"

    csv_path = out_dir / csv_name
    _write_curve_csv(csv_path, curve)
    manifest = build_manifest(kind, config, [csv_name],
                              time.monotonic() - start, workers)
    write_manifest(out_dir / "manifest.json", manifest)
    print(f"{kind}: wrote {csv_path} ({len(curve.times)} points, "
          f"{curve.n_realizations} realizations)")
    return 0


def _run_scan(args) -> int:
    start = time.monotonic()
    config = load_config(args.config)
    config = _apply_overrides(args=args, config=config)
    alphas = _parse_float_list(args.alphas, "--alphas")
    workers = args.workers or _default_workers()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = scan_alpha(config, alphas, init_axis=config.init_axis,
                        workers=workers)
    csv_path = out_dir / "alpha_scan.csv"
    with open(csv_path, "w") as fh:
        fh.write("alpha,T_decay_us,stderr,fit_residual,status\n")
        for a, t, s, r, st in zip(result.alphas, result.t_decay, result.stderr,
                                  result.residual, result.status):
            t_txt = "" if math.isnan(t) else _fmt(t)
            s_txt = "" if math.isnan(s) else _fmt(s)
            r_txt = "" if math.isnan(r) else _fmt(r)
            fh.write(f"{_fmt(a)},{t_txt},{s_txt},{r_txt},{st}\n")
    manifest = build_manifest("scan", config, ["alpha_scan.csv"],
                              time.monotonic() - start, workers,
                              extra={"alphas": alphas,
                                     "init_axis": config.init_axis})
    write_manifest(out_dir / "manifest.json", manifest)
    for a, t, st in zip(result.alphas, result.t_decay, result.status):
        note = "fit-failure" if st else f"T = {t:.4g} us"
        print(f"alpha = {a:g}: {note}")
    return 0


def _run_waveform(args) -> int:
    start = time.monotonic()
    config = load_config(args.config)
    config = _apply_overrides(config, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    waveform = compile_iq(config.scheme, config.duration,
                          sample_period=args.sample_period_ns)
    csv_path = out_dir / "iq_waveform.csv"
    with open(csv_path, "w") as fh:
        fh.write("i,q\n")
        for i_val, q_val in zip(waveform.i_samples, waveform.q_samples):
            fh.write(f"{_fmt(i_val)},{_fmt(q_val)}\n")
    meta = {
        "sample_period_ns": waveform.sample_period,
        "omega1_mhz": config.scheme.omega1,
        "alpha": alpha_of(config.scheme),
        "omega2_mhz": omega2_mhz(config.scheme),
        "scheme": type(config.scheme).__name__,
        "duration_us": config.duration,
        "n_samples": len(waveform),
    }
    write_manifest(out_dir / "iq_waveform_meta.json", meta)
    manifest = build_manifest("waveform", config,
                              ["iq_waveform.csv", "iq_waveform_meta.json"],
                              time.monotonic() - start, 1)
    write_manifest(out_dir / "manifest.json", manifest)
    print(f"waveform: wrote {csv_path} ({len(waveform)} samples)")
    return 0


def _run_verify(args) -> int:
    start = time.monotonic()
    if args.window is not None and args.window <= 0:
        raise ConfigError(f"--window must be positive, got {args.window}",
                          key="window")
    omega1 = args.omega1
    window = args.window if args.window is not None else 1.0 / omega1
    ratios = _parse_float_list(args.ratios, "--ratios")
    alphas = _parse_float_list(args.alphas, "--alphas")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    scheme = PhaseMod(omega1, args.alpha)
    rwa_rows = []
    for ratio in ratios:
        params = LabFrameParams(omega0=ratio * omega1, scheme=scheme)
        rwa_rows.append((ratio, verify_rwa(params, window)))
    rwa_ok = all(b[1] < a[1] for a, b in zip(rwa_rows, rwa_rows[1:]))

    d_omega1 = args.d_omega1_rel * 2.0 * math.pi * omega1
    sf_rows = []
    for alpha in alphas:
        dev = verify_second_frame(PhaseMod(omega1, alpha), d_omega1,
                                  horizon=10.0 / omega1)
        sf_rows.append((alpha, dev))
    sf_ok = all(b[1] > a[1] for a, b in zip(sf_rows, sf_rows[1:]))

    with open(out_dir / "rwa_deviation.csv", "w") as fh:
        fh.write("omega0_over_omega1,deviation\n")
        for ratio, dev in rwa_rows:
            fh.write(f"{_fmt(ratio)},{_fmt(dev)}\n")
    with open(out_dir / "second_frame_deviation.csv", "w") as fh:
        fh.write("alpha,deviation\n")
        for alpha, dev in sf_rows:
            fh.write(f"{_fmt(alpha)},{_fmt(dev)}\n")

    print("carrier-frame check (deviation should fall as omega0 grows):")
    for ratio, dev in rwa_rows:
        print(f"  omega0/omega1 = {ratio:g}: max Bloch deviation {dev:.3e}")
    print(f"  monotone decreasing: {'PASS' if rwa_ok else 'FAIL'}")
    print("dressed-frame check (deviation should grow with alpha):")
    for alpha, dev in sf_rows:
        print(f"  alpha = {alpha:g}: max Bloch deviation {dev:.3e}")
    print(f"  monotone increasing: {'PASS' if sf_ok else 'FAIL'}")

    manifest = build_manifest(
        "verify", None,
        ["rwa_deviation.csv", "second_frame_deviation.csv"],
        time.monotonic() - start, 1,
        extra={"omega1_mhz": omega1, "alpha": args.alpha, "window_us": window,
               "ratios": ratios, "alphas": alphas,
               "rwa_monotone": rwa_ok, "second_frame_monotone": sf_ok})
    write_manifest(out_dir / "manifest.json", manifest)
    return 0 if (rwa_ok and sf_ok) else 1


def _add_common(parser, with_config=True):
    if with_config:
        parser.add_argument("--config", required=True,
                            help="INI run configuration")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override [run] master_seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: machine parallelism, "
                             "or CDDSIM_WORKERS)")
    parser.add_argument("--init-axis", choices=("x", "y", "z"), default=None,
                        help="override [run] init_axis")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cddsim",
        description="Monte Carlo simulator of modulated continuous driving "
                    "for a two-level spin under correlated noise")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="driven decoherence curve")
    _add_common(p)
    p = sub.add_parser("fid", help="free-induction decay (no drive)")
    _add_common(p)
    p = sub.add_parser("echo", help="midpoint-refocused echo decay (no drive)")
    _add_common(p)

    p = sub.add_parser("scan", help="decay time versus modulation strength")
    _add_common(p)
    p.add_argument("--alphas", required=True,
                   help="comma-separated modulation strengths")

    p = sub.add_parser("waveform", help="export sampled I/Q channels")
    _add_common(p)
    p.add_argument("--sample-period-ns", type=float, default=1.0)

    p = sub.add_parser("verify", help="frame-reduction deviation tables")
    _add_common(p, with_config=False)
    p.add_argument("--ratios", default="50,100,200,400",
                   help="omega0/omega1 ratios for the carrier-frame check")
    p.add_argument("--alphas", default="0.05,0.1,0.2",
                   help="modulation strengths for the dressed-frame check")
    p.add_argument("--window", type=float, default=None,
                   help="comparison window in us (default: one Rabi period)")
    p.add_argument("--omega1", type=float, default=9.0)
    p.add_argument("--alpha", type=float, default=0.1,
                   help="modulation strength for the carrier-frame check")
    p.add_argument("--d-omega1-rel", type=float, default=0.0075,
                   help="constant relative drive-amplitude error for the "
                        "dressed-frame check")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("simulate", "fid", "echo"):
            return _run_curve(args, args.command)
        if args.command == "scan":
            return _run_scan(args)
        if args.command == "waveform":
            return _run_waveform(args)
        return _run_verify(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FitFailure as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
