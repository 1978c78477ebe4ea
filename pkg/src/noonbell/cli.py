"""Command-line front end: ``noonbell {sweep,boundary,table1,point}``.

Results go to ``--out`` (written atomically) or to stdout, as CSV with a
header row or as a JSON array of records. Floats carry 9 significant digits
so repeated runs produce byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from itertools import product

import numpy as np
from joblib import Parallel, delayed

from . import chsh
from .channels import LossParams
from .fockspace import DEFAULT_NMAX, InsufficientCutoffError, amplified_noon, mean_total_photons
from .measurement import Thresholds


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SWEEP_COLUMNS = ["zeta", "n_tot_mean", "b_opt", "n0_opt", "x0_opt", "e_xx", "e_xn", "e_nn"]
BOUNDARY_COLUMNS = ["gain_mode", "eta_x", "t", "eta_n_min", "violation"]
TABLE1_COLUMNS = ["state", "quantity", "value", "source"]

# Literature columns of the comparison table, reproduced as printed there.
LITERATURE_COLUMNS = [
    ("|ψ_E(λ)⟩", "eta_n_min", "64.8%"),
    ("|ψ_E(λ)⟩", "t_min", "80.5%"),
    ("|P_H⟩", "eta_n_min", "---"),
    ("|P_H⟩", "t_min", "92%"),
]

DEFAULTS = {
    "cutoff": DEFAULT_NMAX,
    "zeta_lo": 0.0,
    "zeta_hi": 0.6,
    "zeta_step": 0.01,
    "t": 1.0,
    "eta_n": 1.0,
    "eta_x": 1.0,
    "gain_mode": "optimized",
    "out": None,
    "format": "csv",
    "threads": None,
    "t_lo": 0.8,
    "t_hi": 1.0,
    "t_step": 0.01,
    "zeta": 0.0,
    "n0": 0,
    "x0": 0.465,
    "construction": "amplify_then_loss",
}


class UsageError(Exception):
    pass


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(format(float(value), ".9g"))
    return value


def render(records: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        rows = [{c: _fmt(r[c]) for c in columns} for r in records]
        return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in records:
        row = []
        for c in columns:
            v = _fmt(r[c])
            if v is None:
                v = ""
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = format(v, ".9g")
            row.append(v)
        writer.writerow(row)
    return buf.getvalue()


def write_output(text: str, path: str | None) -> None:
    """Write ``text`` to ``path`` via a temporary file, or to stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".noonbell-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _grid(lo, hi, step, name):
    if step <= 0:
        raise UsageError(f"{name} step must be positive")
    if lo > hi:
        raise UsageError(f"{name} lower bound exceeds upper bound")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _loss(cfg) -> LossParams:
    try:
        return LossParams(t=cfg["t"], eta_n=cfg["eta_n"], eta_x=cfg["eta_x"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _n_jobs(cfg):
    return cfg["threads"] if cfg["threads"] is not None else os.cpu_count() or 1


def cmd_sweep(cfg) -> int:
    zetas = _grid(cfg["zeta_lo"], cfg["zeta_hi"], cfg["zeta_step"], "zeta")
    if zetas[0] < 0:
        raise UsageError("zeta must be non-negative")
    series = chsh.sweep_gain(zetas, _loss(cfg), cfg["cutoff"], n_jobs=_n_jobs(cfg))
    records = [
        dict(zeta=p.zeta, n_tot_mean=p.n_tot_mean, b_opt=p.b_opt, n0_opt=p.n0_opt, x0_opt=p.x0_opt,
             e_xx=p.result.e_xx, e_xn=p.result.e_xn, e_nn=p.result.e_nn)
        for p in series.points
    ]
    write_output(render(records, SWEEP_COLUMNS, cfg["format"]), cfg["out"])
    return EXIT_OK


def cmd_boundary(cfg) -> int:
    ts = _grid(cfg["t_lo"], cfg["t_hi"], cfg["t_step"], "t")
    if ts[0] <= 0 or ts[-1] > 1:
        raise UsageError("transmittance grid must lie in (0, 1]")
    modes = ["optimized", "fixed_zero"] if cfg["gain_mode"] == "both" else [cfg["gain_mode"]]
    eta_xs = cfg["eta_x"] if isinstance(cfg["eta_x"], list) else [cfg["eta_x"]]
    tasks = list(product(modes, eta_xs, ts))
    found = Parallel(n_jobs=_n_jobs(cfg))(
        delayed(chsh._boundary_point)(t, ex, mode, cfg["cutoff"], chsh.BOUNDARY_XTOL, {})
        for mode, ex, t in tasks
    )
    records = [
        dict(gain_mode=mode, eta_x=float(ex), t=t, eta_n_min=eta, violation=eta is not None)
        for (mode, ex, _), (t, eta) in zip(tasks, found)
    ]
    write_output(render(records, BOUNDARY_COLUMNS, cfg["format"]), cfg["out"])
    return EXIT_OK


def _table1_task(kind, nmax):
    if kind == "eta_opt":
        return chsh.min_detector_efficiency(gain_mode="optimized", nmax=nmax)
    if kind == "t_opt":
        return chsh.min_transmittance(gain_mode="optimized", nmax=nmax)
    if kind == "eta_zero":
        return chsh.min_detector_efficiency(gain_mode="fixed_zero", nmax=nmax)
    if kind == "t_zero":
        return chsh.min_transmittance(gain_mode="fixed_zero", nmax=nmax)
    if kind == "t_late_gain":
        return chsh.min_transmittance(gain_mode="optimized", nmax=nmax, construction="loss_then_amplify")
    raise ValueError(kind)


def table1_records(nmax: int, n_jobs=None) -> list[dict]:
    kinds = ["eta_opt", "t_opt", "eta_zero", "t_zero", "t_late_gain"]
    values = Parallel(n_jobs=n_jobs)(delayed(_table1_task)(k, nmax) for k in kinds)
    v = dict(zip(kinds, values))
    rows = [
        ("|Ψ2⟩", "eta_n_min", v["eta_opt"], "computed"),
        ("|Ψ2⟩", "t_min", v["t_opt"], "computed"),
        ("|ψ2⟩", "eta_n_min", v["eta_zero"], "computed"),
        ("|ψ2⟩", "t_min", v["t_zero"], "computed"),
        ("|Ψ2⟩ amplified after transmission", "t_min", v["t_late_gain"], "computed"),
    ]
    rows += [(s, q, val, "literature (not computed)") for s, q, val in LITERATURE_COLUMNS]
    return [dict(zip(TABLE1_COLUMNS, r)) for r in rows]


def cmd_table1(cfg) -> int:
    records = table1_records(cfg["cutoff"], n_jobs=_n_jobs(cfg))
    text = render(records, TABLE1_COLUMNS, cfg["format"])
    if cfg["out"] is not None:
        write_output(text, cfg["out"])
        for r in records:
            val = r["value"]
            shown = f"{100 * val:.1f}%" if isinstance(val, float) else val
            print(f"{r['state']:<36} {r['quantity']:<10} {shown:>8}  {r['source']}")
    else:
        write_output(text, None)
    return EXIT_OK


def cmd_point(cfg) -> int:
    try:
        thresholds = Thresholds(cfg["n0"], cfg["x0"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = chsh.bell_value(cfg["zeta"], thresholds, _loss(cfg), cfg["cutoff"],
                          construction=cfg["construction"])
    rec = res.as_record()
    rec["n_tot_mean"] = mean_total_photons(amplified_noon(cfg["zeta"], cfg["cutoff"]))
    text = json.dumps({k: _fmt(v) for k, v in rec.items()}, indent=2, ensure_ascii=False) + "\n"
    write_output(text, cfg["out"])
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "boundary": cmd_boundary, "table1": cmd_table1, "point": cmd_point}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values; flags override it")
    common.add_argument("--cutoff", type=int, help=f"Fock cutoff per mode (default {DEFAULT_NMAX})")
    common.add_argument("--t", type=float, help="channel transmittance")
    common.add_argument("--eta-n", type=float, help="photon-counting efficiency")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="noonbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="optimized Bell value over a gain grid")
    sweep.add_argument("--zeta-lo", type=float)
    sweep.add_argument("--zeta-hi", type=float)
    sweep.add_argument("--zeta-step", type=float)
    sweep.add_argument("--eta-x", type=float, help="homodyne efficiency")

    boundary = sub.add_parser("boundary", parents=[common], help="minimal eta_n versus transmittance")
    boundary.add_argument("--t-lo", type=float)
    boundary.add_argument("--t-hi", type=float)
    boundary.add_argument("--t-step", type=float)
    boundary.add_argument("--eta-x", type=float, nargs="+", help="one or more homodyne efficiencies")
    boundary.add_argument("--gain-mode", choices=["optimized", "fixed_zero", "both"])

    sub.add_parser("table1", parents=[common], help="loss thresholds of the comparison table")

    point = sub.add_parser("point", parents=[common], help="single Bell-value evaluation as JSON")
    point.add_argument("--zeta", type=float)
    point.add_argument("--n0", type=int)
    point.add_argument("--x0", type=float)
    point.add_argument("--eta-x", type=float)
    point.add_argument("--construction", choices=["amplify_then_loss", "loss_then_amplify"])
    return parser


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.command == "boundary":
        cfg.update(gain_mode="both", eta_x=[1.0, 0.95])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    if not isinstance(cfg["cutoff"], int) or cfg["cutoff"] < 2:
        raise UsageError("cutoff must be an integer >= 2")
    if cfg["threads"] is not None and cfg["threads"] < 1:
        raise UsageError("threads must be positive")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    except (OSError, InsufficientCutoffError, chsh.NoViolationError) as exc:
        print(f"noonbell: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
