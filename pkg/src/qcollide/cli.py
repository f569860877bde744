"""Command-line entry point: ``qcollide <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import DISCORD_METHOD, correlation_record, mutual_information
from .dynamics import DegenerateSteadyState, NonConvergence, lindblad_generator, lindblad_steady_state
from .ensemble import (
    EnsembleConfig,
    containment_check,
    ensemble_points,
    fmt,
    haar_unitary,
    histogram,
    json_dumps,
    octagon_analysis,
    partial_extremes,
    run_ensemble,
    summarize,
    write_records,
)
from .linalg import trace_distance
from .model import LABELS, PARAM_KEYS, ModelParams, effective_population, noncorrelating_unitary, parse_config, partial_swap
from .thermo import CSV_COLUMNS, csv_row, evaluate, otto_figures

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


# -- helpers ------------------------------------------------------------------


def parse_unitary(spec: str) -> np.ndarray:
    """``identity``, ``swap(phi)``, a label ``I``..``VIII`` or ``haar(seed)``."""
    s = spec.strip()
    if s.lower() == "identity":
        return np.eye(4, dtype=complex)
    if s in LABELS:
        return noncorrelating_unitary(s)
    m = re.fullmatch(r"swap\(\s*([^)]+?)\s*\)", s)
    if m:
        try:
            return partial_swap(float(m.group(1)))
        except ValueError:
            raise UsageError(f"bad swap angle in {spec!r}") from None
    m = re.fullmatch(r"haar\(\s*(\d+)\s*\)", s)
    if m:
        return haar_unitary(np.random.default_rng(np.random.SeedSequence(int(m.group(1)))))
    raise UsageError(f"unrecognised unitary spec {spec!r}")


def resolve_params(args) -> ModelParams:
    values = {}
    if args.config:
        try:
            values.update(parse_config(Path(args.config).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    for key in PARAM_KEYS:
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    return ModelParams(**values)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(outdir: Path, command: str, params: ModelParams, options: dict, files: list[str], started: str):
    manifest = {
        "command": command,
        "config": {"params": params.to_dict(), "options": options},
        "code_version": __version__,
        "seed": options.get("seed"),
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [{"file": f, "sha256": _digest(outdir / f)} for f in files],
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json_dumps(obj) + "\n", encoding="utf-8")


def _matrix(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


# -- commands -----------------------------------------------------------------


def cmd_swap_sweep(p: ModelParams, args, outdir: Path) -> list[str]:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if not args.phi_max > args.phi_min:
        raise UsageError("--phi-max must exceed --phi-min")
    phis = np.linspace(args.phi_min, args.phi_max, args.steps)
    rows, wp, wc = [], [], []
    for phi in phis:
        m, rec = evaluate(p, partial_swap(phi))
        rows.append(
            [float(phi)]
            + csv_row(rec, "swap", float(phi))
            + [
                effective_population(p, phi, 1),
                effective_population(p, phi, 2),
                mutual_information(m.bath_prepared, (2, 2), (0,)),
            ]
        )
        wp.append(rec.w_partial)
        wc.append(rec.w_complete)
    _write_csv(outdir / "swap_sweep.csv", ("phi",) + CSV_COLUMNS + ("N1", "N2", "I_A1A2"), rows)
    wp = np.array(wp)
    crossings = [float(phis[k]) for k in range(len(wp) - 1) if np.sign(wp[k]) != np.sign(wp[k + 1])]
    summary = {
        "w_partial_sign_changes": crossings,
        "phi_min_w_complete": float(phis[int(np.argmin(wc))]),
    }
    _write_json(outdir / "summary.json", summary)
    return ["swap_sweep.csv", "summary.json"]


def cmd_random_ensemble(p: ModelParams, args, outdir: Path) -> list[str]:
    cfg = EnsembleConfig(p, args.samples, args.seed, args.workers, args.correlations)
    records = write_records(run_ensemble(cfg), outdir / "records.csv", cfg.compute_correlations)
    files = ["records.csv"]
    stats = summarize(records)
    histogram(records, ["w_partial"], bins=args.bins).write_csv(outdir / "hist_W_partial.csv")
    histogram(records, ["q2_complete", "w_complete"], bins=args.bins).write_csv(outdir / "hist_Q2_complete_W_complete.csv")
    files += ["hist_W_partial.csv", "hist_Q2_complete_W_complete.csv"]
    if cfg.compute_correlations:
        for name in ("mi_s1s2", "mi_a1a2", "mi_as", "discord_s1s2"):
            histogram(records, [name, "w_complete"], bins=args.bins).write_csv(outdir / f"hist_{name}_W_complete.csv")
            files.append(f"hist_{name}_W_complete.csv")
    report = octagon_analysis(p)
    report.write_json(outdir / "octagon.json")
    pts, ids = ensemble_points(records)
    hull = containment_check(report, pts, ids)
    octa = containment_check(report, pts, ids, against="octagon")
    ext = partial_extremes(p, records)
    summary = stats.as_dict()
    summary["containment"] = {
        "hull_violations": hull.violations,
        "hull_violating_samples": list(hull.indices),
        "octagon_violations": octa.violations,
        "octagon_violating_samples": list(octa.indices),
        "seed": args.seed,
    }
    summary["partial_extremes"] = ext.__dict__
    summary["discord_method"] = DISCORD_METHOD
    _write_json(outdir / "summary.json", summary)
    return files + ["octagon.json", "summary.json"]


def cmd_lindblad_check(p: ModelParams, args, outdir: Path) -> list[str]:
    try:
        taus = [float(t) for t in args.tau_list.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --tau-list {args.tau_list!r}") from None
    if not taus or any(not t > 0 for t in taus):
        raise UsageError("all tau values must be positive")
    continuous = lindblad_steady_state(lindblad_generator(p, args.phi))
    rows = []
    for tau in taus:
        q = p.with_(tau=tau)
        m, _ = evaluate(q, partial_swap(args.phi))
        rows.append([tau, trace_distance(m.rho_s, continuous)])
    _write_csv(outdir / "lindblad_check.csv", ("tau", "trace_distance"), rows)
    by_tau = sorted(rows, key=lambda r: -r[0])
    dists = [r[1] for r in by_tau]
    summary = {
        "phi": args.phi,
        "distances": {fmt(r[0]): r[1] for r in by_tau},
        "monotone_decrease": all(b < a for a, b in zip(dists, dists[1:])),
    }
    _write_json(outdir / "summary.json", summary)
    return ["lindblad_check.csv", "summary.json"]


def cmd_steady_state(p: ModelParams, args, outdir: Path) -> list[str]:
    u = parse_unitary(args.unitary)
    m, rec = evaluate(p, u, cross_check=True)
    corr = correlation_record(m.rho_s, m.bath_prepared, m.joint_after)
    out = {
        "unitary": args.unitary,
        "bath_unitary": _matrix(u),
        "steady_state": _matrix(m.rho_s),
        "residual": m.steady.residual,
        "spectral_gap": m.steady.spectral_gap,
        "thermo": rec.as_dict(),
        "correlations": corr.__dict__,
        "discord_method": DISCORD_METHOD,
    }
    for scenario in ("partial", "complete"):
        try:
            fig = otto_figures(p, rec, scenario)
            out[f"otto_{scenario}"] = fig.__dict__
        except ValueError:
            out[f"otto_{scenario}"] = None
    _write_json(outdir / "steady_state.json", out)
    return ["steady_state.json"]


def cmd_octagon(p: ModelParams, args, outdir: Path) -> list[str]:
    octagon_analysis(p).write_json(outdir / "octagon.json")
    return ["octagon.json"]


COMMANDS = {
    "swap-sweep": cmd_swap_sweep,
    "random-ensemble": cmd_random_ensemble,
    "lindblad-check": cmd_lindblad_check,
    "steady-state": cmd_steady_state,
    "octagon": cmd_octagon,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value parameter file")
    common.add_argument("--outdir", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--workers", type=int, default=int(os.environ.get("QCOLLIDE_WORKERS", "1")), help="default $QCOLLIDE_WORKERS or 1"
    )
    for key in PARAM_KEYS:
        common.add_argument(f"--{key}", type=float, default=None, help=f"override {key}")

    parser = argparse.ArgumentParser(prog="qcollide", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("swap-sweep", parents=[common], help="thermodynamics versus partial-swap angle")
    s.add_argument("--phi-min", type=float, default=0.0)
    s.add_argument("--phi-max", type=float, default=math.pi)
    s.add_argument("--steps", type=int, default=201)

    s = sub.add_parser("random-ensemble", parents=[common], help="Haar-random bath preparations")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--bins", type=int, default=100)
    s.add_argument("--correlations", action="store_true", help="also compute correlation measures")

    s = sub.add_parser("lindblad-check", parents=[common], help="discrete map versus Lindblad limit")
    s.add_argument("--tau-list", default="0.1,0.05,0.025")
    s.add_argument("--phi", type=float, default=0.05)

    s = sub.add_parser("steady-state", parents=[common], help="one configuration in full detail")
    s.add_argument("--unitary", default="identity", help="identity | swap(phi) | I..VIII | haar(seed)")

    sub.add_parser("octagon", parents=[common], help="extremal octagon of non-correlating operations")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = datetime.now(timezone.utc).isoformat()
    try:
        params = resolve_params(args)
        if getattr(args, "samples", 1) < 1:
            raise UsageError("--samples must be at least 1")
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](params, args, outdir)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"qcollide: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateSteadyState, NonConvergence) as exc:
        print(f"qcollide: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    options = {k: v for k, v in vars(args).items() if k not in PARAM_KEYS and k not in ("config", "outdir")}
    write_manifest(outdir, args.command, params, options, files, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
