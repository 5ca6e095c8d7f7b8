"""Command-line front end; the only module with side effects.

Subcommands: gen | energy | partition | density | spread | regularize |
fekete | gap | clark | report. Every run writes a JSON report embedding the
exact invocation and the effective configuration; CSV output is plot-ready
(header row, no units). Exit codes: 0 success, 2 parameter error, 3
infeasible or inconclusive (diagnostics still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import clarknum, density, energy, fekete, gapnum, partitions, regularize, seqcore
from .seqcore import Interval, ParameterError, Partition, PointSequence

CONFIG_DEFAULTS = {
    "resolution": 1e-3,
    "sweep_points": 40.0,
    "sweep_n_max": 512.0,
    "sweep_lo_factor": 0.3,
    "sweep_hi_factor": 1.3,
    "clark_radius": 1e4,
}


def load_config(path=None) -> dict:
    """key=value text config; CLI flags override these values."""
    cfg = dict(CONFIG_DEFAULTS)
    path = path or os.environ.get("GAPKIT_CONFIG")
    if path and os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ParameterError(f"bad config line: {line!r}")
                key, val = (s.strip() for s in line.split("=", 1))
                cfg[key] = float(val)
    return cfg


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParameterError(f"window must be 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _load_sequence(args) -> PointSequence:
    spec = args.seq
    if os.path.exists(spec):
        pts = seqcore.load_points(spec)
        if args.window:
            lo, hi = _parse_window(args.window)
        elif pts.size:
            lo, hi = float(pts[0]), float(pts[-1])
        else:
            lo, hi = 0.0, 0.0
        return PointSequence(pts[(pts >= lo) & (pts <= hi)], (lo, hi), label=spec)
    if not args.window:
        raise ParameterError("--window is required for generated sequences")
    return seqcore.generate(spec, _parse_window(args.window), seed=args.seed)


def _load_partition(text: str, seq: PointSequence):
    if text.startswith("greedy:d="):
        d = float(text.split("=", 1)[1])
        res = partitions.greedy_density_partition(seq, d)
        if not res.ok:
            return None, res
        return res.partition, res
    with open(text, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    bks = data["breakpoints"] if isinstance(data, dict) else data
    return Partition(np.array(bks, dtype=float)), None


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def _emit(args, command: str, result: dict, cfg: dict) -> None:
    payload = {
        "command": command,
        "invocation": [command] + [a for a in args._raw_argv[1:]],
        "config": {k: cfg[k] for k in sorted(cfg)},
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "result": _jsonable(result),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_gen(args, cfg):
    seq = seqcore.generate(args.spec, _parse_window(args.window), seed=args.seed)
    if args.output:
        seqcore.save_points(args.output, seq.points)
    else:
        for x in seq.points:
            print(repr(float(x)))
    return 0


def _cmd_energy(args, cfg):
    seq = _load_sequence(args)
    result = {"n_points": len(seq), "total_energy": energy.total_energy(seq)}
    code = 0
    if args.partition:
        part, greedy = _load_partition(args.partition, seq)
        if part is None:
            result["greedy_failure"] = {"direction": greedy.failed_direction,
                                        "blocked_at": greedy.blocked_at}
            code = 3
        else:
            sub = seq.restrict(*part.cover())
            rep = energy.energy_condition_report(sub, part)
            result["energy_condition"] = rep.to_json_dict()
            if args.csv:
                rep.to_csv(args.csv)
            if rep.verdict == "inconclusive":
                code = 3
    _emit(args, "energy", result, cfg)
    return code


def _cmd_partition(args, cfg):
    seq = _load_sequence(args)
    part, greedy = _load_partition(args.partition, seq)
    if part is None:
        _emit(args, "partition", {"ok": False,
                                  "direction": greedy.failed_direction,
                                  "blocked_at": greedy.blocked_at}, cfg)
        return 3
    validity = partitions.is_valid_paper_partition(part)
    result = {
        "ok": True,
        "breakpoints": [float(b) for b in part.breakpoints],
        "shortness": validity.shortness.to_json_dict(),
        "valid_paper_partition": validity.valid,
        "reasons": list(validity.reasons),
        "monotone": validity.monotone,
    }
    if greedy is not None:
        result["counts"] = list(greedy.counts)
    _emit(args, "partition", result, cfg)
    return 0 if validity.shortness.verdict != "inconclusive" else 3


def _cmd_density(args, cfg):
    seq = _load_sequence(args)
    est = density.density_estimate(seq, args.method, resolution=cfg["resolution"])
    _emit(args, "density", est.to_json_dict(), cfg)
    return 0


def _cmd_spread(args, cfg):
    seq = _load_sequence(args)
    a, b = _parse_window(args.J)
    iv = Interval(a, b)
    try:
        out = regularize.spread_points(seq, iv, args.C)
    except regularize.InfeasibleError as exc:
        _emit(args, "spread", {"ok": False, "error": str(exc)}, cfg)
        return 3
    e_in, e_out = energy.total_energy(seq), energy.total_energy(out)
    floor = e_in - (math.log(args.C) / args.C) * iv.length * len(seq)
    if args.out_prefix:
        seqcore.save_points(args.out_prefix + ".spread.txt", out.points)
    _emit(args, "spread", {
        "ok": True,
        "energy_before": e_in,
        "energy_after": e_out,
        "energy_floor": floor,
        "margin": e_out - floor,
        "points": [float(x) for x in out.points] if len(out) <= 1000 else None,
    }, cfg)
    return 0


def _cmd_regularize(args, cfg):
    seq = _load_sequence(args)
    res = regularize.regularize_gaps(seq, args.C)
    if args.out_prefix:
        seqcore.save_points(args.out_prefix + ".gamma.txt", res.gamma.points)
        seqcore.save_points(args.out_prefix + ".added.txt", res.added.points)
    _emit(args, "regularize", res.to_json_dict(), cfg)
    return 0


def _cmd_fekete(args, cfg):
    lo, hi = _parse_window(args.interval)
    res = fekete.fekete_optimize(args.k, Interval(lo, hi), seed=args.seed or 0)
    _emit(args, "fekete", res.to_json_dict(), cfg)
    return 0 if res.converged else 3


def _cmd_gap(args, cfg):
    seq = _load_sequence(args)
    result = {}
    code = 0
    if args.synthesize is not None:
        lam = seq.points[: gapnum.MAX_GRAM_SIZE]
        syn = gapnum.synthesize_gap_measure(lam, args.synthesize)
        result["synthesis"] = syn.to_json_dict()
    if args.sweep:
        a0, a1, steps = args.sweep.split(":")
        lam = seq.points[np.argsort(np.abs(seq.points))][: int(cfg["sweep_n_max"])]
        sweep = gapnum.sigma_min_sweep(np.sort(lam),
                                       np.linspace(float(a0), float(a1), int(steps)),
                                       threads=args.threads)
        result["sweep"] = sweep.to_json_dict()
        if args.csv:
            _write_csv(args.csv, ["a", "sigma_min"], sweep.pairs())
    if args.synthesize is None and not args.sweep:
        config = gapnum.GapConfig(
            resolution=cfg["resolution"],
            sweep_points=int(cfg["sweep_points"]),
            sweep_n_max=int(cfg["sweep_n_max"]),
            sweep_lo_factor=cfg["sweep_lo_factor"],
            sweep_hi_factor=cfg["sweep_hi_factor"],
            threads=args.threads,
        )
        cert = gapnum.estimate_gap_characteristic(seq, config)
        result["certificate"] = cert.to_json_dict()
        if args.csv and cert.sweep is not None:
            _write_csv(args.csv, ["a", "sigma_min"], cert.sweep.pairs())
        if cert.c_estimate == 0.0:
            code = 3
    _emit(args, "gap", result, cfg)
    return code


def _cmd_clark(args, cfg):
    seq = _load_sequence(args)
    radius = args.R if args.R is not None else cfg["clark_radius"]
    recs = clarknum.residue_weights(seq.points, R=radius,
                                    report_width=args.width,
                                    tail_mode=args.tail_mode)
    if args.csv:
        _write_csv(args.csv,
                   ["n", "a_n", "delta_n", "beta_n", "tail_bound"],
                   [[r.n, r.a_n, r.delta_n, r.beta_n, r.tail_bound] for r in recs])
    result = {
        "n_reported": len(recs),
        "records": [
            {"n": r.n, "a_n": r.a_n, "b_n": r.b_n, "delta_n": r.delta_n,
             "beta_n": r.beta_n, "atom_sum": r.atom_sum, "tail_bound": r.tail_bound}
            for r in recs[:200]
        ],
    }
    if args.profile:
        x0, x1, steps = args.profile.split(":")
        prof = clarknum.theta_derivative_profile(
            seq.points, np.linspace(float(x0), float(x1), int(steps)))
        result["profile_tail_bound"] = prof.tail_bound
        if args.profile_csv:
            _write_csv(args.profile_csv, ["x", "estimate"], prof.pairs())
    _emit(args, "clark", result, cfg)
    return 0


def _cmd_report(args, cfg):
    seq = _load_sequence(args)
    config = gapnum.GapConfig(resolution=cfg["resolution"],
                              sweep_points=int(cfg["sweep_points"]),
                              sweep_n_max=int(cfg["sweep_n_max"]),
                              threads=args.threads)
    cert = gapnum.estimate_gap_characteristic(seq, config)
    d1 = density.density_lower(seq, "d1", resolution=cfg["resolution"])
    bm = density.bm_density(seq, resolution=cfg["resolution"])
    result = {
        "n_points": len(seq),
        "window": list(seq.window),
        "total_energy": energy.total_energy(seq) if len(seq) <= 5000 else None,
        "density_d1": d1.to_json_dict(),
        "density_bm": bm.to_json_dict(),
        "gap_certificate": cert.to_json_dict(),
    }
    _emit(args, "report", result, cfg)
    return 0 if cert.c_estimate > 0 else 3


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gapkit",
                                description="spectral-gap toolkit for point sequences")
    p.add_argument("--config", help="key=value config file (env GAPKIT_CONFIG)")
    sub = p.add_subparsers(dest="command")

    def common(sp, seq=True):
        if seq:
            sp.add_argument("--seq", required=True, help="sequence file or law spec")
            sp.add_argument("--window", help="lo,hi")
            sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("-o", "--output", help="JSON output path (default stdout)")
        sp.add_argument("--csv", help="CSV output path")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("gen", help="materialize a sequence law")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--window", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("-o", "--output")

    sp = sub.add_parser("energy", help="total energy and energy-condition report")
    common(sp)
    sp.add_argument("--partition", help="file.json or greedy:d=<x>")

    sp = sub.add_parser("partition", help="build/validate a partition")
    common(sp)
    sp.add_argument("--partition", required=True, help="file.json or greedy:d=<x>")

    sp = sub.add_parser("density", help="density estimators")
    common(sp)
    sp.add_argument("--method", required=True, choices=["d1", "d2", "d3", "d4", "bm"])

    sp = sub.add_parser("spread", help="respace points inside an interval")
    common(sp)
    sp.add_argument("--J", required=True, help="a,b")
    sp.add_argument("--C", required=True, type=float)
    sp.add_argument("--out-prefix")

    sp = sub.add_parser("regularize", help="fill oversized gaps")
    common(sp)
    sp.add_argument("--C", required=True, type=float)
    sp.add_argument("--out-prefix")

    sp = sub.add_parser("fekete", help="energy maximizer on an interval")
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--interval", required=True, help="a,b")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    sp.add_argument("--csv")
    sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("gap", help="gap certificate / sigma_min sweep")
    common(sp)
    sp.add_argument("--sweep", help="a0:a1:steps")
    sp.add_argument("--synthesize", type=float, default=None)

    sp = sub.add_parser("clark", help="Krein-shift residue weights")
    common(sp)
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--width", type=float, default=None)
    sp.add_argument("--tail-mode", choices=["none", "persistent"], default="none")
    sp.add_argument("--profile", help="x0:x1:steps")
    sp.add_argument("--profile-csv")

    sp = sub.add_parser("report", help="aggregate density + gap report")
    common(sp)
    return p


_HANDLERS = {
    "gen": _cmd_gen,
    "energy": _cmd_energy,
    "partition": _cmd_partition,
    "density": _cmd_density,
    "spread": _cmd_spread,
    "regularize": _cmd_regularize,
    "fekete": _cmd_fekete,
    "gap": _cmd_gap,
    "clark": _cmd_clark,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not args.command:
        parser.print_usage()
        return 2
    args._raw_argv = [args.command] + argv
    try:
        cfg = load_config(args.config)
        return _HANDLERS[args.command](args, cfg)
    except ParameterError as exc:
        print(f"gapkit: parameter error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
