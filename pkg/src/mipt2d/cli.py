"""Command-line interface.

Subcommands: ensemble build|verify, run, analyze, boundary-scan,
ancilla-run. Exit codes: 0 success, 2 configuration error, 3 ensemble
error, 4 fit failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .ensembles import (EnsembleSpec, TableFormatError, element_bytes,
                        enumerate_sspt_table, enumerate_z_preserving, load_table,
                        restricted_symmetry_generators, store_table)
from .fss import FitFailureError, OBJECTIVES, fit_scaling, scale_points
from .sweep import SchemaError, WorkerCrashError, load_datapoints, \
    run_ancilla_series, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENSEMBLE = 3
EXIT_FIT = 4


def _sha256_bytes(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def cmd_ensemble_build(args) -> int:
    kind = args.kind
    if kind == "sspt-diagonal":
        table = enumerate_sspt_table()
        k = 5
    elif kind == "z-preserving":
        if args.k not in (3, 4):
            print("z-preserving tables need --k 3 or 4", file=sys.stderr)
            return EXIT_CONFIG
        k = args.k
        table = enumerate_z_preserving(k)
    else:
        print(f"kind {kind!r} has no stored table (sampled on the fly)",
              file=sys.stderr)
        return EXIT_CONFIG
    store_table(table, args.out, k)
    manifest = {
        "kind": kind,
        "k": k,
        "count": int(table.shape[0]),
        "element_bytes": element_bytes(k),
        "code_version": __version__,
        "sha256": _sha256_bytes(args.out),
    }
    with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {table.shape[0]} elements to {args.out}")
    return EXIT_OK


def cmd_ensemble_verify(args) -> int:
    try:
        k, table = load_table(args.path)
    except (TableFormatError, OSError) as exc:
        print(f"ensemble error: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE
    if k == 5:
        gens = restricted_symmetry_generators("sspt-diagonal", 5)
        kind = "sspt-diagonal"
    else:
        gens = restricted_symmetry_generators("z-preserving", k)
        kind = "z-preserving"
    spec = EnsembleSpec(kind, k, "plus5" if k == 5 else ("line3" if k == 3 else "square4"),
                        gens, table)
    if not spec.verify_table():
        print("ensemble error: table fails symplectic/symmetry checks",
              file=sys.stderr)
        return EXIT_ENSEMBLE
    print(f"ok: k={k}, {table.shape[0]} elements, all symplectic and symmetric")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, overrides={
            "seed": args.seed, "workers": args.workers, "out": args.out})
        out = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TableFormatError, FileNotFoundError) as exc:
        print(f"ensemble error: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE
    except WorkerCrashError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out['csv']}")
    return EXIT_OK


def _grid(center, width, span, count=41):
    w = width if np.isfinite(width) and width > 0 else span
    return np.linspace(center - 5 * w, center + 5 * w, count)


def analyze_csvs(csv_paths, method, initial, out_dir, gamma=0.0,
                 landscape_size=41):
    """Fit one or all objectives, emit report JSON + landscape CSV."""
    points = load_datapoints(csv_paths)
    if len({q.L for q in points}) < 2:
        raise SchemaError("need data from at least two system sizes")
    methods = list(OBJECTIVES) if method == "all" else [method]
    inputs = [{"path": str(p), "sha256": _sha256_bytes(p)} for p in csv_paths]
    os.makedirs(out_dir, exist_ok=True)
    reports = []
    for m in methods:
        fit = fit_scaling(points, m, initial=initial, gamma=gamma)
        x, y, sig, Ls, ps = scale_points(points, fit.p_c, fit.nu, fit.gamma)
        pcs = _grid(fit.p_c, fit.p_c_width, max(0.02, 0.05 * abs(fit.p_c) + 1e-3),
                    landscape_size)
        nus = _grid(fit.nu, fit.nu_width, max(0.05, 0.1 * fit.nu), landscape_size)
        rows = ["pc,nu,epsilon"]
        fn = OBJECTIVES[m]
        for pc in pcs:
            for nu in nus:
                try:
                    eps = fn(points, float(pc), float(nu), gamma) if nu > 0 else ""
                except ValueError:
                    eps = ""
                cell = repr(float(eps)) if eps != "" else ""
                rows.append(f"{float(pc)!r},{float(nu)!r},{cell}")
        landscape_path = os.path.join(out_dir, f"landscape_{m}.csv")
        with open(landscape_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
        report = {
            "method": m,
            "inputs": inputs,
            "p_c": fit.p_c,
            "nu": fit.nu,
            "gamma": fit.gamma,
            "epsilon": fit.epsilon,
            "p_c_width": fit.p_c_width if np.isfinite(fit.p_c_width) else None,
            "nu_width": fit.nu_width if np.isfinite(fit.nu_width) else None,
            "width_unbounded": fit.width_unbounded,
            "n_evaluations": fit.n_evaluations,
            "converged": fit.converged,
            "scaled_points": [
                {"x": float(a), "y": float(b), "sigma": float(c),
                 "L": int(d), "p": float(e)}
                for a, b, c, d, e in zip(x, y, sig, Ls, ps)
            ],
            "landscape_csv": landscape_path,
        }
        path = os.path.join(out_dir, f"fit_{m}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        report["path"] = path
        reports.append(report)
    summary = {"reports": [r["path"] for r in reports]}
    if len(reports) > 1:
        summary["cross_method_agreement"] = _methods_agree(reports)
    with open(os.path.join(out_dir, "analysis.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return reports, summary


def _methods_agree(reports) -> bool:
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            a, b = reports[i], reports[j]
            for key, wkey in (("p_c", "p_c_width"), ("nu", "nu_width")):
                wa = a[wkey] if a[wkey] is not None else float("inf")
                wb = b[wkey] if b[wkey] is not None else float("inf")
                if abs(a[key] - b[key]) > wa + wb:
                    return False
    return True


def cmd_analyze(args) -> int:
    try:
        reports, summary = analyze_csvs(args.csv, args.method,
                                        (args.pc0, args.nu0), args.out)
    except (SchemaError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitFailureError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    for r in reports:
        pw = r["p_c_width"]
        nw = r["nu_width"]
        pw_s = f"{pw:.4g}" if pw is not None else "unbounded"
        nw_s = f"{nw:.4g}" if nw is not None else "unbounded"
        print(f"{r['method']:<11s} p_c = {r['p_c']:.4f} +- {pw_s}   "
              f"nu = {r['nu']:.3f} +- {nw_s}   eps = {r['epsilon']:.4g}")
    if "cross_method_agreement" in summary:
        print(f"cross-method agreement: {summary['cross_method_agreement']}")
    return EXIT_OK


def cmd_boundary_scan(args) -> int:
    try:
        cfg = load_config(args.config, overrides={
            "seed": args.seed, "workers": args.workers, "out": args.out})
        lines = cfg.extra_lines or [cfg.line]
        os.makedirs(cfg.out_dir, exist_ok=True)
        rows = ["line,axis,fixed_key,fixed_value,p_c,p_c_width,nu,nu_width,"
                "pu_c,pmz_c,pms_c"]
        for li, line in enumerate(lines):
            sub = os.path.join(cfg.out_dir, f"line{li}")
            cfg.line = line
            out = run_experiment(cfg, out_dir=sub)
            initial = (float(np.median(line.p_values)), 1.0)
            reports, _ = analyze_csvs([out["csv"]], args.method, initial,
                                      os.path.join(sub, "analysis"))
            r = reports[0]
            mix = line.mix_for(r["p_c"])
            rows.append(",".join([
                str(li), line.axis, line.fixed_key, repr(line.fixed_value),
                repr(r["p_c"]), repr(r["p_c_width"] or float("nan")),
                repr(r["nu"]), repr(r["nu_width"] or float("nan")),
                repr(mix.p_u), repr(mix.p_mz), repr(mix.p_ms)]))
        path = os.path.join(cfg.out_dir, "boundary.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
        print(f"wrote {path}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TableFormatError, FileNotFoundError) as exc:
        print(f"ensemble error: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE
    except FitFailureError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT


def cmd_ancilla_run(args) -> int:
    try:
        cfg = load_config(args.config, overrides={
            "seed": args.seed, "workers": args.workers, "out": args.out})
        if cfg.ancillas < 1:
            cfg.ancillas = 20
        out = run_ancilla_series(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TableFormatError, FileNotFoundError) as exc:
        print(f"ensemble error: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE
    print(f"wrote {out['csv']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mipt2d", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    ens = sub.add_parser("ensemble", help="build or verify stored ensembles")
    esub = ens.add_subparsers(dest="ensemble_command", required=True)
    b = esub.add_parser("build")
    b.add_argument("--kind", required=True,
                   choices=["sspt-diagonal", "z-preserving"])
    b.add_argument("--k", type=int, default=None)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_ensemble_build)
    v = esub.add_parser("verify")
    v.add_argument("path")
    v.set_defaults(func=cmd_ensemble_verify)

    r = sub.add_parser("run", help="run a configured sweep")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="scaling collapse of DataPoint CSVs")
    a.add_argument("--csv", nargs="+", required=True)
    a.add_argument("--method", default="polynomial",
                   choices=["nearest", "multilevel", "polynomial", "all"])
    a.add_argument("--pc0", type=float, required=True)
    a.add_argument("--nu0", type=float, required=True)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    bs = sub.add_parser("boundary-scan", help="run+analyze a family of sweep lines")
    bs.add_argument("--config", required=True)
    bs.add_argument("--method", default="polynomial",
                    choices=["nearest", "multilevel", "polynomial"])
    bs.add_argument("--seed", type=int, default=None)
    bs.add_argument("--workers", type=int, default=None)
    bs.add_argument("--out", default=None)
    bs.set_defaults(func=cmd_boundary_scan)

    anc = sub.add_parser("ancilla-run", help="scrambled-ancilla decay series")
    anc.add_argument("--config", required=True)
    anc.add_argument("--seed", type=int, default=None)
    anc.add_argument("--workers", type=int, default=None)
    anc.add_argument("--out", default=None)
    anc.set_defaults(func=cmd_ancilla_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
