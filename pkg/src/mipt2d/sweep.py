"""Experiment orchestration: parallel trajectory sweeps and aggregation.

One work unit is a whole trajectory. Every trajectory's random stream is
derived from (master seed, point index, trajectory index) alone, and
aggregation iterates results in index order, so outputs are byte-identical
for any worker count. Worker pools use fork so the (possibly large)
ensemble table is shared copy-on-write instead of pickled.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing as mp
import os
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .circuit import OperationMix, Schedule, TrajectoryConfig, run_trajectory
from .diagnostics import DiagnosticConfig
from .ensembles import EnsembleSpec
from .fss import DataPoint
from .lattice import LatticeGeometry

CSV_HEADER = "L,p,pu,pmz,pms,diagnostic,geometry,delta,sigma,count"
ANC_CSV_HEADER = "L,p,pu,pmz,pms,t,s_anc,count"
PROFILE_CSV_HEADER = "L,p,pu,pmz,pms,l,s_mean,sigma,count"

_CTX = {}


@dataclass(frozen=True)
class SweepPoint:
    index: int
    L: int
    p: float
    mix: OperationMix


def _format(x: float) -> str:
    return repr(float(x))


def _run_one(args):
    point_index, traj_index = args
    ctx = _CTX["current"]
    point = ctx["points"][point_index]
    geom = LatticeGeometry(point.L)
    cfg = TrajectoryConfig(
        geometry=geom,
        mix=point.mix,
        ensemble=ctx["ensemble"],
        schedule=ctx["schedule_for"](point.L),
        diagnostic=ctx["diagnostic"],
        seed=ctx["seed"],
        trajectory_id=traj_index,
        stream_key=(point_index, traj_index),
        n_ancillas=ctx.get("ancillas", 0),
        scramble_steps=ctx.get("scramble_for", lambda L: None)(point.L),
    )
    samples = run_trajectory(cfg)
    values = [s.value for s in samples]
    times = [s.time for s in samples]
    return point_index, traj_index, values, times


class WorkerCrashError(RuntimeError):
    pass


def _map_tasks(tasks, workers: int):
    """Run _run_one over tasks, in parallel when workers > 1."""
    if workers <= 1:
        for task in tasks:
            yield _run_one(task)
        return
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        for out in pool.imap(_run_one, tasks, chunksize=8):
            yield out


def run_sweep(points, ensemble: EnsembleSpec, diagnostic: DiagnosticConfig,
              trajectories: int, seed: int, workers: int = 1,
              schedule_for=None, ancillas: int = 0, scramble_for=None,
              collect_raw: bool = False):
    """Execute all trajectories for a sweep; returns per-point aggregates.

    Aggregate per point: delta is the mean over every raw sample, sigma the
    standard error over trajectory means (blocked so within-trajectory
    autocorrelation does not fake precision), count the raw sample total.
    sigma falls back to 1/count when all trajectory means coincide.
    """
    if schedule_for is None:
        schedule_for = Schedule.default
    _CTX["current"] = {
        "points": {pt.index: pt for pt in points},
        "ensemble": ensemble,
        "diagnostic": diagnostic,
        "seed": seed,
        "schedule_for": schedule_for,
        "ancillas": ancillas,
        "scramble_for": scramble_for or (lambda L: None),
    }
    tasks = [(pt.index, ti) for pt in points for ti in range(trajectories)]
    per_point = {pt.index: {} for pt in points}
    try:
        for point_index, traj_index, values, times in _map_tasks(tasks, workers):
            per_point[point_index][traj_index] = (values, times)
    except Exception as exc:  # noqa: BLE001 - surfaced as a run failure
        raise WorkerCrashError(f"trajectory worker failed: {exc}") from exc
    results = {}
    for pt in points:
        todo = per_point[pt.index]
        traj_values = [np.asarray(todo[ti][0], dtype=float)
                       for ti in sorted(todo)]
        results[pt.index] = _aggregate(traj_values)
        if collect_raw:
            results[pt.index]["raw"] = {ti: todo[ti] for ti in sorted(todo)}
    return results


def _aggregate(traj_values) -> dict:
    if not traj_values or all(v.size == 0 for v in traj_values):
        return {"delta": None, "sigma": None, "count": 0}
    flat = np.concatenate([v.reshape(v.shape[0], -1) for v in traj_values])
    count = flat.shape[0]
    delta = flat.mean(axis=0)
    means = np.stack([v.reshape(v.shape[0], -1).mean(axis=0) for v in traj_values])
    if means.shape[0] > 1:
        sem = means.std(axis=0, ddof=1) / np.sqrt(means.shape[0])
    else:
        sem = np.zeros_like(delta)
    sem = np.where(sem > 0, sem, 1.0 / count)
    if delta.size == 1:
        return {"delta": float(delta[0]), "sigma": float(sem[0]), "count": count}
    return {"delta": delta, "sigma": sem, "count": count}


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_datapoint_csv(path, rows) -> None:
    """rows: iterables matching CSV_HEADER."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(r))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def run_experiment(config, out_dir=None) -> dict:
    """Run a configured sweep, write data.csv (or profile.csv) + manifest.

    Returns paths and aggregates. Raw per-sample logging is optional and
    off by default.
    """
    from .config import ExperimentConfig  # local import to avoid a cycle

    assert isinstance(config, ExperimentConfig)
    out = out_dir or config.out_dir
    os.makedirs(out, exist_ok=True)
    t0 = time.time()
    points = config.sweep_points()
    ensemble = config.build_ensemble()
    diag = config.build_diagnostic()
    results = run_sweep(points, ensemble, diag, config.trajectories,
                        config.seed, config.workers,
                        schedule_for=config.schedule_for,
                        ancillas=config.ancillas,
                        scramble_for=config.scramble_for,
                        collect_raw=config.raw_samples)
    profile_mode = config.diagnostic == "profile"
    csv_name = "profile.csv" if profile_mode else "data.csv"
    csv_path = os.path.join(out, csv_name)
    lines = [PROFILE_CSV_HEADER if profile_mode else CSV_HEADER]
    raw_lines = ["L,p,trajectory,time,value"]
    for pt in points:
        agg = results[pt.index]
        mix = pt.mix
        base = [str(pt.L), _format(pt.p), _format(mix.p_u), _format(mix.p_mz),
                _format(mix.p_ms)]
        if agg["count"] == 0:
            continue
        if profile_mode:
            for li, (dm, ds) in enumerate(zip(agg["delta"], agg["sigma"]), start=1):
                lines.append(",".join(base + [str(li), _format(dm), _format(ds),
                                              str(agg["count"])]))
        else:
            lines.append(",".join(base + [config.diagnostic, config.geometry_tag(),
                                          _format(agg["delta"]), _format(agg["sigma"]),
                                          str(agg["count"])]))
        if config.raw_samples and "raw" in agg:
            for ti, (values, times) in agg["raw"].items():
                for v, tt in zip(values, times):
                    if np.ndim(v) == 0:
                        raw_lines.append(",".join(
                            [str(pt.L), _format(pt.p), str(ti), str(tt), str(int(v))]))
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    raw_path = None
    if config.raw_samples:
        raw_path = os.path.join(out, "raw.csv")
        with open(raw_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(raw_lines) + "\n")
    manifest = {
        "config": config.echo(),
        "code_version": __version__,
        "ensemble_checksum": config.ensemble_checksum(),
        "regions": config.region_manifest(),
        "rng": "per-trajectory stream = SeedSequence(seed, spawn_key=(point, trajectory))",
        "csv_sha256": _sha256(csv_path),
        "wall_time_s": round(time.time() - t0, 3),
    }
    manifest_path = os.path.join(out, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"csv": csv_path, "manifest": manifest_path, "raw": raw_path,
            "results": results, "points": points}


def load_datapoints(paths) -> list:
    """Read DataPoint CSVs, validating the schema column by column."""
    points = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != CSV_HEADER:
                raise SchemaError(f"{path}: header mismatch, expected {CSV_HEADER!r}")
            for ln, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                fields = line.split(",")
                if len(fields) != 10:
                    raise SchemaError(f"{path}:{ln}: expected 10 columns")
                names = CSV_HEADER.split(",")
                vals = dict(zip(names, fields))
                try:
                    points.append(DataPoint(L=int(vals["L"]), p=float(vals["p"]),
                                            delta=float(vals["delta"]),
                                            sigma=float(vals["sigma"]),
                                            count=int(vals["count"])))
                except ValueError as exc:
                    bad = _first_bad_column(vals)
                    raise SchemaError(f"{path}:{ln}: bad value in column {bad!r}") from exc
    return points


def _first_bad_column(vals) -> str:
    for name in ("L", "count"):
        try:
            int(vals[name])
        except ValueError:
            return name
    for name in ("p", "pu", "pmz", "pms", "delta", "sigma"):
        try:
            float(vals[name])
        except ValueError:
            return name
    return "delta"


class SchemaError(RuntimeError):
    pass


def run_ancilla_series(config) -> dict:
    """Ancilla-entropy time series per sweep point; writes anc.csv.

    Each trajectory scrambles the ancillas, then records the ancilla
    entropy on the sampling cadence; rows hold the trajectory mean at each
    sample time.
    """
    from .config import ExperimentConfig

    assert isinstance(config, ExperimentConfig)
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    points = config.sweep_points()
    ensemble = config.build_ensemble()
    diag = DiagnosticConfig("s_anc")
    results = run_sweep(points, ensemble, diag, config.trajectories,
                        config.seed, config.workers,
                        schedule_for=config.schedule_for,
                        ancillas=config.ancillas or 20,
                        scramble_for=config.scramble_for,
                        collect_raw=True)
    lines = [ANC_CSV_HEADER]
    series = {}
    for pt in points:
        agg = results[pt.index]
        raw = agg.get("raw", {})
        if not raw:
            continue
        times = raw[sorted(raw)[0]][1]
        stack = np.stack([np.asarray(raw[ti][0], dtype=float) for ti in sorted(raw)])
        mean = stack.mean(axis=0)
        series[(pt.L, pt.p)] = (np.asarray(times, dtype=float), mean)
        for tt, val in zip(times, mean):
            lines.append(",".join([str(pt.L), _format(pt.p), _format(pt.mix.p_u),
                                   _format(pt.mix.p_mz), _format(pt.mix.p_ms),
                                   str(tt), _format(val), str(stack.shape[0])]))
    csv_path = os.path.join(out, "anc.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return {"csv": csv_path, "series": series}
