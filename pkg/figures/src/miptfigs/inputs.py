"""Input loading, schema validation, and provenance checks.

Figures are pure functions of files the simulation toolkit emits: the
DataPoint CSV, the fit-report JSON (which embeds a SHA-256 of its input
CSVs), the objective-landscape CSV, and the boundary CSV. Nothing here
recomputes physics; mismatched or malformed inputs fail before rendering.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

DATA_HEADER = "L,p,pu,pmz,pms,diagnostic,geometry,delta,sigma,count"
LANDSCAPE_HEADER = "pc,nu,epsilon"
BOUNDARY_HEADER = ("line,axis,fixed_key,fixed_value,p_c,p_c_width,nu,nu_width,"
                   "pu_c,pmz_c,pms_c")


class SchemaError(RuntimeError):
    pass


class ProvenanceError(RuntimeError):
    pass


class InterpolationError(RuntimeError):
    pass


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


@dataclass
class DataTable:
    L: np.ndarray
    p: np.ndarray
    delta: np.ndarray
    sigma: np.ndarray
    path: str


def load_datapoints(path) -> DataTable:
    if not os.path.exists(path):
        raise SchemaError(f"data CSV {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != DATA_HEADER:
            raise SchemaError(f"{path}: expected header {DATA_HEADER!r}")
        rows = [ln.strip().split(",") for ln in fh if ln.strip()]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        L = np.array([int(r[0]) for r in rows])
        p = np.array([float(r[1]) for r in rows])
        delta = np.array([float(r[7]) for r in rows])
        sigma = np.array([float(r[8]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed row: {exc}") from exc
    return DataTable(L, p, delta, sigma, str(path))


def load_fit_report(path) -> dict:
    if not os.path.exists(path):
        raise ProvenanceError(f"fit report {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    for key in ("method", "p_c", "nu", "inputs", "scaled_points"):
        if key not in report:
            raise SchemaError(f"{path}: fit report lacks {key!r}")
    return report


def check_provenance(report: dict, csv_path) -> None:
    """The fit report must reference this CSV with a matching digest."""
    digest = sha256_of(csv_path)
    known = {os.path.basename(str(i.get("path", ""))): i.get("sha256")
             for i in report["inputs"]}
    name = os.path.basename(str(csv_path))
    if name not in known:
        raise ProvenanceError(f"fit report does not reference {name!r}")
    if known[name] != digest:
        raise ProvenanceError(
            f"digest mismatch for {name!r}: report has {known[name][:12]}..., "
            f"file is {digest[:12]}...")


@dataclass
class Landscape:
    pc: np.ndarray       # sorted unique grid values
    nu: np.ndarray
    epsilon: np.ndarray  # (len(pc), len(nu)), NaN where missing
    path: str


def load_landscape(path) -> Landscape:
    if not os.path.exists(path):
        raise SchemaError(f"landscape CSV {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != LANDSCAPE_HEADER:
            raise SchemaError(f"{path}: expected header {LANDSCAPE_HEADER!r}")
        pcs, nus, eps = [], [], []
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            parts = ln.split(",")
            if len(parts) != 3:
                raise SchemaError(f"{path}: landscape rows need 3 columns")
            pcs.append(float(parts[0]))
            nus.append(float(parts[1]))
            eps.append(float(parts[2]) if parts[2] else np.nan)
    if not pcs:
        raise SchemaError(f"{path}: empty landscape grid")
    pc_ax = np.unique(np.array(pcs))
    nu_ax = np.unique(np.array(nus))
    grid = np.full((pc_ax.size, nu_ax.size), np.nan)
    pi = np.searchsorted(pc_ax, pcs)
    ni = np.searchsorted(nu_ax, nus)
    grid[pi, ni] = eps
    if np.all(np.isnan(grid)):
        raise SchemaError(f"{path}: landscape grid holds no finite values")
    return Landscape(pc_ax, nu_ax, grid, str(path))


@dataclass
class BoundaryCurve:
    """One phase-boundary curve: each row is the critical point of one
    sweep line through the probability simplex."""

    pu: np.ndarray
    pmz: np.ndarray
    pc: np.ndarray
    width: np.ndarray
    path: str


def load_boundary(path) -> BoundaryCurve:
    if not os.path.exists(path):
        raise SchemaError(f"boundary CSV {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != BOUNDARY_HEADER:
            raise SchemaError(f"{path}: expected header {BOUNDARY_HEADER!r}")
        rows = [ln.strip().split(",") for ln in fh if ln.strip()]
    if not rows:
        raise SchemaError(f"{path}: boundary table is empty")
    pu, pmz, pc, width = [], [], [], []
    for r in rows:
        if len(r) != 11:
            raise SchemaError(f"{path}: boundary rows need 11 columns")
        try:
            pc.append(float(r[4]))
            width.append(float(r[5]))
            pu.append(float(r[8]))
            pmz.append(float(r[9]))
        except ValueError as exc:
            raise SchemaError(f"{path}: malformed boundary row: {exc}") from exc
    return BoundaryCurve(np.array(pu), np.array(pmz), np.array(pc),
                         np.array(width), str(path))
