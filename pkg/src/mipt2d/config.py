"""Experiment configuration: a flat key=value file with optional repeated
[line] blocks for boundary scans. Every run emits a frozen echo of its
configuration in the manifest.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .circuit import OperationMix, Schedule
from .diagnostics import DiagnosticConfig
from .ensembles import EnsembleSpec, load_table, make_ensemble
from .sweep import SweepPoint

DIAGNOSTICS = ("s_top", "s_dumb", "s_anc", "profile", "half_system")
AXES = ("pu", "pmz")
FIXABLE = ("pu", "pmz", "pms")


class ConfigError(ValueError):
    """Invalid configuration; message carries line/field context."""


@dataclass
class SweepLine:
    axis: str
    fixed_key: str
    fixed_value: float
    p_values: list

    def mix_for(self, p: float) -> OperationMix:
        parts = {"pu": None, "pmz": None, "pms": None}
        parts[self.axis] = p
        parts[self.fixed_key] = self.fixed_value
        free = [k for k, v in parts.items() if v is None]
        if len(free) != 1:
            raise ConfigError(f"axis {self.axis!r} and fixed {self.fixed_key!r} overlap")
        rest = 1.0 - p - self.fixed_value
        if -1e-9 < rest < 0.0:
            rest = 0.0  # simplex-edge grid points lose a few ulps
        parts[free[0]] = rest
        try:
            return OperationMix(parts["pu"], parts["pmz"], parts["pms"])
        except ValueError as exc:
            raise ConfigError(f"p={p} on line {self.describe()} leaves an invalid "
                              f"operation mix: {exc}") from exc

    def describe(self) -> str:
        return f"axis={self.axis},{self.fixed_key}={self.fixed_value}"


@dataclass
class ExperimentConfig:
    Ls: list
    line: SweepLine
    ensemble_kind: str
    trajectories: int
    seed: int
    out_dir: str
    workers: int = 1
    diagnostic: str = "s_top"
    region_tag: str | None = None
    direction: str = "row"
    head_size: object = 3  # int or "scaled"
    handle_len: int | None = None
    ensemble_k: int | None = None
    ensemble_table: str | None = None
    warmup_frac: float = 0.25
    interval_spec: str = "L2"
    total_spec: str = "L4"
    raw_samples: bool = False
    ancillas: int = 0
    scramble_spec: str = "L4"
    extra_lines: list = field(default_factory=list)

    def schedule_for(self, L: int) -> Schedule:
        total = _steps_spec(self.total_spec, L)
        interval = _steps_spec(self.interval_spec, L)
        warmup = int(round(self.warmup_frac * total))
        return Schedule(warmup=warmup, interval=interval, total=total)

    def scramble_for(self, L: int):
        return _steps_spec(self.scramble_spec, L) if self.ancillas else None

    def sweep_points(self, line: SweepLine | None = None) -> list:
        line = line or self.line
        pts = []
        idx = 0
        for L in self.Ls:
            for p in line.p_values:
                pts.append(SweepPoint(idx, L, p, line.mix_for(p)))
                idx += 1
        return pts

    def build_ensemble(self) -> EnsembleSpec:
        table = None
        if self.ensemble_table:
            k, table = load_table(self.ensemble_table)
            if self.ensemble_kind == "sspt-diagonal" and k != 5:
                raise ConfigError("sspt-diagonal tables must have k=5")
        return make_ensemble(self.ensemble_kind, k=self.ensemble_k, table=table)

    def build_diagnostic(self) -> DiagnosticConfig:
        return DiagnosticConfig(self.diagnostic, region_tag=self.region_tag,
                                direction=self.direction, head_size=self.head_size,
                                handle_len=self.handle_len)

    def geometry_tag(self) -> str:
        if self.diagnostic == "s_top":
            return self.region_tag or "cylinder-quasi1d"
        if self.diagnostic == "s_dumb":
            return "dumbbell"
        if self.diagnostic == "s_anc":
            return "ancilla"
        if self.diagnostic == "profile":
            return f"profile-{self.direction}"
        return "half-system"

    def region_manifest(self) -> dict:
        from .lattice import LatticeGeometry

        out = {}
        if self.diagnostic in ("s_top", "s_dumb"):
            for L in self.Ls:
                _, manifest = self.build_diagnostic().build(LatticeGeometry(L))
                out[str(L)] = manifest
        return out

    def ensemble_checksum(self) -> str:
        if self.ensemble_table:
            h = hashlib.sha256()
            with open(self.ensemble_table, "rb") as fh:
                h.update(fh.read())
            return h.hexdigest()
        return "builtin"

    def echo(self) -> dict:
        return {
            "L": list(self.Ls),
            "axis": self.line.axis,
            "fixed": f"{self.line.fixed_key}={self.line.fixed_value}",
            "p": list(self.line.p_values),
            "ensemble": self.ensemble_kind,
            "ensemble_k": self.ensemble_k,
            "ensemble_table": self.ensemble_table,
            "diagnostic": self.diagnostic,
            "region": self.region_tag,
            "direction": self.direction,
            "head_size": self.head_size,
            "handle_len": self.handle_len,
            "trajectories": self.trajectories,
            "seed": self.seed,
            "workers": self.workers,
            "warmup_frac": self.warmup_frac,
            "interval": self.interval_spec,
            "total": self.total_spec,
            "ancillas": self.ancillas,
            "scramble": self.scramble_spec,
            "raw": self.raw_samples,
            "out": self.out_dir,
        }


def _steps_spec(spec: str, L: int) -> int:
    s = str(spec).strip().upper()
    if s == "L2":
        return L * L
    if s == "L4":
        return L**4
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"step count must be 'L2', 'L4' or an integer, got {spec!r}")


def _parse_fixed(text: str, lineno: int) -> tuple:
    if "=" not in text:
        raise ConfigError(f"line {lineno}: fixed must look like 'pmz=0.0'")
    key, _, val = text.partition("=")
    key = key.strip()
    if key not in FIXABLE:
        raise ConfigError(f"line {lineno}: fixed key must be one of {FIXABLE}, got {key!r}")
    try:
        return key, float(val)
    except ValueError:
        raise ConfigError(f"line {lineno}: fixed value {val!r} is not a number")


def _parse_floats(text: str, lineno: int, field_name: str) -> list:
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"line {lineno}: field {field_name!r} holds a non-number")
    if not vals:
        raise ConfigError(f"line {lineno}: field {field_name!r} is empty")
    return vals


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse config text; raises ConfigError naming the offending line/field."""
    flat = {}
    lines_blocks = []
    current = flat
    flat_linenos = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[line]":
            current = {}
            lines_blocks.append((lineno, current))
            continue
        if line.startswith("["):
            raise ConfigError(f"line {lineno}: unknown section {line!r}")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        current[key] = (val.strip(), lineno)
        if current is flat:
            flat_linenos[key] = lineno
    if overrides:
        for k, v in overrides.items():
            if v is not None:
                flat[k] = (str(v), 0)

    def need(key):
        if key not in flat:
            raise ConfigError(f"missing required field {key!r}")
        return flat[key]

    def get(key, default=None):
        return flat.get(key, (default, 0))[0]

    def parse_line_block(block, where):
        for req in ("axis", "fixed", "p"):
            if req not in block:
                raise ConfigError(f"{where}: missing field {req!r}")
        axis, ln_a = block["axis"]
        axis = axis.strip().lower()
        if axis not in AXES:
            raise ConfigError(f"line {ln_a}: axis must be one of {AXES}, got {axis!r}")
        fky, fval = _parse_fixed(block["fixed"][0], block["fixed"][1])
        if fky == axis:
            raise ConfigError(f"line {block['fixed'][1]}: fixed key equals the axis")
        pv, ln_p = block["p"]
        p_values = _parse_floats(pv, ln_p, "p")
        if any(b <= a for a, b in zip(p_values, p_values[1:])):
            raise ConfigError(f"line {ln_p}: p grid must be strictly increasing")
        sl = SweepLine(axis, fky, fval, p_values)
        for p in p_values:
            sl.mix_for(p)  # validates every grid point
        return sl

    ens, ln = need("ensemble")
    ensemble_kind = ens.strip().lower()
    Ls_raw, ln_l = need("l")
    try:
        Ls = [int(v) for v in Ls_raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"line {ln_l}: field 'L' holds a non-integer")
    for L in Ls:
        if L < 4 or L % 2:
            raise ConfigError(f"line {ln_l}: L must be even and >= 4, got {L}")

    main_line = None
    if "axis" in flat or "fixed" in flat or "p" in flat:
        main_line = parse_line_block(
            {k: flat[k] for k in ("axis", "fixed", "p") if k in flat}, "config")
    extra = [parse_line_block(block, f"[line] at line {ln}")
             for ln, block in lines_blocks]
    if main_line is None:
        if not extra:
            raise ConfigError("no sweep line: provide axis/fixed/p or [line] blocks")
        main_line = extra[0]

    diagnostic = get("diagnostic", "s_top").strip().lower()
    if diagnostic not in DIAGNOSTICS:
        raise ConfigError(f"diagnostic must be one of {DIAGNOSTICS}, got {diagnostic!r}")

    def parse_int(key, default):
        raw = get(key, None)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"field {key!r} must be an integer, got {raw!r}")

    head_raw = get("head_size", "3").strip().lower()
    if head_raw != "scaled":
        try:
            head_raw = int(head_raw)
        except ValueError:
            raise ConfigError(f"head_size must be an integer or 'scaled', got {head_raw!r}")
    handle = get("handle_len", None)
    cfg = ExperimentConfig(
        Ls=Ls,
        line=main_line,
        ensemble_kind=ensemble_kind,
        trajectories=parse_int("trajectories", 100),
        seed=parse_int("seed", 1),
        out_dir=get("out", "runs/out"),
        workers=parse_int("workers", 1),
        diagnostic=diagnostic,
        region_tag=get("region", None),
        direction=get("direction", "row"),
        head_size=head_raw,
        handle_len=int(handle) if handle is not None else None,
        ensemble_k=parse_int("ensemble_k", None) if get("ensemble_k") else None,
        ensemble_table=get("ensemble_table", None),
        warmup_frac=float(get("warmup_frac", 0.25)),
        interval_spec=get("interval", "L2"),
        total_spec=get("total", "L4"),
        raw_samples=str(get("raw", "false")).strip().lower() in ("1", "true", "yes"),
        ancillas=parse_int("ancillas", 0),
        scramble_spec=get("scramble", "L4"),
        extra_lines=extra,
    )
    if cfg.ensemble_kind not in ("unconstrained", "spt-checkerboard",
                                 "sspt-diagonal", "z-preserving"):
        raise ConfigError(f"unknown ensemble {cfg.ensemble_kind!r}")
    if cfg.ensemble_kind == "z-preserving" and cfg.ensemble_k not in (3, 4):
        raise ConfigError("z-preserving needs ensemble_k = 3 or 4")
    if cfg.trajectories < 0:
        raise ConfigError("trajectories must be nonnegative")
    if cfg.diagnostic == "s_anc" and cfg.ancillas < 1:
        raise ConfigError("s_anc runs need ancillas >= 1")
    return cfg


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)
