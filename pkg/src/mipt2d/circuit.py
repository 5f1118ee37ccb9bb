"""Monitored-circuit engine: one operation per timestep on the torus.

Each timestep draws an operation type from (p_u, p_mz, p_ms) and a uniform
system-qubit center, then either applies an ensemble unitary on the
center's stencil, measures Z on the center, or measures the five-body
cluster stabilizer there. Trajectories are pure functions of their
configuration and seed; the random stream is consumed in fixed-size
batches (type floats, centers, then per-batch unitary draws) so results
never depend on worker scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .diagnostics import DiagnosticConfig, DiagnosticSample
from .ensembles import EnsembleSpec, sample_clifford
from .lattice import LatticeGeometry
from .stabilizer import StabilizerTableau


@dataclass(frozen=True)
class OperationMix:
    """Probabilities of (unitary, Z measurement, stabilizer measurement)."""

    p_u: float
    p_mz: float
    p_ms: float

    def __post_init__(self):
        if min(self.p_u, self.p_mz, self.p_ms) < 0:
            raise ValueError("probabilities must be nonnegative")
        if abs(self.p_u + self.p_mz + self.p_ms - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to one")


@dataclass(frozen=True)
class Schedule:
    """Warmup steps, sampling interval, and total steps of a trajectory."""

    warmup: int
    interval: int
    total: int

    def __post_init__(self):
        if self.warmup >= self.total:
            raise ValueError("warmup must be smaller than total")
        if self.interval < 1:
            raise ValueError("interval must be at least one step")

    @classmethod
    def default(cls, L: int) -> "Schedule":
        """Warmup L^4/4, sample every L^2 steps, stop at L^4 steps."""
        return cls(L**4 // 4, L**2, L**4)

    def sample_times(self) -> list:
        return list(range(self.warmup + self.interval, self.total + 1, self.interval))


@dataclass
class TrajectoryConfig:
    geometry: LatticeGeometry
    mix: OperationMix
    ensemble: EnsembleSpec
    schedule: Schedule
    diagnostic: DiagnosticConfig
    seed: int
    trajectory_id: int = 0
    stream_key: tuple | None = None  # defaults to (trajectory_id,)
    n_ancillas: int = 0
    scramble_steps: int | None = None
    validate_every: int = 0  # invariant checks each N steps (0 = off)


@dataclass(frozen=True)
class StepRecord:
    kind: str  # unitary | measure_z | measure_stabilizer
    center: int
    outcome: str | None  # deterministic | random | None for unitaries


class _StencilTables:
    """Per-geometry site tables shared by batched stepping."""

    def __init__(self, geom: LatticeGeometry, ensemble: EnsembleSpec):
        self.plus = geom.plus_table()
        self.ensemble = ensemble
        if ensemble.stencil == "plus5":
            self.unitary = (self.plus,)
        elif ensemble.stencil == "line3":
            self.unitary = geom.line_tables()
        elif ensemble.stencil == "square4":
            self.unitary = (geom.square_table(),)
        else:
            raise ValueError(f"unknown stencil {ensemble.stencil!r}")

    def unitary_sites(self, centers: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if len(self.unitary) == 1:
            return self.unitary[0][centers]
        # 3-site line: orientation drawn uniformly per application
        horiz = rng.integers(0, 2, size=centers.shape[0])
        h, v = self.unitary
        return np.where(horiz[:, None].astype(bool), h[centers], v[centers])


def _draw_batch(mix: OperationMix, n_sys: int, count: int, rng: np.random.Generator):
    u = rng.random(count)
    centers = rng.integers(0, n_sys, size=count).astype(np.int64)
    codes = np.full(count, 1, dtype=np.int64)  # default: stabilizer measurement
    codes[u < mix.p_u + mix.p_mz] = 0
    codes[u < mix.p_u] = 2
    return codes, centers


def run_steps(state: StabilizerTableau, geom: LatticeGeometry, mix: OperationMix,
              ensemble: EnsembleSpec, rng: np.random.Generator, nsteps: int,
              tables: _StencilTables | None = None, batch: int | None = None) -> int:
    """Advance the state by nsteps operations; returns nondeterministic count."""
    if tables is None:
        tables = _StencilTables(geom, ensemble)
    if batch is None:
        batch = geom.L * geom.L
    nrand = 0
    done = 0
    while done < nsteps:
        b = min(batch, nsteps - done)
        codes, centers = _draw_batch(mix, geom.n, b, rng)
        uidx = np.nonzero(codes == 2)[0]
        umats = ensemble.draw_matrices(rng, uidx.size)
        usites = tables.unitary_sites(centers[uidx], rng) if uidx.size else \
            np.zeros((0, 2), dtype=np.int64)
        nrand += int(_kernels.run_op_batch(state.tab, state.n, codes, centers,
                                           tables.plus, umats, usites))
        done += b
    return nrand


def step(state: StabilizerTableau, geom: LatticeGeometry, mix: OperationMix,
         ensemble: EnsembleSpec, rng: np.random.Generator) -> StepRecord:
    """Apply exactly one operation and report what happened."""
    u = float(rng.random())
    center = int(rng.integers(geom.n))
    if u < mix.p_u:
        mat = ensemble.draw_matrices(rng, 1)[0]
        if ensemble.stencil == "plus5":
            sites = geom.stencil_sites(center)
        elif ensemble.stencil == "line3":
            sites = geom.line_sites(center, bool(rng.integers(0, 2)))
        else:
            sites = geom.square_sites(center)
        state.apply_clifford(mat, sites)
        return StepRecord("unitary", center, None)
    if u < mix.p_u + mix.p_mz:
        zs = np.array([center], dtype=np.int64)
        rnd = _kernels.measure_pauli_inplace(state.tab, state.n,
                                             np.empty(0, dtype=np.int64), zs)
        return StepRecord("measure_z", center, "random" if rnd else "deterministic")
    sites = geom.stencil_sites(center)
    xs = np.array(sites[1:], dtype=np.int64)
    zs = np.array([sites[0]], dtype=np.int64)
    rnd = _kernels.measure_pauli_inplace(state.tab, state.n, xs, zs)
    return StepRecord("measure_stabilizer", center, "random" if rnd else "deterministic")


def scramble_with_ancillas(state: StabilizerTableau, n_anc: int, steps: int,
                           rng: np.random.Generator) -> StabilizerTableau:
    """Append ancillas and entangle them with unconstrained 5-qubit Cliffords
    on uniformly random 5-subsets of all qubits, ignoring geometry."""
    if n_anc < 1:
        raise ValueError("need at least one ancilla")
    out = state.extended(n_anc)
    total = out.n
    batch = 256
    done = 0
    while done < steps:
        b = min(batch, steps - done)
        scores = rng.random((b, total))
        sites = np.sort(np.argpartition(scores, 5, axis=1)[:, :5], axis=1).astype(np.int64)
        mats = np.stack([sample_clifford(5, rng).matrix for _ in range(b)])
        codes = np.full(b, 2, dtype=np.int64)
        centers = np.zeros(b, dtype=np.int64)
        _kernels.run_op_batch(out.tab, out.n, codes, centers,
                              np.zeros((1, 5), dtype=np.int64), mats, sites)
        done += b
    return out


def run_trajectory(cfg: TrajectoryConfig) -> list:
    """Execute one monitored trajectory and return its diagnostic samples.

    Deterministic given (cfg, seed): the stream is seeded from
    (seed, stream_key) alone, with stream_key defaulting to
    (trajectory_id,).
    """
    key = cfg.stream_key if cfg.stream_key is not None else (cfg.trajectory_id,)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=key))
    geom = cfg.geometry
    state = StabilizerTableau.product_state(geom.n, "Z")
    anc_indices = ()
    if cfg.n_ancillas:
        t_scramble = cfg.scramble_steps if cfg.scramble_steps is not None else geom.L**4
        state = scramble_with_ancillas(state, cfg.n_ancillas, t_scramble, rng)
        anc_indices = tuple(range(geom.n, geom.n + cfg.n_ancillas))
    measure, _ = cfg.diagnostic.build(geom, anc_indices)
    tables = _StencilTables(geom, cfg.ensemble)
    sched = cfg.schedule
    samples = []
    t = 0
    next_check = cfg.validate_every if cfg.validate_every else None
    for target in [sched.warmup] + sched.sample_times():
        if target > t:
            run_steps(state, geom, cfg.mix, cfg.ensemble, rng, target - t, tables)
            t = target
        if next_check is not None and t >= next_check:
            if not state.is_valid():
                raise AssertionError(f"tableau invariants violated at step {t}")
            next_check += cfg.validate_every
        if t > sched.warmup:
            samples.append(DiagnosticSample(cfg.diagnostic.kind, measure(state),
                                            t, cfg.trajectory_id))
    return samples
