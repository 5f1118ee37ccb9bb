"""Entanglement diagnostics: region constructions, the seven-term
topological combination, ancilla and dumbbell entropies, cut profiles.

All diagnostics are integers for a single trajectory; real values only
appear after averaging over trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import LatticeGeometry
from .stabilizer import StabilizerTableau

REGION_TAGS = ("cylinder-quasi1d", "ring", "diagonal", "dumbbell")


@dataclass(frozen=True)
class RegionSet:
    """Three disjoint system-qubit index sets used by seven-term diagnostics."""

    A: tuple
    B: tuple
    C: tuple
    tag: str

    def __post_init__(self):
        a, b, c = set(self.A), set(self.B), set(self.C)
        if a & b or a & c or b & c:
            raise ValueError("regions must be pairwise disjoint")
        object.__setattr__(self, "A", tuple(sorted(a)))
        object.__setattr__(self, "B", tuple(sorted(b)))
        object.__setattr__(self, "C", tuple(sorted(c)))

    def as_lists(self) -> dict:
        return {"tag": self.tag, "A": list(self.A), "B": list(self.B), "C": list(self.C)}


def _ring_cells(geom: LatticeGeometry, margin: int, width: int) -> list:
    L = geom.L
    lo, hi = margin, L - 1 - margin
    if hi - lo + 1 <= 2 * width:
        raise ValueError("ring band does not fit inside the lattice")
    cells = []
    for y in range(lo, hi + 1):
        for x in range(lo, hi + 1):
            edge = min(x - lo, hi - x, y - lo, hi - y)
            if edge < width:
                cells.append((x, y))
    return cells


def make_regions(geom: LatticeGeometry, tag: str, head_size: int = 3,
                 handle_len: int | None = None, ring_margin: int | None = None,
                 ring_width: int = 1) -> RegionSet:
    """Build the A, B, C regions for a diagnostic geometry.

    cylinder-quasi1d: three adjacent width-L/4 cylinders wrapping one cycle.
    ring: a centered square annulus split into three arcs of equal cell
    count (by angle around the lattice center).
    diagonal: three adjacent width-L/4 bands of wrapped 45-degree diagonals.
    dumbbell: two head_size x head_size blocks joined by a width-1 diagonal
    handle; default handle length is min(L/2, L - 2*head_size) so the
    construction fits at every supported L.
    """
    L = geom.L
    if tag == "cylinder-quasi1d":
        if L % 4:
            raise ValueError("cylinder regions need L divisible by 4")
        w = L // 4
        return RegionSet(
            tuple(geom.columns(0, w)), tuple(geom.columns(w, w)),
            tuple(geom.columns(2 * w, w)), tag)
    if tag == "diagonal":
        if L % 4:
            raise ValueError("diagonal regions need L divisible by 4")
        w = L // 4
        return RegionSet(
            tuple(geom.diagonal_band(0, w)), tuple(geom.diagonal_band(w, w)),
            tuple(geom.diagonal_band(2 * w, w)), tag)
    if tag == "ring":
        margin = ring_margin if ring_margin is not None else max(1, L // 8)
        cells = _ring_cells(geom, margin, ring_width)
        cx = cy = (L - 1) / 2.0
        cells.sort(key=lambda xy: math.atan2(xy[1] - cy, xy[0] - cx))
        m = len(cells)
        cut1, cut2 = m // 3, 2 * m // 3
        arcs = [cells[:cut1], cells[cut1:cut2], cells[cut2:]]
        a, b, c = (tuple(geom.index(x, y) for x, y in arc) for arc in arcs)
        return RegionSet(a, b, c, tag)
    if tag == "dumbbell":
        if handle_len is None:
            handle_len = min(L // 2, L - 2 * head_size)
        if handle_len < 1 or 2 * head_size + handle_len > L:
            raise ValueError("dumbbell heads and handle do not fit")
        a = [geom.index(x, y) for x in range(head_size) for y in range(head_size)]
        off = head_size + handle_len
        b = [geom.index(off + x, off + y) for x in range(head_size) for y in range(head_size)]
        handle = [geom.index(head_size + t, head_size + t) for t in range(handle_len)]
        return RegionSet(tuple(a), tuple(b), tuple(handle), tag)
    raise ValueError(f"unknown region tag {tag!r}")


def s_top_seven(state: StabilizerTableau, regions: RegionSet) -> int:
    """S_AB + S_BC + S_AC - S_A - S_B - S_C - S_ABC, all in integer bits."""
    a, b, c = regions.A, regions.B, regions.C
    s = state.entanglement_entropy
    return (s(a + b) + s(b + c) + s(a + c)
            - s(a) - s(b) - s(c) - s(a + b + c))


def s_dumb(state: StabilizerTableau, regions: RegionSet) -> int:
    """Seven-term combination over dumbbell regions (same arithmetic)."""
    return s_top_seven(state, regions)


def s_anc(state: StabilizerTableau, ancilla_indices) -> int:
    """Entropy of the ancilla block; zero when there are no ancillas."""
    idx = tuple(ancilla_indices)
    if not idx:
        return 0
    return state.entanglement_entropy(idx)


def entanglement_profile(state: StabilizerTableau, geom: LatticeGeometry,
                         direction: str = "row") -> np.ndarray:
    """S(l) for cylinder cuts of width l = 1 .. L-1 along one torus cycle.

    Computed in a single GF(2) elimination pass: with columns ordered band
    by band, the pivot count at each band boundary is the rank of that
    column prefix.
    """
    L = geom.L
    if direction == "row":
        order = [geom.index(x, y) for y in range(L) for x in range(L)]
    elif direction == "column":
        order = [geom.index(x, y) for x in range(L) for y in range(L)]
    else:
        raise ValueError("direction must be 'row' or 'column'")
    n = state.n
    cols = np.empty(2 * geom.n, dtype=np.int64)
    for band in range(L):
        sites = order[band * L : (band + 1) * L]
        base = 2 * L * band
        cols[base : base + L] = sites
        cols[base + L : base + 2 * L] = [s + n for s in sites]
    boundaries = np.array([2 * L * l for l in range(1, L)], dtype=np.int64)
    ranks = _kernels.prefix_ranks(state.tab, cols, boundaries)
    widths = np.arange(1, L, dtype=np.int64) * L
    return (ranks - widths).astype(np.int64)


def half_system_entropy(state: StabilizerTableau, geom: LatticeGeometry) -> int:
    """Entropy of the width-L/2 row cylinder."""
    return state.entanglement_entropy(geom.rows(0, geom.L // 2))


@dataclass(frozen=True)
class DiagnosticSample:
    """One diagnostic evaluation: kind, integer value(s), step index, trajectory."""

    kind: str
    value: object
    time: int
    trajectory_id: int


@dataclass
class DiagnosticConfig:
    """Which diagnostic a trajectory samples, plus its geometry options.

    head_size may be the string "scaled" to use max(2, L // 4) heads, which
    keeps the dumbbell geometrically similar across system sizes.
    """

    kind: str  # s_top | s_dumb | s_anc | profile | half_system
    region_tag: str | None = None
    direction: str = "row"
    head_size: object = 3
    handle_len: int | None = None
    options: dict = field(default_factory=dict)

    def resolved_head(self, L: int) -> int:
        if self.head_size == "scaled":
            return max(2, L // 4)
        return int(self.head_size)

    def build(self, geom: LatticeGeometry, ancilla_indices=()):
        """Resolve to a closure state -> value and the region manifest."""
        if self.kind == "s_top":
            tag = self.region_tag or "cylinder-quasi1d"
            regions = make_regions(geom, tag, **self.options)
            return (lambda st: s_top_seven(st, regions)), regions.as_lists()
        if self.kind == "s_dumb":
            regions = make_regions(geom, "dumbbell",
                                   head_size=self.resolved_head(geom.L),
                                   handle_len=self.handle_len)
            return (lambda st: s_top_seven(st, regions)), regions.as_lists()
        if self.kind == "s_anc":
            idx = tuple(ancilla_indices)
            if not idx:
                raise ValueError("s_anc requires ancilla qubits")
            return (lambda st: s_anc(st, idx)), {"ancillas": list(idx)}
        if self.kind == "profile":
            return (lambda st: entanglement_profile(st, geom, self.direction)), \
                {"direction": self.direction}
        if self.kind == "half_system":
            return (lambda st: half_system_entropy(st, geom)), {"width": geom.L // 2}
        raise ValueError(f"unknown diagnostic kind {self.kind!r}")
