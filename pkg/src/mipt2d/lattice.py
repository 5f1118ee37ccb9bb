"""Torus geometry and operation stencils.

Sites of the L x L periodic lattice are indexed x + L * y. The five-site
"+" stencil around a center is ordered (center, N, E, S, W) with
N = (x, y+1), E = (x+1, y), wrapping periodically.
"""

from __future__ import annotations

import numpy as np

from .stabilizer import PauliString


class LatticeGeometry:
    """L x L torus of qubits. L must be even and at least 4 so the
    checkerboard sublattices and cluster stabilizers close globally."""

    __slots__ = ("L", "n")

    def __init__(self, L: int):
        if L < 4 or L % 2:
            raise ValueError(f"L must be even and >= 4, got {L}")
        self.L = L
        self.n = L * L

    def index(self, x: int, y: int) -> int:
        return (x % self.L) + self.L * (y % self.L)

    def coords(self, i: int):
        return i % self.L, i // self.L

    def stencil_sites(self, center) -> tuple:
        """The "+" stencil: center plus its four wrapped neighbors."""
        x, y = center if isinstance(center, tuple) else self.coords(center)
        return (
            self.index(x, y),
            self.index(x, y + 1),
            self.index(x + 1, y),
            self.index(x, y - 1),
            self.index(x - 1, y),
        )

    def line_sites(self, center, horizontal: bool) -> tuple:
        x, y = center if isinstance(center, tuple) else self.coords(center)
        if horizontal:
            return (self.index(x, y), self.index(x + 1, y), self.index(x - 1, y))
        return (self.index(x, y), self.index(x, y + 1), self.index(x, y - 1))

    def square_sites(self, center) -> tuple:
        x, y = center if isinstance(center, tuple) else self.coords(center)
        return (
            self.index(x, y),
            self.index(x + 1, y),
            self.index(x, y + 1),
            self.index(x + 1, y + 1),
        )

    def plus_table(self) -> np.ndarray:
        """(n, 5) table of stencil_sites for every center, kernel-ready."""
        out = np.empty((self.n, 5), dtype=np.int64)
        for c in range(self.n):
            out[c] = self.stencil_sites(c)
        return out

    def line_tables(self):
        """Horizontal and vertical 3-site line tables, each (n, 3)."""
        h = np.empty((self.n, 3), dtype=np.int64)
        v = np.empty((self.n, 3), dtype=np.int64)
        for c in range(self.n):
            h[c] = self.line_sites(c, True)
            v[c] = self.line_sites(c, False)
        return h, v

    def square_table(self) -> np.ndarray:
        out = np.empty((self.n, 4), dtype=np.int64)
        for c in range(self.n):
            out[c] = self.square_sites(c)
        return out

    def cluster_stabilizer(self, center, total_qubits: int | None = None) -> PauliString:
        """Z on the center, X on its four neighbors (weight five)."""
        n = total_qubits if total_qubits is not None else self.n
        sites = self.stencil_sites(center)
        return PauliString.from_support(n, xsites=sites[1:], zsites=[sites[0]])

    def rows(self, y0: int, width: int) -> list:
        """Sites of the cylinder spanning rows y0 .. y0+width-1 (wrapped)."""
        return [self.index(x, y0 + dy) for dy in range(width) for x in range(self.L)]

    def columns(self, x0: int, width: int) -> list:
        return [self.index(x0 + dx, y) for dx in range(width) for y in range(self.L)]

    def diagonal_band(self, d0: int, width: int) -> list:
        """Sites whose wrapped diagonal coordinate (x - y) mod L lies in the band."""
        wanted = {(d0 + d) % self.L for d in range(width)}
        return [self.index(x, y) for y in range(self.L) for x in range(self.L)
                if (x - y) % self.L in wanted]

    def __repr__(self):
        return f"LatticeGeometry(L={self.L})"
