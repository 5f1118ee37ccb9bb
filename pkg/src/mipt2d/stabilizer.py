"""Phase-agnostic stabilizer states.

A pure n-qubit stabilizer state is tracked, up to generator signs, as an
n x 2n GF(2) matrix whose rows are the [X | Z] bitstrings of a generating
set. Signs are deliberately not tracked: all diagnostics used downstream
(ranks, entropies, commutation structure) are sign-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, gf2

_PAULI_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_CHAR_BITS = {v: k for k, v in _PAULI_CHARS.items()}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli, phase-free, as a 2n-bit [X | Z] vector."""

    n: int
    bits: np.ndarray  # uint8, shape (2n,)

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8) & 1
        if bits.shape != (2 * self.n,):
            raise ValueError(f"need {2 * self.n} bits, got shape {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, np.zeros(2 * n, dtype=np.uint8))

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        n = len(label)
        bits = np.zeros(2 * n, dtype=np.uint8)
        for q, ch in enumerate(label.upper()):
            try:
                x, z = _CHAR_BITS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r}") from None
            bits[q] = x
            bits[n + q] = z
        return cls(n, bits)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        bits = np.zeros(2 * n, dtype=np.uint8)
        x, z = _CHAR_BITS[kind.upper()]
        bits[qubit] = x
        bits[n + qubit] = z
        return cls(n, bits)

    @classmethod
    def from_support(cls, n: int, xsites=(), zsites=()) -> "PauliString":
        bits = np.zeros(2 * n, dtype=np.uint8)
        for s in xsites:
            bits[s] ^= 1
        for s in zsites:
            bits[n + s] ^= 1
        return cls(n, bits)

    @property
    def x(self) -> np.ndarray:
        return self.bits[: self.n]

    @property
    def z(self) -> np.ndarray:
        return self.bits[self.n :]

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def is_identity(self) -> bool:
        return not self.bits.any()

    def as_int(self) -> int:
        return int.from_bytes(np.packbits(self.bits, bitorder="little").tobytes(), "little")

    def label(self) -> str:
        return "".join(_PAULI_CHARS[(int(self.x[q]), int(self.z[q]))] for q in range(self.n))

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        return gf2.symplectic_product(self.as_int(), other.as_int(), self.n) == 0

    def mul(self, other: "PauliString") -> "PauliString":
        """Phase-free product, i.e. bitwise XOR."""
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        return PauliString(self.n, self.bits ^ other.bits)

    def __repr__(self):
        return f"PauliString({self.label()!r})"


class StabilizerTableau:
    """Pure stabilizer state on n qubits, generators as uint8 rows.

    The row matrix always has rank n with pairwise commuting rows. Methods
    mutate in place; a tableau is meant to be owned by a single trajectory.
    """

    __slots__ = ("n", "tab")

    def __init__(self, n: int, tab: np.ndarray):
        self.n = n
        self.tab = tab

    @classmethod
    def product_state(cls, n: int, basis: str = "Z") -> "StabilizerTableau":
        """Fresh product state: Z-basis gives {Z_i}, X-basis {X_i}."""
        if n < 1:
            raise ValueError("need at least one qubit")
        tab = np.zeros((n, 2 * n), dtype=np.uint8)
        if basis.upper() == "Z":
            tab[:, n:] = np.eye(n, dtype=np.uint8)
        elif basis.upper() == "X":
            tab[:, :n] = np.eye(n, dtype=np.uint8)
        else:
            raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
        return cls(n, tab)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, self.tab.copy())

    def generators(self) -> gf2.BitMatrix:
        return gf2.BitMatrix.from_dense(self.tab)

    def generator(self, i: int) -> PauliString:
        return PauliString(self.n, self.tab[i].copy())

    def extended(self, extra: int) -> "StabilizerTableau":
        """New tableau with `extra` fresh qubits appended in the Z basis."""
        n2 = self.n + extra
        tab = np.zeros((n2, 2 * n2), dtype=np.uint8)
        tab[: self.n, : self.n] = self.tab[:, : self.n]
        tab[: self.n, n2 : n2 + self.n] = self.tab[:, self.n :]
        for j in range(extra):
            tab[self.n + j, n2 + self.n + j] = 1
        return StabilizerTableau(n2, tab)

    def apply_clifford(self, mat: np.ndarray, support) -> "StabilizerTableau":
        """Conjugate the state by a symplectic matrix on `support` qubits.

        `mat` is (2k, 2k) over GF(2) acting on [X | Z] bit vectors by right
        multiplication; `support` lists k distinct qubit indices in the
        order the matrix expects.
        """
        sites = np.asarray(support, dtype=np.int64)
        k = sites.shape[0]
        if len(set(sites.tolist())) != k:
            raise ValueError("support indices must be distinct")
        if sites.size and (sites.min() < 0 or sites.max() >= self.n):
            raise ValueError("support index out of range")
        mat = np.ascontiguousarray(mat, dtype=np.uint8)
        if mat.shape != (2 * k, 2 * k):
            raise ValueError(f"matrix shape {mat.shape} does not match support size {k}")
        _kernels.apply_symplectic_inplace(self.tab, self.n, sites, mat)
        return self

    def measure_pauli(self, pauli: PauliString) -> str:
        """Project onto the measured Pauli, signs ignored.

        If any generator anticommutes with it, the lowest-index one absorbs
        the others and is replaced by the measured operator ('random').
        Otherwise the state is untouched ('deterministic').
        """
        if pauli.n != self.n:
            raise ValueError("qubit counts differ")
        if pauli.is_identity():
            raise ValueError("cannot measure the identity")
        xsites = np.nonzero(pauli.x)[0].astype(np.int64)
        zsites = np.nonzero(pauli.z)[0].astype(np.int64)
        rnd = _kernels.measure_pauli_inplace(self.tab, self.n, xsites, zsites)
        return "random" if rnd else "deterministic"

    def entanglement_entropy(self, region) -> int:
        """Bipartite entropy in bits: rank of the region columns minus |region|."""
        sites = np.asarray(sorted(set(int(q) for q in region)), dtype=np.int64)
        if sites.size == 0:
            return 0
        if sites.min() < 0 or sites.max() >= self.n:
            raise ValueError("region index out of range")
        cols = np.concatenate([sites, sites + self.n])
        r = int(_kernels.rank_of_columns(self.tab, cols))
        return r - sites.size

    def stabilizes(self, pauli: PauliString) -> bool:
        """True iff the Pauli lies in the row span (sign-agnostic group)."""
        stacked = np.vstack([self.tab, pauli.bits[None, :]])
        return gf2.rank_dense(stacked) == gf2.rank_dense(self.tab)

    def rank(self) -> int:
        return gf2.rank_dense(self.tab)

    def is_valid(self) -> bool:
        """Check the state invariants: full rank and an Abelian row set."""
        if self.rank() != self.n:
            return False
        prods = gf2.pauli_products_matrix(self.tab, self.tab, self.n)
        return not prods.any()

    def to_labels(self) -> list:
        """Debug dump, one generator per line as I/X/Y/Z characters."""
        return [self.generator(i).label() for i in range(self.n)]

    def __repr__(self):
        return f"StabilizerTableau(n={self.n})"
