"""Bit-packed GF(2) linear algebra.

Substrate for Pauli bitstrings, stabilizer generator matrices and symplectic
matrices. Bit vectors of even length 2k follow the block convention
[X bits | Z bits]: bit j is the X component on qubit j, bit k + j the Z
component.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


class BitMatrix:
    """Dense GF(2) matrix, rows packed little-endian into 64-bit words.

    Bit j of row i lives at words[i, j // 64], bit position j % 64. Bits at
    or beyond `cols` in the trailing word of each row are kept zero.
    """

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimensions")
        nwords = max(1, -(-cols // 64))
        if words is None:
            words = np.zeros((rows, nwords), dtype=np.uint64)
        else:
            words = np.ascontiguousarray(words, dtype=np.uint64)
            if words.shape != (rows, nwords):
                raise ValueError(f"expected word shape {(rows, nwords)}, got {words.shape}")
        self.rows = rows
        self.cols = cols
        self.words = words

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        arr = np.asarray(arr, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("expected a 2D array")
        rows, cols = arr.shape
        packed = np.packbits(arr, axis=1, bitorder="little")
        pad = (-packed.shape[1]) % 8
        if pad:
            packed = np.pad(packed, ((0, 0), (0, pad)))
        if cols == 0:
            return cls(rows, 0)
        return cls(rows, cols, packed.view(np.uint64))

    @classmethod
    def from_row_ints(cls, ints, cols: int) -> "BitMatrix":
        m = cls(len(ints), cols)
        limit = 1 << cols
        for i, v in enumerate(ints):
            if not 0 <= v < limit:
                raise ValueError(f"row {i} has bits beyond column {cols}")
            for w in range(m.words.shape[1]):
                m.words[i, w] = (v >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
        return m

    def to_dense(self) -> np.ndarray:
        if self.cols == 0:
            return np.zeros((self.rows, 0), dtype=np.uint8)
        bits = np.unpackbits(self.words.view(np.uint8), axis=1, bitorder="little")
        return np.ascontiguousarray(bits[:, : self.cols])

    def row_int(self, i: int) -> int:
        return int.from_bytes(self.words[i].tobytes(), "little")

    def row_ints(self) -> list:
        return [self.row_int(i) for i in range(self.rows)]

    def get(self, i: int, j: int) -> int:
        return int((self.words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def set(self, i: int, j: int, v: int) -> None:
        if not 0 <= j < self.cols:
            raise IndexError("column out of range")
        mask = np.uint64(1) << np.uint64(j & 63)
        if v & 1:
            self.words[i, j >> 6] |= mask
        else:
            self.words[i, j >> 6] &= ~mask

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.words.copy())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols})"

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        """GF(2) matrix product."""
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        a = self.to_dense().astype(np.int64)
        b = other.to_dense().astype(np.int64)
        return BitMatrix.from_dense((a @ b) & 1)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)


def rank(m: BitMatrix) -> int:
    """GF(2) row rank via Gaussian elimination on a scratch copy."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(_kernels.rank_words(m.words.copy(), m.cols))


def rank_destructive(m: BitMatrix) -> int:
    """Reduce `m` in place to reduced row echelon form; returns the rank."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(_kernels.reduced_echelon_words(m.words, m.cols))


def rank_dense(arr) -> int:
    """Rank of an unpacked 0/1 matrix (uint8 rows), for engine internals."""
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    if arr.size == 0:
        return 0
    cols = np.arange(arr.shape[1], dtype=np.int64)
    return int(_kernels.rank_of_columns(arr, cols))


def symplectic_product(a: int, b: int, k: int) -> int:
    """Commutation bit of two 2k-bit Pauli bitstrings.

    Returns (a_X . b_Z + a_Z . b_X) mod 2 under the [X | Z] block layout;
    0 means the Paulis commute.
    """
    if k < 1:
        raise ValueError("k must be positive")
    limit = 1 << (2 * k)
    if not (0 <= a < limit and 0 <= b < limit):
        raise ValueError("vector does not fit in 2k bits")
    mask = (1 << k) - 1
    p = ((a & (b >> k)) ^ ((a >> k) & b)) & mask
    return p.bit_count() & 1


def symplectic_form(k: int) -> BitMatrix:
    """The form Omega pairing X and Z blocks: Omega = [[0, I], [I, 0]]."""
    dense = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    dense[:k, k:] = np.eye(k, dtype=np.uint8)
    dense[k:, :k] = np.eye(k, dtype=np.uint8)
    return BitMatrix.from_dense(dense)


def symplectic_check(m, k: int | None = None) -> bool:
    """True iff M Omega M^T = Omega over GF(2).

    Accepts a BitMatrix or an unpacked 0/1 array. Raises on non-square or
    odd-dimension input.
    """
    dense = m.to_dense() if isinstance(m, BitMatrix) else np.asarray(m, dtype=np.uint8)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1] or dense.shape[0] % 2:
        raise ValueError("symplectic candidates must be 2k x 2k")
    kk = dense.shape[0] // 2
    if k is not None and k != kk:
        raise ValueError(f"matrix is 2*{kk} square, not 2*{k}")
    omega = symplectic_form(kk).to_dense().astype(np.int64)
    d = dense.astype(np.int64)
    return bool(np.array_equal((d @ omega @ d.T) & 1, omega))


def pauli_products_matrix(rows_a, rows_b, k: int) -> np.ndarray:
    """All pairwise commutation bits between two sets of 2k-bit rows.

    rows are unpacked uint8 arrays of shape (ra, 2k) and (rb, 2k); entry
    [i, j] is the symplectic product of rows_a[i] with rows_b[j].
    """
    a = np.asarray(rows_a, dtype=np.int64)
    b = np.asarray(rows_b, dtype=np.int64)
    ax, az = a[:, :k], a[:, k:]
    bx, bz = b[:, :k], b[:, k:]
    return ((ax @ bz.T) + (az @ bx.T)) & 1
