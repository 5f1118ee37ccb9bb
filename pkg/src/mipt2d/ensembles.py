"""Unitary ensembles: sign-agnostic Clifford groups and symmetric subgroups.

A sign-agnostic k-qubit Clifford is a 2k x 2k symplectic matrix over GF(2)
acting on Pauli [X | Z] bitstrings by right multiplication (row r is the
image of basis vector r). Uniform sampling and exhaustive enumeration both
go through an explicit bijection between {0, ..., |Sp(2k, 2)| - 1} and the
group, built by the usual recursive hyperbolic-pair extension: pick the
image of the new qubit's X (any nonzero vector), pick the image of its Z
(any vector anticommuting with the first), then recurse on the symplectic
complement.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .stabilizer import PauliString

# Tabulated sign-agnostic Clifford group sizes |Sp(2k, 2)| for k = 1..5.
CLIFFORD_COUNTS = {
    1: 6,
    2: 720,
    3: 1_451_520,
    4: 47_377_612_800,
    5: 24_815_256_521_932_800,
}

ENSEMBLE_KINDS = ("unconstrained", "spt-checkerboard", "sspt-diagonal", "z-preserving")

# Stencil-local qubit order for the five-qubit kinds: center, N, E, S, W.
PLUS_ORDER = ("center", "N", "E", "S", "W")


def symplectic_order(k: int) -> int:
    """|Sp(2k, 2)| = 2^(k^2) * prod_{i=1..k} (4^i - 1)."""
    total = 1
    for i in range(1, k + 1):
        total *= ((1 << (2 * i)) - 1) << (2 * i - 1)
    return total


def count_cliffords(k: int) -> int:
    """Number of sign-agnostic k-qubit Cliffords, k in 1..5."""
    if k not in CLIFFORD_COUNTS:
        raise ValueError(f"k must be in 1..5, got {k}")
    return CLIFFORD_COUNTS[k]


# ---------------------------------------------------------------------------
# integer bit-vector helpers (2k bits, X block low, Z block high)

def _dual(v: int, k: int) -> int:
    """Swap X and Z blocks so that <a, b> = parity(a & dual(b))."""
    mask = (1 << k) - 1
    return ((v >> k) & mask) | ((v & mask) << k)


def _sp(a: int, b: int, k: int) -> int:
    return (a & _dual(b, k)).bit_count() & 1


def _rank_ints(vectors) -> int:
    pivots = {}
    rank = 0
    for v in vectors:
        while v:
            c = v.bit_length() - 1
            p = pivots.get(c)
            if p is None:
                pivots[c] = v
                rank += 1
                break
            v ^= p
    return rank


def _solve_affine(equations, nbits):
    """Solve a GF(2) affine system given as (coefficient mask, rhs bit) pairs.

    Returns (particular solution, list of nullspace basis vectors), or None
    if inconsistent. Free variables are set to zero in the particular
    solution.
    """
    rows = [[m, r] for m, r in equations]
    pivot_rows = {}
    used = [False] * len(rows)
    for c in range(nbits):
        sel = -1
        for i, (m, _) in enumerate(rows):
            if not used[i] and ((m >> c) & 1):
                sel = i
                break
        if sel < 0:
            continue
        used[sel] = True
        pivot_rows[c] = sel
        for i, row in enumerate(rows):
            if i != sel and ((row[0] >> c) & 1):
                row[0] ^= rows[sel][0]
                row[1] ^= rows[sel][1]
    for i, (m, r) in enumerate(rows):
        if m == 0 and r == 1:
            return None
    particular = 0
    for c, i in pivot_rows.items():
        if rows[i][1]:
            particular |= 1 << c
    free_cols = [c for c in range(nbits) if c not in pivot_rows]
    basis = []
    for f in free_cols:
        v = 1 << f
        for c, i in pivot_rows.items():
            if (rows[i][0] >> f) & 1:
                v |= 1 << c
        basis.append(v)
    return particular, basis


def _span(particular: int, basis) -> list:
    out = []
    for combo in range(1 << len(basis)):
        v = particular
        for j in range(len(basis)):
            if (combo >> j) & 1:
                v ^= basis[j]
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# index <-> group element bijection

def _partner_basis_index(a: int, k: int) -> int:
    """Index of the first standard basis vector anticommuting with a."""
    d = _dual(a, k)
    return (d & -d).bit_length() - 1


def _b_from_code(a: int, code: int, k: int) -> int:
    """code in [0, 2^(2k-1)) picks a vector b with <a, b> = 1, bijectively."""
    d = _dual(a, k)
    jstar = (d & -d).bit_length() - 1
    b = 1 << jstar
    ci = 0
    for t in range(2 * k):
        if t == jstar:
            continue
        if (code >> ci) & 1:
            v = 1 << t
            if (d >> t) & 1:
                v ^= 1 << jstar
            b ^= v
        ci += 1
    return b


def _complement_pairs(a: int, b: int, k: int):
    """Canonical hyperbolic basis of the symplectic complement of span{a, b}."""
    pool = []
    for t in range(2 * k):
        v = 1 << t
        if _sp(v, b, k):
            v ^= a
        if _sp(v, a, k):
            v ^= b
        pool.append(v)
    pairs = []
    while len(pairs) < k - 1:
        u = 0
        ui = -1
        for i, v in enumerate(pool):
            if v:
                u, ui = v, i
                break
        wi = -1
        for i in range(ui + 1, len(pool)):
            if _sp(u, pool[i], k):
                wi = i
                break
        w = pool[wi]
        del pool[wi]
        del pool[ui]
        for i, v in enumerate(pool):
            nv = v
            if _sp(v, w, k):
                nv ^= u
            if _sp(v, u, k):
                nv ^= w
            pool[i] = nv
        pairs.append((u, w))
    return pairs


def _rows_from_index(idx: int, k: int):
    """Rows (as ints) of the idx-th symplectic matrix, X images then Z images."""
    n1 = (1 << (2 * k)) - 1
    a = (idx % n1) + 1
    idx //= n1
    n2 = 1 << (2 * k - 1)
    b = _b_from_code(a, idx % n2, k)
    idx //= n2
    if k == 1:
        return [a, b]
    inner = _rows_from_index(idx, k - 1)
    pairs = _complement_pairs(a, b, k)
    rows = []
    for i in range(2 * (k - 1)):
        img = 0
        bits = inner[i]
        for j in range(k - 1):
            if (bits >> j) & 1:
                img ^= pairs[j][0]
            if (bits >> (k - 1 + j)) & 1:
                img ^= pairs[j][1]
        rows.append(img)
    xrows = rows[: k - 1] + [a]
    zrows = rows[k - 1 :] + [b]
    return xrows + zrows


def _rows_to_matrix(rows, k: int) -> np.ndarray:
    mat = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for i, v in enumerate(rows):
        for j in range(2 * k):
            mat[i, j] = (v >> j) & 1
    return mat


def clifford_from_index(idx: int, k: int) -> np.ndarray:
    """The idx-th sign-agnostic Clifford as a (2k, 2k) uint8 symplectic matrix.

    The map is a bijection from range(symplectic_order(k)); sweeping the
    index enumerates the whole group exactly once.
    """
    order = symplectic_order(k)
    if not 0 <= idx < order:
        raise ValueError(f"index out of range for k={k}")
    return _rows_to_matrix(_rows_from_index(idx, k), k)


@dataclass(frozen=True)
class SymplecticClifford:
    """A sign-agnostic Clifford on k qubits as its GF(2) symplectic matrix."""

    k: int
    matrix: np.ndarray  # (2k, 2k) uint8

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.uint8) & 1
        if mat.shape != (2 * self.k, 2 * self.k):
            raise ValueError("matrix shape does not match k")
        object.__setattr__(self, "matrix", mat)

    def is_valid(self) -> bool:
        return gf2.symplectic_check(self.matrix)

    def compose(self, other: "SymplecticClifford") -> "SymplecticClifford":
        """Apply self first, then other (images flow left to right)."""
        prod = (self.matrix.astype(np.int64) @ other.matrix.astype(np.int64)) & 1
        return SymplecticClifford(self.k, prod.astype(np.uint8))

    def inverse(self) -> "SymplecticClifford":
        omega = gf2.symplectic_form(self.k).to_dense().astype(np.int64)
        m = self.matrix.astype(np.int64)
        inv = (omega @ m.T @ omega) & 1
        return SymplecticClifford(self.k, inv.astype(np.uint8))

    def image_of(self, pauli_bits: np.ndarray) -> np.ndarray:
        v = np.asarray(pauli_bits, dtype=np.int64)
        return ((v @ self.matrix.astype(np.int64)) & 1).astype(np.uint8)

    def key(self) -> bytes:
        return np.packbits(self.matrix.reshape(-1), bitorder="little").tobytes()


def sample_clifford(k: int, rng: np.random.Generator) -> SymplecticClifford:
    """Uniform sign-agnostic k-qubit Clifford via the index bijection."""
    if k < 1:
        raise ValueError("k must be positive")
    order = symplectic_order(k)
    idx = int(rng.integers(order)) if order <= (1 << 63) else _big_uniform(order, rng)
    return SymplecticClifford(k, clifford_from_index(idx, k))


def _big_uniform(order: int, rng: np.random.Generator) -> int:
    nbits = order.bit_length()
    while True:
        val = 0
        for _ in range(0, nbits, 32):
            val = (val << 32) | int(rng.integers(1 << 32))
        val &= (1 << nbits) - 1
        if val < order:
            return val


# ---------------------------------------------------------------------------
# symmetry restrictions

def restricted_symmetry_generators(kind: str, k: int) -> list:
    """Symmetry generators restricted to a single stencil, as PauliStrings.

    Five-qubit stencils use the qubit order (center, N, E, S, W). The
    checkerboard symmetry restricts to Z on the center and the Z product on
    the four arms. The diagonal subsystem symmetry restricts to Z on the
    center plus one Z pair for every pair of arms sharing a wrapped +-45
    degree lattice diagonal: (N, E), (E, S), (S, W) and (W, N). Z-preserving
    ensembles conserve each qubit's Z individually.
    """
    if kind == "spt-checkerboard" and k == 5:
        return [
            PauliString.from_support(5, zsites=[0]),
            PauliString.from_support(5, zsites=[1, 2, 3, 4]),
        ]
    if kind == "sspt-diagonal" and k == 5:
        pairs = [(1, 2), (2, 3), (3, 4), (4, 1)]
        gens = [PauliString.from_support(5, zsites=[0])]
        gens.extend(PauliString.from_support(5, zsites=list(p)) for p in pairs)
        return gens
    if kind == "z-preserving" and k in (3, 4):
        return [PauliString.from_support(k, zsites=[q]) for q in range(k)]
    raise ValueError(f"unsupported (kind, k) = ({kind!r}, {k})")


def respects_symmetry(cliff: SymplecticClifford, gens) -> bool:
    """True iff every generator bitstring is mapped exactly to itself."""
    for g in gens:
        if g.n != cliff.k:
            raise ValueError("generator length does not match k")
        if not np.array_equal(cliff.image_of(g.bits), g.bits):
            return False
    return True


class EnsembleTooSparseError(RuntimeError):
    pass


def sample_symmetric_clifford(spec: "EnsembleSpec", rng: np.random.Generator,
                              max_attempts: int = 10**8) -> SymplecticClifford:
    """Rejection-sample a uniform element of the symmetric subgroup.

    Draws uniform k-qubit Cliffords until one fixes every symmetry
    generator. Intended for the checkerboard ensemble, whose subgroup is
    far too large to store; acceptance there is about 1.9e-6 so this is a
    tool for correctness checks and modest sampling runs, not tight loops.
    """
    if spec.kind != "spt-checkerboard":
        raise ValueError("rejection sampling is reserved for spt-checkerboard")
    for _ in range(max_attempts):
        c = sample_clifford(spec.k, rng)
        if respects_symmetry(c, spec.symmetry_generators):
            return c
    raise EnsembleTooSparseError(
        f"no symmetric element found in {max_attempts} attempts"
    )


# ---------------------------------------------------------------------------
# enumerations

def _z_preserving_matrices(k: int) -> np.ndarray:
    """All symplectic matrices fixing every Z_i: count 2^(k(k+1)/2).

    These have identity Z rows and X rows X_i -> X_i + sum_j z[i, j] Z_j
    with z symmetric; they are exactly the group generated by the
    phase-type and controlled-Z-type symplectics.
    """
    npar = k * (k + 1) // 2
    count = 1 << npar
    pairs = [(i, j) for i in range(k) for j in range(i, k)]
    mats = np.zeros((count, 2 * k, 2 * k), dtype=np.uint8)
    mats[:, np.arange(2 * k), np.arange(2 * k)] = 1
    codes = np.arange(count, dtype=np.int64)
    for b, (i, j) in enumerate(pairs):
        on = ((codes >> b) & 1).astype(np.uint8)
        mats[:, i, k + j] ^= on
        if i != j:
            mats[:, j, k + i] ^= on
    return mats


def enumerate_z_preserving(k: int) -> np.ndarray:
    """The full Z-preserving ensemble for the 3-qubit line / 4-qubit square."""
    if k not in (3, 4):
        raise ValueError("z-preserving ensembles are defined for k in {3, 4}")
    return _z_preserving_matrices(k)


def _sspt_z_blocks():
    """All valid images of the five Z basis vectors under the diagonal symmetry.

    Fixing the symmetry generators forces Z_center -> Z_center and pins the
    arm images to an affine family parametrized by the image of Z_N, which
    must commute with every generator (64 candidates); candidates whose five
    images are linearly dependent cannot extend to a symplectic matrix.
    """
    k = 5
    gens = restricted_symmetry_generators("sspt-diagonal", k)
    gen_ints = [g.as_int() for g in gens]
    hom = [( _dual(g, k), 0) for g in gen_ints]
    sol = _solve_affine(hom, 2 * k)
    particular, basis = sol
    z = [1 << (k + q) for q in range(5)]  # Z_c, Z_N, Z_E, Z_S, Z_W
    blocks = []
    for zeta in _span(particular, basis):
        rows = [z[0], zeta, zeta ^ z[1] ^ z[2], zeta ^ z[1] ^ z[3], zeta ^ z[1] ^ z[4]]
        if _rank_ints(rows) == 5:
            blocks.append(rows)
    return blocks


def _complete_symplectic(zrows, k: int) -> np.ndarray:
    """One symplectic matrix whose Z rows are the given isotropic basis."""
    xrows = []
    for i in range(k):
        eqs = [(_dual(zr, k), 1 if j == i else 0) for j, zr in enumerate(zrows)]
        eqs.extend((_dual(xr, k), 0) for xr in xrows)
        sol = _solve_affine(eqs, 2 * k)
        if sol is None:
            raise ValueError("Z block admits no symplectic completion")
        xrows.append(sol[0])
    return _rows_to_matrix(xrows + list(zrows), k)


def enumerate_sspt_table() -> np.ndarray:
    """The complete five-qubit diagonal-subsystem-symmetric ensemble.

    For each admissible Z block, the set of symplectic completions is the
    coset of the Z-preserving group acting on the X rows, so the whole
    ensemble is the union over Z blocks of zp(5) @ M0. The output is
    deduplicated and sorted by packed bit pattern, hence order-stable.
    Cardinality: 48 Z blocks x 2^15 completions = 1,572,864.
    """
    k = 5
    zp = _z_preserving_matrices(k).astype(np.int64)
    chunks = []
    for zrows in _sspt_z_blocks():
        m0 = _complete_symplectic(zrows, k).astype(np.int64)
        chunks.append(((zp @ m0) & 1).astype(np.uint8))
    table = np.concatenate(chunks, axis=0)
    packed = _pack_table(table)
    packed = np.unique(packed, axis=0)
    return _unpack_table(packed, k)


# ---------------------------------------------------------------------------
# table persistence

_MAGIC = b"SSPT"
_FORMAT_VERSION = 1
# magic(4) + version u16 + k u8 + count u64 + payload + crc32 u32
TABLE_OVERHEAD_BYTES = 4 + 2 + 1 + 8 + 4


class TableFormatError(RuntimeError):
    pass


def _pack_table(table: np.ndarray) -> np.ndarray:
    count = table.shape[0]
    flat = table.reshape(count, -1)
    return np.packbits(flat, axis=1, bitorder="little")


def _unpack_table(packed: np.ndarray, k: int) -> np.ndarray:
    count = packed.shape[0]
    nbits = (2 * k) * (2 * k)
    bits = np.unpackbits(packed, axis=1, bitorder="little")[:, :nbits]
    return np.ascontiguousarray(bits.reshape(count, 2 * k, 2 * k))


def element_bytes(k: int) -> int:
    return -(-(2 * k) * (2 * k) // 8)


def store_table(table: np.ndarray, path, k: int) -> None:
    """Write an ensemble table: magic, version, k, count, packed rows, CRC32."""
    packed = _pack_table(np.ascontiguousarray(table, dtype=np.uint8))
    header = _MAGIC + _FORMAT_VERSION.to_bytes(2, "little") + bytes([k])
    header += int(table.shape[0]).to_bytes(8, "little")
    payload = packed.tobytes()
    crc = zlib.crc32(header + payload)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(crc.to_bytes(4, "little"))


def load_table(path):
    """Read an ensemble table; returns (k, table). Validates size and CRC."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < TABLE_OVERHEAD_BYTES or blob[:4] != _MAGIC:
        raise TableFormatError("not an ensemble table file")
    version = int.from_bytes(blob[4:6], "little")
    if version != _FORMAT_VERSION:
        raise TableFormatError(f"unsupported format version {version}")
    k = blob[6]
    count = int.from_bytes(blob[7:15], "little")
    expect = TABLE_OVERHEAD_BYTES + count * element_bytes(k)
    if len(blob) != expect:
        raise TableFormatError(f"file size {len(blob)} does not match header ({expect})")
    payload = blob[15:-4]
    crc = int.from_bytes(blob[-4:], "little")
    if zlib.crc32(blob[:-4]) != crc:
        raise TableFormatError("checksum mismatch")
    packed = np.frombuffer(payload, dtype=np.uint8).reshape(count, element_bytes(k))
    return k, _unpack_table(packed, k)


# ---------------------------------------------------------------------------
# ensemble spec

@dataclass
class EnsembleSpec:
    """A unitary ensemble: kind, stencil, symmetry generators, optional table."""

    kind: str
    k: int
    stencil: str
    symmetry_generators: list = field(default_factory=list)
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "unconstrained" and self.symmetry_generators:
            raise ValueError("unconstrained ensembles carry no symmetry generators")

    def draw_matrix(self, rng: np.random.Generator) -> np.ndarray:
        """One ensemble element as a raw (2k, 2k) uint8 matrix."""
        if self.table is not None:
            return self.table[int(rng.integers(self.table.shape[0]))]
        if self.kind == "unconstrained":
            return sample_clifford(self.k, rng).matrix
        return sample_symmetric_clifford(self, rng).matrix

    def draw_matrices(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """A batch of ensemble elements, shape (count, 2k, 2k)."""
        if count == 0:
            return np.zeros((0, 2 * self.k, 2 * self.k), dtype=np.uint8)
        if self.table is not None:
            idx = rng.integers(self.table.shape[0], size=count)
            return self.table[idx]
        return np.stack([self.draw_matrix(rng) for _ in range(count)])

    def verify_table(self) -> bool:
        """Every stored element must be symplectic and fix the generators."""
        if self.table is None:
            return True
        mats = self.table.astype(np.int64)
        k = self.k
        omega = gf2.symplectic_form(k).to_dense().astype(np.int64)
        conj = np.einsum("nij,jk,nlk->nil", mats, omega, mats) & 1
        if not np.array_equal(conj, np.broadcast_to(omega, conj.shape)):
            return False
        for g in self.symmetry_generators:
            img = (g.bits.astype(np.int64) @ mats) & 1
            if not np.array_equal(img, np.broadcast_to(g.bits.astype(np.int64), img.shape)):
                return False
        return True


def make_ensemble(kind: str, k: int | None = None,
                  table: np.ndarray | None = None) -> EnsembleSpec:
    """Build an EnsembleSpec with the conventional stencil for its kind."""
    if kind == "unconstrained":
        return EnsembleSpec("unconstrained", 5, "plus5")
    if kind == "spt-checkerboard":
        return EnsembleSpec(kind, 5, "plus5", restricted_symmetry_generators(kind, 5))
    if kind == "sspt-diagonal":
        if table is None:
            table = enumerate_sspt_table()
        return EnsembleSpec(kind, 5, "plus5",
                            restricted_symmetry_generators(kind, 5), table)
    if kind == "z-preserving":
        if k not in (3, 4):
            raise ValueError("z-preserving requires k in {3, 4}")
        stencil = "line3" if k == 3 else "square4"
        return EnsembleSpec(kind, k, stencil,
                            restricted_symmetry_generators(kind, k),
                            enumerate_z_preserving(k))
    raise ValueError(f"unknown ensemble kind {kind!r}")
