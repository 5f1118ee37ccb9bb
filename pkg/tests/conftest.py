"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's jitted kernels: rank is
schoolbook elimination on plain integer arrays, and states are rebuilt as
dense vectors/density matrices so entropies and measurements can be checked
against first principles.
"""

import numpy as np
import pytest

from mipt2d.ensembles import clifford_from_index, symplectic_order

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def naive_rank(matrix) -> int:
    """Fraction-free GF(2) elimination on an unpacked 0/1 array."""
    m = (np.array(matrix, dtype=np.int64) & 1).copy()
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i, c]:
                piv = i
                break
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def pauli_matrix(bits, n) -> np.ndarray:
    """Hermitian matrix of a phase-free Pauli bitstring (Y for X&Z overlap).

    Qubit 0 is the least significant basis-index bit, matching the axis
    convention of dense_entropy.
    """
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        x, z = bits[q], bits[n + q]
        ch = "I" if not x and not z else ("X" if x and not z else ("Z" if z and not x else "Y"))
        out = np.kron(_PAULI_MATS[ch], out)
    return out


def dense_state_from_tableau(tab) -> np.ndarray:
    """Statevector stabilized (up to signs) by every generator row.

    Projects a generic vector onto the joint +1 eigenspace of the
    Hermitian representatives of the rows; for a valid tableau that space
    is one-dimensional.
    """
    n = tab.n
    dim = 1 << n
    proj = np.eye(dim, dtype=complex)
    for i in range(n):
        P = pauli_matrix(tab.tab[i], n)
        proj = proj @ (np.eye(dim, dtype=complex) + P) / 2.0
    # any column of the projector spans the stabilized state
    col = np.argmax(np.linalg.norm(proj, axis=0))
    vec = proj[:, col]
    norm = np.linalg.norm(vec)
    assert norm > 1e-9, "tableau does not stabilize a unique state"
    return vec / norm


def dense_entropy(vec, region, n) -> float:
    """Von Neumann entropy (bits) of a region of a dense pure state."""
    region = sorted(region)
    rest = [q for q in range(n) if q not in region]
    # qubit 0 is the least significant axis in our bitstring convention
    perm = region + rest
    tensor = vec.reshape([2] * n, order="F").transpose(perm)
    mat = tensor.reshape(2 ** len(region), 2 ** len(rest), order="C")
    rho = mat @ mat.conj().T
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-12]
    return float(-(evals * np.log2(evals)).sum())


def random_tableau(n, rng):
    """Uniform random sign-free stabilizer state on n qubits."""
    from mipt2d.stabilizer import StabilizerTableau

    order = symplectic_order(n)
    idx = int(rng.integers(order)) if order < (1 << 63) else None
    if idx is None:
        idx = 0
        for _ in range(3):
            idx = (idx << 40) | int(rng.integers(1 << 40))
        idx %= order
    mat = clifford_from_index(idx, n)
    st = StabilizerTableau.product_state(n, "Z")
    st.apply_clifford(mat, list(range(n)))
    return st


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture(scope="session")
def sspt_table():
    from mipt2d.ensembles import enumerate_sspt_table

    return enumerate_sspt_table()
