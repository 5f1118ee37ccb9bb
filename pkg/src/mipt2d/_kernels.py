"""Jitted GF(2) kernels shared by the tableau engine and the gf2 API.

Everything here operates on plain integer numpy arrays so the functions
stay trivially cacheable and fork-safe for worker pools.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_ONE = np.uint64(1)


@njit(cache=True)
def rank_words(words, ncols):
    """Row rank over GF(2) of a row-packed word matrix. Destroys `words`.

    `words` is (rows, nwords) uint64 with bit j of row i at
    words[i, j >> 6] bit (j & 63). Columns beyond `ncols` must be zero.
    """
    nrows, nwords = words.shape
    r = 0
    for c in range(ncols):
        w = c >> 6
        b = np.uint64(c & 63)
        piv = -1
        for i in range(r, nrows):
            if (words[i, w] >> b) & _ONE:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(nwords):
                t = words[r, j]
                words[r, j] = words[piv, j]
                words[piv, j] = t
        for i in range(piv + 1, nrows):
            if (words[i, w] >> b) & _ONE:
                for j in range(w, nwords):
                    words[i, j] ^= words[r, j]
        r += 1
        if r == nrows:
            break
    return r


@njit(cache=True)
def reduced_echelon_words(words, ncols):
    """In-place reduced row echelon form over GF(2); returns the rank."""
    nrows, nwords = words.shape
    r = 0
    for c in range(ncols):
        w = c >> 6
        b = np.uint64(c & 63)
        piv = -1
        for i in range(r, nrows):
            if (words[i, w] >> b) & _ONE:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(nwords):
                t = words[r, j]
                words[r, j] = words[piv, j]
                words[piv, j] = t
        for i in range(nrows):
            if i != r and ((words[i, w] >> b) & _ONE):
                for j in range(nwords):
                    words[i, j] ^= words[r, j]
        r += 1
        if r == nrows:
            break
    return r


@njit(cache=True)
def pack_columns(tab, cols):
    """Pack selected uint8 columns of `tab` into row-major uint64 words."""
    nrows = tab.shape[0]
    m = cols.shape[0]
    nwords = (m + 63) >> 6
    out = np.zeros((nrows, nwords), dtype=np.uint64)
    for i in range(nrows):
        for j in range(m):
            if tab[i, cols[j]]:
                out[i, j >> 6] |= _ONE << np.uint64(j & 63)
    return out


@njit(cache=True)
def rank_of_columns(tab, cols):
    """Rank over GF(2) of `tab` restricted to the given columns."""
    words = pack_columns(tab, cols)
    return rank_words(words, cols.shape[0])


@njit(cache=True)
def prefix_ranks(tab, cols, boundaries):
    """Ranks of the column prefixes cols[:boundaries[j]] in one elimination.

    Exploits the invariant that after eliminating the first c columns the
    pivot count equals the rank of that column prefix. Saves one full
    elimination per cut when sweeping nested regions.
    """
    words = pack_columns(tab, cols)
    nrows, nwords = words.shape
    ncols = cols.shape[0]
    out = np.zeros(boundaries.shape[0], dtype=np.int64)
    bi = 0
    r = 0
    for c in range(ncols):
        while bi < boundaries.shape[0] and boundaries[bi] == c:
            out[bi] = r
            bi += 1
        w = c >> 6
        b = np.uint64(c & 63)
        piv = -1
        for i in range(r, nrows):
            if (words[i, w] >> b) & _ONE:
                piv = i
                break
        if piv >= 0:
            if piv != r:
                for j in range(nwords):
                    t = words[r, j]
                    words[r, j] = words[piv, j]
                    words[piv, j] = t
            for i in range(piv + 1, nrows):
                if (words[i, w] >> b) & _ONE:
                    for j in range(w, nwords):
                        words[i, j] ^= words[r, j]
            r += 1
            if r == nrows:
                break
    while bi < boundaries.shape[0]:
        out[bi] = r
        bi += 1
    return out


@njit(cache=True)
def measure_pauli_inplace(tab, n, xsites, zsites):
    """Sign-agnostic projective measurement of a sparse Pauli.

    The Pauli has X support on `xsites` and Z support on `zsites` (a site in
    both lists is a Y factor). Rows anticommuting with it are folded into the
    lowest such row, which is then replaced by the measured operator.
    Returns 1 if the outcome was nondeterministic, 0 otherwise.
    """
    nrows = tab.shape[0]
    q1 = -1
    for i in range(nrows):
        par = 0
        for s in xsites:
            par ^= tab[i, n + s]
        for s in zsites:
            par ^= tab[i, s]
        if par:
            if q1 < 0:
                q1 = i
            else:
                for j in range(tab.shape[1]):
                    tab[i, j] ^= tab[q1, j]
    if q1 < 0:
        return 0
    for j in range(tab.shape[1]):
        tab[q1, j] = 0
    for s in xsites:
        tab[q1, s] = 1
    for s in zsites:
        tab[q1, n + s] ^= 1
    return 1


@njit(cache=True)
def apply_symplectic_inplace(tab, n, sites, mat):
    """Conjugate every generator row by the symplectic `mat` on `sites`.

    mat is (2k, 2k) uint8 acting on [X-block | Z-block] bit vectors by
    v -> v @ mat, i.e. row r of mat is the image of basis vector r.
    """
    nrows = tab.shape[0]
    k = sites.shape[0]
    kk = 2 * k
    v = np.empty(kk, dtype=np.uint8)
    for i in range(nrows):
        for a in range(k):
            v[a] = tab[i, sites[a]]
            v[k + a] = tab[i, n + sites[a]]
        for a in range(k):
            xb = np.uint8(0)
            zb = np.uint8(0)
            for b in range(kk):
                if v[b]:
                    xb ^= mat[b, a]
                    zb ^= mat[b, k + a]
            tab[i, sites[a]] = xb
            tab[i, n + sites[a]] = zb
    return


@njit(cache=True)
def run_op_batch(tab, n, codes, centers, plus_sites, umats, usites):
    """Apply one batch of circuit operations in order.

    codes: 0 = Z measurement at center, 1 = cluster-stabilizer measurement
    on the plus stencil, 2 = unitary (consumes the next row of
    umats/usites). Returns the number of nondeterministic outcomes.
    """
    nrand = 0
    ui = 0
    xs1 = np.empty(0, dtype=np.int64)
    for t in range(codes.shape[0]):
        code = codes[t]
        c = centers[t]
        if code == 0:
            zs = np.empty(1, dtype=np.int64)
            zs[0] = c
            nrand += measure_pauli_inplace(tab, n, xs1, zs)
        elif code == 1:
            xs = plus_sites[c, 1:]
            zs = np.empty(1, dtype=np.int64)
            zs[0] = plus_sites[c, 0]
            nrand += measure_pauli_inplace(tab, n, xs, zs)
        else:
            apply_symplectic_inplace(tab, n, usites[ui], umats[ui])
            ui += 1
    return nrand
