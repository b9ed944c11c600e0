"""Vectorized exact kernels for GF(p) enumeration workloads.

Everything here is integer arithmetic mod p in int64 numpy arrays; no
floating point is involved.  Used by the span-enumeration operations when the
batch is large enough to amortize the numpy overhead; the pure-Python paths
in matrix.py/spans.py remain the reference implementation.
"""

from __future__ import annotations

import numpy as np

# p*p must stay well inside int64 during elimination; desk-scale fields are tiny
MAX_BATCH_PRIME = 1 << 15


def inverse_table(p: int) -> np.ndarray:
    """inv[x] = x^-1 mod p for x in 1..p-1 (inv[0] unused)."""
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(x, p - 2, p) for x in range(1, p)]
    return inv


def batched_rank_mod_p(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a (B, m, n) int64 batch of matrices over GF(p)."""
    a = np.ascontiguousarray(mats % p)
    if a.ndim != 3:
        raise ValueError("expected a (B, m, n) array")
    nb, m, n = a.shape
    if m == 0 or n == 0 or nb == 0:
        return np.zeros(nb, dtype=np.int64)
    inv = inverse_table(p)
    piv = np.zeros(nb, dtype=np.int64)
    rows = np.arange(m)
    for col in range(n):
        colvals = a[:, :, col]
        cand = (colvals != 0) & (rows[None, :] >= piv[:, None])
        has = cand.any(axis=1)
        idx = np.flatnonzero(has & (piv < m))
        if idx.size == 0:
            continue
        first = np.argmax(cand[idx], axis=1)
        r = piv[idx]
        # swap the found row into pivot position
        tmp = a[idx, first, :].copy()
        a[idx, first, :] = a[idx, r, :]
        a[idx, r, :] = tmp
        pr = (a[idx, r, :] * inv[a[idx, r, col]][:, None]) % p
        factors = a[idx, :, col]
        a[idx] = (a[idx] - factors[:, :, None] * pr[:, None, :]) % p
        a[idx, r, :] = pr
        piv[idx] = r + 1
    return piv


def projective_vectors(q: int, dim: int):
    """All nonzero coefficient vectors over GF(q) with leading coefficient 1.

    One representative per projective point: (q^dim - 1)/(q - 1) tuples,
    in a fixed deterministic order.
    """
    from itertools import product

    for lead in range(dim):
        for tail in product(range(q), repeat=dim - lead - 1):
            yield (0,) * lead + (1,) + tail


def projective_count(q: int, dim: int) -> int:
    return (q**dim - 1) // (q - 1)


def projective_array(q: int, dim: int) -> np.ndarray:
    """projective_vectors as an (N, dim) int64 array (same order)."""
    out = np.empty((projective_count(q, dim), dim), dtype=np.int64)
    for i, v in enumerate(projective_vectors(q, dim)):
        out[i] = v
    return out
