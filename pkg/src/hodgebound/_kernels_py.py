"""Pure Python / numpy versions of the compiled kernels."""

from __future__ import annotations

import itertools
import math

import numpy as np


def local_subsets(n: int, k: int) -> np.ndarray:
    """Sorted local vertex subsets of size k+1 of an n-simplex."""
    return np.array(list(itertools.combinations(range(n + 1), k + 1)), dtype=np.int64)


def whitney_local(G: np.ndarray, vols: np.ndarray, k: int, n: int) -> np.ndarray:
    """Element mass matrices of lowest-order Whitney k-forms.

    G holds the Gram matrices of barycentric gradients, shape (M, n+1, n+1).
    Returns shape (M, m, m) with m = C(n+1, k+1).
    """
    subs = local_subsets(n, k)
    m = len(subs)
    M = len(vols)
    out = np.zeros((M, m, m))
    c = vols / ((n + 1) * (n + 2))
    scale = math.factorial(k) ** 2
    for s, sig in enumerate(subs):
        for t, tau in enumerate(subs):
            if t < s:
                continue
            acc = np.zeros(M)
            for a in range(k + 1):
                ra = np.delete(sig, a)
                for b in range(k + 1):
                    cb = np.delete(tau, b)
                    if k == 0:
                        det = np.ones(M)
                    else:
                        det = np.linalg.det(G[:, ra][:, :, cb])
                    w = c * (2.0 if sig[a] == tau[b] else 1.0)
                    acc += (-1) ** (a + b) * w * det
            out[:, s, t] = scale * acc
            out[:, t, s] = scale * acc
    return out


def check_csc(n_rows: int, indptr, indices, data) -> None:
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    if len(indptr) < 1 or indptr[0] != 0 or np.any(np.diff(indptr) < 0):
        raise ValueError("indptr must start at 0 and be non-decreasing")
    if indptr[-1] != len(indices) or len(indices) != len(data):
        raise ValueError("indptr, indices and data lengths disagree")
    if len(indices) and (indices.min() < 0 or indices.max() >= n_rows):
        raise ValueError("row index out of range (expected CSC layout)")


def rank_mod_p(n_rows: int, indptr: np.ndarray, indices: np.ndarray, data: np.ndarray, prime: int) -> int:
    """Rank over GF(prime) of a sparse integer matrix in canonical CSC layout.

    Standard column reduction: each column is reduced by earlier pivot
    columns keyed on their lowest nonzero row.
    """
    check_csc(n_rows, indptr, indices, data)
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for j in range(len(indptr) - 1):
        col: dict[int, int] = {}
        for r, v in zip(indices[indptr[j] : indptr[j + 1]], data[indptr[j] : indptr[j + 1]]):
            v = int(v) % prime
            if v:
                col[int(r)] = (col.get(int(r), 0) + v) % prime
        col = {r: v for r, v in col.items() if v}
        while col:
            low = max(col)
            piv = pivots.get(low)
            if piv is None:
                inv = pow(col[low], prime - 2, prime)
                pivots[low] = {r: (v * inv) % prime for r, v in col.items()}
                rank += 1
                break
            f = col[low]
            for r, v in piv.items():
                nv = (col.get(r, 0) - f * v) % prime
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
    return rank
