"""Discrete exterior calculus on simplicial meshes with Whitney forms.

Cochains live on sorted-orientation simplices.  The coboundary D_p maps
p-cochains to (p+1)-cochains, the mass matrix M_p is the L2 Gram matrix of
lowest-order Whitney p-forms, and the up pencil (D_p^T M_{p+1} D_p, M_p)
discretizes the exact (p+1)-spectrum with absolute boundary conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import kernels
from .meshgen import MeshError, SimplicialMesh, lookup_rows

PRIME = 2_147_483_647  # 2^31 - 1


class BettiAmbiguityError(RuntimeError):
    """Numerical rank could not be separated from zero; refine or use exact."""


class DeRhamError(ValueError):
    """A sampled form was not finite on some simplices."""

    def __init__(self, message: str, simplices: np.ndarray):
        super().__init__(message)
        self.simplices = simplices


@dataclass
class Cochain:
    degree: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(eq=False)
class SpectralPencil:
    K: sp.csr_matrix
    M: sp.csr_matrix
    p: int
    mesh: SimplicialMesh
    D: sp.csr_matrix = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return self.M.shape[0]


def _cache(mesh: SimplicialMesh) -> dict:
    c = getattr(mesh, "_dec_cache", None)
    if c is None:
        c = {}
        mesh._dec_cache = c
    return c


def coboundary(mesh: SimplicialMesh, p: int) -> sp.csr_matrix:
    """Signed incidence matrix D_p, integer valued, shape (n_{p+1}, n_p)."""
    if not 0 <= p <= mesh.n:
        raise ValueError(f"degree {p} outside 0..{mesh.n}")
    cache = _cache(mesh)
    key = ("D", p)
    if key not in cache:
        if p == mesh.n:
            cache[key] = sp.csr_matrix((0, mesh.num(p)), dtype=np.int64)
        else:
            rows, cols, signs = mesh.incidence(p)
            cache[key] = sp.csr_matrix(
                (signs.astype(np.int64), (rows, cols)), shape=(mesh.num(p + 1), mesh.num(p))
            )
    return cache[key]


def barycentric_gradients(mesh: SimplicialMesh) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of barycentric coordinates per cell (sorted vertex order)
    and unsigned cell volumes."""
    cache = _cache(mesh)
    if "grad" not in cache:
        n = mesh.n
        S = mesh.simplices[n]
        P = mesh.vertices[S]
        E = np.transpose(P[:, 1:, :] - P[:, :1, :], (0, 2, 1))  # columns are edges
        det = np.linalg.det(E)
        if np.any(np.abs(det) <= 0):
            raise MeshError("inverted", "degenerate element in mass assembly")
        Einv = np.linalg.inv(E)
        g = np.empty((len(S), n + 1, n))
        g[:, 1:, :] = Einv
        g[:, 0, :] = -Einv.sum(axis=1)
        cache["grad"] = (g, np.abs(det) / math.factorial(n))
    return cache["grad"]


def _local_to_global(mesh: SimplicialMesh, k: int) -> np.ndarray:
    cache = _cache(mesh)
    key = ("l2g", k)
    if key not in cache:
        S = mesh.simplices[mesh.n]
        subs = kernels.local_subsets(mesh.n, k)
        rows = S[:, subs].reshape(-1, k + 1)
        idx = lookup_rows(mesh.simplices[k], rows)
        cache[key] = idx.reshape(len(S), len(subs))
    return cache[key]


def mass_matrix(mesh: SimplicialMesh, p: int) -> sp.csr_matrix:
    """L2 Gram matrix of lowest-order Whitney p-forms (exact integration)."""
    if not 0 <= p <= mesh.n:
        raise ValueError(f"degree {p} outside 0..{mesh.n}")
    cache = _cache(mesh)
    key = ("M", p)
    if key not in cache:
        g, vol = barycentric_gradients(mesh)
        G = np.einsum("eik,ejk->eij", g, g)
        loc = kernels.whitney_local(np.ascontiguousarray(G), np.ascontiguousarray(vol), p, mesh.n)
        l2g = _local_to_global(mesh, p)
        m = l2g.shape[1]
        rows = np.repeat(l2g, m, axis=1).ravel()
        cols = np.tile(l2g, (1, m)).ravel()
        M = sp.csr_matrix((np.asarray(loc).ravel(), (rows, cols)), shape=(mesh.num(p), mesh.num(p)))
        M = 0.5 * (M + M.T)
        cache[key] = M.tocsr()
    return cache[key]


def up_pencil(mesh: SimplicialMesh, p: int) -> SpectralPencil:
    """(D_p^T M_{p+1} D_p, M_p) for p in 0..n-1."""
    if not 0 <= p < mesh.n:
        raise ValueError(f"up pencil needs 0 <= p < {mesh.n}")
    D = coboundary(mesh, p).astype(float)
    K = (D.T @ mass_matrix(mesh, p + 1) @ D).tocsr()
    K = 0.5 * (K + K.T)
    return SpectralPencil(K.tocsr(), mass_matrix(mesh, p), p, mesh, D.tocsr())


def rayleigh(pencil: SpectralPencil, theta) -> float:
    x = theta.values if isinstance(theta, Cochain) else np.asarray(theta, dtype=float)
    den = float(x @ (pencil.M @ x))
    if not den > 0:
        raise ValueError("Rayleigh quotient of the zero cochain")
    return float(x @ (pencil.K @ x)) / den


# ------------------------------------------------------------------ Betti


def rank_exact(D: sp.spmatrix) -> int:
    """Rank over GF(2^31-1); equals the rational rank for boundary matrices of
    complexes embedded in R^2 or R^3 (their homology is torsion-free)."""
    if D.shape[0] == 0 or D.shape[1] == 0:
        return 0
    # reduce the smaller side as columns
    A = sp.csc_matrix(D.T if D.shape[1] > D.shape[0] else D, dtype=np.int64)
    A.sum_duplicates()
    A.sort_indices()
    return int(kernels.rank_mod_p(A.shape[0], A.indptr, A.indices, A.data, PRIME))


def _numeric_kernel_dim(L: sp.spmatrix, max_k: int = 30) -> int:
    from scipy.sparse.linalg import eigsh

    N = L.shape[0]
    if N <= 2000:
        w = np.linalg.eigvalsh(L.toarray())
    else:
        k = min(max_k, N - 2)
        w = np.sort(eigsh(L.tocsc(), k=k, sigma=-1e-3, which="LM", return_eigenvectors=False))
    scale = max(1.0, float(np.abs(L).max()))
    zero = w < 1e-8 * scale
    nz = int(zero.sum())
    if nz == len(w):
        raise BettiAmbiguityError("all computed eigenvalues vanish; kernel larger than probe")
    top_zero = float(w[zero].max()) if nz else 0.0
    first = float(w[nz])
    if first < 1e-6 * scale or (nz and first < 1e4 * max(top_zero, 1e-16 * scale)):
        raise BettiAmbiguityError(
            f"no clear spectral gap (last zero {top_zero:.3e}, first nonzero {first:.3e}); refine"
        )
    return nz


def betti(mesh: SimplicialMesh, p: int, method: str = "auto", exact_limit: int = 200_000) -> int:
    """b_p = n_p - rank D_p - rank D_{p-1}."""
    if not 0 <= p <= mesh.n:
        raise ValueError(f"degree {p} outside 0..{mesh.n}")
    size = mesh.num(p) + (mesh.num(p + 1) if p < mesh.n else 0)
    if method == "exact" or (method == "auto" and size <= exact_limit):
        r_up = rank_exact(coboundary(mesh, p)) if p < mesh.n else 0
        r_down = rank_exact(coboundary(mesh, p - 1)) if p > 0 else 0
        return mesh.num(p) - r_up - r_down
    # combinatorial Hodge Laplacian kernel with gap verification
    L = sp.csr_matrix((mesh.num(p), mesh.num(p)))
    if p < mesh.n:
        D = coboundary(mesh, p).astype(float)
        L = L + D.T @ D
    if p > 0:
        Dm = coboundary(mesh, p - 1).astype(float)
        L = L + Dm @ Dm.T
    return _numeric_kernel_dim(L)


def betti_numbers(mesh: SimplicialMesh) -> tuple[int, ...]:
    return tuple(betti(mesh, p) for p in range(mesh.n + 1))


# ------------------------------------------------------------- de Rham map


@lru_cache(maxsize=None)
def grundmann_moeller(dim: int, s: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Grundmann-Moeller rule of degree 2s+1 on the unit dim-simplex.

    Returns barycentric points (m, dim+1) and weights summing to one.
    """
    if dim == 0:
        return np.ones((1, 1)), np.ones(1)
    d = 2 * s + 1
    pts, wts = [], []
    for i in range(s + 1):
        w = (-1) ** i * 2.0 ** (-2 * s) * (d + dim - 2 * i) ** d
        w /= math.factorial(i) * math.factorial(d + dim - i)
        w *= math.factorial(dim)
        total = s - i
        for beta in _compositions(total, dim + 1):
            pts.append([(2 * b + 1) / (d + dim - 2 * i) for b in beta])
            wts.append(w)
    return np.array(pts), np.array(wts)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _sorted_minors(E: np.ndarray, p: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """det of the p x p minors of E (shape (m, p, n), rows are edge vectors)
    for each sorted coordinate multi-index."""
    import itertools

    n = E.shape[2]
    idx = list(itertools.combinations(range(n), p))
    dets = np.stack([np.linalg.det(E[:, :, list(I)]) for I in idx], axis=1)
    return idx, dets


def de_rham_sample(mesh: SimplicialMesh, form, s: int = 2) -> Cochain:
    """Integrate a form over every p-simplex with a degree-(2s+1) rule.

    `form.evaluate(x)` returns, for x of shape (m, n), the components of the
    p-form in the basis dx_I (I sorted), shape (m, C(n, p)); for p = 0 a
    shape (m,) array is also accepted.
    """
    p = form.degree
    if p > mesh.n:
        raise ValueError("form degree exceeds mesh dimension")
    S = mesh.simplices[p]
    P = mesh.vertices[S]  # (m, p+1, n)
    bary, w = grundmann_moeller(p, s)
    X = np.einsum("qi,mid->mqd", bary, P)  # quadrature points
    vals = np.asarray(form.evaluate(X.reshape(-1, mesh.n)), dtype=float)
    if p == 0:
        vals = vals.reshape(len(S), 1)
        out = vals[:, 0]
    else:
        vals = vals.reshape(len(S), len(w), -1)
        E = P[:, 1:, :] - P[:, :1, :]
        _, minors = _sorted_minors(E, p)  # (m, C(n,p))
        integrand = np.einsum("mqc,mc->mq", vals, minors)
        # the unit simplex has volume 1/p!
        out = integrand @ w / math.factorial(p)
    bad = ~np.isfinite(out)
    if bad.any():
        raise DeRhamError(f"{int(bad.sum())} simplices hit a singular point", np.nonzero(bad)[0])
    return Cochain(p, out)


@dataclass
class FunctionForm:
    """Adapter turning a callable into a form usable by de_rham_sample."""

    degree: int
    fn: Callable[[np.ndarray], np.ndarray]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.fn(x)


def export_coo(A: sp.spmatrix, path) -> None:
    """Write a sparse matrix as 'row col value' lines."""
    C = sp.coo_matrix(A)
    with open(path, "w") as fh:
        fh.write(f"# {C.shape[0]} {C.shape[1]} {C.nnz}\n")
        for r, c, v in zip(C.row, C.col, C.data):
            fh.write(f"{r} {c} {v:.17g}\n")
