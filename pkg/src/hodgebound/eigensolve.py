"""Smallest positive generalized eigenvalues of up pencils with explicit
kernel deflation.

The kernel of (D_p^T M D_p, M_p) is ker D_p = range D_{p-1} + harmonic
p-cochains.  Iterates are kept M-orthogonal to range D_{p-1} by an exact
(regularized, iteratively refined) projection; the harmonic part is then
the b_p-dimensional bottom of the projected spectrum and is separated by
count, never by a threshold on "small" eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from .dec import SpectralPencil, betti, coboundary, mass_matrix, rank_exact


class ConvergenceError(RuntimeError):
    pass


class AmbiguousKernelError(RuntimeError):
    """Smallest positive candidate cannot be told apart from the kernel."""


class LadderError(ValueError):
    pass


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, M-orthonormal
    residuals: np.ndarray  # ||K x - lam M x||_{M^-1}
    tol: float
    kernel_dim: int | None
    harmonic: np.ndarray  # columns spanning the harmonic cochains
    deflation_dim: int  # rank D_{p-1} + b_p (p >= 1) or b_0 (p = 0)
    iterations: int
    shift: float
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "eigenvalue", "residual"])
            for i, (lam, r) in enumerate(zip(self.eigenvalues, self.residuals), start=1):
                w.writerow([i, repr(float(lam)), repr(float(r))])


def spd_factor(A: sp.spmatrix):
    """Sparse LU of a symmetric positive definite matrix without pivoting."""
    return splu(
        sp.csc_matrix(A),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options={"SymmetricMode": True},
    )


class RangeProjector:
    """M-orthogonal projection off range(C) for C = D_{p-1}."""

    def __init__(self, C: sp.spmatrix, M: sp.spmatrix, Mlow: sp.spmatrix, refine: int = 8):
        self.C = sp.csr_matrix(C, dtype=float)
        self.M = M
        G = (self.C.T @ M @ self.C).tocsc()
        scale = G.diagonal().sum() / max(Mlow.diagonal().sum(), 1e-300)
        self.delta = 1e-10 * scale
        self.G = G
        self.lu = spd_factor(G + self.delta * Mlow)
        self.refine = refine

    def coefficients(self, X: np.ndarray, refine: int | None = None) -> np.ndarray:
        b = self.C.T @ (self.M @ X)
        y = self.lu.solve(b)
        for _ in range(self.refine if refine is None else refine):
            r = b - self.G @ y
            if np.linalg.norm(r) <= 1e-14 * max(np.linalg.norm(b), 1e-300):
                break
            y = y + self.lu.solve(r)
        return y

    def __call__(self, X: np.ndarray, refine: int | None = None) -> np.ndarray:
        return X - self.C @ self.coefficients(X, refine)


class ComponentProjector:
    """M-orthogonal projection off locally constant 0-cochains."""

    def __init__(self, mesh, M: sp.spmatrix):
        e = mesh.simplices[1]
        adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(mesh.num(0),) * 2)
        ncomp, labels = connected_components(adj, directed=False)
        B = np.zeros((mesh.num(0), ncomp))
        B[np.arange(mesh.num(0)), labels] = 1.0
        norms = np.sqrt(np.einsum("ij,ij->j", B, M @ B))
        self.B = B / norms
        self.M = M
        self.dim = ncomp

    def __call__(self, X: np.ndarray, refine: int | None = None) -> np.ndarray:
        return X - self.B @ (self.B.T @ (self.M @ X))


def _m_orthonormalize(Y: np.ndarray, M: sp.spmatrix, drop: float = 1e-13) -> np.ndarray:
    G = Y.T @ (M @ Y)
    G = 0.5 * (G + G.T)
    s, U = la.eigh(G)
    keep = s > drop * s.max()
    return Y @ (U[:, keep] / np.sqrt(s[keep]))


def smallest_positive(
    pencil: SpectralPencil,
    k: int,
    tol: float = 1e-8,
    maxiter: int = 1000,
    seed: int = 0,
    guard: int | None = None,
    kernel_dim: bool = False,
    b_p: int | None = None,
) -> SpectrumResult:
    """k smallest positive eigenvalues of the pencil with M-orthonormal vectors."""
    if k < 1:
        raise ValueError("k must be at least 1")
    K, M, p, mesh = pencil.K, pencil.M, pencil.p, pencil.mesh
    N = M.shape[0]
    trK, trM = K.diagonal().sum(), M.diagonal().sum()
    sigma = 1e-3 * trK / trM
    if p == 0:
        proj = ComponentProjector(mesh, M)
        nharm = 0
        defl = proj.dim
        rankC = 0
    else:
        C = coboundary(mesh, p - 1)
        proj = RangeProjector(C, M, mass_matrix(mesh, p - 1))
        nharm = betti(mesh, p) if b_p is None else int(b_p)
        rankC = rank_exact(C)
        defl = rankC + nharm
    want = nharm + k
    if guard is None:
        guard = max(8, k)
    m = min(want + guard, N - defl)
    if m < want:
        raise ValueError(f"pencil has only {N - defl} positive eigenvalues")
    lu = spd_factor(K + sigma * M)
    luM = spd_factor(M)
    rng = np.random.default_rng(seed)
    X = proj(rng.standard_normal((N, m)))
    X = _m_orthonormalize(X, M)
    theta = np.zeros(m)
    res = np.full(m, np.inf)
    it = 0
    for it in range(1, maxiter + 1):
        # (K + sigma M)^-1 M maps range D_{p-1} to itself scaled by 1/sigma and
        # preserves M-orthogonality to it, so one unrefined projection per step
        # only has to remove round-off; a refined projection closes the loop
        Y = lu.solve(np.asarray(M @ X))
        Y = proj(Y, refine=0)
        Y = _m_orthonormalize(Y, M)
        Kr = Y.T @ (K @ Y)
        Mr = Y.T @ (M @ Y)
        theta, V = la.eigh(0.5 * (Kr + Kr.T), 0.5 * (Mr + Mr.T))
        X = Y @ V
        R = K @ X - (M @ X) * theta
        res = np.sqrt(np.maximum(np.einsum("ij,ij->j", R, luM.solve(R)), 0.0))
        floor = tol * sigma
        target = np.maximum(tol * np.abs(theta), floor)
        if np.all(res[:want] <= target[:want]):
            break
        if X.shape[1] < want:
            raise ConvergenceError("iteration subspace collapsed")
    else:
        raise ConvergenceError(f"no convergence in {maxiter} iterations (residuals {res[:want]})")
    X = _m_orthonormalize(proj(X), M)
    Kr = X.T @ (K @ X)
    theta, V = la.eigh(0.5 * (Kr + Kr.T))
    X = X @ V
    R = K @ X - (M @ X) * theta
    res = np.sqrt(np.maximum(np.einsum("ij,ij->j", R, luM.solve(R)), 0.0))
    harm = X[:, :nharm]
    lam = theta[nharm:want]
    vec = X[:, nharm:want]
    r = res[nharm:want]
    floor_val = float(np.max(np.abs(theta[:nharm]))) if nharm else 0.0
    if nharm and lam[0] <= 10 * max(tol * sigma, floor_val):
        raise AmbiguousKernelError(
            f"smallest positive candidate {lam[0]:.3e} is within 10x of the deflation floor "
            f"{max(tol * sigma, floor_val):.3e}; refine the mesh"
        )
    if np.any(lam <= 0):
        raise AmbiguousKernelError("non-positive eigenvalue survived deflation")
    kd = None
    if kernel_dim:
        kd = N - rank_exact(coboundary(mesh, p))
    return SpectrumResult(
        eigenvalues=lam,
        eigenvectors=vec,
        residuals=r,
        tol=tol,
        kernel_dim=kd,
        harmonic=harm,
        deflation_dim=defl,
        iterations=it,
        shift=sigma,
        meta={"harmonic_eigenvalues": theta[:nharm], "rank_range": rankC},
    )


@dataclass
class Envelope:
    value: float
    error: float
    monotone: bool
    ladder: list[tuple[float, float]]


def eigen_lower_envelope(
    ladder: Sequence[tuple[float, float]] | Sequence[tuple[float, SpectrumResult]],
    index: int = 0,
    strict: bool = True,
) -> Envelope:
    """Richardson h^2 extrapolation from a refinement ladder of (h, eigenvalue).

    Conforming approximations decrease toward the limit as h shrinks; a
    ladder that increases is flagged (LadderError when strict).
    """
    pts = []
    for h, v in ladder:
        lam = float(v.eigenvalues[index]) if isinstance(v, SpectrumResult) else float(v)
        pts.append((float(h), lam))
    if len(pts) < 3:
        raise LadderError("insufficient levels: need at least 3")
    pts.sort(key=lambda t: -t[0])
    hs = np.array([t[0] for t in pts])
    ls = np.array([t[1] for t in pts])
    if np.any(np.diff(hs) >= 0):
        raise LadderError("h ladder must be strictly decreasing")
    scale = max(np.abs(ls).max(), 1e-300)
    monotone = bool(np.all(np.diff(ls) <= 1e-12 * scale))
    if not monotone and strict:
        raise LadderError(f"non-monotone ladder {ls.tolist()}")

    def rich(i):
        h1, h2 = hs[i] ** 2, hs[i + 1] ** 2
        return (ls[i + 1] * h1 - ls[i] * h2) / (h1 - h2)

    ext = [rich(i) for i in range(len(pts) - 1)]
    value = ext[-1]
    error = abs(ext[-1] - ext[-2])
    return Envelope(float(value), float(error), monotone, pts)
