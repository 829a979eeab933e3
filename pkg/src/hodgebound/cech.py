"""Discrete Cech-de Rham machinery on simplicial meshes.

A cover is a family of cell masks on a parent mesh.  Every element and
every non-empty intersection U_I is the closed subcomplex spanned by its
cells, so restriction of cochains commutes with the coboundary.  Cech
cochains with values in simplicial r-cochains are stored as dicts
{sorted index tuple: parent-length array, zero off U_I}.

With a partition of unity rho_i (vertex weights summing to one) the
operator (K c)_I = sum_i rho_i u c_{iI}, u the simplicial cup product,
satisfies K dhat + dhat K = id exactly, which drives both the global
primitive construction and the gluing of local primitives.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .dec import coboundary, mass_matrix
from .eigensolve import spd_factor
from .meshgen import SimplicialMesh, submesh


class CoverError(ValueError):
    pass


class NotExactError(ValueError):
    """A cochain that should be exact on some piece is not."""


class CechError(RuntimeError):
    """The Cech cocycle left after the descent is not a coboundary."""


# ------------------------------------------------------------------ cover


@dataclass
class Piece:
    index: tuple[int, ...]
    mesh: SimplicialMesh
    parent: list[np.ndarray]  # parent index of each local k-simplex
    masks: list[np.ndarray]  # parent-length k-simplex membership
    diam: float
    vol: float
    _components: tuple[int, np.ndarray] | None = None

    def components(self) -> tuple[int, np.ndarray]:
        """Connected components as labels of local vertices."""
        if self._components is None:
            e = self.mesh.simplices[1]
            nv = self.mesh.num(0)
            A = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(nv, nv))
            self._components = connected_components(A, directed=False)
        return self._components


class Cover:
    """Open cover of a mesh by unions of cells, with its nerve up to a
    given order (order q = (q+1)-fold intersections)."""

    def __init__(self, mesh: SimplicialMesh, masks: Sequence[np.ndarray], max_order: int = 2, level: int = 0):
        self.mesh = mesh
        self.masks = [np.asarray(m, dtype=bool) for m in masks]
        if not self.masks:
            raise CoverError("empty cover")
        covered = np.logical_or.reduce(self.masks)
        if not covered.all():
            raise CoverError(f"{int((~covered).sum())} cells are not covered")
        self.level = level
        self.max_order = max_order
        self._pieces: dict[tuple[int, ...], Piece] = {}
        self.intersections: dict[int, list[tuple[int, ...]]] = {0: [(i,) for i in range(len(self.masks))]}
        for q in range(1, max_order + 1):
            nxt = []
            prev = set(self.intersections[q - 1])
            for I in self.intersections[q - 1]:
                for j in range(I[-1] + 1, len(self.masks)):
                    J = I + (j,)
                    # closed under subsets: every face must already be non-empty
                    if all(J[:k] + J[k + 1 :] in prev for k in range(len(J))):
                        if self.cell_mask(J).any():
                            nxt.append(J)
            self.intersections[q] = nxt

    @property
    def size(self) -> int:
        return len(self.masks)

    def cell_mask(self, I: Sequence[int]) -> np.ndarray:
        m = self.masks[I[0]].copy()
        for i in I[1:]:
            m &= self.masks[i]
        return m

    def nonempty(self, I: Sequence[int]) -> bool:
        I = tuple(sorted(I))
        q = len(I) - 1
        if q in self.intersections:
            return I in set(self.intersections[q])
        return bool(self.cell_mask(I).any())

    def count(self, order: int) -> int:
        """Number of non-empty intersections of the given order."""
        return len(self.intersections.get(order, []))

    def piece(self, I: Sequence[int]) -> Piece:
        I = tuple(sorted(I))
        if I not in self._pieces:
            sub, smap = submesh(self.mesh, self.cell_mask(I))
            masks = []
            for k in range(self.mesh.n + 1):
                m = np.zeros(self.mesh.num(k), dtype=bool)
                m[smap.simplices[k]] = True
                masks.append(m)
            V = sub.vertices
            from scipy.spatial import ConvexHull, QhullError

            try:
                H = V[ConvexHull(V).vertices] if len(V) > self.mesh.n + 1 else V
            except QhullError:
                H = V
            d = H[:, None, :] - H[None, :, :]
            self._pieces[I] = Piece(
                I, sub, smap.simplices, masks, float(np.sqrt((d**2).sum(-1)).max()), sub.volume
            )
        return self._pieces[I]

    def membership_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cell"] + [f"U{i}" for i in range(self.size)])
            for c in range(self.mesh.num(self.mesh.n)):
                w.writerow([c] + [int(m[c]) for m in self.masks])


def cover_from_masks(mesh: SimplicialMesh, masks: Sequence[np.ndarray], max_order: int = 2) -> Cover:
    return Cover(mesh, masks, max_order)


def cover_from_predicates(
    mesh: SimplicialMesh, predicates: Sequence[Callable[[np.ndarray], np.ndarray]], max_order: int = 2
) -> Cover:
    """Element i = cells whose barycenter satisfies predicates[i]."""
    X = mesh.barycenters
    return Cover(mesh, [np.asarray(f(X), dtype=bool) for f in predicates], max_order)


def power_cover(mesh: SimplicialMesh, partition, max_order: int = 2) -> Cover:
    """Fattened power-diagram cells as a cover."""
    from .geometry import fattened_cell_contains

    X = mesh.barycenters
    masks = [fattened_cell_contains(partition, i, X) for i in range(len(partition.cells))]
    return Cover(mesh, masks, max_order)


@dataclass
class SphereCover:
    centers: np.ndarray  # points on the hole sphere
    spacing: float  # r_0 / 4^n
    r0: float
    covers: list[Cover]  # one per dilation level
    N: int
    N_constant: float  # N / (Rh/r0)^(n-1)


def _sphere_candidates(n: int, Rh: float, step: float, center: np.ndarray) -> np.ndarray:
    if n == 2:
        m = max(64, int(math.ceil(2 * math.pi * Rh / step)))
        t = 2 * math.pi * np.arange(m) / m
        return center + Rh * np.column_stack([np.cos(t), np.sin(t)])
    m = int(min(200_000, max(256, math.ceil(4 * math.pi * Rh * Rh / step**2))))
    k = np.arange(m) + 0.5
    z = 1 - 2 * k / m
    phi = math.pi * (1 + 5**0.5) * k
    s = np.sqrt(1 - z * z)
    return center + Rh * np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def farthest_point_net(points: np.ndarray, spacing: float, start: int = 0) -> np.ndarray:
    """Greedy maximal spacing-separated subset (also a spacing-net)."""
    chosen = [start]
    d = np.linalg.norm(points - points[start], axis=1)
    while True:
        j = int(np.argmax(d))
        if d[j] < spacing:
            break
        chosen.append(j)
        d = np.minimum(d, np.linalg.norm(points - points[j], axis=1))
    return np.array(chosen)


def sphere_cover(
    mesh: SimplicialMesh,
    Rc: float,
    Rh: float,
    lam_max: int = 1,
    c: float = 0.25,
    center: Sequence[float] | None = None,
    max_order: int = 2,
) -> SphereCover:
    """Cover by preimages, under radial projection onto the hole sphere, of
    caps of radius 4^lam r_0/4^n around a maximal r_0/4^n-separated set."""
    n = mesh.n
    ctr = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    r0 = c * Rc
    s = r0 / 4**n
    if s < 2 * mesh.h:
        raise CoverError(f"mesh too coarse to resolve r_0: spacing {s:.3g} < 2h = {2 * mesh.h:.3g}")
    cand = _sphere_candidates(n, Rh, s / 8, ctr)
    idx = farthest_point_net(cand, s)
    T = cand[idx]
    X = mesh.barycenters - ctr
    P = ctr + Rh * X / np.linalg.norm(X, axis=1)[:, None]
    tree = cKDTree(T)
    covers = []
    for lam in range(lam_max + 1):
        rad = 4**lam * s
        masks = [np.zeros(mesh.num(n), dtype=bool) for _ in range(len(T))]
        for cell, near in enumerate(tree.query_ball_point(P, rad)):
            for i in near:
                masks[i][cell] = True
        cov = Cover(mesh, masks, max_order, level=lam)
        covers.append(cov)
    N = len(T)
    return SphereCover(T, s, r0, covers, N, N / (Rh / r0) ** (n - 1))


# ---------------------------------------------------- partition of unity


@dataclass
class PartitionOfUnity:
    weights: np.ndarray  # (elements, vertices), columns sum to one
    c_rho: float  # max over elements and cells of |grad rho_i|^2
    grad_sq: np.ndarray = field(repr=False, default=None)  # (elements,) per-element max

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex"] + [f"rho{i}" for i in range(len(self.weights))])
            for v in range(self.weights.shape[1]):
                w.writerow([v] + [repr(float(x)) for x in self.weights[:, v]])


def interior_vertices(mesh: SimplicialMesh, mask: np.ndarray) -> np.ndarray:
    """Vertices all of whose incident cells lie in the mask."""
    nv = mesh.num(0)
    bad = np.zeros(nv, dtype=bool)
    bad[mesh.cells[~mask].ravel()] = True
    touch = np.zeros(nv, dtype=bool)
    touch[mesh.cells[mask].ravel()] = True
    return touch & ~bad


def p1_gradients(mesh: SimplicialMesh, f: np.ndarray) -> np.ndarray:
    """Per-cell gradient of the piecewise linear interpolant of f."""
    P = mesh.vertices[mesh.cells]
    E = P[:, 1:, :] - P[:, :1, :]
    df = f[mesh.cells[:, 1:]] - f[mesh.cells[:, :1]]
    return np.linalg.solve(E, df[..., None])[..., 0]


def partition_of_unity(cover: Cover) -> PartitionOfUnity:
    """Normalized distance bumps: rho_i is proportional to the distance from
    a vertex to the vertices that are not interior to element i."""
    mesh = cover.mesh
    V = mesh.vertices
    W = np.zeros((cover.size, mesh.num(0)))
    for i, m in enumerate(cover.masks):
        inner = interior_vertices(mesh, m)
        outside = ~inner
        if not outside.any():
            W[i] = 1.0
            continue
        d, _ = cKDTree(V[outside]).query(V[inner])
        W[i, inner] = d
    tot = W.sum(axis=0)
    if np.any(tot <= 0):
        raise CoverError(f"{int((tot <= 0).sum())} vertices are interior to no element (uncovered simplex)")
    W /= tot
    g = np.array([np.max(np.einsum("ij,ij->i", G, G)) for G in (p1_gradients(mesh, w) for w in W)])
    return PartitionOfUnity(W, float(g.max()), g)


# ----------------------------------------------------- cochain algebra


def first_vertex(mesh: SimplicialMesh, r: int) -> np.ndarray:
    return mesh.simplices[r][:, 0]


def cup0(mesh: SimplicialMesh, f: np.ndarray, c: np.ndarray, r: int) -> np.ndarray:
    """Cup product of a 0-cochain with an r-cochain (front vertex rule)."""
    return f[first_vertex(mesh, r)] * c


@dataclass
class CechCochain:
    """Cech q-cochain with values in simplicial r-cochains."""

    q: int
    r: int
    values: dict[tuple[int, ...], np.ndarray]

    def __add__(self, other: "CechCochain") -> "CechCochain":
        keys = set(self.values) | set(other.values)
        z = None
        out = {}
        for k in keys:
            a = self.values.get(k)
            b = other.values.get(k)
            if a is None:
                a = np.zeros_like(b) if z is None else z
            if b is None:
                b = np.zeros_like(a)
            out[k] = a + b
        return CechCochain(self.q, self.r, out)

    def scaled(self, s: float) -> "CechCochain":
        return CechCochain(self.q, self.r, {k: s * v for k, v in self.values.items()})

    def norm(self) -> float:
        return math.sqrt(sum(float(v @ v) for v in self.values.values()))


def _sorted_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    if len(set(idx)) < len(idx):
        return 0, ()
    order = np.argsort(idx)
    inv = 0
    a = list(idx)
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            inv += a[i] > a[j]
    return (-1) ** inv, tuple(int(idx[k]) for k in order)


def cech_delta(cover: Cover, c: CechCochain) -> CechCochain:
    """(dhat c)_{i0..i(q+1)} = sum_k (-1)^k c_{..omit i_k..} on U_{i0..i(q+1)}."""
    q = c.q + 1
    out = {}
    size = cover.mesh.num(c.r)
    for J in _keys(cover, q):
        mask = cover.piece(J).masks[c.r]
        acc = np.zeros(size)
        for k in range(len(J)):
            v = c.values.get(J[:k] + J[k + 1 :])
            if v is not None:
                acc += (-1) ** k * v
        out[J] = np.where(mask, acc, 0.0)
    return CechCochain(q, c.r, out)


def _keys(cover: Cover, q: int) -> list[tuple[int, ...]]:
    if q in cover.intersections:
        return cover.intersections[q]
    return [J for J in itertools.combinations(range(cover.size), q + 1) if cover.cell_mask(J).any()]


def cech_d(cover: Cover, c: CechCochain) -> CechCochain:
    """Apply the simplicial coboundary to every component."""
    D = coboundary(cover.mesh, c.r)
    out = {}
    for I, v in c.values.items():
        out[I] = np.where(cover.piece(I).masks[c.r + 1], D @ v, 0.0)
    return CechCochain(c.q, c.r + 1, out)


def homotopy(cover: Cover, pou: PartitionOfUnity, c: CechCochain) -> CechCochain:
    """(K c)_I = sum_i rho_i u c_{iI}; for q = 0 the result is a single
    global cochain stored under the empty index."""
    mesh = cover.mesh
    q = c.q - 1
    keys = [()] if q < 0 else _keys(cover, q)
    size = mesh.num(c.r)
    out = {}
    for I in keys:
        acc = np.zeros(size)
        for i in range(cover.size):
            s, J = _sorted_sign((i,) + tuple(I))
            if s == 0 or J not in c.values:
                continue
            acc += s * cup0(mesh, pou.weights[i], c.values[J], c.r)
        if I:
            acc = np.where(cover.piece(I).masks[c.r], acc, 0.0)
        out[tuple(I)] = acc
    return CechCochain(q, c.r, out)


def restrict(cover: Cover, omega: np.ndarray, r: int, order: int = 0) -> CechCochain:
    keys = _keys(cover, order)
    return CechCochain(order, r, {I: np.where(cover.piece(I).masks[r], omega, 0.0) for I in keys})


# ----------------------------------------------------- local primitives


@dataclass
class LocalPrimitive:
    theta: np.ndarray  # local (p-1)-cochain on the piece
    ratio: float  # ||theta||_M / ||omega||_M
    residual: float  # relative M-norm residual of D theta - omega


def _mnorm(M, x) -> float:
    return math.sqrt(max(float(x @ (M @ x)), 0.0))


def local_primitive(mesh: SimplicialMesh, omega: np.ndarray, p: int, tol: float = 1e-10, refine: int = 30) -> LocalPrimitive:
    """Least M-norm solution of D_{p-1} theta = omega.

    Regularized normal equations (D^T M_p D + delta M_{p-1}) x = D^T M_p r
    keep every update M-orthogonal to ker D, so iterative refinement
    converges to the least-norm primitive.  A residual that stalls means
    omega has a harmonic component, i.e. is not exact on this piece.
    """
    if p < 1:
        raise ValueError("primitives exist for degree >= 1")
    omega = np.asarray(omega, dtype=float)
    D = coboundary(mesh, p - 1)
    Mp = mass_matrix(mesh, p)
    Mq = mass_matrix(mesh, p - 1)
    wn = _mnorm(Mp, omega)
    if wn == 0:
        return LocalPrimitive(np.zeros(mesh.num(p - 1)), 0.0, 0.0)
    K = (D.T @ Mp @ D).tocsc()
    delta = 1e-10 * K.diagonal().sum() / Mq.diagonal().sum()
    lu = spd_factor(K + delta * Mq)
    theta = np.zeros(mesh.num(p - 1))
    res = 1.0
    for _ in range(refine):
        r = omega - D @ theta
        res = _mnorm(Mp, r) / wn
        if res <= tol:
            break
        theta = theta + lu.solve(D.T @ (Mp @ r))
    if res > max(tol, 1e-8):
        raise NotExactError(f"cochain is not exact on the piece (relative residual {res:.2e})")
    return LocalPrimitive(theta, _mnorm(Mq, theta) / wn, res)


def _local_solve(cover: Cover, c: CechCochain) -> CechCochain:
    """Least-norm primitive of every component (values of degree r)."""
    out = {}
    for I, v in c.values.items():
        P = cover.piece(I)
        loc = P.parent[c.r]
        sol = local_primitive(P.mesh, v[loc], c.r)
        full = np.zeros(cover.mesh.num(c.r - 1))
        full[P.parent[c.r - 1]] = sol.theta
        out[I] = full
    return CechCochain(c.q, c.r - 1, out)


def _constants(cover: Cover, c: CechCochain, tol: float) -> dict[tuple, np.ndarray]:
    """Per-component constant values of a locally constant Cech 0-form cochain."""
    out = {}
    for I, v in c.values.items():
        P = cover.piece(I)
        ncomp, lab = P.components()
        loc = v[P.parent[0]]
        vals = np.array([loc[lab == k].mean() for k in range(ncomp)])
        spread = max(float(np.abs(loc - vals[lab]).max()), 0.0)
        scale = max(1.0, float(np.abs(loc).max()))
        if spread > tol * scale:
            raise CechError(f"component of U_{I} is not locally constant (spread {spread:.2e})")
        out[I] = vals
    return out


def _component_of(cover: Cover, I: tuple, J: tuple) -> np.ndarray:
    """For each component of U_J (J contains I), the component of U_I that contains it."""
    PI, PJ = cover.piece(I), cover.piece(J)
    _, labI = PI.components()
    nJ, labJ = PJ.components()
    # a vertex of U_J, looked up in U_I
    pos = {int(v): k for k, v in enumerate(PI.parent[0])}
    out = np.zeros(nJ, dtype=int)
    for k in range(nJ):
        v = int(PJ.parent[0][np.flatnonzero(labJ == k)[0]])
        out[k] = labI[pos[v]]
    return out


def _solve_cech(cover: Cover, a: dict[tuple, np.ndarray], q: int, tol: float) -> tuple[dict[tuple, np.ndarray], float]:
    """Locally constant b on order-(q-1) intersections with dhat b = a."""
    lower = cover.intersections[q - 1]
    col = {}
    for G in lower:
        ncomp, _ = cover.piece(G).components()
        for k in range(ncomp):
            col[(G, k)] = len(col)
    rows, cols, vals, rhs = [], [], [], []
    for H, av in a.items():
        for k in range(len(H)):
            G = H[:k] + H[k + 1 :]
            comp = _component_of(cover, G, H)
            for m in range(len(av)):
                rows.append(len(rhs) + m)
                cols.append(col[(G, int(comp[m]))])
                vals.append((-1) ** k)
        rhs.extend(av.tolist())
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), len(col)))
    y = np.asarray(rhs)
    if len(y) == 0:
        return {G: np.zeros(cover.piece(G).components()[0]) for G in lower}, 0.0
    from scipy.sparse.linalg import lsqr

    x = lsqr(A, y, atol=1e-15, btol=1e-15, iter_lim=20 * len(col) + 100)[0]
    res = float(np.linalg.norm(A @ x - y)) / max(float(np.linalg.norm(y)), 1.0)
    if res > tol:
        raise CechError(f"Cech cocycle is not a coboundary (residual {res:.2e}); "
                        "the cochain is not exact or the cover is not good")
    b = {}
    for G in lower:
        ncomp, _ = cover.piece(G).components()
        b[G] = np.array([x[col[(G, k)]] for k in range(ncomp)])
    return b, res


def _constants_cochain(cover: Cover, b: dict[tuple, np.ndarray], q: int) -> CechCochain:
    out = {}
    for G, vals in b.items():
        P = cover.piece(G)
        _, lab = P.components()
        full = np.zeros(cover.mesh.num(0))
        full[P.parent[0]] = vals[lab]
        out[G] = full
    return CechCochain(q, 0, out)


@dataclass
class Descent:
    """Zig-zag data: theta[j] is a Cech j-cochain of degree p-1-j forms."""

    theta: list[CechCochain]
    constants: dict[tuple, np.ndarray]  # locally constant Cech p-cocycle


def descend(cover: Cover, omega: np.ndarray, p: int, tol: float = 1e-8) -> Descent:
    if cover.max_order < p:
        raise CoverError(f"cover nerve computed to order {cover.max_order}, need {p}")
    thetas = [_local_solve(cover, restrict(cover, omega, p))]
    for j in range(1, p):
        closed = cech_delta(cover, thetas[-1])
        thetas.append(_local_solve(cover, closed))
    top = cech_delta(cover, thetas[-1])
    a = _constants(cover, top, 1e-6) if top.values else {}
    return Descent(thetas, a)


def ascend(cover: Cover, pou: PartitionOfUnity, thetas: list[CechCochain]) -> np.ndarray:
    """Given a descent whose bottom cochain is dhat-closed, return the global
    primitive of the top."""
    tau = thetas[-1]
    for j in range(len(thetas) - 1, 0, -1):
        psi = homotopy(cover, pou, tau)
        dpsi = cech_d(cover, psi)
        nxt = thetas[j - 1]
        tau = CechCochain(nxt.q, nxt.r, {I: nxt.values[I] - dpsi.values.get(I, 0.0) for I in nxt.values})
    return homotopy(cover, pou, tau).values[()]


@dataclass
class PrimitiveResult:
    eta: np.ndarray
    ratio: float  # ||eta||_M / ||omega||_M
    residual: float  # relative M-norm residual of D eta - omega
    cech_residual: float
    meta: dict = field(default_factory=dict)


def _finish(mesh, eta, omega, p, cres, meta) -> PrimitiveResult:
    Mp, Mq = mass_matrix(mesh, p), mass_matrix(mesh, p - 1)
    wn = _mnorm(Mp, omega)
    r = coboundary(mesh, p - 1) @ eta - omega
    return PrimitiveResult(eta, _mnorm(Mq, eta) / wn, _mnorm(Mp, r) / wn, cres, meta)


def cech_primitive(
    mesh: SimplicialMesh, cover: Cover, pou: PartitionOfUnity, omega: np.ndarray, p: int, tol: float = 1e-8
) -> PrimitiveResult:
    """Global primitive of an exact p-cochain assembled from local
    least-norm primitives through the Cech descent."""
    omega = np.asarray(omega, dtype=float)
    if cover.size == 1:
        loc = local_primitive(mesh, omega, p)
        return _finish(mesh, loc.theta, omega, p, 0.0, {"elements": 1})
    desc = descend(cover, omega, p)
    cres = 0.0
    thetas = desc.theta
    if desc.constants:
        b, cres = _solve_cech(cover, desc.constants, p, tol)
        corr = _constants_cochain(cover, b, p - 1)
        last = thetas[-1]
        thetas = thetas[:-1] + [
            CechCochain(last.q, last.r, {I: last.values[I] - corr.values[I] for I in last.values})
        ]
    eta = ascend(cover, pou, thetas)
    return _finish(mesh, eta, omega, p, cres, {"elements": cover.size, "c_rho": pou.c_rho})


@dataclass
class GluedResult:
    phi: np.ndarray  # selected exact p-cochain
    psi: np.ndarray  # glued primitive
    quotient: float  # ||phi||^2 / ||psi||^2
    residual: float
    coefficients: np.ndarray
    constraints: int


def glued_primitive(
    mesh: SimplicialMesh,
    cover: Cover,
    pou: PartitionOfUnity,
    p: int,
    candidates: np.ndarray,
    check_cohomology: bool = True,
) -> GluedResult:
    """Gluing construction for the McGowan-type bounds.

    `candidates` holds exact p-cochains as columns (typically the first
    1 + k_p exact eigencochains).  The descent is linear in its input, so
    the locally constant Cech p-cochain it leaves is a linear function of
    the coefficients; a null vector of that map selects phi for which the
    local primitives glue without constant corrections.
    """
    from .dec import betti

    if p not in (1, 2, 3):
        raise ValueError("p must be 1, 2 or 3")
    if check_cohomology:
        for q in range(1, p):
            for I in cover.intersections.get(p - q, []):
                if betti(cover.piece(I).mesh, q) != 0:
                    raise CoverError(f"H^{q}(U_{I}) is not trivial")
    C = np.atleast_2d(np.asarray(candidates, dtype=float).T).T
    if cover.size == 1:
        phi = C[:, 0]
        loc = local_primitive(mesh, phi, p)
        Mp, Mq = mass_matrix(mesh, p), mass_matrix(mesh, p - 1)
        return GluedResult(phi, loc.theta, _mnorm(Mp, phi) ** 2 / _mnorm(Mq, loc.theta) ** 2, loc.residual, np.array([1.0]), 0)
    descents = [descend(cover, C[:, m], p) for m in range(C.shape[1])]
    keys = sorted(descents[0].constants)
    A = np.array([np.concatenate([d.constants[k] for k in keys]) if keys else np.zeros(0) for d in descents]).T
    if A.size == 0:
        coef = np.zeros(C.shape[1])
        coef[0] = 1.0
    else:
        U, s, Vt = np.linalg.svd(A)
        rank = int((s > 1e-9 * max(s.max(), 1e-300)).sum())
        if rank >= C.shape[1]:
            raise CechError("constraint system has no non-trivial solution in the candidate space")
        coef = Vt[-1]
    thetas = []
    for j in range(p):
        acc = None
        for m, d in enumerate(descents):
            t = d.theta[j].scaled(coef[m])
            acc = t if acc is None else acc + t
        thetas.append(acc)
    phi = C @ coef
    psi = ascend(cover, pou, thetas)
    Mp, Mq = mass_matrix(mesh, p), mass_matrix(mesh, p - 1)
    r = coboundary(mesh, p - 1) @ psi - phi
    pn = _mnorm(Mp, phi)
    return GluedResult(
        phi, psi, pn**2 / _mnorm(Mq, psi) ** 2, _mnorm(Mp, r) / pn, coef, A.shape[0]
    )


__all__ = [
    "Cover",
    "CoverError",
    "CechError",
    "NotExactError",
    "CechCochain",
    "PartitionOfUnity",
    "SphereCover",
    "cover_from_masks",
    "cover_from_predicates",
    "power_cover",
    "sphere_cover",
    "farthest_point_net",
    "partition_of_unity",
    "interior_vertices",
    "cup0",
    "cech_delta",
    "cech_d",
    "homotopy",
    "restrict",
    "local_primitive",
    "cech_primitive",
    "glued_primitive",
    "descend",
    "ascend",
]
