"""Simplicial meshes: generation, validation, file round trips, submeshes.

Orientation convention: every k-simplex is stored with its vertex indices
sorted ascending, and that sorted order is its orientation.  Top cells are
additionally kept with a positive-volume vertex order in ``cells``.

Boundary tags: -1 outer boundary, k >= 0 boundary of hole k, -2 an
artificial cut (facets created by taking a submesh).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

OUTER = -1
CUT = -2


class MeshError(ValueError):
    """Mesh generation or validation failure, with a machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"[{code}] {message}")
        self.code = code


def _signed_volumes(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    n = vertices.shape[1]
    if cells.shape[1] != n + 1:
        raise MeshError("parse", f"cells must have {n + 1} vertices in dimension {n}")
    p = vertices[cells]
    J = p[:, 1:, :] - p[:, :1, :]
    return np.linalg.det(J) / math.factorial(n)


def _row_keys(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    return a.view(np.dtype((np.void, a.dtype.itemsize * a.shape[1]))).ravel()


def lookup_rows(table: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Index of each row of `rows` inside the lexicographically sorted `table`
    (both int arrays with the same width); -1 when absent."""
    if len(rows) == 0:
        return np.zeros(0, dtype=np.int64)
    tk = _row_keys(table)
    rk = _row_keys(rows)
    order = np.argsort(tk)
    pos = np.searchsorted(tk[order], rk)
    pos = np.clip(pos, 0, len(tk) - 1)
    found = tk[order][pos] == rk
    out = np.where(found, order[pos], -1)
    return out.astype(np.int64)


class SimplicialMesh:
    """Pure simplicial n-complex embedded in R^n (n = 2 or 3)."""

    def __init__(
        self,
        vertices: np.ndarray,
        cells: np.ndarray,
        boundary_tags: dict[int, int] | np.ndarray | None = None,
        orient: bool = True,
        check: bool = True,
    ):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        cells = np.ascontiguousarray(cells, dtype=np.int64)
        self.n = self.vertices.shape[1]
        if cells.ndim != 2 or len(cells) == 0:
            raise MeshError("empty", "mesh has no cells")
        vol = _signed_volumes(self.vertices, cells)
        if orient:
            flip = vol < 0
            cells = cells.copy()
            cells[flip, 0], cells[flip, 1] = cells[flip, 1], cells[flip, 0].copy()
            vol = np.abs(vol)
        self.cells = cells
        self.volumes = vol
        if check:
            self._validate()
        self._build_faces()
        bf = self.boundary_facets
        if boundary_tags is None:
            self.boundary_tags = np.full(len(bf), OUTER, dtype=np.int64)
        elif isinstance(boundary_tags, dict):
            pos = {int(f): k for k, f in enumerate(bf)}
            tags = np.full(len(bf), OUTER, dtype=np.int64)
            for f, t in boundary_tags.items():
                if int(f) not in pos:
                    raise MeshError("dangling", f"tagged facet {f} is not on the boundary")
                tags[pos[int(f)]] = t
            self.boundary_tags = tags
        else:
            self.boundary_tags = np.asarray(boundary_tags, dtype=np.int64)
            if len(self.boundary_tags) != len(bf):
                raise MeshError("parse", "boundary tag count does not match boundary facets")

    # ---------------------------------------------------------------- checks
    def _validate(self) -> None:
        cells, n = self.cells, self.n
        if cells.min() < 0 or cells.max() >= len(self.vertices):
            raise MeshError("parse", "cell references a missing vertex")
        if np.any(np.sort(cells, axis=1)[:, 1:] == np.sort(cells, axis=1)[:, :-1]):
            raise MeshError("inverted", "cell with a repeated vertex")
        scale = np.abs(self.vertices).max() + 1.0
        if np.any(self.volumes <= 1e-14 * scale**n):
            bad = int(np.argmin(self.volumes))
            raise MeshError("inverted", f"cell {bad} has non-positive signed volume")
        used = np.zeros(len(self.vertices), dtype=bool)
        used[cells.ravel()] = True
        if not used.all():
            raise MeshError("dangling", f"{int((~used).sum())} vertices belong to no cell")
        srt = np.sort(cells, axis=1)
        if len(np.unique(_row_keys(srt))) != len(srt):
            raise MeshError("duplicate", "a cell is listed more than once")
        # induced orientation on facets: each interior facet must be seen with
        # both signs exactly once
        facets, signs = [], []
        for i in range(n + 1):
            f = np.delete(cells, i, axis=1)
            s = np.full(len(cells), (-1) ** i)
            # sign of the permutation sorting f
            order = np.argsort(f, axis=1)
            s = s * _perm_sign(order)
            facets.append(np.sort(f, axis=1))
            signs.append(s)
        F = np.vstack(facets)
        S = np.concatenate(signs)
        _, inv, counts = np.unique(_row_keys(F), return_inverse=True, return_counts=True)
        if counts.max() > 2:
            raise MeshError("dangling", "a facet is shared by more than two cells")
        tot = np.zeros(len(counts), dtype=np.int64)
        np.add.at(tot, inv.ravel(), S)
        if np.any((counts == 2) & (tot != 0)):
            raise MeshError("orientation", "adjacent cells induce the same facet orientation")

    # ----------------------------------------------------------------- faces
    def _build_faces(self) -> None:
        n = self.n
        top = np.sort(self.cells, axis=1)
        self.top_sign = _perm_sign(np.argsort(self.cells, axis=1))
        simplices: list[np.ndarray] = [None] * (n + 1)  # type: ignore[list-item]
        incidence: list[tuple] = [None] * n  # type: ignore[list-item]
        order = np.lexsort(top.T[::-1])
        top = top[order]
        self.cells = self.cells[order]
        self.volumes = self.volumes[order]
        self.top_sign = self.top_sign[order]
        simplices[n] = top
        for k in range(n, 0, -1):
            S = simplices[k]
            faces = np.stack([np.delete(S, i, axis=1) for i in range(k + 1)], axis=1)
            flat = faces.reshape(-1, k)
            uniq, inv = np.unique(flat, axis=0, return_inverse=True)
            simplices[k - 1] = uniq
            rows = np.repeat(np.arange(len(S)), k + 1)
            signs = np.tile([(-1) ** i for i in range(k + 1)], len(S))
            incidence[k - 1] = (rows, inv.ravel(), signs)
        self.simplices = simplices
        self._incidence = incidence

    def num(self, k: int) -> int:
        return len(self.simplices[k])

    @cached_property
    def boundary_facets(self) -> np.ndarray:
        rows, cols, _ = self._incidence[self.n - 1]
        counts = np.bincount(cols, minlength=self.num(self.n - 1))
        return np.nonzero(counts == 1)[0]

    @cached_property
    def h(self) -> float:
        e = self.simplices[1]
        return float(np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1).max())

    @cached_property
    def barycenters(self) -> np.ndarray:
        return self.vertices[self.cells].mean(axis=1)

    @property
    def volume(self) -> float:
        return float(self.volumes.sum())

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** k * self.num(k) for k in range(self.n + 1)))

    def boundary_incidence(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(k+1)-simplex / k-simplex incidence triples for the top level."""
        return self._incidence[self.n - 1]

    def incidence(self, k: int):
        """(rows, cols, signs) of the map from k-simplices to (k+1)-simplices."""
        return self._incidence[k]

    def min_angle(self) -> float:
        """Smallest interior angle in degrees (2D meshes)."""
        if self.n != 2:
            raise ValueError("min_angle is defined for triangle meshes")
        p = self.vertices[self.cells]
        ang = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            c = (a * b).sum(1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            ang.append(np.degrees(np.arccos(np.clip(c, -1, 1))))
        return float(np.min(ang))

    def relabeled(self, perm: np.ndarray) -> "SimplicialMesh":
        """Same mesh with vertex i renamed perm[i]."""
        perm = np.asarray(perm)
        verts = np.empty_like(self.vertices)
        verts[perm] = self.vertices
        tags = {}
        bf = self.boundary_facets
        newmesh = SimplicialMesh(verts, perm[self.cells], check=False)
        old = np.sort(perm[self.simplices[self.n - 1][bf]], axis=1)
        idx = lookup_rows(newmesh.simplices[self.n - 1], old)
        for f, t in zip(idx, self.boundary_tags):
            tags[int(f)] = int(t)
        return SimplicialMesh(verts, perm[self.cells], boundary_tags=tags, check=False)

    def scaled(self, s: float, t: Sequence[float] | None = None) -> "SimplicialMesh":
        t = np.zeros(self.n) if t is None else np.asarray(t, dtype=float)
        return SimplicialMesh(
            s * self.vertices + t, self.cells, boundary_tags=self.boundary_tags.copy(), check=False
        )


def _perm_sign(order: np.ndarray) -> np.ndarray:
    """Sign of each row permutation (rows of a small argsort array)."""
    order = np.array(order)
    m = order.shape[1]
    sign = np.ones(len(order), dtype=np.int64)
    for i in range(m):
        for j in range(i + 1, m):
            sign *= np.where(order[:, i] > order[:, j], -1, 1)
    return sign


# ------------------------------------------------------------ 2D boundaries


@dataclass(frozen=True)
class Segment:
    p0: tuple[float, float]
    p1: tuple[float, float]

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.p0, dtype=float)

    @property
    def end(self) -> np.ndarray:
        return np.asarray(self.p1, dtype=float)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    def points(self, k: int) -> np.ndarray:
        t = np.arange(k) / k
        return self.start + t[:, None] * (self.end - self.start)

    def point_at(self, t: np.ndarray) -> np.ndarray:
        return self.start + np.atleast_1d(t)[:, None] * (self.end - self.start)

    def project(self, x: np.ndarray) -> np.ndarray:
        d = self.end - self.start
        t = np.clip(((x - self.start) @ d) / (d @ d), 0.0, 1.0)
        return self.start + t[:, None] * d


@dataclass(frozen=True)
class Arc:
    center: tuple[float, float]
    radius: float
    theta0: float
    theta1: float

    def _at(self, th: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        return c + self.radius * np.column_stack([np.cos(th), np.sin(th)])

    @property
    def start(self) -> np.ndarray:
        return self._at(np.array([self.theta0]))[0]

    @property
    def end(self) -> np.ndarray:
        return self._at(np.array([self.theta1]))[0]

    @property
    def length(self) -> float:
        return abs(self.theta1 - self.theta0) * self.radius

    def points(self, k: int) -> np.ndarray:
        t = np.arange(k) / k
        return self._at(self.theta0 + t * (self.theta1 - self.theta0))

    def point_at(self, t: np.ndarray) -> np.ndarray:
        return self._at(self.theta0 + np.atleast_1d(t) * (self.theta1 - self.theta0))

    def project(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        phi = np.arctan2(x[:, 1] - c[1], x[:, 0] - c[0])
        lo, hi = min(self.theta0, self.theta1), max(self.theta0, self.theta1)
        # bring phi into [lo, lo + 2 pi)
        phi = lo + np.mod(phi - lo, 2 * math.pi)
        inside = phi <= hi
        out = self._at(np.where(inside, phi, lo))
        alt = self._at(np.full(len(x), hi))
        use_hi = ~inside & (
            np.linalg.norm(x - alt, axis=1) < np.linalg.norm(x - out, axis=1)
        )
        out[use_hi] = alt[use_hi]
        return out


Piece = Segment | Arc


@dataclass
class Loop:
    """Closed boundary curve made of segments and arcs, traversed in order."""

    pieces: list[Piece]
    tag: int = OUTER

    def __post_init__(self):
        for a, b in zip(self.pieces, self.pieces[1:] + self.pieces[:1]):
            if np.linalg.norm(a.end - b.start) > 1e-9 * max(1.0, self.length):
                raise MeshError("self_intersection", "boundary loop is not closed")

    @property
    def length(self) -> float:
        return sum(p.length for p in self.pieces)

    def sample(self, h: "float | Callable[[np.ndarray], np.ndarray]") -> np.ndarray:
        """Points along the loop (closing point omitted) with spacing <= h,
        where h may be a size field evaluated at boundary points."""
        out = []
        for p in self.pieces:
            L = p.length
            if L <= 0:
                continue
            if not callable(h):
                out.append(p.points(max(1, math.ceil(L / h))))
                continue
            # march with the local size, then spread the steps evenly
            t = np.linspace(0.0, 1.0, 4001)
            loc = np.asarray(h(p.point_at(t)), dtype=float)
            dens = np.cumsum(np.concatenate([[0.0], 0.5 * (1 / loc[1:] + 1 / loc[:-1]) * np.diff(t) * L]))
            k = max(1, math.ceil(dens[-1]))
            ts = np.interp(np.arange(k) * dens[-1] / k, dens, t)
            out.append(p.point_at(ts))
        return np.vstack(out)

    def project(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        best = None
        bestd = None
        for p in self.pieces:
            q = p.project(x)
            d = np.linalg.norm(q - x, axis=1)
            if best is None:
                best, bestd = q, d
            else:
                m = d < bestd
                best[m] = q[m]
                bestd[m] = d[m]
        return best

    def distance(self, x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.project(x) - np.atleast_2d(x), axis=1)


def circle_loop(center, radius: float, tag: int = OUTER) -> Loop:
    return Loop([Arc(tuple(center), radius, 0.0, 2 * math.pi)], tag)


def polygon_loop(points: Sequence[Sequence[float]], tag: int = OUTER) -> Loop:
    pts = [tuple(map(float, p)) for p in points]
    return Loop([Segment(a, b) for a, b in zip(pts, pts[1:] + pts[:1])], tag)


def boundary_csv(loops: Sequence[Loop], h: float, path) -> None:
    """Write sampled boundary polylines as CSV rows (loop, tag, x, y)."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["loop", "tag", "x", "y"])
        for k, loop in enumerate(loops):
            for x, y in loop.sample(h):
                w.writerow([k, loop.tag, repr(float(x)), repr(float(y))])


def _check_loops(loops: Sequence[Loop], h) -> list[np.ndarray]:
    from shapely.geometry import LinearRing

    samples = [loop.sample(h) for loop in loops]
    rings = []
    for s in samples:
        if len(s) < 3:
            raise MeshError("resolution", "boundary loop too short for h")
        ring = LinearRing(s)
        if not ring.is_simple:
            raise MeshError("self_intersection", "boundary loop intersects itself")
        rings.append(ring)
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if rings[i].intersects(rings[j]):
                raise MeshError("self_intersection", f"boundary loops {i} and {j} intersect")
    return samples


def mesh2d(
    loops: Sequence[Loop],
    h: "float | Callable[[np.ndarray], np.ndarray]",
    min_angle: float = 20.0,
    max_passes: int = 30,
) -> SimplicialMesh:
    """Quality triangulation of the region bounded by `loops`.

    The first loop is the outer boundary, the rest bound holes.  `h` is the
    maximum edge length, either a constant or a size field x -> h(x) checked
    at triangle centroids.  Boundary vertices are snapped to the exact curves
    after every pass.
    """
    import triangle
    from shapely.geometry import Polygon

    if callable(h):
        size = h
    else:
        if h <= 0:
            raise MeshError("resolution", "h must be positive")
        hv = float(h)

        def size(x):
            return np.full(len(x), hv)

    def bsize(x):
        return 0.9 * np.asarray(size(x), dtype=float)

    samples = _check_loops(loops, bsize)
    verts, segs, marks, holes = [], [], [], []
    off = 0
    for k, s in enumerate(samples):
        m = len(s)
        verts.append(s)
        idx = off + np.arange(m)
        segs.append(np.column_stack([idx, np.roll(idx, -1)]))
        marks.append(np.full(m, k + 2))
        off += m
        if k > 0:
            rp = Polygon(s).representative_point()
            holes.append([rp.x, rp.y])
    data = {
        "vertices": np.vstack(verts),
        "segments": np.vstack(segs),
        "segment_markers": np.concatenate(marks)[:, None],
        "vertex_markers": np.concatenate(marks)[:, None],
    }
    if holes:
        data["holes"] = np.array(holes)
    q = max(min_angle + 5.0, 25.0)
    hmax = float(np.max(size(np.vstack(samples))))
    out = triangle.triangulate(data, f"pq{q}a{0.35 * hmax * hmax:.17g}")

    def snap(t):
        v = t["vertices"].copy()
        mk = t["vertex_markers"].ravel()
        for k, loop in enumerate(loops):
            sel = mk == k + 2
            if sel.any():
                v[sel] = loop.project(v[sel])
        return v

    for _ in range(max_passes):
        v = snap(out)
        tri = out["triangles"]
        p = v[tri]
        edges = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        longest = np.linalg.norm(edges, axis=2).max(axis=1)
        target = np.asarray(size(p.mean(axis=1)), dtype=float)
        if np.all(longest <= target):
            break
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        limits = np.where(longest > target, 0.5 * area, -1.0)
        refine = dict(out)
        refine["vertices"] = v
        refine["triangle_max_area"] = limits[:, None]
        if holes:
            refine["holes"] = np.array(holes)
        out = triangle.triangulate(refine, f"rpq{q}a")
    else:
        raise MeshError("quality", "could not reach the edge-length target")
    v = snap(out)
    mesh = SimplicialMesh(v, out["triangles"])
    p = mesh.vertices[mesh.cells]
    longest = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2).max(axis=1)
    if np.any(longest > np.asarray(size(p.mean(axis=1))) * (1 + 1e-9)):
        raise MeshError("quality", "an edge exceeds the requested size")
    ang = mesh.min_angle()
    if ang < min_angle:
        raise MeshError("quality", f"minimum angle {ang:.2f} below {min_angle}")
    _tag_by_loops(mesh, loops)
    return mesh


def _tag_by_loops(mesh: SimplicialMesh, loops: Sequence[Loop]) -> None:
    bf = mesh.boundary_facets
    if len(bf) == 0:
        return
    mid = mesh.vertices[mesh.simplices[mesh.n - 1][bf]].mean(axis=1)
    dist = np.column_stack([loop.distance(mid) for loop in loops])
    which = np.argmin(dist, axis=1)
    mesh.boundary_tags = np.array([loops[k].tag for k in which], dtype=np.int64)


def rectangle_loop(x0: float, y0: float, x1: float, y1: float, tag: int = OUTER) -> Loop:
    return polygon_loop([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], tag)


# ------------------------------------------------------------------- 3D


def _cube_sphere(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Triangulated surface of [-1,1]^3 with an equiangular m x m grid per face."""
    t = np.tan(np.linspace(-math.pi / 4, math.pi / 4, m + 1))
    pts, tris = [], []
    off = 0
    for axis in range(3):
        for sgn in (-1.0, 1.0):
            a, b = np.meshgrid(t, t, indexing="ij")
            P = np.zeros((m + 1, m + 1, 3))
            others = [k for k in range(3) if k != axis]
            P[..., axis] = sgn
            P[..., others[0]] = a
            P[..., others[1]] = b
            pts.append(P.reshape(-1, 3))
            idx = off + np.arange((m + 1) ** 2).reshape(m + 1, m + 1)
            for i in range(m):
                for j in range(m):
                    q = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
                    tris.append((q[0], q[1], q[2]))
                    tris.append((q[0], q[2], q[3]))
            off += (m + 1) ** 2
    P = np.vstack(pts)
    key = np.round(P * 1e9).astype(np.int64)
    _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    T = inv.ravel()[np.array(tris)]
    return P[first], T


def _prism_tets(tri: np.ndarray, bottom: np.ndarray, top: np.ndarray) -> np.ndarray:
    """Split prisms over triangles into three tets each.

    `bottom`/`top` map surface vertex ids to volume vertex ids.  Quad faces
    are cut from the lower surface id at the bottom to the higher id at the
    top, which keeps neighbouring prisms conforming.  Tets that collapse
    (a surface vertex whose bottom and top coincide) are dropped.
    """
    s = np.sort(tri, axis=1)
    v0, v1, v2 = s[:, 0], s[:, 1], s[:, 2]
    tets = np.vstack(
        [
            np.column_stack([bottom[v0], bottom[v1], bottom[v2], top[v2]]),
            np.column_stack([bottom[v0], bottom[v1], top[v1], top[v2]]),
            np.column_stack([bottom[v0], top[v0], top[v1], top[v2]]),
        ]
    )
    srt = np.sort(tets, axis=1)
    ok = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
    return tets[ok]


def mesh3d_shell(
    Rh: float,
    outer,
    h: float,
    center: Sequence[float] | None = None,
) -> SimplicialMesh:
    """Structured radial-layer tetrahedral mesh between a sphere and a
    concentric ball or axis-aligned box (given as a geometry Ball/Polytope)."""
    from .geometry import Ball, Polytope

    c = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    if isinstance(outer, Ball):
        if np.linalg.norm(outer.center - c) > 1e-12:
            raise MeshError("resolution", "outer ball must be concentric with the hole")
        half = None
        rmax = outer.radius
        thick = outer.radius - Rh
    elif isinstance(outer, Polytope):
        lo, hi = outer.vertices.min(0), outer.vertices.max(0)
        if len(outer.vertices) != 8 or not np.allclose(0.5 * (lo + hi), c):
            raise MeshError("resolution", "outer polytope must be a box centred on the hole")
        half = 0.5 * (hi - lo)
        rmax = float(np.linalg.norm(half))
        thick = float(half.min()) - Rh
    else:
        raise MeshError("parse", "unsupported outer body")
    if thick <= 0:
        raise MeshError("resolution", "hole does not fit inside the outer body")
    if h > thick:
        raise MeshError("resolution", f"h = {h:.3g} cannot resolve clearance {thick:.3g}")
    # equiangular cube-sphere: edge on the outer surface about rmax * (pi/2) / m
    m = max(2, math.ceil(rmax * math.pi / 2 / h * 1.15))
    layers = max(1, math.ceil((rmax - Rh) / h))
    P, T = _cube_sphere(m)
    u = P / np.linalg.norm(P, axis=1)[:, None]
    inner = c + Rh * u
    if half is None:
        outer_pts = c + rmax * u
    else:
        outer_pts = c + P * half
    nv = len(P)
    verts = []
    for k in range(layers + 1):
        t = k / layers
        verts.append((1 - t) * inner + t * outer_pts)
    V = np.vstack(verts)
    tets = []
    for k in range(layers):
        tets.append(_prism_tets(T, k * nv + np.arange(nv), (k + 1) * nv + np.arange(nv)))
    mesh = SimplicialMesh(V, np.vstack(tets))
    bf = mesh.boundary_facets
    mid = mesh.vertices[mesh.simplices[2][bf]].mean(axis=1)
    r = np.linalg.norm(mid - c, axis=1)
    mesh.boundary_tags = np.where(r < Rh + 0.5 * thick, 0, OUTER).astype(np.int64)
    return mesh


def revolve(profile: SimplicialMesh, sectors: int, axis_tol: float = 1e-12) -> SimplicialMesh:
    """Revolve a 2D mesh in the (x1, r >= 0) half-plane about the x1-axis.

    Vertices on the axis (r = 0) are not duplicated; prisms touching the
    axis degenerate into pyramids or tetrahedra.
    """
    V2 = profile.vertices
    if V2[:, 1].min() < -axis_tol:
        raise MeshError("parse", "profile must lie in the half-plane r >= 0")
    on_axis = V2[:, 1] <= axis_tol
    nv = len(V2)
    ids = np.full((sectors, nv), -1, dtype=np.int64)
    coords = []
    nxt = 0
    th = 2 * math.pi * np.arange(sectors) / sectors
    axis_ids = np.nonzero(on_axis)[0]
    ids[:, axis_ids] = np.arange(len(axis_ids))[None, :]
    coords.append(np.column_stack([V2[axis_ids, 0], np.zeros(len(axis_ids)), np.zeros(len(axis_ids))]))
    nxt = len(axis_ids)
    off_ids = np.nonzero(~on_axis)[0]
    for s in range(sectors):
        ids[s, off_ids] = nxt + np.arange(len(off_ids))
        r = V2[off_ids, 1]
        coords.append(np.column_stack([V2[off_ids, 0], r * np.cos(th[s]), r * np.sin(th[s])]))
        nxt += len(off_ids)
    V = np.vstack(coords)
    T = profile.cells
    tets = [_prism_tets(T, ids[s], ids[(s + 1) % sectors]) for s in range(sectors)]
    return SimplicialMesh(V, np.vstack(tets))


# ------------------------------------------------------------- domain meshes


def loops_for_domain(spec) -> list[Loop]:
    """Boundary loops of a 2D DomainSpec (outer first, then holes)."""
    from .geometry import Ball

    if spec.n != 2:
        raise MeshError("parse", "loops_for_domain is for 2D domains")
    if isinstance(spec.outer, Ball):
        loops = [circle_loop(spec.outer.center, spec.outer.radius, OUTER)]
    else:
        v = spec.outer.vertices
        ctr = v.mean(0)
        order = np.argsort(np.arctan2(v[:, 1] - ctr[1], v[:, 0] - ctr[0]))
        loops = [polygon_loop(v[order], OUTER)]
    for k, hole in enumerate(spec.holes):
        loops.append(circle_loop(hole.center, hole.radius, k))
    return loops


def mesh_domain(spec, h: float) -> SimplicialMesh:
    if spec.n == 2:
        return mesh2d(loops_for_domain(spec), h)
    if len(spec.holes) != 1:
        raise MeshError("parse", "3D generation supports one concentric hole")
    hole = spec.holes[0]
    return mesh3d_shell(hole.radius, spec.outer, h, hole.center)


# ------------------------------------------------------------------ submesh


@dataclass
class SubmeshMap:
    """Index maps from a submesh back to its parent."""

    vertices: np.ndarray
    simplices: list[np.ndarray] = field(default_factory=list)

    def restrict(self, k: int, cochain: np.ndarray) -> np.ndarray:
        return np.asarray(cochain)[self.simplices[k]]

    def extend(self, k: int, values: np.ndarray, size: int) -> np.ndarray:
        out = np.zeros(size)
        out[self.simplices[k]] = values
        return out


def submesh(
    mesh: SimplicialMesh,
    predicate: Callable[[np.ndarray], np.ndarray] | np.ndarray,
) -> tuple[SimplicialMesh, SubmeshMap]:
    """Induced subcomplex of the cells whose barycenters satisfy `predicate`
    (or given directly as a boolean mask over cells)."""
    if callable(predicate):
        mask = np.asarray(predicate(mesh.barycenters), dtype=bool)
    else:
        mask = np.asarray(predicate, dtype=bool)
    if not mask.any():
        raise MeshError("empty", "submesh selection is empty")
    cells = mesh.cells[mask]
    vmap = np.unique(cells.ravel())
    local = np.searchsorted(vmap, cells)
    sub = SimplicialMesh(mesh.vertices[vmap], local, orient=False, check=False)
    maps = []
    for k in range(mesh.n + 1):
        parent = lookup_rows(mesh.simplices[k], vmap[sub.simplices[k]])
        maps.append(parent)
    # tags: parent boundary facets keep theirs, new facets are cuts
    pf = maps[mesh.n - 1][sub.boundary_facets]
    ptag = dict(zip(mesh.boundary_facets.tolist(), mesh.boundary_tags.tolist()))
    sub.boundary_tags = np.array([ptag.get(int(f), CUT) for f in pf], dtype=np.int64)
    return sub, SubmeshMap(vmap, maps)


# --------------------------------------------------------------------- io

_TAG_NAMES = {OUTER: "outer", CUT: "cut"}


def _tag_text(t: int) -> str:
    return _TAG_NAMES.get(int(t), f"hole:{int(t)}")


def _tag_parse(s: str) -> int:
    if s == "outer":
        return OUTER
    if s == "cut":
        return CUT
    if s.startswith("hole:"):
        return int(s[5:])
    raise MeshError("parse", f"unknown boundary tag {s!r}")


def write_mesh(mesh: SimplicialMesh, path) -> None:
    """Plain-text format: ``dim``, ``vertices``, ``cells``, ``boundary`` blocks.

    Boundary facet indices refer to the sorted list of (n-1)-simplices.
    """
    with open(path, "w") as fh:
        fh.write(f"dim {mesh.n}\n")
        fh.write(f"vertices {len(mesh.vertices)}\n")
        for v in mesh.vertices:
            fh.write(" ".join(f"{c:.17g}" for c in v) + "\n")
        fh.write(f"cells {len(mesh.cells)}\n")
        for c in mesh.cells:
            fh.write(" ".join(str(int(k)) for k in c) + "\n")
        bf = mesh.boundary_facets
        fh.write(f"boundary {len(bf)}\n")
        for f, t in zip(bf, mesh.boundary_tags):
            fh.write(f"{int(f)} {_tag_text(t)}\n")


def import_mesh(path) -> SimplicialMesh:
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise MeshError("parse", str(exc)) from exc
    if not lines:
        raise MeshError("parse", "empty mesh file")
    pos = 0

    def header(name):
        nonlocal pos
        if pos >= len(lines) or len(lines[pos]) != 2 or lines[pos][0] != name:
            raise MeshError("parse", f"expected '{name} <count>' at record {pos}")
        try:
            val = int(lines[pos][1])
        except ValueError as exc:
            raise MeshError("parse", f"bad count for {name}") from exc
        pos += 1
        return val

    def block(count, width, conv):
        nonlocal pos
        rows = lines[pos : pos + count]
        if len(rows) != count or any(len(r) != width for r in rows):
            raise MeshError("parse", "truncated or malformed block")
        pos += count
        try:
            return [[conv(x) for x in r] for r in rows]
        except ValueError as exc:
            raise MeshError("parse", str(exc)) from exc

    n = header("dim")
    if n not in (2, 3):
        raise MeshError("parse", "dim must be 2 or 3")
    nv = header("vertices")
    V = np.array(block(nv, n, float)).reshape(-1, n)
    nc = header("cells")
    C = np.array(block(nc, n + 1, int), dtype=np.int64).reshape(-1, n + 1)
    tags = None
    if pos < len(lines):
        nb = header("boundary")
        rows = block(nb, 2, str)
        tags = {}
        for f, t in rows:
            try:
                tags[int(f)] = _tag_parse(t)
            except ValueError as exc:
                raise MeshError("parse", str(exc)) from exc
    if pos != len(lines):
        raise MeshError("parse", "trailing records after boundary block")
    if len(C) == 0:
        raise MeshError("parse", "mesh has no cells")
    return SimplicialMesh(V, C, boundary_tags=tags, orient=False)


def write_off(mesh: SimplicialMesh, path) -> None:
    """OFF export: triangles for 2D meshes, boundary triangles for 3D meshes."""
    from .geometry import write_off as _off

    if mesh.n == 2:
        _off(path, mesh.vertices, mesh.cells.tolist())
    else:
        _off(path, mesh.vertices, mesh.simplices[2][mesh.boundary_facets].tolist())


def loop_area(loop: Loop) -> float:
    """Signed area enclosed by a loop (exact for segments and arcs)."""
    total = 0.0
    for p in loop.pieces:
        if isinstance(p, Segment):
            a, b = p.start, p.end
            total += 0.5 * (a[0] * b[1] - a[1] * b[0])
        else:
            cx, cy = p.center
            r, t0, t1 = p.radius, p.theta0, p.theta1
            total += 0.5 * (
                r * r * (t1 - t0)
                + r * (cx * (math.sin(t1) - math.sin(t0)) - cy * (math.cos(t1) - math.cos(t0)))
            )
    return total


def region_area(loops: Sequence[Loop]) -> float:
    """Area of the region bounded by an outer loop and hole loops."""
    return abs(loop_area(loops[0])) - sum(abs(loop_area(l)) for l in loops[1:])
