"""Domains with spherical holes, their scale measures, and power partitions.

A domain is a convex outer body (a ball or a convex polytope) with finitely
many disjoint closed balls removed.  Everything the lower-bound evaluators
need (diameter, contact radii, partition parameter, intersection counts of
the cover induced by the power diagram) is computed here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay, HalfspaceIntersection


class GeometryError(ValueError):
    """Raised for invalid or degenerate domain descriptions."""


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex polytope given by its vertices (must be in convex position)."""

    vertices: np.ndarray
    normals: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if v.ndim != 2 or v.shape[0] < v.shape[1] + 1:
            raise GeometryError("polytope needs at least n+1 vertices")
        try:
            hull = ConvexHull(v)
        except Exception as exc:  # qhull raises its own error type
            raise GeometryError(f"degenerate polytope: {exc}") from exc
        if len(set(hull.vertices.tolist())) != v.shape[0]:
            raise GeometryError("polytope vertices are not in convex position")
        # qhull equations are [normal, offset] with normal.x + offset <= 0
        eq = _unique_rows(hull.equations)
        object.__setattr__(self, "normals", eq[:, :-1])
        object.__setattr__(self, "offsets", -eq[:, -1])


@dataclass(frozen=True, eq=False)
class Hole:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Convex outer body minus pairwise disjoint closed balls."""

    n: int
    outer: Ball | Polytope
    holes: tuple[Hole, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "holes", tuple(self.holes))
        validate(self)

    @property
    def num_holes(self) -> int:
        return len(self.holes)


@dataclass(frozen=True)
class GeometricMeasures:
    D: float
    Rc: float
    Rc_hat: float
    Rh_min: float
    Rh_max: float
    RP: float
    r_c: float
    d_h: float


@dataclass
class PowerCell:
    hole: int
    A: np.ndarray  # halfspaces A x <= b, unit normals
    b: np.ndarray
    labels: list[int]  # neighbouring hole index per halfspace, -1 for outer facets
    vertices: np.ndarray  # clipped convex polytope (2D: ordered polygon)
    solid_volume: float  # volume of cell including its hole
    volume: float  # solid_volume minus the hole
    volume_exact: bool = True
    empty: bool = False


@dataclass
class PowerPartition:
    spec: DomainSpec
    cells: list[PowerCell]
    adjacency: list[tuple[int, int]]
    intersection_counts: dict[int, int]  # order m -> number of (m+1)-fold overlaps
    intersections: dict[int, list[tuple[int, ...]]]
    margin: float
    empty_cells: list[int] = field(default_factory=list)

    def k(self, m: int) -> int:
        return self.intersection_counts.get(m, 0)


@dataclass
class HypothesisResult:
    satisfied: bool
    order: list[int]
    violating_prefix: list[int] | None = None


def _unique_rows(eq: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    keep: list[np.ndarray] = []
    for row in eq:
        if not any(np.allclose(row, k, atol=tol) for k in keep):
            keep.append(row)
    return np.array(keep)


def _ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n


def outer_signed_distance(outer: Ball | Polytope, x: np.ndarray) -> float:
    """Distance from x to the outer boundary, positive inside."""
    x = np.asarray(x, dtype=float)
    if isinstance(outer, Ball):
        return outer.radius - float(np.linalg.norm(x - outer.center))
    return float(np.min(outer.offsets - outer.normals @ x))


def outer_diameter(outer: Ball | Polytope) -> float:
    if isinstance(outer, Ball):
        return 2.0 * outer.radius
    v = outer.vertices
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def outer_volume(outer: Ball | Polytope, n: int) -> float:
    if isinstance(outer, Ball):
        return _ball_volume(n, outer.radius)
    return float(ConvexHull(outer.vertices).volume)


def domain_volume(spec: DomainSpec) -> float:
    return outer_volume(spec.outer, spec.n) - sum(
        _ball_volume(spec.n, h.radius) for h in spec.holes
    )


def validate(spec: DomainSpec) -> None:
    if spec.n not in (2, 3):
        raise GeometryError(f"dimension must be 2 or 3, got {spec.n}")
    outer = spec.outer
    dim = outer.center.shape[0] if isinstance(outer, Ball) else outer.vertices.shape[1]
    if dim != spec.n:
        raise GeometryError("outer body dimension does not match n")
    if isinstance(outer, Ball) and outer.radius <= 0:
        raise GeometryError("outer radius must be positive")
    for i, h in enumerate(spec.holes):
        if h.center.shape != (spec.n,):
            raise GeometryError(f"hole {i} has wrong dimension")
        if h.radius <= 0:
            raise GeometryError(f"hole {i} radius must be positive")
        if outer_signed_distance(outer, h.center) - h.radius <= 0:
            raise GeometryError(f"hole {i} touches or leaves the outer body")
    for (i, a), (j, b) in itertools.combinations(enumerate(spec.holes), 2):
        if np.linalg.norm(a.center - b.center) - a.radius - b.radius <= 0:
            raise GeometryError(f"holes {i} and {j} touch or overlap")


def transform(spec: DomainSpec, s: float, t: Sequence[float] | None = None) -> DomainSpec:
    """Scale all lengths by s and translate by t."""
    if not s > 0:
        raise GeometryError("scale factor must be positive")
    t = np.zeros(spec.n) if t is None else np.asarray(t, dtype=float)
    if isinstance(spec.outer, Ball):
        outer: Ball | Polytope = Ball(s * spec.outer.center + t, s * spec.outer.radius)
    else:
        outer = Polytope(s * spec.outer.vertices + t)
    holes = tuple(Hole(s * h.center + t, s * h.radius) for h in spec.holes)
    return DomainSpec(spec.n, outer, holes)


def power_walls(spec: DomainSpec, i: int) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Halfspaces a.x <= b (unit a) bounding the power cell of hole i."""
    ci, ri = spec.holes[i].center, spec.holes[i].radius
    rows, rhs, labels = [], [], []
    for j, h in enumerate(spec.holes):
        if j == i:
            continue
        a = 2.0 * (h.center - ci)
        b = h.center @ h.center - ci @ ci + ri**2 - h.radius**2
        nrm = np.linalg.norm(a)
        rows.append(a / nrm)
        rhs.append(b / nrm)
        labels.append(j)
    A = np.array(rows).reshape(-1, spec.n)
    return A, np.array(rhs), labels


def measure(spec: DomainSpec, partition: PowerPartition | None = None) -> GeometricMeasures:
    if not spec.holes:
        raise GeometryError("measure needs at least one hole")
    D = outer_diameter(spec.outer)
    clear = [outer_signed_distance(spec.outer, h.center) - h.radius for h in spec.holes]
    r_c = min(clear)
    d_h = math.inf
    for a, b in itertools.combinations(spec.holes, 2):
        d_h = min(d_h, float(np.linalg.norm(a.center - b.center)) - a.radius - b.radius)
    Rc_hat = min(r_c, d_h / 2)
    radii = [h.radius for h in spec.holes]
    RP = math.inf
    for i, h in enumerate(spec.holes):
        A, b, _ = power_walls(spec, i)
        dist = clear[i] + h.radius
        if len(b):
            dist = min(dist, float(np.min(b - A @ h.center)))
        RP = min(RP, dist - h.radius)
    return GeometricMeasures(
        D=D, Rc=r_c, Rc_hat=Rc_hat, Rh_min=min(radii), Rh_max=max(radii), RP=RP, r_c=r_c, d_h=d_h
    )


# ---------------------------------------------------------------- 2D polygons


def clip_polygon(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by a.x <= b."""
    if len(poly) == 0:
        return poly
    out = []
    s = poly @ a - b
    m = len(poly)
    for k in range(m):
        p, q = poly[k], poly[(k + 1) % m]
        sp, sq = s[k], s[(k + 1) % m]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            out.append(p + (q - p) * (sp / (sp - sq)))
    return np.array(out).reshape(-1, 2)


def polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _tri_disk_area(p: np.ndarray, q: np.ndarray, r: float) -> float:
    """Signed area of disk(0, r) intersected with triangle (0, p, q)."""
    d = q - p
    A = d @ d
    if A == 0:
        return 0.0
    B = p @ d
    C = p @ p - r * r
    pts = [p]
    disc = B * B - A * C
    if disc > 0:
        sq = math.sqrt(disc)
        for t in ((-B - sq) / A, (-B + sq) / A):
            if 0 < t < 1:
                pts.append(p + t * d)
    pts.append(q)
    total = 0.0
    for u, v in zip(pts[:-1], pts[1:]):
        cross = u[0] * v[1] - u[1] * v[0]
        mid = 0.5 * (u + v)
        if mid @ mid < r * r:
            total += 0.5 * cross
        else:
            total += 0.5 * r * r * math.atan2(cross, u @ v)
    return total


def disk_polygon_area(center: np.ndarray, radius: float, poly: np.ndarray) -> float:
    """Exact area of a disk intersected with a counter-clockwise polygon."""
    rel = np.asarray(poly, dtype=float) - center
    m = len(rel)
    return sum(_tri_disk_area(rel[k], rel[(k + 1) % m], radius) for k in range(m))


def _outer_halfspaces(outer: Ball | Polytope, n: int, ball_facets: int = 0):
    """Halfspaces of the outer body; balls become a bounding box or a
    circumscribed polytope with `ball_facets` facets."""
    if isinstance(outer, Polytope):
        return outer.normals, outer.offsets
    c, R = outer.center, outer.radius
    if ball_facets == 0:
        A = np.vstack([np.eye(n), -np.eye(n)])
        return A, A @ c + R
    if n == 2:
        th = 2 * math.pi * np.arange(ball_facets) / ball_facets
        A = np.column_stack([np.cos(th), np.sin(th)])
    else:
        A = _fibonacci_sphere(ball_facets)
    return A, A @ c + R


def _fibonacci_sphere(m: int) -> np.ndarray:
    k = np.arange(m) + 0.5
    z = 1 - 2 * k / m
    phi = math.pi * (1 + math.sqrt(5)) * k
    rho = np.sqrt(1 - z * z)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _cell_vertices(A: np.ndarray, b: np.ndarray, interior: np.ndarray) -> np.ndarray:
    n = A.shape[1]
    if n == 2:
        # start from a large box around the constraints and clip
        span = 10.0 * (np.abs(b).max() + np.abs(interior).max() + 1.0)
        poly = interior + span * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
        for a, bb in zip(A, b):
            poly = clip_polygon(poly, a, bb)
        return poly
    hs = HalfspaceIntersection(np.column_stack([A, -b]), interior)
    pts = hs.intersections
    return pts[ConvexHull(pts).vertices]


def _chebyshev_radius(A: np.ndarray, b: np.ndarray) -> float:
    """Radius of the largest ball inside {A x <= b} (A has unit rows)."""
    n = A.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.column_stack([A, np.ones(len(b))]),
        b_ub=b,
        bounds=[(None, None)] * n + [(None, 1e6)],
        method="highs",
    )
    if res.status != 0:
        return -math.inf
    return float(res.x[-1])


def power_diagram(
    spec: DomainSpec,
    margin: float | None = None,
    ball_facets: int | None = None,
    mc_points: int = 200_000,
    seed: int = 0,
) -> PowerPartition:
    """Power (Laguerre-Voronoi) cells of the holes clipped to the outer body.

    The fattened cover used for intersection counts relaxes every internal
    wall outward by `margin` (default a quarter of the partition parameter).
    """
    if not spec.holes:
        raise GeometryError("power diagram needs at least one hole")
    n = spec.n
    meas = measure(spec)
    if margin is None:
        margin = 0.25 * meas.RP
    if ball_facets is None:
        ball_facets = 256 if n == 2 else 400
    rng = np.random.default_rng(seed)

    cells: list[PowerCell] = []
    empty: list[int] = []
    for i, h in enumerate(spec.holes):
        A, b, labels = power_walls(spec, i)
        if isinstance(spec.outer, Polytope):
            Ao, bo = spec.outer.normals, spec.outer.offsets
        else:
            Ao, bo = _outer_halfspaces(spec.outer, n, 0)
        A_all = np.vstack([A, Ao]) if len(A) else Ao
        b_all = np.concatenate([b, bo])
        try:
            verts = _cell_vertices(A_all, b_all, h.center)
        except Exception:
            verts = np.zeros((0, n))
        if len(verts) < n + 1:
            empty.append(i)
            cells.append(PowerCell(i, A, b, labels, verts, 0.0, 0.0, True, True))
            continue
        exact = True
        if n == 2:
            if isinstance(spec.outer, Ball):
                solid = disk_polygon_area(spec.outer.center, spec.outer.radius, verts)
            else:
                solid = polygon_area(verts)
        else:
            if isinstance(spec.outer, Ball) and np.any(
                np.linalg.norm(verts - spec.outer.center, axis=1) > spec.outer.radius
            ):
                lo, hi = verts.min(0), verts.max(0)
                pts = lo + (hi - lo) * rng.random((mc_points, n))
                inside = np.all(pts @ A_all.T <= b_all, axis=1) & (
                    np.linalg.norm(pts - spec.outer.center, axis=1) <= spec.outer.radius
                )
                solid = float(np.prod(hi - lo) * inside.mean())
                exact = False
            else:
                solid = float(ConvexHull(verts).volume)
        vol = solid - _ball_volume(n, h.radius)
        cells.append(PowerCell(i, A, b, labels, verts, solid, vol, exact))

    # adjacency: the wall between i and j carries an (n-1)-dimensional facet
    Ao, bo = _outer_halfspaces(spec.outer, n, ball_facets)
    adjacency = []
    for i, j in itertools.combinations(range(len(spec.holes)), 2):
        if i in empty or j in empty:
            continue
        ci, cj = cells[i], cells[j]
        k = ci.labels.index(j)
        a, bb = ci.A[k], ci.b[k]
        # restrict to the wall hyperplane: points of cell i with a.x >= b - tiny
        A2 = np.vstack([ci.A, cj.A, Ao])
        b2 = np.concatenate([ci.b, cj.b, bo])
        # project onto the hyperplane by an orthonormal basis of its complement
        basis = np.linalg.svd(a[None, :])[2][1:]
        x0 = a * bb
        Ap = A2 @ basis.T
        bp = b2 - A2 @ x0
        keep = np.linalg.norm(Ap, axis=1) > 1e-12
        nrm = np.linalg.norm(Ap[keep], axis=1)
        # the wall itself appears in both cells with opposite signs; drop it
        rad = _chebyshev_radius(Ap[keep] / nrm[:, None], bp[keep] / nrm)
        if rad > 1e-9 * meas.D:
            adjacency.append((i, j))

    # intersection counts of the fattened cover, grown level by level
    fat = []
    for c in cells:
        fat.append((np.vstack([c.A, Ao]) if len(c.A) else Ao, np.concatenate([c.b + margin, bo])))
    inter: dict[int, list[tuple[int, ...]]] = {}
    current = [(i,) for i in range(len(cells)) if i not in empty]
    m = 0
    while current:
        nxt = []
        if m >= 1:
            inter[m] = current
        for S in current:
            for j in range(S[-1] + 1, len(cells)):
                if j in empty:
                    continue
                T = S + (j,)
                if any(T[:k] + T[k + 1 :] not in set(current) for k in range(len(T) - 1)):
                    continue
                A_T = np.vstack([fat[t][0] for t in T])
                b_T = np.concatenate([fat[t][1] for t in T])
                if _chebyshev_radius(A_T, b_T) > 1e-9 * meas.D:
                    nxt.append(T)
        current = nxt
        m += 1
    counts = {m: len(v) for m, v in inter.items()}
    return PowerPartition(spec, cells, adjacency, counts, inter, float(margin), empty)


def fattened_cell_contains(partition: PowerPartition, i: int, x: np.ndarray) -> np.ndarray:
    """Membership of points x (shape (m, n)) in the fattened power cell i."""
    c = partition.cells[i]
    x = np.atleast_2d(x)
    if len(c.A) == 0:
        return np.ones(len(x), dtype=bool)
    return np.all(x @ c.A.T <= c.b + partition.margin, axis=1)


# ------------------------------------------------------------- Hypothesis 1


def _prefix_convex(partition: PowerPartition, prefix: Sequence[int], rng, samples: int) -> bool:
    spec = partition.spec
    if len(prefix) <= 1:
        return True
    if spec.n == 2:
        from shapely.geometry import Polygon
        from shapely.ops import unary_union

        Ao, bo = _outer_halfspaces(spec.outer, 2, 512)
        polys = []
        for i in prefix:
            v = partition.cells[i].vertices
            for a, b in zip(Ao, bo):
                v = clip_polygon(v, a, b)
            polys.append(Polygon(v))
        union = unary_union(polys)
        hull = union.convex_hull
        return (hull.area - union.area) <= 1e-9 * hull.area
    # 3D: Monte Carlo estimate of the uncovered part of the convex hull
    Ao, bo = _outer_halfspaces(spec.outer, 3, 0)
    cells = [partition.cells[i] for i in prefix]
    pts = np.vstack([c.vertices for c in cells])
    hull = Delaunay(pts)
    lo, hi = pts.min(0), pts.max(0)
    x = lo + (hi - lo) * rng.random((samples, 3))
    x = x[hull.find_simplex(x) >= 0]
    if isinstance(spec.outer, Ball):
        x = x[np.linalg.norm(x - spec.outer.center, axis=1) <= spec.outer.radius]
    covered = np.zeros(len(x), dtype=bool)
    for c in cells:
        A = np.vstack([c.A, Ao]) if len(c.A) else Ao
        b = np.concatenate([c.b, bo])
        covered |= np.all(x @ A.T <= b + 1e-12, axis=1)
    return len(x) == 0 or (1.0 - covered.mean()) <= 1e-3


def hypothesis_order(partition: PowerPartition, samples: int = 100_000, seed: int = 0) -> HypothesisResult:
    """Search an ordering of cells whose every prefix union is convex.

    Exhaustive backtracking for at most 8 cells, greedy otherwise.
    """
    rng = np.random.default_rng(seed)
    idx = [i for i in range(len(partition.cells)) if i not in partition.empty_cells]
    cache: dict[frozenset, bool] = {}

    def ok(prefix):
        key = frozenset(prefix)
        if key not in cache:
            cache[key] = _prefix_convex(partition, prefix, rng, samples)
        return cache[key]

    deepest: list[int] = []
    first_fail: list[int] | None = None

    def extend(prefix: list[int], backtrack: bool) -> list[int] | None:
        nonlocal deepest, first_fail
        if len(prefix) == len(idx):
            return prefix
        if len(prefix) > len(deepest):
            deepest = list(prefix)
            first_fail = None
        for j in idx:
            if j in prefix:
                continue
            cand = prefix + [j]
            if ok(cand):
                found = extend(cand, backtrack)
                if found is not None:
                    return found
                if not backtrack:
                    return None
            elif first_fail is None and len(prefix) == len(deepest):
                first_fail = cand
        return None

    found = extend([], len(idx) <= 8)
    if found is not None:
        return HypothesisResult(True, found)
    return HypothesisResult(False, deepest, first_fail)


# ----------------------------------------------------------------- export


def write_off(path, vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> None:
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[1] == 2:
        vertices = np.column_stack([vertices, np.zeros(len(vertices))])
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(vertices)} {len(faces)} 0\n")
        for v in vertices:
            fh.write(" ".join(f"{c:.17g}" for c in v) + "\n")
        for f in faces:
            fh.write(f"{len(f)} " + " ".join(str(int(k)) for k in f) + "\n")


def cell_off(partition: PowerPartition, i: int, path) -> None:
    """Export power cell i as an OFF polytope."""
    v = partition.cells[i].vertices
    if v.shape[1] == 2:
        write_off(path, v, [list(range(len(v)))])
    else:
        hull = ConvexHull(v)
        write_off(path, v, hull.simplices.tolist())
