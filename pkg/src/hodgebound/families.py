"""Parametric domain families and their analytic test forms.

* ``aeps``: the shell with a pinched equator.  In coordinates
  R^n = R^{n-p-1} x R^{p+1} with rho = |x'| and r = |x''|, the region is the
  shell 1 <= |x| <= 1 + eps^n where r <= 1/2, closed off for r >= 1/2 by the
  tangent extensions rho sqrt(R^2 - 1/4) + r/2 <= R^2 (R = 1 + eps^n), with
  the apex rounded by a small arc.  Built directly in 2D (n = 2, p = 0) and
  by revolution for n = 3, p = 1.
* ``dumbbell``: two unit disks joined by a neck of half-width eps.
* ``multi_hole_aeps``: aeps with extra small holes on the r-axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import DomainSpec, GeometryError, Hole, Polytope
from .meshgen import (
    CUT,
    OUTER,
    Arc,
    Loop,
    MeshError,
    Segment,
    SimplicialMesh,
    circle_loop,
    loop_area,
    mesh2d,
    region_area,
    revolve,
)

AXIS = -3  # profile edges on the axis of revolution


class FamilyError(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    family: str
    n: int = 2
    p: int = 0
    eps: float = 0.1
    neck: float | None = None
    holes: int = 1
    hole_radius: float | None = None

    def __post_init__(self):
        if self.family not in ("annulus", "dumbbell", "aeps", "multi_hole_aeps"):
            raise FamilyError(f"unknown family {self.family!r}")
        if self.family in ("aeps", "multi_hole_aeps", "dumbbell") and not 0 < self.eps < 0.5:
            raise FamilyError("eps must lie in (0, 1/2)")
        if self.family == "aeps" and not 0 <= self.p <= self.n - 2:
            raise FamilyError("aeps needs 0 <= p <= n - 2")


# ------------------------------------------------------------- cutoffs


def smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def chi(eps: float, r: np.ndarray) -> np.ndarray:
    """0 on [0, eps/3], 1 on [2 eps/3, inf), cubic in between."""
    return smoothstep((np.asarray(r, dtype=float) - eps / 3.0) / (eps / 3.0))


def chi_prime(eps: float, r: np.ndarray) -> np.ndarray:
    s = (np.asarray(r, dtype=float) - eps / 3.0) / (eps / 3.0)
    inside = (s > 0) & (s < 1)
    return np.where(inside, 6.0 * s * (1.0 - s) * 3.0 / eps, 0.0)


CHI_LIPSCHITZ = 6.0  # sup |chi'| <= CHI_LIPSCHITZ / eps (attained value is 4.5)


@dataclass
class AnalyticForm:
    """chi_eps(r) times the angular form of R^{p+1}\\{0}, or for p = 0 the
    sign of the last coordinate."""

    n: int
    p: int
    eps: float
    degree: int = field(init=False)

    def __post_init__(self):
        self.degree = self.p
        if not 0 <= self.p <= self.n - 1:
            raise FamilyError("degree out of range")

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_2d(x)
        y = x[:, self.n - self.p - 1 :]
        return y, np.linalg.norm(y, axis=1)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        import itertools

        y, r = self.split(x)
        c = chi(self.eps, r)
        if self.p == 0:
            return c * np.sign(y[:, 0])
        off = self.n - self.p - 1
        basis = list(itertools.combinations(range(self.n), self.p))
        out = np.zeros((len(y), len(basis)))
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(c > 0, c / r ** (self.p + 1), 0.0)
        # solid-angle form: sum_i (-1)^i y_i dy_0 ^ .. (omit i) .. ^ dy_p / r^{p+1}
        for i in range(self.p + 1):
            I = tuple(off + j for j in range(self.p + 1) if j != i)
            out[:, basis.index(I)] += (-1) ** i * y[:, i] * scale
        return out

    def d_density(self, x: np.ndarray) -> np.ndarray:
        """Pointwise |d omega|^2 = chi'(r)^2 r^{-2p}."""
        _, r = self.split(x)
        cp = chi_prime(self.eps, r)
        with np.errstate(divide="ignore"):
            return np.where(cp != 0, cp**2 * r ** (-2.0 * self.p), 0.0)

    def norm_density(self, x: np.ndarray) -> np.ndarray:
        """Pointwise |omega|^2 = chi(r)^2 r^{-2p}."""
        _, r = self.split(x)
        c = chi(self.eps, r)
        with np.errstate(divide="ignore"):
            return np.where(c != 0, c**2 * r ** (-2.0 * self.p), 0.0)


def test_form(n: int, p: int, eps: float) -> AnalyticForm:
    if not 0 < eps < 0.5:
        raise FamilyError("eps must lie in (0, 1/2)")
    if not 0 <= p <= n - 2:
        raise FamilyError("test forms need 0 <= p <= n - 2")
    return AnalyticForm(n, p, eps)


# ------------------------------------------------------------ aeps


@dataclass
class AepsBoundary:
    """Outer profile of the pinched shell in the (rho, r) half-planes."""

    n: int
    p: int
    eps: float
    delta_s: float

    @property
    def R(self) -> float:
        return 1.0 + self.eps**self.n

    @property
    def a(self) -> float:
        return math.sqrt(self.R**2 - 0.25)

    @property
    def apex(self) -> float:
        return 2.0 * self.R**2

    def relation(self, rho: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Value of the active outer defining relation (<= 0 inside):
        sqrt(rho^2 + r^2) - R for r <= 1/2, tangent-line form beyond."""
        rho, r = np.abs(rho), np.abs(r)
        sphere = np.sqrt(rho**2 + r**2) - self.R
        line = (rho * self.a + r / 2 - self.R**2) / self.R
        return np.where(r <= 0.5, sphere, line)

    def fillet(self, sign: float = 1.0):
        """Center, tangent points and angles of the apex rounding arc."""
        A = np.array([0.0, sign * self.apex])
        J1 = np.array([self.a, sign * 0.5])
        J2 = np.array([-self.a, sign * 0.5])
        u1 = (J1 - A) / np.linalg.norm(J1 - A)
        u2 = (J2 - A) / np.linalg.norm(J2 - A)
        b = np.array([0.0, -sign])
        phi = math.acos(float(u1 @ b))
        C = A + b * self.delta_s / math.sin(phi)
        T1 = A + u1 * self.delta_s / math.tan(phi)
        T2 = A + u2 * self.delta_s / math.tan(phi)
        t1 = math.atan2(T1[1] - C[1], T1[0] - C[0])
        t2 = math.atan2(T2[1] - C[1], T2[0] - C[0])
        return C, T1, T2, t1, t2

    def outer_loop(self) -> Loop:
        R, a = self.R, self.a
        tj = math.asin(0.5 / R)
        C, T1, T2, t1, t2 = self.fillet(1.0)
        Cb, T1b, T2b, t1b, t2b = self.fillet(-1.0)
        # the lower arc runs from T2b (left) to T1b (right) counter-clockwise
        return Loop(
            [
                Arc((0.0, 0.0), R, -tj, tj),
                Segment((a, 0.5), tuple(T1)),
                Arc(tuple(C), self.delta_s, t1, t2),
                Segment(tuple(T2), (-a, 0.5)),
                Arc((0.0, 0.0), R, math.pi - tj, math.pi + tj),
                Segment((-a, -0.5), tuple(T2b)),
                Arc(tuple(Cb), self.delta_s, t2b, t1b if t1b > t2b else t1b + 2 * math.pi),
                Segment(tuple(T1b), (a, -0.5)),
            ],
            OUTER,
        )

    def upper_profile_loop(self) -> Loop:
        """Closed profile in (x1, r >= 0) for revolution about the x1-axis."""
        R, a = self.R, self.a
        tj = math.asin(0.5 / R)
        C, T1, T2, t1, t2 = self.fillet(1.0)
        return Loop(
            [
                Segment((1.0, 0.0), (R, 0.0)),
                Arc((0.0, 0.0), R, 0.0, tj),
                Segment((a, 0.5), tuple(T1)),
                Arc(tuple(C), self.delta_s, t1, t2),
                Segment(tuple(T2), (-a, 0.5)),
                Arc((0.0, 0.0), R, math.pi - tj, math.pi),
                Segment((-R, 0.0), (-1.0, 0.0)),
                Arc((0.0, 0.0), 1.0, math.pi, 0.0),
            ],
            OUTER,
        )


def aeps_boundary(n: int, p: int, eps: float, delta_s: float | None = None) -> AepsBoundary:
    if not 0 < eps < 0.5:
        raise FamilyError("eps must lie in (0, 1/2)")
    if not 0 <= p <= n - 2:
        raise FamilyError("aeps needs 0 <= p <= n - 2")
    if delta_s is None:
        delta_s = eps**n / 10.0
    return AepsBoundary(n, p, eps, delta_s)


@dataclass
class FamilyDomain:
    """A generated domain: boundary loops (2D or a revolution profile),
    holes, and mesh / measure helpers."""

    name: str
    n: int
    loops: list[Loop]
    holes: list[tuple[np.ndarray, float]]
    params: dict
    revolved: bool = False
    size_field: Callable[[np.ndarray, float], np.ndarray] | None = None

    @property
    def area(self) -> float:
        if self.revolved:
            raise NotImplementedError("volume of revolved domains: integrate the mesh")
        return region_area(self.loops)

    def outer_loop(self) -> Loop:
        return self.loops[0]

    def boundary_points(self, h: float = 0.01) -> np.ndarray:
        return self.loops[0].sample(h)

    def diameter(self, h: float = 0.005) -> float:
        from scipy.spatial import ConvexHull

        pts = self.boundary_points(h)
        hull = pts[ConvexHull(pts).vertices]
        d = hull[:, None, :] - hull[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def contact_radius(self) -> float:
        """Distance from the main (first) hole to the outer boundary."""
        c, r = self.holes[0]
        best = math.inf
        for piece in self.loops[0].pieces:
            if isinstance(piece, Segment):
                q = piece.project(c[None, :])[0]
                best = min(best, float(np.linalg.norm(q - c)))
            else:
                d = np.linalg.norm(np.asarray(piece.center) - c)
                if d < 1e-14:
                    best = min(best, piece.radius)
                else:
                    # nearest point of the arc's circle, clamped to the arc
                    q = piece.project(c[None, :])[0]
                    best = min(best, float(np.linalg.norm(q - c)))
        return best - r

    def mesh(self, h: float, sectors: int | None = None, **kw) -> SimplicialMesh:
        if self.size_field is not None:
            sf = self.size_field

            def size(x):
                return sf(x, h)

        else:
            size = h
        m = mesh2d(self.loops, size, **kw)
        if not self.revolved:
            return m
        rmax = float(m.vertices[:, 1].max())
        if sectors is None:
            sectors = max(8, math.ceil(2 * math.pi * rmax / h))
        vol = revolve(m, sectors)
        bf = vol.boundary_facets
        mid = vol.vertices[vol.simplices[2][bf]].mean(axis=1)
        tags = np.full(len(bf), OUTER, dtype=np.int64)
        for k, (c, r) in enumerate(self.holes):
            near = np.abs(np.linalg.norm(mid - c, axis=1) - r) < 0.25 * h
            tags[near] = k
        vol.boundary_tags = tags
        return vol

    def to_domain_spec(self, arc_samples: int = 256) -> DomainSpec:
        """Convex outer body as a polytope through boundary vertices and arcs
        (only meaningful when the outer loop is convex)."""
        if self.n != 2 or self.revolved:
            raise FamilyError("to_domain_spec is available for planar families")
        pts = []
        for piece in self.loops[0].pieces:
            if isinstance(piece, Segment):
                pts.append(piece.start[None, :])
            else:
                k = max(2, int(arc_samples * abs(piece.theta1 - piece.theta0) / (2 * math.pi)) + 1)
                if piece.radius < 1e-2:
                    k = 4
                pts.append(piece.points(k))
        P = np.vstack(pts)
        keep = np.ones(len(P), dtype=bool)
        d = np.linalg.norm(np.diff(np.vstack([P, P[:1]]), axis=0), axis=1)
        keep[1:] = d[:-1] > 1e-9
        return DomainSpec(2, Polytope(P[keep]), [Hole(c, r) for c, r in self.holes])


def _aeps_size(bnd: AepsBoundary, eps: float, outer: Loop):
    thick = eps**bnd.n

    def size(x, h):
        x = np.atleast_2d(x)
        d_in = np.abs(np.linalg.norm(x, axis=1) - 1.0)
        d_out = outer.distance(x)
        local = 0.5 * (d_in + d_out)
        s = np.clip(local, 0.5 * thick, h)
        # resolve the cutoff band of the test form and the fillet
        band = np.abs(x[:, 1]) < eps
        s = np.where(band, np.minimum(s, eps / 10.0), s)
        return np.minimum(s, np.maximum(h, 0.5 * thick))

    return size


def aeps(n: int, p: int, eps: float, delta_s: float | None = None) -> FamilyDomain:
    """The pinched shell A^p_eps for (n, p) in {(2, 0), (3, 1)}."""
    bnd = aeps_boundary(n, p, eps, delta_s)
    if (n, p) == (2, 0):
        outer = bnd.outer_loop()
        loops = [outer, circle_loop((0.0, 0.0), 1.0, 0)]
        return FamilyDomain(
            "aeps",
            2,
            loops,
            [(np.zeros(2), 1.0)],
            {"n": n, "p": p, "eps": eps, "delta_s": bnd.delta_s},
            size_field=_aeps_size(bnd, eps, outer),
        )
    if (n, p) == (3, 1):
        prof = bnd.upper_profile_loop()
        return FamilyDomain(
            "aeps",
            3,
            [prof],
            [(np.zeros(3), 1.0)],
            {"n": n, "p": p, "eps": eps, "delta_s": bnd.delta_s},
            revolved=True,
            size_field=_aeps_size(bnd, eps, prof),
        )
    raise FamilyError("built-in aeps generators cover (n, p) = (2, 0) and (3, 1)")


def aeps_limit(n: int = 3, p: int = 1, cusp_cut: float = 0.2, delta_s: float = 0.02) -> FamilyDomain:
    """The eps = 0 limit domain, with its two tangential cusps at r = 1/2
    truncated at r = 1/2 + cusp_cut (this does not change its topology)."""
    if (n, p) != (3, 1):
        raise FamilyError("the limit generator covers n = 3, p = 1")
    bnd = AepsBoundary(n, p, 1e-9, delta_s)
    a0 = math.sqrt(0.75)
    r0 = 0.5 + cusp_cut
    if r0 >= 1.0:
        raise FamilyError("cusp_cut must be below 1/2")
    x_in = math.sqrt(1 - r0 * r0)
    x_out = (1 - r0 / 2) / a0
    C, T1, T2, t1, t2 = bnd.fillet(1.0)
    al = math.asin(r0)
    prof = Loop(
        [
            Segment((x_in, r0), (x_out, r0)),
            Segment((x_out, r0), tuple(T1)),
            Arc(tuple(C), delta_s, t1, t2),
            Segment(tuple(T2), (-x_out, r0)),
            Segment((-x_out, r0), (-x_in, r0)),
            Arc((0.0, 0.0), 1.0, math.pi - al, al),
        ],
        OUTER,
    )
    return FamilyDomain(
        "aeps_limit", 3, [prof], [(np.zeros(3), 1.0)], {"cusp_cut": cusp_cut}, revolved=True
    )


# ---------------------------------------------------------- dumbbell


@dataclass
class Dumbbell(FamilyDomain):
    overlap: float = 0.5

    def cover_predicates(self):
        """Barycenter predicates of U_1 (left ball and neck up to x = w/2) and
        U_2 (right ball and neck from x = -w/2), w the overlap length."""
        w = self.overlap / 2

        def u1(x):
            return x[:, 0] <= w

        def u2(x):
            return x[:, 0] >= -w

        return u1, u2

    def overlap_area(self) -> float:
        return self.overlap * 2 * self.params["eps"]


def dumbbell(n: int, eps: float, fillet: float | None = None, overlap: float = 0.5) -> Dumbbell:
    """Unit disks at (-1.5, 0), (1.5, 0) joined by the neck |y| <= eps."""
    if n != 2:
        raise FamilyError("the built-in dumbbell is planar")
    if not 0 < eps <= 0.4:
        raise FamilyError("eps must lie in (0, 0.4]")
    f = eps / 2 if fillet is None else fillet
    # fillet circle tangent to y = eps (above) and externally to the right disk
    xc = 1.5 - math.sqrt((1 + f) ** 2 - (eps + f) ** 2)
    yc = eps + f
    ang_disk = math.atan2(yc, xc - 1.5)
    tp_disk = np.array([1.5 + math.cos(ang_disk), math.sin(ang_disk)])
    pieces = _dumbbell_pieces(eps, f, xc, yc, tp_disk)
    loop = Loop(pieces, OUTER)
    hn = eps / 2

    def size(x, h):
        x = np.atleast_2d(x)
        neck = np.abs(x[:, 0]) < 0.5 + 2 * eps + 0.1
        return np.where(neck, np.minimum(h, max(hn, 0.0)), h)

    return Dumbbell(
        "dumbbell",
        2,
        [loop],
        [],
        {"eps": eps, "fillet": f},
        size_field=size,
        overlap=overlap,
    )


def _dumbbell_pieces(eps, f, xc, yc, tp):
    """Clockwise boundary: upper neck, upper-right fillet, right disk,
    lower-right fillet, lower neck, lower-left fillet, left disk, upper-left
    fillet."""

    def ang(p, c):
        return math.atan2(p[1] - c[1], p[0] - c[0])

    def short(a0, a1):
        while a1 - a0 > math.pi:
            a1 -= 2 * math.pi
        while a0 - a1 > math.pi:
            a1 += 2 * math.pi
        return a1

    tpx, tpy = float(tp[0]), float(tp[1])
    a0 = ang((xc, eps), (xc, yc))
    ur = Arc((xc, yc), f, a0, short(a0, ang((tpx, tpy), (xc, yc))))
    # right disk, clockwise the long way round through angle 0
    d0 = ang((tpx, tpy), (1.5, 0.0))
    rd = Arc((1.5, 0.0), 1.0, d0, -d0)
    b0 = ang((tpx, -tpy), (xc, -yc))
    lr = Arc((xc, -yc), f, b0, short(b0, ang((xc, -eps), (xc, -yc))))
    # left half by the point reflection (x, y) -> (-x, -y)
    ll = Arc((-xc, -yc), f, ur.theta0 + math.pi, ur.theta1 + math.pi)
    ld = Arc((-1.5, 0.0), 1.0, d0 + math.pi, -d0 + math.pi)
    ul = Arc((-xc, yc), f, lr.theta0 + math.pi, lr.theta1 + math.pi)
    return [
        Segment((-xc, eps), (xc, eps)),
        ur,
        rd,
        lr,
        Segment((xc, -eps), (-xc, -eps)),
        ll,
        ld,
        ul,
    ]


# ------------------------------------------------------ multi-hole aeps


def multi_hole_family(
    n: int, p: int, num_holes: int, eps: float, r: float, delta_s: float | None = None
) -> FamilyDomain:
    """A^{p-1}_eps with num_holes - 1 extra holes of radius r centred on the
    r-axis inside the thick caps, alternating between the two caps."""
    if (n, p) != (2, 1):
        raise FamilyError("the built-in multi-hole family is planar (n = 2, p = 1)")
    if num_holes < 1:
        raise FamilyError("need at least one hole")
    base = aeps(n, p - 1, eps, delta_s)
    bnd = aeps_boundary(n, p - 1, eps, delta_s)
    extra = num_holes - 1
    per_cap = [math.ceil(extra / 2), extra // 2]
    R = bnd.R
    holes = list(base.holes)
    loops = list(base.loops)
    # along the axis, usable room in a cap runs from y = 1 to where the
    # clearance to the tangent lines, (R^2 - y/2)/R, drops below r
    for cap, count in zip((1.0, -1.0), per_cap):
        if count == 0:
            continue
        gap = r
        ys = [1.0 + gap + r + j * (2 * r + gap) for j in range(count)]
        top = ys[-1] + r
        clearance = (R * R - ys[-1] / 2) / R - r
        if clearance < gap or top >= bnd.apex - bnd.delta_s:
            raise GeometryError("infeasible packing: holes do not fit in the cap")
        for y in ys:
            c = np.array([0.0, cap * y])
            holes.append((c, r))
            loops.append(circle_loop(tuple(c), r, len(holes) - 1))
    size0 = base.size_field

    def size(x, h):
        s = size0(x, h)
        for c, rr in holes[1:]:
            near = np.linalg.norm(np.atleast_2d(x) - c, axis=1) < rr + h
            s = np.where(near, np.minimum(s, max(rr / 3, 0.5 * h)), s)
        return s

    return FamilyDomain(
        "multi_hole_aeps",
        2,
        loops,
        holes,
        {"n": n, "p": p, "eps": eps, "holes": num_holes, "r": r},
        size_field=size,
    )


def annulus(n: int, r_in: float, r_out: float) -> DomainSpec:
    from .geometry import Ball

    return DomainSpec(n, Ball(np.zeros(n), r_out), [Hole(np.zeros(n), r_in)])


def build(spec: FamilySpec):
    """Construct the domain described by a FamilySpec."""
    if spec.family == "aeps":
        return aeps(spec.n, spec.p, spec.eps)
    if spec.family == "dumbbell":
        return dumbbell(spec.n, spec.eps)
    if spec.family == "multi_hole_aeps":
        return multi_hole_family(spec.n, spec.p, spec.holes, spec.eps, spec.hole_radius or 0.1)
    return annulus(spec.n, spec.hole_radius or 1.0, 2.0)
