import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import Voronoi

from conftest import box
from hodgebound.geometry import (
    Ball,
    DomainSpec,
    GeometryError,
    Hole,
    domain_volume,
    hypothesis_order,
    measure,
    power_diagram,
    transform,
)


def test_concentric_measures():
    spec = DomainSpec(2, Ball(np.zeros(2), 2.0), [Hole(np.zeros(2), 0.5)])
    g = measure(spec)
    assert g.Rc == pytest.approx(1.5)
    assert g.D == pytest.approx(4.0)


def test_two_holes_in_square():
    spec = DomainSpec(2, box(0, 0, 10, 10), [Hole(np.array([3.0, 5.0]), 1.0), Hole(np.array([7.0, 5.0]), 1.0)])
    g = measure(spec)
    assert g.r_c == pytest.approx(2.0)
    assert g.d_h == pytest.approx(2.0)
    assert g.Rc_hat == pytest.approx(1.0)
    assert g.RP == pytest.approx(g.Rc_hat)


def test_degenerate_spec_rejected():
    with pytest.raises(GeometryError):
        DomainSpec(2, Ball(np.zeros(2), 1.0), [Hole(np.array([0.6, 0.0]), 0.5)])
    with pytest.raises(GeometryError):
        DomainSpec(2, box(0, 0, 4, 4), [Hole(np.array([1.5, 2.0]), 0.5), Hole(np.array([2.5, 2.0]), 0.5)])


def test_symmetric_wall():
    spec = DomainSpec(2, box(-3, -2, 3, 2), [Hole(np.array([-1.5, 0.0]), 0.5), Hole(np.array([1.5, 0.0]), 0.5)])
    part = power_diagram(spec)
    xs = part.cells[0].vertices[:, 0]
    assert xs.max() == pytest.approx(0.0, abs=1e-12)


def test_radical_axis_wall():
    spec = DomainSpec(2, box(-2, -3, 7, 3), [Hole(np.zeros(2), 1.0), Hole(np.array([4.0, 0.0]), 2.0)])
    part = power_diagram(spec)
    assert part.cells[0].vertices[:, 0].max() == pytest.approx(13 / 8, abs=1e-12)
    assert part.cells[1].vertices[:, 0].min() == pytest.approx(13 / 8, abs=1e-12)


def test_single_hole_partition():
    spec = DomainSpec(2, box(0, 0, 2, 2), [Hole(np.array([1.0, 1.0]), 0.3)])
    part = power_diagram(spec)
    assert len(part.cells) == 1
    assert part.k(1) == 0
    assert part.cells[0].volume == pytest.approx(domain_volume(spec))
    assert hypothesis_order(part).satisfied


def test_collinear_order_accepted():
    spec = DomainSpec(
        2, box(0, 0, 8, 2), [Hole(np.array([x, 1.0]), 0.3) for x in (1.0, 3.0, 5.0, 7.0)]
    )
    res = hypothesis_order(power_diagram(spec))
    assert res.satisfied
    # prefixes of a left-to-right (or reversed) strip are rectangles
    assert res.order in ([0, 1, 2, 3], [3, 2, 1, 0]) or len(res.order) == 4


def test_grid_arrangement_fails():
    # 2x2 grid of holes: every three-cell prefix is an L-shaped union
    holes = [Hole(np.array(c), 0.2) for c in ([1.0, 1.0], [3.0, 1.0], [1.0, 3.0], [3.0, 3.0])]
    res = hypothesis_order(power_diagram(DomainSpec(2, box(0, 0, 4, 4), holes)))
    assert not res.satisfied
    assert res.violating_prefix is not None and len(res.violating_prefix) == 3


def test_two_holes_always_satisfied():
    holes = [Hole(np.array([1.0, 1.0]), 0.2), Hole(np.array([3.0, 2.5]), 0.4)]
    assert hypothesis_order(power_diagram(DomainSpec(2, box(0, 0, 4, 4), holes))).satisfied


def test_identical_radii_match_voronoi():
    rng = np.random.default_rng(3)
    for _ in range(5):
        pts = []
        while len(pts) < 5:
            c = rng.uniform(1, 9, 2)
            if all(np.linalg.norm(c - q) > 1.0 for q in pts):
                pts.append(c)
        spec = DomainSpec(2, box(0, 0, 10, 10), [Hole(c, 0.3) for c in pts])
        part = power_diagram(spec)
        vor = Voronoi(np.array(pts))
        walls = {tuple(sorted(map(int, pq))) for pq in vor.ridge_points}
        for i, cell in enumerate(part.cells):
            for a, b, j in zip(cell.A, cell.b, cell.labels):
                if j < 0:
                    continue
                # perpendicular bisector of c_i c_j
                mid = 0.5 * (pts[i] + pts[j])
                n = (pts[j] - pts[i]) / np.linalg.norm(pts[j] - pts[i])
                assert np.allclose(a, n, atol=1e-12)
                assert b == pytest.approx(n @ mid, abs=1e-12)
        adj = {tuple(sorted(e)) for e in part.adjacency}
        assert adj <= walls


def test_cell_volumes_tile_domain():
    spec = DomainSpec(2, box(0, 0, 6, 2), [Hole(np.array([x, 1.0]), r) for x, r in ((1, 0.3), (3, 0.4), (5, 0.25))])
    part = power_diagram(spec)
    total = sum(c.volume for c in part.cells)
    assert abs(total - domain_volume(spec)) / domain_volume(spec) < 1e-12


def test_cell_volumes_ball_outer():
    spec = DomainSpec(2, Ball(np.zeros(2), 3.0), [Hole(np.array([-1.0, 0.0]), 0.5), Hole(np.array([1.2, 0.3]), 0.3)])
    part = power_diagram(spec)
    total = sum(c.volume for c in part.cells)
    assert abs(total - domain_volume(spec)) / domain_volume(spec) < 1e-6


def test_transform_identity_and_normalization():
    spec = DomainSpec(2, Ball(np.zeros(2), 2.0), [Hole(np.zeros(2), 0.5)])
    assert measure(transform(spec, 1.0)) == measure(spec)
    assert measure(transform(spec, 2.0)).Rc == pytest.approx(3.0)
    g = measure(spec)
    assert measure(transform(spec, 1 / g.Rc)).Rc == pytest.approx(1.0)
    with pytest.raises(GeometryError):
        transform(spec, 0.0)


@given(
    s=st.floats(0.1, 10.0),
    t=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    r=st.floats(0.1, 0.6),
    x=st.floats(-0.5, 0.5),
)
def test_measure_homogeneity(s, t, r, x):
    spec = DomainSpec(2, box(-2, -1.5, 2, 1.5), [Hole(np.array([x - 1.0, 0.0]), r), Hole(np.array([x + 1.0, 0.2]), 0.3)])
    a, b = measure(spec), measure(transform(spec, s, t))
    for f in ("D", "Rc", "Rc_hat", "Rh_min", "Rh_max", "RP", "r_c", "d_h"):
        assert getattr(b, f) == pytest.approx(s * getattr(a, f), rel=1e-12)


@given(r1=st.floats(0.1, 0.5), r2=st.floats(0.1, 0.5), y=st.floats(-0.5, 0.5))
def test_partition_parameter_below_contact_radius(r1, r2, y):
    spec = DomainSpec(2, box(0, 0, 6, 3), [Hole(np.array([1.5, 1.5]), r1), Hole(np.array([4.5, 1.5 + y]), r2)])
    g = measure(spec)
    assert g.RP <= g.Rc_hat + 1e-12
    if math.isclose(r1, r2):
        assert g.RP == pytest.approx(g.Rc_hat)
