import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hodgebound import dec, families
from hodgebound.families import FamilyError, FamilySpec, aeps, aeps_boundary, chi, chi_prime, dumbbell


def test_cutoff_values():
    eps = 0.3
    r = np.array([0.0, eps / 3, eps / 2, 2 * eps / 3, 1.0])
    assert np.allclose(chi(eps, r), [0, 0, 0.5, 1, 1])
    fine = np.linspace(0, eps, 200001)
    assert chi_prime(eps, fine).max() == pytest.approx(4.5 / eps, rel=1e-6)
    assert chi_prime(eps, fine).max() <= families.CHI_LIPSCHITZ / eps


@given(eps=st.floats(0.01, 0.49), r=st.floats(0.0, 1.0))
def test_cutoff_derivative_matches_difference(eps, r):
    d = 1e-7
    fd = (chi(eps, r + d) - chi(eps, r - d)) / (2 * d)
    assert abs(fd - chi_prime(eps, r)) <= 1e-4 / eps**2


def test_aeps_boundary_relations():
    b = aeps_boundary(2, 0, 0.2)
    assert b.R == pytest.approx(1.04)
    assert b.apex == pytest.approx(2 * 1.04**2)
    # join point of sphere and tangent line is on both relations
    assert b.relation(np.array([b.a]), np.array([0.5]))[0] == pytest.approx(0, abs=1e-12)
    assert b.relation(np.array([0.0]), np.array([b.apex]))[0] == pytest.approx(0, abs=1e-12)
    assert b.relation(np.array([0.0]), np.array([0.0]))[0] < 0


def test_aeps_geometry():
    dom = aeps(2, 0, 0.2)
    R = 1.04
    assert dom.contact_radius() == pytest.approx(R - 1, rel=1e-9)
    assert dom.area > math.pi * (R * R - 1)
    m = dom.mesh(0.15)
    assert m.volume == pytest.approx(dom.area, rel=0.01)
    assert dec.betti_numbers(m) == (1, 1, 0)


def test_aeps_area_shrinks_with_eps():
    a = [aeps(2, 0, e).area for e in (0.1, 0.2, 0.3)]
    assert a[0] < a[1] < a[2]


def test_form_degree_and_support():
    w = families.test_form(3, 1, 0.2)
    x = np.array([[0.5, 0.0, 0.01], [0.5, 0.0, 0.5], [0.5, 0.3, 0.4]])
    v = w.evaluate(x)
    assert v.shape == (3, 3)
    assert np.allclose(v[0], 0)
    assert w.d_density(x)[1] == 0
    # closed away from the transition band: angular form of R^2 has norm 1/r
    r = 0.5
    assert w.norm_density(x[1:2])[0] == pytest.approx(1 / r**2)


def test_sign_form_p0():
    w = families.test_form(2, 0, 0.2)
    v = w.evaluate(np.array([[0.0, 1.0], [0.0, -1.0], [0.0, 0.01]]))
    assert np.allclose(v, [1, -1, 0])


def test_invalid_parameters():
    with pytest.raises(FamilyError):
        aeps(2, 1, 0.1)
    with pytest.raises(FamilyError):
        aeps_boundary(2, 0, 0.6)
    with pytest.raises(FamilyError):
        families.test_form(3, 2, 0.1)
    with pytest.raises(FamilyError):
        FamilySpec("torus")
    with pytest.raises(FamilyError):
        dumbbell(2, 0.0)


def test_dumbbell_cover_and_topology():
    db = dumbbell(2, 0.1)
    u1, u2 = db.cover_predicates()
    pts = np.array([[-1.5, 0.0], [1.5, 0.0], [0.0, 0.0], [0.3, 0.0]])
    assert list(u1(pts)) == [True, False, True, False]
    assert list(u2(pts)) == [False, True, True, True]
    assert db.overlap_area() == pytest.approx(0.1)
    m = db.mesh(0.15)
    assert dec.betti_numbers(m) == (1, 0, 0)
    assert m.volume == pytest.approx(2 * math.pi + 2 * 0.1, rel=0.03)


def test_multi_hole_family():
    dom = families.multi_hole_family(2, 1, 3, 0.2, 0.1)
    assert len(dom.holes) == 3
    m = dom.mesh(0.12)
    assert dec.betti(m, 1) == 3


def test_build_dispatch():
    assert families.build(FamilySpec("dumbbell", eps=0.2)).name == "dumbbell"
    assert families.build(FamilySpec("annulus", hole_radius=0.5)).num_holes == 1
