import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cech_families import GRID, commutator, delta_squared, max_diff, random_cochain, random_cover
from hodgebound import cech, dec
from hodgebound.cech import (
    CoverError,
    NotExactError,
    cech_delta,
    cech_primitive,
    cover_from_masks,
    homotopy,
    partition_of_unity,
)
from hodgebound.meshgen import mesh2d, rectangle_loop

FAMILY = dict(seed=st.integers(0, 10**6), k=st.integers(2, 4), q=st.integers(0, 1), r=st.integers(0, 1))


@settings(max_examples=100)
@given(**FAMILY)
def test_cech_delta_squares_to_zero(seed, k, q, r):
    cover = random_cover(seed, k)
    c = random_cochain(cover, q, r, seed + 1)
    assert delta_squared(cover, c) <= 1e-12


@settings(max_examples=100)
@given(**FAMILY)
def test_cech_delta_commutes_with_d(seed, k, q, r):
    cover = random_cover(seed, k)
    c = random_cochain(cover, q, r, seed + 2)
    assert commutator(cover, c) <= 1e-12


@settings(max_examples=30)
@given(seed=st.integers(0, 10**6), k=st.integers(2, 3), r=st.integers(0, 1))
def test_homotopy_identity(seed, k, r):
    # K dhat + dhat K = id on Cech 1-cochains
    cover = random_cover(seed, k)
    pou = partition_of_unity(cover)
    c = random_cochain(cover, 1, r, seed + 3)
    lhs = homotopy(cover, pou, cech_delta(cover, c)) + cech_delta(cover, homotopy(cover, pou, c))
    assert max_diff(lhs, c) <= 1e-11


def test_partition_of_unity_sums_to_one():
    cover = random_cover(5, 3)
    pou = partition_of_unity(cover)
    assert np.allclose(pou.weights.sum(axis=0), 1.0)
    assert np.all(pou.weights >= 0)
    assert pou.c_rho > 0


def test_partition_gradient_matches_linear_ramp():
    # two half-rectangles overlapping in a strip of width w: c_rho ~ 1/w^2
    m = mesh2d([rectangle_loop(-1, 0, 1, 1)], 0.04)
    x = m.barycenters[:, 0]
    for w in (0.2, 0.4, 0.8):
        pou = partition_of_unity(cover_from_masks(m, [x <= w / 2, x >= -w / 2]))
        assert 0.25 <= pou.c_rho * w * w <= 4.0


def test_single_element_partition():
    pou = partition_of_unity(cover_from_masks(GRID, [np.ones(GRID.num(2), dtype=bool)]))
    assert np.all(pou.weights == 1.0)
    assert pou.c_rho == 0.0


def test_uncovered_cells_rejected():
    mask = np.zeros(GRID.num(2), dtype=bool)
    mask[:3] = True
    with pytest.raises(CoverError):
        cover_from_masks(GRID, [mask])


def test_single_element_primitive(square_mesh):
    cover = cover_from_masks(square_mesh, [np.ones(square_mesh.num(2), dtype=bool)])
    pou = partition_of_unity(cover)
    f = np.sin(square_mesh.vertices[:, 0] * 3) * square_mesh.vertices[:, 1]
    omega = dec.coboundary(square_mesh, 0) @ f
    res = cech_primitive(square_mesh, cover, pou, omega, 1)
    assert res.residual < 1e-10


def test_two_element_primitive_on_annulus(annulus_mesh):
    x = annulus_mesh.barycenters[:, 0]
    cover = cover_from_masks(annulus_mesh, [x <= 0.4, x >= -0.4])
    pou = partition_of_unity(cover)
    g = annulus_mesh.vertices[:, 0] ** 2 - annulus_mesh.vertices[:, 1]
    omega = dec.coboundary(annulus_mesh, 0) @ g
    res = cech_primitive(annulus_mesh, cover, pou, omega, 1)
    assert res.residual < 1e-10
    # eta differs from g by a constant
    d = res.eta - g
    assert np.ptp(d) < 1e-8 * np.abs(g).max()


def test_closed_nonexact_form_rejected(annulus_mesh):
    x = annulus_mesh.barycenters[:, 0]
    cover = cover_from_masks(annulus_mesh, [x <= 0.4, x >= -0.4])
    pou = partition_of_unity(cover)
    P = dec.up_pencil(annulus_mesh, 1)
    from hodgebound.eigensolve import smallest_positive

    harm = smallest_positive(P, 1).harmonic[:, 0]
    # locally exact on both halves, so the obstruction shows up in the Cech solve
    with pytest.raises((NotExactError, cech.CechError)):
        cech_primitive(annulus_mesh, cover, pou, harm, 1)


def test_glued_primitive_dumbbell():
    from hodgebound.families import dumbbell
    from hodgebound.eigensolve import smallest_positive

    db = dumbbell(2, 0.2)
    m = db.mesh(0.15)
    cover = cech.cover_from_predicates(m, db.cover_predicates())
    pou = partition_of_unity(cover)
    P = dec.up_pencil(m, 0)
    res = smallest_positive(P, 2)
    cand = dec.coboundary(m, 0) @ res.eigenvectors
    glued = cech.glued_primitive(m, cover, pou, 1, cand)
    assert glued.residual < 1e-8
    # Rayleigh quotient of a primitive bounds the first eigenvalue from above
    assert glued.quotient >= res.eigenvalues[0] * (1 - 1e-8)
    assert math.isfinite(glued.quotient)
