import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.linalg import eigsh

from hodgebound import dec, families
from hodgebound.dec import (
    Cochain,
    FunctionForm,
    betti,
    betti_numbers,
    coboundary,
    de_rham_sample,
    grundmann_moeller,
    mass_matrix,
    rank_exact,
    rayleigh,
    up_pencil,
)
from hodgebound.meshgen import SimplicialMesh, mesh2d, rectangle_loop

TRI = SimplicialMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))
TET = SimplicialMesh(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float), np.array([[0, 1, 2, 3]]))


def test_single_triangle_coboundary():
    D0 = coboundary(TRI, 0).toarray()
    D1 = coboundary(TRI, 1).toarray()
    assert D0.shape == (3, 3)
    assert np.all(np.abs(D0).sum(axis=1) == 2)
    assert np.all(D1 @ D0 == 0)
    assert np.all(D0 @ np.ones(3) == 0)
    assert coboundary(TRI, 2).shape == (0, 1)


def test_linear_mass_matrix_oracle():
    M0 = mass_matrix(TRI, 0).toarray()
    ref = (0.5 / 12) * np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]])
    assert np.allclose(M0, ref, atol=1e-15)


def _quadrature_mass(mesh, p):
    """Whitney mass matrix by high-order quadrature of the basis functions."""
    g, vol = dec.barycentric_gradients(mesh)
    n = mesh.n
    bary, w = grundmann_moeller(n, 3)
    subs = dec.kernels.local_subsets(n, p)
    m = len(subs)
    out = np.zeros((len(vol), m, m))
    for q, lam in zip(w, bary):
        vals = []
        for sig in subs:
            # W_sigma = p! sum_i (-1)^i lam_{s_i} dlam_{s_0} ^ ... (omit i) ...
            if p == 0:
                vals.append(np.full((len(vol), 1), lam[sig[0]]))
                continue
            comps = []
            for I in itertools.combinations(range(n), p):
                acc = np.zeros(len(vol))
                for i in range(p + 1):
                    rest = [s for k, s in enumerate(sig) if k != i]
                    G = g[:, rest, :][:, :, list(I)]
                    acc += (-1) ** i * lam[sig[i]] * np.linalg.det(G)
                comps.append(math.factorial(p) * acc)
            vals.append(np.stack(comps, axis=1))
        for a in range(m):
            for b in range(m):
                out[:, a, b] += q * vol * (vals[a] * vals[b]).sum(axis=1)
    return out


@pytest.mark.parametrize("mesh", [TRI, TET])
def test_mass_matrices_match_quadrature(mesh):
    for p in range(mesh.n + 1):
        ref = _quadrature_mass(mesh, p)[0]
        M = mass_matrix(mesh, p).toarray()
        assert np.allclose(M, ref, atol=1e-13)


def test_top_degree_mass_is_inverse_volume():
    m = mesh2d([rectangle_loop(0, 0, 1, 1)], 0.3)
    M2 = mass_matrix(m, 2).toarray()
    assert np.allclose(M2, np.diag(np.diag(M2)))
    assert np.allclose(np.diag(M2), 1.0 / m.volumes)


def test_mass_positive_definite(square_mesh, shell_mesh):
    for m in (square_mesh, shell_mesh):
        for p in range(m.n + 1):
            M = mass_matrix(m, p)
            lo = eigsh(M, k=1, which="SA", return_eigenvectors=False)[0]
            assert lo > 0


def test_stiffness_psd(square_mesh):
    P = up_pencil(square_mesh, 1)
    lo = eigsh(P.K, k=1, which="SA", return_eigenvectors=False)[0]
    assert lo > -1e-10 * abs(P.K).max()


def test_rayleigh_coordinate(square_mesh):
    P = up_pencil(square_mesh, 0)
    x = square_mesh.vertices[:, 0]
    assert rayleigh(P, x) == pytest.approx(3.0, rel=1e-12)
    assert rayleigh(P, x - 0.5) == pytest.approx(12.0, rel=1e-12)
    assert rayleigh(P, np.ones(len(x))) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        rayleigh(P, np.zeros(len(x)))


def test_galerkin_consistency_order():
    errs, hs = [], []
    for h in (0.1, 0.05, 0.025):
        m = mesh2d([rectangle_loop(0, 0, 1, 1)], h)
        c = de_rham_sample(m, FunctionForm(0, lambda x: np.cos(np.pi * x[:, 0])))
        errs.append(abs(rayleigh(up_pencil(m, 0), c) - np.pi**2))
        hs.append(m.h)
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order >= 1.0


def test_scaling_homogeneity(square_mesh):
    x = np.cos(np.pi * square_mesh.vertices[:, 0])
    s = 2.5
    a = rayleigh(up_pencil(square_mesh, 0), x)
    b = rayleigh(up_pencil(square_mesh.scaled(s), 0), x)
    assert b == pytest.approx(a / s**2, rel=1e-12)


def test_betti_numbers(annulus_mesh, shell_mesh, square_mesh):
    assert betti_numbers(annulus_mesh) == (1, 1, 0)
    assert betti_numbers(shell_mesh) == (1, 0, 1, 0)
    assert betti_numbers(square_mesh) == (1, 0, 0)


def test_betti_numeric_path_agrees(annulus_mesh):
    for p in range(3):
        assert betti(annulus_mesh, p, method="numeric") == betti(annulus_mesh, p, method="exact")


def test_aeps_limit_first_betti():
    m = families.aeps_limit(3, 1).mesh(0.25)
    assert betti(m, 1) == 1


def test_rank_exact_small():
    import scipy.sparse as sp

    A = sp.csr_matrix(np.array([[1, -1, 0], [0, 1, -1], [1, 0, -1]]))
    assert rank_exact(A) == 2


def test_constant_form_line_integral():
    m = SimplicialMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))
    c = de_rham_sample(m, FunctionForm(1, lambda x: np.tile([1.0, 0.0], (len(x), 1))))
    e = m.simplices[1].tolist()
    assert c.values[e.index([0, 1])] == pytest.approx(1.0)


@given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-2, 2), d=st.floats(-2, 2))
def test_stokes_on_polynomials(a, b, c, d):
    # d(sample f) = sample(df) for a quadratic f: exact to round-off
    m = TET_MESH
    f = FunctionForm(0, lambda x: a * x[:, 0] ** 2 + b * x[:, 1] * x[:, 2] + c * x[:, 0] + d)
    df = FunctionForm(1, lambda x: np.column_stack([2 * a * x[:, 0] + c, b * x[:, 2], b * x[:, 1]]))
    lhs = coboundary(m, 0) @ de_rham_sample(m, f).values
    rhs = de_rham_sample(m, df).values
    assert np.allclose(lhs, rhs, atol=1e-12)


TET_MESH = SimplicialMesh(
    np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float),
    np.array([[0, 1, 2, 3], [1, 2, 3, 4]]),
)


def test_odd_form_integrates_to_zero():
    dom = families.aeps(2, 0, 0.2)
    m = dom.mesh(0.1)
    c = de_rham_sample(m, families.test_form(2, 0, 0.2))
    M = mass_matrix(m, 0)
    one = np.ones(m.num(0))
    assert abs(one @ (M @ c.values)) / (one @ (M @ one)) < 0.02


def test_cochain_length():
    assert len(Cochain(0, np.zeros(4))) == 4
