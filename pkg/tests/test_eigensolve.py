import numpy as np
import pytest

from hodgebound.dec import up_pencil
from hodgebound.eigensolve import LadderError, eigen_lower_envelope, smallest_positive
from hodgebound.meshgen import mesh2d, rectangle_loop


def test_unit_square_spectrum(square_mesh):
    res = smallest_positive(up_pencil(square_mesh, 0), 3, seed=1)
    ref = np.pi**2 * np.array([1, 1, 2])
    assert np.all(res.eigenvalues >= ref * (1 - 1e-9))
    assert np.allclose(res.eigenvalues, ref, rtol=0.05)
    assert res.deflation_dim == 1


def test_eigenvectors_are_m_orthonormal_with_matching_rayleigh(square_mesh):
    P = up_pencil(square_mesh, 0)
    res = smallest_positive(P, 3)
    X = res.eigenvectors
    assert np.allclose(X.T @ (P.M @ X), np.eye(3), atol=1e-8)
    assert np.allclose(np.diag(X.T @ (P.K @ X)), res.eigenvalues, rtol=1e-8)
    assert np.all(res.residuals <= 1e-6 * res.eigenvalues)


def test_one_form_pencil_square(square_mesh):
    res = smallest_positive(up_pencil(square_mesh, 1), 1)
    assert res.eigenvalues[0] == pytest.approx(2 * np.pi**2, rel=0.05)


def test_relabeling_invariance(square_mesh):
    rng = np.random.default_rng(3)
    perm = rng.permutation(len(square_mesh.vertices))
    a = smallest_positive(up_pencil(square_mesh, 0), 2).eigenvalues
    b = smallest_positive(up_pencil(square_mesh.relabeled(perm), 0), 2).eigenvalues
    assert np.allclose(a, b, rtol=1e-8)


def test_ladder_extrapolation_square():
    ladder = []
    for h in (0.1, 0.07, 0.05):
        m = mesh2d([rectangle_loop(0, 0, 1, 1)], h)
        ladder.append((m.h, smallest_positive(up_pencil(m, 0), 1)))
    env = eigen_lower_envelope(ladder)
    assert env.monotone
    assert env.value == pytest.approx(np.pi**2, rel=3e-3)


def test_constant_ladder():
    env = eigen_lower_envelope([(0.4, 2.0), (0.2, 2.0), (0.1, 2.0)])
    assert env.value == pytest.approx(2.0)
    assert env.error == pytest.approx(0.0)


def test_exact_quadratic_ladder_recovered():
    env = eigen_lower_envelope([(h, 5.0 + 3.0 * h * h) for h in (0.3, 0.2, 0.1)])
    assert env.value == pytest.approx(5.0, abs=1e-12)


def test_ladder_errors():
    with pytest.raises(LadderError):
        eigen_lower_envelope([(0.2, 1.0), (0.1, 0.9)])
    with pytest.raises(LadderError):
        eigen_lower_envelope([(0.3, 1.0), (0.2, 1.2), (0.1, 0.9)])
    env = eigen_lower_envelope([(0.3, 1.0), (0.2, 1.2), (0.1, 0.9)], strict=False)
    assert not env.monotone


def test_invalid_k(square_mesh):
    with pytest.raises(ValueError):
        smallest_positive(up_pencil(square_mesh, 0), 0)


def test_annulus_deflation_counts_harmonic(annulus_mesh):
    res = smallest_positive(up_pencil(annulus_mesh, 1), 1)
    assert res.harmonic.shape[1] == 1
    assert res.eigenvalues[0] > 0
