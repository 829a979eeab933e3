import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from hodgebound import _kernels_py, dec, kernels

compiled = pytest.importorskip("hodgebound._kernels")


def _gram(mesh):
    g, vol = dec.barycentric_gradients(mesh)
    return np.einsum("eik,ejk->eij", g, g), vol


def test_compiled_backend_selected():
    if os.environ.get("HODGEBOUND_PURE_PYTHON"):
        pytest.skip("fallback forced")
    assert kernels.BACKEND == "compiled"


@pytest.mark.parametrize("fixture", ["square_mesh", "shell_mesh"])
def test_whitney_local_agrees(fixture, request):
    mesh = request.getfixturevalue(fixture)
    G, vol = _gram(mesh)
    for k in range(mesh.n + 1):
        a = _kernels_py.whitney_local(G, vol, k, mesh.n)
        b = compiled.whitney_local(G, vol, k, mesh.n)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_rank_mod_p_agrees(annulus_mesh, shell_mesh):
    P = 2**31 - 1
    for m in (annulus_mesh, shell_mesh):
        for p in range(m.n):
            A = sp.csc_matrix(dec.coboundary(m, p)).astype(np.int64)
            A.sort_indices()
            args = (A.shape[0], A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data.astype(np.int64), P)
            assert _kernels_py.rank_mod_p(*args) == compiled.rank_mod_p(*args)


def test_pure_python_switch():
    code = "import hodgebound.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, HODGEBOUND_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("impl", [_kernels_py.rank_mod_p, compiled.rank_mod_p])
def test_rank_mod_p_rejects_bad_layout(impl):
    A = sp.csc_matrix(np.array([[1, 0, 2], [0, 1, 1]]), dtype=np.int64)
    with pytest.raises(ValueError):
        impl(1, A.indptr, A.indices, A.data, 7)
    with pytest.raises(ValueError):
        impl(2, A.indptr, A.indices[:-1], A.data, 7)
