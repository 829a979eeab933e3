import math

import numpy as np
import pytest

from hodgebound.dec import coboundary
from hodgebound.geometry import Ball
from hodgebound.meshgen import (
    Arc,
    Loop,
    MeshError,
    Segment,
    circle_loop,
    import_mesh,
    loop_area,
    mesh2d,
    mesh3d_shell,
    polygon_loop,
    rectangle_loop,
    submesh,
    write_mesh,
    write_off,
)


def test_unit_square_quality(square_mesh):
    assert square_mesh.min_angle() >= 20.0
    assert square_mesh.h <= 0.1 + 1e-12
    assert square_mesh.volume == pytest.approx(1.0, abs=1e-9)


def test_annulus_and_disk_euler():
    ann = mesh2d([circle_loop((0, 0), 2.0), circle_loop((0, 0), 1.0, 0)], 0.2)
    disk = mesh2d([circle_loop((0, 0), 1.0)], 0.2)
    assert ann.euler_characteristic() == 0
    assert disk.euler_characteristic() == 1


def test_boundary_snapped_to_circle():
    m = mesh2d([circle_loop((0, 0), 1.0)], 0.1)
    bv = np.unique(m.simplices[1][m.boundary_facets].ravel())
    r = np.linalg.norm(m.vertices[bv], axis=1)
    assert np.allclose(r, 1.0, atol=1e-12)


def test_size_field_respected():
    def size(x):
        return np.where(np.atleast_2d(x)[:, 0] < 0.5, 0.05, 0.2)

    m = mesh2d([rectangle_loop(0, 0, 1, 1)], size)
    p = m.vertices[m.cells]
    longest = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2).max(axis=1)
    assert np.all(longest <= size(p.mean(axis=1)) * (1 + 1e-9))


def test_self_intersecting_boundary_rejected():
    bow = polygon_loop([(0, 0), (1, 1), (1, 0), (0, 1)])
    with pytest.raises(MeshError):
        mesh2d([bow], 0.1)


def test_shell_mesh(shell_mesh):
    assert shell_mesh.n == 3
    assert np.all(shell_mesh.volumes > 0)
    # S^2 x I is homotopy equivalent to S^2
    assert shell_mesh.euler_characteristic() == 2


def test_shell_volume():
    m = mesh3d_shell(1.0, Ball(np.zeros(3), 2.0), 0.2)
    exact = 4 * math.pi / 3 * (8 - 1)
    assert abs(m.volume - exact) / exact < 0.02


def test_shell_too_coarse():
    with pytest.raises(MeshError):
        mesh3d_shell(1.0, Ball(np.zeros(3), 1.2), 0.5)


def test_boundary_of_boundary_vanishes(square_mesh, shell_mesh):
    for m in (square_mesh, shell_mesh):
        for p in range(m.n - 1):
            DD = (coboundary(m, p + 1).astype(np.int64) @ coboundary(m, p).astype(np.int64)).tocoo()
            assert DD.nnz == 0 or np.all(DD.data == 0)


def test_round_trip(tmp_path, square_mesh):
    path = tmp_path / "square.mesh"
    write_mesh(square_mesh, path)
    m = import_mesh(path)
    assert np.array_equal(m.vertices, square_mesh.vertices)
    assert np.array_equal(m.cells, square_mesh.cells)
    assert np.array_equal(m.boundary_tags, square_mesh.boundary_tags)
    write_off(m, tmp_path / "square.off")
    assert (tmp_path / "square.off").read_text().startswith("OFF")


def test_flipped_tet_rejected(tmp_path):
    V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    path = tmp_path / "flip.mesh"
    path.write_text(
        "dim 3\nvertices 4\n" + "\n".join(" ".join(map(str, v)) for v in V) + "\ncells 1\n1 0 2 3\n"
    )
    with pytest.raises(MeshError) as err:
        import_mesh(path)
    assert err.value.code == "inverted"


def test_import_errors(tmp_path):
    empty = tmp_path / "empty.mesh"
    empty.write_text("")
    with pytest.raises(MeshError) as err:
        import_mesh(empty)
    assert err.value.code == "parse"
    dup = tmp_path / "dup.mesh"
    dup.write_text("dim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 2\n0 1 2\n0 1 2\n")
    with pytest.raises(MeshError) as err:
        import_mesh(dup)
    assert err.value.code == "duplicate"
    dangling = tmp_path / "dangling.mesh"
    dangling.write_text("dim 2\nvertices 4\n0 0\n1 0\n0 1\n5 5\ncells 1\n0 1 2\n")
    with pytest.raises(MeshError) as err:
        import_mesh(dangling)
    assert err.value.code == "dangling"


def test_submesh_identity_and_half(square_mesh):
    sub, smap = submesh(square_mesh, lambda x: np.ones(len(x), dtype=bool))
    assert sub.num(2) == square_mesh.num(2)
    assert sub.volume == pytest.approx(1.0)
    half, _ = submesh(square_mesh, lambda x: x[:, 0] < 0.5)
    assert abs(half.volume - 0.5) <= square_mesh.h
    with pytest.raises(MeshError):
        submesh(square_mesh, lambda x: x[:, 0] > 2)


def test_loop_area_exact():
    assert loop_area(circle_loop((0.3, -0.2), 0.7)) == pytest.approx(math.pi * 0.49, rel=1e-14)
    half = Loop([Arc((0.0, 0.0), 1.0, 0.0, math.pi), Segment((-1.0, 0.0), (1.0, 0.0))])
    assert abs(loop_area(half)) == pytest.approx(math.pi / 2, rel=1e-14)
