"""Random covers and Cech cochains on a small square mesh."""

import numpy as np

from hodgebound.cech import CechCochain, cech_d, cech_delta, cover_from_masks
from hodgebound.meshgen import mesh2d, rectangle_loop

GRID = mesh2d([rectangle_loop(0, 0, 1, 1)], 0.2)


def _fatten(mask):
    touched = np.zeros(GRID.num(0), dtype=bool)
    touched[GRID.cells[mask].ravel()] = True
    return touched[GRID.cells].any(axis=1)


def random_cover(seed: int, k: int):
    """k random disk masks plus the leftover cells, fattened by one ring."""
    rng = np.random.default_rng(seed)
    bc = GRID.barycenters
    masks = []
    for _ in range(k):
        c = rng.uniform(0, 1, 2)
        masks.append(np.linalg.norm(bc - c, axis=1) <= rng.uniform(0.3, 0.7))
    rest = ~np.logical_or.reduce(masks)
    if rest.any():
        masks.append(rest)
    masks = [_fatten(m) for m in masks if m.any()]
    return cover_from_masks(GRID, masks, max_order=3)


def random_cochain(cover, q, r, seed):
    rng = np.random.default_rng(seed)
    vals = {}
    for I in cover.intersections[q]:
        vals[I] = np.where(cover.piece(I).masks[r], rng.standard_normal(GRID.num(r)), 0.0)
    return CechCochain(q, r, vals)


def max_diff(a: CechCochain, b: CechCochain) -> float:
    keys = set(a.values) | set(b.values)
    return max((np.abs(a.values.get(k, 0.0) - b.values.get(k, 0.0)).max() for k in keys), default=0.0)


def delta_squared(cover, c) -> float:
    dd = cech_delta(cover, cech_delta(cover, c))
    return max((np.abs(v).max() for v in dd.values.values()), default=0.0)


def commutator(cover, c) -> float:
    return max_diff(cech_d(cover, cech_delta(cover, c)), cech_delta(cover, cech_d(cover, c)))
