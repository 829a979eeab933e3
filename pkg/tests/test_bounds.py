import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hodgebound import bounds as B
from hodgebound.bounds import BoundInputError, EigenTable


def test_annulus_factor_p1_hand_value():
    r = B.annulus_factor(2, 1, 4.0, 1.0, 1.0)
    assert r.value == pytest.approx(1 / (16 * 65536), rel=1e-14)
    assert not r.explicit_constant


def test_annulus_factor_higher_degree_exponent():
    D, Rc = 3.0, 1.2
    r = B.annulus_factor(3, 2, D, Rc, Rc)
    assert r.value == pytest.approx((Rc / D) ** 13 / D**2, rel=1e-14)


def test_annulus_factor_errors():
    with pytest.raises(BoundInputError):
        B.annulus_factor(2, 2, 1, 1, 1)
    with pytest.raises(BoundInputError):
        B.annulus_factor(2, 1, 1, 2, 1)
    with pytest.raises(BoundInputError):
        B.annulus_factor(2, 1, 1, 0.5, 0)


def test_union_neumann_examples():
    assert B.union_neumann_bound(1.0, 2.0, 4.0, 4.0).value == pytest.approx(1 / 16)
    assert B.union_neumann_bound(0.0, 2.0, 4.0, 4.0).value == 0.0
    r = B.union_neumann_bound(1.0, 4.0, 3.0, math.inf)
    assert r.value == pytest.approx(3.0 / 4 / 32)
    assert r.explicit_constant
    with pytest.raises(BoundInputError):
        B.union_neumann_bound(3.0, 2.0, 1.0, 1.0)


def test_mcgowan_p1():
    assert B.mcgowan_bounds(1, {1: {(0,): 2.0, (1,): 2.0}}, 0.0).value == pytest.approx(1.0)
    assert B.mcgowan_bounds(1, {1: {(0,): 3.0}}, 5.0).value == pytest.approx(3.0)


def test_mcgowan_missing_data():
    with pytest.raises(BoundInputError):
        B.mcgowan_bounds(2, {2: {(0,): 1.0}, 1: {}}, 1.0, k0=2)


def test_mcgowan_p2_by_hand():
    table = {2: {(0,): 2.0, (1,): 4.0}, 1: {(0,): 8.0, (1,): 10.0, (0, 1): 5.0}}
    c = 3.0
    a0, a1 = 0.5, 0.25
    # i = j terms use the element itself: U_ii = U_i
    denom = a0 + a1
    denom += (c / 8.0 + 1) * 2 * a0 + (c / 10.0 + 1) * 2 * a1
    denom += 2 * (c / 5.0 + 1) * (a0 + a1)  # (0,1) and (1,0)
    r = B.mcgowan_bounds(2, table, c)
    assert r.value == pytest.approx(1 / 16 / denom, rel=1e-14)


def _constant_table(a: float, k0: int) -> dict:
    import itertools

    t = {}
    for q in (1, 2, 3):
        t[q] = {}
        for order in (1, 2, 3):
            for I in itertools.combinations(range(k0), order):
                t[q][I] = a
    return t


@pytest.mark.parametrize("a,k0", [(3.0, 3), (1.5, 2), (7.0, 1)])
def test_aleph_constant_tables_direct_sum(a, k0):
    lam = EigenTable(_constant_table(a, k0), k0)
    # with c = 0 only sum_i 1/a + sum_{i,j} 2/a survives
    expected = k0 * (1 / a + 2 * k0 / a)
    assert B.aleph(lam, 0.0, k0) == pytest.approx(expected, rel=1e-14)
    r = B.mcgowan_bounds(3, _constant_table(a, k0), 0.0, k0=k0)
    assert r.value == pytest.approx(1 / (18 * k0 * k0) / expected, rel=1e-14)


def test_aleph_brute_force_with_coupling():
    import itertools

    k0, c = 3, 0.7
    vals = iter([1.1, 2.3, 0.7, 4.1, 3.3, 1.9, 2.8, 5.5, 0.9, 1.4, 2.2, 3.9, 6.1, 1.7, 2.9, 4.4, 0.8, 3.1, 2.6, 1.3, 5.1])
    table = {q: {} for q in (1, 2, 3)}
    for q in (1, 2, 3):
        for order in (1, 2, 3):
            for I in itertools.combinations(range(k0), order):
                table[q][I] = next(vals)

    def L(q, *idx):
        I = tuple(sorted(set(idx)))
        return table[q][I]

    tot = 0.0
    for i in range(k0):
        tot += 1 / L(3, i)
        for j in range(k0):
            tot += (c / L(2, i, j) + 1) * (1 / L(3, i) + 1 / L(3, j))
            for k in range(k0):
                s = (
                    (1 / L(3, i) + 1 / L(3, j)) / L(2, i, j)
                    + (1 / L(3, j) + 1 / L(3, k)) / L(2, j, k)
                    + (1 / L(3, i) + 1 / L(3, k)) / L(2, i, k)
                )
                tot += c * (c / L(1, i, j, k) + 1) * s
    assert B.aleph(EigenTable(table, k0), c, k0) == pytest.approx(tot, rel=1e-13)


def test_modified_mcgowan():
    assert B.modified_mcgowan_factor(1, 1, 1, 1).value == pytest.approx(0.25)
    assert B.modified_mcgowan_factor(2, 3, 1, 0).value == pytest.approx(1 / (1 / 2 + 1 / 3))
    assert B.modified_mcgowan_factor(2, 3, math.inf, 4).value == pytest.approx(1 / (1 / 2 + 1 / 3))


def test_multi_hole_reductions():
    n, D, Rc, Rh = 3, 5.0, 1.0, 0.4
    for p in (1, 2):
        high, first = B.multi_hole_factors(n, p, D, Rc, Rh, Rh, 1)
        single = B.annulus_factor(n, p, D, Rc, Rh).value
        assert first.value == pytest.approx(single, rel=1e-13)
        if p == 1:
            assert high.value == pytest.approx(single, rel=1e-13)


def test_multi_hole_two_holes_extra_factor():
    _, one = B.multi_hole_factors(2, 1, 10.0, 1.0, 1.0, 1.0, 1)
    _, two = B.multi_hole_factors(2, 1, 10.0, 1.0, 1.0, 1.0, 2)
    assert two.value / one.value == pytest.approx(1e-2, rel=1e-13)


def test_multi_hole_index_and_errors():
    high, first = B.multi_hole_factors(2, 1, 4.0, 1.0, 0.2, 0.3, 3, k_p=2)
    assert high.eigen_index == 3 and first.eigen_index == 1
    with pytest.raises(BoundInputError):
        B.multi_hole_factors(2, 1, 4.0, 1.0, 0.2, 0.3, 0)
    with pytest.raises(BoundInputError):
        B.multi_hole_factors(2, 2, 4.0, 1.0, 0.2, 0.3, 1)


def test_convex_and_fk():
    assert B.convex_and_fk_factors(1.0)[0].value == 1.0
    assert B.convex_and_fk_factors(2.0)[1].value == 0.25


def test_fitted_constant():
    K, spread = B.fitted_constant([2.0, 6.0], [1.0, 2.0])
    assert K == 2.0 and spread == 1.5


lengths = st.floats(0.1, 10.0)
scale = st.floats(0.2, 5.0)


@given(D=lengths, a=st.floats(0.05, 1.0), b=st.floats(0.05, 1.0), s=scale, n=st.integers(2, 4), p=st.integers(1, 3))
def test_annulus_factor_homogeneous(D, a, b, s, n, p):
    p = min(p, n - 1)
    Rc, Rh = a * D, a * b * D
    v = B.annulus_factor(n, p, D, Rc, Rh).value
    w = B.annulus_factor(n, p, s * D, s * Rc, s * Rh).value
    assert w == pytest.approx(v / s**2, rel=1e-9)


@given(D=lengths, a=st.floats(0.05, 1.0), b=st.floats(0.05, 1.0), s=scale, n=st.integers(2, 3), p=st.integers(1, 2), h=st.integers(1, 4))
def test_multi_hole_homogeneous_low_dimension(D, a, b, s, n, p, h):
    # n >= 4 with p >= 2 carries a bare RP^(-2(n-3)) and is not scale invariant
    p = min(p, n - 1)
    RP, R = a * D, a * b * D
    r = 0.5 * R
    base = B.multi_hole_factors(n, p, D, RP, r, R, h)
    scaled = B.multi_hole_factors(n, p, s * D, s * RP, s * r, s * R, h)
    for u, v in zip(base, scaled):
        assert v.value == pytest.approx(u.value / s**2, rel=1e-9)


@given(v1=st.floats(0.01, 1.0), mu1=st.floats(0.1, 50), mu2=st.floats(0.1, 50), s=scale)
def test_union_bound_homogeneous(v1, mu1, mu2, s):
    a = B.union_neumann_bound(v1, 1.0, mu1, mu2).value
    b = B.union_neumann_bound(v1 * s * s, s * s, mu1 / s**2, mu2 / s**2).value
    assert b == pytest.approx(a / s**2, rel=1e-12)
