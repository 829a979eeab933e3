"""Lower-bound formulas for exact eigenvalues on perforated convex domains.

Two kinds of evaluators live here:

* explicit bounds (union Neumann bound, the McGowan-type gluing bounds),
  whose value is a genuine lower bound that computed eigenvalues can be
  checked against;
* geometric factors, lower bounds up to an unknown constant K(n) that
  are only meaningful as scaling laws.

Eigenvalues of empty sets are taken to be +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

INF = math.inf


class BoundInputError(ValueError):
    pass


@dataclass
class BoundReport:
    theorem: str
    value: float
    explicit_constant: bool
    formula: str
    inputs: dict = field(default_factory=dict)
    eigen_index: int = 1  # which exact eigenvalue the bound controls

    def row(self) -> dict:
        out = {
            "theorem": self.theorem,
            "value": self.value,
            "explicit_constant": self.explicit_constant,
            "eigen_index": self.eigen_index,
            "formula": self.formula,
        }
        out.update({k: v for k, v in self.inputs.items() if isinstance(v, (int, float))})
        return out


def _positive(**kw) -> None:
    for k, v in kw.items():
        if not (v > 0):
            raise BoundInputError(f"{k} must be positive, got {v}")


def _inv(x: float) -> float:
    return 0.0 if x == INF else 1.0 / x


# ------------------------------------------------------- single hole


def annulus_factor(n: int, p: int, D: float, Rc: float, Rh: float) -> BoundReport:
    """Geometric factor of the first exact eigenvalue of a convex domain
    minus one ball (constant K omitted)."""
    _positive(D=D, Rc=Rc, Rh=Rh)
    if n < 2 or not 1 <= p <= n - 1:
        raise BoundInputError("need n >= 2 and 1 <= p <= n - 1")
    if Rc > D:
        raise BoundInputError("contact radius exceeds the diameter")
    a, b = Rc / D, Rc / Rh
    if p == 1:
        value = a ** (n - 2) * min(1.0, a ** (3 * n + 2) * b ** (7 * n - 5)) / D**2
        text = "(1/D^2)(Rc/D)^(n-2) min{1, (Rc/D)^(3n+2) (Rc/Rh)^(7n-5)}"
    else:
        value = a ** (2 * n * n - n - 2) * min(1.0, b ** (3 * (n - 1) * (n + 1))) / D**2
        text = "(1/D^2)(Rc/D)^(2n^2-n-2) min{1, (Rc/Rh)^(3(n-1)(n+1))}"
    return BoundReport(
        "annulus", value, False, text, {"n": n, "p": p, "D": D, "Rc": Rc, "Rh": Rh}
    )


def primitive_ratio_factor(n: int, p: int, D: float, Rc: float, Rh: float) -> float:
    """Growth factor for ||eta|| / ||omega|| of the constructed primitive,
    Rc (D/Rc)^((n+1)p + n/2) (Rh/Rc)^((n-1)(3p/2+2)+p)."""
    _positive(D=D, Rc=Rc, Rh=Rh)
    return Rc * (D / Rc) ** ((n + 1) * p + n / 2) * (Rh / Rc) ** ((n - 1) * (1.5 * p + 2) + p)


# --------------------------------------------------- explicit bounds


def union_neumann_bound(
    vol_intersection: float, vol_total: float, mu1_U1: float, mu1_U2: float
) -> BoundReport:
    """(1/32) vol(U1 n U2)/vol(M) min{mu1(U1), mu1(U2)}."""
    if not vol_total > 0 or vol_intersection < 0:
        raise BoundInputError("volumes must be positive")
    if vol_intersection > vol_total * (1 + 1e-12):
        raise BoundInputError("intersection larger than the whole")
    m = min(mu1_U1, mu1_U2)
    value = 0.0 if vol_intersection == 0 else vol_intersection / vol_total * m / 32.0
    return BoundReport(
        "union_neumann",
        value,
        True,
        "(1/32) vol(U1 n U2)/vol(M) min{mu1(U1), mu1(U2)}",
        {
            "vol_intersection": vol_intersection,
            "vol_total": vol_total,
            "mu1_U1": mu1_U1,
            "mu1_U2": mu1_U2,
        },
    )


class EigenTable:
    """First exact eigenvalues of cover elements and their intersections.

    `table[q][I]` is the first exact q-eigenvalue of U_I, I a sorted tuple of
    distinct element indices.  Repeated indices collapse (U_ii = U_i);
    missing multi-indices of length >= 2 are empty intersections (+inf).
    """

    def __init__(self, table: Mapping[int, Mapping[tuple, float]], k0: int):
        self.table = {q: {tuple(sorted(k)): float(v) for k, v in d.items()} for q, d in table.items()}
        self.k0 = k0

    def __call__(self, q: int, *idx: int) -> float:
        I = tuple(sorted(set(idx)))
        d = self.table.get(q, {})
        if I in d:
            return d[I]
        if len(I) == 1:
            raise BoundInputError(f"missing intersection data: degree {q} eigenvalue of U_{I[0]}")
        return INF


def mcgowan_bounds(
    p: int,
    eigenvalues: Mapping[int, Mapping[tuple, float]],
    c_rho: float,
    k0: int | None = None,
    k_p: int = 0,
) -> BoundReport:
    """Gluing lower bound for lambda''_{p, 1+k_p}(M) from a k0-element cover.

    p = 1: 1 / sum_i 1/lam1(U_i)
    p = 2: (8 k0)^-1 / sum_i {1/lam2(U_i) + sum_j (c/lam1(U_ij) + 1)(1/lam2(U_i) + 1/lam2(U_j))}
    p = 3: (18 k0^2)^-1 / aleph with the triple sum written out below.
    """
    if p not in (1, 2, 3):
        raise BoundInputError("p must be 1, 2 or 3")
    if c_rho < 0:
        raise BoundInputError("c_rho must be non-negative")
    if k0 is None:
        k0 = len(eigenvalues.get(p, {}))
    if k0 < 1:
        raise BoundInputError("empty cover")
    lam = EigenTable(eigenvalues, k0)
    rng = range(k0)
    if p == 1:
        s = sum(_inv(lam(1, i)) for i in rng)
        value = INF if s == 0 else 1.0 / s
        text = "1 / sum_i 1/lam1(U_i)"
        denom = s
    elif p == 2:
        denom = 0.0
        for i in rng:
            li = _inv(lam(2, i))
            denom += li
            for j in rng:
                denom += (c_rho * _inv(lam(1, i, j)) + 1.0) * (li + _inv(lam(2, j)))
        value = INF if denom == 0 else 1.0 / (8 * k0) / denom
        text = "(8 k0)^-1 / sum_i {1/lam2(U_i) + sum_j (c/lam1(U_ij)+1)(1/lam2(U_i)+1/lam2(U_j))}"
    else:
        denom = aleph(lam, c_rho, k0)
        value = INF if denom == 0 else 1.0 / (18 * k0 * k0) / denom
        text = "(18 k0^2)^-1 / aleph"
    return BoundReport(
        f"mcgowan_p{p}",
        value,
        True,
        text,
        {"p": p, "k0": k0, "c_rho": c_rho, "denominator": denom},
        eigen_index=1 + k_p,
    )


def aleph(lam: EigenTable, c: float, k0: int) -> float:
    """Denominator of the degree-3 gluing bound, summed term by term."""
    total = 0.0
    for i in range(k0):
        a_i = _inv(lam(3, i))
        total += a_i
        for j in range(k0):
            a_j = _inv(lam(3, j))
            total += (c * _inv(lam(2, i, j)) + 1.0) * (a_i + a_j)
            for k in range(k0):
                a_k = _inv(lam(3, k))
                inner = (
                    (a_i + a_j) * _inv(lam(2, i, j))
                    + (a_j + a_k) * _inv(lam(2, j, k))
                    + (a_i + a_k) * _inv(lam(2, i, k))
                )
                total += c * (c * _inv(lam(1, i, j, k)) + 1.0) * inner
    return total


def modified_mcgowan_factor(lam_U1: float, lam_U2: float, lam_U12: float, c_rho: float) -> BoundReport:
    """1 / ((1/lam(U1) + 1/lam(U2)) (c_rho/lam(U1 n U2) + 1)), constant K omitted."""
    _positive(lam_U1=lam_U1, lam_U2=lam_U2, lam_U12=lam_U12)
    if c_rho < 0:
        raise BoundInputError("c_rho must be non-negative")
    value = 1.0 / ((_inv(lam_U1) + _inv(lam_U2)) * (c_rho * _inv(lam_U12) + 1.0))
    return BoundReport(
        "modified_mcgowan",
        value,
        False,
        "1 / ((1/lam(U1) + 1/lam(U2)) (c/lam(U12) + 1))",
        {"lam_U1": lam_U1, "lam_U2": lam_U2, "lam_U12": lam_U12, "c_rho": c_rho},
    )


# ------------------------------------------------------ several holes


def multi_hole_factors(
    n: int,
    p: int,
    D: float,
    RP: float,
    r_hat: float,
    R_hat: float,
    holes: int,
    k_p: int = 0,
) -> tuple[BoundReport, BoundReport]:
    """(higher-order factor for lambda''_{1+k_p}, first-eigenvalue factor
    under the nested-convexity hypothesis), constants omitted."""
    _positive(D=D, RP=RP, r_hat=r_hat, R_hat=R_hat)
    if holes < 1:
        raise BoundInputError("need at least one hole")
    if n < 2 or not 1 <= p <= n - 1:
        raise BoundInputError("need n >= 2 and 1 <= p <= n - 1")
    a, b = RP / D, RP / R_hat
    h = holes
    inputs = {"n": n, "p": p, "D": D, "RP": RP, "r_hat": r_hat, "R_hat": R_hat, "holes": h, "k_p": k_p}
    if p == 1:
        tail = a ** (n - 2) * min(1.0, a ** (3 * n + 2) * b ** (7 * n - 5)) / D**2
        high = BoundReport(
            "multi_hole_higher",
            tail / h,
            False,
            "(1/h)(1/D^2)(RP/D)^(n-2) min{1, (RP/D)^(3n+2) (RP/R_hat)^(7n-5)}",
            inputs,
            eigen_index=1 + k_p,
        )
        first = BoundReport(
            "multi_hole_first",
            (RP * r_hat ** (n - 1) / D**n) ** (h - 1) * tail,
            False,
            "(1/D^2)(RP r_hat^(n-1)/D^n)^(h-1) (RP/D)^(n-2) min{1, (RP/D)^(3n+2) (RP/R_hat)^(7n-5)}",
            inputs,
        )
    else:
        shell = min(1.0, b ** (3 * (n - 1) * (n + 1)))
        # the RP^(-2(n-3)) term is not scale invariant for n >= 4; kept literally
        high = BoundReport(
            "multi_hole_higher",
            a ** (2 * n * n + n - 6) * min(1.0, RP ** (-2.0 * (n - 3))) * shell / (h ** (2 * p - 1) * D**2),
            False,
            "(1/h^(2p-1))(1/D^2)(RP/D)^(2n^2+n-6) min{1, RP^(-2(n-3))} min{1, (RP/R_hat)^(3(n-1)(n+1))}",
            inputs,
            eigen_index=1 + k_p,
        )
        first = BoundReport(
            "multi_hole_first",
            a ** (2 * n * n - n - 4 + 2 * h) * shell / D**2,
            False,
            "(1/D^2)(RP/D)^(2n^2-n-4+2h) min{1, (RP/R_hat)^(3(n-1)(n+1))}",
            inputs,
        )
    return high, first


def identical_holes_factor(n: int, p: int, D: float, Rc_hat: float, Rh: float, holes: int) -> BoundReport:
    """First-eigenvalue factor for equal holes; the partition parameter
    equals the contact radius in that case."""
    _, first = multi_hole_factors(n, p, D, Rc_hat, Rh, Rh, holes)
    first.theorem = "identical_holes"
    return first


def convex_and_fk_factors(D: float) -> tuple[BoundReport, BoundReport]:
    """1/D^2 for convex domains (all degrees) and for the Dirichlet
    eigenvalue via Faber-Krahn."""
    _positive(D=D)
    v = 1.0 / D**2
    return (
        BoundReport("convex", v, False, "1/D^2", {"D": D}),
        BoundReport("faber_krahn", v, False, "1/D^2", {"D": D}),
    )


def report_table(reports: Sequence[BoundReport]) -> str:
    lines = [f"{'bound':<20} {'index':>5} {'value':>14} explicit  formula"]
    for r in reports:
        lines.append(
            f"{r.theorem:<20} {r.eigen_index:>5} {r.value:>14.6e} {str(r.explicit_constant):<9} {r.formula}"
        )
    return "\n".join(lines)


def fitted_constant(computed: Sequence[float], factors: Sequence[float]) -> tuple[float, float]:
    """Smallest ratio computed/factor (the fitted K) and the spread max/min."""
    ratios = [c / f for c, f in zip(computed, factors)]
    if not ratios or min(ratios) <= 0:
        raise BoundInputError("ratios must be positive")
    return min(ratios), max(ratios) / min(ratios)


__all__ = [
    "BoundReport",
    "BoundInputError",
    "EigenTable",
    "annulus_factor",
    "primitive_ratio_factor",
    "union_neumann_bound",
    "mcgowan_bounds",
    "aleph",
    "modified_mcgowan_factor",
    "multi_hole_factors",
    "identical_holes_factor",
    "convex_and_fk_factors",
    "report_table",
    "fitted_constant",
]
