"""Lie bialgebras built from an r-matrix.

``r = sum r^{ij} e_i (x) e_j`` is stored as the ``n x n`` array ``r``.  Linear
maps out of the dual ``g*`` use the dual basis, so ``r_+`` has matrix ``r.T``,
``r_-`` has matrix ``-r`` and ``I = r_+ - r_- = r + r.T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .groups import GroupElement, group
from .lie import EXACT_TOL, LieAlgebra, LieError, LinearOperator, homomorphism_residual, jacobi_residual

DET_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class RMatrix:
    alg: LieAlgebra
    r: np.ndarray
    a: np.ndarray = field(init=False, repr=False)
    s: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.shape != (self.alg.dim, self.alg.dim):
            raise LieError(f"r-matrix must be {self.alg.dim}x{self.alg.dim}, got {r.shape}")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "a", (r - r.T) / 2)
        object.__setattr__(self, "s", (r + r.T) / 2)


def cybe_tensor(rm: RMatrix) -> np.ndarray:
    """Coefficients of ``[r12, r13] + [r12, r23] + [r13, r23]``."""
    r, c = rm.r, rm.alg.c
    t = np.einsum("iq,ks,ikp->pqs", r, r, c)
    t += np.einsum("pj,ks,jkq->pqs", r, r, c)
    t += np.einsum("pj,ql,jls->pqs", r, r, c)
    return t


def cybe_residual(rm: RMatrix) -> float:
    return float(np.abs(cybe_tensor(rm)).max(initial=0.0))


def invariance_residual(rm: RMatrix) -> float:
    """Max-abs of ``(ad_x (x) 1 + 1 (x) ad_x) s`` over basis ``x``."""
    s, c = rm.s, rm.alg.c
    t = np.einsum("kip,iq->kpq", c, s) + np.einsum("pj,kjq->kpq", s, c)
    return float(np.abs(t).max(initial=0.0))


class RPlusMinus(NamedTuple):
    r_plus: np.ndarray
    r_minus: np.ndarray
    I: np.ndarray


def r_pm_and_I(rm: RMatrix) -> RPlusMinus:
    rp = rm.r.T.copy()
    rmn = -rm.r.copy()
    return RPlusMinus(rp, rmn, rp - rmn)


def is_factorizable(rm: RMatrix, tol_det: float = DET_TOL) -> bool:
    I = r_pm_and_I(rm).I
    n = len(I)
    scale = float(np.abs(I).max(initial=0.0))
    return scale > 0 and abs(np.linalg.det(I)) > tol_det * scale ** n


def _coadjoint(c, x, eta):
    # <ad*_x eta, e_k> = -<eta, [x, e_k]>
    return -np.einsum("i,ikj,j->k", x, c, eta)


def dual_constants(rm: RMatrix) -> np.ndarray:
    """Structure constants of ``[xi, eta] = ad*_{r+ xi} eta - ad*_{r- eta} xi`` on g*."""
    n = rm.alg.dim
    rp, rmn, _ = r_pm_and_I(rm)
    c = rm.alg.c
    E = np.eye(n)
    out = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            out[a, b] = _coadjoint(c, rp @ E[a], E[b]) - _coadjoint(c, rmn @ E[b], E[a])
    return out


def dual_bracket(rm: RMatrix, tol: float = EXACT_TOL) -> LieAlgebra:
    cy, inv = cybe_residual(rm), invariance_residual(rm)
    if cy > tol or inv > tol:
        raise LieError(f"r is not quasi-triangular (CYBE {cy:.3e}, invariance {inv:.3e})")
    return LieAlgebra.from_constants(f"{rm.alg.name}*", dual_constants(rm))


def r_pm_homomorphism_residuals(rm: RMatrix, tol: float = EXACT_TOL):
    dual = dual_bracket(rm, tol)
    rp, rmn, _ = r_pm_and_I(rm)
    return (homomorphism_residual(LinearOperator(dual, rm.alg, rp)),
            homomorphism_residual(LinearOperator(dual, rm.alg, rmn)))


def derived_rb(rm: RMatrix, tol_det: float = DET_TOL) -> LinearOperator:
    """``B = r_- I^{-1}``, a Rota-Baxter operator of weight 1 on g."""
    if not is_factorizable(rm, tol_det):
        raise LieError("I = r_+ - r_- is singular; r is not factorizable")
    _, rmn, I = r_pm_and_I(rm)
    return LinearOperator(rm.alg, rm.alg, rmn @ np.linalg.inv(I))


@dataclass(frozen=True, eq=False)
class BialgebraReport:
    cybe_residual: float
    invariance_residual: float
    I_matrix: np.ndarray
    factorizable: bool
    dual_constants: Optional[np.ndarray]
    dual_jacobi: Optional[float] = None


def bialgebra_report(rm: RMatrix, tol: float = EXACT_TOL, tol_det: float = DET_TOL) -> BialgebraReport:
    cy, inv = cybe_residual(rm), invariance_residual(rm)
    dual, jac = None, None
    if cy <= tol and inv <= tol:
        alg = dual_bracket(rm, tol)
        dual, jac = alg.c, jacobi_residual(alg)
    return BialgebraReport(cy, inv, r_pm_and_I(rm).I, is_factorizable(rm, tol_det), dual, jac)


# -- Poisson bivector on a matrix group -----------------------------------------

def poisson_bivector(a: np.ndarray, x: GroupElement) -> np.ndarray:
    """``pi(g) = sum a^{ij} (g E_i (x) g E_j - E_i g (x) E_j g)`` as a 4-index array."""
    E = group(x.group_id).basis
    g = x.m
    L = np.einsum("ab,ibc->iac", g, E)
    R = np.einsum("iab,bc->iac", E, g)
    return np.einsum("ij,iab,jcd->abcd", a, L, L) - np.einsum("ij,iab,jcd->abcd", a, R, R)


def _left(g, P):
    # g A (x) g C
    return np.einsum("ax,xbyd,cy->abcd", g, P, g)


def _right(P, h):
    # A h (x) C h
    return np.einsum("axcy,xb,yd->abcd", P, h, h)


def poisson_multiplicativity(rm: RMatrix, samples: Sequence[tuple[GroupElement, GroupElement]]) -> float:
    """Max over samples of ``|pi(gh) - L_g pi(h) - R_h pi(g)|`` for ``a = (r - r^T)/2``."""
    worst = 0.0
    for x, y in samples:
        grp = group(x.group_id)
        if not grp.algebra.same_constants(rm.alg):
            raise LieError(f"{x.group_id} does not integrate {rm.alg.name}")
        xy = GroupElement(x.group_id, x.m @ y.m)
        lhs = poisson_bivector(rm.a, xy)
        rhs = _left(x.m, poisson_bivector(rm.a, y)) + _right(poisson_bivector(rm.a, x), y.m)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def sl2_test_rmatrix() -> RMatrix:
    """``r = e (x) f + h (x) h / 4`` on sl2 with basis (h, e, f)."""
    from .lie import sl2

    r = np.zeros((3, 3))
    r[1, 2] = 1.0
    r[0, 0] = 0.25
    return RMatrix(sl2(), r)
