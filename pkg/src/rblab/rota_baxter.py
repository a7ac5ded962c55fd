"""Relative Rota-Baxter operators of weight 1 on Lie algebras.

Covers the operator identity itself, the classification on the 2-dimensional
non-abelian algebra, the graph subalgebra, the associated matched pair and the
isomorphism ``kappa`` onto the semidirect product.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .lie import (
    EXACT_TOL,
    LieAction,
    LieAlgebra,
    LieError,
    LinearOperator,
    adjoint_action,
    rb_residuals,
    semidirect_algebra,
    two_dim_algebra,
)

CLASSIFY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RelativeRBData:
    g: LieAlgebra
    h: LieAlgebra
    phi: LieAction
    B: LinearOperator

    def __post_init__(self):
        if self.B.m.shape != (self.g.dim, self.h.dim):
            raise LieError(f"B must map h ({self.h.dim}) to g ({self.g.dim}), got {self.B.m.shape}")
        if self.phi.phi.shape != (self.g.dim, self.h.dim, self.h.dim):
            raise LieError("action shape does not match (g, h)")

    @classmethod
    def adjoint(cls, g: LieAlgebra, B) -> "RelativeRBData":
        """Rota-Baxter data on ``g`` itself with the adjoint action."""
        op = B if isinstance(B, LinearOperator) else LinearOperator(g, g, np.asarray(B, dtype=float))
        return cls(g, g, adjoint_action(g), op)


@dataclass(frozen=True, eq=False)
class MatchedPairData:
    """Two algebras acting on each other: ``rho: g -> gl(h)``, ``mu: h -> gl(g)``."""

    g: LieAlgebra
    h: LieAlgebra
    rho: LieAction
    mu: LieAction

    def representation_residual(self) -> float:
        return max(self.rho.homomorphism_residual(), self.mu.homomorphism_residual())


def rb_residual(data: RelativeRBData) -> float:
    return float(rb_residuals(data.g, data.h, data.phi, data.B.m)[0])


# -- classification on [e1, e2] = 2 e2 ---------------------------------------

class Family1(NamedTuple):
    lam: float
    mu: float


class Family2(NamedTuple):
    lam: float
    mu: float


class Family3(NamedTuple):
    m: float
    k: float


class NotRB(NamedTuple):
    pass


RB2DClass = Union[Family1, Family2, Family3, NotRB]


def classify_rb_2d(B, tol: float = CLASSIFY_TOL) -> RB2DClass:
    """Sort a 2x2 matrix into one of the three Rota-Baxter families.

    The conditions are exact: with ``B = [[b11, b12], [b21, b22]]``

    * family 1: ``b12 = 0`` and ``b22 = 0``;
    * family 2: ``b12 = 0`` and ``b22 = -1``;
    * family 3: ``b12 != 0``, ``b11 + b22 + 1 = 0`` and ``b21 b12 = b11 b22``.
    """
    (b11, b12), (b21, b22) = np.asarray(B, dtype=float).tolist()
    if abs(b12) <= tol:
        if abs(b22) <= tol:
            return Family1(b11, b21)
        if abs(b22 + 1.0) <= tol:
            return Family2(b11, b21)
        return NotRB()
    if abs(b11 + b22 + 1.0) <= tol and abs(b21 * b12 - b11 * b22) <= tol:
        return Family3(b22, b12)
    return NotRB()


def family_matrix(cls: RB2DClass) -> np.ndarray:
    if isinstance(cls, Family1):
        return np.array([[cls.lam, 0.0], [cls.mu, 0.0]])
    if isinstance(cls, Family2):
        return np.array([[cls.lam, 0.0], [cls.mu, -1.0]])
    if isinstance(cls, Family3):
        m, k = cls
        if k == 0:
            raise LieError("family 3 requires k != 0")
        return np.array([[-m - 1.0, k], [-(m * m + m) / k, m]])
    raise LieError("not a Rota-Baxter family")


def rb_data_2d(B) -> RelativeRBData:
    return RelativeRBData.adjoint(two_dim_algebra(), B)


# -- graph subalgebra ---------------------------------------------------------

class GraphResult(NamedTuple):
    algebra: Optional[LieAlgebra]
    residual: float


def _graph_brackets(data: RelativeRBData):
    """Second and first components of ``[(Be_i, e_i), (Be_j, e_j)]_phi``."""
    n_g, n_h = data.g.dim, data.h.dim
    sd = semidirect_algebra(data.g, data.h, data.phi)
    basis = np.vstack([data.B.m, np.eye(n_h)])          # columns (B e_i, e_i)
    br = np.einsum("ai,bj,abk->ijk", basis, basis, sd.c)
    return br[:, :, :n_g], br[:, :, n_g:]


def graph_subalgebra(data: RelativeRBData, tol: float = EXACT_TOL) -> GraphResult:
    """Closure residual of the graph of ``B`` and, if closed, its bracket.

    A bracket ``(X, W)`` lies in the graph iff ``X = B W``; the residual is the
    largest ``|X - B W|`` over basis pairs.  The induced structure constants are
    expressed in the graph basis ``(B e_i, e_i)``, so they are read off ``W``.
    """
    first, second = _graph_brackets(data)
    resid = float(np.abs(first - np.einsum("ka,ija->ijk", data.B.m, second)).max(initial=0.0))
    if resid > tol:
        return GraphResult(None, resid)
    alg = LieAlgebra.from_constants(f"Gr({data.h.name})", second)
    return GraphResult(alg, resid)


# -- matched pairs ---------------------------------------------------------

def matched_pair_residual(mp: MatchedPairData) -> float:
    """Max-abs residual of the two compatibility identities over basis triples.

    Whether ``rho`` and ``mu`` are representations is measured separately by
    :meth:`MatchedPairData.representation_residual`.
    """
    cg, ch = mp.g.c, mp.h.c
    rho, mu = mp.rho.phi, mp.mu.phi   # rho[x] acts on h, mu[u] acts on g
    # rho(x)[u,v] - [rho(x)u, v] - [u, rho(x)v] - rho(mu(v)x)u + rho(mu(u)x)v
    t1 = np.einsum("uvk,xlk->xuvl", ch, rho)
    t1 -= np.einsum("xau,avl->xuvl", rho, ch)
    t1 -= np.einsum("xbv,ubl->xuvl", rho, ch)
    t1 -= np.einsum("vyx,ylu->xuvl", mu, rho)
    t1 += np.einsum("uyx,ylv->xuvl", mu, rho)
    # mu(u)[x,y] - [mu(u)x, y] - [x, mu(u)y] - mu(rho(y)u)x + mu(rho(x)u)y
    t2 = np.einsum("xyk,ulk->uxyl", cg, mu)
    t2 -= np.einsum("uax,ayl->uxyl", mu, cg)
    t2 -= np.einsum("uby,xbl->uxyl", mu, cg)
    t2 -= np.einsum("yvu,vlx->uxyl", rho, mu)
    t2 += np.einsum("xvu,vly->uxyl", rho, mu)
    return max(float(np.abs(t1).max(initial=0.0)), float(np.abs(t2).max(initial=0.0)))


def matched_pair_from_rb(data: RelativeRBData, tol: float = EXACT_TOL) -> MatchedPairData:
    """The pair ``(g, Gr(B); phibar, thetabar)`` attached to a Rota-Baxter operator.

    In the graph basis ``(B e_i, e_i)``:

    * ``phibar(x)`` acts on graph coordinates by the matrix ``phi(x)``;
    * ``thetabar(B e_i, e_i) x = B(phi(x) e_i) + [B e_i, x]``.
    """
    res = rb_residual(data)
    if res > tol:
        raise LieError(f"B is not a relative Rota-Baxter operator (residual {res:.3e})")
    gr = graph_subalgebra(data, tol)
    if gr.algebra is None:
        raise LieError(f"graph of B is not closed (residual {gr.residual:.3e})")
    g, B, phi = data.g, data.B.m, data.phi.phi
    n_g, n_h = g.dim, data.h.dim
    rho = LieAction(g, gr.algebra, phi.copy())
    mu = np.zeros((n_h, n_g, n_g))
    for i in range(n_h):
        Be = B[:, i]
        for j in range(n_g):
            mu[i, :, j] = B @ phi[j][:, i] + np.einsum("a,ak->k", Be, g.c[:, j, :])
    return MatchedPairData(g, gr.algebra, rho, LieAction(gr.algebra, g, mu))


def double_bracket(mp: MatchedPairData, tol: float = EXACT_TOL) -> LieAlgebra:
    """``[(x,u),(y,v)] = ([x,y] + mu(u)y - mu(v)x, [u,v] + rho(x)v - rho(y)u)``."""
    rep = mp.representation_residual()
    if rep > tol:
        raise LieError(f"rho/mu are not representations (residual {rep:.3e})")
    res = matched_pair_residual(mp)
    if res > tol:
        raise LieError(f"not a matched pair (residual {res:.3e})")
    n, m = mp.g.dim, mp.h.dim
    c = np.zeros((n + m, n + m, n + m))
    c[:n, :n, :n] = mp.g.c
    c[n:, n:, n:] = mp.h.c
    for x in range(n):
        c[x, n:, n:] = mp.rho.phi[x].T      # [(e_x,0),(0,f_v)] -> (-mu(f_v)e_x, rho(e_x)f_v)
        c[n:, x, n:] = -mp.rho.phi[x].T
    for u in range(m):
        c[n + u, :n, :n] = mp.mu.phi[u].T    # [(0,f_u),(e_y,0)] -> (mu(f_u)e_y, -rho(e_y)f_u)
        c[:n, n + u, :n] = -mp.mu.phi[u].T
    return LieAlgebra.from_constants(f"{mp.g.name}|><|{mp.h.name}", c)


def kappa_matrix(data: RelativeRBData) -> np.ndarray:
    """``kappa(x, (Bu, u)) = (x + Bu, u)`` in the bases (g, graph) -> (g, h)."""
    n_g, n_h = data.g.dim, data.h.dim
    K = np.eye(n_g + n_h)
    K[:n_g, n_g:] = data.B.m
    return K


def kappa_residual(data: RelativeRBData, tol: float = EXACT_TOL) -> float:
    mp = matched_pair_from_rb(data, tol)
    src = double_bracket(mp, tol)
    dst = semidirect_algebra(data.g, data.h, data.phi)
    K = kappa_matrix(data)
    lhs = np.einsum("ijk,lk->ijl", src.c, K)
    rhs = np.einsum("ai,bj,abl->ijl", K, K, dst.c)
    return float(np.abs(lhs - rhs).max(initial=0.0))
