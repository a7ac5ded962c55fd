"""Factorization data of a Rota-Baxter operator and the double groupoid Gamma.

Throughout, the operator acts on one algebra ``g`` with the adjoint action, so
the ambient group is ``G x|_Ad G``.  Under ``(g, h) -> (g, h g)`` that group is
``G x G``; the two homomorphisms ``F-``, ``F+`` out of the graph subgroup are
the two coordinates of this map, and ``J = F+ F-^-1`` is the second component.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares

from .groups import (
    GroupElement,
    GroupError,
    SemidirectElement,
    ad_action,
    gexp,
    ginv,
    glog,
    gmul,
    group,
    group_for_algebra,
    identity,
    max_abs,
    semidirect_exp,
    semidirect_gmul,
    semidirect_identity,
)
from .lie import EXACT_TOL, LieError, homomorphism_residual, LinearOperator
from .rota_baxter import RelativeRBData, graph_subalgebra, rb_residual


def _require_adjoint(data: RelativeRBData):
    if data.g is not data.h and not data.g.same_constants(data.h):
        raise LieError("factorization maps need B: g -> g with the adjoint action")


# -- f+- --------------------------------------------------------------------

def f_pm(data: RelativeRBData, xi, tol: float = EXACT_TOL):
    """``(f-(Bu, u), f+(Bu, u)) = (Bu, Bu + u)`` for a graph vector."""
    _require_adjoint(data)
    n = data.g.dim
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2 * n,):
        raise LieError(f"graph vectors have length {2 * n}, got {xi.shape}")
    off = float(np.abs(xi[:n] - data.B.m @ xi[n:]).max())
    if off > tol:
        raise LieError(f"vector is off the graph of B (distance {off:.3e})")
    return xi[:n].copy(), xi[:n] + xi[n:]


def f_pm_homomorphism_residuals(data: RelativeRBData, tol: float = EXACT_TOL):
    """Bracket-homomorphism residuals of ``f-`` and ``f+`` from Gr(B) to g.

    In graph coordinates ``f-`` has matrix ``B`` and ``f+`` has ``B + 1``.
    """
    _require_adjoint(data)
    res = rb_residual(data)
    if res > tol:
        raise LieError(f"B is not Rota-Baxter (residual {res:.3e})")
    gr = graph_subalgebra(data, tol)
    B = data.B.m
    r_minus = homomorphism_residual(LinearOperator(gr.algebra, data.g, B))
    r_plus = homomorphism_residual(LinearOperator(gr.algebra, data.g, B + np.eye(len(B))))
    return r_minus, r_plus


# -- words in the graph subgroup --------------------------------------------

@dataclass(frozen=True, eq=False)
class GraphWord:
    """The product ``exp(t_1 xi_1) ... exp(t_n xi_n)`` of graph exponentials.

    Each ``xi`` is stored in the ambient coordinates ``(Bu, u)``.
    """

    data: RelativeRBData
    letters: tuple = ()

    def __post_init__(self):
        _require_adjoint(self.data)
        clean = []
        for xi, t in self.letters:
            f_pm(self.data, xi)        # raises when off the graph
            clean.append((np.asarray(xi, dtype=float), float(t)))
        object.__setattr__(self, "letters", tuple(clean))

    @classmethod
    def from_coords(cls, data: RelativeRBData, coords: Sequence, ts: Sequence | None = None):
        """Letters given by their ``u`` part; ``xi = (B u, u)``."""
        ts = [1.0] * len(coords) if ts is None else ts
        B = data.B.m
        return cls(data, tuple((np.concatenate([B @ np.asarray(u, dtype=float), u]), t)
                               for u, t in zip(coords, ts)))

    @property
    def group_id(self) -> str:
        return group_for_algebra(self.data.g)

    def element(self) -> SemidirectElement:
        gid = self.group_id
        d = semidirect_identity(gid)
        for xi, t in self.letters:
            d = semidirect_gmul(d, semidirect_exp(gid, t * xi))
        return d


def big_F(word: GraphWord):
    """``(F-(w), F+(w))`` as products of exponentials of ``f-`` and ``f+``."""
    gid = word.group_id
    Fm, Fp = identity(gid), identity(gid)
    for xi, t in word.letters:
        fm, fp = f_pm(word.data, xi)
        Fm = gmul(Fm, gexp(gid, t * fm))
        Fp = gmul(Fp, gexp(gid, t * fp))
    return Fm, Fp


def big_J(word) -> GroupElement:
    """``J = F+ F-^-1``; also accepts an element ``(g, h)`` of the graph subgroup."""
    if isinstance(word, SemidirectElement):
        Fm, Fp = word.g, gmul(word.h, word.g)
    else:
        Fm, Fp = big_F(word)
    return gmul(Fp, ginv(Fm))


def j_tangent(data: RelativeRBData, xi, step: float = 1e-5) -> np.ndarray:
    """Central difference of ``log J(exp(t xi))`` at ``t = 0``."""
    plus = glog(big_J(GraphWord(data, ((xi, step),))))
    minus = glog(big_J(GraphWord(data, ((xi, -step),))))
    return (plus - minus) / (2 * step)


class JProbeResult(NamedTuple):
    residual: float
    coords: np.ndarray         # (length, n) graph coordinates u_i, t_i = 1
    evaluations: int


def _j_of_coords(B, gid, U):
    Fm = np.eye(group(gid).size)
    Fp = np.eye(group(gid).size)
    grp = group(gid)
    for u in U:
        bu = B @ u
        Fm = Fm @ grp.exp(bu)
        Fp = Fp @ grp.exp(bu + u)
    return Fp @ np.linalg.inv(Fm)


def j_inverse_probe(target: GroupElement, data: RelativeRBData, budget: int = 20_000,
                    seed: int = 0, max_length: int = 3, bound: float = 5.0,
                    tol: float = 1e-12) -> JProbeResult:
    """Search for a graph word of length <= ``max_length`` with ``J(w) = target``.

    Letters have coefficients in ``[-bound, bound]``; the search is a bounded
    least-squares fit from the origin and then seeded random starts, moving to
    longer words only while the best residual is above ``tol``.  ``budget``
    caps the total number of residual evaluations.
    """
    _require_adjoint(data)
    gid = group_for_algebra(data.g)
    if target.group_id != gid:
        raise GroupError(f"target lives in {target.group_id}, expected {gid}")
    n = data.g.dim
    B = np.array(data.B.m)
    T = target.m
    rng = np.random.default_rng(seed)
    best = (np.inf, np.zeros((1, n)))
    used = 0

    def resid(x, L):
        return (_j_of_coords(B, gid, x.reshape(L, n)) - T).ravel()

    for L in range(1, max_length + 1):
        starts = [np.zeros(L * n)] + [rng.uniform(-1.0, 1.0, L * n) for _ in range(3)]
        for x0 in starts:
            if used >= budget or best[0] <= tol:
                break
            try:
                sol = least_squares(resid, x0, args=(L,), bounds=(-bound, bound), method="trf",
                                    xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                    max_nfev=max(1, min(2000, budget - used)))
            except (ValueError, GroupError, np.linalg.LinAlgError):
                continue
            used += int(sol.nfev)
            r = float(np.abs(resid(sol.x, L)).max())
            if r < best[0]:
                best = (r, sol.x.reshape(L, n))
        if best[0] <= tol or used >= budget:
            break
    return JProbeResult(best[0], best[1], used)


# -- Upsilon ----------------------------------------------------------------

def _graph_pair(h, Bmap) -> SemidirectElement:
    return h if isinstance(h, SemidirectElement) else SemidirectElement(Bmap(h), h)


def upsilon(g: GroupElement, f: SemidirectElement) -> SemidirectElement:
    """``(g, e) . (B(h), h) = (g B(h), Ad_g h)``."""
    return semidirect_gmul(SemidirectElement(g, identity(g.group_id)), f)


class UpsilonInverse(NamedTuple):
    g: GroupElement
    f: SemidirectElement
    residual: float


def upsilon_inverse(target: SemidirectElement, Bmap, n_starts: int = 4, seed: int = 0) -> UpsilonInverse:
    """Numerically solve ``upsilon(g, (B(h), h)) = target`` in exponential coordinates."""
    gid = target.g.group_id
    n = group(gid).algebra.dim
    tg = np.concatenate([target.g.m.ravel(), target.h.m.ravel()])
    rng = np.random.default_rng(seed)

    def unpack(x):
        g = gexp(gid, x[:n])
        h = gexp(gid, x[n:])
        return g, SemidirectElement(Bmap(h), h)

    def resid(x):
        g, f = unpack(x)
        y = upsilon(g, f)
        return np.concatenate([y.g.m.ravel(), y.h.m.ravel()]) - tg

    best = None
    # a natural start: h from Ad_g^-1 of the target's second part with g = target.g
    x0 = np.concatenate([glog(target.g), glog(target.h)])
    for i in range(n_starts):
        start = x0 if i == 0 else rng.uniform(-1.0, 1.0, 2 * n)
        try:
            sol = least_squares(resid, start, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        except (ValueError, GroupError):
            continue
        r = float(np.abs(resid(sol.x)).max())
        if best is None or r < best[0]:
            best = (r, sol.x)
        if r <= 1e-13:
            break
    if best is None:
        raise GroupError("upsilon inversion failed from every start")
    g, f = unpack(best[1])
    return UpsilonInverse(g, f, best[0])


# -- the double groupoid Gamma ------------------------------------------------

class ComposabilityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GammaElement:
    """Square ``(h2, a2, a1, h1)`` with ``Xi2(h2) Xi1(a1) = Xi1(a2) Xi2(h1)``.

    ``h1``/``h2`` are graph elements ``(B(h), h)``; ``a1``/``a2`` lie in G.
    """

    h2: SemidirectElement
    a2: GroupElement
    a1: GroupElement
    h1: SemidirectElement

    def residual(self) -> float:
        e = identity(self.a1.group_id)
        lhs = semidirect_gmul(self.h2, SemidirectElement(self.a1, e))
        rhs = semidirect_gmul(SemidirectElement(self.a2, e), self.h1)
        return max_abs(lhs, rhs)

    def graph_residual(self, Bmap) -> float:
        return max(max_abs(Bmap(self.h1.h), self.h1.g), max_abs(Bmap(self.h2.h), self.h2.g))


def gamma_make(a2: GroupElement, h1, Bmap) -> GammaElement:
    h1 = _graph_pair(h1, Bmap)
    h2 = _graph_pair(ad_action(a2, h1.h), Bmap)
    a1 = gmul(gmul(ginv(h2.g), a2), h1.g)
    return GammaElement(h2, a2, a1, h1)


def gamma_unit_h(h) -> GammaElement:
    e = identity(h.h.group_id)
    return GammaElement(h, e, e, h)


def gamma_unit_v(a: GroupElement) -> GammaElement:
    e = identity(a.group_id)
    return GammaElement(SemidirectElement(e, e), a, a, SemidirectElement(e, e))


def _check(name, x, y, tol):
    d = max_abs(x, y)
    if d > tol:
        raise ComposabilityError(f"{name}: {x!r} != {y!r} (distance {d:.3e})")


def gamma_mul_h(xi: GammaElement, xi2: GammaElement, tol: float = 1e-9) -> GammaElement:
    """Horizontal product; needs ``xi.h1 = xi2.h2``."""
    _check("horizontal source/target mismatch (xi.h1 vs xi'.h2)", xi.h1, xi2.h2, tol)
    return GammaElement(xi.h2, gmul(xi.a2, xi2.a2), gmul(xi.a1, xi2.a1), xi2.h1)


def gamma_mul_v(xi: GammaElement, xi2: GammaElement, tol: float = 1e-9) -> GammaElement:
    """Vertical product; needs ``xi.a1 = xi2.a2``."""
    _check("vertical source/target mismatch (xi.a1 vs xi'.a2)", xi.a1, xi2.a2, tol)
    return GammaElement(semidirect_gmul(xi.h2, xi2.h2), xi.a2, xi2.a1,
                        semidirect_gmul(xi.h1, xi2.h1))


def gamma_distance(x: GammaElement, y: GammaElement) -> float:
    return max(max_abs(x.h2, y.h2), max_abs(x.a2, y.a2), max_abs(x.a1, y.a1), max_abs(x.h1, y.h1))


def composable_square(a2, a2p, h1p, h1pp, Bmap):
    """Four elements ``xi, xi', eta, eta'`` arranged so both composites exist.

    ``xi | xi'`` on top, ``eta | eta'`` below.
    """
    xip = gamma_make(a2p, h1p, Bmap)
    xi = gamma_make(a2, xip.h2, Bmap)
    etap = gamma_make(xip.a1, h1pp, Bmap)
    eta = gamma_make(xi.a1, etap.h2, Bmap)
    return xi, xip, eta, etap


def interchange_residual(xi, xip, eta, etap) -> float:
    left = gamma_mul_h(gamma_mul_v(xi, eta), gamma_mul_v(xip, etap))
    right = gamma_mul_v(gamma_mul_h(xi, xip), gamma_mul_h(eta, etap))
    return gamma_distance(left, right)
