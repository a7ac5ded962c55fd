"""Closed-form group Rota-Baxter operators on UT2 and HEIS3, and the case-3 probe.

Case ids refer to the operator families on ``[e1, e2] = 2 e2``:

========  ==========================  ==========================
case      algebra operator            group operator ``(a, b) ->``
========  ==========================  ==========================
``C11``   ``[[lam, 0], [mu, 0]]``     ``(a^lam, mu/(2 lam)(a^lam - a^-lam))``
``C12``   ``[[-1, 0], [mu, 0]]``      ``(1/a, -mu/2 (1/a - a))``
``C13``   ``[[0, 0], [mu, 0]]``       ``(1, mu ln a)``
``C21``   ``[[0, 0], [mu, -1]]``      ``(1, -b/a + mu/2 (1 - a^-2))``
``C22``   ``[[-1, 0], [mu, -1]]``     ``(1/a, -b + mu ln(a) / a)``
``C23``   ``[[lam, 0], [mu, -1]]``    ``(a^lam, mu (a^lam - a^(-lam-2)) / (2(lam+1)) - b / a^(lam+1))``
========  ==========================  ==========================

plus ``HEIS`` on the Heisenberg group, ``heis(a, b, c) -> heis(0, c, 0)``.
The third family ``[[-m-1, k], [-(m^2+m)/k, m]]`` has no group operator; its
graph subgroup ``D`` is available as a chart and :func:`obstruction_probe`
searches for a factorization through it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .groups import (
    GroupElement,
    GroupError,
    SemidirectElement,
    ad_action,
    ginv,
    glog,
    gmul,
    group,
    heis,
    identity,
    max_abs,
    semidirect_gmul,
    tangent_at_identity,
    ut2,
)
from .lie import LieError, LinearOperator
from .rota_baxter import (
    Family1,
    Family2,
    Family3,
    RelativeRBData,
    classify_rb_2d,
)

# |lam| or |lam + 1| below this routes to the limit formulas
LAMBDA_SNAP = 1e-8

CASES = ("C11", "C12", "C13", "C21", "C22", "C23", "HEIS")


@dataclass(frozen=True)
class GroupRBMap:
    case_id: str
    params: dict
    eval: Callable[[GroupElement], GroupElement] = field(repr=False, compare=False)
    group_id: str = "UT2"

    def __call__(self, x: GroupElement) -> GroupElement:
        return self.eval(x)

    @property
    def algebra_matrix(self) -> np.ndarray:
        return catalog_algebra_matrix(self.case_id, **self.params)

    def rb_data(self) -> RelativeRBData:
        alg = group(self.group_id).algebra
        return RelativeRBData.adjoint(alg, self.algebra_matrix)


class NotIntegrableError(LieError):
    pass


def _near(x, y):
    return abs(x - y) <= LAMBDA_SNAP


def catalog_algebra_matrix(case_id: str, lam: float | None = None, mu: float = 0.0) -> np.ndarray:
    if case_id == "HEIS":
        B = np.zeros((3, 3))
        B[2, 1] = 1.0   # B(Y) = Z
        return B
    lam = {"C12": -1.0, "C22": -1.0, "C13": 0.0, "C21": 0.0}.get(case_id, lam)
    b22 = 0.0 if case_id.startswith("C1") else -1.0
    return np.array([[lam, 0.0], [mu, b22]])


def catalog_operator(case_id: str, lam: float | None = None, mu: float = 0.0) -> GroupRBMap:
    """Group Rota-Baxter operator for one of the integrable catalog cases."""
    if case_id == "HEIS":
        return GroupRBMap("HEIS", {}, lambda x: heis(0.0, x.m[1, 2], 0.0), "HEIS3")
    if case_id not in CASES:
        raise LieError(f"unknown case {case_id!r}")
    mu = float(mu)
    if case_id in ("C11", "C23"):
        if lam is None or _near(lam, 0.0) or _near(lam, -1.0):
            raise LieError(f"{case_id} requires lam not in {{0, -1}}, got {lam}")
        lam = float(lam)
    elif lam is not None:
        raise LieError(f"{case_id} fixes lam; do not pass it")

    def _ab(x):
        if x.group_id != "UT2":
            raise GroupError(f"{case_id} acts on UT2, got {x.group_id}")
        return x.m[0, 0], x.m[0, 1]

    if case_id == "C11":
        def f(x):
            a, _ = _ab(x)
            al = a ** lam
            return ut2(al, mu / (2 * lam) * (al - 1.0 / al))
        params = {"lam": lam, "mu": mu}
    elif case_id == "C12":
        def f(x):
            a, _ = _ab(x)
            return ut2(1.0 / a, -mu / 2 * (1.0 / a - a))
        params = {"mu": mu}
    elif case_id == "C13":
        def f(x):
            a, _ = _ab(x)
            return ut2(1.0, mu * math.log(a))
        params = {"mu": mu}
    elif case_id == "C21":
        def f(x):
            a, b = _ab(x)
            return ut2(1.0, -b / a + mu / 2 * (1.0 - a ** -2))
        params = {"mu": mu}
    elif case_id == "C22":
        def f(x):
            a, b = _ab(x)
            return ut2(1.0 / a, -b + mu * math.log(a) / a)
        params = {"mu": mu}
    else:
        def f(x):
            a, b = _ab(x)
            c = mu / (2 * (lam + 1))
            return ut2(a ** lam, c * a ** lam - c * a ** (-lam - 2) - b / a ** (lam + 1))
        params = {"lam": lam, "mu": mu}
    return GroupRBMap(case_id, params, f)


def integrate_rb_2d(B) -> GroupRBMap:
    """Route a Rota-Baxter operator on the 2-dim algebra to its group operator."""
    cls = classify_rb_2d(B)
    if isinstance(cls, (Family1, Family2)):
        fam = "C1" if isinstance(cls, Family1) else "C2"
        lam, mu = cls
        if _near(lam, -1.0):
            return catalog_operator(fam + "2", mu=mu)
        if _near(lam, 0.0):
            return catalog_operator("C13" if fam == "C1" else "C21", mu=mu)
        return catalog_operator(fam + ("1" if fam == "C1" else "3"), lam=lam, mu=mu)
    if isinstance(cls, Family3):
        raise NotIntegrableError(f"family 3 operator (m={cls.m}, k={cls.k}) is not integrable")
    raise LieError("matrix is not a Rota-Baxter operator")


def group_rb_residual(Bmap, samples: Sequence[tuple[GroupElement, GroupElement]],
                      Phi=ad_action) -> float:
    """Max over samples of ``|B(a)B(b) - B(a Phi(B(a)) b)|``."""
    worst = 0.0
    for a, b in samples:
        Ba = Bmap(a)
        lhs = gmul(Ba, Bmap(b))
        rhs = Bmap(gmul(a, Phi(Ba, b)))
        worst = max(worst, max_abs(lhs, rhs))
    return worst


class TangentCheck(NamedTuple):
    ok: bool
    residual: float


def tangent_matches_algebra(Bmap, B, tol: float = 1e-6, step: float = 1e-5,
                            group_id: str | None = None) -> TangentCheck:
    group_id = group_id or Bmap.group_id
    Bm = B.m if isinstance(B, LinearOperator) else np.asarray(B, dtype=float)
    n = group(group_id).algebra.dim
    worst = 0.0
    for i, e in enumerate(np.eye(n)):
        d = tangent_at_identity(Bmap, e, group_id, step)
        worst = max(worst, float(np.abs(d - Bm[:, i]).max()))
    return TangentCheck(worst <= tol, worst)


class Factorization(NamedTuple):
    d: SemidirectElement
    g: GroupElement


def membership_factor(target: SemidirectElement, Bmap) -> Factorization:
    """Split ``(g, h) = (B(h), h) . (B(h)^-1 g, e)``."""
    Bh = Bmap(target.h)
    d = SemidirectElement(Bh, target.h)
    return Factorization(d, gmul(ginv(Bh), target.g))


def factor_residual(target: SemidirectElement, fac: Factorization, Bmap) -> float:
    e = identity(target.h.group_id)
    back = semidirect_gmul(fac.d, SemidirectElement(fac.g, e))
    on_graph = max_abs(Bmap(fac.d.h), fac.d.g)
    return max(max_abs(back, target), on_graph)


# -- D charts ------------------------------------------------------------------

@dataclass(frozen=True)
class DFamilyChart:
    case_id: str
    params: dict
    chart: Callable[..., SemidirectElement] = field(repr=False, compare=False)
    base: tuple = (1.0, 0.0)
    positive: tuple = (True, False)
    group_id: str = "UT2"

    def __call__(self, *args) -> SemidirectElement:
        return self.chart(*args)


def d_family_chart(case_id: str, lam: float | None = None, mu: float = 0.0,
                   m: float | None = None, k: float | None = None) -> DFamilyChart:
    """Explicit two-parameter (three for HEIS) description of the graph subgroup ``D``."""
    if case_id == "C3":
        if k is None or k == 0 or m is None:
            raise LieError("case 3 chart needs m and k != 0")
        m, k = float(m), float(k)

        def chart(a, b):
            first = ut2(a, m / (2 * k) * (a - 1.0 / a))
            w = (a * b ** (-m) / (2 * k) * (a * b ** (m + 1) - b ** (-m - 1) / a)
                 + m / (2 * k) * (b - 1.0 / b)
                 + (b ** (-2 * m - 1) - 1.0 / b) / (2 * k))
            return SemidirectElement(first, ut2(b, w))
        return DFamilyChart("C3", {"m": m, "k": k}, chart, (1.0, 1.0), (True, True))
    if case_id == "HEIS":
        def chart(a, b, c):
            return SemidirectElement(heis(0.0, c, 0.0), heis(a, b, c))
        return DFamilyChart("HEIS", {}, chart, (0.0, 0.0, 0.0), (False, False, False), "HEIS3")

    rb = catalog_operator(case_id, lam=lam, mu=mu)   # validates parameters
    lam = rb.params.get("lam", lam)
    if case_id == "C11":
        def chart(a, s):
            al = a ** lam
            first = ut2(al, mu / (2 * lam) * (al - 1.0 / al))
            b = (-a ** (lam + 1) * mu / (2 * lam) * (al - 1.0 / al)
                 + al * mu / (2 * (lam + 1)) * (a ** (lam + 1) - a ** (-lam - 1)) + s / a)
            return SemidirectElement(first, ut2(a, b))
    elif case_id == "C12":
        def chart(a, s):
            first = ut2(a, -mu / 2 * (a - 1.0 / a))
            return SemidirectElement(first, ut2(1.0 / a, mu / 2 * (a - 1.0 / a) - mu * a * math.log(a) + s * a))
    elif case_id == "C13":
        def chart(a, s):
            first = ut2(1.0, mu * math.log(a))
            return SemidirectElement(first, ut2(a, mu / 2 * (a - 1.0 / a) - mu * a * math.log(a) + s / a))
    elif case_id == "C21":
        def chart(a, s):
            first = ut2(1.0, -s + mu * math.log(a))
            return SemidirectElement(first, ut2(a, s * a + mu / 2 * (a - 1.0 / a) - mu * a * math.log(a)))
    elif case_id == "C22":
        def chart(a, s):
            first = ut2(a, -mu / 2 * (a - 1.0 / a) - s / a)
            return SemidirectElement(first, ut2(1.0 / a, mu / 2 * (a - 1.0 / a) - mu * a * math.log(a) + s / a))
    else:
        def chart(a, s):
            al = a ** lam
            first = ut2(al, mu / (2 * lam) * (al - 1.0 / al) - s / al)
            b = (-mu / (2 * lam) * a ** (lam + 1) * (al - 1.0 / al)
                 + mu / (2 * (lam + 1)) * (a ** (lam + 1) - a ** (-lam - 1)) * al + s * a)
            return SemidirectElement(first, ut2(a, b))
    return DFamilyChart(case_id, dict(rb.params), chart)


def chart_tangents(ch: DFamilyChart, step: float = 1e-5) -> np.ndarray:
    """Central-difference tangent vectors of the chart at its base point (columns)."""
    cols = []
    for i, pos in enumerate(ch.positive):
        def at(t):
            args = list(ch.base)
            args[i] = args[i] * math.exp(t) if pos else args[i] + t
            return glog(ch(*args))
        cols.append((at(step) - at(-step)) / (2 * step))
    return np.column_stack(cols)


def chart_span_residual(ch: DFamilyChart, B, step: float = 1e-5) -> float:
    """Distance between the chart's tangent plane and the graph of ``B``.

    Returns ``max(|T - P T|, |G - Q G|)`` where ``P``/``Q`` project onto the
    column spans of the tangents ``T`` and graph basis ``G``; zero iff the spans
    agree.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[1]
    G = np.vstack([B, np.eye(n)])
    T = chart_tangents(ch, step)
    proj = lambda M, V: M @ np.linalg.lstsq(M, V, rcond=None)[0]
    return max(float(np.abs(T - proj(G, T)).max()), float(np.abs(G - proj(T, G)).max()))


# -- case-3 obstruction probe ---------------------------------------------------

WINDOW_LOG = 2.0     # positive parameters in [e^-2, e^2]
WINDOW_Q = 5.0       # unconstrained parameters in [-5, 5]


class ProbeResult(NamedTuple):
    residual: float
    params: tuple      # (a, b, p, q)
    evaluations: int


def excluded_target(m: float, k: float, z: float, x: float = 1.0, y: float = 0.0) -> SemidirectElement:
    """A target whose second component lies on the locus no chart point reaches."""
    w = ((m - 1) * z - (m + 1) / z) / (2 * k)
    return SemidirectElement(ut2(x, y), ut2(z, w))


def probe_candidate(m, k, a, b, p, q) -> SemidirectElement:
    ch = d_family_chart("C3", m=m, k=k)
    return semidirect_gmul(ch(a, b), SemidirectElement(ut2(p, q), identity("UT2")))


def obstruction_probe(m: float, k: float, target: SemidirectElement, budget: int = 100_000,
                      seed: int = 0, grid: int = 5, n_starts: int = 8) -> ProbeResult:
    """Best max-abs residual of ``chart(a, b) . ((p, q), e) - target`` on the window.

    The search is derivative free: a coarse grid over the window, compass
    searches from the best grid points and from seeded random points, then
    Nelder-Mead and a final compass polish on the max-abs residual itself.
    A result bounded away from zero is a certificate only for the window.
    """
    if k == 0:
        raise LieError("case 3 requires k != 0")
    if target.g.group_id != "UT2" or target.h.group_id != "UT2":
        raise GroupError("case 3 targets live in UT2 x| UT2")
    tvec = np.array([target.g.m[0, 0], target.g.m[0, 1], target.h.m[0, 0], target.h.m[0, 1]])
    lo = np.array([-WINDOW_LOG, -WINDOW_LOG, -WINDOW_LOG, -WINDOW_Q])
    hi = -lo
    axes = [np.linspace(l, h, grid) for l, h in zip(lo, hi)]
    pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(4, -1).T
    fsq, fmax = _kernels._case3_eval_numpy(float(m), float(k), pts, tvec)
    evals = len(pts)
    order = np.argsort(fsq, kind="stable")
    n_grid = max(1, n_starts // 2)
    rng = np.random.default_rng(seed)
    starts = np.vstack([pts[order[:n_grid]],
                        rng.uniform(lo, hi, size=(n_starts - n_grid, 4))])
    j = int(np.argmin(fmax))
    best, x = float(fmax[j]), pts[j]
    step0 = (hi - lo) / (2.0 * (grid - 1))
    # compass search on the sum of squares from every start
    r1, x1, used = _kernels.case3_search(float(m), float(k), tvec, np.ascontiguousarray(starts),
                                         lo, hi, int(max(budget - evals, 0) * 2 // 5), step0, 1e-13, False)
    evals += int(used)
    if r1 < best:
        best, x = float(r1), x1.copy()
    # simplex descent from the best point (handles the curved valleys)
    r2, x2, used = _kernels.case3_simplex(float(m), float(k), tvec, np.array(x, dtype=float),
                                          lo, hi, int(max(budget - evals, 0) // 3), 0.1, False)
    evals += int(used)
    if r2 < best:
        best, x = float(r2), x2.copy()
    # simplex and compass passes on the reported max-abs residual
    r3, x3, used = _kernels.case3_simplex(float(m), float(k), tvec, np.array(x, dtype=float),
                                          lo, hi, int(max(budget - evals, 0) // 2), 0.05, True)
    evals += int(used)
    if r3 < best:
        best, x = float(r3), x3.copy()
    left = max(budget - evals, 2 * 4 + 1)
    r3, x3, used = _kernels.case3_search(float(m), float(k), tvec, np.ascontiguousarray(x[None, :]),
                                         lo, hi, int(left), step0 / 8.0, 1e-13, True)
    evals += int(used)
    if r3 < best:
        best, x = float(r3), x3.copy()
    a, b, p = np.exp(x[:3])
    return ProbeResult(float(best), (float(a), float(b), float(p), float(x[3])), evals)


def grid_lower_bound(m: float, k: float, target: SemidirectElement, n: int = 41) -> float:
    """Brute-force minimum of the same residual on a uniform grid over the window."""
    tvec = np.array([target.g.m[0, 0], target.g.m[0, 1], target.h.m[0, 0], target.h.m[0, 1]])
    lo = np.array([-WINDOW_LOG, -WINDOW_LOG, -WINDOW_LOG, -WINDOW_Q])
    axes = [np.linspace(l, -l, n) for l in lo]
    best = np.inf
    la, lb, lp = np.meshgrid(axes[0], axes[1], axes[2], indexing="ij")
    base = np.stack([la.ravel(), lb.ravel(), lp.ravel()], axis=1)
    for q in axes[3]:
        pts = np.column_stack([base, np.full(len(base), q)])
        _, mx = _kernels._case3_eval_numpy(float(m), float(k), pts, tvec)
        best = min(best, float(mx.min()))
    return best


def random_params(case_id: str, rng) -> dict:
    """Parameter draw for a catalog case: lam in [-2, 2] away from 0 and -1, mu in [-3, 3]."""
    if case_id == "HEIS":
        return {}
    mu = float(rng.uniform(-3.0, 3.0))
    if case_id in ("C11", "C23"):
        while True:
            lam = float(rng.uniform(-2.0, 2.0))
            if abs(lam) >= 0.1 and abs(lam + 1.0) >= 0.1:
                return {"lam": lam, "mu": mu}
    return {"mu": mu}
