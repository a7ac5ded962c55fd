"""Concrete matrix Lie groups with closed-form exp/log.

``UT2``
    ``[[a, b], [0, 1/a]]`` with ``a > 0``; algebra basis ``e1 = diag(1, -1)``,
    ``e2 = E12``.  Elements are written ``ut2(a, b)``.
``HEIS3``
    unit upper-triangular 3x3 matrices ``heis(a, b, c)`` with ``a = (1,2)``,
    ``b = (1,3)``, ``c = (2,3)`` entries; algebra basis ``X = E12``, ``Y = E23``,
    ``Z = E13``.
``SL2``
    ``SL(2, R)`` with algebra basis ``h, e, f``.  Used only for the r-matrix
    pipeline; ``log`` is defined on the image of ``exp``.

Semidirect products ``G x|_Phi H`` are pairs :class:`SemidirectElement`.  The
only built-in action is conjugation, for which ``(g, h) -> (g, h g)`` is an
isomorphism onto ``G x G``; exp/log of pairs go through that isomorphism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lie import LieAlgebra, heisenberg, sl2, two_dim_algebra

GROUP_TOL = 1e-12


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupElement:
    group_id: str
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        GROUPS[self.group_id].check(m)

    def __matmul__(self, other):
        return gmul(self, other)

    def __repr__(self):
        return f"GroupElement({self.group_id}, {self.m.tolist()})"


class MatrixGroup:
    group_id: str
    size: int
    algebra: LieAlgebra
    basis: np.ndarray          # (n, size, size)

    def check(self, m):
        if m.shape != (self.size, self.size):
            raise GroupError(f"{self.group_id} expects {self.size}x{self.size} matrices, got {m.shape}")

    def identity(self) -> GroupElement:
        return GroupElement(self.group_id, np.eye(self.size))

    def hat(self, X) -> np.ndarray:
        return np.einsum("i,ijk->jk", np.asarray(X, dtype=float), self.basis)

    def vee(self, A) -> np.ndarray:
        raise NotImplementedError

    def exp(self, X) -> np.ndarray:
        raise NotImplementedError

    def log(self, m) -> np.ndarray:
        raise NotImplementedError

    def random(self, rng, scale: float = 1.0) -> GroupElement:
        raise NotImplementedError


class UT2Group(MatrixGroup):
    group_id = "UT2"
    size = 2
    algebra = two_dim_algebra()
    basis = np.array([[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]])

    def check(self, m):
        super().check(m)
        if not m[0, 0] > 0:
            raise GroupError(f"UT2 requires a > 0, got a = {m[0, 0]}")
        if m[1, 0] != 0.0:
            raise GroupError("UT2 elements are upper triangular")
        if abs(m[0, 0] * m[1, 1] - 1.0) > GROUP_TOL * max(1.0, abs(m[0, 0]), abs(m[1, 1])):
            raise GroupError(f"UT2 requires det = 1, got {m[0, 0] * m[1, 1]}")

    def vee(self, A):
        return np.array([A[0, 0], A[0, 1]])

    def exp(self, X):
        t, s = float(X[0]), float(X[1])
        a = math.exp(t)
        b = s * _sinhc(t)
        return np.array([[a, b], [0.0, 1.0 / a]])

    def log(self, m):
        t = math.log(m[0, 0])
        return np.array([t, m[0, 1] / _sinhc(t)])

    def random(self, rng, scale=1.0):
        return ut2(math.exp(rng.uniform(-1.5, 1.5) * scale), rng.uniform(-3.0, 3.0) * scale)


class Heis3Group(MatrixGroup):
    group_id = "HEIS3"
    size = 3
    algebra = heisenberg()
    basis = np.zeros((3, 3, 3))
    basis[0, 0, 1] = 1.0
    basis[1, 1, 2] = 1.0
    basis[2, 0, 2] = 1.0

    def check(self, m):
        super().check(m)
        if np.any(np.diag(m) != 1.0) or np.any(np.tril(m, -1) != 0.0):
            raise GroupError("HEIS3 elements are unit upper triangular")

    def vee(self, A):
        return np.array([A[0, 1], A[1, 2], A[0, 2]])

    def exp(self, X):
        x, y, z = (float(v) for v in X)
        return heis(x, z + 0.5 * x * y, y).m.copy()

    def log(self, m):
        a, b, c = m[0, 1], m[0, 2], m[1, 2]
        return np.array([a, c, b - 0.5 * a * c])

    def random(self, rng, scale=1.0):
        return heis(*(rng.uniform(-3.0, 3.0, size=3) * scale))


class SL2Group(MatrixGroup):
    group_id = "SL2"
    size = 2
    algebra = sl2()
    basis = np.array([[[1.0, 0.0], [0.0, -1.0]],
                      [[0.0, 1.0], [0.0, 0.0]],
                      [[0.0, 0.0], [1.0, 0.0]]])

    def check(self, m):
        super().check(m)
        scale = max(1.0, float(np.abs(m).max()))
        if abs(np.linalg.det(m) - 1.0) > 1e-10 * scale * scale:
            raise GroupError(f"SL2 requires det = 1, got {np.linalg.det(m)}")

    def vee(self, A):
        return np.array([A[0, 0], A[0, 1], A[1, 0]])

    def exp(self, X):
        A = self.hat(X)
        delta = X[0] * X[0] + X[1] * X[2]       # A @ A = delta * I
        if delta >= 0:
            r = math.sqrt(delta)
            c, s = math.cosh(r), _sinhc(r)
        else:
            r = math.sqrt(-delta)
            c, s = math.cos(r), (math.sin(r) / r)
        return c * np.eye(2) + s * A

    def log(self, m):
        half = 0.5 * (m[0, 0] + m[1, 1])
        if half > 1.0:
            r = math.acosh(half)
            A = (m - half * np.eye(2)) / _sinhc(r)
        elif half > -1.0:
            r = math.acos(half)
            A = (m - half * np.eye(2)) * (r / math.sin(r))
        else:
            raise GroupError("element is not in the image of exp")
        return self.vee(A)

    def random(self, rng, scale=1.0):
        return gexp("SL2", rng.uniform(-0.6, 0.6, size=3) * scale)


def _sinhc(t: float) -> float:
    if abs(t) < 1e-8:
        return 1.0 + t * t / 6.0
    return math.sinh(t) / t


GROUPS: dict[str, MatrixGroup] = {g.group_id: g for g in (UT2Group(), Heis3Group(), SL2Group())}


def group(group_id: str) -> MatrixGroup:
    try:
        return GROUPS[group_id]
    except KeyError:
        raise GroupError(f"unknown group {group_id!r}") from None


def ut2(a: float, b: float) -> GroupElement:
    if not a > 0:
        raise GroupError(f"UT2 requires a > 0, got a = {a}")
    return GroupElement("UT2", np.array([[a, b], [0.0, 1.0 / a]]))


def heis(a: float, b: float, c: float) -> GroupElement:
    return GroupElement("HEIS3", np.array([[1.0, a, b], [0.0, 1.0, c], [0.0, 0.0, 1.0]]))


def _same(x: GroupElement, y: GroupElement):
    if x.group_id != y.group_id:
        raise GroupError(f"group mismatch: {x.group_id} vs {y.group_id}")


def _clean(group_id: str, m: np.ndarray) -> GroupElement:
    # products of valid elements are valid up to rounding; restore exact structure
    if group_id == "UT2":
        m = np.array([[m[0, 0], m[0, 1]], [0.0, 1.0 / m[0, 0]]])
    elif group_id == "HEIS3":
        m = np.array([[1.0, m[0, 1], m[0, 2]], [0.0, 1.0, m[1, 2]], [0.0, 0.0, 1.0]])
    return GroupElement(group_id, m)


def gmul(x: GroupElement, y: GroupElement) -> GroupElement:
    _same(x, y)
    return _clean(x.group_id, x.m @ y.m)


def ginv(x: GroupElement) -> GroupElement:
    m = x.m
    if x.group_id == "UT2":
        a, b = m[0, 0], m[0, 1]
        return ut2(1.0 / a, -b)
    if x.group_id == "HEIS3":
        a, b, c = m[0, 1], m[0, 2], m[1, 2]
        return heis(-a, a * c - b, -c)
    if x.group_id == "SL2":
        return GroupElement("SL2", np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]))
    return _clean(x.group_id, np.linalg.inv(m))


def identity(group_id: str) -> GroupElement:
    return group(group_id).identity()


def gexp(group_id: str, X) -> GroupElement:
    grp = group(group_id)
    X = np.asarray(X, dtype=float)
    if X.shape != (grp.algebra.dim,):
        raise GroupError(f"{group_id} algebra has dimension {grp.algebra.dim}, got {X.shape}")
    return _clean(group_id, grp.exp(X))


def glog(x) -> np.ndarray:
    if isinstance(x, SemidirectElement):
        return semidirect_log(x)
    return group(x.group_id).log(x.m)


def ad_action(g: GroupElement, h):
    """Conjugation ``g h g^-1`` on a group element, or ``Ad_g`` on an algebra vector."""
    if isinstance(h, GroupElement):
        _same(g, h)
        return gmul(gmul(g, h), ginv(g))
    grp = group(g.group_id)
    A = g.m @ grp.hat(h) @ ginv(g).m
    return grp.vee(A)


def ad_matrix_group(g: GroupElement) -> np.ndarray:
    """Matrix of ``Ad_g`` in the algebra basis."""
    grp = group(g.group_id)
    return np.column_stack([ad_action(g, e) for e in np.eye(grp.algebra.dim)])


def max_abs(x, y) -> float:
    if isinstance(x, SemidirectElement):
        return max(max_abs(x.g, y.g), max_abs(x.h, y.h))
    return float(np.abs(x.m - y.m).max())


# -- semidirect products ---------------------------------------------------

GroupAction = Callable[[GroupElement, GroupElement], GroupElement]


@dataclass(frozen=True, eq=False)
class SemidirectElement:
    g: GroupElement
    h: GroupElement

    def __repr__(self):
        return f"SemidirectElement({self.g!r}, {self.h!r})"


def semidirect_gmul(x: SemidirectElement, y: SemidirectElement,
                    Phi: GroupAction = ad_action) -> SemidirectElement:
    """``(g1, h1)(g2, h2) = (g1 g2, h1 Phi(g1) h2)``."""
    return SemidirectElement(gmul(x.g, y.g), gmul(x.h, Phi(x.g, y.h)))


def semidirect_inv(x: SemidirectElement, Phi: GroupAction = ad_action) -> SemidirectElement:
    gi = ginv(x.g)
    return SemidirectElement(gi, Phi(gi, ginv(x.h)))


def semidirect_identity(g_id: str, h_id: str | None = None) -> SemidirectElement:
    return SemidirectElement(identity(g_id), identity(h_id or g_id))


def semidirect_exp(group_id: str, X) -> SemidirectElement:
    """Exponential in ``G x|_Ad G`` of ``(x, u)`` (concatenated coordinates)."""
    n = group(group_id).algebra.dim
    X = np.asarray(X, dtype=float)
    x, u = X[:n], X[n:]
    ex = gexp(group_id, x)
    return SemidirectElement(ex, gmul(gexp(group_id, x + u), ginv(ex)))


def semidirect_log(d: SemidirectElement) -> np.ndarray:
    """Inverse of :func:`semidirect_exp` for the conjugation action."""
    x = glog(d.g)
    y = glog(gmul(d.h, d.g))
    return np.concatenate([x, y - x])


def tangent_at_identity(f, X, domain: str, step: float = 1e-5) -> np.ndarray:
    """Central difference of ``log f(exp(t X))`` at ``t = 0``."""
    X = np.asarray(X, dtype=float)
    plus = glog(f(gexp(domain, step * X)))
    minus = glog(f(gexp(domain, -step * X)))
    return (plus - minus) / (2.0 * step)


def group_for_algebra(alg: LieAlgebra) -> str:
    """Id of the catalog group whose algebra has the same structure constants."""
    for gid, grp in GROUPS.items():
        if grp.algebra.same_constants(alg):
            return gid
    raise GroupError(f"no catalog group integrates {alg.name}")
