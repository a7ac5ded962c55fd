"""Structure-constant Lie algebras, linear maps between them and actions.

Conventions used everywhere in the package:

* basis indices are 0-based in code and 1-based in files;
* ``c[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``;
* an operator matrix ``m`` has ``m[:, j]`` equal to the image of basis vector ``j``;
* every residual is a max-abs over coefficient entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._kernels import rb_residual_batch

EXACT_TOL = 1e-12


class LieError(ValueError):
    """Raised when an input violates an algebraic precondition."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """A real Lie algebra given by structure constants.

    Only the upper triangle ``i < j`` is read from ``brackets``; the lower
    triangle is filled in by antisymmetry.
    """

    name: str
    dim: int
    brackets: Mapping[tuple[int, int, int], float] = field(default_factory=dict)
    c: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise LieError(f"dimension must be positive, got {self.dim}")
        c = np.zeros((self.dim, self.dim, self.dim))
        for (i, j, k), val in self.brackets.items():
            for idx in (i, j, k):
                if not 0 <= idx < self.dim:
                    raise LieError(f"index {idx} out of range for dim {self.dim}")
            if i == j:
                if val != 0:
                    raise LieError(f"[e_{i + 1}, e_{i + 1}] must vanish")
                continue
            if i > j:
                i, j, val = j, i, -val
            c[i, j, k] = val
            c[j, i, k] = -val
        object.__setattr__(self, "c", _frozen(c))

    @classmethod
    def from_constants(cls, name: str, c) -> "LieAlgebra":
        c = np.asarray(c, dtype=float)
        n = c.shape[0]
        if c.shape != (n, n, n):
            raise LieError(f"structure constants must be n x n x n, got {c.shape}")
        entries = {(i, j, k): float(c[i, j, k])
                   for i in range(n) for j in range(i + 1, n) for k in range(n)
                   if c[i, j, k] != 0.0}
        return cls(name, n, entries)

    def bracket(self, x, y) -> np.ndarray:
        return bracket(self, x, y)

    def same_constants(self, other: "LieAlgebra", tol: float = EXACT_TOL) -> bool:
        return self.dim == other.dim and float(np.abs(self.c - other.c).max(initial=0.0)) <= tol

    def __repr__(self):
        return f"LieAlgebra({self.name!r}, dim={self.dim})"


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (alg.dim,) or y.shape != (alg.dim,):
        raise LieError(f"expected vectors of length {alg.dim}, got {x.shape} and {y.shape}")
    return np.einsum("i,j,ijk->k", x, y, alg.c)


def jacobi_residual(alg: LieAlgebra) -> float:
    """Max-abs of the cyclic Jacobi sum over all basis triples."""
    c = alg.c
    # sum_k c[i,j,k] c[k,l,m] + cyclic(i, j, l)
    t = np.einsum("ijk,klm->ijlm", c, c)
    cyc = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.abs(cyc).max(initial=0.0))


def ad_matrix(alg: LieAlgebra, x) -> np.ndarray:
    """Matrix of ``ad_x``: column ``j`` is ``[x, e_j]``."""
    x = np.asarray(x, dtype=float)
    return np.einsum("i,ijk->kj", x, alg.c)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    domain: LieAlgebra
    codomain: LieAlgebra
    m: np.ndarray

    def __post_init__(self):
        m = _frozen(self.m)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise LieError(
                f"operator shape {m.shape} does not match "
                f"{self.codomain.name} x {self.domain.name} = {(self.codomain.dim, self.domain.dim)}")
        object.__setattr__(self, "m", m)

    def __call__(self, v) -> np.ndarray:
        return self.m @ np.asarray(v, dtype=float)


def homomorphism_residual(op: LinearOperator) -> float:
    """Max-abs of ``op[e_i, e_j] - [op e_i, op e_j]`` over basis pairs."""
    src, dst, m = op.domain, op.codomain, op.m
    lhs = np.einsum("ijk,lk->ijl", src.c, m)
    rhs = np.einsum("ai,bj,abl->ijl", m, m, dst.c)
    return float(np.abs(lhs - rhs).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class LieAction:
    """Linear map ``x -> phi(x)`` from ``actor`` into endomorphisms of ``target``.

    ``phi[i]`` is the matrix of ``phi(e_i)``.  Validity (derivations plus the
    homomorphism property) is checked by :meth:`validate`, not at construction,
    so that non-examples can be built and measured.
    """

    actor: LieAlgebra
    target: LieAlgebra
    phi: np.ndarray

    def __post_init__(self):
        phi = _frozen(self.phi)
        n, m = self.actor.dim, self.target.dim
        if phi.shape != (n, m, m):
            raise LieError(f"action array must have shape {(n, m, m)}, got {phi.shape}")
        object.__setattr__(self, "phi", phi)

    def of(self, x) -> np.ndarray:
        return np.einsum("i,ijk->jk", np.asarray(x, dtype=float), self.phi)

    def derivation_residual(self) -> float:
        h = self.target.c
        worst = 0.0
        for D in self.phi:
            lhs = np.einsum("uvk,lk->uvl", h, D)          # D[u, v]
            rhs = (np.einsum("au,avl->uvl", D, h)          # [Du, v]
                   + np.einsum("bv,ubl->uvl", D, h))       # [u, Dv]
            worst = max(worst, float(np.abs(lhs - rhs).max(initial=0.0)))
        return worst

    def homomorphism_residual(self) -> float:
        g = self.actor.c
        lhs = np.einsum("ijk,kab->ijab", g, self.phi)
        rhs = (np.einsum("iac,jcb->ijab", self.phi, self.phi)
               - np.einsum("jac,icb->ijab", self.phi, self.phi))
        return float(np.abs(lhs - rhs).max(initial=0.0))

    def validate(self, tol: float = EXACT_TOL, derivations: bool = True) -> None:
        if derivations:
            d = self.derivation_residual()
            if d > tol:
                raise LieError(f"action is not by derivations (residual {d:.3e})")
        hom = self.homomorphism_residual()
        if hom > tol:
            raise LieError(f"action is not a homomorphism (residual {hom:.3e})")


def adjoint_action(g: LieAlgebra) -> LieAction:
    phi = np.stack([ad_matrix(g, e) for e in np.eye(g.dim)])
    return LieAction(g, g, phi)


def zero_action(g: LieAlgebra, h: LieAlgebra) -> LieAction:
    return LieAction(g, h, np.zeros((g.dim, h.dim, h.dim)))


def semidirect_algebra(g: LieAlgebra, h: LieAlgebra, phi: LieAction,
                       tol: float = EXACT_TOL) -> LieAlgebra:
    """Bracket ``[(x,u),(y,v)] = ([x,y], phi(x)v - phi(y)u + [u,v])`` on ``g + h``."""
    if phi.actor is not g and not phi.actor.same_constants(g):
        raise LieError("action's actor does not match g")
    if phi.target is not h and not phi.target.same_constants(h):
        raise LieError("action's target does not match h")
    phi.validate(tol)
    n, m = g.dim, h.dim
    c = np.zeros((n + m, n + m, n + m))
    c[:n, :n, :n] = g.c
    c[n:, n:, n:] = h.c
    for i in range(n):
        # [(e_i, 0), (0, f_a)] = (0, phi(e_i) f_a)
        c[i, n:, n:] = phi.phi[i].T
        c[n:, i, n:] = -phi.phi[i].T
    return LieAlgebra.from_constants(f"{g.name}x|{h.name}", c)


def transport_operator(B: LinearOperator, iso: LinearOperator,
                       tol: float = EXACT_TOL) -> LinearOperator:
    """Pull an operator on ``h`` back along an isomorphism ``iso: g -> h``."""
    if iso.m.shape[0] != iso.m.shape[1]:
        raise LieError("isomorphism must be square")
    if not (B.domain.same_constants(iso.codomain) and B.codomain.same_constants(iso.codomain)):
        raise LieError("operator must act on the codomain of the isomorphism")
    if abs(np.linalg.det(iso.m)) <= tol * max(1.0, float(np.abs(iso.m).max())) ** iso.m.shape[0]:
        raise LieError("isomorphism is not invertible")
    hom = homomorphism_residual(iso)
    if hom > tol:
        raise LieError(f"map is not a bracket homomorphism (residual {hom:.3e})")
    m = np.linalg.solve(iso.m, B.m @ iso.m)
    return LinearOperator(iso.domain, iso.domain, m)


def rb_residuals(g: LieAlgebra, h: LieAlgebra, phi: LieAction, Bs) -> np.ndarray:
    """Vectorized relative Rota-Baxter residual for a stack of ``(n_g, n_h)`` matrices."""
    Bs = np.ascontiguousarray(np.asarray(Bs, dtype=float))
    if Bs.ndim == 2:
        Bs = Bs[None]
    if Bs.shape[1:] != (g.dim, h.dim):
        raise LieError(f"operators must have shape {(g.dim, h.dim)}, got {Bs.shape[1:]}")
    return rb_residual_batch(np.ascontiguousarray(g.c), np.ascontiguousarray(h.c),
                             np.ascontiguousarray(phi.phi), Bs)


# -- standard algebras --------------------------------------------------------

def two_dim_algebra() -> LieAlgebra:
    """span{e1, e2} with [e1, e2] = 2 e2 (diag(1,-1) and the upper nilpotent)."""
    return LieAlgebra("a2", 2, {(0, 1, 1): 2.0})


def heisenberg() -> LieAlgebra:
    """Basis X, Y, Z with [X, Y] = Z and Z central."""
    return LieAlgebra("heis", 3, {(0, 1, 2): 1.0})


def sl2() -> LieAlgebra:
    """Basis h, e, f with [h,e] = 2e, [h,f] = -2f, [e,f] = h."""
    return LieAlgebra("sl2", 3, {(0, 1, 1): 2.0, (0, 2, 2): -2.0, (1, 2, 0): 1.0})


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(f"abelian{n}", n)
