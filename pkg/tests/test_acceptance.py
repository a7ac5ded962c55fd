"""Acceptance criteria, one test (and one printed PASS/FAIL line) each.

Each test records its headline numbers; the lines are printed in the
terminal summary by ``conftest.py`` and also to stdout (visible with ``-s``).
"""
import subprocess
import sys
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from rblab.bialgebra import (
    cybe_residual,
    derived_rb,
    dual_bracket,
    invariance_residual,
    is_factorizable,
    poisson_multiplicativity,
    sl2_test_rmatrix,
)
from rblab.catalog import (
    CASES,
    catalog_operator,
    excluded_target,
    factor_residual,
    group_rb_residual,
    membership_factor,
    obstruction_probe,
    probe_candidate,
    random_params,
    tangent_matches_algebra,
)
from rblab.factorization import (
    GraphWord,
    big_F,
    big_J,
    composable_square,
    f_pm_homomorphism_residuals,
    gamma_make,
    gamma_mul_h,
    gamma_mul_v,
    interchange_residual,
    j_inverse_probe,
    j_tangent,
    upsilon,
    upsilon_inverse,
)
from rblab.groups import SemidirectElement, group, identity, max_abs, semidirect_identity
from rblab.lie import (
    LieAlgebra,
    LinearOperator,
    adjoint_action,
    jacobi_residual,
    rb_residuals,
    transport_operator,
    two_dim_algebra,
)
from rblab.rota_baxter import (
    Family1,
    Family2,
    Family3,
    NotRB,
    RelativeRBData,
    classify_rb_2d,
    double_bracket,
    family_matrix,
    graph_subalgebra,
    kappa_residual,
    matched_pair_from_rb,
    matched_pair_residual,
    rb_data_2d,
    rb_residual,
)

HEIS_B = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def scalar_equations(B):
    # the RB identity on [e1, e2] = 2 e2, expanded into its two scalar equations
    (b11, b12), (b21, b22) = B
    return max(abs(b12 * (b11 + b22 + 1)), abs(b11 * b22 - b12 * b21 - (b11 + b22 + 1) * b22))


def family_draw(kind, rng):
    if kind == 1:
        return Family1(*rng.uniform(-3, 3, 2))
    if kind == 2:
        return Family2(*rng.uniform(-3, 3, 2))
    return Family3(rng.uniform(-3, 3), rng.uniform(0.3, 3) * rng.choice([-1.0, 1.0]))


def algebra_family(Bmap):
    """The 2D family an integrated catalog operator should differentiate to."""
    if Bmap.case_id == "HEIS":
        return HEIS_B
    lam = Bmap.params.get("lam", {"C12": -1.0, "C22": -1.0}.get(Bmap.case_id, 0.0))
    fam = Family1 if Bmap.case_id.startswith("C1") else Family2
    return family_matrix(fam(lam, Bmap.params["mu"]))


# 1 -----------------------------------------------------------------------------

def test_criterion_1_classification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    a2 = two_dim_algebra()
    phi = adjoint_action(a2)
    worst_family = 0.0
    for kind in (1, 2, 3):
        Bs = np.array([family_matrix(family_draw(kind, rng)) for _ in range(1000)])
        worst_family = max(worst_family, float(rb_residuals(a2, a2, phi, Bs).max()))
    # 10^5 matrices: half continuous, half with small-integer entries so that
    # the RB locus is actually hit (continuous draws almost never land on it)
    n = 100_000
    cont = rng.uniform(-3, 3, (n // 2, 2, 2))
    ints = rng.integers(-2, 3, (n - n // 2, 2, 2)).astype(float)
    Bs = np.concatenate([cont, ints])
    res = rb_residuals(a2, a2, phi, Bs)
    hits = np.flatnonzero(res <= 1e-9)
    missed = 0
    oracle_disagree = 0
    for i in hits:
        cls = classify_rb_2d(Bs[i])
        if isinstance(cls, NotRB) or np.abs(family_matrix(cls) - Bs[i]).max() > 1e-9:
            missed += 1
    oracle = np.array([scalar_equations(B) for B in Bs])
    oracle_disagree = int(np.sum((oracle <= 1e-9) != (res <= 1e-9)))
    elapsed = time.perf_counter() - t0
    ok = worst_family <= 1e-12 and missed == 0 and oracle_disagree == 0 and len(hits) > 0 and elapsed <= 5.0
    record(1, ok, f"family draws max rb_residual={worst_family:.3g} (<=1e-12); "
                  f"{len(hits)} RB hits among {n}, unclassified={missed}, oracle mismatches={oracle_disagree}; "
                  f"{elapsed:.2f}s (<=5s)")


# 2 -----------------------------------------------------------------------------

def test_criterion_2_catalog_integration():
    rng = np.random.default_rng(202)
    worst_rb, worst_tan = 0.0, 0.0
    for case in CASES:
        grp = group("HEIS3" if case == "HEIS" else "UT2")
        for _ in range(20):
            Bmap = catalog_operator(case, **random_params(case, rng))
            pairs = [(grp.random(rng), grp.random(rng)) for _ in range(200)]
            worst_rb = max(worst_rb, group_rb_residual(Bmap, pairs))
            worst_tan = max(worst_tan, tangent_matches_algebra(Bmap, algebra_family(Bmap)).residual)
    ok = worst_rb <= 1e-9 and worst_tan <= 1e-6
    record(2, ok, f"7 cases x 20 draws x 200 pairs: group_rb_residual={worst_rb:.3g} (<=1e-9), "
                  f"tangent={worst_tan:.3g} (<=1e-6)")


# 3 -----------------------------------------------------------------------------

def test_criterion_3_case3_obstruction():
    m, k = 0.0, 1.0
    low = min(obstruction_probe(m, k, excluded_target(m, k, float(z)), 100_000, seed=i).residual
              for i, z in enumerate(np.linspace(0.5, 2.0, 20)))
    rng = np.random.default_rng(303)
    high = 0.0
    for i in range(20):
        a, b, p = np.exp(rng.uniform(-1.5, 1.5, 3))
        q = float(rng.uniform(-4.0, 4.0))
        t = probe_candidate(m, k, a, b, p, q)
        high = max(high, obstruction_probe(m, k, t, 100_000, seed=i).residual)
    ok = low >= 0.05 and high <= 1e-6
    record(3, ok, f"m=0,k=1 window [e^-2,e^2]^3 x [-5,5]: excluded-locus min residual={low:.5g} (>=0.05), "
                  f"in-image max residual={high:.3g} (<=1e-6)")


# 4 -----------------------------------------------------------------------------

def test_criterion_4_structural_identities():
    rng = np.random.default_rng(404)
    # graph criterion on family draws and on non-RB matrices
    graph_mismatch = 0
    mp_worst, jac_worst, kappa_worst, fpm_worst = 0.0, 0.0, 0.0, 0.0
    for kind in (1, 2, 3):
        for _ in range(30):
            data = rb_data_2d(family_matrix(family_draw(kind, rng)))
            gr = graph_subalgebra(data, tol=1e-9)
            graph_mismatch += int(gr.residual > 1e-9)
            mp = matched_pair_from_rb(data, tol=1e-9)
            mp_worst = max(mp_worst, matched_pair_residual(mp))
            jac_worst = max(jac_worst, jacobi_residual(double_bracket(mp, tol=1e-9)))
            kappa_worst = max(kappa_worst, kappa_residual(data, tol=1e-9))
            fpm_worst = max(fpm_worst, *f_pm_homomorphism_residuals(data, tol=1e-9))
    for _ in range(100):
        data = rb_data_2d(rng.uniform(-3, 3, (2, 2)))
        if rb_residual(data) > 1e-9:
            graph_mismatch += int(graph_subalgebra(data, tol=1e-9).residual <= 1e-9)
    # J-graph identity, J tangent, membership and Upsilon on every catalog case
    jgraph, jtan, member, ups = 0.0, 0.0, 0.0, 0.0
    for case in CASES:
        Bmap = catalog_operator(case, **random_params(case, rng))
        data = Bmap.rb_data()
        grp = group(Bmap.group_id)
        n = data.g.dim
        for _ in range(20):
            w = GraphWord.from_coords(data, rng.uniform(-1, 1, (3, n)), rng.uniform(-1, 1, 3))
            d = w.element()
            Fm, _ = big_F(w)
            jgraph = max(jgraph, max_abs(big_J(w), d.h), max_abs(Bmap(big_J(w)), Fm))
            u = rng.uniform(-1, 1, n)
            jtan = max(jtan, float(np.abs(j_tangent(data, np.concatenate([data.B.m @ u, u])) - u).max()))
        for _ in range(500):
            t = SemidirectElement(grp.random(rng), grp.random(rng))
            member = max(member, factor_residual(t, membership_factor(t, Bmap), Bmap))
        e = identity(Bmap.group_id)
        g, h = grp.random(rng), grp.random(rng)
        f = SemidirectElement(Bmap(h), h)
        ups = max(ups, max_abs(upsilon(e, semidirect_identity(Bmap.group_id)), semidirect_identity(Bmap.group_id)),
                  max_abs(upsilon(g, semidirect_identity(Bmap.group_id)), SemidirectElement(g, e)),
                  max_abs(upsilon(e, f), f))
        for _ in range(5):
            t = SemidirectElement(grp.random(rng), grp.random(rng))
            ups = max(ups, upsilon_inverse(t, Bmap).residual)
    ok = (graph_mismatch == 0 and mp_worst <= 1e-12 and jac_worst <= 1e-12 and kappa_worst <= 1e-12
          and fpm_worst <= 1e-12 and jgraph <= 1e-10 and jtan <= 1e-6 and member <= 1e-12 and ups <= 1e-8)
    record(4, ok, f"graph mismatches={graph_mismatch}; matched pair={mp_worst:.3g}, double Jacobi={jac_worst:.3g}, "
                  f"kappa={kappa_worst:.3g}, f+-={fpm_worst:.3g} (<=1e-12); J-graph={jgraph:.3g} (<=1e-10), "
                  f"J tangent={jtan:.3g} (<=1e-6); membership={member:.3g} (<=1e-12); Upsilon={ups:.3g} (<=1e-8)")


# 5 -----------------------------------------------------------------------------

def test_criterion_5_double_groupoid():
    rng = np.random.default_rng(505)
    inv, closure, inter = 0.0, 0.0, 0.0
    for Bmap in (catalog_operator("C11", lam=1.0, mu=0.0), catalog_operator("HEIS")):
        grp = group(Bmap.group_id)
        for _ in range(100):
            xi = gamma_make(grp.random(rng), grp.random(rng), Bmap)
            inv = max(inv, xi.residual())
            left = gamma_make(grp.random(rng), xi.h2, Bmap)
            below = gamma_make(xi.a1, grp.random(rng), Bmap)
            closure = max(closure, gamma_mul_h(left, xi).residual(), gamma_mul_v(xi, below).residual())
            sq = composable_square(*(grp.random(rng) for _ in range(4)), Bmap)
            inv = max(inv, *(s.residual() for s in sq))
            inter = max(inter, interchange_residual(*sq))
    ok = inv <= 1e-10 and closure <= 1e-9 and inter <= 1e-9
    record(5, ok, f"C11 and HEIS: Gamma invariant={inv:.3g} (<=1e-10), closure={closure:.3g} (<=1e-9), "
                  f"interchange on 100 squares each={inter:.3g} (<=1e-9)")


# 6 -----------------------------------------------------------------------------

def test_criterion_6_bialgebra_pipeline():
    rm = sl2_test_rmatrix()
    cy, inv = cybe_residual(rm), invariance_residual(rm)
    fact = is_factorizable(rm)
    jac = jacobi_residual(dual_bracket(rm))
    B = derived_rb(rm)
    data = RelativeRBData.adjoint(rm.alg, B)
    rb = rb_residual(data)
    rng = np.random.default_rng(606)
    grp = group("SL2")
    pois = poisson_multiplicativity(rm, [(grp.random(rng), grp.random(rng)) for _ in range(100)])
    jp = max(j_inverse_probe(grp.random(rng), data, seed=i).residual for i in range(20))
    ok = cy <= 1e-12 and inv <= 1e-12 and fact and jac <= 1e-10 and rb <= 1e-10 and pois <= 1e-8 and jp <= 1e-6
    record(6, ok, f"sl2 r: CYBE={cy:.3g}, invariance={inv:.3g} (<=1e-12), I invertible={fact}, "
                  f"dual Jacobi={jac:.3g} (<=1e-10), derived RB={rb:.3g} (<=1e-10), "
                  f"Poisson={pois:.3g} (<=1e-8), J inverse on 20 targets={jp:.3g} (<=1e-6)")


# 7 -----------------------------------------------------------------------------

def test_criterion_7_transport():
    a2 = two_dim_algebra()
    h = LieAlgebra("h", 2, {(0, 1, 0): -2.0, (0, 1, 1): 2.0})       # [u1, u2] = 2 (u2 - u1)
    B = LinearOperator(h, h, [[0.0, 0.0], [0.0, -1.0]])
    iso = LinearOperator(a2, h, [[1.0, -1.0], [0.0, 1.0]])
    Bp = transport_operator(B, iso)
    produced = float(np.abs(Bp.m - np.array([[0.0, -1.0], [0.0, -1.0]])).max())
    cls = classify_rb_2d(Bp.m)
    m, k = -1.0, -1.0
    low = min(obstruction_probe(m, k, excluded_target(m, k, float(z)), 100_000, seed=i).residual
              for i, z in enumerate(np.linspace(0.5, 2.0, 10)))
    ok = produced <= 1e-12 and cls == Family3(-1.0, -1.0) and low >= 0.05
    record(7, ok, f"transported B' off by {produced:.3g}; classified {cls}; "
                  f"excluded-locus min residual over 10 targets={low:.5g} (>=0.05)")


# 8 -----------------------------------------------------------------------------

def test_criterion_8_determinism():
    cmd = [sys.executable, "-m", "rblab.cli", "suite", "--seed", "42"]
    runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout and len(runs[0].stdout) > 0
    ok = same and runs[0].returncode == 0
    record(8, ok, f"suite --seed 42 twice: {len(runs[0].stdout)} bytes, identical={same}, "
                  f"exit={runs[0].returncode}")
