import math

import numpy as np
import pytest

from rblab.catalog import CASES, catalog_operator, excluded_target, obstruction_probe, random_params
from rblab.factorization import (
    ComposabilityError,
    GammaElement,
    GraphWord,
    big_F,
    big_J,
    composable_square,
    f_pm,
    f_pm_homomorphism_residuals,
    gamma_distance,
    gamma_make,
    gamma_mul_h,
    gamma_mul_v,
    gamma_unit_h,
    gamma_unit_v,
    interchange_residual,
    j_inverse_probe,
    j_tangent,
    upsilon,
    upsilon_inverse,
)
from rblab.groups import (
    GroupElement,
    SemidirectElement,
    gmul,
    group,
    heis,
    identity,
    max_abs,
    semidirect_identity,
    ut2,
)
from rblab.lie import LieError, heisenberg
from rblab.rota_baxter import Family1, Family2, Family3, RelativeRBData, family_matrix, rb_data_2d


def fam1(lam=1.0, mu=0.0):
    return rb_data_2d(family_matrix(Family1(lam, mu)))


def fam3(m=0.0, k=1.0):
    return rb_data_2d(family_matrix(Family3(m, k)))


def _random_family(rng):
    kind = rng.integers(3)
    if kind == 0:
        return family_matrix(Family1(*rng.uniform(-3, 3, 2)))
    if kind == 1:
        return family_matrix(Family2(*rng.uniform(-3, 3, 2)))
    k = rng.uniform(0.3, 3) * rng.choice([-1, 1])
    return family_matrix(Family3(rng.uniform(-3, 3), k))


# -- f+- -----------------------------------------------------------------------

def test_f_pm_examples():
    fm, fp = f_pm(fam3(), [-1, 0, 1, 0])
    assert np.array_equal(fm, [-1, 0]) and np.array_equal(fp, [0, 0])
    fm, fp = f_pm(fam1(), [1, 0, 1, 0])
    assert np.array_equal(fp, [2, 0])
    rng = np.random.default_rng(0)
    d = fam1(0.4, -2.0)
    for _ in range(10):
        u = rng.normal(size=2)
        fm, fp = f_pm(d, np.concatenate([d.B.m @ u, u]))
        assert np.allclose(fp - fm, u, atol=1e-15)


def test_f_pm_errors():
    with pytest.raises(LieError):
        f_pm(fam1(), [0, 0, 1, 0])      # B e1 = e1, not 0
    with pytest.raises(LieError):
        f_pm(fam1(), [1, 0])
    bad = rb_data_2d([[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(LieError):
        f_pm_homomorphism_residuals(bad)


def test_f_pm_homomorphisms_random_families():
    rng = np.random.default_rng(1)
    for _ in range(100):
        r_minus, r_plus = f_pm_homomorphism_residuals(rb_data_2d(_random_family(rng)), tol=1e-9)
        assert r_minus <= 1e-12 * 20 and r_plus <= 1e-12 * 20


def test_f_pm_homomorphisms_exact_on_simple_entries():
    for B in (family_matrix(Family1(2.0, 1.0)), family_matrix(Family2(0.5, -1.0)),
              family_matrix(Family3(0.0, 1.0)), family_matrix(Family3(-1.0, -1.0))):
        assert f_pm_homomorphism_residuals(rb_data_2d(B)) == (0.0, 0.0)
    H = np.zeros((3, 3))
    H[2, 1] = 1.0
    assert f_pm_homomorphism_residuals(RelativeRBData.adjoint(heisenberg(), H)) == (0.0, 0.0)


# -- J -------------------------------------------------------------------------

def test_j_examples():
    d = fam1()
    assert max_abs(big_J(GraphWord(d)), identity("UT2")) == 0.0
    J = big_J(GraphWord(d, (([1, 0, 1, 0], 1.0),)))
    assert max_abs(J, ut2(math.e, 0.0)) <= 1e-15
    assert J.m[1, 1] == pytest.approx(1 / math.e, rel=1e-15)


def test_j_of_graph_element_is_second_component():
    B = catalog_operator("C11", lam=0.6, mu=1.4)
    h = ut2(1.7, -0.3)
    assert max_abs(big_J(SemidirectElement(B(h), h)), h) <= 1e-15


@pytest.mark.parametrize("case", CASES)
def test_j_graph_identity_on_words(case):
    # F- of a word is the first component of its product in G x| G, J is the
    # second, and the product sits on the graph of the integrated operator.
    rng = np.random.default_rng(2)
    for _ in range(10):
        Bmap = catalog_operator(case, **random_params(case, rng))
        data = Bmap.rb_data()
        n = data.g.dim
        w = GraphWord.from_coords(data, rng.uniform(-1, 1, (3, n)), rng.uniform(-1, 1, 3))
        d = w.element()
        Fm, Fp = big_F(w)
        J = big_J(w)
        assert max_abs(Fm, d.g) <= 1e-10
        assert max_abs(J, d.h) <= 1e-10
        assert max_abs(Fp, gmul(d.h, d.g)) <= 1e-10
        assert max_abs(Bmap(J), Fm) <= 1e-10


def test_j_tangent_is_projection():
    rng = np.random.default_rng(3)
    for _ in range(20):
        data = rb_data_2d(_random_family(rng))
        u = rng.uniform(-1, 1, 2)
        xi = np.concatenate([data.B.m @ u, u])
        assert np.abs(j_tangent(data, xi) - u).max() <= 1e-6


def test_graph_word_rejects_off_graph_letter():
    with pytest.raises(LieError):
        GraphWord(fam1(), (([0, 0, 1, 0], 1.0),))


def test_j_probe_examples():
    d = fam1()
    assert j_inverse_probe(identity("UT2"), d).residual <= 1e-15
    r = j_inverse_probe(GroupElement("UT2", np.diag([math.e, 1 / math.e])), d)
    assert r.residual <= 1e-8


def test_j_probe_random_integrable_targets():
    rng = np.random.default_rng(4)
    d = fam1(0.7, 1.3)
    for _ in range(10):
        t = group("UT2").random(rng)
        assert j_inverse_probe(t, d, seed=int(rng.integers(1000))).residual <= 1e-6


def test_j_probe_excluded_target_stays_away():
    t = excluded_target(0.0, 1.0, 2.0).h
    r = j_inverse_probe(t, fam3(), budget=5000)
    assert r.residual >= 0.05
    # the group-level probe agrees that this target is out of reach
    assert obstruction_probe(0.0, 1.0, excluded_target(0.0, 1.0, 2.0), budget=20_000).residual >= 0.05


# -- Upsilon -------------------------------------------------------------------

def test_upsilon_examples():
    B = catalog_operator("C11", lam=1.0, mu=0.0)
    e = identity("UT2")
    g = ut2(2.0, 0.3)
    assert max_abs(upsilon(g, semidirect_identity("UT2")), SemidirectElement(g, e)) == 0.0
    h = ut2(1.5, -0.2)
    f = SemidirectElement(B(h), h)
    assert max_abs(upsilon(e, f), f) == 0.0
    y = upsilon(ut2(2, 0), SemidirectElement(B(ut2(3, 0)), ut2(3, 0)))
    assert max_abs(y, SemidirectElement(ut2(6, 0), ut2(3, 0))) == 0.0


@pytest.mark.parametrize("case", CASES)
def test_upsilon_inversion(case):
    rng = np.random.default_rng(5)
    B = catalog_operator(case, **random_params(case, rng))
    grp = group(B.group_id)
    for _ in range(5):
        t = SemidirectElement(grp.random(rng), grp.random(rng))
        inv = upsilon_inverse(t, B)
        assert inv.residual <= 1e-8
        assert max_abs(upsilon(inv.g, inv.f), t) <= 1e-8


# -- Gamma ---------------------------------------------------------------------

C11 = catalog_operator("C11", lam=1.0, mu=0.0)
HEIS = catalog_operator("HEIS")


def test_gamma_make_examples():
    e = identity("UT2")
    x = gamma_make(e, e, C11)
    ee = semidirect_identity("UT2")
    assert gamma_distance(x, GammaElement(ee, e, e, ee)) == 0.0
    x = gamma_make(ut2(2, 0), ut2(3, 1), C11)
    assert x.residual() <= 1e-12
    # central h1 in the Heisenberg group
    a2 = heis(0.4, 1.1, -0.6)
    x = gamma_make(a2, heis(0.0, 2.0, 0.0), HEIS)
    assert max_abs(x.a1, x.a2) <= 1e-15
    assert x.residual() <= 1e-15


@pytest.mark.parametrize("case", CASES)
def test_gamma_closure(case):
    rng = np.random.default_rng(6)
    B = catalog_operator(case, **random_params(case, rng))
    grp = group(B.group_id)
    for _ in range(100):
        xi = gamma_make(grp.random(rng), grp.random(rng), B)
        assert xi.residual() <= 1e-10 and xi.graph_residual(B) <= 1e-10
        # horizontal: the left square's source edge h1 is the right one's h2
        left = gamma_make(grp.random(rng), xi.h2, B)
        assert gamma_mul_h(left, xi).residual() <= 1e-9
        # vertical: the lower square's a2 is the upper one's a1
        below = gamma_make(xi.a1, grp.random(rng), B)
        assert gamma_mul_v(xi, below).residual() <= 1e-9


def test_gamma_units():
    rng = np.random.default_rng(7)
    for B in (C11, HEIS):
        grp = group(B.group_id)
        xi = gamma_make(grp.random(rng), grp.random(rng), B)
        assert gamma_distance(gamma_mul_h(xi, gamma_unit_h(xi.h1)), xi) == 0.0
        assert gamma_distance(gamma_mul_h(gamma_unit_h(xi.h2), xi), xi) == 0.0
        assert gamma_distance(gamma_mul_v(xi, gamma_unit_v(xi.a1)), xi) == 0.0
        assert gamma_distance(gamma_mul_v(gamma_unit_v(xi.a2), xi), xi) == 0.0
        e = identity(B.group_id)
        u = gamma_make(e, e, B)
        assert gamma_distance(gamma_mul_h(u, u), u) == 0.0
        assert gamma_distance(gamma_mul_v(u, u), u) == 0.0


def test_composability_errors():
    rng = np.random.default_rng(8)
    grp = group("UT2")
    x = gamma_make(grp.random(rng), grp.random(rng), C11)
    y = gamma_make(grp.random(rng), grp.random(rng), C11)
    with pytest.raises(ComposabilityError, match="xi.h1 vs xi'.h2"):
        gamma_mul_h(x, y)
    with pytest.raises(ComposabilityError, match="xi.a1 vs xi'.a2"):
        gamma_mul_v(x, y)


@pytest.mark.parametrize("B", [C11, HEIS], ids=["C11", "HEIS"])
def test_interchange_law(B):
    rng = np.random.default_rng(9)
    grp = group(B.group_id)
    for _ in range(100):
        sq = composable_square(*(grp.random(rng) for _ in range(4)), B)
        assert interchange_residual(*sq) <= 1e-9
