import numpy as np
import pytest

from rblab.lie import LieAction, LieError, adjoint_action, bracket, jacobi_residual, two_dim_algebra, zero_action, heisenberg
from rblab.rota_baxter import (
    Family1,
    Family2,
    Family3,
    MatchedPairData,
    NotRB,
    RelativeRBData,
    classify_rb_2d,
    double_bracket,
    family_matrix,
    graph_subalgebra,
    kappa_matrix,
    kappa_residual,
    matched_pair_from_rb,
    matched_pair_residual,
    rb_data_2d,
)
from rblab.rota_baxter import rb_residual


def rb_oracle(alg, B):
    # direct evaluation of [Bu,Bv] - B([Bu,v] + [u,Bv] + [u,v]) with the public bracket
    B = np.asarray(B, dtype=float)
    E = np.eye(alg.dim)
    worst = 0.0
    for i in range(alg.dim):
        for j in range(alg.dim):
            u, v = E[i], E[j]
            lhs = bracket(alg, B @ u, B @ v)
            rhs = B @ (bracket(alg, B @ u, v) - bracket(alg, B @ v, u) + bracket(alg, u, v))
            worst = max(worst, np.abs(lhs - rhs).max())
    return worst


def mp_oracle(mp):
    # the two compatibility identities evaluated vector by vector
    E, F = np.eye(mp.g.dim), np.eye(mp.h.dim)
    rho, mu = mp.rho.of, mp.mu.of
    bg = lambda a, b: bracket(mp.g, a, b)
    bh = lambda a, b: bracket(mp.h, a, b)
    worst = 0.0
    for x in E:
        for u in F:
            for v in F:
                r = (rho(x) @ bh(u, v) - bh(rho(x) @ u, v) - bh(u, rho(x) @ v)
                     - rho(mu(v) @ x) @ u + rho(mu(u) @ x) @ v)
                worst = max(worst, np.abs(r).max())
    for u in F:
        for x in E:
            for y in E:
                r = (mu(u) @ bg(x, y) - bg(mu(u) @ x, y) - bg(x, mu(u) @ y)
                     - mu(rho(y) @ u) @ x + mu(rho(x) @ u) @ y)
                worst = max(worst, np.abs(r).max())
    return worst


def scalar_equations(B):
    (b11, b12), (b21, b22) = B
    return abs(b12 * (b11 + b22 + 1)), abs(b11 * b22 - b12 * b21 - (b11 + b22 + 1) * b22)


@pytest.mark.parametrize("B,expected", [
    ([[3, 0], [5, 0]], 0.0),
    ([[0, 0], [0, 0]], 0.0),
    ([[-1, 0], [0, -1]], 0.0),
    ([[1, 0], [0, 1]], 4.0),
])
def test_rb_residual_examples(B, expected):
    assert rb_residual(rb_data_2d(B)) == expected
    assert rb_oracle(two_dim_algebra(), B) == expected


def test_rb_residual_matches_oracle_random():
    rng = np.random.default_rng(1)
    alg = heisenberg()
    for _ in range(50):
        B = rng.normal(size=(3, 3))
        assert rb_residual(RelativeRBData.adjoint(alg, B)) == pytest.approx(rb_oracle(alg, B), abs=1e-12)


def test_rb_shape_mismatch():
    with pytest.raises(LieError):
        rb_data_2d(np.zeros((3, 2)))


@pytest.mark.parametrize("B,expected", [
    ([[3, 0], [5, 0]], Family1(3.0, 5.0)),
    ([[-1, 1], [0, 0]], Family3(0.0, 1.0)),
    ([[0, 0], [0, 1]], NotRB()),
    ([[0, -1], [0, -1]], Family3(-1.0, -1.0)),
    ([[2, 0], [1, -1]], Family2(2.0, 1.0)),
])
def test_classify_examples(B, expected):
    got = classify_rb_2d(B)
    assert type(got) is type(expected) and got == expected


def test_family_matrix_round_trip():
    for cls in (Family1(1.5, -2.0), Family2(-0.5, 3.0), Family3(2.0, -0.7)):
        assert classify_rb_2d(family_matrix(cls)) == pytest.approx(cls)
    with pytest.raises(LieError):
        family_matrix(Family3(1.0, 0.0))
    with pytest.raises(LieError):
        family_matrix(NotRB())


def test_classification_agrees_with_scalar_equations():
    rng = np.random.default_rng(2)
    for _ in range(2000):
        B = rng.uniform(-5, 5, (2, 2))
        if rng.random() < 0.5:               # mix in exact family members
            kind = rng.integers(3)
            a, b = rng.uniform(-5, 5, 2)
            B = family_matrix([Family1(a, b), Family2(a, b), Family3(a, b if abs(b) > 0.1 else 1.0)][kind])
        e1, e2 = scalar_equations(B)
        is_rb = max(e1, e2) <= 1e-9 * max(1.0, np.abs(B).max()) ** 2
        assert (not isinstance(classify_rb_2d(B), NotRB)) == is_rb


def test_graph_examples():
    gr = graph_subalgebra(rb_data_2d(family_matrix(Family3(0, 1))))
    assert gr.residual == 0.0 and np.abs(gr.algebra.c).max() == 0.0
    gr = graph_subalgebra(rb_data_2d([[1, 0], [0, 0]]))
    # [(e1,e1),(0,e2)] = (0, 4 e2) = 4 (B e2, e2)
    assert gr.algebra.c[0, 1, 1] == 4.0
    gr = graph_subalgebra(rb_data_2d(np.zeros((2, 2))))
    assert gr.algebra.same_constants(two_dim_algebra())


def test_graph_criterion_equivalence():
    rng = np.random.default_rng(3)
    for _ in range(100):
        B = rng.uniform(-3, 3, (2, 2))
        d = rb_data_2d(B)
        gr = graph_subalgebra(d)
        assert gr.algebra is None and gr.residual > 1e-12
        assert rb_residual(d) > 1e-12
    for cls in (Family1(2, 1), Family2(-3, 0.5), Family3(1.5, 2)):
        d = rb_data_2d(family_matrix(cls))
        assert graph_subalgebra(d).residual <= 1e-12 and rb_residual(d) <= 1e-12


def test_matched_pair_from_families():
    for cls in (Family1(3, 5), Family2(0, 1), Family3(0, 1), Family1(-1, 2)):
        mp = matched_pair_from_rb(rb_data_2d(family_matrix(cls)))
        assert mp.representation_residual() <= 1e-12
        assert matched_pair_residual(mp) <= 1e-12
        assert jacobi_residual(double_bracket(mp)) <= 1e-12


def test_matched_pair_refuses_non_rb():
    with pytest.raises(LieError):
        matched_pair_from_rb(rb_data_2d(np.eye(2)))


def test_matched_pair_trivial_and_bad():
    g = two_dim_algebra()
    h = heisenberg()
    mp = MatchedPairData(g, h, zero_action(g, h), zero_action(h, g))
    assert matched_pair_residual(mp) == 0.0
    db = double_bracket(mp)
    assert np.array_equal(db.c[:2, :2, :2], g.c) and np.abs(db.c[:2, 2:]).max() == 0
    # rho = ad, mu = 0 is the semidirect product: both identities hold
    semi = MatchedPairData(g, g, adjoint_action(g), zero_action(g, g))
    assert matched_pair_residual(semi) == 0.0 == mp_oracle(semi)
    both = MatchedPairData(g, g, adjoint_action(g), adjoint_action(g))
    assert matched_pair_residual(both) == 4.0 == mp_oracle(both)


def test_perturbed_theta_breaks_matched_pair():
    mp = matched_pair_from_rb(rb_data_2d([[3, 0], [5, 0]]))
    mu = np.array(mp.mu.phi)
    mu[0, 0, 0] += 0.1
    bad = MatchedPairData(mp.g, mp.h, mp.rho, LieAction(mp.h, mp.g, mu))
    assert bad.representation_residual() == 0.0
    assert matched_pair_residual(bad) >= 0.05
    assert matched_pair_residual(bad) == pytest.approx(mp_oracle(bad), abs=1e-12)


def test_kappa():
    d = rb_data_2d([[3, 0], [5, 0]])
    assert kappa_residual(d) == 0.0
    K = kappa_matrix(d)
    assert np.array_equal(K @ np.zeros(4), np.zeros(4))
    # kappa(e1, (B e2, e2)) in (g, graph-coordinate) basis is (e1, e2)
    assert np.array_equal(K @ np.array([1, 0, 0, 1.0]), [1, 0, 0, 1])


def test_kappa_all_families():
    rng = np.random.default_rng(4)
    for _ in range(30):
        a, b = rng.uniform(-4, 4, 2)
        for cls in (Family1(a, b), Family2(a, b), Family3(a, b if abs(b) > 0.1 else 0.5)):
            assert kappa_residual(rb_data_2d(family_matrix(cls))) <= 1e-10
