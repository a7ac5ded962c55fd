"""Command-line interface: ``rblab <subcommand> [options]``.

Every subcommand prints one report and exits with 0 when all checks pass,
1 when a check fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import bialgebra as bi
from . import catalog as cat
from . import factorization as fz
from .groups import (
    GroupError,
    SemidirectElement,
    group,
    identity,
    max_abs,
    semidirect_identity,
)
from .io import ParseError, load_algebra, parse_operator, parse_rmatrix
from .lie import EXACT_TOL, LieError, jacobi_residual, two_dim_algebra
from .report import Report
from .rota_baxter import (
    CLASSIFY_TOL,
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
    rb_residual,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def default_seed() -> int:
    raw = os.environ.get("RBLAB_SEED")
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise ParseError(f"RBLAB_SEED must be an unsigned integer, got {raw!r}") from None
    if seed < 0:
        raise ParseError("RBLAB_SEED must be non-negative")
    return seed


def _tol(args, default):
    return default if args.tol is None else args.tol


def _samples(args, default):
    return default if args.samples is None else args.samples


# -- algebra-level checks ---------------------------------------------------

def _rb_data(args) -> RelativeRBData:
    alg = load_algebra(args.algebra)
    text = Path(args.operator).read_text() if args.operator else None
    if text is None:
        raise ParseError("--operator is required")
    return RelativeRBData.adjoint(alg, parse_operator(text, alg))


def run_check_rb(data: RelativeRBData, seed: int, tol: float = EXACT_TOL) -> Report:
    rep = Report(seed)
    rep.add("rb_identity", "rb-operator-identity", rb_residual(data), tol)
    return rep


def run_classify2d(B, seed: int, tol: float = CLASSIFY_TOL) -> Report:
    B = np.asarray(B, dtype=float)
    rep = Report(seed)
    cls = classify_rb_2d(B, tol)
    res = rb_residual(RelativeRBData.adjoint(two_dim_algebra(), B))
    rep.info["family"] = type(cls).__name__
    rep.info["params"] = [float(v) for v in cls]
    if isinstance(cls, NotRB):
        # consistent only if the identity really fails
        rep.add("not_rb_residual", "rb-2d-classification", res, tol, bound="lower")
    else:
        rep.add("family_reconstruction", "rb-2d-classification",
                float(np.abs(family_matrix(cls) - B).max()), tol)
        rep.add("rb_identity", "rb-operator-identity", res, tol)
    return rep


def run_graph(data: RelativeRBData, seed: int, tol: float = EXACT_TOL) -> Report:
    rep = Report(seed)
    gr = graph_subalgebra(data, tol)
    rep.add("graph_closure", "graph-subalgebra", gr.residual, tol)
    if gr.algebra is not None:
        rep.add("graph_jacobi", "graph-subalgebra", jacobi_residual(gr.algebra), tol)
        rep.info["graph_constants"] = gr.algebra.c
    return rep


def run_matched_pair(data: RelativeRBData, seed: int, tol: float = EXACT_TOL) -> Report:
    rep = Report(seed)
    mp = matched_pair_from_rb(data, tol)
    rep.add("representations", "matched-pair", mp.representation_residual(), tol)
    rep.add("compatibility", "matched-pair", matched_pair_residual(mp), tol)
    rep.add("double_bracket_jacobi", "matched-pair-double-bracket",
            jacobi_residual(double_bracket(mp, tol)), tol)
    return rep


def run_kappa(data: RelativeRBData, seed: int, tol: float = EXACT_TOL) -> Report:
    rep = Report(seed)
    rep.add("kappa_homomorphism", "kappa-isomorphism", kappa_residual(data, tol), tol)
    return rep


# -- group-level checks -----------------------------------------------------

def _case_kwargs(case, lam, mu):
    if case in ("C11", "C23"):
        return {"lam": lam, "mu": mu}
    if case == "HEIS":
        return {}
    return {"mu": mu}


def _pairs(gid, rng, n):
    grp = group(gid)
    return [(grp.random(rng), grp.random(rng)) for _ in range(n)]


def run_verify_catalog(case, seed, lam=None, mu=0.0, samples=200, tol=1e-9) -> Report:
    rng = np.random.default_rng(seed)
    Bmap = cat.catalog_operator(case, **_case_kwargs(case, lam, mu))
    gid = Bmap.group_id
    rep = Report(seed)
    rep.info["case"] = case
    rep.info["params"] = dict(Bmap.params)
    e = identity(gid)
    rep.add("fixes_identity", "group-rb-operator", max_abs(Bmap(e), e), EXACT_TOL)
    rep.add("group_rb_identity", "group-rb-operator", cat.group_rb_residual(Bmap, _pairs(gid, rng, samples)), tol)
    rep.add("algebra_rb_identity", "rb-operator-identity", rb_residual(Bmap.rb_data()), EXACT_TOL)
    rep.add("tangent_map", "rb-tangent-map", cat.tangent_matches_algebra(Bmap, Bmap.algebra_matrix).residual, 1e-6)
    ch = cat.d_family_chart(case, **_case_kwargs(case, lam, mu))
    rep.add("chart_base_point", "graph-subgroup-chart", max_abs(ch(*ch.base), semidirect_identity(gid)), EXACT_TOL)
    rep.add("chart_tangent_span", "graph-subgroup-chart", cat.chart_span_residual(ch, Bmap.algebra_matrix), 1e-6)
    return rep


def _semidirect_samples(gid, rng, n):
    grp = group(gid)
    return [SemidirectElement(grp.random(rng), grp.random(rng)) for _ in range(n)]


def run_membership(case, seed, lam=None, mu=0.0, samples=500, tol=EXACT_TOL) -> Report:
    rng = np.random.default_rng(seed)
    Bmap = cat.catalog_operator(case, **_case_kwargs(case, lam, mu))
    worst = 0.0
    for t in _semidirect_samples(Bmap.group_id, rng, samples):
        worst = max(worst, cat.factor_residual(t, cat.membership_factor(t, Bmap), Bmap))
    rep = Report(seed)
    rep.info["case"] = case
    rep.add("factorization_reconstruction", "double-group-membership", worst, tol)
    return rep


def excluded_z(n):
    return np.linspace(0.5, 2.0, n)


def run_obstruction(m, k, seed, budget=100_000, targets=5, tol=0.05, control=True) -> Report:
    rep = Report(seed)
    worst_low = np.inf
    for i, z in enumerate(excluded_z(targets)):
        res = cat.obstruction_probe(m, k, cat.excluded_target(m, k, float(z)), budget, seed + i)
        worst_low = min(worst_low, res.residual)
    rep.info["window"] = {"log_positive": cat.WINDOW_LOG, "unconstrained": cat.WINDOW_Q}
    rep.info["targets"] = int(targets)
    rep.add("excluded_locus_min_residual", "case3-obstruction", worst_low, tol, bound="lower")
    if control:
        rng = np.random.default_rng(seed)
        worst_in = 0.0
        for _ in range(max(1, targets // 2)):
            a, b, p = np.exp(rng.uniform(-1.5, 1.5, 3))
            q = float(rng.uniform(-3, 3))
            t = cat.probe_candidate(m, k, a, b, p, q)
            worst_in = max(worst_in, cat.obstruction_probe(m, k, t, budget, seed).residual)
        rep.add("in_image_control", "case3-obstruction", worst_in, 1e-6)
    rep.verdict = "NON-FACTORIZABLE" if rep.checks[0].passed else "INCONCLUSIVE"
    return rep


def run_jprobe(data: RelativeRBData, seed, samples=20, tol=1e-6, budget=20_000, scale=1.0) -> Report:
    rng = np.random.default_rng(seed)
    gid = fz.group_for_algebra(data.g)
    grp = group(gid)
    worst = 0.0
    for i in range(samples):
        worst = max(worst, fz.j_inverse_probe(grp.random(rng, scale), data, budget, seed + i).residual)
    rep = Report(seed)
    rep.add("j_inverse", "factorization-J", worst, tol)
    return rep


def run_jprobe_excluded(m, k, seed, samples=5, tol=0.05, budget=20_000) -> Report:
    data = RelativeRBData.adjoint(two_dim_algebra(), family_matrix(Family3(m, k)))
    best = np.inf
    for i, z in enumerate(excluded_z(samples)):
        best = min(best, fz.j_inverse_probe(cat.excluded_target(m, k, float(z)).h, data, budget, seed + i).residual)
    rep = Report(seed)
    rep.add("j_excluded_min_residual", "factorization-J", best, tol, bound="lower")
    return rep


def run_factorization_identities(case, seed, lam=None, mu=0.0, samples=20) -> Report:
    """f+- homomorphisms, J on graph words and the tangent of J."""
    rng = np.random.default_rng(seed)
    Bmap = cat.catalog_operator(case, **_case_kwargs(case, lam, mu))
    data = Bmap.rb_data()
    rep = Report(seed)
    rm, rp = fz.f_pm_homomorphism_residuals(data)
    rep.add("f_minus_homomorphism", "factorization-f-pm", rm, EXACT_TOL)
    rep.add("f_plus_homomorphism", "factorization-f-pm", rp, EXACT_TOL)
    n = data.g.dim
    worst_j, worst_graph = 0.0, 0.0
    for _ in range(samples):
        w = fz.GraphWord.from_coords(data, rng.uniform(-1, 1, (3, n)))
        d = w.element()
        worst_j = max(worst_j, max_abs(fz.big_J(w), d.h))
        worst_graph = max(worst_graph, max_abs(Bmap(d.h), d.g))
    rep.add("J_graph_identity", "factorization-J", worst_j, 1e-10)
    rep.add("word_on_graph", "graph-subgroup-chart", worst_graph, 1e-10)
    worst_t = 0.0
    for u in np.eye(n):
        xi = np.concatenate([data.B.m @ u, u])
        worst_t = max(worst_t, float(np.abs(fz.j_tangent(data, xi) - u).max()))
    rep.add("J_tangent_projection", "factorization-J", worst_t, 1e-6)
    return rep


def run_upsilon(case, seed, lam=None, mu=0.0, samples=20, tol=1e-8) -> Report:
    rng = np.random.default_rng(seed)
    Bmap = cat.catalog_operator(case, **_case_kwargs(case, lam, mu))
    gid = Bmap.group_id
    grp = group(gid)
    e = identity(gid)
    rep = Report(seed)
    ee = semidirect_identity(gid)
    unit = max_abs(fz.upsilon(e, ee), ee)
    for _ in range(samples):
        g, h = grp.random(rng), grp.random(rng)
        f = SemidirectElement(Bmap(h), h)
        unit = max(unit, max_abs(fz.upsilon(g, ee), SemidirectElement(g, e)), max_abs(fz.upsilon(e, f), f))
    rep.add("upsilon_unit_cases", "upsilon-map", unit, EXACT_TOL)
    worst = 0.0
    for t in _semidirect_samples(gid, rng, samples):
        worst = max(worst, fz.upsilon_inverse(t, Bmap).residual)
    rep.add("upsilon_inversion", "upsilon-map", worst, tol)
    return rep


def run_gamma(case, seed, lam=None, mu=0.0, samples=100) -> Report:
    rng = np.random.default_rng(seed)
    Bmap = cat.catalog_operator(case, **_case_kwargs(case, lam, mu))
    grp = group(Bmap.group_id)
    inv, close_h, close_v, inter, graph = 0.0, 0.0, 0.0, 0.0, 0.0
    for _ in range(samples):
        sq = fz.composable_square(*(grp.random(rng) for _ in range(4)), Bmap)
        xi, xip, eta, etap = sq
        inv = max(inv, *(s.residual() for s in sq))
        graph = max(graph, *(s.graph_residual(Bmap) for s in sq))
        close_h = max(close_h, fz.gamma_mul_h(xi, xip).residual(), fz.gamma_mul_h(eta, etap).residual())
        close_v = max(close_v, fz.gamma_mul_v(xi, eta).residual(), fz.gamma_mul_v(xip, etap).residual())
        inter = max(inter, fz.interchange_residual(*sq))
    rep = Report(seed)
    rep.info["case"] = case
    rep.add("gamma_invariant", "double-groupoid", inv, 1e-10)
    rep.add("gamma_graph_sides", "double-groupoid", graph, 1e-10)
    rep.add("horizontal_closure", "double-groupoid", close_h, 1e-9)
    rep.add("vertical_closure", "double-groupoid", close_v, 1e-9)
    rep.add("interchange_law", "double-groupoid", inter, 1e-9)
    return rep


# -- bialgebra --------------------------------------------------------------

def run_bialgebra(rm: bi.RMatrix, seed, tol=EXACT_TOL) -> Report:
    rep = Report(seed)
    br = bi.bialgebra_report(rm, tol)
    rep.add("cybe", "cybe", br.cybe_residual, tol)
    rep.add("ad_invariance", "ad-invariance", br.invariance_residual, tol)
    I = br.I_matrix
    rep.add("I_equals_2s", "factorizable-I", float(np.abs(I - 2 * rm.s).max()), 0.0)
    n = len(I)
    scale = float(np.abs(I).max(initial=0.0))
    ndet = abs(np.linalg.det(I)) / scale ** n if scale > 0 else 0.0
    rep.add("I_normalized_det", "factorizable-I", ndet, bi.DET_TOL, bound="lower")
    rep.info["I"] = I
    if br.dual_constants is not None:
        rep.info["dual_constants"] = br.dual_constants
        rep.add("dual_jacobi", "dual-bracket", br.dual_jacobi, 1e-10)
        rp, rmn = bi.r_pm_homomorphism_residuals(rm, tol)
        rep.add("r_plus_homomorphism", "dual-bracket", rp, 1e-10)
        rep.add("r_minus_homomorphism", "dual-bracket", rmn, 1e-10)
    if br.factorizable:
        B = bi.derived_rb(rm)
        rep.info["derived_rb"] = B.m
        rep.add("derived_rb_identity", "derived-rb", rb_residual(RelativeRBData.adjoint(rm.alg, B)), 1e-10)
    rep.verdict = "FACTORIZABLE" if br.factorizable else "NOT-FACTORIZABLE"
    return rep


def run_poisson(rm: bi.RMatrix, seed, samples=100, tol=1e-8) -> Report:
    rng = np.random.default_rng(seed)
    gid = fz.group_for_algebra(rm.alg)
    e = identity(gid)
    rep = Report(seed)
    rep.add("pi_at_identity", "poisson-lie-multiplicativity",
            float(np.abs(bi.poisson_bivector(rm.a, e)).max()), EXACT_TOL)
    rep.add("multiplicativity", "poisson-lie-multiplicativity",
            bi.poisson_multiplicativity(rm, _pairs(gid, rng, samples)), tol)
    return rep


# -- suite ------------------------------------------------------------------

SUITE_CASES = [("C11", 2.0, 5.0), ("C12", None, 1.5), ("C13", None, -2.0), ("C21", None, 0.5),
               ("C22", None, 1.0), ("C23", 1.5, 2.0), ("HEIS", None, 0.0)]


def run_suite(seed: int, samples: int | None = None) -> Report:
    """Every module's checks on built-in inputs; deterministic in ``seed``."""
    rep = Report(seed)
    a2 = two_dim_algebra()
    for name, B in [("fam1", [[3.0, 0.0], [5.0, 0.0]]), ("fam2", [[0.0, 0.0], [1.0, -1.0]]),
                    ("fam3", family_matrix(Family3(0.0, 1.0)))]:
        data = RelativeRBData.adjoint(a2, B)
        rep.extend(run_classify2d(B, seed), f"{name}.")
        rep.extend(run_graph(data, seed), f"{name}.")
        rep.extend(run_matched_pair(data, seed), f"{name}.")
        rep.extend(run_kappa(data, seed), f"{name}.")
    s = samples or 50
    for i, (case, lam, mu) in enumerate(SUITE_CASES):
        sd = seed + i
        rep.extend(run_verify_catalog(case, sd, lam, mu, samples=s), f"{case}.")
        rep.extend(run_membership(case, sd, lam, mu, samples=s), f"{case}.")
        rep.extend(run_factorization_identities(case, sd, lam, mu, samples=5), f"{case}.")
        rep.extend(run_upsilon(case, sd, lam, mu, samples=3), f"{case}.")
    for case in ("C11", "HEIS"):
        lam = 1.0 if case == "C11" else None
        rep.extend(run_gamma(case, seed, lam, 0.0, samples=min(s, 20)), f"{case}.")
    rep.extend(run_obstruction(0.0, 1.0, seed, targets=3), "case3.")
    rep.extend(run_obstruction(-1.0, -1.0, seed, targets=3), "case3_transported.")
    rep.extend(run_jprobe_excluded(0.0, 1.0, seed, samples=2), "case3.")
    rm = bi.sl2_test_rmatrix()
    rep.extend(run_bialgebra(rm, seed), "sl2.")
    rep.extend(run_poisson(rm, seed, samples=s), "sl2.")
    B = bi.derived_rb(rm)
    rep.extend(run_jprobe(RelativeRBData.adjoint(rm.alg, B), seed, samples=5, scale=0.5), "sl2.")
    return rep


# -- argument parsing -------------------------------------------------------

def _load_rm(args) -> bi.RMatrix:
    alg = load_algebra(args.algebra)
    if args.rmatrix is None:
        if alg.same_constants(bi.sl2_test_rmatrix().alg):
            return bi.RMatrix(alg, bi.sl2_test_rmatrix().r)
        raise ParseError("--rmatrix is required for this algebra")
    return parse_rmatrix(Path(args.rmatrix).read_text(), alg)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $RBLAB_SEED or 0)")
    common.add_argument("--tol", type=float, default=None, help="override the headline tolerance")
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--format", choices=("json", "text"), default="json")

    p = argparse.ArgumentParser(prog="rblab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def algebra_cmd(name, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--algebra", default="a2", help="algebra file or built-in name (a2, heis, sl2)")
        sp.add_argument("--operator", required=True, help="operator file")
        return sp

    algebra_cmd("check-rb", "Rota-Baxter identity of an operator")
    sp = sub.add_parser("classify2d", parents=[common], help="classify a 2x2 operator on [e1,e2]=2e2")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--operator")
    g.add_argument("--matrix", nargs=4, type=float, metavar=("B11", "B12", "B21", "B22"))
    algebra_cmd("graph", "closure of the graph of B")
    algebra_cmd("matched-pair", "matched pair built from B")
    algebra_cmd("kappa", "kappa isomorphism onto the semidirect product")

    def case_cmd(name, help_, default_case="C11"):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--case", default=default_case, choices=cat.CASES)
        sp.add_argument("--lambda", dest="lam", type=float, default=None)
        sp.add_argument("--mu", type=float, default=0.0)
        return sp

    case_cmd("verify-catalog", "group Rota-Baxter operator of a catalog case")
    case_cmd("membership", "factor targets through the graph subgroup")
    sp = sub.add_parser("obstruction", parents=[common], help="probe the case-3 factorization")
    sp.add_argument("--m", type=float, default=0.0)
    sp.add_argument("--k", type=float, default=1.0)
    sp.add_argument("--budget", type=int, default=100_000)
    sp = case_cmd("jprobe", "invert J numerically on random targets")
    sp.add_argument("--algebra", default=None)
    sp.add_argument("--rmatrix", default=None, help="use the derived operator of an r-matrix")
    sp.add_argument("--budget", type=int, default=20_000)
    case_cmd("upsilon", "Upsilon map and its numeric inverse")
    case_cmd("gamma", "double groupoid closure and interchange law")
    for name, help_ in (("bialgebra", "quasi-triangular / factorizable checks"),
                        ("poisson", "Poisson-Lie multiplicativity")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--algebra", default="sl2")
        sp.add_argument("--rmatrix", default=None)
    sub.add_parser("suite", parents=[common], help="run every check on built-in inputs")
    return p


def _case_lam(args):
    if args.case in ("C11", "C23"):
        if args.lam is None:
            raise ParseError(f"{args.case} needs --lambda")
        return args.lam
    if args.lam is not None:
        raise ParseError(f"{args.case} fixes lambda; drop --lambda")
    return None


def dispatch(args) -> Report:
    seed = default_seed() if args.seed is None else args.seed
    if seed < 0:
        raise ParseError("--seed must be non-negative")
    cmd = args.cmd
    if cmd == "check-rb":
        return run_check_rb(_rb_data(args), seed, _tol(args, EXACT_TOL))
    if cmd == "classify2d":
        if args.matrix is not None:
            B = np.array(args.matrix).reshape(2, 2)
        else:
            B = parse_operator(Path(args.operator).read_text(), two_dim_algebra()).m
        return run_classify2d(B, seed, _tol(args, 1e-9))
    if cmd == "graph":
        return run_graph(_rb_data(args), seed, _tol(args, EXACT_TOL))
    if cmd == "matched-pair":
        return run_matched_pair(_rb_data(args), seed, _tol(args, EXACT_TOL))
    if cmd == "kappa":
        return run_kappa(_rb_data(args), seed, _tol(args, EXACT_TOL))
    if cmd == "verify-catalog":
        return run_verify_catalog(args.case, seed, _case_lam(args), args.mu,
                                  _samples(args, 200), _tol(args, 1e-9))
    if cmd == "membership":
        return run_membership(args.case, seed, _case_lam(args), args.mu,
                              _samples(args, 500), _tol(args, EXACT_TOL))
    if cmd == "obstruction":
        if args.k == 0:
            raise ParseError("--k must be nonzero")
        return run_obstruction(args.m, args.k, seed, args.budget, _samples(args, 5), _tol(args, 0.05))
    if cmd == "jprobe":
        if args.rmatrix is not None or args.algebra is not None:
            args.algebra = args.algebra or "sl2"
            rm = _load_rm(args)
            data = RelativeRBData.adjoint(rm.alg, bi.derived_rb(rm))
            return run_jprobe(data, seed, _samples(args, 20), _tol(args, 1e-6), args.budget, scale=0.5)
        Bmap = cat.catalog_operator(args.case, **_case_kwargs(args.case, _case_lam(args), args.mu))
        return run_jprobe(Bmap.rb_data(), seed, _samples(args, 20), _tol(args, 1e-6), args.budget)
    if cmd == "upsilon":
        return run_upsilon(args.case, seed, _case_lam(args), args.mu, _samples(args, 20), _tol(args, 1e-8))
    if cmd == "gamma":
        return run_gamma(args.case, seed, _case_lam(args), args.mu, _samples(args, 100))
    if cmd == "bialgebra":
        return run_bialgebra(_load_rm(args), seed, _tol(args, EXACT_TOL))
    if cmd == "poisson":
        return run_poisson(_load_rm(args), seed, _samples(args, 100), _tol(args, 1e-8))
    if cmd == "suite":
        return run_suite(seed, args.samples)
    raise ParseError(f"unknown command {cmd}")  # pragma: no cover


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep = dispatch(args)
    except (ParseError, LieError, GroupError, OSError) as exc:
        print(f"rblab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(rep.render(args.format))
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
