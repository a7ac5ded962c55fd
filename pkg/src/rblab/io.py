"""Line-oriented text formats for algebras, operators and r-matrices.

All three share the same lexical rules: ``#`` starts a comment, tokens are
separated by whitespace, indices are 1-based.

algebra file::

    algebra a2
    dim 2
    bracket 1 2 2 2.0      # [e1, e2] has e2-coefficient 2

operator file (row-major; column j is the image of basis vector j)::

    operator fam1
    shape 2 2              # optional
    3 0
    5 0

r-matrix file::

    rmatrix r_sl2
    dim 3
    entry 2 3 1.0
    entry 1 1 0.25
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .bialgebra import RMatrix
from .lie import LieAlgebra, LinearOperator, heisenberg, sl2, two_dim_algebra, abelian


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


BUILTIN_ALGEBRAS = {"a2": two_dim_algebra, "heis": heisenberg, "sl2": sl2}


def _lines(text):
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _num(tok, no):
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", no) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {tok!r}", no)
    return v


def _index(tok, n, no):
    try:
        i = int(tok)
    except ValueError:
        raise ParseError(f"not an index: {tok!r}", no) from None
    if n is not None and not 1 <= i <= n:
        raise ParseError(f"index {i} out of range 1..{n}", no)
    return i - 1


def _dim(toks, no, current):
    if current is not None:
        raise ParseError("dim given twice", no)
    if len(toks) != 2:
        raise ParseError("expected 'dim n'", no)
    try:
        n = int(toks[1])
    except ValueError:
        raise ParseError(f"dimension must be an integer, got {toks[1]!r}", no) from None
    if n < 1:
        raise ParseError("dimension must be positive", no)
    return n


def parse_algebra(text: str) -> LieAlgebra:
    name, n, entries = "unnamed", None, {}
    for no, toks in _lines(text):
        key = toks[0]
        if key == "algebra":
            if len(toks) != 2:
                raise ParseError("expected 'algebra name'", no)
            name = toks[1]
        elif key == "dim":
            n = _dim(toks, no, n)
        elif key == "bracket":
            if n is None:
                raise ParseError("'bracket' before 'dim'", no)
            if len(toks) != 5:
                raise ParseError("expected 'bracket i j k value'", no)
            i, j, k = (_index(t, n, no) for t in toks[1:4])
            val = _num(toks[4], no)
            if i == j and val != 0.0:
                raise ParseError(f"[e_{i + 1}, e_{i + 1}] must vanish", no)
            canon = (min(i, j), max(i, j), k)
            if canon in entries:
                raise ParseError(f"duplicate bracket entry ({i + 1},{j + 1},{k + 1})", no)
            if i != j:
                entries[canon] = val if i < j else -val
        else:
            raise ParseError(f"unknown keyword {key!r}", no)
    if n is None:
        raise ParseError("missing 'dim'")
    return LieAlgebra(name, n, entries)


def parse_operator(text: str, domain: LieAlgebra, codomain: LieAlgebra | None = None) -> LinearOperator:
    codomain = codomain or domain
    shape, rows = None, []
    for no, toks in _lines(text):
        if toks[0] == "operator":
            continue
        if toks[0] == "shape":
            if len(toks) != 3:
                raise ParseError("expected 'shape rows cols'", no)
            shape = (_index(toks[1], None, no) + 1, _index(toks[2], None, no) + 1)
            continue
        rows.append((no, [_num(t, no) for t in toks]))
    if not rows:
        raise ParseError("operator has no rows")
    widths = {len(r) for _, r in rows}
    if len(widths) != 1:
        no = next(no for no, r in rows if len(r) != len(rows[0][1]))
        raise ParseError("rows have different lengths", no)
    m = np.array([r for _, r in rows])
    if shape is not None and m.shape != shape:
        raise ParseError(f"declared shape {shape} but read {m.shape}")
    expect = (codomain.dim, domain.dim)
    if m.shape != expect:
        raise ParseError(f"operator is {m.shape[0]}x{m.shape[1]}, algebras need {expect[0]}x{expect[1]}")
    return LinearOperator(domain, codomain, m)


def parse_rmatrix(text: str, alg: LieAlgebra) -> RMatrix:
    n, r, seen = None, None, set()
    for no, toks in _lines(text):
        key = toks[0]
        if key == "rmatrix":
            continue
        if key == "dim":
            n = _dim(toks, no, n)
            if n != alg.dim:
                raise ParseError(f"r-matrix dim {n} does not match algebra dim {alg.dim}", no)
            r = np.zeros((n, n))
        elif key == "entry":
            if r is None:
                raise ParseError("'entry' before 'dim'", no)
            if len(toks) != 4:
                raise ParseError("expected 'entry i j value'", no)
            i, j = _index(toks[1], n, no), _index(toks[2], n, no)
            if (i, j) in seen:
                raise ParseError(f"duplicate entry ({i + 1},{j + 1})", no)
            seen.add((i, j))
            r[i, j] = _num(toks[3], no)
        else:
            raise ParseError(f"unknown keyword {key!r}", no)
    if r is None:
        raise ParseError("missing 'dim'")
    return RMatrix(alg, r)


def load_algebra(name: str) -> LieAlgebra:
    """A path to an algebra file, or one of the built-in names."""
    p = Path(name)
    if p.is_file():
        return parse_algebra(p.read_text())
    if name in BUILTIN_ALGEBRAS:
        return BUILTIN_ALGEBRAS[name]()
    if name.startswith("abelian") and name[7:].isdigit():
        return abelian(int(name[7:]))
    raise ParseError(f"no such algebra file or built-in: {name!r}")


def format_algebra(alg: LieAlgebra) -> str:
    lines = [f"algebra {alg.name}", f"dim {alg.dim}"]
    n = alg.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if alg.c[i, j, k] != 0.0:
                    lines.append(f"bracket {i + 1} {j + 1} {k + 1} {alg.c[i, j, k]:.17g}")
    return "\n".join(lines) + "\n"
