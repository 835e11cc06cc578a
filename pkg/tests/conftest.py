import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import strategies as st

from firstint.algebra import TruncSeries

SMALL_RATIONALS = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def series(draw, nvars, order, max_terms=6, min_degree=0):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        d = draw(st.integers(min_degree, order))
        cuts = sorted(draw(st.lists(st.integers(0, d), min_size=nvars - 1, max_size=nvars - 1)))
        exps = tuple(b - a for a, b in zip([0] + cuts, cuts + [d]))
        terms[exps] = draw(SMALL_RATIONALS)
    return TruncSeries(nvars, order, terms)


def random_series(rng: random.Random, nvars, order, nterms, min_degree=0, max_degree=None, need_y=False):
    max_degree = order if max_degree is None else max_degree
    terms = {}
    while len(terms) < nterms:
        d = rng.randint(min_degree, max_degree)
        cuts = sorted(rng.randint(0, d) for _ in range(nvars - 1))
        exps = tuple(b - a for a, b in zip([0] + cuts, cuts + [d]))
        if need_y and not any(exps[1:]):
            continue
        terms[exps] = Fraction(rng.randint(-6, 6), rng.randint(1, 5)) or Fraction(1)
    return TruncSeries(nvars, order, terms)


def xs(n):
    return sp.symbols(f"x1:{n + 1}")


def to_sympy(s: TruncSeries, syms=None):
    syms = syms or xs(s.nvars)
    return sp.Add(*[sp.Rational(c.numerator, c.denominator) * sp.Mul(*[v**e for v, e in zip(syms, k)]) for k, c in s.items()])


def from_sympy(expr, nvars, order, syms=None):
    syms = syms or xs(nvars)
    poly = sp.Poly(sp.expand(expr), *syms)
    terms = {}
    for k, c in poly.terms():
        if sum(k) <= order:
            terms[tuple(k)] = Fraction(int(c.p), int(c.q))
    return TruncSeries(nvars, order, terms)


def truncate_expr(expr, syms, N):
    if expr == 0:
        return sp.Integer(0)
    poly = sp.Poly(sp.expand(expr), *syms)
    return sp.Add(*[c * sp.Mul(*[v**e for v, e in zip(syms, k)]) for k, c in poly.terms() if sum(k) <= N])


@pytest.fixture
def rng():
    return random.Random(20240601)
