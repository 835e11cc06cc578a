from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from firstint.algebra import (
    INF,
    Ball,
    HomogPoly,
    TruncSeries,
    compose,
    diff,
    format_scalar,
    grade,
    log2_abs,
    monomials,
    mul,
    reassemble,
    sign_of,
    with_precision_retry,
    working_precision,
)
from firstint.errors import (
    DegreeOutOfRange,
    DimensionMismatch,
    PrecisionExhausted,
    UndecidedSign,
    ValuationTooLow,
)

from conftest import SMALL_RATIONALS, from_sympy, series, to_sympy, truncate_expr, xs

F = Fraction


def S(n, N, terms):
    return TruncSeries(n, N, terms)


# -- series ----------------------------------------------------------------


def test_mul_telescoping():
    a = S(1, 2, {(0,): 1, (1,): 1})
    b = S(1, 2, {(0,): 1, (1,): -1})
    assert mul(a, b, 2) == S(1, 2, {(0,): 1, (2,): -1})


def test_mul_truncates_past_order():
    a = S(2, 2, {(1, 1): 1})
    b = S(2, 2, {(0, 1): 1})
    out = mul(a, b, 2)
    assert not out and out.valuation == INF


def test_mul_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mul(S(1, 2, {}), S(2, 2, {}))


def test_mul_degree_beyond_operands():
    with pytest.raises(DegreeOutOfRange):
        mul(S(1, 2, {}), S(1, 3, {}), 3)


def _naive_conv(a, b, N):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            if sum(k) <= N:
                out[k] = out.get(k, 0) + ca * cb
    return S(a.nvars, N, out)


def test_mul_random_cubics_match_naive_convolution(rng):
    from conftest import random_series

    for _ in range(10):
        a = random_series(rng, 3, 6, 5, max_degree=3)
        b = random_series(rng, 3, 6, 5, max_degree=3)
        assert mul(a, b, 6) == _naive_conv(a, b, 6)


def test_compose_coordinate_and_product():
    n, N = 2, 3
    subs = [S(n, N, {(1, 0): 1}), S(n, N, {(0, 1): 1, (2, 0): 1})]
    assert compose(S(n, N, {(0, 1): 1}), subs, N) == S(n, N, {(0, 1): 1, (2, 0): 1})
    assert compose(S(n, N, {(1, 1): 1}), subs, N) == S(n, N, {(1, 1): 1, (3, 0): 1})


def test_compose_rejects_constant_terms():
    with pytest.raises(ValuationTooLow):
        compose(S(1, 2, {(1,): 1}), [S(1, 2, {(0,): 1, (1,): 1})], 2)


def test_compose_matches_sympy_substitution(rng):
    from conftest import random_series

    n, N = 3, 6
    sy = xs(n)
    for _ in range(5):
        s = random_series(rng, n, N, 5, max_degree=3)
        subs = [random_series(rng, n, N, 3, min_degree=1, max_degree=3) for _ in range(n)]
        expr = to_sympy(s).subs({v: to_sympy(t) for v, t in zip(sy, subs)}, simultaneous=True)
        assert compose(s, subs, N) == from_sympy(truncate_expr(expr, sy, N), n, N)


def test_diff_examples():
    assert diff(S(2, 4, {(2, 1): 1}), 0) == S(2, 3, {(1, 1): 2})
    assert not diff(S(2, 4, {(3, 0): 1}), 1)
    assert diff(S(2, 4, {}), 1).order == 3


def test_grade_examples():
    s = S(2, 3, {(0, 0): 1, (1, 0): 1, (1, 1): 1})
    assert grade(s, 2) == HomogPoly(2, 2, {(1, 1): 1})
    assert not grade(S(2, 3, {(1, 0): 1}), 0)
    with pytest.raises(DegreeOutOfRange):
        grade(s, 4)


def test_monomials_order():
    assert monomials(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert len(monomials(3, 4)) == 15


def test_homogpoly_rejects_wrong_degree():
    with pytest.raises(ValueError):
        HomogPoly(2, 2, {(1, 0): 1})


def test_zero_coefficients_are_dropped():
    s = S(2, 3, {(1, 1): F(1), (0, 2): F(0)})
    assert s.nterms() == 1
    assert (s - s).valuation == INF


N3 = 5


@settings(max_examples=40, deadline=None)
@given(series(3, N3), series(3, N3), series(3, N3))
def test_ring_axioms(a, b, c):
    assert mul(a, b) == mul(b, a)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, b + c) == mul(a, b) + mul(a, c)


@settings(max_examples=40, deadline=None)
@given(series(2, 6, min_degree=1), series(2, 6, min_degree=1))
def test_valuation_is_additive(a, b):
    d = a.valuation + b.valuation
    if d <= 6:
        assert mul(a, b).valuation == d


@settings(max_examples=40, deadline=None)
@given(series(3, N3), series(3, N3), st.integers(0, 2))
def test_product_rule(a, b, i):
    lhs = diff(mul(a, b), i)
    rhs = mul(diff(a, i), b.truncate(N3 - 1)) + mul(a.truncate(N3 - 1), diff(b, i))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(series(3, N3))
def test_grade_reassembles(s):
    assert reassemble([grade(s, d) for d in range(N3 + 1)], 3, N3) == s


@settings(max_examples=25, deadline=None)
@given(
    series(2, 4, max_terms=4),
    st.lists(series(2, 4, max_terms=3, min_degree=1), min_size=2, max_size=2),
    st.lists(series(2, 4, max_terms=3, min_degree=1), min_size=2, max_size=2),
)
def test_compose_associative(s, u, v):
    lhs = compose(compose(s, u, 4), v, 4)
    rhs = compose(s, [compose(t, v, 4) for t in u], 4)
    assert lhs == rhs


# -- balls -----------------------------------------------------------------


def test_ball_exact_dyadics():
    b = Ball.from_value(F(65, 256))
    assert b.is_exact() and b.mid == F(65, 256)
    assert format_scalar(b) == "65*2^-8"
    assert format_scalar(F(-1, 9)) == "-1/9"


def test_ball_third_encloses():
    b = Ball.from_value(F(1, 3))
    assert not b.is_exact()
    assert b.contains(F(1, 3))
    assert b.rad < F(1, 2**250)


def test_undecided_sign_and_retry():
    tiny = Ball(1, -300)
    x = Ball.from_value(F(1, 3)) + tiny - Ball.from_value(F(1, 3))
    with pytest.raises(UndecidedSign):
        sign_of(x)

    def probe():
        return sign_of(Ball.from_value(F(1, 3)) + tiny - Ball.from_value(F(1, 3)))

    assert with_precision_retry(probe) == 1


def test_retry_gives_up_at_cap():
    zero = Ball(0, 0, 1, -10)
    with pytest.raises(PrecisionExhausted):
        with_precision_retry(sign_of, zero, cap=512)


def test_huge_radius_exponent_is_representable():
    b = Ball(1, -2, 1, -(4 << 768))
    assert b.sign() == 1
    assert b.rad_log2_upper() < -(1 << 768)
    with pytest.raises(OverflowError):
        b.rad


def test_reciprocal_zero():
    with pytest.raises(ZeroDivisionError):
        Ball(0).reciprocal()
    with pytest.raises(UndecidedSign):
        Ball(0, 0, 1, 0).reciprocal()


def test_log2_abs_encloses():
    lg = log2_abs(Ball.from_value(F(-1, 8)))
    assert lg.a <= -3 <= lg.b


OPS = [
    ("add", lambda a, b: a + b),
    ("sub", lambda a, b: a - b),
    ("mul", lambda a, b: a * b),
    ("div", lambda a, b: a / b),
]


@settings(max_examples=200, deadline=None)
@given(
    SMALL_RATIONALS,
    SMALL_RATIONALS,
    st.fractions(min_value=0, max_value=F(1, 100)),
    st.fractions(min_value=0, max_value=F(1, 100)),
    st.fractions(min_value=-1, max_value=1),
    st.fractions(min_value=-1, max_value=1),
    st.sampled_from(OPS),
    st.sampled_from([24, 64, 256]),
)
def test_ball_containment(x, y, rx, ry, tx, ty, op, prec):
    """Any point of the operand balls maps into the result ball."""
    name, fn = op
    with working_precision(prec):
        bx = Ball.from_value(x) + Ball(0, 0, 1, 0) * Ball.from_value(rx)
        by = Ball.from_value(y) + Ball(0, 0, 1, 0) * Ball.from_value(ry)
        px, py = x + tx * rx, y + ty * ry
        assert bx.contains(px) and by.contains(py)
        if name == "div" and by.sign() in (None, 0):
            return
        out = fn(bx, by)
        assert out.contains(fn(px, py))


@settings(max_examples=100, deadline=None)
@given(SMALL_RATIONALS, st.integers(0, 6))
def test_ball_power_contains(x, k):
    assert (Ball.from_value(x) ** k).contains(x**k)


def test_sympy_oracle_roundtrip():
    s = S(2, 3, {(1, 1): F(1, 2), (0, 3): F(-2)})
    assert from_sympy(to_sympy(s), 2, 3) == s
    assert sp.expand(to_sympy(s)) == sp.Rational(1, 2) * xs(2)[0] * xs(2)[1] - 2 * xs(2)[1] ** 3
