"""Scalar backends.

Exact rationals are plain :class:`fractions.Fraction` values.  Certified
reals are :class:`Ball` enclosures: a dyadic midpoint ``m * 2**e`` and a
dyadic radius ``r * 2**re``.  Every Ball operation rounds the midpoint to
the working precision and adds the rounding error to the radius, so a
result always encloses the exact value of the operation applied to any
points of the operands.

Radius exponents are unbounded Python ints, which lets a ball carry radii
such as ``2**-(4 * 2**768)`` without materialising them.
"""

from __future__ import annotations

import contextlib
import contextvars
from fractions import Fraction
from typing import Union

from mpmath import iv
from mpmath.libmp import from_man_exp, mpf_add, mpf_sub

from ..errors import PrecisionExhausted, UndecidedSign

DEFAULT_PRECISION = 256
MAX_PRECISION = 4096
_RAD_BITS = 30

_precision: contextvars.ContextVar[int] = contextvars.ContextVar(
    "firstint_precision", default=DEFAULT_PRECISION
)


def get_precision() -> int:
    return _precision.get()


@contextlib.contextmanager
def working_precision(bits: int):
    """Temporarily set the midpoint precision (in bits) used by Ball arithmetic."""
    if bits < 16:
        raise ValueError("precision must be at least 16 bits")
    token = _precision.set(int(bits))
    try:
        yield
    finally:
        _precision.reset(token)


@contextlib.contextmanager
def iv_precision(bits: int):
    """Set mpmath's interval precision; mpmath keeps it as global state."""
    old = iv.prec
    iv.prec = int(bits)
    try:
        yield
    finally:
        iv.prec = old


def with_precision_retry(func, *args, start: int | None = None, cap: int = MAX_PRECISION, **kwargs):
    """Run ``func`` at doubling precision until no sign query is undecided.

    Raises PrecisionExhausted once the cap has been tried.
    """
    bits = start or get_precision()
    while True:
        with working_precision(bits):
            try:
                return func(*args, **kwargs)
            except UndecidedSign as exc:
                if bits >= cap:
                    raise PrecisionExhausted(f"{exc}; precision cap of {cap} bits reached") from exc
        bits = min(2 * bits, cap)


# -- nonnegative dyadic helpers; a dyadic is a pair (mantissa, exponent) ----


def _top(m: int, e: int) -> int:
    # 2**(top-1) <= m * 2**e < 2**top for m > 0
    return m.bit_length() + e


def _up(m: int, e: int) -> tuple[int, int]:
    if m == 0:
        return 0, 0
    s = m.bit_length() - _RAD_BITS
    if s > 0:
        m = (m >> s) + 1
        e += s
    return m, e


def _down(m: int, e: int) -> tuple[int, int]:
    if m <= 0:
        return 0, 0
    s = m.bit_length() - _RAD_BITS
    if s > 0:
        m >>= s
        e += s
    return m, e


def _add_up(a, b):
    (m1, e1), (m2, e2) = a, b
    if m1 == 0:
        return _up(m2, e2)
    if m2 == 0:
        return _up(m1, e1)
    if e1 < e2:
        (m1, e1), (m2, e2) = (m2, e2), (m1, e1)
    if _top(m2, e2) <= e1:
        return _up(m1 + 1, e1)
    return _up((m1 << (e1 - e2)) + m2, e2)


def _mul_up(a, b):
    return _up(a[0] * b[0], a[1] + b[1])


def _mul_down(a, b):
    return _down(a[0] * b[0], a[1] + b[1])


def _div_up(a, b):
    if a[0] == 0:
        return 0, 0
    s = max(0, _RAD_BITS + 1 + b[0].bit_length() - a[0].bit_length())
    return _up((a[0] << s) // b[0] + 1, a[1] - b[1] - s)


def _sub_down(a, b):
    """Lower bound of a - b for dyadics with a > b >= 0."""
    m1, e1 = a[0] << (_RAD_BITS + 2), a[1] - _RAD_BITS - 2
    m2, e2 = b
    if m2 == 0:
        return _down(m1, e1)
    if _top(m2, e2) <= e1:
        return _down(m1 - 1, e1)
    e = min(e1, e2)
    return _down((m1 << (e1 - e)) - (m2 << (e2 - e)), e)


def _cmp(a, b) -> int:
    (m1, e1), (m2, e2) = a, b
    if m1 == 0 or m2 == 0:
        return (m1 > 0) - (m2 > 0)
    t1, t2 = _top(m1, e1), _top(m2, e2)
    if t1 != t2:
        return 1 if t1 > t2 else -1
    e = min(e1, e2)
    x, y = m1 << (e1 - e), m2 << (e2 - e)
    return (x > y) - (x < y)


def _round(m: int, e: int, prec: int):
    """Round a signed mantissa to ``prec`` bits; returns (m, e, error bound)."""
    s = abs(m).bit_length() - prec
    if s <= 0:
        return m, e, (0, 0)
    m = (m + (1 << (s - 1))) >> s
    return m, e + s, (1, e + s - 1)


def _raw_to_dyadic(raw) -> tuple[int, int]:
    sign, man, exp, _ = raw
    if man == 0 and exp != 0:
        raise ValueError("cannot convert an infinite or NaN endpoint to a ball")
    m = int(man)
    return (-m if sign else m), int(exp)


class Ball:
    """Certified real: the closed interval ``[mid - rad, mid + rad]``.

    Equality and hashing are structural (identical midpoint and radius);
    use :meth:`sign` and :meth:`contains` for mathematical questions.
    """

    __slots__ = ("_m", "_e", "_r", "_re")

    def __init__(self, man: int = 0, exp: int = 0, rman: int = 0, rexp: int = 0):
        man, exp, rman, rexp = int(man), int(exp), int(rman), int(rexp)
        if rman < 0:
            raise ValueError("radius mantissa must be nonnegative")
        if man:
            tz = (man & -man).bit_length() - 1
            man >>= tz
            exp += tz
        else:
            exp = 0
        self._m, self._e = man, exp
        self._r, self._re = _up(rman, rexp)

    # construction ------------------------------------------------------

    @classmethod
    def from_value(cls, x, prec: int | None = None) -> "Ball":
        """Enclose an int, Fraction or float; exact when the value is dyadic."""
        if isinstance(x, Ball):
            return x
        if isinstance(x, float):
            x = Fraction(x)
        if isinstance(x, int):
            return cls(x, 0)
        if not isinstance(x, Fraction):
            raise TypeError(f"cannot convert {type(x).__name__} to Ball")
        num, den = x.numerator, x.denominator
        if den & (den - 1) == 0:
            return cls(num, -(den.bit_length() - 1))
        prec = prec or get_precision()
        s = prec + 2 + den.bit_length() - abs(num).bit_length()
        if s < 0:
            s = 0
        q = (num << s) // den
        m, e, err = _round(q, -s, prec)
        return cls(m, e, *_add_up((1, -s), err))

    @classmethod
    def from_iv(cls, x) -> "Ball":
        """Convert an mpmath interval into an enclosing ball (exact midpoint)."""
        a, b = x._mpi_
        (ma, ea), (mb, eb) = _raw_to_dyadic(a), _raw_to_dyadic(b)
        e = min(ea, eb)
        lo, hi = ma << (ea - e), mb << (eb - e)
        return cls(lo + hi, e - 1, hi - lo, e - 1)

    @classmethod
    def dyadic(cls, man: int, exp: int, rman: int = 0, rexp: int = 0) -> "Ball":
        return cls(man, exp, rman, rexp)

    # accessors ---------------------------------------------------------

    @property
    def mid(self) -> Fraction:
        if self._e >= 0:
            return Fraction(self._m << self._e)
        return Fraction(self._m, 1 << -self._e)

    @property
    def rad(self) -> Fraction:
        if self._re >= 0:
            return Fraction(self._r << self._re)
        if -self._re > 1 << 20:
            raise OverflowError("radius is too small to materialise as a Fraction; use rad_log2_upper()")
        return Fraction(self._r, 1 << -self._re)

    @property
    def mid_dyadic(self) -> tuple[int, int]:
        return self._m, self._e

    @property
    def rad_dyadic(self) -> tuple[int, int]:
        return self._r, self._re

    def rad_log2_upper(self) -> int | None:
        """Integer k with rad < 2**k, or None for a zero radius."""
        return _top(self._r, self._re) if self._r else None

    def is_exact(self) -> bool:
        return self._r == 0

    def __bool__(self) -> bool:
        return bool(self._m or self._r)

    def __float__(self) -> float:
        return float(self.mid)

    def __eq__(self, other) -> bool:
        if isinstance(other, Ball):
            return (self._m, self._e, self._r, self._re) == (other._m, other._e, other._r, other._re)
        if isinstance(other, (int, Fraction)) and self._r == 0:
            return self.mid == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._r == 0:
            return hash(self.mid)
        return hash((self._m, self._e, self._r, self._re))

    def __repr__(self) -> str:
        if self._r == 0:
            return f"Ball({float(self):.17g})"
        return f"Ball({float(self):.17g} +/- 2^{self.rad_log2_upper()})"

    def dyadic_str(self) -> str:
        s = f"{self._m}*2^{self._e}"
        if self._r:
            s += f" +/- {self._r}*2^{self._re}"
        return s

    # certified queries -------------------------------------------------

    def sign(self) -> int | None:
        """-1, 0 or 1 when certified, None when the ball straddles zero."""
        if self._m == 0:
            return 0 if self._r == 0 else None
        if _cmp((abs(self._m), self._e), (self._r, self._re)) > 0:
            return 1 if self._m > 0 else -1
        return None

    def contains(self, q) -> bool:
        d = Fraction(q) - self.mid
        if d == 0:
            return True
        if self._r == 0:
            return False
        a, b = abs(d.numerator), d.denominator
        return _cmp((a, 0), (self._r * b, self._re)) <= 0

    def overlaps(self, other: "Ball") -> bool:
        diff = self - other
        return diff.sign() is None or diff.sign() == 0

    def width_log2_upper(self) -> int | None:
        return None if self._r == 0 else self.rad_log2_upper() + 1

    # arithmetic --------------------------------------------------------

    def __neg__(self) -> "Ball":
        return Ball(-self._m, self._e, self._r, self._re)

    def __pos__(self) -> "Ball":
        return self

    def __abs__(self) -> "Ball":
        s = self.sign()
        if s is not None:
            return -self if s < 0 else self
        hm, he = _add_up((abs(self._m), self._e), (self._r, self._re))
        return Ball(hm, he - 1, hm, he - 1)

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        prec = get_precision()
        m1, e1, m2, e2 = self._m, self._e, o._m, o._e
        rad = _add_up((self._r, self._re), (o._r, o._re))
        if m1 == 0:
            m, e = m2, e2
        elif m2 == 0:
            m, e = m1, e1
        else:
            t1, t2 = _top(abs(m1), e1), _top(abs(m2), e2)
            if t2 < t1 - prec - 4:
                rad = _add_up(rad, (1, t2))
                m, e = m1, e1
            elif t1 < t2 - prec - 4:
                rad = _add_up(rad, (1, t1))
                m, e = m2, e2
            else:
                e = min(e1, e2)
                m = (m1 << (e1 - e)) + (m2 << (e2 - e))
        m, e, err = _round(m, e, prec)
        return Ball(m, e, *_add_up(rad, err))

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        r1, r2 = (self._r, self._re), (o._r, o._re)
        a1, a2 = _up(abs(self._m), self._e), _up(abs(o._m), o._e)
        rad = _add_up(_add_up(_mul_up(a1, r2), _mul_up(a2, r1)), _mul_up(r1, r2))
        m, e, err = _round(self._m * o._m, self._e + o._e, get_precision())
        return Ball(m, e, *_add_up(rad, err))

    __rmul__ = __mul__

    def reciprocal(self) -> "Ball":
        if self._m == 0 and self._r == 0:
            raise ZeroDivisionError("reciprocal of an exact zero ball")
        a, r = (abs(self._m), self._e), (self._r, self._re)
        if self._m == 0 or _cmp(a, r) <= 0:
            raise UndecidedSign(f"cannot invert {self!r}: zero not excluded")
        prec = get_precision()
        s = prec + 2 + a[0].bit_length()
        q = (1 << s) // self._m
        qe = -s - self._e
        rad = (1, qe)
        if self._r:
            rad = _add_up(rad, _div_up(r, _mul_down(a, _sub_down(a, r))))
        m, e, err = _round(q, qe, prec)
        return Ball(m, e, *_add_up(rad, err))

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if isinstance(other, int) and other and other & (other - 1) == 0 and o._r == 0 and other > 0:
            return Ball(self._m, self._e - (other.bit_length() - 1), self._r, self._re - (other.bit_length() - 1))
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, k: int) -> "Ball":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result, base = Ball(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # interop with mpmath intervals -------------------------------------

    def to_iv(self):
        p = iv.prec
        mid = from_man_exp(self._m, self._e)
        rad = from_man_exp(self._r, self._re)
        return iv.make_mpf((mpf_sub(mid, rad, p, "f"), mpf_add(mid, rad, p, "c")))


def _coerce(x):
    if isinstance(x, Ball):
        return x
    if isinstance(x, (int, Fraction)):
        return Ball.from_value(x)
    return NotImplemented


Scalar = Union[Fraction, Ball]


def is_exact(x) -> bool:
    return not isinstance(x, Ball)


def is_zero(x) -> bool:
    """True only for exact zeros (a Ball counts only when it is 0 +/- 0)."""
    return not x


def sign_of(x) -> int:
    """Certified sign; raises UndecidedSign for a ball that straddles zero."""
    if isinstance(x, Ball):
        s = x.sign()
        if s is None:
            raise UndecidedSign(f"sign of {x!r} undecided at {get_precision()} bits")
        return s
    return (x > 0) - (x < 0)


def to_iv(x):
    if isinstance(x, Ball):
        return x.to_iv()
    x = Fraction(x)
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def log2_abs(x):
    """Certified enclosure (mpmath interval) of log2|x| for a nonzero scalar."""
    s = sign_of(x)
    if s == 0:
        raise ValueError("log2 of zero")
    y = to_iv(x)
    return iv.log(-y if s < 0 else y) / iv.log(2)


def to_scalar(x, backend: str = "exact"):
    """Coerce a number into the requested backend ('exact' or 'certified')."""
    if backend == "exact":
        if isinstance(x, Ball):
            if not x.is_exact():
                raise TypeError("an inexact ball cannot enter the exact backend")
            return x.mid
        return Fraction(x)
    if backend == "certified":
        return Ball.from_value(x)
    raise ValueError(f"unknown backend {backend!r}")


def format_scalar(x) -> str:
    """p/q for exact rationals, dyadic ``m*2^e +/- r*2^f`` for balls."""
    if isinstance(x, Ball):
        return x.dyadic_str()
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
