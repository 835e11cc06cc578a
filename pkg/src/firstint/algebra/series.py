"""Sparse graded multivariate polynomials and truncated power series.

Monomials are exponent tuples.  A :class:`TruncSeries` stores its
homogeneous parts separately, keyed by degree, so per-degree work (the
recursions in :mod:`firstint.integralforge`) touches only the parts it
needs.  Coefficients may be ``Fraction`` or :class:`~.scalars.Ball`; exact
zeros are never stored.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement
from operator import add
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from ..errors import DegreeOutOfRange, DimensionMismatch, ValuationTooLow

Exps = tuple  # tuple[int, ...]

INF = math.inf


def monomials(nvars: int, degree: int) -> list[Exps]:
    """All exponent vectors of the given total degree, in descending lex order."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def _clean(d: dict) -> dict:
    return {k: c for k, c in d.items() if c}


class HomogPoly:
    """Homogeneous polynomial: a sparse map from exponent vectors of one degree to scalars."""

    __slots__ = ("nvars", "degree", "_terms")

    def __init__(self, nvars: int, degree: int, terms: Mapping | None = None):
        self.nvars = nvars
        self.degree = degree
        clean = {}
        for k, c in (terms or {}).items():
            k = tuple(k)
            if len(k) != nvars:
                raise DimensionMismatch(f"exponent {k} has length {len(k)}, expected {nvars}")
            if sum(k) != degree or min(k, default=0) < 0:
                raise ValueError(f"exponent {k} is not a degree-{degree} monomial")
            if c:
                clean[k] = c
        self._terms = clean

    @classmethod
    def _trusted(cls, nvars, degree, terms):
        obj = cls.__new__(cls)
        obj.nvars, obj.degree, obj._terms = nvars, degree, terms
        return obj

    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, exps) -> object:
        return self._terms.get(tuple(exps), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogPoly):
            return NotImplemented
        return (self.nvars, self.degree, self._terms) == (other.nvars, other.degree, other._terms)

    def __repr__(self) -> str:
        return f"HomogPoly(nvars={self.nvars}, degree={self.degree}, {dict(sorted(self._terms.items(), reverse=True))})"

    def to_series(self, order: int) -> "TruncSeries":
        return TruncSeries(self.nvars, order, self._terms)


class TruncSeries:
    """Multivariate power series known exactly through total degree ``order``.

    Instances are immutable; arithmetic returns new objects.  The zero
    series has valuation ``math.inf``.
    """

    __slots__ = ("nvars", "order", "_parts")

    def __init__(self, nvars: int, order: int, terms: Mapping | Iterable | None = None):
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        self.nvars = nvars
        self.order = order
        parts: dict[int, dict] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for k, c in items:
            k = tuple(k)
            if len(k) != nvars:
                raise DimensionMismatch(f"exponent {k} has length {len(k)}, expected {nvars}")
            if min(k, default=0) < 0:
                raise ValueError(f"negative exponent in {k}")
            d = sum(k)
            if d > order:
                continue
            part = parts.setdefault(d, {})
            part[k] = part[k] + c if k in part else c
        self._parts = {d: p for d, p in ((d, _clean(p)) for d, p in parts.items()) if p}

    @classmethod
    def _trusted(cls, nvars: int, order: int, parts: dict) -> "TruncSeries":
        obj = cls.__new__(cls)
        obj.nvars, obj.order = nvars, order
        obj._parts = {d: p for d, p in parts.items() if p and d <= order}
        return obj

    @classmethod
    def zero(cls, nvars: int, order: int) -> "TruncSeries":
        return cls._trusted(nvars, order, {})

    @classmethod
    def constant(cls, nvars: int, order: int, c) -> "TruncSeries":
        return cls(nvars, order, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int, order: int, coeff=Fraction(1)) -> "TruncSeries":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, order, {tuple(e): coeff})

    @classmethod
    def from_parts(cls, nvars: int, order: int, parts: Iterable[HomogPoly]) -> "TruncSeries":
        out: dict[int, dict] = {}
        for p in parts:
            if p.nvars != nvars:
                raise DimensionMismatch("part has wrong number of variables")
            if p and p.degree <= order:
                out[p.degree] = dict(p._terms)
        return cls._trusted(nvars, order, out)

    # inspection --------------------------------------------------------

    @property
    def valuation(self):
        return min(self._parts) if self._parts else INF

    @property
    def degrees(self) -> list[int]:
        return sorted(self._parts)

    def part(self, d: int) -> dict:
        """Read-only view of the degree-d coefficient map (possibly empty)."""
        return MappingProxyType(self._parts.get(d, {}))

    def items(self) -> Iterator[tuple[Exps, object]]:
        for d in sorted(self._parts):
            yield from self._parts[d].items()

    def coeff(self, exps) -> object:
        exps = tuple(exps)
        return self._parts.get(sum(exps), {}).get(exps, Fraction(0))

    def nterms(self) -> int:
        return sum(len(p) for p in self._parts.values())

    def __bool__(self) -> bool:
        return bool(self._parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.nvars, self.order, self._parts) == (other.nvars, other.order, other._parts)

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}: {c}" for k, c in self.items())
        return f"TruncSeries(nvars={self.nvars}, order={self.order}, {{{terms}}})"

    def truncate(self, order: int) -> "TruncSeries":
        return TruncSeries._trusted(self.nvars, order, {d: p for d, p in self._parts.items() if d <= order})

    def map_coeffs(self, fn) -> "TruncSeries":
        return TruncSeries._trusted(
            self.nvars, self.order, {d: _clean({k: fn(c) for k, c in p.items()}) for d, p in self._parts.items()}
        )

    def restrict(self, keep) -> "TruncSeries":
        """Keep only the monomials for which ``keep(exps)`` is true."""
        return TruncSeries._trusted(
            self.nvars, self.order, {d: {k: c for k, c in p.items() if keep(k)} for d, p in self._parts.items()}
        )

    # ring operations ---------------------------------------------------

    def _check(self, other: "TruncSeries"):
        if not isinstance(other, TruncSeries):
            raise TypeError("expected TruncSeries")
        if other.nvars != self.nvars:
            raise DimensionMismatch(f"{self.nvars} vs {other.nvars} variables")

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            return self + TruncSeries.constant(self.nvars, self.order, other)
        self._check(other)
        order = min(self.order, other.order)
        parts = {d: dict(p) for d, p in self._parts.items() if d <= order}
        for d, p in other._parts.items():
            if d > order:
                continue
            tgt = parts.setdefault(d, {})
            for k, c in p.items():
                tgt[k] = tgt[k] + c if k in tgt else c
            parts[d] = _clean(tgt)
        return TruncSeries._trusted(self.nvars, order, parts)

    __radd__ = __add__

    def __neg__(self) -> "TruncSeries":
        return TruncSeries._trusted(
            self.nvars, self.order, {d: {k: -c for k, c in p.items()} for d, p in self._parts.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncSeries":
        return self.map_coeffs(lambda x: x * c)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return mul(self, other, min(self.order, other.order))
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)


def _conv_into(pa: dict, pb: dict, out: dict) -> None:
    for ka, ca in pa.items():
        for kb, cb in pb.items():
            k = tuple(map(add, ka, kb))
            v = ca * cb
            out[k] = out[k] + v if k in out else v


def mul_degree(a: TruncSeries, b: TruncSeries, d: int) -> dict:
    """Degree-d part of a*b as a cleaned coefficient map."""
    out: dict = {}
    for da, pa in a._parts.items():
        pb = b._parts.get(d - da)
        if pb:
            _conv_into(pa, pb, out)
    return _clean(out)


def mul(a: TruncSeries, b: TruncSeries, N: int | None = None) -> TruncSeries:
    """Graded Cauchy product, exact through degree N."""
    a._check(b)
    if N is None:
        N = min(a.order, b.order)
    if N > min(a.order, b.order):
        raise DegreeOutOfRange(f"requested degree {N} exceeds operand truncation {min(a.order, b.order)}")
    parts: dict[int, dict] = {}
    for da, pa in a._parts.items():
        for db, pb in b._parts.items():
            if da + db <= N:
                _conv_into(pa, pb, parts.setdefault(da + db, {}))
    return TruncSeries._trusted(a.nvars, N, {d: _clean(p) for d, p in parts.items()})


def diff(s: TruncSeries, i: int) -> TruncSeries:
    """Partial derivative in variable i; the result is exact through order - 1."""
    if not 0 <= i < s.nvars:
        raise IndexError(f"variable index {i} out of range for {s.nvars} variables")
    parts: dict[int, dict] = {}
    for d, p in s._parts.items():
        if d == 0:
            continue
        tgt = {}
        for k, c in p.items():
            e = k[i]
            if e:
                nk = k[:i] + (e - 1,) + k[i + 1:]
                tgt[nk] = c * e
        if tgt:
            parts[d - 1] = tgt
    return TruncSeries._trusted(s.nvars, max(s.order - 1, 0), parts)


def grade(s: TruncSeries, d: int) -> HomogPoly:
    if not 0 <= d <= s.order:
        raise DegreeOutOfRange(f"degree {d} outside 0..{s.order}")
    return HomogPoly._trusted(s.nvars, d, dict(s._parts.get(d, {})))


def compose(s: TruncSeries, subs: Sequence[TruncSeries], N: int | None = None) -> TruncSeries:
    """Substitute ``subs[i]`` for variable i of ``s``; exact through degree N.

    Every substituted series must have valuation >= 1.  Monomials are
    evaluated via memoised exponent prefixes, so each monomial of ``s``
    costs one series multiplication.
    """
    if len(subs) != s.nvars:
        raise DimensionMismatch(f"{len(subs)} substitutions for {s.nvars} variables")
    if not subs:
        return s
    k = subs[0].nvars
    for t in subs:
        if t.nvars != k:
            raise DimensionMismatch("substituted series disagree on variable count")
        if t.valuation < 1:
            raise ValuationTooLow("substituted series has a constant term")
    if N is None:
        N = min([s.order] + [t.order for t in subs])
    if N > min(t.order for t in subs):
        raise DegreeOutOfRange("requested degree exceeds substitution truncation")
    one = TruncSeries.constant(k, N, Fraction(1))
    powers = [[one] for _ in subs]

    def power(i, e):
        row = powers[i]
        while len(row) <= e:
            row.append(mul(row[-1], subs[i], N))
        return row[e]

    prefix: dict = {(): one}

    def prod(exps):
        if exps in prefix:
            return prefix[exps]
        head, e = exps[:-1], exps[-1]
        val = prod(head)
        if e:
            val = mul(val, power(len(exps) - 1, e), N)
        prefix[exps] = val
        return val

    parts: dict[int, dict] = {}
    for d, p in s._parts.items():
        if d > N:
            continue
        for exps, c in p.items():
            term = prod(exps)
            for dd, tp in term._parts.items():
                tgt = parts.setdefault(dd, {})
                for kk, cc in tp.items():
                    v = c * cc
                    tgt[kk] = tgt[kk] + v if kk in tgt else v
    return TruncSeries._trusted(k, N, {d: _clean(p) for d, p in parts.items()})


def reassemble(parts: Iterable[HomogPoly], nvars: int, order: int) -> TruncSeries:
    return TruncSeries.from_parts(nvars, order, parts)
