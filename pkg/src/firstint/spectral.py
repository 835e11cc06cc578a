"""Resonance lattices and divisor certificates for eigenvalue tuples."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import Ball, monomials, sign_of, with_precision_retry
from .errors import NonRationalEigenvalues

DEFAULT_CAP = 32


def _dot(exps, values):
    total = Fraction(0)
    for e, v in zip(exps, values):
        if e:
            total = total + e * v
    return total


@dataclass(frozen=True)
class EigenData:
    """Eigenvalues of the linear part, split as the leading one plus the tail."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("at least one eigenvalue is required")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def lead(self):
        return self.values[0]

    @property
    def tail(self) -> tuple:
        return self.values[1:]

    @property
    def exact(self) -> bool:
        return not any(isinstance(v, Ball) for v in self.values)

    @property
    def tail_sign(self) -> str:
        """'positive', 'negative', 'mixed' or 'unknown' for the tail entries."""
        signs = []
        for v in self.tail:
            s = v.sign() if isinstance(v, Ball) else (v > 0) - (v < 0)
            if s is None:
                return "unknown"
            signs.append(s)
        if signs and all(s > 0 for s in signs):
            return "positive"
        if signs and all(s < 0 for s in signs):
            return "negative"
        return "mixed"


@dataclass(frozen=True)
class ResonanceLattice:
    cap: int
    points: tuple

    def __bool__(self) -> bool:
        return bool(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _as_rationals(values) -> list[Fraction]:
    out = []
    for v in values:
        if isinstance(v, Ball):
            if not v.is_exact():
                raise NonRationalEigenvalues("resonance enumeration needs exact rational eigenvalues")
            v = v.mid
        out.append(Fraction(v))
    return out


def resonance_lattice(eig: EigenData | Sequence, cap: int = DEFAULT_CAP) -> ResonanceLattice:
    """All m with <m, lambda> = 0 and 1 <= |m| <= cap, ordered by degree then descending lex."""
    values = eig.values if isinstance(eig, EigenData) else tuple(eig)
    lams = _as_rationals(values)
    n = len(lams)
    # lo[i], hi[i]: per-unit range of contributions from coordinates i..n-1
    lo = [min([Fraction(0)] + lams[i:]) for i in range(n)] + [Fraction(0)]
    hi = [max([Fraction(0)] + lams[i:]) for i in range(n)] + [Fraction(0)]
    found = []

    def rec(i, prefix, s, used):
        lam = lams[i]
        budget = cap - used
        if i == n - 1:
            if lam == 0:
                if s == 0:
                    found.extend(prefix + (m,) for m in range(budget + 1) if used + m >= 1)
                return
            m = -s / lam
            if m.denominator == 1 and 0 <= m <= budget and used + m >= 1:
                found.append(prefix + (int(m),))
            return
        for m in range(budget + 1):
            s2 = s + m * lam
            rest = budget - m
            if s2 + rest * lo[i + 1] <= 0 <= s2 + rest * hi[i + 1]:
                rec(i + 1, prefix + (m,), s2, used + m)

    if n:
        rec(0, (), Fraction(0), 0)
    found.sort(key=lambda m: (sum(m), tuple(-x for x in m)))
    return ResonanceLattice(cap, tuple(found))


def _abs_lower(v) -> Fraction:
    """Certified lower bound of |v| (zero when undecided).

    For a ball this is |mid| - 2**k with rad < 2**k; radii far below the
    midpoint are clamped to 2**(top - 512) so the bound stays a small Fraction.
    """
    if not isinstance(v, Ball):
        return abs(Fraction(v))
    if v.sign() is None or v.sign() == 0:
        return Fraction(0)
    if v.is_exact():
        return abs(v.mid)
    m, e = v.mid_dyadic
    k = max(v.rad_log2_upper(), abs(m).bit_length() + e - 512)
    low = abs(v.mid) - (Fraction(2) ** k)
    return max(low, Fraction(0))


@dataclass(frozen=True)
class DegreeBound:
    degree: int
    argmin: tuple
    value: object  # <argmin, lambda> as an exact rational or a ball
    lower_bound: Fraction  # certified lower bound of min |<m, lambda>| over this degree


@dataclass(frozen=True)
class TailCertificate:
    """Per-degree divisor bounds, or the first resonant exponent found."""

    cap: int
    bounds: tuple = ()
    counterexample: tuple | None = None

    @property
    def certified(self) -> bool:
        return self.counterexample is None

    def lower_bound(self, degree: int) -> Fraction:
        return self.bounds[degree - 1].lower_bound


def _certify(values, cap):
    bounds = []
    for d in range(1, cap + 1):
        best = None
        low = None
        for m in monomials(len(values), d):
            v = _dot(m, values)
            s = sign_of(v)
            if s == 0:
                return TailCertificate(cap, tuple(bounds), m)
            key = abs(float(v)) if isinstance(v, Ball) else abs(v)
            lb = _abs_lower(v)
            if best is None or key < best[0]:
                best = (key, m, v)
            low = lb if low is None else min(low, lb)
        if best is None:
            break
        bounds.append(DegreeBound(d, best[1], best[2], low))
    return TailCertificate(cap, tuple(bounds), None)


def certify_tail_nonresonant(tail: Sequence, cap: int = DEFAULT_CAP) -> TailCertificate:
    """Certify <m, tail> != 0 for 1 <= |m| <= cap, or return the first violation.

    Balls whose sign is undecided trigger precision doubling; PrecisionExhausted
    propagates once the cap is reached.
    """
    return with_precision_retry(_certify, tuple(tail), cap)


def operator_spectrum(mu: Sequence, nu: Sequence | None = None, r: int = 0) -> list:
    """Multiset {<k, mu> - nu_j : |k| = r} sorted by value (midpoint for balls)."""
    if r < 0:
        raise ValueError("degree must be nonnegative")
    nu = (Fraction(0),) if nu is None or len(nu) == 0 else tuple(nu)
    out = [_dot(k, mu) - v for k in monomials(len(mu), r) for v in nu]
    out.sort(key=lambda x: float(x) if isinstance(x, Ball) else x)
    return out
