"""The operator L*(h) = <By, dh/dy> on homogeneous polynomials.

``x1`` is a spectator: L* only differentiates in ``y = (x2, ..., xn)``.
For B in Jordan form the operator is diagonal (eigenvalue <lambda*, q> on
``x1^p y^q``) plus a nilpotent part that moves one unit of exponent from
``y_i`` to ``y_{i+1}`` inside a Jordan chain.  That move makes the exponent
lexicographically smaller, so processing monomials in descending lex order
solves L*(h) = rhs in a single back-substitution sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import Ball, HomogPoly, monomials, sign_of, with_precision_retry
from .errors import BadRhs, NotJordanForm, ZeroDivisor


def _same(a, b) -> bool:
    if isinstance(a, Ball) or isinstance(b, Ball):
        return Ball.from_value(a) == Ball.from_value(b)
    return a == b


@dataclass(frozen=True)
class JordanMatrix:
    """Upper bidiagonal matrix: ``diag`` entries and 0/1 superdiagonal ``sup``."""

    diag: tuple
    sup: tuple = ()

    def __post_init__(self):
        diag = tuple(d if isinstance(d, Ball) else Fraction(d) for d in self.diag)
        sup = tuple(int(s) for s in self.sup) if self.sup else (0,) * max(len(diag) - 1, 0)
        if len(sup) != max(len(diag) - 1, 0):
            raise NotJordanForm("superdiagonal length must be size - 1")
        for i, s in enumerate(sup):
            if s not in (0, 1):
                raise NotJordanForm(f"superdiagonal entry {s} is not 0 or 1")
            if s and not _same(diag[i], diag[i + 1]):
                raise NotJordanForm(f"Jordan chain links unequal eigenvalues at position {i}")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sup", sup)

    @classmethod
    def diagonal(cls, values) -> "JordanMatrix":
        return cls(tuple(values))

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "JordanMatrix":
        n = len(rows)
        diag, sup = [], []
        for i, row in enumerate(rows):
            if len(row) != n:
                raise NotJordanForm("matrix is not square")
            for j, v in enumerate(row):
                if j == i or (j == i + 1 and v in (0, 1)) or not v:
                    continue
                raise NotJordanForm(f"entry ({i}, {j}) = {v} breaks Jordan form")
            diag.append(row[i])
            if i + 1 < n:
                sup.append(int(row[i + 1]))
        return cls(tuple(diag), tuple(sup))

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> list[list]:
        n = self.size
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i, d in enumerate(self.diag):
            rows[i][i] = d
            if i + 1 < n and self.sup[i]:
                rows[i][i + 1] = Fraction(1)
        return rows

    def blocks(self) -> list[list[int]]:
        out, cur = [], []
        for i in range(self.size):
            cur.append(i)
            if i == self.size - 1 or not self.sup[i]:
                out.append(cur)
                cur = []
        return out

    def apply(self, vec: Sequence) -> list:
        out = []
        for i, d in enumerate(self.diag):
            v = d * vec[i]
            if i + 1 < self.size and self.sup[i]:
                v = v + vec[i + 1]
            out.append(v)
        return out

    def solve(self, rhs: Sequence) -> list:
        """Back substitution for B z = rhs."""
        n = self.size
        z = [Fraction(0)] * n
        for i in reversed(range(n)):
            w = rhs[i]
            if i + 1 < n and self.sup[i]:
                w = w - z[i + 1]
            z[i] = _divide(w, self.diag[i])
        return z


def _divide(c, ev):
    if sign_of(ev) == 0:
        raise ZeroDivisor(f"division by a zero eigenvalue combination {ev}")
    if not c:
        return Fraction(0)
    return c / ev


def _eigen(diag, q):
    total = Fraction(0)
    for e, lam in zip(q, diag):
        if e:
            total = total + e * lam
    return total


def _certified_eigen(diag, q):
    """<lambda*, q> with its sign certified (precision doubling for balls)."""

    def attempt():
        v = _eigen(diag, q)
        sign_of(v)
        return v

    return with_precision_retry(attempt)


@dataclass(frozen=True)
class HomOperator:
    """L* restricted to span{x1^p y^q : |q| = r}; basis in descending lex order of q."""

    B: JordanMatrix
    power: int
    degree: int
    basis: tuple

    @property
    def nvars(self) -> int:
        return self.B.size + 1

    def full(self, q) -> tuple:
        return (self.power,) + tuple(q)

    def eigenvalue(self, q):
        return _eigen(self.B.diag, q)

    def diagonal(self) -> list:
        return [self.eigenvalue(q) for q in self.basis]

    def image(self, q) -> dict:
        """L*(y^q) as a map from y-exponents to coefficients."""
        out = {}
        ev = self.eigenvalue(q)
        if ev:
            out[tuple(q)] = ev
        for i, s in enumerate(self.B.sup):
            if s and q[i]:
                t = list(q)
                t[i] -= 1
                t[i + 1] += 1
                t = tuple(t)
                out[t] = out.get(t, Fraction(0)) + q[i]
        return out

    def matrix(self) -> list[list]:
        """Dense matrix on ``basis``; column j holds the image of basis[j]."""
        index = {q: i for i, q in enumerate(self.basis)}
        m = [[Fraction(0)] * len(self.basis) for _ in self.basis]
        for j, q in enumerate(self.basis):
            for t, c in self.image(q).items():
                m[index[t]][j] = c
        return m

    def apply(self, poly: HomogPoly) -> HomogPoly:
        return apply_lstar(self.B, poly)


def assemble(B: JordanMatrix, p: int, r: int) -> HomOperator:
    if not isinstance(B, JordanMatrix):
        B = JordanMatrix.from_dense(B)
    if p < 0 or r < 0:
        raise ValueError("powers must be nonnegative")
    return HomOperator(B, p, r, tuple(monomials(B.size, r)))


def apply_lstar(B: JordanMatrix, poly: HomogPoly) -> HomogPoly:
    """L* applied to a homogeneous polynomial in (x1, y)."""
    out: dict = {}
    for k, c in poly.items():
        q = k[1:]
        ev = _eigen(B.diag, q)
        if ev:
            out[k] = out[k] + c * ev if k in out else c * ev
        for i, s in enumerate(B.sup):
            if s and q[i]:
                t = list(k)
                t[i + 1] -= 1
                t[i + 2] += 1
                t = tuple(t)
                v = c * q[i]
                out[t] = out[t] + v if t in out else v
    return HomogPoly(poly.nvars, poly.degree, out)


def _sweep(B: JordanMatrix, rhs: dict) -> dict:
    """Solve L*(h) = rhs over every monomial reachable from the rhs support."""
    chains = [i for i, s in enumerate(B.sup) if s]
    support = set(rhs)
    frontier = list(support)
    while frontier:
        k = frontier.pop()
        for i in chains:
            if k[i + 1]:
                t = list(k)
                t[i + 1] -= 1
                t[i + 2] += 1
                t = tuple(t)
                if t not in support:
                    support.add(t)
                    frontier.append(t)
    sol: dict = {}
    cache: dict = {}
    for k in sorted(support, reverse=True):
        q = k[1:]
        if not any(q):
            raise BadRhs(f"rhs monomial {k} has no y dependence")
        acc = rhs.get(k, Fraction(0))
        for i in chains:
            if k[i + 2]:
                src = list(k)
                src[i + 1] += 1
                src[i + 2] -= 1
                c = sol.get(tuple(src))
                if c:
                    acc = acc - c * (k[i + 1] + 1)
        key = q
        ev = cache.get(key)
        if ev is None:
            ev = cache[key] = _certified_eigen(B.diag, q)
        if sign_of(ev) == 0:
            raise ZeroDivisor(f"<lambda*, q> = 0 for q = {q}: resonant tail")
        if acc:
            sol[k] = acc / ev
    return sol


def solve(op: HomOperator, rhs: HomogPoly) -> HomogPoly:
    """Unique solution of L*(h) = rhs on the (p, r) block with no q = 0 monomial."""
    for k in rhs.terms:
        if k[0] != op.power or sum(k[1:]) != op.degree:
            if not any(k[1:]):
                raise BadRhs(f"rhs monomial {k} has no y dependence")
            raise ValueError(f"rhs monomial {k} lies outside the (p={op.power}, r={op.degree}) block")
    return HomogPoly(rhs.nvars, rhs.degree, _sweep(op.B, dict(rhs.items())))


def solve_homogeneous(B: JordanMatrix, rhs: HomogPoly) -> HomogPoly:
    """Solve L*(h) = rhs for a full homogeneous rhs (all x1 powers at once)."""
    if rhs.nvars != B.size + 1:
        raise ValueError("rhs dimension does not match B")
    return HomogPoly(rhs.nvars, rhs.degree, _sweep(B, dict(rhs.items())))


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fcol]
        basis.append(v)
    return basis


def kernel_basis(op: HomOperator) -> list[HomogPoly]:
    """Basis of ker L* on the block (monomials whenever the kernel is monomial)."""
    zero = []
    for q in op.basis:
        if sign_of(_certified_eigen(op.B.diag, q)) == 0:
            zero.append(q)
    if not zero:
        return []
    index = {q: i for i, q in enumerate(zero)}
    rows = [[Fraction(0)] * len(zero) for _ in zero]
    for j, q in enumerate(zero):
        for t, c in op.image(q).items():
            if t in index:
                rows[index[t]][j] = c.mid if isinstance(c, Ball) else c
    out = []
    for vec in _nullspace(rows, len(zero)):
        terms = {op.full(q): c for q, c in zip(zero, vec) if c}
        out.append(HomogPoly(op.nvars, op.power + op.degree, terms))
    return out
