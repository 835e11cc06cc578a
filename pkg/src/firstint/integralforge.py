"""Degree-by-degree construction of formal first integrals.

For a straightened field

    x1' = f1(x),   y' = B y + g(x),   f1 = g = 0 on {y = 0},

the degree-d part of the identity f1 dH/dx1 + <By + g, dH/dy> = 0 reads

    L*(H_d) = -sum_j [ f1_j dH_{d+1-j}/dx1 + <g_j, dH_{d+1-j}/dy> ],

whose right side only involves parts of H below degree d.  Solving it
degree by degree with the x1-power free constants pinned to zero gives the
canonical representative H = a_m x1^m + (non-resonant monomials).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import Ball, HomogPoly, TruncSeries
from .algebra.series import _clean, _conv_into
from .errors import BadRhs, NotStraightened, ResonantSpectrum, ResonantTail, ValuationError
from .homological import JordanMatrix, apply_lstar, assemble, kernel_basis, solve_homogeneous
from .spectral import EigenData, TailCertificate, certify_tail_nonresonant, resonance_lattice


def _has_y(k) -> bool:
    return any(k[1:])


@dataclass(frozen=True)
class VectorField:
    """x1' = f1(x), y' = B y + g(x) with the linear part 0 (+) B.

    ``f1`` may carry degree-1 terms in y (a coupling row of the linear
    part) so that the curve and straightening routines accept fields such
    as x1' = x2 - x1^2; the integral construction rejects them.
    """

    B: JordanMatrix
    f1: TruncSeries
    g: tuple
    order: int
    certificate: TailCertificate | None = field(default=None, compare=False)

    def __post_init__(self):
        g = tuple(self.g)
        object.__setattr__(self, "g", g)
        n = self.B.size + 1
        if len(g) != n - 1:
            raise ValueError(f"expected {n - 1} tail components, got {len(g)}")
        for s in (self.f1,) + g:
            if s.nvars != n:
                raise ValueError(f"component has {s.nvars} variables, expected {n}")
        for i, s in enumerate(g):
            if s.valuation < 2:
                raise ValuationError(f"g component {i + 2} has terms of degree < 2")
        if self.f1.valuation < 1:
            raise ValuationError("f1 has a constant term")
        if any(not _has_y(k) for k in self.f1.part(1)):
            raise ValuationError("f1 has a linear x1 term; the leading eigenvalue must be 0")

    @property
    def n(self) -> int:
        return self.B.size + 1

    @property
    def eigen(self) -> EigenData:
        return EigenData((Fraction(0),) + self.B.diag)

    @property
    def f1_linear(self) -> HomogPoly:
        return HomogPoly(self.n, 1, dict(self.f1.part(1)))

    @property
    def components(self) -> tuple:
        return (self.f1,) + self.g

    @property
    def straightened(self) -> bool:
        """True when f1 and g vanish identically on y = 0 (through the truncation)."""
        return all(_has_y(k) for s in self.components for k, _ in s.items())

    @property
    def exact(self) -> bool:
        if any(isinstance(d, Ball) for d in self.B.diag):
            return False
        return not any(isinstance(c, Ball) for s in self.components for _, c in s.items())

    def with_certificate(self, cert: TailCertificate) -> "VectorField":
        return VectorField(self.B, self.f1, self.g, self.order, cert)


@dataclass(frozen=True)
class FirstIntegralResult:
    H: TruncSeries
    leading_degree: int
    leading_coefficient: object
    free_constants: dict
    residual_valuation: float
    sup_norms: dict  # degree -> float, max |coefficient|

    @property
    def order(self) -> int:
        return self.H.order

    def part(self, d: int) -> HomogPoly:
        return HomogPoly(self.H.nvars, d, dict(self.H.part(d)))


def _tail_certificate(vf: VectorField, degree: int) -> TailCertificate:
    cert = vf.certificate
    if cert is None or cert.cap < degree:
        cert = certify_tail_nonresonant(vf.B.diag, degree)
    if not cert.certified:
        raise ResonantTail(f"<lambda*, m*> = 0 for m* = {cert.counterexample}")
    return cert


def leading_kernel(vf: VectorField, m: int) -> list[HomogPoly]:
    """Degree-m solutions of L*(H_m) = 0."""
    _tail_certificate(vf, max(m, 1))
    out = []
    for r in range(m + 1):
        out.extend(kernel_basis(assemble(vf.B, m - r, r)))
    return out


def _rhs_degree(vf: VectorField, dparts: list[dict], d: int) -> dict:
    """-[f1 dH/dx1 + <g, dH/dy>]_d from the derivative parts known so far."""
    out: dict = {}
    for comp, der in zip(vf.components, dparts):
        for j, pf in ((j, comp._parts[j]) for j in comp._parts if j >= 2):
            pd = der.get(d - j)
            if pd:
                _conv_into(pf, pd, out)
    return {k: -c for k, c in _clean(out).items()}


def _derivative_parts(n: int, part: dict) -> list[dict]:
    out = [dict() for _ in range(n)]
    for k, c in part.items():
        for i, e in enumerate(k):
            if e:
                nk = k[:i] + (e - 1,) + k[i + 1:]
                out[i][nk] = c * e
    return out


def build_first_integral(vf: VectorField, N: int | None = None, m: int = 1, a_m=Fraction(1)) -> FirstIntegralResult:
    """Formal first integral H = a_m x1^m + ... exact through degree N."""
    N = vf.order if N is None else N
    if N > vf.order:
        raise ValueError(f"degree {N} exceeds the field truncation {vf.order}")
    if m < 1 or N < m:
        raise ValueError("need 1 <= m <= N")
    if vf.f1_linear:
        raise ValuationError("f1 has linear terms; straighten the field first")
    if not vf.straightened:
        raise NotStraightened("f1 or g does not vanish on y = 0")
    _tail_certificate(vf, N)
    kernel = leading_kernel(vf, m)
    lead = (m,) + (0,) * (vf.n - 1)
    if not any(set(p.terms) == {lead} for p in kernel):
        raise ResonantTail(f"kernel at degree {m} is not spanned by x1^{m}")
    n = vf.n
    parts = {m: {lead: a_m}}
    dparts: list[dict] = [dict() for _ in range(n)]
    for i, p in enumerate(_derivative_parts(n, parts[m])):
        if p:
            dparts[i][m - 1] = p
    free = {}
    for d in range(m + 1, N + 1):
        rhs = _rhs_degree(vf, dparts, d)
        bad = [k for k in rhs if not _has_y(k)]
        if bad:
            raise BadRhs(f"rhs at degree {d} contains pure x1 monomial {bad[0]}; field violates f|_(y=0) = 0")
        sol = solve_homogeneous(vf.B, HomogPoly(n, d, rhs))
        free[d] = Fraction(0)
        if sol:
            parts[d] = dict(sol.items())
            for i, p in enumerate(_derivative_parts(n, parts[d])):
                if p:
                    dparts[i][d - 1] = p
    H = TruncSeries._trusted(n, N, parts)
    res = residual(vf, H, N)
    return FirstIntegralResult(
        H=H,
        leading_degree=m,
        leading_coefficient=a_m,
        free_constants=free,
        residual_valuation=res.valuation,
        sup_norms={d: max(abs(float(c)) for c in p.values()) for d, p in sorted(parts.items())},
    )


def residual(vf: VectorField, H: TruncSeries, N: int | None = None) -> TruncSeries:
    """f1 dH/dx1 + <By + g, dH/dy> truncated to degree N."""
    if H.nvars != vf.n:
        raise ValueError("H and the field disagree on dimension")
    N = min(H.order, vf.order) if N is None else N
    n = vf.n
    out: dict[int, dict] = {}
    for d in range(N + 1):
        lin = apply_lstar(vf.B, HomogPoly(n, d, dict(H.part(d)))) if H.part(d) else None
        acc = dict(lin.items()) if lin else {}
        out[d] = acc
    dparts = [dict() for _ in range(n)]
    for d in H.degrees:
        for i, p in enumerate(_derivative_parts(n, dict(H.part(d)))):
            if p:
                dparts[i][d - 1] = p
    for comp, der in zip(vf.components, dparts):
        for j, pf in comp._parts.items():
            for dd, pd in der.items():
                if j + dd <= N:
                    _conv_into(pf, pd, out[j + dd])
    return TruncSeries._trusted(n, N, {d: _clean(p) for d, p in out.items()})


@dataclass(frozen=True)
class NonintegrabilityReport:
    eigenvalues: tuple
    order: int
    divisors: tuple  # DegreeBound per degree 1..order
    kernels_trivial: bool


def nonintegrability_report(eig: EigenData | Sequence, N: int) -> NonintegrabilityReport:
    """Certify that h -> <grad h, Ax> has trivial kernel in every degree 1..N."""
    values = eig.values if isinstance(eig, EigenData) else tuple(eig)
    if all(not isinstance(v, Ball) or v.is_exact() for v in values):
        lat = resonance_lattice(values, N)
        if lat:
            raise ResonantSpectrum(f"resonant lattice point {lat.points[0]}: nonintegrability does not apply")
    cert = certify_tail_nonresonant(values, N)
    if not cert.certified:
        raise ResonantSpectrum(f"resonant lattice point {cert.counterexample}")
    return NonintegrabilityReport(tuple(values), N, cert.bounds, all(b.lower_bound > 0 for b in cert.bounds))


def nonresonant_shape_violations(H: TruncSeries, eig: EigenData, leading: tuple) -> list:
    """Monomials of H other than ``leading`` that are resonant (should be empty)."""
    lam = eig.values
    bad = []
    for k, _ in H.items():
        if k == leading:
            continue
        total = Fraction(0)
        for e, v in zip(k, lam):
            if e:
                total = total + e * v
        if not total:
            bad.append(k)
    return bad
