"""The singular curve y = phi(x1), the non-isolation test and straightening."""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import TruncSeries, compose, diff, mul, sign_of, with_precision_retry
from .errors import CurveNotInvariant, SingularB
from .integralforge import VectorField


@dataclass(frozen=True)
class SeriesCurve:
    """phi_2(x1), ..., phi_n(x1) as univariate series with valuation >= 2."""

    phi: tuple
    order: int

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        for s in self.phi:
            if s.nvars != 1:
                raise ValueError("curve components must be univariate")
            if s.valuation < 2:
                raise ValueError("curve components must have valuation >= 2")

    def coefficient(self, i: int, d: int):
        return self.phi[i].coeff((d,))

    def lifted(self, n: int) -> list[TruncSeries]:
        """Each phi_i as a series in n variables depending on x1 only."""
        return [_lift(s, n, self.order) for s in self.phi]


def _lift(s: TruncSeries, n: int, order: int) -> TruncSeries:
    pad = (0,) * (n - 1)
    return TruncSeries._trusted(n, order, {d: {k + pad: c for k, c in s.part(d).items()} for d in s.degrees})


def _check_invertible(vf: VectorField) -> None:
    for lam in vf.B.diag:
        if with_precision_retry(sign_of, lam) == 0:
            raise SingularB("B has a zero eigenvalue; the implicit solve does not apply")


def solve_curve(vf: VectorField, N: int | None = None) -> SeriesCurve:
    """Solve B phi + g(x1, phi) = 0 degree by degree: phi_d = -B^{-1} [g(x1, phi_<d)]_d."""
    N = vf.order if N is None else N
    if N > vf.order:
        raise ValueError(f"degree {N} exceeds field truncation {vf.order}")
    _check_invertible(vf)
    k = vf.n - 1
    x1 = TruncSeries.variable(1, 0, N)
    coeffs: list[dict] = [dict() for _ in range(k)]
    for d in range(2, N + 1):
        phi = [TruncSeries(1, N, c) for c in coeffs]
        w = []
        for g in vf.g:
            G = compose(g, [x1] + phi, d)
            w.append(-G.coeff((d,)))
        z = vf.B.solve(w)
        for i, c in enumerate(z):
            if c:
                coeffs[i][(d,)] = c
    return SeriesCurve(tuple(TruncSeries(1, N, c) for c in coeffs), N)


@dataclass(frozen=True)
class NonIsolationVerdict:
    nonisolated: bool
    order: int
    degree: int | None = None  # first degree where f1(x1, phi(x1)) is nonzero
    coefficient: object = None

    def __bool__(self) -> bool:
        return self.nonisolated


def restricted_f1(vf: VectorField, curve: SeriesCurve, N: int | None = None) -> TruncSeries:
    N = min(vf.order, curve.order) if N is None else N
    return compose(vf.f1, [TruncSeries.variable(1, 0, N)] + [s.truncate(N) for s in curve.phi], N)


def nonisolated_check(vf: VectorField, curve: SeriesCurve, N: int | None = None) -> NonIsolationVerdict:
    """True when f1(x1, phi(x1)) vanishes through degree N; otherwise the first witness."""
    N = min(vf.order, curve.order) if N is None else N
    r = restricted_f1(vf, curve, N)
    if not r:
        return NonIsolationVerdict(True, N)
    d = r.valuation
    return NonIsolationVerdict(False, N, d, r.coeff((d,)))


def straighten(vf: VectorField, curve: SeriesCurve, N: int | None = None) -> VectorField:
    """Push the field forward under u1 = x1, v = y - phi(x1)."""
    N = min(vf.order, curve.order) if N is None else N
    n = vf.n
    lifted = [s.truncate(N) for s in curve.lifted(n)]
    subs = [TruncSeries.variable(n, 0, N)] + [TruncSeries.variable(n, i + 1, N) + lifted[i] for i in range(n - 1)]
    f1 = compose(vf.f1, subs, N)
    g_sub = [compose(g, subs, N) for g in vf.g]
    b_phi = vf.B.apply(lifted)
    out_g = []
    for i in range(n - 1):
        dphi = diff(lifted[i], 0)
        # f1 has valuation >= 1 and dphi is exact through N - 1, so the product is exact through N
        dphi = TruncSeries._trusted(n, N, {d: dict(dphi.part(d)) for d in dphi.degrees})
        out_g.append(b_phi[i] + g_sub[i] - mul(dphi, f1, N))
    for label, s in [("u1'", f1)] + [(f"v{i + 2}'", s) for i, s in enumerate(out_g)]:
        for k, c in s.items():
            if not any(k[1:]):
                raise CurveNotInvariant(f"{label} keeps the term {c} * u1^{k[0]} on v = 0")
    return VectorField(vf.B, f1, tuple(out_g), N)
