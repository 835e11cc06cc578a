"""Liouville small divisors and the divergent counterexample.

The constant is zeta = sum_k 2**-a_k with a_1 = 2, a_{k+1} = (k+1) 2**a_k.
With q_k = 2**a_k and p_k = q_k * sum_{j<=k} 2**-a_j the divisor

    |p_k - q_k zeta| = 2**(a_k - a_{k+1}) (1 + eps),  0 <= eps <= 2**(1 - gap),

where gap = a_{k+2} - a_{k+1}, decays much faster than the (2/3)**s
coefficient law of the counterexample can compensate.  a_4 has about 770
bits and 2**a_4 cannot be formed, so anything at k = 3 is done with exact
integer exponents and mpmath intervals on logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import iv

from .algebra import Ball, TruncSeries, iv_precision, log2_abs, sign_of, with_precision_retry
from .errors import ScheduleOverflow
from .homological import JordanMatrix
from .integralforge import VectorField

MATERIALIZE_CAP = 4
DEFAULT_K = 3


class LiouvilleSchedule:
    """Exponents a_1 = 2, a_{k+1} = (k+1) * 2**a_k.

    ``exponent(k)`` is an int for k <= 4 and a symbolic pair ``(k, a_{k-1})``
    meaning k * 2**a_{k-1} beyond that.
    """

    def __init__(self, cap: int = MATERIALIZE_CAP):
        if not 1 <= cap <= MATERIALIZE_CAP:
            raise ScheduleOverflow(f"materialization cap must lie in 1..{MATERIALIZE_CAP}")
        self.cap = cap
        a = [2]
        for k in range(1, cap):
            a.append((k + 1) << a[-1])
        self._a = tuple(a)

    def exponent(self, k: int):
        if k < 1:
            raise ValueError("schedule index starts at 1")
        if k <= self.cap:
            return self._a[k - 1]
        return (k, self.exponent(k - 1))

    def is_materialized(self, k: int) -> bool:
        return 1 <= k <= self.cap

    def gap_lower_bound(self, k: int) -> int:
        """An integer G <= a_{k+1} - a_k; exact when both exponents are materialized."""
        if k + 1 <= self.cap:
            return self._a[k] - self._a[k - 1]
        if k <= self.cap:
            # a_{k+1} = (k+1) 2**a_k >= 2 a_k, so the gap is at least a_k
            return self._a[k - 1]
        raise ScheduleOverflow(f"a_{k} is symbolic; no integer gap bound is kept")

    def __repr__(self) -> str:
        return f"LiouvilleSchedule(cap={self.cap})"


@dataclass(frozen=True)
class LiouvilleInstance:
    k: int
    p: int
    q: int
    # |zeta - p/q| lies in 2**-err_exponent * [1, 1 + 2**(1 - gap)]
    err_exponent: int
    gap: int
    bound_exponent: int  # q**-k = 2**-bound_exponent

    @property
    def holds(self) -> bool:
        # 2**-e (1 + 2**(1-gap)) < 2**(1-e) <= 2**-(k a_k) needs e - 1 >= k a_k
        return self.gap >= 2 and self.err_exponent - 1 >= self.bound_exponent


@dataclass(frozen=True)
class CertifiedZeta:
    """zeta enclosed as the dyadic partial sum through K plus a tail radius."""

    schedule: LiouvilleSchedule
    K: int
    ball: Ball
    instances: tuple

    @property
    def midpoint(self) -> Fraction:
        return self.ball.mid

    @property
    def radius_exponent(self) -> int:
        """The radius is 2**radius_exponent."""
        r, e = self.ball.rad_dyadic
        return e + r.bit_length() - 1

    def __neg__(self) -> Ball:
        return -self.ball


def _partial_sum(a: Sequence[int]) -> tuple[int, int]:
    """sum 2**-a_j as (mantissa, exponent)."""
    top = a[-1]
    return sum(1 << (top - x) for x in a), -top


def liouville_instance(schedule: LiouvilleSchedule, k: int) -> LiouvilleInstance:
    if k + 1 > schedule.cap:
        raise ScheduleOverflow(f"instance k={k} needs a_{k + 1} materialized")
    a = [schedule.exponent(j) for j in range(1, k + 1)]
    q = 1 << a[-1]
    p, _ = _partial_sum(a)
    return LiouvilleInstance(
        k=k,
        p=p,
        q=q,
        err_exponent=schedule.exponent(k + 1),
        gap=schedule.gap_lower_bound(k + 1),
        bound_exponent=k * a[-1],
    )


def liouville_zeta(schedule: LiouvilleSchedule | None = None, K: int = DEFAULT_K) -> CertifiedZeta:
    """Enclose zeta by sum_{k<=K} 2**-a_k +/- 2 * 2**-a_{K+1}."""
    schedule = schedule or LiouvilleSchedule()
    if K < 1:
        raise ValueError("K must be at least 1")
    if K + 1 > schedule.cap:
        raise ScheduleOverflow(f"K={K} needs a_{K + 1}; the materialization cap is {schedule.cap}")
    a = [schedule.exponent(j) for j in range(1, K + 1)]
    m, e = _partial_sum(a)
    ball = Ball(m, e, 1, 1 - schedule.exponent(K + 1))
    instances = tuple(liouville_instance(schedule, k) for k in range(1, K + 1))
    for inst in instances:
        if not inst.holds:
            raise AssertionError(f"Liouville inequality fails at k={inst.k}")
    return CertifiedZeta(schedule, K, ball, instances)


def _zeta_ball(zeta) -> Ball:
    return zeta.ball if isinstance(zeta, CertifiedZeta) else Ball.from_value(zeta)


def coefficient_law(s: int) -> Fraction:
    """(1/s) (2/3)**s, the magnitude of every degree-s monomial of f1."""
    return Fraction(2**s, s * 3**s)


def counterexample_field(zeta, N: int) -> VectorField:
    """x1' = f1(y) with every y-monomial of degree 2..N, y' = diag(1, -zeta) y."""
    if N < 2:
        raise ValueError("N must be at least 2")
    parts = {}
    for s in range(2, N + 1):
        c = coefficient_law(s)
        parts[s] = {(0, s - j, j): c for j in range(s + 1)}
    f1 = TruncSeries._trusted(3, N, parts)
    zero = TruncSeries.zero(3, N)
    B = JordanMatrix((Fraction(1), -_zeta_ball(zeta)))
    return VectorField(B, f1, (zero, zero), N)


def _h2_one(zb: Ball, m: int, a_m, mstar):
    m2, m3 = mstar
    c = -m * Fraction(a_m) * coefficient_law(m2 + m3)
    if m3 == 0:
        return c / m2
    div = m2 - m3 * zb
    sign_of(div)
    return c / div


def h2_coefficients(zeta, m: int = 1, a_m=Fraction(1), mstars: Iterable = ()) -> list:
    """Closed-form coefficients of x1^(m-1) y^m* in H, one per m* = (m2, m3).

    Exact rationals when m3 = 0, certified balls otherwise.
    """
    zb = _zeta_ball(zeta)
    out = []
    for ms in mstars:
        ms = tuple(int(v) for v in ms)
        if len(ms) != 2 or min(ms) < 0 or sum(ms) < 2:
            raise ValueError(f"m* must be a pair of total degree >= 2, got {ms}")
        out.append(with_precision_retry(_h2_one, zb, m, a_m, ms))
    return out


def _log2_iv(x):
    if isinstance(x, Ball) or isinstance(x, (int, Fraction)):
        return log2_abs(x)
    return iv.log(abs(x)) / iv.log(2)


def root_norms(data, degrees: Iterable[int] | None = None, prec: int = 128) -> dict:
    """r_d = (max_{|alpha|=d} |c_alpha|)**(1/d) as mpmath intervals.

    ``data`` is a TruncSeries or a mapping degree -> iterable of scalars.
    Degrees with no nonzero coefficient get r_d = 0.
    """
    if isinstance(data, TruncSeries):
        groups = {d: [c for _, c in data.part(d).items()] for d in data.degrees}
        if degrees is None:
            degrees = range(1, data.order + 1)
    else:
        groups = {int(d): list(v) for d, v in data.items()}
        if degrees is None:
            degrees = sorted(groups)
    degrees = list(degrees)
    if not degrees:
        raise ValueError("no degrees requested")
    out = {}
    with iv_precision(prec):
        for d in degrees:
            if d < 1:
                raise ValueError("root norms are defined for d >= 1")
            vals = [c for c in groups.get(d, ()) if c]
            if not vals:
                out[d] = iv.mpf(0)
                continue
            logs = [with_precision_retry(_log2_iv, c) for c in vals]
            best = logs[0]
            for lg in logs[1:]:
                best = iv.mpf([max(best.a, lg.a), max(best.b, lg.b)])
            out[d] = iv.exp(best / d * iv.log(2))
    return out


@dataclass(frozen=True)
class DivergenceRecord:
    k: int
    p: int
    q_exponent: int  # q = 2**q_exponent
    degree: int
    # divisor |p - q zeta| = 2**divisor_exponent * (1 + eps), 0 <= eps <= 2**(1 - gap)
    divisor_exponent: int
    gap: int
    log2_coefficient: object  # mpmath interval
    log2_root_norm: object  # mpmath interval
    maximal: bool | None  # m* attains the degree maximum (None: not checked)


@dataclass(frozen=True)
class DivergenceCertificate:
    m: int
    records: tuple

    @property
    def increasing(self) -> bool:
        return all(a.log2_root_norm.b < b.log2_root_norm.a for a, b in zip(self.records, self.records[1:]))


def _check_maximal(zb: Ball, d: int, m3_star: int) -> bool:
    """Does m3 = m3_star minimise |m2 - m3 zeta| over m2 + m3 = d?"""

    def attempt():
        best = abs(d - m3_star - m3_star * zb)
        for m3 in range(d + 1):
            if m3 == m3_star:
                continue
            if sign_of(abs(d - m3 - m3 * zb) - best) <= 0:
                return False
        return True

    return with_precision_retry(attempt)


def divergence_certificate(
    schedule: LiouvilleSchedule | None = None,
    kmax: int = 3,
    m: int = 1,
    check_degree: int = 1000,
) -> DivergenceCertificate:
    """log2 r_d along the subsequence d_k = p_k + q_k + m - 1.

    The coefficient at m* = (p_k, q_k) is m (1/s)(2/3)**s / |p_k - q_k zeta|
    with s = p_k + q_k; it is evaluated as a log2 interval using only the
    integer exponents a_k, a_{k+1} and the gap bound for eps.  For degrees
    up to ``check_degree`` the record also confirms that this m* carries the
    largest coefficient of its degree, so the value is r_d itself; beyond
    that it is a certified lower bound for r_d.
    """
    schedule = schedule or LiouvilleSchedule()
    if kmax < 1 or kmax + 1 > schedule.cap:
        raise ScheduleOverflow(f"kmax={kmax} needs a_{kmax + 1} materialized (cap {schedule.cap})")
    zb = None
    records = []
    for k in range(1, kmax + 1):
        a = [schedule.exponent(j) for j in range(1, k + 1)]
        ak, ak1 = a[-1], schedule.exponent(k + 1)
        p, _ = _partial_sum(a)
        q = 1 << ak
        s = p + q
        d = s + m - 1
        gap = schedule.gap_lower_bound(k + 1)
        div_exp = ak - ak1
        prec = max(128, s.bit_length() + 128)
        with iv_precision(prec):
            log2 = iv.log(2)
            eps_hi = iv.mpf(2) ** (1 - min(gap, 8 * prec))
            log_eps = iv.mpf([0, (iv.log(1 + eps_hi) / log2).b])
            log_c = iv.log(iv.mpf(m) / s) / log2 + s * (iv.log(iv.mpf(2) / 3) / log2)
            log_coeff = log_c - div_exp - log_eps
            log_r = log_coeff / d
        maximal = None
        if d <= check_degree:
            if zb is None:
                zb = liouville_zeta(schedule, min(schedule.cap - 1, DEFAULT_K)).ball
            maximal = _check_maximal(zb, s, q)
        records.append(DivergenceRecord(k, p, ak, d, div_exp, gap, log_coeff, log_r, maximal))
    cert = DivergenceCertificate(m, tuple(records))
    if not cert.increasing:
        raise AssertionError("log2 root norms along the subsequence are not strictly increasing")
    return cert


def subsequence_degrees(schedule: LiouvilleSchedule | None = None, kmax: int = 2, m: int = 1) -> list[int]:
    schedule = schedule or LiouvilleSchedule()
    out = []
    for k in range(1, kmax + 1):
        a = [schedule.exponent(j) for j in range(1, k + 1)]
        out.append(_partial_sum(a)[0] + (1 << a[-1]) + m - 1)
    return out


def root_norm_profile(zeta, max_degree: int = 40, m: int = 1, a_m=Fraction(1)) -> dict:
    """r_d of the x1^(m-1) y^m* block of H for d = 2..max_degree (closed form)."""
    data = {}
    for s in range(2, max_degree - m + 2):
        mstars = [(s - j, j) for j in range(s + 1)]
        data[s + m - 1] = h2_coefficients(zeta, m, a_m, mstars)
    return root_norms(data)
