"""Command line front end: ``firstint <command> [system-file] [options]``.

Exit codes: 0 success, 2 mathematical obstruction, 1 usage or parse error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from fractions import Fraction

from . import __version__
from .algebra import Ball, format_scalar, iv_precision, working_precision
from .errors import FirstIntError, IsolatedSingularPoint, Obstruction, RadiusExceeded
from .integralforge import build_first_integral, nonintegrability_report
from .locus import nonisolated_check, solve_curve, straighten
from .spectral import DEFAULT_CAP, EigenData, certify_tail_nonresonant, resonance_lattice
from .sysfile import SystemFile, from_vector_field, parse_system, serialize

COMMANDS = (
    "resonance",
    "curve",
    "check-nonisolated",
    "straighten",
    "integral",
    "nonint",
    "counterexample",
    "certify-divergence",
    "verify",
)


class Report:
    """``key = value`` lines in a [result] section, then a [timing] section."""

    def __init__(self, command: str, digest: str | None, prefix: str = ""):
        self.command = command
        self.digest = digest
        self.prefix = prefix
        self.lines: list[str] = []
        self.seconds = 0.0

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key} = {value}")

    def raw(self, line: str) -> None:
        self.lines.append(line)

    def series(self, name: str, H) -> None:
        for d in H.degrees:
            for k, c in sorted(H.part(d).items(), reverse=True):
                self.raw(f"{name}[{d}]: ({','.join(map(str, k))}) -> {format_scalar(c)}")

    def render(self) -> str:
        p = self.prefix
        out = [f"{p}[report]", f"{p}command = {self.command}", f"{p}version = {__version__}"]
        if self.digest:
            out.append(f"{p}input_sha256 = {self.digest}")
        out.append(f"{p}[result]")
        out.extend(p + ln for ln in self.lines)
        out.append(f"{p}[timing]")
        out.append(f"{p}seconds = {self.seconds:.6f}")
        return "\n".join(out) + "\n"


def result_section(text: str) -> str:
    """Everything before the [timing] marker; this part is deterministic."""
    keep = []
    for line in text.splitlines():
        if line.lstrip("# ").startswith("[timing]"):
            break
        keep.append(line)
    return "\n".join(keep) + "\n"


def _fmt_iv(x) -> str:
    b = Ball.from_iv(x)
    return f"{b.dyadic_str()} (~{float(x.mid):.6g})"


def _log2_upper(b: Ball):
    """An integer k with |x| < 2**k for every x in the ball, or None for exact zero."""
    (m, e), (r, re_) = b.mid_dyadic, b.rad_dyadic
    tops = [abs(m).bit_length() + e if m else None, r.bit_length() + re_ if r else None]
    tops = [t for t in tops if t is not None]
    return max(tops) + 1 if tops else None


def _digest(sf: SystemFile | None, args) -> str | None:
    if sf is None:
        return None
    flags = f"degree={args.degree} cap={args.cap} kmax={args.kmax} precision={args.precision}"
    return hashlib.sha256((serialize(sf) + flags).encode()).hexdigest()


def _degree(sf: SystemFile | None, args, default: int = 12) -> int:
    if args.degree is not None:
        return args.degree
    return sf.N if sf is not None else default


def _need(sf, command):
    if sf is None:
        raise FirstIntError(f"{command} needs a system file")
    return sf


def _curve_lines(rep: Report, curve) -> None:
    for i, s in enumerate(curve.phi):
        if not s:
            rep.add(f"phi{i + 2}", "0")
        for d in s.degrees:
            rep.add(f"phi{i + 2}[{d}]", format_scalar(s.coeff((d,))))


def _straightened(sf: SystemFile, N: int, rep: Report):
    vf = sf.vector_field(N)
    if vf.straightened:
        rep.add("straightened_input", "true")
        return vf
    rep.add("straightened_input", "false")
    curve = solve_curve(vf, N)
    verdict = nonisolated_check(vf, curve, N)
    if not verdict:
        rep.add("verdict", "isolated")
        rep.add("witness_degree", verdict.degree)
        rep.add("witness_coefficient", format_scalar(verdict.coefficient))
        raise IsolatedSingularPoint(verdict.degree, verdict.coefficient)
    return straighten(vf, curve, N)


def cmd_resonance(sf, args, rep):
    sf = _need(sf, "resonance")
    cap = args.cap if args.cap is not None else DEFAULT_CAP
    lam = sf.eigenvalues()
    rep.add("cap", cap)
    if EigenData(lam).exact:
        lat = resonance_lattice(lam, cap)
        rep.add("lattice_size", len(lat.points))
        for pt in lat.points:
            rep.add("point", "(" + ",".join(map(str, pt)) + ")")
        return
    if lam[0] != 0:
        raise FirstIntError("an inexact spectrum is only handled with a leading zero eigenvalue")
    cert = certify_tail_nonresonant(lam[1:], cap)
    rep.add("tail_certified", str(cert.certified).lower())
    rep.add("lattice_size", cap if cert.certified else "unknown")
    if cert.certified:
        for k in range(1, cap + 1):
            rep.add("point", "(" + ",".join(map(str, (k,) + (0,) * (len(lam) - 1))) + ")")
    for b in cert.bounds:
        rep.add(f"tail_min_divisor[{b.degree}]", format_scalar(b.value))


def cmd_curve(sf, args, rep):
    sf = _need(sf, "curve")
    N = _degree(sf, args)
    curve = solve_curve(sf.vector_field(N), N)
    rep.add("degree", N)
    _curve_lines(rep, curve)


def cmd_check_nonisolated(sf, args, rep):
    sf = _need(sf, "check-nonisolated")
    N = _degree(sf, args)
    vf = sf.vector_field(N)
    curve = solve_curve(vf, N)
    verdict = nonisolated_check(vf, curve, N)
    rep.add("degree", N)
    _curve_lines(rep, curve)
    if verdict:
        rep.add("verdict", "nonisolated")
        return
    rep.add("verdict", "isolated")
    rep.add("witness_degree", verdict.degree)
    rep.add("witness_coefficient", format_scalar(verdict.coefficient))
    raise IsolatedSingularPoint(verdict.degree, verdict.coefficient)


def cmd_straighten(sf, args, rep):
    sf = _need(sf, "straighten")
    N = _degree(sf, args)
    rep.add("degree", N)
    out = _straightened(sf, N, rep)
    options = dict(sf.options)
    options["N"] = N
    rep.prefix = "# "
    rep.body = serialize(from_vector_field(out, sf.eigen, options))


def cmd_integral(sf, args, rep):
    sf = _need(sf, "integral")
    N = _degree(sf, args)
    vf = _straightened(sf, N, rep)
    res = build_first_integral(vf, N)
    rep.add("degree", N)
    rep.add("leading_degree", res.leading_degree)
    rep.add("leading_coefficient", format_scalar(res.leading_coefficient))
    rep.add("free_constants", "0")
    rv = res.residual_valuation
    rep.add("residual_valuation", "inf" if rv == float("inf") else int(rv))
    rep.add("residual_valuation_exceeds_degree", str(rv > N).lower())
    rep.series("H", res.H)


def cmd_nonint(sf, args, rep):
    sf = _need(sf, "nonint")
    N = _degree(sf, args)
    report = nonintegrability_report(sf.eigenvalues(), N)
    rep.add("degree", N)
    rep.add("kernels_trivial", str(report.kernels_trivial).lower())
    for b in report.divisors:
        rep.add(f"min_divisor[{b.degree}]", format_scalar(b.value))


def cmd_counterexample(sf, args, rep):
    from .integralforge import residual
    from .smalldiv import DEFAULT_K, counterexample_field, h2_coefficients, liouville_zeta, root_norms

    N = _degree(sf, args)
    K = DEFAULT_K
    if sf is not None:
        zetas = [e for e in sf.eigen if not isinstance(e, Fraction)]
        if len(zetas) != 1 or zetas[0].sign > 0 or sf.eigen[:2] != (0, 1):
            raise FirstIntError("counterexample expects lambda 0 1 -zeta(K=k)")
        K = zetas[0].K
    zeta = liouville_zeta(K=K)
    vf = counterexample_field(zeta, N)
    if sf is not None:
        given = sf.vector_field(N)
        if given.components != vf.components:
            raise FirstIntError("the file's f1 does not follow the (1/s)(2/3)^s coefficient law")
    rep.add("K", K)
    rep.add("zeta", zeta.ball.dyadic_str())
    rep.add("degree", N)
    res = build_first_integral(vf, N)
    enclosed = all(Ball.from_value(c).contains(0) for _, c in residual(vf, res.H, N).items())
    rep.add("residual_encloses_zero_through_degree", str(enclosed).lower())
    worst = None
    for d in range(2, N + 1):
        mstars = [(d - j, j) for j in range(d + 1)]
        closed = h2_coefficients(zeta, 1, 1, mstars)
        for ms, c in zip(mstars, closed):
            got = res.H.coeff((0,) + ms)
            u = _log2_upper(Ball.from_value(got) - Ball.from_value(c))
            if u is not None:
                worst = u if worst is None else max(worst, u)
    rep.add("crosscheck_log2_deviation_bound", "exact" if worst is None else worst)
    for d, r in root_norms(res.H).items():
        if d >= 2:
            rep.add(f"root_norm[{d}]", f"{float(r.mid):.6f}")
    rep.series("H", res.H)


def cmd_certify_divergence(sf, args, rep):
    from .smalldiv import divergence_certificate

    kmax = args.kmax if args.kmax is not None else 3
    cert = divergence_certificate(kmax=kmax)
    rep.add("kmax", kmax)
    rep.add("increasing", str(cert.increasing).lower())
    for r in cert.records:
        deg = str(r.degree) if r.degree.bit_length() <= 64 else f"~2^{r.degree.bit_length() - 1}"
        rep.add(f"k[{r.k}].degree", deg)
        rep.add(f"k[{r.k}].q", f"2^{r.q_exponent}")
        rep.add(f"k[{r.k}].divisor", f"2^({r.divisor_exponent}) * (1 + eps)")
        rep.add(f"k[{r.k}].eps_upper", f"2^({1 - r.gap})")
        rep.add(f"k[{r.k}].log2_coefficient", _fmt_iv(r.log2_coefficient))
        rep.add(f"k[{r.k}].log2_root_norm", _fmt_iv(r.log2_root_norm))
        rep.add(f"k[{r.k}].maximal_in_degree", "unchecked" if r.maximal is None else str(r.maximal).lower())


def cmd_verify(sf, args, rep):
    import numpy as np

    from . import dynlab

    sf = _need(sf, "verify")
    N = _degree(sf, args)
    rep.add("float_backend", dynlab.get_backend())
    vf0 = sf.vector_field(N)
    curve = solve_curve(vf0, N)
    ff0 = dynlab.FloatField.from_vector_field(vf0, radius=1.0)
    rep.add("curve_scan_residual", repr(dynlab.curve_equilibrium_scan(ff0, curve, 101, args.radius)))
    vf = _straightened(sf, N, rep)
    H = build_first_integral(vf, N).H
    ff = dynlab.FloatField.from_vector_field(vf, radius=1.0)
    direction = np.ones(vf.n) / np.sqrt(vf.n)
    rep.add("degree", N)
    rep.add("radius", repr(args.radius))
    rep.add("time", repr(args.time))
    rep.add("step", repr(args.step))
    drifts = []
    for r in (args.radius, args.radius / 2):
        try:
            traj = dynlab.integrate(ff, r * direction, args.time, args.step)
        except RadiusExceeded as exc:
            # unstable directions leave the truncated model; that is a finding, not a failure
            rep.add("trajectory_exit", f"radius {r!r} left the trust region at step {exc.step}")
            return
        drifts.append(dynlab.conservation_drift(H, traj))
    rep.add("drift_r", repr(drifts[0]))
    rep.add("drift_r_half", repr(drifts[1]))
    ratio = drifts[0] / drifts[1] if drifts[1] else float("inf")
    rep.add("drift_ratio", repr(ratio))
    rep.add("expected_ratio", 2 ** (N + 1))


HANDLERS = {
    "resonance": cmd_resonance,
    "curve": cmd_curve,
    "check-nonisolated": cmd_check_nonisolated,
    "straighten": cmd_straighten,
    "integral": cmd_integral,
    "nonint": cmd_nonint,
    "counterexample": cmd_counterexample,
    "certify-divergence": cmd_certify_divergence,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("system", nargs="?", help="system file")
    common.add_argument("--degree", type=int, help="truncation degree N (default: file option or 12)")
    common.add_argument("--cap", type=int, help="degree cap for lattice enumeration")
    common.add_argument("--kmax", type=int, help="largest Liouville index for certify-divergence")
    common.add_argument("--threads", type=int, help="numba threads for float kernels (default: all cores)")
    common.add_argument("--precision", type=int, help="starting ball precision in bits")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--radius", type=float, default=0.1, help="verify: initial radius")
    common.add_argument("--time", type=float, default=5.0, help="verify: horizon T")
    common.add_argument("--step", type=float, default=1e-3, help="verify: RK4 step h")
    parser = _Parser(prog="firstint", description="Formal first integrals near a zero eigenvalue.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(command: str, sf: SystemFile | None, args) -> tuple[str, int]:
    """Execute one command; returns (report text, exit code)."""
    rep = Report(command, _digest(sf, args))
    rep.body = None
    code = 0
    start = time.perf_counter()
    prec = args.precision or (sf.precision if sf is not None else None)
    try:
        if prec:
            with working_precision(prec), iv_precision(max(prec, 53)):
                HANDLERS[command](sf, args, rep)
        else:
            HANDLERS[command](sf, args, rep)
    except Obstruction as exc:
        rep.add("obstruction", type(exc).__name__)
        rep.add("message", str(exc))
        code = 2
    rep.seconds = time.perf_counter() - start
    text = rep.render()
    if rep.body is not None and code == 0:
        head, _, timing = text.rpartition("# [timing]")
        text = head + rep.body + "# [timing]" + timing
    return text, code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads:
            from .dynlab import set_threads

            set_threads(args.threads)
        sf = None
        if args.system:
            with open(args.system, encoding="utf-8") as fh:
                sf = parse_system(fh.read())
        text, code = run(args.command, sf, args)
    except (FirstIntError, OSError, ValueError) as exc:
        print(f"firstint: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, Obstruction) else 1
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code:
        print(f"firstint: obstruction: {text.split('message = ', 1)[-1].splitlines()[0]}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
