"""Line-oriented system files.

::

    # comment lines start with '#'
    system
    vars 3
    lambda 0 -1 -2
    jordan 0 | -1:1 -1
    f1 = 1/2 x1^1 x2^1 + -1 x1^2
    f2 = 1 x1^2
    f3 = 0
    options backend=auto N=12 precision=256

``lambda`` entries are rationals or ``zeta(K=k)`` / ``-zeta(K=k)``.  In the
``jordan`` line, blocks are separated by ``|`` and ``v:1`` puts a 1 on the
superdiagonal linking an entry to the next one of its block.  The
``jordan`` line may be omitted for a diagonal matrix.  The components
``f1..fn`` hold only the nonlinear part (degree >= 2); the linear part is
``0 (+) B`` read from ``lambda``/``jordan``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Ball, TruncSeries, format_scalar
from .errors import NotJordanForm, SystemSyntaxError, ValuationError
from .homological import JordanMatrix
from .integralforge import VectorField

DEFAULT_N = 12
_BACKENDS = ("auto", "exact", "certified")
_RAT = re.compile(r"[+-]?\d+(/\d+)?$")
_ZETA = re.compile(r"([+-]?)zeta\(K=(\d+)\)$")
_VAR = re.compile(r"x(\d+)(?:\^(\d+))?$")
_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class ZetaToken:
    sign: int
    K: int

    def __str__(self) -> str:
        return f"{'-' if self.sign < 0 else ''}zeta(K={self.K})"


@dataclass
class SystemFile:
    nvars: int
    eigen: tuple  # Fraction or ZetaToken per variable
    sup: tuple  # superdiagonal of the full n x n Jordan matrix
    components: tuple  # dict exps -> Fraction, one per variable
    options: dict = field(default_factory=dict)
    comments: tuple = ()

    @property
    def N(self) -> int:
        return int(self.options.get("N", DEFAULT_N))

    @property
    def precision(self) -> int | None:
        p = self.options.get("precision")
        return int(p) if p is not None else None

    @property
    def backend(self) -> str:
        b = self.options.get("backend", "auto")
        if b == "auto":
            return "certified" if any(isinstance(e, ZetaToken) for e in self.eigen) else "exact"
        return b

    def eigenvalues(self) -> tuple:
        """Scalars for the eigenvalues in the selected backend."""
        from .smalldiv import liouville_zeta

        out = []
        for e in self.eigen:
            if isinstance(e, ZetaToken):
                if self.backend == "exact":
                    raise ValueError("zeta eigenvalues need the certified backend")
                z = liouville_zeta(K=e.K).ball
                out.append(-z if e.sign < 0 else z)
            elif self.backend == "certified":
                out.append(Ball.from_value(e))
            else:
                out.append(e)
        return tuple(out)

    def vector_field(self, N: int | None = None) -> VectorField:
        N = self.N if N is None else N
        lam = self.eigenvalues()
        if lam[0] != 0 or (self.sup and self.sup[0]):
            raise NotJordanForm("the first variable must carry a lone zero eigenvalue")
        series = [TruncSeries(self.nvars, N, {k: c for k, c in comp.items() if sum(k) <= N}) for comp in self.components]
        B = JordanMatrix(lam[1:], self.sup[1:])
        return VectorField(B, series[0], tuple(series[1:]), N)


def _err(msg, line, col):
    return SystemSyntaxError(msg, line, col)


def _rational(tok: str, line: int, col: int) -> Fraction:
    if not _RAT.match(tok):
        raise _err(f"expected a rational p/q, got {tok!r}", line, col)
    v = Fraction(tok)
    return v


def _eigen_token(tok: str, line: int, col: int):
    m = _ZETA.match(tok)
    if m:
        return ZetaToken(-1 if m.group(1) == "-" else 1, int(m.group(2)))
    return _rational(tok, line, col)


def _tokens(text: str, offset: int):
    """(token, 1-based column) pairs."""
    return [(m.group(), m.start() + offset + 1) for m in _TOKEN.finditer(text)]


def _parse_poly(text: str, n: int, line: int, offset: int, name: str) -> dict:
    terms: dict = {}
    pos = 0
    for chunk in text.split("+"):
        toks = _tokens(chunk, offset + pos)
        pos += len(chunk) + 1
        if not toks:
            raise _err(f"empty term in {name}", line, offset + pos)
        coeff = _rational(toks[0][0], line, toks[0][1])
        exps = [0] * n
        for tok, col in toks[1:]:
            m = _VAR.match(tok)
            if not m:
                raise _err(f"expected a variable x<i>^<e>, got {tok!r}", line, col)
            i = int(m.group(1))
            if not 1 <= i <= n:
                raise _err(f"variable x{i} outside 1..{n}", line, col)
            exps[i - 1] += int(m.group(2) or 1)
        if not coeff:
            continue
        k = tuple(exps)
        if sum(k) < 2:
            raise ValuationError(f"line {line}: {name} has a term of degree {sum(k)}; nonlinear terms need degree >= 2")
        terms[k] = terms.get(k, Fraction(0)) + coeff
        if not terms[k]:
            del terms[k]
    return terms


def _parse_jordan(text: str, line: int, offset: int):
    diag, sup = [], []
    pos = 0
    for block in text.split("|"):
        toks = _tokens(block, offset + pos)
        pos += len(block) + 1
        if not toks:
            raise _err("empty Jordan block", line, offset + pos)
        for j, (tok, col) in enumerate(toks):
            link = tok.endswith(":1")
            if link:
                tok = tok[:-2]
            last = j == len(toks) - 1
            if link == last:
                raise _err("inside a block every entry but the last needs ':1'", line, col)
            diag.append(_eigen_token(tok, line, col))
            sup.append(1 if link else 0)
    return diag, sup[:-1]


def parse_system(text: str) -> SystemFile:
    nvars = None
    lam = jordan = None
    comps: dict = {}
    options: dict = {}
    comments = []
    seen_header = False
    pending = []
    for ln, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if not seen_header:
                comments.append(stripped)
            continue
        body = raw.split("#", 1)[0].rstrip()
        indent = len(body) - len(body.lstrip())
        body = body.strip()
        head, _, rest = body.partition(" ")
        rest_off = indent + len(head) + 1 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if not seen_header:
            if body != "system":
                raise _err("file must start with 'system'", ln, indent + 1)
            seen_header = True
            continue
        if head == "vars":
            if not re.fullmatch(r"\d+", rest) or int(rest) < 1:
                raise _err("vars expects a positive integer", ln, rest_off + 1)
            nvars = int(rest)
        elif head == "lambda":
            lam = [_eigen_token(t, ln, c) for t, c in _tokens(rest, rest_off)]
        elif head == "jordan":
            jordan = _parse_jordan(rest, ln, rest_off)
        elif head == "options":
            for tok, col in _tokens(rest, rest_off):
                key, eq, val = tok.partition("=")
                if not eq or key not in ("backend", "N", "precision"):
                    raise _err(f"unknown option {tok!r}", ln, col)
                if key == "backend" and val not in _BACKENDS:
                    raise _err(f"backend must be one of {', '.join(_BACKENDS)}", ln, col)
                if key != "backend" and not re.fullmatch(r"\d+", val):
                    raise _err(f"{key} expects a nonnegative integer", ln, col)
                options[key] = val if key == "backend" else int(val)
        elif re.fullmatch(r"f\d+", head):
            m = re.match(r"(f\d+)\s*=\s*", body)
            if not m:
                raise _err("expected 'f<i> = <terms>'", ln, indent + 1)
            i = int(head[1:])
            if i in comps:
                raise _err(f"{head} given twice", ln, indent + 1)
            pending.append((i, body[m.end():], ln, indent + m.end()))
            comps[i] = None
        else:
            raise _err(f"unknown directive {head!r}", ln, indent + 1)
    if not seen_header:
        raise _err("empty system file", 1, 1)
    if nvars is None:
        raise _err("missing 'vars' line", 1, 1)
    if lam is None or len(lam) != nvars:
        raise _err(f"'lambda' must list {nvars} eigenvalues", 1, 1)
    for i, body, ln, off in pending:
        if not 1 <= i <= nvars:
            raise _err(f"component f{i} outside 1..{nvars}", ln, 1)
        comps[i] = _parse_poly(body, nvars, ln, off, f"f{i}")
    missing = [i for i in range(1, nvars + 1) if i not in comps]
    if missing:
        raise _err(f"missing component f{missing[0]}", 1, 1)
    if jordan is None:
        sup = (0,) * (nvars - 1)
    else:
        diag, sup = jordan
        if len(diag) != nvars:
            raise NotJordanForm(f"jordan line has {len(diag)} entries, expected {nvars}")
        if list(diag) != list(lam):
            raise NotJordanForm("jordan diagonal disagrees with lambda")
        for i, s in enumerate(sup):
            if s and lam[i] != lam[i + 1]:
                raise NotJordanForm(f"Jordan chain links unequal eigenvalues at position {i + 1}")
        sup = tuple(sup)
    return SystemFile(nvars, tuple(lam), sup, tuple(comps[i] for i in range(1, nvars + 1)), options, tuple(comments))


def format_term(c, k) -> str:
    mono = " ".join(f"x{i + 1}^{e}" for i, e in enumerate(k) if e)
    return f"{format_scalar(c)} {mono}".rstrip()


def format_poly(terms) -> str:
    """Canonical order: by degree, then descending lex within a degree."""
    items = sorted(terms.items(), key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0])))
    return " + ".join(format_term(c, k) for k, c in items if c) or "0"


def serialize(sf: SystemFile) -> str:
    lines = list(sf.comments)
    lines.append("system")
    lines.append(f"vars {sf.nvars}")
    lines.append("lambda " + " ".join(str(e) for e in sf.eigen))
    if any(sf.sup):
        blocks, cur = [], []
        for i, e in enumerate(sf.eigen):
            link = i < len(sf.sup) and sf.sup[i]
            cur.append(f"{e}:1" if link else str(e))
            if not link:
                blocks.append(" ".join(cur))
                cur = []
        lines.append("jordan " + " | ".join(blocks))
    for i, comp in enumerate(sf.components):
        lines.append(f"f{i + 1} = {format_poly(comp)}")
    if sf.options:
        order = [k for k in ("backend", "N", "precision") if k in sf.options]
        lines.append("options " + " ".join(f"{k}={sf.options[k]}" for k in order))
    return "\n".join(lines) + "\n"


def from_vector_field(vf: VectorField, eigen_tokens=None, options=None, comments=()) -> SystemFile:
    """A system file for an exact-coefficient field; ``eigen_tokens`` keeps zeta entries symbolic."""
    tokens = tuple(eigen_tokens) if eigen_tokens is not None else (Fraction(0),) + tuple(vf.B.diag)
    comps = []
    for s in vf.components:
        terms = {}
        for k, c in s.items():
            if isinstance(c, Ball):
                raise ValueError("only exact coefficients can be written to a system file")
            if sum(k) >= 2:
                terms[k] = c
            elif c:
                raise ValuationError("the field has linear terms outside 0 (+) B")
        comps.append(terms)
    return SystemFile(vf.n, tokens, (0,) + tuple(vf.B.sup), tuple(comps), dict(options or {}), tuple(comments))
