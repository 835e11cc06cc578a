"""Independent reference computations (sympy / mpmath / brute force).

None of these import the algorithms they check; they only share the
plain data types needed to compare results.
"""

import itertools
from fractions import Fraction

import mpmath
import sympy as sp


def _frac(c):
    c = sp.Rational(c)
    return Fraction(int(c.p), int(c.q))


def _mono(syms, k):
    return sp.Mul(*[v**e for v, e in zip(syms, k)])


def y_monomials(m, r):
    """All exponent tuples of length m and total degree r (any order)."""
    return [tuple(k.count(i) for i in range(m)) for k in itertools.combinations_with_replacement(range(m), r)]


def dense_lstar(B, p, r):
    """L* on span{x1^p y^q : |q| = r} by symbolic differentiation; returns (basis, matrix)."""
    m = len(B)
    x1 = sp.Symbol("x1")
    y = sp.symbols(f"y1:{m + 1}")
    Bm = sp.Matrix([[sp.Rational(v) for v in row] for row in B])
    By = Bm * sp.Matrix(y)
    basis = y_monomials(m, r)
    idx = {q: i for i, q in enumerate(basis)}
    M = sp.zeros(len(basis), len(basis))
    for j, q in enumerate(basis):
        h = x1**p * _mono(y, q)
        img = sp.expand(sum(sp.diff(h, y[i]) * By[i] for i in range(m)))
        if img == 0:
            continue
        for mon, c in sp.Poly(img, x1, *y).terms():
            M[idx[tuple(mon[1:])], j] += c
    return basis, M


def dense_solve(B, p, r, rhs):
    """Solve L* h = rhs on one (p, r) block by sympy LU; rhs maps q -> coefficient."""
    basis, M = dense_lstar(B, p, r)
    b = sp.Matrix([sp.Rational(rhs.get(q, 0)) for q in basis])
    sol = M.LUsolve(b)
    return {q: _frac(v) for q, v in zip(basis, sol) if v != 0}


def dense_first_integral(field, n, N):
    """Stack every graded equation of f . grad H = 0 into one linear system.

    ``field`` is a list of n sympy expressions (full right-hand side).  The
    unknowns are the coefficients of all monomials of degree 2..N with some
    y-dependence; H = x1 + sum(unknowns); pure x1 powers are pinned to 0.
    """
    x = sp.symbols(f"x1:{n + 1}")
    unknowns, H = [], x[0]
    for d in range(2, N + 1):
        for k in y_monomials(n, d):
            if any(k[1:]):
                c = sp.Symbol("c_" + "_".join(map(str, k)))
                unknowns.append((k, c))
                H += c * _mono(x, k)
    expr = sp.expand(sum(sp.diff(H, x[i]) * field[i] for i in range(n)))
    eqs = [c for mon, c in sp.Poly(expr, *x).terms() if sum(mon) <= N]
    sol = sp.solve(eqs, [c for _, c in unknowns], dict=True)
    assert len(sol) == 1
    sol = sol[0]
    out = {(1,) + (0,) * (n - 1): Fraction(1)}
    for k, c in unknowns:
        v = sol.get(c, c)
        assert v.free_symbols == set(), "graded system is underdetermined"
        if v != 0:
            out[k] = _frac(v)
    return out


def newton_curve(B, g_exprs, N):
    """Series Newton iteration for B phi + g(x1, phi) = 0, truncated at degree N.

    ``g_exprs`` are sympy expressions in x1..xn; returns a list of sympy
    polynomials in x1.
    """
    m = len(B)
    x = sp.symbols(f"x1:{m + 2}")
    x1, y = x[0], x[1:]
    Bm = sp.Matrix([[sp.Rational(v) for v in row] for row in B])
    F = Bm * sp.Matrix(y) + sp.Matrix(g_exprs)
    J = F.jacobian(y)

    def trunc(e):
        e = sp.expand(e)
        return sum((e.coeff(x1, d) * x1**d for d in range(N + 1)), sp.Integer(0))

    phi = [sp.Integer(0)] * m
    Binv = Bm.inv()
    for _ in range(max(2, N.bit_length() + 2)):
        sub = dict(zip(y, phi))
        Fv = F.subs(sub, simultaneous=True).applyfunc(trunc)
        Jv = J.subs(sub, simultaneous=True).applyfunc(trunc)
        # J^{-1} = sum_k (-B^{-1} E)^k B^{-1} with E = J - B = O(x1)
        E = Jv - Bm
        inv, term = Binv, Binv
        for _ in range(N):
            term = (-Binv * E * term).applyfunc(trunc)
            inv = inv + term
        step = (inv * Fv).applyfunc(trunc)
        phi = [trunc(p - s) for p, s in zip(phi, step)]
    return phi


def brute_min_divisors(lam, N):
    """min |<k, lambda>| over |k| = d for d = 1..N, by listing every k."""
    out = {}
    n = len(lam)
    for d in range(1, N + 1):
        best = None
        for k in itertools.product(range(d + 1), repeat=n):
            if sum(k) == d:
                v = abs(sum(Fraction(a) * Fraction(b) for a, b in zip(k, lam)))
                best = v if best is None else min(best, v)
        out[d] = best
    return out


def liouville_exponents(kmax):
    a = [2]
    for k in range(1, kmax):
        a.append((k + 1) * 2 ** a[-1])
    return a


def zeta_mpf(prec):
    """zeta to ``prec`` bits with plain mpmath floats (terms past 2**-a_3 vanish)."""
    with mpmath.workprec(prec):
        a = liouville_exponents(3)
        return mpmath.fsum(mpmath.ldexp(1, -e) for e in a)


def log2_root_norm_exponent_domain(k, m=1):
    """log2 of the m* = (p_k, q_k) coefficient's root norm, written out directly.

    coefficient = m (1/s)(2/3)^s / |p - q zeta|,  |p - q zeta| = 2^(a_k - a_{k+1}) (1 + eps)
    eps < 2^-700 for k >= 1 and is dropped here (it moves log2 by < 2^-690).
    """
    a = liouville_exponents(k + 1)
    q = 2 ** a[k - 1]
    p = sum(2 ** (a[k - 1] - a[j]) for j in range(k))
    s = p + q
    d = s + m - 1
    with mpmath.workprec(s.bit_length() + 200):
        log_coeff = mpmath.log(m, 2) - mpmath.log(s, 2) + s * (1 - mpmath.log(3, 2)) + (a[k] - a[k - 1])
        return d, float(log_coeff), float(log_coeff / d)


def plant_curve(rng, n, N, curve_degree=8, sign=-1, jordan=False):
    """A field vanishing on a random planted curve y = phi(x1).

    F = M(x) (y - phi) + (0, B (y - phi)) with random M of valuation >= 1,
    built with plain dict polynomials.  Returns (B, f1, g, phi) where the
    polynomials are dicts exps -> Fraction truncated at N and phi is a list
    of dicts {degree: coefficient}.
    """
    m = n - 1
    diag = [sign * Fraction(rng.randint(1, 4), rng.randint(1, 3)) for _ in range(m)]
    sup = [0] * (m - 1)
    if jordan and m > 1:
        diag[1] = diag[0]
        sup[0] = 1
    phi = []
    for _ in range(m):
        c = {}
        for d in rng.sample(range(2, curve_degree + 1), 3):
            c[d] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        phi.append(c)

    def pmul(a, b):
        out = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                if sum(k) <= N:
                    out[k] = out.get(k, 0) + ca * cb
        return {k: v for k, v in out.items() if v}

    def padd(*ps):
        out = {}
        for p in ps:
            for k, v in p.items():
                out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if v}

    def unit(i):
        e = [0] * n
        e[i] = 1
        return tuple(e)

    # w_i = y_i - phi_i(x1)
    w = [padd({unit(i + 1): Fraction(1)}, {(d,) + (0,) * m: -c for d, c in phi[i].items()}) for i in range(m)]

    def random_m():
        out = {}
        for _ in range(2):
            d = rng.randint(1, 2)
            cuts = sorted(rng.randint(0, d) for _ in range(n - 1))
            k = tuple(b - a for a, b in zip([0] + cuts, cuts + [d]))
            out[k] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        return {k: v for k, v in out.items() if v}

    f1 = padd(*[pmul(random_m(), w[j]) for j in range(m)])
    g = []
    for i in range(m):
        lin = {k: diag[i] * v for k, v in w[i].items()}
        if i < m - 1 and sup[i]:
            lin = padd(lin, w[i + 1])
        # drop the linear y part: it is the By of the field, not part of g
        lin = {k: v for k, v in lin.items() if sum(k) >= 2}
        g.append(padd(lin, *[pmul(random_m(), w[j]) for j in range(m)]))
    return (tuple(diag), tuple(sup)), f1, g, phi
