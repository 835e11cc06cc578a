"""Float kernels: polynomial evaluation and fixed-step RK4.

The RK4 state update uses compensated summation so that rounding does not
random-walk over thousands of steps; the drift tests look at changes of
order 1e-16 in H.

A polynomial map is stored as an exponent table ``E`` (terms x nvars) and a
coefficient table ``C`` (terms x outputs).  Each kernel has a numba
version and a plain numpy version; ``FIRSTINT_NO_NUMBA=1`` (or a missing
numba) selects numpy.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
else:
    # an old system TBB only means numba falls back to another threading layer
    warnings.filterwarnings("ignore", message="The TBB threading layer requires", category=numba.NumbaWarning)

HAVE_NUMBA = numba is not None
_backend = "numpy" if (not HAVE_NUMBA or os.environ.get("FIRSTINT_NO_NUMBA", "") not in ("", "0")) else "numba"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def set_threads(n: int | None) -> None:
    if HAVE_NUMBA and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


# -- numpy ------------------------------------------------------------------


def _np_eval(E, C, x):
    mon = np.prod(x[None, :] ** E, axis=1)
    return mon @ C


def _np_eval_many(E, C, X):
    mon = np.prod(X[:, None, :] ** E[None, :, :], axis=2)
    return mon @ C


def _np_rk4(E, C, x0, h, nsteps, radius):
    out = np.empty((nsteps + 1, x0.shape[0]))
    out[0] = x0
    x = x0.copy()
    comp = np.zeros_like(x)  # Kahan compensation for the state update
    for i in range(nsteps):
        k1 = _np_eval(E, C, x)
        k2 = _np_eval(E, C, x + 0.5 * h * k1)
        k3 = _np_eval(E, C, x + 0.5 * h * k2)
        k4 = _np_eval(E, C, x + h * k3)
        y = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4) - comp
        t = x + y
        comp = (t - x) - y
        x = t
        out[i + 1] = x
        if not np.sqrt(x @ x) <= radius:
            return out, i + 1
    return out, -1


# -- numba ------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_eval_into(E, C, x, out):
        nt, nv = E.shape
        out[:] = 0.0
        for t in range(nt):
            m = 1.0
            for j in range(nv):
                e = E[t, j]
                if e:
                    m *= x[j] ** e
            for c in range(C.shape[1]):
                out[c] += C[t, c] * m

    @njit(cache=True)
    def _nb_eval(E, C, x):
        out = np.empty(C.shape[1])
        _nb_eval_into(E, C, x, out)
        return out

    @njit(cache=True, parallel=True)
    def _nb_eval_many(E, C, X):
        out = np.empty((X.shape[0], C.shape[1]))
        for i in prange(X.shape[0]):
            _nb_eval_into(E, C, X[i], out[i])
        return out

    @njit(cache=True)
    def _nb_rk4(E, C, x0, h, nsteps, radius):
        n = x0.shape[0]
        out = np.empty((nsteps + 1, n))
        out[0] = x0
        x = x0.copy()
        k1, k2, k3, k4 = np.empty(n), np.empty(n), np.empty(n), np.empty(n)
        tmp = np.empty(n)
        comp = np.zeros(n)
        for i in range(nsteps):
            _nb_eval_into(E, C, x, k1)
            for j in range(n):
                tmp[j] = x[j] + 0.5 * h * k1[j]
            _nb_eval_into(E, C, tmp, k2)
            for j in range(n):
                tmp[j] = x[j] + 0.5 * h * k2[j]
            _nb_eval_into(E, C, tmp, k3)
            for j in range(n):
                tmp[j] = x[j] + h * k3[j]
            _nb_eval_into(E, C, tmp, k4)
            s = 0.0
            for j in range(n):
                y = (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) - comp[j]
                t = x[j] + y
                comp[j] = (t - x[j]) - y
                x[j] = t
                out[i + 1, j] = x[j]
                s += x[j] * x[j]
            if not np.sqrt(s) <= radius:
                return out, i + 1
        return out, -1

    @njit(cache=True, parallel=True)
    def _nb_rk4_batch(E, C, X0, h, nsteps, radius):
        m, n = X0.shape
        finals = np.empty((m, n))
        status = np.empty(m, dtype=np.int64)
        for i in prange(m):
            traj, st = _nb_rk4(E, C, X0[i], h, nsteps, radius)
            status[i] = st
            finals[i] = traj[nsteps if st < 0 else st]
        return finals, status


# -- dispatch ---------------------------------------------------------------


def eval_poly(E, C, x):
    return (_nb_eval if _backend == "numba" else _np_eval)(E, C, np.ascontiguousarray(x, dtype=np.float64))


def eval_poly_many(E, C, X):
    X = np.ascontiguousarray(X, dtype=np.float64)
    return (_nb_eval_many if _backend == "numba" else _np_eval_many)(E, C, X)


def rk4(E, C, x0, h, nsteps, radius):
    """Classical RK4; returns (states, status) with status = -1 or the first step outside ``radius``."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    fn = _nb_rk4 if _backend == "numba" else _np_rk4
    return fn(E, C, x0, float(h), int(nsteps), float(radius))


def rk4_batch(E, C, X0, h, nsteps, radius):
    X0 = np.ascontiguousarray(X0, dtype=np.float64)
    if _backend == "numba":
        return _nb_rk4_batch(E, C, X0, float(h), int(nsteps), float(radius))
    finals = np.empty_like(X0)
    status = np.empty(X0.shape[0], dtype=np.int64)
    for i, x0 in enumerate(X0):
        traj, st = _np_rk4(E, C, x0, float(h), int(nsteps), float(radius))
        status[i] = st
        finals[i] = traj[nsteps if st < 0 else st]
    return finals, status
