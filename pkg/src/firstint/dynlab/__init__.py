"""Floating-point checks: RK4 trajectories, conservation drift, curve scans.

Everything here is a numerical shadow of the exact results; truncated
fields are only trusted inside a radius, and integration stops with
RadiusExceeded once a trajectory leaves it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra import TruncSeries
from ..errors import DimensionMismatch, RadiusExceeded
from . import _kernels
from ._kernels import get_backend, set_backend, set_threads

__all__ = [
    "FloatField",
    "Trajectory",
    "conservation_drift",
    "curve_equilibrium_scan",
    "eval_series",
    "get_backend",
    "integrate",
    "integrate_batch",
    "series_tables",
    "set_backend",
    "set_threads",
]


def series_tables(components, nvars: int):
    """Exponent/coefficient tables for a list of series sharing ``nvars`` variables."""
    merged: dict = {}
    for c, s in enumerate(components):
        for k, v in s.items():
            merged.setdefault(k, [0.0] * len(components))[c] = float(v)
    keys = sorted(merged, reverse=True)
    E = np.array(keys, dtype=np.int64).reshape(len(keys), nvars)
    C = np.array([merged[k] for k in keys], dtype=np.float64).reshape(len(keys), len(components))
    return E, C


@dataclass(frozen=True)
class FloatField:
    """F(x) = sum_t C[t] x^E[t] in hardware floats (linear part included)."""

    E: np.ndarray
    C: np.ndarray
    order: int
    radius: float = 1.0

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @classmethod
    def from_vector_field(cls, vf, radius: float = 1.0) -> "FloatField":
        n = vf.n
        comps = [vf.f1] + list(vf.g)
        lin = [dict() for _ in range(n)]
        for i, lam in enumerate(vf.B.diag):
            e = [0] * n
            e[i + 1] = 1
            lin[i + 1][tuple(e)] = lam
            if i + 1 < vf.B.size and vf.B.sup[i]:
                e = [0] * n
                e[i + 2] = 1
                lin[i + 1][tuple(e)] = lin[i + 1].get(tuple(e), 0) + 1
        full = []
        for c, s in enumerate(comps):
            terms = {d: dict(s.part(d)) for d in s.degrees}
            for k, v in lin[c].items():
                terms.setdefault(1, {})
                terms[1][k] = terms[1].get(k, 0) + v
            full.append(TruncSeries(n, vf.order, {k: v for p in terms.values() for k, v in p.items()}))
        E, C = series_tables(full, n)
        return cls(E, C, vf.order, radius)

    @classmethod
    def from_arrays(cls, E, C, order: int, radius: float = 1.0) -> "FloatField":
        E = np.ascontiguousarray(E, dtype=np.int64)
        C = np.ascontiguousarray(C, dtype=np.float64)
        if E.ndim != 2 or C.ndim != 2 or E.shape[0] != C.shape[0] or C.shape[1] != E.shape[1]:
            raise DimensionMismatch("E must be terms x n and C terms x n")
        return cls(E, C, order, radius)

    def __call__(self, x) -> np.ndarray:
        return _kernels.eval_poly(self.E, self.C, x)


@dataclass(frozen=True)
class Trajectory:
    h: float
    T: float
    states: np.ndarray  # (steps + 1) x n

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(self.states.shape[0])


def _steps(T: float, h: float) -> int:
    if h <= 0 or T < 0:
        raise ValueError("need h > 0 and T >= 0")
    return int(round(T / h))


def integrate(ff: FloatField, x0, T: float, h: float) -> Trajectory:
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (ff.n,):
        raise DimensionMismatch(f"initial state has shape {x0.shape}, expected ({ff.n},)")
    norm = float(np.linalg.norm(x0))
    if norm > ff.radius:
        raise RadiusExceeded(0, norm, ff.radius)
    states, status = _kernels.rk4(ff.E, ff.C, x0, h, _steps(T, h), ff.radius)
    if status >= 0:
        raise RadiusExceeded(int(status), float(np.linalg.norm(states[status])), ff.radius)
    return Trajectory(float(h), float(T), states)


def integrate_batch(ff: FloatField, X0, T: float, h: float) -> np.ndarray:
    """Final states for many initial conditions (parallel under numba)."""
    X0 = np.atleast_2d(np.asarray(X0, dtype=np.float64))
    finals, status = _kernels.rk4_batch(ff.E, ff.C, X0, h, _steps(T, h), ff.radius)
    bad = np.flatnonzero(status >= 0)
    if bad.size:
        i = int(bad[0])
        raise RadiusExceeded(int(status[i]), float(np.linalg.norm(finals[i])), ff.radius)
    return finals


def eval_series(H: TruncSeries, X) -> np.ndarray:
    """Evaluate a scalar series at each row of X."""
    E, C = series_tables([H], H.nvars)
    if E.shape[0] == 0:
        return np.zeros(np.atleast_2d(X).shape[0])
    return _kernels.eval_poly_many(E, C, np.atleast_2d(X))[:, 0]


def conservation_drift(H: TruncSeries, traj: Trajectory) -> float:
    """max_i |H(x(t_i)) - H(x(t_0))|."""
    if H.nvars != traj.states.shape[1]:
        raise DimensionMismatch("H and the trajectory disagree on dimension")
    vals = eval_series(H, traj.states)
    return float(np.max(np.abs(vals - vals[0])))


def curve_equilibrium_scan(ff: FloatField, curve, samples: int = 101, radius: float = 0.1) -> float:
    """max over x1 in [-radius, radius] of |F(x1, phi(x1))|."""
    if len(curve.phi) != ff.n - 1:
        raise DimensionMismatch("curve and field disagree on dimension")
    x1 = np.linspace(-radius, radius, samples)
    pts = np.empty((samples, ff.n))
    pts[:, 0] = x1
    for i, s in enumerate(curve.phi):
        pts[:, i + 1] = eval_series(s, x1[:, None]) if s else 0.0
    vals = _kernels.eval_poly_many(ff.E, ff.C, pts)
    return float(np.max(np.linalg.norm(vals, axis=1)))
