"""Transition matrices of x^Delta = A(t) x on a hybrid window.

Propagation multiplies exact jump factors (I + mu*A) at right-scattered
points and integrates the matrix ODE across dense cells with an embedded
Dormand-Prince 5(4) pair.  A truncated iterated-integral series provides an
independent cross-check on short horizons, and variation of constants handles
the forced system.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import (
    IntegrationFailure,
    RegressivityViolation,
    ReversedBounds,
)
from .exprdsl import compile_expr, parse
from .timescale import TimeScaleWindow

_DET_FLOOR = 1e-12


class MatrixFunction:
    """t -> n x n matrix, built from expression strings or a Python callable."""

    def __init__(self, fn: Callable[[float], np.ndarray], n: int,
                 sources: list[list[str]] | None = None):
        self._fn = fn
        self.n = n
        self.sources = sources
        self.regressive_horizon: tuple[float, float] | None = None

    @classmethod
    def from_exprs(cls, rows: Sequence[Sequence], params: dict | None = None) -> "MatrixFunction":
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix of expressions must be square")
        compiled = [[compile_expr(parse(str(src)), params) for src in row] for row in rows]

        def fn(t: float) -> np.ndarray:
            return np.array([[c(t) for c in row] for row in compiled], dtype=float)

        return cls(fn, n, sources=[[str(s) for s in row] for row in rows])

    @classmethod
    def constant(cls, M) -> "MatrixFunction":
        M = np.asarray(M, dtype=complex)
        return cls(lambda t: M, M.shape[0])

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self._fn(t))

    def certify_regressive(self, ts: TimeScaleWindow) -> tuple[float, float]:
        """Check det(I + mu A) at every scattered point of the window."""
        n = self.n
        for idx, cell in enumerate(ts.cells[:-1]):
            mu = ts.cells[idx + 1].lo - cell.hi
            B = np.eye(n) + mu * self(cell.hi)
            if abs(np.linalg.det(B)) <= _DET_FLOOR:
                raise RegressivityViolation(
                    f"I + mu*A singular at scattered point t = {cell.hi}")
        self.regressive_horizon = (ts.t_min, ts.t_max)
        return self.regressive_horizon


class VectorFunction:
    """t -> length-n vector, for forcing terms."""

    def __init__(self, fn: Callable[[float], np.ndarray], n: int,
                 sources: list[str] | None = None):
        self._fn = fn
        self.n = n
        self.sources = sources

    @classmethod
    def from_exprs(cls, entries: Sequence, params: dict | None = None) -> "VectorFunction":
        compiled = [compile_expr(parse(str(src)), params) for src in entries]

        def fn(t: float) -> np.ndarray:
            return np.array([c(t) for c in compiled], dtype=float)

        return cls(fn, len(compiled), sources=[str(s) for s in entries])

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self._fn(t))


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with adaptive steps; complex arrays supported natively.

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def rk45(rhs: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray,
         a: float, b: float, rtol: float = 1e-10, atol: float = 1e-12,
         max_steps: int = 200_000) -> np.ndarray:
    """Integrate y' = rhs(t, y) over the real interval [a, b]."""
    if b <= a:
        return np.array(y0, copy=True)
    y = np.asarray(y0, dtype=complex).copy()
    t = a
    h = (b - a) / 16.0
    k1 = rhs(t, y)
    steps = 0
    while t < b - 1e-14 * max(1.0, abs(b)):
        steps += 1
        if steps > max_steps:
            raise IntegrationFailure(
                f"step budget exhausted integrating over [{a}, {b}]")
        h = min(h, b - t)
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(c * k for c, k in zip(_DP_A[i], ks))
            ks.append(rhs(t + _DP_C[i] * h, yi))
        y5 = y + h * sum(c * k for c, k in zip(_DP_B5, ks))
        y4 = y + h * sum(c * k for c, k in zip(_DP_B4, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.max(np.abs(y5 - y4) / scale))
        if not math.isfinite(err):
            raise IntegrationFailure(f"non-finite state near t = {t}")
        if err <= 1.0:
            t += h
            y = y5
            k1 = ks[6]  # first-same-as-last
        else:
            k1 = ks[0]
        h *= min(5.0, max(0.2, 0.9 * (err + 1e-300) ** -0.2))
    return y


# ---------------------------------------------------------------------------
# window segmentation shared by the propagators


def segments(ts: TimeScaleWindow, a: float, b: float):
    """Yield ('dense', lo, hi) and ('jump', t, mu) pieces covering [a, b)."""
    if b < a - ts.snap:
        raise ReversedBounds(f"segment bounds reversed: [{a}, {b}]")
    idx = ts.locate(a)
    pos = a
    while pos < b - ts.snap:
        cell = ts.cells[idx]
        if pos < cell.hi - ts.snap:
            end = min(cell.hi, b)
            yield ("dense", pos, end)
            pos = end
            continue
        if idx + 1 >= len(ts.cells):
            raise ReversedBounds(f"ran off the window before reaching {b}")
        nxt = ts.cells[idx + 1].lo
        yield ("jump", cell.hi, nxt - cell.hi)
        pos = nxt
        idx += 1


def _jump_factor(A: MatrixFunction, t: float, mu: float) -> np.ndarray:
    B = np.eye(A.n, dtype=complex) + mu * A(t)
    if abs(np.linalg.det(B)) <= _DET_FLOOR:
        raise RegressivityViolation(f"I + mu*A singular at t = {t}")
    return B


def transition_matrix(A: MatrixFunction, ts: TimeScaleWindow, t: float, t0: float,
                      rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Solution of Y^Delta = A Y, Y(t0) = I, evaluated at t."""
    if t < t0:
        return np.linalg.inv(transition_matrix(A, ts, t0, t, rtol=rtol, atol=atol))
    Y = np.eye(A.n, dtype=complex)
    for kind, x, y in segments(ts, t0, t):
        if kind == "jump":
            Y = _jump_factor(A, x, y) @ Y
        else:
            Y = rk45(lambda tt, M: A(tt) @ M, Y, x, y, rtol=rtol, atol=atol)
    return Y


def transition_profile(A: MatrixFunction, ts: TimeScaleWindow,
                       points: Sequence[float], t0: float,
                       rtol: float = 1e-10, atol: float = 1e-12) -> dict[float, np.ndarray]:
    """Transition matrices from t0 to each requested point in one sweep.

    Points below t0 are handled by inverting the sweep from the smallest
    point up to t0.
    """
    pts = sorted(set(float(p) for p in points))
    out: dict[float, np.ndarray] = {}
    below = [p for p in pts if p < t0]
    above = [p for p in pts if p >= t0]
    if below:
        # single backward sweep: invert forward transitions ending at t0
        prof = transition_profile(A, ts, [t0], below[0], rtol=rtol, atol=atol)
        base = prof[t0]
        sweep = transition_profile(A, ts, below, below[0], rtol=rtol, atol=atol)
        for p in below:
            out[p] = np.linalg.solve(base.T, sweep[p].T).T  # Phi(p,t0) = Phi(p,b0) Phi(t0,b0)^-1
    Y = np.eye(A.n, dtype=complex)
    pos = t0
    for p in above:
        for kind, x, y in segments(ts, pos, p):
            if kind == "jump":
                Y = _jump_factor(A, x, y) @ Y
            else:
                Y = rk45(lambda tt, M: A(tt) @ M, Y, x, y, rtol=rtol, atol=atol)
        pos = p
        out[p] = Y.copy()
    return out


# ---------------------------------------------------------------------------
# iterated-integral series (independent cross-check)


def _series_grid(ts: TimeScaleWindow, a: float, b: float, max_h: float):
    """Node array plus per-interval quadrature data for cumulative integrals."""
    xs: list[float] = []
    jump: list[bool] = []
    width: list[float] = []
    first = True
    for kind, x, y in segments(ts, a, b):
        if kind == "jump":
            if first:
                xs.append(x)
                first = False
            jump.append(True)
            width.append(y)
            xs.append(x + y)
        else:
            m = max(1, int(math.ceil((y - x) / max_h)))
            nodes = np.linspace(x, y, m + 1)
            if first:
                xs.append(float(nodes[0]))
                first = False
            for u0, u1 in zip(nodes, nodes[1:]):
                jump.append(False)
                width.append(float(u1 - u0))
                xs.append(float(u1))
    if first:
        xs.append(a)
    return np.asarray(xs), np.asarray(jump, dtype=bool), np.asarray(width)


def cumulative_delta_integral(values: np.ndarray, jump: np.ndarray,
                              width: np.ndarray) -> np.ndarray:
    """Cumulative delta integral of node values on a series grid.

    Dense intervals use the trapezoid rule; jumps contribute mu times the
    left-node value exactly.
    """
    left = values[:-1]
    right = values[1:]
    w = width.reshape((-1,) + (1,) * (values.ndim - 1))
    j = jump.reshape((-1,) + (1,) * (values.ndim - 1))
    contrib = np.where(j, w * left, 0.5 * w * (left + right))
    out = np.zeros_like(values)
    np.cumsum(contrib, axis=0, out=out[1:])
    return out


def peano_baker(A: MatrixFunction, ts: TimeScaleWindow, t: float, t0: float,
                order: int = 12, max_h: float = 2.5e-4) -> np.ndarray:
    """Truncated iterated-integral series for the transition matrix.

    Exact (up to rounding) on purely discrete ranges once the order reaches
    the number of steps; on dense ranges the grid spacing bounds the error.
    """
    if t < t0:
        raise ReversedBounds("series evaluation needs t >= t0")
    n = A.n
    if t == t0:
        return np.eye(n, dtype=complex)
    xs, jump, width = _series_grid(ts, t0, t, max_h)
    A_vals = np.stack([A(x) for x in xs]).astype(complex)
    total = np.broadcast_to(np.eye(n, dtype=complex), (len(xs), n, n)).copy()
    term = total.copy()
    for _ in range(order):
        integrand = np.einsum("tij,tjk->tik", A_vals, term)
        term = cumulative_delta_integral(integrand, jump, width)
        total = total + term
    return total[-1]


# ---------------------------------------------------------------------------
# forced systems


def variation_of_constants(A: MatrixFunction, F: VectorFunction | Callable,
                           ts: TimeScaleWindow, t: float, t0: float,
                           x0: Sequence[float], rtol: float = 1e-10,
                           atol: float = 1e-12) -> np.ndarray:
    """Solution of x^Delta = A x + F with x(t0) = x0, evaluated at t >= t0."""
    if t < t0 - ts.snap:
        raise ReversedBounds("forced propagation runs forward from t0")
    y = np.asarray(x0, dtype=complex).copy()
    Fv = F if callable(F) else F.__call__
    for kind, x, w in segments(ts, t0, t):
        if kind == "jump":
            y = _jump_factor(A, x, w) @ y + w * np.asarray(Fv(x), dtype=complex)
        else:
            y = rk45(lambda tt, v: A(tt) @ v + np.asarray(Fv(tt), dtype=complex),
                     y, x, w, rtol=rtol, atol=atol)
    return y
