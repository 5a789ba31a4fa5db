"""Bounded windows of a time scale: ordered cells, jump operators, delta calculus.

A window materializes a (possibly infinite) time scale over a finite range as
an ordered list of closed cells.  A cell with ``lo == hi`` is an isolated
point; otherwise it is a closed real interval.  All query operations are pure,
so a window can be shared freely between threads.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    NonFiniteValue,
    PointNotInScale,
    QuadratureFailure,
    ReversedBounds,
    WindowEdge,
)

DEFAULT_SNAP = 1e-12


@dataclass(frozen=True)
class TimeCell:
    """One maximal closed interval (or isolated point) of the window."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("cell endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"cell with lo > hi: [{self.lo}, {self.hi}]")

    @property
    def isolated(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class JumpInfo:
    sigma: float
    mu: float
    right_scattered: bool
    at_window_max: bool

    @property
    def classification(self) -> str:
        return "right-scattered" if self.right_scattered else "right-dense"


@dataclass(frozen=True)
class TimeScaleWindow:
    """Finite, ordered cell list plus the generator name and its parameters."""

    cells: tuple[TimeCell, ...]
    name: str = "explicit"
    params: dict = field(default_factory=dict)
    snap: float = DEFAULT_SNAP

    def __post_init__(self):
        if not self.cells:
            raise ValueError("window needs at least one cell")
        for a, b in zip(self.cells, self.cells[1:]):
            if b.lo <= a.hi:
                raise ValueError("cells must be disjoint and strictly increasing")
        # done once here so bisect lookups stay allocation-free
        object.__setattr__(self, "_los", tuple(c.lo for c in self.cells))

    @property
    def t_min(self) -> float:
        return self.cells[0].lo

    @property
    def t_max(self) -> float:
        return self.cells[-1].hi

    def locate(self, t: float) -> int:
        """Index of the cell containing ``t`` (within snap), else raise."""
        if not math.isfinite(t):
            raise PointNotInScale(f"non-finite point {t}")
        idx = bisect.bisect_right(self._los, t) - 1
        for j in (idx, idx + 1):
            if 0 <= j < len(self.cells):
                c = self.cells[j]
                if c.lo - self.snap <= t <= c.hi + self.snap:
                    return j
        raise PointNotInScale(f"{t} is not a point of window {self.name!r}")

    def __contains__(self, t: float) -> bool:
        try:
            self.locate(t)
            return True
        except PointNotInScale:
            return False

    def jump_info(self, t: float) -> JumpInfo:
        idx = self.locate(t)
        cell = self.cells[idx]
        if t < cell.hi - self.snap:
            return JumpInfo(sigma=t, mu=0.0, right_scattered=False, at_window_max=False)
        # t sits on the right endpoint of the cell
        if idx + 1 < len(self.cells):
            sigma = self.cells[idx + 1].lo
            return JumpInfo(sigma=sigma, mu=sigma - cell.hi, right_scattered=True,
                            at_window_max=False)
        # window maximum: sigma clamps to t
        return JumpInfo(sigma=cell.hi, mu=0.0, right_scattered=False, at_window_max=True)

    def sigma(self, t: float) -> float:
        return self.jump_info(t).sigma

    def mu(self, t: float) -> float:
        return self.jump_info(t).mu

    def rho(self, t: float) -> float:
        """Backward jump: sup of scale points below ``t`` (clamped at the window min)."""
        idx = self.locate(t)
        cell = self.cells[idx]
        if t > cell.lo + self.snap:
            return t
        return self.cells[idx - 1].hi if idx > 0 else cell.lo

    def scattered_points(self, a: float, b: float) -> list[float]:
        """Right-scattered points s with a <= s < b, in increasing order."""
        out = []
        for idx, cell in enumerate(self.cells):
            if idx + 1 >= len(self.cells):
                break
            s = cell.hi
            if a - self.snap <= s < b - self.snap:
                out.append(s)
        return out


# ---------------------------------------------------------------------------
# delta derivative / delta integral


def delta_derivative(f: Callable[[float], object], ts: TimeScaleWindow, t: float,
                     h: float | None = None):
    """Delta derivative of ``f`` at ``t``: exact difference quotient at a
    right-scattered point, finite difference restricted to the window at a
    right-dense point."""
    info = ts.jump_info(t)
    if info.at_window_max:
        raise WindowEdge(f"delta derivative undefined at the window maximum {t}")
    with np.errstate(invalid="ignore", over="ignore"):
        if info.right_scattered:
            val = (_as_array(f(info.sigma)) - _as_array(f(t))) / info.mu
            _require_finite(val, t)
            return val if val.shape else complex(val) if np.iscomplexobj(val) else float(val)

        cell = ts.cells[ts.locate(t)]
        h0 = h if h is not None else 1e-6 * max(1.0, abs(t))
        hl = min(h0, t - cell.lo)
        hr = min(h0, cell.hi - t)
        if hl > ts.snap and hr > ts.snap:
            step = min(hl, hr)
            val = (_as_array(f(t + step)) - _as_array(f(t - step))) / (2 * step)
        else:
            # at the left edge of a cell the difference must stay inside the scale
            step = hr / 2
            val = (-3 * _as_array(f(t)) + 4 * _as_array(f(t + step))
                   - _as_array(f(t + 2 * step))) / (2 * step)
    _require_finite(val, t)
    return val if val.shape else float(val.real) if not np.iscomplexobj(val) else complex(val)


def _as_array(v):
    a = np.asarray(v, dtype=complex if np.iscomplexobj(v) else float)
    return a


def _require_finite(val, t):
    arr = np.asarray(val, dtype=complex)
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise NonFiniteValue(f"non-finite value near t = {t}")


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-10,
                     max_evals: int = 2 ** 20):
    """Adaptive composite Simpson quadrature on a real interval.

    Works for scalar, complex and array-valued integrands; the error metric is
    the max-abs over components.
    """
    if b <= a:
        return 0.0
    evals = [0]

    def ev(x):
        evals[0] += 1
        if evals[0] > max_evals:
            raise QuadratureFailure(
                f"quadrature budget of {max_evals} evaluations exhausted on [{a}, {b}]")
        return np.asarray(f(x), dtype=complex)

    fa, fm, fb = ev(a), ev(0.5 * (a + b)), ev(b)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    scale = max(float(np.max(np.abs(whole))), 1e-300)
    tol0 = rtol * scale

    total = np.zeros_like(whole)
    stack = [(a, b, fa, fm, fb, whole, tol0, 0)]
    while stack:
        x0, x1, f0, f1, f2, s, tol, depth = stack.pop()
        m = 0.5 * (x0 + x1)
        fl = ev(0.5 * (x0 + m))
        fr = ev(0.5 * (m + x1))
        left = (m - x0) / 6.0 * (f0 + 4 * fl + f1)
        right = (x1 - m) / 6.0 * (f1 + 4 * fr + f2)
        err = float(np.max(np.abs(left + right - s)))
        if err <= 15 * tol or depth >= 48:
            total = total + left + right + (left + right - s) / 15.0
        else:
            stack.append((x0, m, f0, fl, f1, left, tol / 2, depth + 1))
            stack.append((m, x1, f1, fr, f2, right, tol / 2, depth + 1))
    if total.shape == ():
        z = complex(total)
        return z.real if abs(z.imag) < 1e-300 else z
    return total


def delta_integral(f: Callable[[float], object], ts: TimeScaleWindow, a: float,
                   b: float, rtol: float = 1e-10, max_evals: int = 2 ** 20):
    """Delta integral of ``f`` over [a, b): exact jump sums at scattered points
    plus adaptive quadrature over the dense sub-segments."""
    if b < a - ts.snap:
        raise ReversedBounds(f"integral bounds reversed: [{a}, {b}]")
    ts.locate(a), ts.locate(b)
    total = None
    for idx, cell in enumerate(ts.cells):
        if cell.hi < a - ts.snap or cell.lo > b + ts.snap:
            continue
        lo = max(cell.lo, a)
        hi = min(cell.hi, b)
        if hi > lo + ts.snap:
            part = adaptive_simpson(f, lo, hi, rtol=rtol, max_evals=max_evals)
            total = part if total is None else total + part
        # jump contribution when the cell's right endpoint lies in [a, b)
        if idx + 1 < len(ts.cells) and a - ts.snap <= cell.hi < b - ts.snap:
            mu = ts.cells[idx + 1].lo - cell.hi
            part = mu * np.asarray(f(cell.hi), dtype=complex)
            if part.shape == ():
                part = complex(part)
                part = part.real if abs(part.imag) < 1e-300 else part
            total = part if total is None else total + part
    if total is None:
        return 0.0
    return total


# ---------------------------------------------------------------------------
# builtin window constructors


def real_window(t_min: float, t_max: float, snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    return TimeScaleWindow((TimeCell(t_min, t_max),), "real", {}, snap)


def integer_window(t_min: float, t_max: float, snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    lo = math.ceil(t_min - snap)
    hi = math.floor(t_max + snap)
    cells = tuple(TimeCell(float(k), float(k)) for k in range(lo, hi + 1))
    return TimeScaleWindow(cells, "integer", {}, snap)


def q_scale_window(q: float, t_min: float, t_max: float,
                   snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    if q <= 1:
        raise ValueError("q must exceed 1")
    if t_min <= 0:
        raise ValueError("q-scale windows live on positive points")
    k_lo = math.ceil(math.log(t_min, q) - 1e-9)
    k_hi = math.floor(math.log(t_max, q) + 1e-9)
    cells = tuple(TimeCell(q ** k, q ** k) for k in range(k_lo, k_hi + 1))
    return TimeScaleWindow(cells, "q_scale", {"q": q}, snap)


def geometric_union_window(q: float, c: float, t_min: float, t_max: float,
                           snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    """Union of intervals [q^k, c*q^k]; needs 1 < c < q for disjoint cells."""
    if not (1 < c < q):
        raise ValueError("geometric union needs 1 < c < q")
    k_lo = math.ceil(math.log(t_min / c, q) - 1e-9)
    k_hi = math.floor(math.log(t_max, q) + 1e-9)
    cells = []
    for k in range(k_lo, k_hi + 1):
        lo, hi = q ** k, c * q ** k
        lo, hi = max(lo, t_min), min(hi, t_max)
        if lo <= hi:
            cells.append(TimeCell(lo, hi))
    return TimeScaleWindow(tuple(cells), "geometric_union", {"q": q, "c": c}, snap)


def sqrt_naturals_window(t_min: float, t_max: float,
                         snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    n_lo = max(0, math.ceil(t_min ** 2 - 1e-9)) if t_min > 0 else 0
    n_hi = math.floor(t_max ** 2 + 1e-9)
    cells = tuple(TimeCell(math.sqrt(n), math.sqrt(n)) for n in range(n_lo, n_hi + 1))
    return TimeScaleWindow(cells, "sqrt_naturals", {}, snap)


def signed_squares_window(t_min: float, t_max: float,
                          snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    pts = []
    n = 0
    while n * n <= max(abs(t_min), abs(t_max)) + 1e-9:
        for v in {-(n * n), n * n}:
            if t_min - 1e-9 <= v <= t_max + 1e-9:
                pts.append(float(v))
        n += 1
    pts = sorted(set(pts))
    cells = tuple(TimeCell(p, p) for p in pts)
    return TimeScaleWindow(cells, "signed_squares", {}, snap)


def logistic_window(q: float, t_min: float, t_max: float,
                    snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    """Points q^n / (1 + q^n); a scale bounded inside (0, 1)."""
    if q <= 1:
        raise ValueError("q must exceed 1")
    pts = []
    n = 0
    while True:
        grew = False
        for m in ((n, -n) if n else (0,)):
            v = q ** m / (1 + q ** m)
            if t_min - 1e-15 <= v <= t_max + 1e-15:
                pts.append(v)
                grew = True
        if n > 2 and not grew:
            break
        n += 1
        if n > 10_000:
            break
    cells = tuple(TimeCell(p, p) for p in sorted(set(pts)))
    return TimeScaleWindow(cells, "logistic", {"q": q}, snap)


def explicit_window(cells: Sequence[Sequence[float]],
                    snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    return TimeScaleWindow(tuple(TimeCell(float(lo), float(hi)) for lo, hi in cells),
                           "explicit", {}, snap)


_BUILDERS = {
    "real": lambda p, lo, hi, snap: real_window(lo, hi, snap),
    "integer": lambda p, lo, hi, snap: integer_window(lo, hi, snap),
    "q_scale": lambda p, lo, hi, snap: q_scale_window(p["q"], lo, hi, snap),
    "geometric_union": lambda p, lo, hi, snap: geometric_union_window(
        p["q"], p.get("c", 2.0), lo, hi, snap),
    "sqrt_naturals": lambda p, lo, hi, snap: sqrt_naturals_window(lo, hi, snap),
    "signed_squares": lambda p, lo, hi, snap: signed_squares_window(lo, hi, snap),
    "logistic": lambda p, lo, hi, snap: logistic_window(p["q"], lo, hi, snap),
}


def make_window(kind: str, params: dict | None, window: Sequence[float],
                snap: float = DEFAULT_SNAP) -> TimeScaleWindow:
    params = params or {}
    if kind == "explicit":
        return explicit_window(params["cells"], snap)
    if kind not in _BUILDERS:
        raise ValueError(f"unknown time-scale kind {kind!r}")
    lo, hi = float(window[0]), float(window[1])
    if hi <= lo:
        raise ValueError("window must satisfy t_min < t_max")
    return _BUILDERS[kind](params, lo, hi, snap)


# ---------------------------------------------------------------------------
# deterministic sampling


def sample_points(ts: TimeScaleWindow, a: float, b: float, count: int,
                  include_right: bool = False) -> list[float]:
    """Exactly ``count`` deterministic sample points of the window in [a, b]
    (or every available point when a purely discrete range has fewer).

    Every right-scattered point in range is a candidate; dense cells are
    filled with uniformly spaced points proportional to their length.
    """
    snap = ts.snap
    # keep excluded right endpoints clear of the snap radius
    margin = max(snap, 1e-9 * max(1.0, abs(b)))
    hi_cut = b + snap if include_right else b - margin
    structural: list[float] = []
    dense: list[tuple[float, float]] = []
    for cell in ts.cells:
        for endpoint in {cell.lo, cell.hi}:
            if a - snap <= endpoint <= hi_cut:
                structural.append(endpoint)
        lo, hi = max(cell.lo, a), min(cell.hi, hi_cut)
        if hi > lo + snap:
            dense.append((lo, hi))

    def dedup(seq):
        out: list[float] = []
        for c in sorted(set(seq)):
            if not out or c - out[-1] > snap:
                out.append(c)
        return out

    structural = dedup(structural)
    if len(structural) >= count:
        idx = np.unique(np.round(np.linspace(0, len(structural) - 1, count)).astype(int))
        chosen = [structural[i] for i in idx]
        pool = [p for p in structural if p not in set(chosen)]
        chosen.extend(pool[: count - len(chosen)])
        return sorted(chosen)

    total_len = sum(hi - lo for lo, hi in dense)
    fill: list[float] = []
    if total_len > 0:
        want = max(3 * (count - len(structural)), 32)
        for lo, hi in dense:
            m = max(2, int(round(want * (hi - lo) / total_len)))
            fill.extend(np.linspace(lo, hi, m).tolist())
    fill = [p for p in dedup(fill)
            if all(abs(p - s) > snap for s in structural)]
    missing = count - len(structural)
    if len(fill) > missing:
        idx = np.unique(np.round(np.linspace(0, len(fill) - 1, missing)).astype(int))
        extra = [fill[i] for i in idx]
        pool = [p for p in fill if p not in set(extra)]
        extra.extend(pool[: missing - len(extra)])
    else:
        extra = fill
    return sorted(structural + extra)
