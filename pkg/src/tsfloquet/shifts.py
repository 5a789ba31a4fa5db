"""Shift operators, the additive period clock they induce, and periodicity checks.

A shift system carries forward/backward translation maps delta+/delta- on the
scale together with an initial point t0 and a user-supplied period T.  The
period is never inferred; ``verify_periodicity`` is the guard that a supplied
(T, shift) pair actually works on a given window.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import IterationCapExceeded, OutOfDomain, WindowEdge
from .timescale import TimeScaleWindow, delta_derivative, sample_points

ShiftMap = Callable[[float, float], float]
DomainPredicate = Callable[[float, float], bool]


@dataclass(frozen=True)
class ShiftSystem:
    name: str
    t0: float
    T: float
    forward: ShiftMap
    backward: ShiftMap
    domain_fwd: DomainPredicate
    domain_bwd: DomainPredicate
    # analytic delta derivative of t -> delta+(s, t) / delta-(s, t), when known
    forward_dderiv: Callable[[float, float], float] | None = None
    backward_dderiv: Callable[[float, float], float] | None = None
    # analytic partial of delta-(s, u) in its first argument, when known
    backward_ds: Callable[[float, float], float] | None = None
    params: dict = field(default_factory=dict)

    def period_end(self) -> float:
        """One full period forward from the initial point."""
        return self.forward(self.T, self.t0)


def shift(sys: ShiftSystem, direction: str, s: float, t: float) -> float:
    """Apply delta+ (direction '+') or delta- (direction '-')."""
    if direction == "+":
        if not sys.domain_fwd(s, t):
            raise OutOfDomain(f"delta+({s}, {t}) outside the domain of {sys.name!r}")
        return sys.forward(s, t)
    if direction == "-":
        if not sys.domain_bwd(s, t):
            raise OutOfDomain(f"delta-({s}, {t}) outside the domain of {sys.name!r}")
        return sys.backward(s, t)
    raise ValueError(f"direction must be '+' or '-', got {direction!r}")


def iterate_shift(sys: ShiftSystem, direction: str, s: float, k: int, t: float) -> float:
    """k-fold composition of the shift by s; k = 0 returns t unchanged."""
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    out = t
    for step in range(k):
        try:
            out = shift(sys, direction, s, out)
        except OutOfDomain as exc:
            raise OutOfDomain(f"iteration failed at step {step + 1} of {k}: {exc}") from exc
    return out


def shift_delta_derivative(sys: ShiftSystem, ts: TimeScaleWindow, s: float,
                           t: float, direction: str = "+") -> float:
    """Delta derivative of t -> delta+-(s, t) along the window."""
    analytic = sys.forward_dderiv if direction == "+" else sys.backward_dderiv
    if analytic is not None:
        return analytic(s, t)
    fn = (lambda u: shift(sys, direction, s, u))
    return float(np.real(delta_derivative(fn, ts, t)))


# ---------------------------------------------------------------------------
# period clock


class PeriodClock:
    """Additive reparameterization of the scale induced by the period shift.

    ``value(t)`` accumulates backward-shift increments along the anchor orbit
    t0, delta+(T, t0), delta+^(2)(T, t0), ... and measures the leftover part
    of a partial period; it vanishes at t0 and grows by exactly one increment
    per full period.  The anchor/increment cache is append-only and guarded so
    concurrent readers always observe a consistent prefix.
    """

    def __init__(self, sys: ShiftSystem, snap: float = 1e-12, cap: int = 10 ** 6):
        self.sys = sys
        self.snap = snap
        self.cap = cap
        self._anchors: list[float] = [sys.t0]
        self._cumsum: list[float] = [0.0]
        self._lock = threading.Lock()

    @property
    def anchors(self) -> list[float]:
        return list(self._anchors)

    def _extend_until(self, t: float) -> None:
        with self._lock:
            while self._anchors[-1] < t - self.snap:
                if len(self._anchors) > self.cap:
                    raise IterationCapExceeded(
                        f"more than {self.cap} periods needed to reach t = {t}")
                prev = self._anchors[-1]
                nxt = shift(self.sys, "+", self.sys.T, prev)
                if nxt <= prev:
                    raise OutOfDomain(
                        f"period shift is not advancing at anchor {prev}")
                inc = shift(self.sys, "-", prev, nxt)
                self._anchors.append(nxt)
                self._cumsum.append(self._cumsum[-1] + inc)

    def anchor(self, k: int) -> float:
        if k > self.cap:
            raise IterationCapExceeded(f"anchor index {k} exceeds the cap {self.cap}")
        with self._lock:
            while len(self._anchors) <= k:
                prev = self._anchors[-1]
                nxt = shift(self.sys, "+", self.sys.T, prev)
                inc = shift(self.sys, "-", prev, nxt)
                self._anchors.append(nxt)
                self._cumsum.append(self._cumsum[-1] + inc)
        return self._anchors[k]

    def steps(self, t: float) -> int:
        """Least k with delta+^(k)(T, t0) >= t."""
        if t < self.sys.t0 - self.snap:
            raise OutOfDomain(f"clock defined for t >= t0 = {self.sys.t0}, got {t}")
        self._extend_until(t)
        for k, a in enumerate(self._anchors):
            if a >= t - self.snap:
                return k
        raise IterationCapExceeded(f"anchor orbit did not reach t = {t}")

    def on_anchor(self, t: float) -> bool:
        m = self.steps(t)
        return abs(self._anchors[m] - t) <= self.snap

    def value(self, t: float) -> float:
        m = self.steps(t)
        base = self._cumsum[m]
        if abs(self._anchors[m] - t) <= self.snap:
            return base
        return base - shift(self.sys, "-", t, self._anchors[m])

    def jump(self, ts: TimeScaleWindow, t: float) -> float:
        """Clock increase across the jump at a right-scattered t."""
        info = ts.jump_info(t)
        if info.at_window_max:
            raise WindowEdge(f"no jump available at the window maximum {t}")
        if not info.right_scattered:
            return 0.0
        return self.value(info.sigma) - self.value(t)

    def rate(self, t: float, h: float | None = None) -> float:
        """Right-derivative of the clock at a right-dense t."""
        m = self.steps(t)
        if abs(self._anchors[m] - t) <= self.snap:
            m += 1
        a = self.anchor(m)
        if self.sys.backward_ds is not None:
            return -self.sys.backward_ds(t, a)
        h0 = h if h is not None else 1e-6 * max(1.0, abs(t))
        return -(self.sys.backward(t + h0, a) - self.sys.backward(t - h0, a)) / (2 * h0)

    def speed(self, ts: TimeScaleWindow, t: float) -> float:
        """Instantaneous clock speed: jump/mu at scattered points, the
        derivative at dense points."""
        info = ts.jump_info(t)
        if info.at_window_max:
            raise WindowEdge(f"clock speed undefined at the window maximum {t}")
        if info.right_scattered:
            return self.jump(ts, t) / info.mu
        return self.rate(t)


# ---------------------------------------------------------------------------
# builtin shift catalog


def additive_shifts(T: float, t0: float = 0.0) -> ShiftSystem:
    if t0 != 0.0:
        raise ValueError("additive shifts are anchored at t0 = 0")
    return ShiftSystem(
        name="additive", t0=0.0, T=T,
        forward=lambda s, t: t + s,
        backward=lambda s, t: t - s,
        domain_fwd=lambda s, t: s >= 0.0,
        domain_bwd=lambda s, t: s >= 0.0,
        forward_dderiv=lambda s, t: 1.0,
        backward_dderiv=lambda s, t: 1.0,
        backward_ds=lambda s, u: -1.0,
    )


def multiplicative_shifts(T: float, t0: float = 1.0) -> ShiftSystem:
    if t0 != 1.0:
        raise ValueError("multiplicative shifts are anchored at t0 = 1")
    return ShiftSystem(
        name="multiplicative", t0=1.0, T=T,
        forward=lambda s, t: s * t,
        backward=lambda s, t: t / s,
        domain_fwd=lambda s, t: s >= 1.0 and t > 0.0,
        domain_bwd=lambda s, t: s >= 1.0 and t > 0.0,
        forward_dderiv=lambda s, t: s,
        backward_dderiv=lambda s, t: 1.0 / s,
        backward_ds=lambda s, u: -u / (s * s),
    )


def sqrt_shifts(T: float) -> ShiftSystem:
    return ShiftSystem(
        name="sqrt", t0=0.0, T=T,
        forward=lambda s, t: math.sqrt(t * t + s * s),
        backward=lambda s, t: math.sqrt(t * t - s * s),
        domain_fwd=lambda s, t: s >= 0.0 and t >= 0.0,
        domain_bwd=lambda s, t: 0.0 <= s <= t,
        backward_ds=lambda s, u: -s / math.sqrt(u * u - s * s),
    )


def _signed_index(t: float) -> float:
    return math.copysign(math.sqrt(abs(t)), t)


def _index_point(x: float) -> float:
    return math.copysign(x * x, x)


def signed_square_shifts(T: float) -> ShiftSystem:
    """Shifts on the scale of signed squares {..., -4, -1, 0, 1, 4, ...}; the
    maps translate the signed square-root index, which keeps both directions
    strictly increasing across zero."""
    return ShiftSystem(
        name="signed_squares", t0=0.0, T=T,
        forward=lambda s, t: _index_point(_signed_index(t) + math.sqrt(s)),
        backward=lambda s, t: _index_point(_signed_index(t) - math.sqrt(s)),
        domain_fwd=lambda s, t: s >= 0.0,
        domain_bwd=lambda s, t: s >= 0.0,
    )


def logistic_shifts(T: float, q: float) -> ShiftSystem:
    """Shifts on {q^n/(1+q^n)}: additive translation of the index n."""
    if q <= 1:
        raise ValueError("q must exceed 1")
    lnq = math.log(q)

    def idx(x: float) -> float:
        return math.log(x / (1.0 - x)) / lnq

    def pt(n: float) -> float:
        z = q ** n
        return z / (1.0 + z)

    inside = lambda x: 0.0 < x < 1.0
    return ShiftSystem(
        name="logistic", t0=0.5, T=T,
        forward=lambda s, t: pt(idx(t) + idx(s)),
        backward=lambda s, t: pt(idx(t) - idx(s)),
        domain_fwd=lambda s, t: inside(s) and inside(t) and s >= 0.5,
        domain_bwd=lambda s, t: inside(s) and inside(t) and s >= 0.5,
        params={"q": q},
    )


def dsl_shifts(forward_src: str, backward_src: str, t0: float, T: float,
               params: dict | None = None) -> ShiftSystem:
    """Custom shift maps given as expressions in the variables s and t."""
    from .exprdsl import compile_expr, parse

    env = dict(params or {})
    fwd_ast, bwd_ast = parse(forward_src), parse(backward_src)
    fwd = compile_expr(fwd_ast, env, variables=("s", "t"))
    bwd = compile_expr(bwd_ast, env, variables=("s", "t"))

    def total(fn):
        def ok(s, t):
            try:
                return math.isfinite(fn(s, t))
            except Exception:
                return False
        return ok

    return ShiftSystem(
        name="custom", t0=t0, T=T,
        forward=lambda s, t: fwd(s, t),
        backward=lambda s, t: bwd(s, t),
        domain_fwd=total(fwd),
        domain_bwd=total(bwd),
        params=dict(params or {}),
    )


def make_shifts(kind: str, T: float, t0: float | None = None,
                params: dict | None = None) -> ShiftSystem:
    params = params or {}
    if kind == "additive":
        return additive_shifts(T, 0.0 if t0 is None else t0)
    if kind == "multiplicative":
        return multiplicative_shifts(T, 1.0 if t0 is None else t0)
    if kind == "sqrt":
        return sqrt_shifts(T)
    if kind == "signed_squares":
        return signed_square_shifts(T)
    if kind == "logistic":
        return logistic_shifts(T, params["q"])
    if kind == "custom":
        return dsl_shifts(params["forward"], params["backward"], t0, T,
                          params.get("params"))
    raise ValueError(f"unknown shift kind {kind!r}")


# ---------------------------------------------------------------------------
# periodicity verification


@dataclass(frozen=True)
class Violation:
    check: str
    where: tuple
    residual: float

    def as_dict(self) -> dict:
        return {"check": self.check, "where": list(self.where), "residual": self.residual}


@dataclass
class PeriodicityReport:
    mode: str
    passed: bool
    checked: int
    violations: list[Violation]

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pass": self.passed,
            "checked": self.checked,
            "violations": [v.as_dict() for v in self.violations[:25]],
        }


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def verify_periodicity(sys: ShiftSystem, ts: TimeScaleWindow,
                       f: Callable[[float], object] | None = None,
                       mode: str = "scale",
                       samples: Sequence | None = None,
                       rel_tol: float = 1e-10,
                       count: int = 200) -> PeriodicityReport:
    """Check one periodicity notion on sampled points; violations are data.

    Modes: 'scale' (shifted points stay on the scale), 'axioms' (shift-operator
    axioms and derived identities), 'function' (f invariant under the period
    shift), 'delta_function' (f invariant after weighting by the shift's delta
    derivative).
    """
    if mode not in ("scale", "axioms", "function", "delta_function"):
        raise ValueError(f"unknown verification mode {mode!r}")
    if mode in ("function", "delta_function") and f is None:
        raise ValueError(f"mode {mode!r} requires a function")

    pts = list(samples) if samples is not None else sample_points(
        ts, ts.t_min, ts.t_max, count, include_right=True)
    hull_lo, hull_hi = ts.t_min - ts.snap, ts.t_max + ts.snap
    inside = lambda x: hull_lo <= x <= hull_hi
    violations: list[Violation] = []
    checked = 0

    def note(check, where, residual):
        violations.append(Violation(check, where, residual))

    if mode == "scale":
        for t in pts:
            for d in "+-":
                dom = sys.domain_fwd if d == "+" else sys.domain_bwd
                if not dom(sys.T, t):
                    note("domain", (d, sys.T, t), math.inf)
                    continue
                u = sys.forward(sys.T, t) if d == "+" else sys.backward(sys.T, t)
                if not inside(u):
                    continue  # unverifiable beyond the window hull
                checked += 1
                if u not in ts:
                    note("shifted point off scale", (d, sys.T, t), abs(u))

    elif mode == "axioms":
        amounts = [p for p in pts if p >= sys.t0 - ts.snap][:: max(1, len(pts) // 12)]
        for t in pts:
            # identity shifts at t0
            if sys.domain_fwd(sys.t0, t):
                checked += 1
                r = _rel(sys.forward(sys.t0, t), t)
                if r > rel_tol:
                    note("forward by t0 must fix t", (t,), r)
            if sys.domain_bwd(sys.t0, t):
                checked += 1
                r = _rel(sys.backward(sys.t0, t), t)
                if r > rel_tol:
                    note("backward by t0 must fix t", (t,), r)
            if t >= sys.t0 and sys.domain_bwd(t, t):
                checked += 1
                r = _rel(sys.backward(t, t), sys.t0)
                if r > rel_tol:
                    note("backward by t from t must hit t0", (t,), r)
            # round trips and sigma-commutation for each sampled amount
            for s in amounts:
                if sys.domain_fwd(s, t):
                    u = sys.forward(s, t)
                    if inside(u) and sys.domain_bwd(s, u):
                        checked += 1
                        r = _rel(sys.backward(s, u), t)
                        if r > rel_tol:
                            note("round trip +/-", (s, t), r)
                if sys.domain_bwd(s, t):
                    u = sys.backward(s, t)
                    if inside(u) and sys.domain_fwd(s, u):
                        checked += 1
                        r = _rel(sys.forward(s, u), t)
                        if r > rel_tol:
                            note("round trip -/+", (s, t), r)
            # commutation with the forward jump operator; this holds for
            # shifts by whole periods only, so the amounts come from the
            # T-orbit of t0 rather than from arbitrary scale points
            period_amounts = [sys.T]
            try:
                period_amounts.append(sys.forward(sys.T, sys.T))
            except Exception:
                pass
            for s in period_amounts:
                if sys.domain_fwd(s, t) and t in ts:
                    info = ts.jump_info(t)
                    u = sys.forward(s, t)
                    if not info.at_window_max and inside(u) and u in ts:
                        ju = ts.jump_info(u)
                        if not ju.at_window_max and inside(sys.forward(s, info.sigma)):
                            checked += 1
                            r = _rel(sys.forward(s, info.sigma), ju.sigma)
                            if r > rel_tol:
                                note("sigma commutation", (s, t), r)
            # monotonicity in t against the next sample
        for s in amounts:
            seq = [p for p in pts if sys.domain_fwd(s, p)]
            vals = [sys.forward(s, p) for p in seq]
            for (p1, v1), (p2, v2) in zip(zip(seq, vals), zip(seq[1:], vals[1:])):
                checked += 1
                if p1 < p2 and not v1 < v2 + rel_tol * max(1.0, abs(v1)):
                    note("forward not increasing in t", (s, p1, p2), v1 - v2)
        # monotonicity in the shift amount
        for t in pts[:: max(1, len(pts) // 12)]:
            good = [s for s in amounts if sys.domain_fwd(s, t) and sys.domain_bwd(s, t)]
            for s1, s2 in zip(good, good[1:]):
                if s1 >= s2:
                    continue
                checked += 2
                if not sys.forward(s1, t) < sys.forward(s2, t) + rel_tol * max(1.0, abs(t)):
                    note("forward not increasing in s", (s1, s2, t), 0.0)
                if not sys.backward(s1, t) > sys.backward(s2, t) - rel_tol * max(1.0, abs(t)):
                    note("backward not decreasing in s", (s1, s2, t), 0.0)

    else:  # function / delta_function
        for t in pts:
            base = f(t)
            for d in "+-":
                dom = sys.domain_fwd if d == "+" else sys.domain_bwd
                if not dom(sys.T, t):
                    continue
                u = sys.forward(sys.T, t) if d == "+" else sys.backward(sys.T, t)
                if not inside(u) or u not in ts:
                    continue
                checked += 1
                if mode == "function":
                    r = _rel(f(u), base)
                else:
                    try:
                        w = shift_delta_derivative(sys, ts, sys.T, t, direction=d)
                    except WindowEdge:
                        checked -= 1
                        continue
                    r = _rel(np.asarray(f(u), dtype=complex) * w, base)
                if r > rel_tol:
                    note(f"{mode} periodicity", (d, t), r)

    return PeriodicityReport(mode=mode, passed=not violations,
                             checked=checked, violations=violations)
