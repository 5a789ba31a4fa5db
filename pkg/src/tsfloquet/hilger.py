"""Scalar exponential on a time scale, circle arithmetic, and Hilger-plane tests.

The exponential is evaluated in product form: exact factors (1 + mu*p) at
right-scattered points times exp of the plain integral of p over dense
sub-segments.  That form is branch-free, so negative or complex factors are
handled without choosing logarithms; factors on the negative real axis are
merely flagged when the caller asks for it.
"""
from __future__ import annotations

import cmath
import math
from typing import Callable

from .errors import OmegaOutOfStrip, RegressivityViolation
from .timescale import TimeScaleWindow, adaptive_simpson

_CUT_SNAP = 1e-12


def scalar_exp(p: Callable[[float], complex], ts: TimeScaleWindow, t: float,
               s: float, rtol: float = 1e-10, flags: list | None = None) -> complex:
    """Time-scale exponential e_p(t, s) for a scalar coefficient function."""
    if t == s:
        return 1.0 + 0.0j
    lo, hi = (s, t) if t > s else (t, s)
    ts.locate(lo), ts.locate(hi)
    value = 1.0 + 0.0j
    for idx, cell in enumerate(ts.cells):
        if cell.hi < lo - ts.snap or cell.lo > hi + ts.snap:
            continue
        a, b = max(cell.lo, lo), min(cell.hi, hi)
        if b > a + ts.snap:
            value *= cmath.exp(adaptive_simpson(p, a, b, rtol=rtol))
        if idx + 1 < len(ts.cells) and lo - ts.snap <= cell.hi < hi - ts.snap:
            mu = ts.cells[idx + 1].lo - cell.hi
            factor = 1.0 + mu * complex(p(cell.hi))
            if abs(factor) <= _CUT_SNAP:
                raise RegressivityViolation(
                    f"1 + mu*p vanishes at the scattered point t = {cell.hi}")
            if flags is not None and factor.real < 0 and abs(factor.imag) <= _CUT_SNAP:
                flags.append(f"factor on the negative real axis at t = {cell.hi}")
            value *= factor
    return value if t > s else 1.0 / value


def circle_plus(a: complex, b: complex, mu: float) -> complex:
    return a + b + mu * a * b


def circle_neg(a: complex, mu: float) -> complex:
    d = 1.0 + mu * a
    if abs(d) <= _CUT_SNAP:
        raise RegressivityViolation(f"operand not regressive at graininess {mu}")
    return -a / d


def circle_minus(a: complex, b: complex, mu: float) -> complex:
    return circle_plus(a, circle_neg(b, mu), mu)


def hilger_real(z: complex, mu: float) -> float:
    """Graininess-adapted real part; plain Re(z) in the dense limit."""
    if mu == 0.0:
        return complex(z).real
    return (abs(1.0 + mu * z) - 1.0) / mu


def hilger_imaginary(omega: float, mu: float, strict: bool = True) -> complex:
    """Graininess-adapted purely imaginary number for frequency omega."""
    if mu == 0.0:
        return 1j * omega
    if strict and not (-math.pi / mu < omega <= math.pi / mu + _CUT_SNAP):
        raise OmegaOutOfStrip(
            f"omega = {omega} outside (-pi/mu, pi/mu] for mu = {mu}")
    return (cmath.exp(1j * omega * mu) - 1.0) / mu


def in_hilger_circle(z: complex, mu: float) -> bool:
    return hilger_real(z, mu) < 0.0


def uniformly_regressive(z: complex, mu: float, theta_inv: float) -> bool:
    """True when the regressivity factor stays above the uniform bound."""
    if theta_inv <= 0:
        raise ValueError("uniform regressivity needs a positive bound")
    return abs(1.0 + mu * z) >= theta_inv
