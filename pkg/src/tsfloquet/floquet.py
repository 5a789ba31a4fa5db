"""Monodromy, multipliers, exponents, and the Floquet decomposition
Phi_A(t, t0) = L(t) * E(t) on shift-periodic windows.

E(t) is the matrix power M^(clock(t)/T) of the monodromy matrix M; it solves
the matrix exponential equation over one period, and the Lyapunov factor
L(t) = Phi_A(t, t0) E(t)^-1 is periodic in shifts.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateMultiplier,
    ResonantSystem,
    RootFindFailure,
    WindowEdge,
)
from .hilger import circle_plus, hilger_imaginary
from .matpow import SpectralData, matrix_log, real_power, spectral_decompose
from .shifts import PeriodClock, ShiftSystem
from .timescale import TimeScaleWindow
from .transition import (
    MatrixFunction,
    VectorFunction,
    transition_matrix,
    transition_profile,
    variation_of_constants,
)

_EIG_SNAP = 1e-12


def monodromy(A: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem,
              rtol: float = 1e-10, atol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Transition matrix over one full period and its eigenvalues."""
    t1 = sys.period_end()
    M = transition_matrix(A, ts, t1, sys.t0, rtol=rtol, atol=atol)
    mults = np.linalg.eigvals(M)
    scale = max(float(np.linalg.norm(M, 2)), 1e-300)
    if np.any(np.abs(mults) <= _EIG_SNAP * scale):
        raise DegenerateMultiplier("a multiplier vanished; the period map is singular")
    return M, mults


@dataclass(frozen=True)
class FloquetExponent:
    """A constant exponent plus the graininess-adapted imaginary branch shift.

    ``at_mu`` evaluates the exponent at one graininess value; the object
    represents the function t -> base (+) i_mu * omega on the scale.
    """

    base: complex
    branch: int
    omega: float
    strip_ok: bool = True

    def at_mu(self, mu: float) -> complex:
        if self.branch == 0:
            return self.base
        shift = hilger_imaginary(self.omega, mu, strict=False)
        return circle_plus(self.base, shift, mu)

    def __call__(self, ts: TimeScaleWindow, t: float) -> complex:
        return self.at_mu(ts.mu(t))


def find_exponent(sys: ShiftSystem, ts: TimeScaleWindow, lam: complex,
                  k: int = 0, tol: float = 1e-12,
                  max_iter: int = 100) -> FloquetExponent:
    """Constant gamma with e_gamma(period_end, t0) = lam, then branch k.

    Newton iteration on the closed-form period map
    prod(1 + mu_j * gamma) * exp(gamma * dense_length) - lam,
    with a continuation fallback along the segment from 1 to lam.
    """
    if lam == 0:
        raise DegenerateMultiplier("multipliers must be nonzero")
    t0, t1 = sys.t0, sys.period_end()
    mus = []
    for pt in ts.scattered_points(t0, t1):
        mus.append(ts.mu(pt))
    dense_len = (t1 - t0) - sum(mus)
    mus_arr = np.asarray(mus, dtype=float)

    def period_map(g: complex) -> tuple[complex, complex]:
        factors = 1.0 + mus_arr * g
        val = complex(np.prod(factors)) * cmath.exp(g * dense_len) if len(mus_arr) \
            else cmath.exp(g * dense_len)
        if np.any(np.abs(factors) < 1e-300):
            return val, 0.0
        dlog = complex(np.sum(mus_arr / factors)) + dense_len
        return val, val * dlog

    def newton(target: complex, g: complex) -> complex | None:
        for _ in range(max_iter):
            val, dval = period_map(g)
            res = val - target
            if abs(res) <= tol * max(1.0, abs(target)):
                return g
            if dval == 0:
                return None
            step = res / dval
            # damping keeps the iterate off the regressivity poles
            lam_damp = 1.0
            for _ in range(40):
                cand = g - lam_damp * step
                v2, _ = period_map(cand)
                if abs(v2 - target) < abs(res):
                    g = cand
                    break
                lam_damp /= 2
            else:
                return None
        return None

    guess = (lam - 1.0) / (t1 - t0)
    root = newton(lam, guess)
    if root is None:
        # phase continuation from the trivial multiplier
        g = 0.0 + 0.0j
        ok = True
        log_lam = cmath.log(lam)
        for step in range(1, 17):
            target = cmath.exp(log_lam * step / 16)
            g_new = newton(target, g)
            if g_new is None:
                ok = False
                break
            g = g_new
        root = g if ok else None
    if root is None:
        val, _ = period_map(guess)
        raise RootFindFailure(
            f"no exponent found for multiplier {lam}; residual {abs(val - lam):.3e}")

    omega = 2.0 * math.pi * k / (t1 - t0)
    strip_ok = True
    if k != 0 and len(mus_arr):
        strip_ok = bool(np.all(np.abs(omega * mus_arr) <= math.pi + 1e-12))
    return FloquetExponent(base=complex(root), branch=k, omega=omega, strip_ok=strip_ok)


@dataclass
class FloquetDecomposition:
    system: MatrixFunction
    window: TimeScaleWindow
    shifts: ShiftSystem
    clock: PeriodClock
    monodromy: np.ndarray
    multipliers: np.ndarray          # eigenvalues with multiplicity
    spectral: SpectralData           # clustered spectrum of the monodromy
    rtol: float = 1e-10
    atol: float = 1e-12
    _phi_cache: dict = field(default_factory=dict, repr=False)

    @property
    def t0(self) -> float:
        return self.shifts.t0

    @property
    def T(self) -> float:
        return self.shifts.T

    @property
    def period_end(self) -> float:
        return self.shifts.period_end()

    # -- transition -----------------------------------------------------

    def transition(self, t: float, s: float | None = None) -> np.ndarray:
        s = self.t0 if s is None else s
        key = (t, s)
        if key not in self._phi_cache:
            self._phi_cache[key] = transition_matrix(
                self.system, self.window, t, s, rtol=self.rtol, atol=self.atol)
        return self._phi_cache[key]

    def transition_many(self, points: Sequence[float]) -> dict[float, np.ndarray]:
        missing = [p for p in points if (p, self.t0) not in self._phi_cache]
        if missing:
            prof = transition_profile(self.system, self.window, missing, self.t0,
                                      rtol=self.rtol, atol=self.atol)
            for p, m in prof.items():
                self._phi_cache[(p, self.t0)] = m
        return {p: self._phi_cache[(p, self.t0)] for p in points}

    # -- decomposition factors -------------------------------------------

    def exponent_transition(self, t: float) -> np.ndarray:
        """M^(clock(t)/T); identity at t0."""
        r = self.clock.value(t) / self.T
        return real_power(self.spectral, r)

    def exponent_matrix(self, t: float) -> np.ndarray:
        """Coefficient matrix whose transition matrix is the exponent factor:
        an exact difference quotient of powers across a jump, the clock-rate
        multiple of the monodromy logarithm at a dense point."""
        info = self.window.jump_info(t)
        if info.at_window_max:
            raise WindowEdge(f"exponent matrix needs the jump at t = {t}")
        if info.right_scattered:
            r = self.clock.jump(self.window, t) / self.T
            p = real_power(self.spectral, r)
            return (p - np.eye(self.spectral.n)) / info.mu
        return (self.clock.rate(t) / self.T) * matrix_log(self.spectral)

    def lyapunov(self, t: float) -> np.ndarray:
        """Periodic factor L(t) = Phi(t, t0) E(t)^-1 of the decomposition."""
        return self.transition(t) @ np.linalg.inv(self.exponent_transition(t))

    # -- spectra ----------------------------------------------------------

    def eigenvalue_paths(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Per-cluster eigenvalues of the exponent matrix at t, with their
        multiplicities."""
        info = self.window.jump_info(t)
        if info.at_window_max:
            raise WindowEdge(f"eigenvalue paths need the jump at t = {t}")
        lams = self.spectral.eigenvalues
        if info.right_scattered:
            r = self.clock.jump(self.window, t) / self.T
            vals = (np.exp(r * self.spectral.logs) - 1.0) / info.mu
        else:
            vals = (self.clock.rate(t) / self.T) * self.spectral.logs
        return vals, self.spectral.multiplicities.copy()

    def exponents(self, k: int = 0, tol: float = 1e-12) -> list[FloquetExponent]:
        return [find_exponent(self.shifts, self.window, lam, k=k, tol=tol)
                for lam in self.spectral.eigenvalues]

    # -- periodic solutions ------------------------------------------------

    def periodic_solution(self, tol: float = 1e-8) -> dict:
        """Initial state generating a solution invariant under the period
        shift, when some multiplier equals one."""
        lams = self.multipliers
        idx = int(np.argmin(np.abs(lams - 1.0)))
        if abs(lams[idx] - 1.0) >= tol:
            return {"exists": False}
        M = self.monodromy
        w, V = np.linalg.eig(M)
        j = int(np.argmin(np.abs(w - 1.0)))
        z0 = V[:, j]
        z0 = z0 / np.linalg.norm(z0)
        x0 = self.lyapunov(self.t0) @ z0
        return {"exists": True, "x0": x0}

    def forced_periodic_state(self, F: VectorFunction | Callable,
                              tol: float = 1e-8) -> np.ndarray:
        """Initial state whose forced solution is invariant under the period
        shift; fails when the homogeneous system already has one."""
        n = self.spectral.n
        M = self.monodromy
        G = np.eye(n, dtype=complex) - M
        if abs(np.linalg.det(G)) < tol:
            raise ResonantSystem(
                "det(I - M) below tolerance: homogeneous periodic solution present")
        forced = variation_of_constants(self.system, F, self.window,
                                        self.period_end, self.t0,
                                        np.zeros(n), rtol=self.rtol, atol=self.atol)
        return np.linalg.solve(G, forced)

    def bloch_solution(self, lam: complex, u: np.ndarray | None = None):
        """Solution evaluator x(t) with x(shift_T(t)) = lam * x(t), built from
        an eigenvector of the monodromy matrix for the multiplier lam."""
        M = self.monodromy
        if u is None:
            w, V = np.linalg.eig(M)
            j = int(np.argmin(np.abs(w - lam)))
            if abs(w[j] - lam) > 1e-6 * max(1.0, abs(lam)):
                raise DegenerateMultiplier(f"{lam} is not a multiplier of this system")
            u = V[:, j] / np.linalg.norm(V[:, j])
        u = np.asarray(u, dtype=complex)
        log_lam = cmath.log(lam)

        def x(t: float) -> np.ndarray:
            scale = cmath.exp(log_lam * self.clock.value(t) / self.T)
            return scale * (self.lyapunov(t) @ u)

        return x

    # -- residual diagnostics ----------------------------------------------

    def residuals(self, points: Sequence[float]) -> dict:
        """Max decomposition and periodicity residuals over sample points."""
        pts = [p for p in points if p >= self.t0]
        shifted = []
        for p in pts:
            q = self.shifts.forward(self.T, p)
            if q <= self.window.t_max + self.window.snap and q in self.window:
                shifted.append(q)
        self.transition_many(sorted(set(pts + shifted)))
        max_dec = 0.0
        max_per = 0.0
        for p in pts:
            phi = self.transition(p)
            e = self.exponent_transition(p)
            l = phi @ np.linalg.inv(e)
            max_dec = max(max_dec, float(np.max(np.abs(phi - l @ e))))
            q = self.shifts.forward(self.T, p)
            if q <= self.window.t_max + self.window.snap and q in self.window:
                lq = self.lyapunov(q)
                max_per = max(max_per, float(np.max(np.abs(lq - l))))
        return {"decomposition": max_dec, "lyapunov_periodicity": max_per}


def decompose(A: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem,
              rtol: float = 1e-10, atol: float = 1e-12,
              cluster_rtol: float = 1e-8, clock_cap: int = 10 ** 6) -> FloquetDecomposition:
    """Build the full decomposition for a shift-periodic system on a window."""
    M, mults = monodromy(A, ts, sys, rtol=rtol, atol=atol)
    spec = spectral_decompose(M, cluster_rtol=cluster_rtol)
    clock = PeriodClock(sys, snap=ts.snap, cap=clock_cap)
    return FloquetDecomposition(system=A, window=ts, shifts=sys, clock=clock,
                                monodromy=M, multipliers=mults, spectral=spec,
                                rtol=rtol, atol=atol)
