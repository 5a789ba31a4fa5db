"""Real powers and logarithms of nonsingular matrices via spectral projections.

Eigenvalues are clustered into distinct groups; each group gets a projection
built from the partial-fraction decomposition of the reciprocal characteristic
polynomial, which also covers defective (Jordan) structure.  Powers use the
principal branch of the logarithm of each eigenvalue, so negative or complex
spectra yield complex results.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClusteringAmbiguous, SingularMatrix

_SNAP = 1e-12


@dataclass(frozen=True)
class SpectralData:
    matrix: np.ndarray            # the decomposed matrix
    eigenvalues: np.ndarray       # distinct cluster representatives, shape (k,)
    multiplicities: np.ndarray    # algebraic multiplicities, shape (k,)
    projections: np.ndarray       # shape (k, n, n)
    logs: np.ndarray              # principal Log of each eigenvalue, shape (k,)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def geometric_multiplicities(self, rank_rtol: float = 1e-10) -> list[int]:
        n = self.n
        scale = max(float(np.linalg.norm(self.matrix, 2)), 1e-300)
        out = []
        for lam in self.eigenvalues:
            sv = np.linalg.svd(self.matrix - lam * np.eye(n), compute_uv=False)
            rank = int(np.sum(sv > rank_rtol * scale))
            out.append(n - rank)
        return out


def _poly_mul_trunc(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros(m, dtype=complex)
    for i, ai in enumerate(a[:m]):
        hi = min(m - i, len(b))
        out[i:i + hi] += ai * b[:hi]
    return out


def _series_reciprocal(c: np.ndarray, m: int) -> np.ndarray:
    """First m coefficients of 1/c(u) for a power series with c(0) != 0."""
    inv = np.zeros(m, dtype=complex)
    inv[0] = 1.0 / c[0]
    for k in range(1, m):
        acc = 0.0 + 0.0j
        for j in range(1, min(k, len(c) - 1) + 1):
            acc += c[j] * inv[k - j]
        inv[k] = -acc / c[0]
    return inv


def spectral_decompose(M, cluster_rtol: float = 1e-8, strict: bool = False) -> SpectralData:
    """Cluster the spectrum of a nonsingular matrix and build its projections.

    Clusters closer than ten times the clustering tolerance are merged into a
    single higher-multiplicity eigenvalue (raise instead when ``strict``).
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("square matrix required")
    scale = max(float(np.linalg.norm(M, 2)), 1e-300)
    eigs = np.linalg.eigvals(M)
    if np.any(np.abs(eigs) <= _SNAP * scale):
        raise SingularMatrix("matrix has an eigenvalue at the origin")

    ctol = cluster_rtol * scale
    order = np.lexsort((eigs.imag, eigs.real))
    eigs = eigs[order]
    clusters: list[list[complex]] = []
    for lam in eigs:
        placed = False
        for group in clusters:
            if min(abs(lam - g) for g in group) <= ctol:
                group.append(lam)
                placed = True
                break
        if not placed:
            clusters.append([lam])
    # near-coincident clusters are numerically indistinguishable from one
    # defective eigenvalue: merge them (or refuse, in strict mode)
    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                sep = min(abs(a - b) for a in clusters[i] for b in clusters[j])
                if sep <= 10 * ctol:
                    if strict:
                        raise ClusteringAmbiguous(
                            f"eigenvalue clusters separated by only {sep:.3e}")
                    clusters[i].extend(clusters.pop(j))
                    merged = True
                    break
            if merged:
                break

    lams = np.array([np.mean(g) for g in clusters])
    mults = np.array([len(g) for g in clusters], dtype=int)

    k = len(lams)
    projections = np.zeros((k, n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    if k == 1:
        projections[0] = eye
    else:
        for i in range(k):
            mi = int(mults[i])
            # b_i(M) = prod_{j != i} (M - lam_j I)^{m_j}
            Bi = eye.copy()
            for j in range(k):
                if j == i:
                    continue
                D = M - lams[j] * eye
                for _ in range(int(mults[j])):
                    Bi = Bi @ D
            # a_i: truncated reciprocal of prod_{j != i} ((lam_i - lam_j) + u)^{m_j}
            series = np.zeros(mi, dtype=complex)
            series[0] = 1.0
            base = np.array([1.0, 1.0], dtype=complex)
            for j in range(k):
                if j == i:
                    continue
                factor = np.array([lams[i] - lams[j], 1.0], dtype=complex)
                for _ in range(int(mults[j])):
                    series = _poly_mul_trunc(series, factor, mi)
            coeffs = _series_reciprocal(series, mi)
            Ai = np.zeros((n, n), dtype=complex)
            D = M - lams[i] * eye
            power = eye.copy()
            for c in coeffs:
                Ai = Ai + c * power
                power = power @ D
            projections[i] = Ai @ Bi

    logs = np.array([cmath.log(l) for l in lams])
    return SpectralData(matrix=M, eigenvalues=lams, multiplicities=mults,
                        projections=projections, logs=logs)


def _falling_binomial(r: float, j: int) -> float:
    """r (r-1) ... (r-j+1) / j!, finite for every real r."""
    acc = 1.0
    for l in range(j):
        acc *= (r - l) / (l + 1)
    return acc


def _as_spectral(M) -> SpectralData:
    return M if isinstance(M, SpectralData) else spectral_decompose(M)


def real_power(M, r: float) -> np.ndarray:
    """M**r for real r, on the principal branch of each eigenvalue log."""
    spec = _as_spectral(M)
    n = spec.n
    if r == 0.0:
        return np.eye(n, dtype=complex)
    out = np.zeros((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    for lam, m, P, lg in zip(spec.eigenvalues, spec.multiplicities,
                             spec.projections, spec.logs):
        N = (spec.matrix - lam * eye) / lam
        block = P.copy()
        term = P.copy()
        for j in range(1, int(m)):
            term = term @ N
            c = _falling_binomial(r, j)
            if c != 0.0:
                block = block + c * term
        out = out + cmath.exp(r * lg) * block
    return out


def matrix_log(M) -> np.ndarray:
    """Principal matrix logarithm through the spectral projections."""
    spec = _as_spectral(M)
    n = spec.n
    out = np.zeros((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    for lam, m, P, lg in zip(spec.eigenvalues, spec.multiplicities,
                             spec.projections, spec.logs):
        N = (spec.matrix - lam * eye) / lam
        block = lg * P
        term = P.copy()
        for j in range(1, int(m)):
            term = term @ N
            block = block + ((-1) ** (j + 1) / j) * term
        out = out + block
    return out
