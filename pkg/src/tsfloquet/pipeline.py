"""End-to-end analysis: verification, decomposition, stability, and emission
of the JSON report plus the CSV sample tracks."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SCHEMA_VERSION, AnalysisConfig
from .errors import ResonantSystem
from .floquet import FloquetDecomposition, decompose
from .hilger import hilger_real, scalar_exp
from .shifts import verify_periodicity
from .stability import StabilityReport, classify, regressivity_certificate
from .timescale import sample_points


@dataclass
class AnalysisResult:
    config: AnalysisConfig
    report: dict
    sample_header: list[str]
    sample_rows: list[list]
    verification_failed: bool
    decomposition: FloquetDecomposition | None = None
    stability: StabilityReport | None = None
    sample_times: np.ndarray | None = None
    norms: dict = field(default_factory=dict)


def _c2pair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _mat2json(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def _vec2pairs(v) -> list[list[float]]:
    return [_c2pair(z) for z in np.asarray(v, dtype=complex)]


def run_analysis(cfg: AnalysisConfig) -> AnalysisResult:
    """Run verification and, when it passes, the full decomposition pipeline."""
    started = time.perf_counter()
    ts, sys_, A = cfg.window, cfg.shifts, cfg.system
    tol = cfg.tolerances
    report: dict = {"schema_version": SCHEMA_VERSION, "config": cfg.raw}

    # the scale and axiom checks run first: when the scale itself is not
    # periodic in shifts there is no point sampling A off its domain
    checks = {
        "scale": verify_periodicity(sys_, ts, mode="scale",
                                    rel_tol=tol["periodicity"]),
        "axioms": verify_periodicity(sys_, ts, mode="axioms",
                                     rel_tol=tol["periodicity"]),
    }
    if all(rep.passed for rep in checks.values()):
        checks["system"] = verify_periodicity(sys_, ts, f=A,
                                              mode="delta_function",
                                              rel_tol=tol["periodicity"])
        if cfg.forcing is not None:
            checks["forcing"] = verify_periodicity(sys_, ts, f=cfg.forcing,
                                                   mode="delta_function",
                                                   rel_tol=tol["periodicity"])
    verification = {name: rep.as_dict() for name, rep in checks.items()}
    verification["pass"] = all(rep.passed for rep in checks.values())
    report["verification"] = verification
    if not verification["pass"]:
        report["runtime_seconds"] = time.perf_counter() - started
        return AnalysisResult(config=cfg, report=report, sample_header=[],
                              sample_rows=[], verification_failed=True)

    dec = decompose(A, ts, sys_, rtol=tol["ode"], atol=tol["ode"] * 1e-2,
                    cluster_rtol=tol["eigen"])
    report["monodromy"] = _mat2json(dec.monodromy)
    report["multipliers"] = _vec2pairs(dec.multipliers)

    # exponents: one principal branch per distinct multiplier, with the
    # residual of the defining one-period identity
    t1 = dec.period_end
    exponents = []
    for lam, exp in zip(dec.spectral.eigenvalues, dec.exponents(k=0)):
        e_val = scalar_exp(lambda t: exp.at_mu(ts.mu(t)), ts, t1, sys_.t0,
                           rtol=tol["quadrature"])
        exponents.append({
            "multiplier": _c2pair(lam),
            "gamma0": _c2pair(exp.base),
            "branch": exp.branch,
            "residual": float(abs(e_val - lam)),
        })
    report["exponents"] = exponents

    # sample grid for tracks and residual certification
    pts = [p for p in sample_points(ts, sys_.t0, cfg.t_max, cfg.samples)
           if p < ts.t_max - ts.snap]
    shifted = []
    for p in pts:
        q = sys_.forward(sys_.T, p)
        if q <= ts.t_max + ts.snap and q in ts:
            shifted.append(q)
    dec.transition_many(sorted(set(pts + shifted)))
    report["decomposition_residuals"] = {
        key: float(val) for key, val in dec.residuals(pts).items()}

    # homogeneous periodic solution
    psol = dec.periodic_solution(tol=tol["resonance"])
    if psol["exists"]:
        x0 = psol["x0"]
        res = 0.0
        for p in pts[: max(4, len(pts) // 8)]:
            q = sys_.forward(sys_.T, p)
            if q <= ts.t_max + ts.snap and q in ts:
                xa = dec.transition(q) @ x0
                xb = dec.transition(p) @ x0
                res = max(res, float(np.max(np.abs(xa - xb))))
        report["periodic_solution"] = {"exists": True, "x0": _vec2pairs(x0),
                                       "residual": res}
    else:
        report["periodic_solution"] = {"exists": False}

    # forced fixed point
    if cfg.forcing is not None:
        try:
            x0f = dec.forced_periodic_state(cfg.forcing, tol=tol["resonance"])
            from .transition import variation_of_constants
            back = variation_of_constants(A, cfg.forcing, ts, t1, sys_.t0, x0f,
                                          rtol=tol["ode"])
            report["forced_periodic_state"] = {
                "status": "ok", "x0": _vec2pairs(x0f),
                "residual": float(np.max(np.abs(back - x0f)))}
        except ResonantSystem as exc:
            report["forced_periodic_state"] = {"status": "resonant",
                                               "detail": str(exc)}

    stab = classify(dec, cfg.horizon, cfg.t_max, sample_count=cfg.samples,
                    eps_tol=tol["eps_tol"], epsilon=tol["epsilon"])
    stab_dict = stab.as_dict()
    stab_dict["multiplicity"] = [
        {"multiplier": _c2pair(entry["multiplier"]),
         "algebraic": entry["algebraic"], "geometric": entry["geometric"]}
        for entry in stab_dict["multiplicity"]]
    report["stability"] = stab_dict
    report["regressivity"] = regressivity_certificate(dec, stab.samples,
                                                      tol=tol["eps_tol"])

    header, rows, norms = _sample_table(dec, pts)
    report["runtime_seconds"] = time.perf_counter() - started
    return AnalysisResult(config=cfg, report=report, sample_header=header,
                          sample_rows=rows, verification_failed=False,
                          decomposition=dec, stability=stab,
                          sample_times=np.asarray(pts), norms=norms)


def _sample_table(dec: FloquetDecomposition, pts: list[float]):
    ts = dec.window
    n = dec.spectral.n
    k = len(dec.spectral.eigenvalues)
    header = ["t", "sigma", "mu", "theta"]
    for name in ("phi", "er", "l"):
        for i in range(n):
            for j in range(n):
                header += [f"{name}_{i}{j}_re", f"{name}_{i}{j}_im"]
    header += [f"re_mu_{i}" for i in range(k)]
    header += ["lambda_ratio"]

    rows = []
    phi_norms, er_norms, l_norms = [], [], []
    for t in pts:
        info = ts.jump_info(t)
        row = [t, info.sigma, info.mu, dec.clock.value(t)]
        phi = dec.transition(t)
        er = dec.exponent_transition(t)
        lf = phi @ np.linalg.inv(er)
        for M in (phi, er, lf):
            for i in range(n):
                for j in range(n):
                    z = complex(M[i, j])
                    row += [z.real, z.imag]
        gammas, _ = dec.eigenvalue_paths(t)
        row += [hilger_real(g, info.mu) for g in gammas]
        row.append(dec.clock.speed(ts, t))
        rows.append(row)
        phi_norms.append(float(np.linalg.norm(phi, 2)))
        er_norms.append(float(np.linalg.norm(er, 2)))
        l_norms.append(float(np.linalg.norm(lf, 2)))
    norms = {"phi": np.asarray(phi_norms), "er": np.asarray(er_norms),
             "l": np.asarray(l_norms)}
    return header, rows, norms


def emit_samples(result: AnalysisResult, path: Path | str) -> Path:
    """Write the sample tracks as RFC-4180 CSV with a fixed float format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(result.sample_header)
        for row in result.sample_rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return path


def emit_report(result: AnalysisResult, path: Path | str) -> Path:
    import json

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_sanitize(result.report), indent=2, sort_keys=True))
    return path


def _sanitize(obj):
    if isinstance(obj, dict):
        return {key: _sanitize(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not np.isfinite(v):
            raise ValueError(f"non-finite value {v} in report")
        return v
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return _c2pair(obj)
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    return obj
