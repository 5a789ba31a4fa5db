"""Figure rendering for the report path: track plots, the multiplier map and
decomposition magnitudes, written as PNG files next to the CSV output."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import AnalysisResult


def _maybe_logx(ax, t):
    if len(t) > 2 and t[0] > 0 and t[-1] / max(t[0], 1e-300) > 50:
        ax.set_xscale("log")


def render_figures(result: AnalysisResult, outdir: Path | str) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if result.verification_failed or result.stability is None:
        return written

    stab = result.stability
    t = np.asarray(stab.samples)

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for i, row in enumerate(stab.re_mu_tracks):
        lam = stab.exponents[i]
        ax1.plot(t, row, marker=".", lw=1,
                 label=f"eigenvalue {lam.real:.3g}{lam.imag:+.3g}j")
    ax1.axhline(0.0, color="k", lw=0.6)
    ax1.set_ylabel("adapted real part")
    ax1.legend(fontsize=8)
    ax1.set_title(f"exponent tracks  (verdict: {stab.track_verdict})")
    ax2.plot(t, stab.speed_track, marker=".", lw=1, color="tab:orange")
    ax2.set_ylabel("clock speed")
    ax2.set_xlabel("t")
    _maybe_logx(ax2, t)
    fig.tight_layout()
    p = outdir / "stability_tracks.png"
    fig.savefig(p, dpi=130)
    plt.close(fig)
    written.append(p)

    fig, ax = plt.subplots(figsize=(5, 5))
    angles = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(angles), np.sin(angles), "k--", lw=0.8, label="unit circle")
    mults = np.asarray([complex(m[0], m[1]) for m in result.report["multipliers"]])
    ax.scatter(mults.real, mults.imag, s=60, color="tab:red", zorder=3,
               label="multipliers")
    lim = max(1.3, 1.15 * float(np.max(np.abs(mults))))
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(f"multiplier map  (verdict: {stab.multiplier_verdict})")
    fig.tight_layout()
    p = outdir / "multipliers.png"
    fig.savefig(p, dpi=130)
    plt.close(fig)
    written.append(p)

    if result.sample_times is not None and result.norms:
        ts = result.sample_times
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(ts, result.norms["phi"], label="|transition|")
        ax.semilogy(ts, result.norms["er"], label="|exponent factor|")
        ax.semilogy(ts, result.norms["l"], label="|periodic factor|")
        ax.set_xlabel("t")
        ax.set_ylabel("spectral norm")
        _maybe_logx(ax, ts)
        ax.legend(fontsize=8)
        ax.set_title("decomposition magnitudes")
        fig.tight_layout()
        p = outdir / "decomposition.png"
        fig.savefig(p, dpi=130)
        plt.close(fig)
        written.append(p)

    return written
