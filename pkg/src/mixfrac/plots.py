"""Deterministic SVG figures for CLI results."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .maxprinciple import edge_value  # noqa: E402

_RC = {
    "svg.hashsalt": "mixfrac",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "mixfrac"})
    plt.close(fig)
    return path


def plot_eigenfunctions(x, vectors, lambdas, path: Path) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for i in range(vectors.shape[1]):
            ax.plot(x, vectors[:, i], label=f"e{i + 1} (lambda={lambdas[i]:.6g})")
        ax.set_xlabel("x")
        ax.set_ylabel("e_k(x)")
        ax.legend(fontsize="small")
        return _save(fig, path)


def plot_residual(x, residual, path: Path) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(x, residual, label="-u_R'' - alpha (-Delta)^s u_R")
        ax.axhline(0.0, color="k", linestyle="--", linewidth=0.8, label="0")
        ax.set_xlabel("x")
        ax.legend(fontsize="small")
        return _save(fig, path)


def plot_edge_value(alpha: float, s: float, R0: float, path: Path) -> Path:
    radii = np.linspace(R0 / 4.0, 4.0 * R0, 200)
    values = [edge_value(float(R), s) for R in radii]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(radii, values, label=f"g_R(1), s={s:g}")
        ax.axhline(-2.0 / alpha, color="k", linestyle="--", linewidth=0.8, label="-2/alpha")
        ax.axvline(R0, color="r", linestyle=":", linewidth=0.8, label=f"R0={R0:.6g}")
        ax.set_xlabel("R")
        ax.legend(fontsize="small")
        return _save(fig, path)


def emit_plots(results: dict, out_dir, enabled: bool = True) -> list[Path]:
    """Write one SVG per available result; returns the written paths."""
    if not enabled:
        return []
    out_dir = Path(out_dir)
    written = []
    spectrum = results.get("spectrum")
    if spectrum is not None:
        written.append(plot_eigenfunctions(spectrum["x"], spectrum["vectors"], spectrum["lambdas"],
                                           out_dir / "eigenfunctions.svg"))
    report = results.get("counterexample")
    if report is not None:
        written.append(plot_residual(report.x, report.residual, out_dir / "counterexample_residual.svg"))
        written.append(plot_edge_value(report.alpha, report.s, report.R0,
                                       out_dir / "counterexample_g_vs_R.svg"))
    return written
