"""Static SVG figures for the CLI reports.

Figures are written with a fixed hash salt and no date stamp, and text is
rendered as paths, so the same data always produces the same
self-contained file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SVG_RC = {"svg.hashsalt": "susydos", "svg.fonttype": "path", "font.size": 9}


@dataclass(frozen=True)
class DosCurves:
    """Everything drawn by :func:`dos_figure`."""

    family: str
    N: int
    energies: np.ndarray
    exact: np.ndarray
    expansion: np.ndarray
    semicircle: np.ndarray

    @property
    def exact_inset(self) -> np.ndarray:
        """``N (rho_exact - rho_sc)``."""
        return self.N * (self.exact - self.semicircle)

    @property
    def expansion_inset(self) -> np.ndarray:
        return self.N * (self.expansion - self.semicircle)

    @property
    def gue_envelope(self) -> np.ndarray:
        """Amplitude ``1/(4 pi^3 rho_sc^2)`` of the scaled oscillating correction."""
        return 1.0 / (4 * np.pi ** 3 * self.semicircle ** 2)


def save_svg(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def dos_figure(curves: DosCurves):
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        E = curves.energies
        ax.plot(E, curves.semicircle, color="0.55", lw=1.2, label="semicircle")
        ax.plot(E, curves.expansion, color="tab:orange", lw=1.2, ls="--", label="1/N expansion")
        ax.plot(E, curves.exact, color="tab:blue", lw=1.4, label="exact")
        ax.set_xlabel("E")
        ax.set_ylabel("density of states")
        ax.set_title(f"{curves.family.upper()}, N = {curves.N}")
        ax.set_ylim(bottom=0)
        ax.legend(loc="lower center", frameon=False)

        inset = ax.inset_axes([0.66, 0.62, 0.32, 0.33])
        inset.plot(E, curves.exact_inset, color="tab:blue", lw=0.9)
        inset.plot(E, curves.expansion_inset, color="tab:orange", lw=0.9, ls="--")
        if curves.family == "gue":
            inset.plot(E, curves.gue_envelope, color="0.6", lw=0.6, ls=":")
            inset.plot(E, -curves.gue_envelope, color="0.6", lw=0.6, ls=":")
            bound = 1.5 * np.max(np.abs(curves.exact_inset))
            inset.set_ylim(-bound, bound)
        inset.axhline(0, color="0.8", lw=0.5)
        inset.set_title(r"$N(\rho-\rho_{sc})$", fontsize=7)
        inset.tick_params(labelsize=6)
    return fig


def compare_figure(family: str, N: int, epsilon: float, energies: Sequence[float],
                   exact: Sequence[float], mc_mean: Sequence[float], mc_stderr: Sequence[float]):
    with plt.rc_context(SVG_RC):
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.4, 5.0), sharex=True,
                                          gridspec_kw={"height_ratios": [3, 1]})
        E = np.asarray(energies)
        top.plot(E, exact, color="tab:blue", lw=1.4, label="exact integral")
        top.errorbar(E, mc_mean, yerr=3 * np.asarray(mc_stderr), fmt="o", ms=3,
                     color="tab:red", label="Monte Carlo (3 s.e.)")
        top.set_ylabel("smoothed density")
        top.set_title(f"{family.upper()}, N = {N}, eps = {epsilon:g}")
        top.legend(frameon=False)
        z = (np.asarray(mc_mean) - np.asarray(exact)) / np.asarray(mc_stderr)
        bottom.axhspan(-3, 3, color="0.92")
        bottom.plot(E, z, "o", ms=3, color="tab:red")
        bottom.set_ylabel("z")
        bottom.set_xlabel("E")
    return fig


def residual_figure(family: str, table: dict[float, Sequence[tuple[int, float]]]):
    """``table`` maps E to (N, scaled residual) pairs."""
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for E, pairs in table.items():
            ns, vals = zip(*pairs)
            ax.plot(ns, vals, "o-", ms=3, label=f"E = {E:g}")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("N")
        ax.set_ylabel(r"$N^{3/2}\,|\rho_{exact}-\rho_{expansion}|$")
        ax.set_title(f"{family.upper()} residuals")
        ax.set_ylim(bottom=0)
        ax.legend(frameon=False)
    return fig
