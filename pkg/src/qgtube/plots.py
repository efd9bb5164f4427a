"""Figure rendering for the report outputs.

Band diagrams pair the sector curves g_ell(k) with the resulting spectral
intervals on the energy axis; the torus view shows the level sets of
cos k1 + cos k2 with the delta admissible Bloch lines of the tube overlaid.
Figures render through matplotlib's Agg backend and are written next to
the delimited outputs.
"""

from __future__ import annotations

import math

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .bands import Band, band_function, export_dispersion_data  # noqa: E402
from .edge_ode import EdgePotential, transfer_constants  # noqa: E402
from .lattice import TubeParams  # noqa: E402

# keep SVG ids reproducible so identical inputs give identical files
plt.rcParams["svg.hashsalt"] = "qgtube"

_SAVE_KW = {"dpi": 144, "bbox_inches": "tight", "metadata": {"Date": None}}


def _sector_colors(delta: int):
    cmap = plt.get_cmap("tab10")
    return [cmap(i % 10) for i in range(delta)]


def render_band_diagram(path: str, params: TubeParams, potential: EdgePotential,
                        window: tuple[float, float], bands: list[Band]) -> None:
    """Sector curves over k next to the band intervals over lambda."""
    colors = _sector_colors(params.delta)
    fig, (ax_g, ax_b) = plt.subplots(
        1, 2, figsize=(10.0, 4.2), width_ratios=[1.0, 1.4])

    k = np.linspace(-math.pi, math.pi, 1201)
    for ell in range(params.delta):
        ax_g.plot(k, band_function(k, ell, params), color=colors[ell],
                  lw=1.4, label=f"sector {ell}")
    ax_g.axhline(2.0, color="0.6", lw=0.7, ls=":")
    ax_g.axhline(-2.0, color="0.6", lw=0.7, ls=":")
    ax_g.set_xlabel("k")
    ax_g.set_ylabel(r"$\cos(\beta k)+\cos(\alpha k-2\pi\ell/(\beta\delta))$")
    ax_g.set_xlim(-math.pi, math.pi)
    ax_g.legend(fontsize=8, loc="lower right")

    lam = np.linspace(window[0], window[1], 1601)
    twoc = np.array([2.0 * transfer_constants(x, potential).c for x in lam])
    ax_b.plot(lam, np.clip(twoc, -4.0, 4.0), color="0.3", lw=1.0,
              label=r"$2\,c(\lambda,1)$")
    for band in bands:
        ax_b.axvspan(band.lambda_lo, band.lambda_hi, ymin=0.0, ymax=1.0,
                     color=colors[band.ell], alpha=0.18, lw=0)
        y = -3.6 + 0.25 * (band.segment_index % 8)
        ax_b.plot([band.lambda_lo, band.lambda_hi], [y, y],
                  color=colors[band.ell], lw=2.2, solid_capstyle="butt")
    ax_b.set_xlim(window)
    ax_b.set_ylim(-4.2, 4.2)
    ax_b.set_xlabel(r"$\lambda$")
    ax_b.set_ylabel("level / band intervals")
    ax_b.legend(fontsize=8, loc="upper right")
    fig.suptitle(
        f"tube bands  alpha={params.alpha} beta={params.beta} delta={params.delta}")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_torus_lines(path: str, params: TubeParams,
                       grid: int = 1024) -> None:
    """Level sets of cos k1 + cos k2 with the tube's admissible Bloch lines."""
    colors = _sector_colors(params.delta)
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    two_pi = 2.0 * math.pi
    kk = np.linspace(0.0, two_pi, 241)
    K1, K2 = np.meshgrid(kk, kk)
    cs = ax.contour(K1, K2, np.cos(K1) + np.cos(K2),
                    levels=np.linspace(-1.8, 1.8, 13), cmap="Greys", linewidths=0.7)
    ax.clabel(cs, fontsize=6, fmt="%.1f")
    for curve in export_dispersion_data(grid, params, EdgePotential.zero()):
        k1, k2 = curve.k1.copy(), curve.k2.copy()
        jump = (np.abs(np.diff(k1)) > math.pi) | (np.abs(np.diff(k2)) > math.pi)
        k1[1:][jump] = np.nan      # break the polyline at torus wraps
        ax.plot(k1, k2, color=colors[curve.ell], lw=1.6,
                label=f"sector {curve.ell}")
    ax.set_xlim(0.0, two_pi)
    ax.set_ylim(0.0, two_pi)
    ax.set_xlabel(r"$k_1$")
    ax.set_ylabel(r"$k_2$")
    ax.set_title(
        f"Bloch lines  alpha={params.alpha} beta={params.beta} delta={params.delta}")
    ax.legend(fontsize=8, loc="upper right")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
