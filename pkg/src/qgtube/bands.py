"""Band structure of the full tube.

The absolutely continuous spectrum consists of all lam with a unit-circle
solution of the dispersion relation.  Writing z = e^{ik} turns the sector
equation into

    g_ell(k) = cos(beta*k) + cos(alpha*k - 2*pi*ell/(beta*delta)) = 2*c(lam, 1),

so each monotonic segment of g_ell between consecutive critical points
sweeps out one sequence of bands, one band per monotonic branch of the map
lam -> 2*c(lam, 1).  There are 2*beta segments per sector, 2*beta*delta in
total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dispersion import RIGHT_PROP, mode_set
from .edge_ode import EdgePotential, dirichlet_spectrum, transfer_constants
from .errors import ConsistencyError, ValidationError
from .lattice import TubeParams

# k-grid resolution used to seed critical-point brackets; g' has at most
# 2*beta zeros per period, so 4096 seeds cannot skip a sign change for any
# beta of desk scale.
K_SEED_POINTS = 4096

LAMBDA_SEED_POINTS = 4096


@dataclass(frozen=True)
class Segment:
    """One monotonic piece of g_ell on the circle (-pi, pi]."""

    ell: int
    index: int
    k_lo: float
    k_hi: float
    g_min: float
    g_max: float


@dataclass(frozen=True)
class Band:
    lambda_lo: float
    lambda_hi: float
    ell: int
    segment_index: int
    k_lo: float
    k_hi: float


def band_function(k, ell: int, params: TubeParams):
    """g_ell(k) = cos(beta k) + cos(alpha k - 2 pi ell / (beta delta))."""
    phi = 2.0 * math.pi * ell / params.rings
    k = np.asarray(k, dtype=float)
    out = np.cos(params.beta * k) + np.cos(params.alpha * k - phi)
    return float(out) if out.ndim == 0 else out


def _band_function_deriv(k, ell: int, params: TubeParams):
    phi = 2.0 * math.pi * ell / params.rings
    k = np.asarray(k, dtype=float)
    out = -params.beta * np.sin(params.beta * k) - params.alpha * np.sin(params.alpha * k - phi)
    return float(out) if out.ndim == 0 else out


def monotonic_segments(ell: int, params: TubeParams) -> list[Segment]:
    """The 2*beta monotonic segments of g_ell over one period of k.

    Critical points are seeded on a dense grid and polished by bisection on
    g'; anything other than exactly 2*beta simple critical points is an
    internal consistency error.
    """
    n = K_SEED_POINTS
    h = 2.0 * math.pi / n
    # half-offset seeds keep the common critical points k = 0 and k = pi
    # strictly inside cells, so the circular sign scan cannot drop them
    ks = -math.pi + (np.arange(n) + 0.5) * h
    dv = _band_function_deriv(ks, ell, params)
    crit = []
    for i in range(n):
        a, fa = float(ks[i]), float(dv[i])
        b = float(ks[(i + 1) % n]) + (2.0 * math.pi if i == n - 1 else 0.0)
        fb = float(dv[(i + 1) % n])
        if fa == 0.0:
            crit.append(a)
        elif fa * fb < 0.0:
            crit.append(float(brentq(_band_function_deriv, a, b,
                                     args=(ell, params), xtol=1e-14, rtol=1e-15)))
    crit = [k - 2.0 * math.pi if k > math.pi else k for k in crit]
    crit = sorted(crit)
    crit = [k for i, k in enumerate(crit) if i == 0 or k - crit[i - 1] > 1e-9]
    if len(crit) != 2 * params.beta:
        raise ConsistencyError(
            f"sector {ell}: found {len(crit)} critical points, expected {2 * params.beta}")
    segments = []
    for i in range(len(crit)):
        if i == 0:
            k_lo, k_hi = crit[-1] - 2.0 * math.pi, crit[0]   # wrap-around arc
        else:
            k_lo, k_hi = crit[i - 1], crit[i]
        ga = band_function(k_lo, ell, params)
        gb = band_function(k_hi, ell, params)
        segments.append(Segment(ell=ell, index=i, k_lo=k_lo, k_hi=k_hi,
                                g_min=min(ga, gb), g_max=max(ga, gb)))
    return segments


def _twoc_function(potential: EdgePotential):
    def twoc(lam: float) -> float:
        return 2.0 * transfer_constants(lam, potential).c
    return twoc


def _branch_points(potential: EdgePotential, window: tuple[float, float]) -> list[float]:
    """Interior extrema of 2*c(lam, 1) in the window, found on a dense grid.

    For symmetric potentials every extremum has |2c| = 2, which keeps all
    in-band values |2c| < 2 strictly monotone between branch points.
    """
    lo, hi = window
    twoc = _twoc_function(potential)
    grid = np.linspace(lo, hi, LAMBDA_SEED_POINTS + 1)
    vals = np.array([twoc(x) for x in grid])
    d = np.diff(vals)
    points = []
    for i in range(len(d) - 1):
        if d[i] == 0.0 or d[i] * d[i + 1] < 0.0:
            sign = 1.0 if vals[i + 1] >= max(vals[i], vals[i + 2]) else -1.0
            res = minimize_scalar(lambda x: -sign * twoc(x),
                                  bounds=(float(grid[i]), float(grid[i + 2])),
                                  method="bounded",
                                  options={"xatol": 1e-12})
            points.append(float(res.x))
    return sorted(points)


def spectrum_bands(lambda_window: tuple[float, float], params: TubeParams,
                   potential: EdgePotential) -> list[Band]:
    """All bands intersecting the window, one per (segment, monotonic branch).

    Bands are closed intervals clipped to the window; overlapping bands from
    different segments are reported individually.
    """
    lo, hi = float(lambda_window[0]), float(lambda_window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValidationError(f"bad lambda window ({lo}, {hi})")
    twoc = _twoc_function(potential)
    breaks = [lo] + _branch_points(potential, (lo, hi)) + [hi]
    segments = [seg for ell in range(params.delta)
                for seg in monotonic_segments(ell, params)]
    bands: list[Band] = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a < 1e-12:
            continue
        va, vb = twoc(a), twoc(b)
        v_lo, v_hi = min(va, vb), max(va, vb)

        def solve(target: float, va=va, vb=vb, a=a, b=b) -> float:
            if target <= min(va, vb):
                return a if va <= vb else b
            if target >= max(va, vb):
                return b if va <= vb else a
            return float(brentq(lambda x: twoc(x) - target, a, b,
                                xtol=1e-13, rtol=1e-15))

        for seg in segments:
            if seg.g_max < v_lo or seg.g_min > v_hi:
                continue
            x1 = solve(max(seg.g_min, v_lo))
            x2 = solve(min(seg.g_max, v_hi))
            lam_lo, lam_hi = min(x1, x2), max(x1, x2)
            if lam_hi - lam_lo < 1e-12:
                continue      # grazing contact at a single point
            bands.append(Band(lambda_lo=lam_lo, lambda_hi=lam_hi, ell=seg.ell,
                              segment_index=seg.index, k_lo=seg.k_lo, k_hi=seg.k_hi))
    bands.sort(key=lambda bd: (bd.lambda_lo, bd.lambda_hi, bd.ell, bd.segment_index))
    return bands


def band_edge_values(window: tuple[float, float], params: TubeParams,
                     potential: EdgePotential) -> list[float]:
    """Sorted band-edge energies in the window (endpoints of every band)."""
    edges = set()
    for band in spectrum_bands(window, params, potential):
        edges.add(band.lambda_lo)
        edges.add(band.lambda_hi)
    return sorted(edges)


def in_spectrum(lam: float, params: TubeParams, potential: EdgePotential
                ) -> tuple[bool, int]:
    """Band membership by direct mode counting.

    The multiplicity is the number of rightward-propagating Floquet modes at
    lam, i.e. half the number of unit-circle modes; independent of the
    interval arithmetic in :func:`spectrum_bands`.
    """
    constants = transfer_constants(lam, potential)
    ms = mode_set(lam, params, constants)
    mult = sum(1 for m in ms.modes if m.classification == RIGHT_PROP)
    return mult > 0, mult


@dataclass(frozen=True)
class DispersionCurves:
    """Sampled sector curves and their torus-line parameterizations."""

    ell: int
    k: np.ndarray
    g: np.ndarray
    k1: np.ndarray        # beta*k mod 2pi
    k2: np.ndarray        # -alpha*k + 2*pi*ell/(beta*delta) mod 2pi


def export_dispersion_data(grid: int, params: TubeParams,
                           potential: EdgePotential) -> list[DispersionCurves]:
    """Per-sector (k, g_ell(k)) curves plus the torus lines they trace.

    Every emitted point satisfies delta*alpha*k1 + delta*beta*k2 = 0 modulo
    2*pi; the delta lines on the torus are the admissible Bloch phases of
    the tube.  The potential enters only through the caller's level map
    2*c(lam, 1) and is accepted here for provenance.
    """
    if grid < 2:
        raise ValidationError("grid must have at least 2 points")
    del potential
    two_pi = 2.0 * math.pi
    out = []
    for ell in range(params.delta):
        k = np.linspace(-math.pi, math.pi, grid)
        phi = two_pi * ell / params.rings
        out.append(DispersionCurves(
            ell=ell,
            k=k,
            g=band_function(k, ell, params),
            k1=np.mod(params.beta * k, two_pi),
            k2=np.mod(-params.alpha * k + phi, two_pi),
        ))
    return out


def sigma_d(window: tuple[float, float], potential: EdgePotential,
            length: float = 1.0) -> list[float]:
    """Dirichlet spectrum of one edge in the window (reported separately from bands)."""
    return dirichlet_spectrum(potential, window, length)
