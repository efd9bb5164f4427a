"""Complex dispersion relation of the tube and the Floquet-mode catalogue.

At energy lambda off the edge Dirichlet spectrum, every Floquet mode of the
tube is parameterized by a unique z in C* solving, for some sector
ell in {0, .., delta-1},

    z^beta + z^-beta + eta*z^alpha + eta^-1*z^-alpha = 4*c(lam, 1),
    eta = exp(-2*pi*i*ell/(beta*delta)),

with multipliers z1 = z^beta (translation along the tube) and
z2 = eta^-1 * z^-alpha (rotation).  Clearing denominators turns the sector
equation into a degree-2*beta polynomial whose roots are found by companion
matrix and polished by Newton; the 2*beta*delta modes over all sectors are
pairwise distinct in (z1, z2).

Modes with |z1| = 1 are propagating and are sorted into rightward/leftward
by the sign of their self-flux; |z1| < 1 decays rightward, |z1| > 1 grows.
A multiple root (always on the unit circle) marks a band edge.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .edge_ode import EdgePotential, TransferConstants, transfer_constants
from .errors import (BandEdgeError, ClassificationError, ConsistencyError,
                     DirichletPointError)
from .lattice import TubeParams

# Relative half-width of the |z1| = 1 annulus that counts as propagating.
EPS_UNIT = 1e-8

# Newton polish: relative residual target and iteration cap.
NEWTON_RTOL = 1e-12
NEWTON_MAXITER = 60

# Two roots closer than this, both with small derivative, merge into a
# multiplicity-2 (band edge) root.
CLUSTER_DIST = 1e-6
DFDZ_RTOL = 1e-6

# |s(lam, 1)| below this is treated as a Dirichlet point.
SIGMA_D_GUARD = 1e-12

# Absolute bound on the spurious imaginary part of an on-circle self-flux.
IMAG_FLUX_TOL = 1e-9

RIGHT_PROP = "right_prop"
LEFT_PROP = "left_prop"
RIGHT_EVAN = "right_evan"
LEFT_EVAN = "left_evan"
BAND_EDGE = "band_edge"


@dataclass(frozen=True)
class FloquetMode:
    """One solution of the dispersion relation with its classification."""

    z: complex
    z1: complex
    z2: complex
    ell: int
    eta: complex
    classification: str
    self_flux: float
    multiplicity: int = 1

    @property
    def rightward(self) -> bool:
        return self.classification in (RIGHT_PROP, RIGHT_EVAN)

    @property
    def leftward(self) -> bool:
        return self.classification in (LEFT_PROP, LEFT_EVAN)

    @property
    def propagating(self) -> bool:
        return self.classification in (RIGHT_PROP, LEFT_PROP)


@dataclass(frozen=True)
class ModeSet:
    """All 2*beta*delta Floquet modes of the tube at one energy."""

    lam: float
    modes: tuple[FloquetMode, ...]
    num_propagating_pairs: int
    band_edge: bool
    constants: TransferConstants = field(repr=False, default=None)

    def z1_values(self) -> np.ndarray:
        return np.array([m.z1 for m in self.modes])


def sector_eta(ell: int, params: TubeParams) -> complex:
    return cmath.exp(-2j * math.pi * ell / params.rings)


def _poly_coeffs(fourc: float, eta: complex, params: TubeParams) -> np.ndarray:
    """Descending coefficients of z^2b + eta*z^(b+a) - 4c*z^b + conj(eta)*z^(b-a) + 1."""
    a, b = params.alpha, params.beta
    coef = np.zeros(2 * b + 1, dtype=complex)
    coef[0] = 1.0
    coef[2 * b - (b + a)] = eta
    coef[b] = -fourc
    coef[2 * b - (b - a)] = np.conj(eta)      # eta^-1 = conj(eta), |eta| = 1
    coef[2 * b] = 1.0
    return coef


def _poly_scale(coef: np.ndarray, z: complex) -> float:
    """Sum of |coef_i| * |z|^deg_i, the natural residual scale at z."""
    az = abs(z)
    deg = len(coef) - 1
    return float(sum(abs(c) * az ** (deg - i) for i, c in enumerate(coef) if c != 0))


def _check_not_dirichlet(constants: TransferConstants):
    if abs(constants.s) < SIGMA_D_GUARD:
        raise DirichletPointError(
            f"lambda = {constants.lam} lies in the edge Dirichlet spectrum "
            f"(s(lambda, 1) = {constants.s:.2e})", lam=constants.lam)


def laurent_roots(lam: float, ell: int, params: TubeParams,
                  constants: TransferConstants | None = None
                  ) -> list[tuple[complex, int]]:
    """The 2*beta roots (with multiplicity) of the sector-ell dispersion polynomial.

    Companion-matrix eigenvalues seeded into Newton iteration; pairs of
    polished roots that sit within CLUSTER_DIST of each other with a small
    derivative are merged into one multiplicity-2 root.
    """
    if constants is None:
        constants = transfer_constants(lam, EdgePotential.zero())
    _check_not_dirichlet(constants)
    if not (0 <= ell < params.delta):
        raise ConsistencyError(f"sector index {ell} outside [0, {params.delta})")
    eta = sector_eta(ell, params)
    coef = _poly_coeffs(4.0 * constants.c, eta, params)
    dcoef = np.polyder(coef)
    raw = np.roots(coef)     # companion matrix; LAPACK balances before eigensolving
    polished = []
    for z in raw:
        z = complex(z)
        for _ in range(NEWTON_MAXITER):
            f = np.polyval(coef, z)
            fp = np.polyval(dcoef, z)
            if abs(f) <= NEWTON_RTOL * _poly_scale(coef, z):
                break
            if abs(fp) < 1e-14 * _poly_scale(dcoef, z):
                break         # (near-)multiple root; Newton stalls, cluster pass handles it
            step = f / fp
            z -= step
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        polished.append(z)
    polished.sort(key=lambda w: (round(cmath.phase(w), 12) % (2 * math.pi), abs(w)))

    roots: list[tuple[complex, int]] = []
    used = [False] * len(polished)
    for i, zi in enumerate(polished):
        if used[i]:
            continue
        merged = False
        dscale = _poly_scale(dcoef, zi)
        if abs(np.polyval(dcoef, zi)) < DFDZ_RTOL * dscale:
            for j in range(i + 1, len(polished)):
                if used[j]:
                    continue
                zj = polished[j]
                if (abs(zj - zi) < CLUSTER_DIST
                        and abs(np.polyval(dcoef, zj)) < DFDZ_RTOL * _poly_scale(dcoef, zj)):
                    roots.append(((zi + zj) / 2.0, 2))
                    used[i] = used[j] = True
                    merged = True
                    break
        if not merged:
            roots.append((zi, 1))
            used[i] = True
    if sum(m for _, m in roots) != 2 * params.beta:
        raise ConsistencyError(
            f"root bookkeeping lost multiplicity at lambda = {lam}, ell = {ell}")
    return roots


def floquet_pair(z: complex, ell: int, params: TubeParams) -> tuple[complex, complex]:
    """Floquet multipliers (z1, z2) = (z^beta, eta^-1 z^-alpha) of the mode at z."""
    if z == 0:
        raise ConsistencyError("z must be nonzero")
    eta = sector_eta(ell, params)
    return z ** params.beta, np.conj(eta) * z ** (-params.alpha)


def dispersion_residual(z1: complex, z2: complex, fourc: float) -> float:
    """|z1 + 1/z1 + z2 + 1/z2 - 4c|, the first dispersion equation's residual."""
    return abs(z1 + 1.0 / z1 + z2 + 1.0 / z2 - fourc)


def mode_self_flux(z: complex, lam: float, ell: int, params: TubeParams,
                   constants: TransferConstants | None = None) -> float:
    """Self-flux [u, u] of the unit-circle mode at z, normalized to u(v0) = 1.

    Equals (alpha*delta*(1/z2 - z2) + beta*delta*(z1 - 1/z1)) / (2i s(lam,1)),
    which is delta * z * f'(z) / (2i s) for the sector polynomial f.
    """
    if constants is None:
        constants = transfer_constants(lam, EdgePotential.zero())
    if abs(abs(z) - 1.0) > EPS_UNIT:
        raise ClassificationError(
            f"self-flux requested off the unit circle (|z| = {abs(z)})")
    z1, z2 = floquet_pair(z, ell, params)
    a, b, d = params.alpha, params.beta, params.delta
    val = (a * d * (1.0 / z2 - z2) + b * d * (z1 - 1.0 / z1)) / (2j * constants.s)
    if abs(val.imag) > IMAG_FLUX_TOL * max(1.0, abs(val)):
        raise ClassificationError(
            f"self-flux has imaginary residue {val.imag:.2e} at z = {z}")
    return float(val.real)


def cross_flux(mode_a: FloquetMode, mode_b: FloquetMode, lam: float,
               params: TubeParams,
               constants: TransferConstants | None = None) -> complex:
    """Flux interaction [u_a, u_b] of two modes at the same energy.

    Closed-form double geometric sum over the alpha*delta vertical and
    beta*delta horizontal edges emanating from the loop, with both modes
    normalized to 1 at the ring-0 column-0 vertex.  Conjugate-linear in the
    first argument.
    """
    if constants is None:
        constants = transfer_constants(lam, EdgePotential.zero())
    z1, z2 = mode_a.z1, mode_a.z2
    w1, w2 = mode_b.z1, mode_b.z2
    a = np.conj(z1) * w1
    b = np.conj(z2) * w2
    s1 = sum(a ** j for j in range(1, params.alpha * params.delta + 1))
    s2 = sum(b ** (-j) for j in range(1, params.beta * params.delta + 1))
    num = (1.0 / w2 - 1.0 / np.conj(z2)) * s1 + (w1 - np.conj(z1)) * s2
    return complex(num / (2j * constants.s))


def _classify(z: complex, mult: int, ell: int, lam: float, params: TubeParams,
              constants: TransferConstants, dcoef: np.ndarray
              ) -> tuple[str, float, bool]:
    """Classification, self-flux, and band-edge flag for one root."""
    z1, _ = floquet_pair(z, ell, params)
    a1 = abs(z1)
    if mult >= 2:
        return BAND_EDGE, 0.0, True
    if abs(a1 - 1.0) <= EPS_UNIT:
        dscale = _poly_scale(dcoef, z)
        if abs(np.polyval(dcoef, z)) < DFDZ_RTOL * dscale:
            return BAND_EDGE, 0.0, True
        flux = mode_self_flux(z, lam, ell, params, constants)
        return (RIGHT_PROP if flux > 0 else LEFT_PROP), flux, False
    if a1 < 1.0:
        return RIGHT_EVAN, 0.0, False
    return LEFT_EVAN, 0.0, False


def mode_set(lam: float, params: TubeParams,
             constants: TransferConstants | None = None) -> ModeSet:
    """All Floquet modes at energy lam, across every sector, classified.

    The modes list always has 2*beta*delta entries; a multiplicity-2 root
    appears twice, carrying the band-edge classification.
    """
    if constants is None:
        constants = transfer_constants(lam, EdgePotential.zero())
    _check_not_dirichlet(constants)
    modes: list[FloquetMode] = []
    edge_seen = False
    for ell in range(params.delta):
        eta = sector_eta(ell, params)
        dcoef = np.polyder(_poly_coeffs(4.0 * constants.c, eta, params))
        for z, mult in laurent_roots(lam, ell, params, constants):
            z1, z2 = floquet_pair(z, ell, params)
            cls, flux, edge = _classify(z, mult, ell, lam, params, constants, dcoef)
            edge_seen = edge_seen or edge
            mode = FloquetMode(z=z, z1=complex(z1), z2=complex(z2), ell=ell,
                               eta=complex(eta), classification=cls,
                               self_flux=flux, multiplicity=mult)
            modes.extend([mode] * mult)
    if len(modes) != 2 * params.rings:
        raise ConsistencyError(
            f"expected {2 * params.rings} modes at lambda = {lam}, got {len(modes)}")
    n_right = sum(1 for m in modes if m.rightward)
    n_left = sum(1 for m in modes if m.leftward)
    if not edge_seen and (n_right != params.rings or n_left != params.rings):
        raise ConsistencyError(
            f"classification off balance at lambda = {lam}: "
            f"{n_right} rightward vs {n_left} leftward")
    pairs = sum(1 for m in modes if m.classification == RIGHT_PROP)
    return ModeSet(lam=float(lam), modes=tuple(modes),
                   num_propagating_pairs=pairs, band_edge=edge_seen,
                   constants=constants)


def state_vector(mode: FloquetMode, params: TubeParams) -> np.ndarray:
    """Restriction of the mode to columns (0, 1) as a 2*beta*delta vector.

    Entry n is the value at (column 0, ring n), entry rings + n the value at
    (column 1, ring n); the anchor value at (0, 0) is 1.  This vector is a
    z1-eigenvector of the column propagator.
    """
    rings = params.rings
    w = np.array([mode.z1 ** params.shifts[n] * mode.z2 ** n for n in range(rings)],
                 dtype=complex)
    return np.concatenate([w, mode.z1 * w])


def require_not_band_edge(ms: ModeSet):
    if ms.band_edge:
        raise BandEdgeError(
            f"lambda = {ms.lam} is a band edge; modes do not split into "
            "rightward/leftward there")
