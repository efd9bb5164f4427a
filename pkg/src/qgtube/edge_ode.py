"""Two-point transfer constants of -u'' + q(x)u = lambda*u on a single edge.

Every edge carries the same operator; once the pair (c, s) of fundamental
solutions at the far endpoint is known, all vertex conditions on the graph
reduce to algebra in the vertex values.  c(lam, L) is the endpoint value of
the solution with unit value and zero slope at x = 0; s(lam, L) that of the
solution with zero value and unit slope.  Both are real for real lam.  The
Dirichlet spectrum of an edge is the zero set of s(lam, L).

Potentials must be symmetric about the edge midpoint (q(L-x) = q(x)); this
is what makes (c, s) independent of the edge orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import AccuracyError, DirichletPointError, ValidationError

# Switch to the power series of c, s when |lam|*L^2 falls below this, to
# avoid the 0/0 in sin(sqrt(lam)*L)/sqrt(lam) and the branch seam at lam = 0.
SERIES_SWITCH = 1e-6

# Relative tolerance for the q(L-x) = q(x) symmetry requirement.
SYMMETRY_RTOL = 1e-9

MIN_SAMPLES = 16

# Default fixed-step RK4 resolution and the acceptance bound on the
# Richardson error estimate.
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class EdgePotential:
    """Potential q(x) on one edge: identically zero, or sampled on a uniform grid.

    ``samples`` are values of q at equally spaced points spanning [0, L] of
    whichever edge the potential is placed on; evaluation interpolates
    linearly between them.  ``bound`` is the strict sup bound C with
    |q| < C.
    """

    kind: str                      # "zero" | "sampled"
    samples: tuple[float, ...] = ()
    bound: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "sampled"):
            raise ValidationError(f"unknown potential kind {self.kind!r}")
        if self.kind == "sampled":
            q = np.asarray(self.samples, dtype=float)
            if q.size < MIN_SAMPLES:
                raise ValidationError(
                    f"sampled potential needs >= {MIN_SAMPLES} samples, got {q.size}")
            if self.bound <= 0:
                raise ValidationError("potential bound must be positive")
            scale = max(1.0, float(np.max(np.abs(q))))
            if np.max(np.abs(q - q[::-1])) > SYMMETRY_RTOL * scale:
                raise ValidationError(
                    "sampled potential is not symmetric about the edge midpoint")
            if np.max(np.abs(q)) >= self.bound:
                raise ValidationError(
                    f"potential exceeds its bound: max |q| = {np.max(np.abs(q))}"
                    f" >= C = {self.bound}")

    @classmethod
    def zero(cls) -> "EdgePotential":
        return cls(kind="zero")

    @classmethod
    def sampled(cls, values, bound: float) -> "EdgePotential":
        return cls(kind="sampled", samples=tuple(float(v) for v in values),
                   bound=float(bound))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def evaluate(self, x: np.ndarray, length: float = 1.0) -> np.ndarray:
        """q at positions x in [0, length], piecewise-linear between samples."""
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros_like(x)
        q = np.asarray(self.samples, dtype=float)
        grid = np.linspace(0.0, length, q.size)
        return np.interp(x, grid, q)

    def to_json(self) -> dict:
        if self.is_zero:
            return {"type": "zero"}
        return {"type": "samples", "values": list(self.samples), "bound": self.bound}

    @classmethod
    def from_json(cls, obj) -> "EdgePotential":
        if not isinstance(obj, dict) or "type" not in obj:
            raise ValidationError("potential spec must be an object with a 'type' key")
        if obj["type"] == "zero":
            return cls.zero()
        if obj["type"] == "samples":
            try:
                return cls.sampled(obj["values"], obj["bound"])
            except KeyError as exc:
                raise ValidationError(f"potential spec missing key {exc}") from exc
        raise ValidationError(f"unknown potential type {obj['type']!r}")


@dataclass(frozen=True)
class TransferConstants:
    """(c, s) at the far endpoint, with the endpoint derivatives and lambda."""

    c: float
    s: float
    lam: float
    length: float
    cprime: float
    sprime: float
    error_estimate: float = 0.0


def _series_cs(lam: float, length: float) -> tuple[float, float, float, float]:
    # c   = sum (-lam)^k L^(2k) / (2k)!       s = L * sum (-lam)^k L^(2k) / (2k+1)!
    x = lam * length * length
    c = 1.0 - x / 2.0 + x * x / 24.0 - x ** 3 / 720.0 + x ** 4 / 40320.0
    sh = 1.0 - x / 6.0 + x * x / 120.0 - x ** 3 / 5040.0 + x ** 4 / 362880.0
    s = length * sh
    return c, s, -lam * s, c


def _zero_q_cs(lam: float, length: float) -> tuple[float, float, float, float]:
    if abs(lam) * length * length < SERIES_SWITCH:
        return _series_cs(lam, length)
    if lam > 0:
        rt = math.sqrt(lam)
        c = math.cos(rt * length)
        s = math.sin(rt * length) / rt
    else:
        rt = math.sqrt(-lam)
        c = math.cosh(rt * length)
        s = math.sinh(rt * length) / rt
    return c, s, -lam * s, c


def _rk4_pass(lam: float, potential: EdgePotential, length: float,
              nsteps: int) -> tuple[float, float, float, float]:
    """One fixed-step RK4 sweep of the 2x2 fundamental system."""
    h = length / nsteps
    # q at nodes and midpoints; index 2*i is node i, 2*i+1 is its midpoint
    xs = np.linspace(0.0, length, 2 * nsteps + 1)
    qv = potential.evaluate(xs, length) - lam
    c, cp, s, sp = 1.0, 0.0, 0.0, 1.0
    for i in range(nsteps):
        q0 = qv[2 * i]
        qm = qv[2 * i + 1]
        q1 = qv[2 * i + 2]
        # k-values for u'' = q(x) u, evolved jointly for (c, c') and (s, s')
        k1c, k1cp = cp, q0 * c
        k1s, k1sp = sp, q0 * s
        k2c, k2cp = cp + 0.5 * h * k1cp, qm * (c + 0.5 * h * k1c)
        k2s, k2sp = sp + 0.5 * h * k1sp, qm * (s + 0.5 * h * k1s)
        k3c, k3cp = cp + 0.5 * h * k2cp, qm * (c + 0.5 * h * k2c)
        k3s, k3sp = sp + 0.5 * h * k2sp, qm * (s + 0.5 * h * k2s)
        k4c, k4cp = cp + h * k3cp, q1 * (c + h * k3c)
        k4s, k4sp = sp + h * k3sp, q1 * (s + h * k3s)
        c += h * (k1c + 2 * k2c + 2 * k3c + k4c) / 6.0
        cp += h * (k1cp + 2 * k2cp + 2 * k3cp + k4cp) / 6.0
        s += h * (k1s + 2 * k2s + 2 * k3s + k4s) / 6.0
        sp += h * (k1sp + 2 * k2sp + 2 * k3sp + k4sp) / 6.0
    return c, s, cp, sp


def _rk4_steps(lam: float, length: float) -> int:
    # resolve the oscillation scale sqrt(|lam|) with generous headroom
    base = 256 * max(1, math.ceil(math.sqrt(max(abs(lam), 1.0)) * length))
    return max(1024, min(base, 1 << 16))


def transfer_constants(lam: float, potential: EdgePotential,
                       length: float = 1.0, tol: float = DEFAULT_TOL
                       ) -> TransferConstants:
    """Transfer constants (c, s) of the edge at energy lam.

    Zero potentials use the trigonometric/hyperbolic closed forms with a
    series branch near lam = 0.  Sampled potentials run a fixed-step RK4
    sweep; the Richardson estimate |value(n) - value(n/2)|/15 must stay
    below ``tol`` or an :class:`AccuracyError` is raised.
    """
    lam = float(lam)
    if length <= 0:
        raise ValidationError("edge length must be positive")
    if potential.is_zero:
        c, s, cp, sp = _zero_q_cs(lam, length)
        return TransferConstants(c=c, s=s, lam=lam, length=length,
                                 cprime=cp, sprime=sp)
    nsteps = _rk4_steps(lam, length)
    coarse = _rk4_pass(lam, potential, length, nsteps // 2)
    fine = _rk4_pass(lam, potential, length, nsteps)
    est = max(abs(f - g) for f, g in zip(fine, coarse)) / 15.0
    if est > tol:
        raise AccuracyError(
            f"RK4 error estimate {est:.3e} exceeds tolerance {tol:.1e} "
            f"at lambda = {lam}")
    c, s, cp, sp = fine
    return TransferConstants(c=c, s=s, lam=lam, length=length,
                             cprime=cp, sprime=sp, error_estimate=est)


def dirichlet_spectrum(potential: EdgePotential, lambda_window: tuple[float, float],
                       length: float = 1.0) -> list[float]:
    """All lam in the window with s(lam, length) = 0, sorted ascending.

    Zeros are simple, so a sign-change scan with a step well below the
    eigenvalue spacing (pi/L)^2 cannot miss any; each bracket is polished
    by bisection to 1e-12.
    """
    lo, hi = float(lambda_window[0]), float(lambda_window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValidationError(f"bad lambda window ({lo}, {hi})")

    def sval(lam: float) -> float:
        return transfer_constants(lam, potential, length).s

    step = min(1.0, (math.pi / length) ** 2 / 8.0)
    n = max(8, int(math.ceil((hi - lo) / step)))
    grid = np.linspace(lo, hi, n + 1)
    vals = [sval(x) for x in grid]
    zeros = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            zeros.append(float(a))
        elif fa * fb < 0.0:
            zeros.append(float(brentq(sval, a, b, xtol=1e-13, rtol=1e-15)))
    if vals[-1] == 0.0:
        zeros.append(float(grid[-1]))
    return sorted(zeros)


def reconstruct_edge(u0: complex, u1: complex, lam: float,
                     potential: EdgePotential, grid: int,
                     length: float = 1.0) -> np.ndarray:
    """Samples of the unique edge solution with endpoint values (u0, u1).

    The solution is u0*c(lam, x) + p*s(lam, x) with the slope
    p = (u1 - c(lam, L)*u0) / s(lam, L); lam must be off the Dirichlet
    spectrum of the edge.
    """
    if grid < 2:
        raise ValidationError("grid must have at least 2 points")
    const = transfer_constants(lam, potential, length)
    if abs(const.s) < 1e-10:
        raise DirichletPointError(
            f"lambda = {lam} is in the Dirichlet spectrum of the edge "
            f"(s = {const.s:.2e})", lam=lam)
    p = (complex(u1) - const.c * complex(u0)) / const.s
    xs = np.linspace(0.0, length, grid)
    if potential.is_zero:
        cvals = np.empty(grid)
        svals = np.empty(grid)
        for i, x in enumerate(xs):
            cvals[i], svals[i], _, _ = _zero_q_cs(lam, float(x)) if x > 0 else (1.0, 0.0, 0.0, 1.0)
        return complex(u0) * cvals + p * svals
    # sampled potential: one RK4 sweep recording both fundamental solutions
    per = max(1, int(math.ceil(_rk4_steps(lam, length) / (grid - 1))))
    nsteps = per * (grid - 1)
    h = length / nsteps
    qs = potential.evaluate(np.linspace(0.0, length, 2 * nsteps + 1), length) - lam
    c, cp, s, sp = 1.0, 0.0, 0.0, 1.0
    cvals = np.empty(grid)
    svals = np.empty(grid)
    cvals[0], svals[0] = 1.0, 0.0
    for i in range(nsteps):
        q0, qm, q1 = qs[2 * i], qs[2 * i + 1], qs[2 * i + 2]
        k1c, k1cp = cp, q0 * c
        k1s, k1sp = sp, q0 * s
        k2c, k2cp = cp + 0.5 * h * k1cp, qm * (c + 0.5 * h * k1c)
        k2s, k2sp = sp + 0.5 * h * k1sp, qm * (s + 0.5 * h * k1s)
        k3c, k3cp = cp + 0.5 * h * k2cp, qm * (c + 0.5 * h * k2c)
        k3s, k3sp = sp + 0.5 * h * k2sp, qm * (s + 0.5 * h * k2s)
        k4c, k4cp = cp + h * k3cp, q1 * (c + h * k3c)
        k4s, k4sp = sp + h * k3sp, q1 * (s + h * k3s)
        c += h * (k1c + 2 * k2c + 2 * k3c + k4c) / 6.0
        cp += h * (k1cp + 2 * k2cp + 2 * k3cp + k4cp) / 6.0
        s += h * (k1s + 2 * k2s + 2 * k3s + k4s) / 6.0
        sp += h * (k1sp + 2 * k2sp + 2 * k3sp + k4sp) / 6.0
        if (i + 1) % per == 0:
            j = (i + 1) // per
            cvals[j], svals[j] = c, s
    return complex(u0) * cvals + p * svals
