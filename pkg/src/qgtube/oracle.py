"""Brute-force finite-difference ground truth for the half-tube.

The half-tube is truncated at M columns and every edge is discretized with
second-order central differences; vertex conditions enter through the
quadratic form, which keeps the discrete operator symmetric:

    Q(u) = sum_edges [ sum_k (u_{k+1}-u_k)^2/h + trapz(q |u|^2) ]
           - sum_vertices (a/b) |u(v)|^2,
    M(u) = sum_edges trapz(|u|^2).

Folding the positive diagonal mass matrix into the stiffness side yields an
ordinary symmetric eigenproblem whose eigenvalues converge at O(N^-2).
Bound states are identified among the truncated spectrum by their
geometric column-decay profile, not by eigenvalue position alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .edge_ode import EdgePotential
from .errors import ConvergenceError, ResourceLimitError, ValidationError
from .halftube import HalfTubeConfig

MAX_UNKNOWNS = 2_000_000

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


@dataclass
class _Assembler:
    """Accumulates the stiffness/mass quadratic forms node by node."""

    keys: dict = field(default_factory=dict)      # node key -> index
    columns: list = field(default_factory=list)   # per-node column tag (-1 aux/none)
    stiff: list = field(default_factory=list)     # (i, j, value) triplets
    mass: list = field(default_factory=list)      # diagonal accumulations
    dirichlet: set = field(default_factory=set)

    def node(self, key, column=-1) -> int:
        if key not in self.keys:
            self.keys[key] = len(self.columns)
            self.columns.append(column)
            self.mass.append(0.0)
        return self.keys[key]

    def add_vertex(self, key, robin, column=-1):
        i = self.node(key, column)
        if robin is None:
            self.dirichlet.add(i)
            return
        a, b = robin
        if b == 0.0:
            self.dirichlet.add(i)     # pure Dirichlet vertex condition
            return
        self.stiff.append((i, i, -a / b))

    def add_edge(self, key_a, key_b, length, potential: EdgePotential,
                 subintervals: int, column=-1):
        h = length / subintervals
        qs = potential.evaluate(np.linspace(0.0, length, subintervals + 1), length)
        ia = self.node(key_a)
        ib = self.node(key_b)
        prev = ia
        for k in range(1, subintervals + 1):
            cur = ib if k == subintervals else self.node(("i", key_a, key_b, k), column)
            self.stiff.append((prev, prev, 1.0 / h))
            self.stiff.append((cur, cur, 1.0 / h))
            self.stiff.append((prev, cur, -1.0 / h))
            self.stiff.append((cur, prev, -1.0 / h))
            prev = cur
        nodes = [ia] + [self.keys[("i", key_a, key_b, k)]
                        for k in range(1, subintervals)] + [ib]
        for k, i in enumerate(nodes):
            w = h if 0 < k < subintervals else h / 2.0
            self.mass[i] += w
            self.stiff.append((i, i, w * float(qs[k])))

    def build(self):
        n = len(self.columns)
        keep = np.array([i for i in range(n) if i not in self.dirichlet])
        remap = -np.ones(n, dtype=int)
        remap[keep] = np.arange(keep.size)
        rows, cols, vals = [], [], []
        for i, j, v in self.stiff:
            if remap[i] >= 0 and remap[j] >= 0:
                rows.append(remap[i])
                cols.append(remap[j])
                vals.append(v)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(keep.size, keep.size))
        mass = np.array(self.mass)[keep]
        if np.any(mass <= 0):
            raise ValidationError("isolated node with zero mass in the discretization")
        d = 1.0 / np.sqrt(mass)
        A = sp.csr_matrix(sp.diags(d) @ A @ sp.diags(d))
        A = (A + A.T) * 0.5
        col_tags = np.array(self.columns)[keep]
        return A, d, col_tags


@dataclass(frozen=True)
class DiscretizedModel:
    matrix: sp.csr_matrix
    invsqrt_mass: np.ndarray
    node_column: np.ndarray
    columns: int
    points: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def column_norms(self, vec: np.ndarray) -> np.ndarray:
        """Sup norm of the physical field per tube column."""
        u = np.abs(self.invsqrt_mass * vec)
        out = np.zeros(self.columns + 1)
        for c in range(self.columns + 1):
            mask = self.node_column == c
            if np.any(mask):
                out[c] = float(np.max(u[mask]))
        return out


def _subintervals(points: int, length: float) -> int:
    return max(4, int(round(points * length)))


def build_model(config: HalfTubeConfig, M: int, N: int,
                far_end: str = DIRICHLET) -> DiscretizedModel:
    """Discretize the half-tube truncated at column M with N subintervals per unit edge."""
    if M < 10 or N < 8:
        raise ValidationError(f"need M >= 10 and N >= 8, got M={M}, N={N}")
    if far_end not in (DIRICHLET, NEUMANN):
        raise ValidationError(f"far_end must be '{DIRICHLET}' or '{NEUMANN}'")
    params = config.params
    rings = params.rings
    est = (2 * rings * M + rings) * (N + 1)
    if est > MAX_UNKNOWNS:
        raise ResourceLimitError(f"discretization would need ~{est} unknowns")

    asm = _Assembler()
    up = [params.up_step(n) for n in range(rings)]
    for c in range(M + 1):
        for n in range(rings):
            if c == 0:
                robin = config.boundary_robin[n]
            elif c == M:
                robin = None if far_end == DIRICHLET else (0.0, 1.0)
            else:
                robin = (0.0, 1.0)        # interior Neumann vertex
            asm.add_vertex(("t", c, n), robin, column=c)
    for v in range(config.aux.vertex_count):
        asm.add_vertex(("a", v), config.aux.vertex_robin[v])

    sub = _subintervals(N, 1.0)
    for c in range(M):
        for n in range(rings):
            asm.add_edge(("t", c, n), ("t", c + 1, n), 1.0, config.potential,
                         sub, column=c)
    for c in range(M + 1):
        for n in range(rings):
            cu = c - up[n]
            if 0 <= cu <= M:
                asm.add_edge(("t", c, n), ("t", cu, (n + 1) % rings), 1.0,
                             config.potential, sub, column=min(c, cu))
    for e in config.aux.internal_edges:
        asm.add_edge(("a", e.u), ("a", e.v), e.length, e.potential,
                     _subintervals(N, e.length))
    for e in config.aux.attachment_edges:
        asm.add_edge(("a", e.vertex), ("t", 0, e.ring), e.length, e.potential,
                     _subintervals(N, e.length))

    A, d, col_tags = asm.build()
    return DiscretizedModel(matrix=A, invsqrt_mass=d, node_column=col_tags,
                            columns=M, points=N)


def build_interval_model(potential: EdgePotential, length: float, N: int,
                         bc: tuple = (None, None)) -> DiscretizedModel:
    """Single isolated edge, for convergence-order tests.

    ``bc`` entries are Robin pairs or None for Dirichlet at each endpoint.
    """
    asm = _Assembler()
    asm.add_vertex(("v", 0), bc[0], column=0)
    asm.add_vertex(("v", 1), bc[1], column=1)
    asm.add_edge(("v", 0), ("v", 1), length, potential,
                 _subintervals(N, length), column=0)
    A, d, col_tags = asm.build()
    return DiscretizedModel(matrix=A, invsqrt_mass=d, node_column=col_tags,
                            columns=1, points=N)


def eigs_near(model: DiscretizedModel, target: float, count: int,
              return_vectors: bool = False):
    """The ``count`` eigenvalues nearest ``target`` by shift-invert Lanczos.

    Inside a spectral band the truncated model has tightly clustered
    eigenvalues, so the iteration runs with a widened Krylov subspace and a
    tolerance far below the discretization error; if ARPACK still leaves a
    few pairs unconverged, the converged ones are returned as long as at
    least one is available.
    """
    k = min(count, model.size - 2)
    ncv = min(model.size - 1, max(4 * k + 1, 60))
    # fixed start vector: reproducible iterates, byte-identical reports
    v0 = np.random.default_rng(1234).standard_normal(model.size)
    kw = {"k": k, "sigma": target, "which": "LM", "ncv": ncv,
          "tol": 1e-10, "maxiter": 40 * model.size, "v0": v0}
    try:
        vals, vecs = eigsh(model.matrix, **kw)
    except ArpackNoConvergence as exc:
        vals, vecs = exc.eigenvalues, exc.eigenvectors
        if vals is None or len(vals) == 0:
            raise ConvergenceError(
                f"shift-invert iteration stalled near {target}") from exc
    order = np.argsort(np.abs(np.asarray(vals) - target))
    vals = np.asarray(vals)[order]
    if return_vectors:
        return vals, np.asarray(vecs)[:, order]
    return vals


def eigs_in_interval(model: DiscretizedModel, lo: float, hi: float) -> np.ndarray:
    """All discrete eigenvalues in [lo, hi]; dense solve, small models only."""
    if model.size > 6000:
        raise ResourceLimitError("interval counting is a dense solve; model too large")
    vals = np.linalg.eigvalsh(model.matrix.toarray())
    return vals[(vals >= lo) & (vals <= hi)]


def decay_fit(model: DiscretizedModel, vec: np.ndarray,
              floor: float = 1e-4) -> tuple[float, float]:
    """Geometric decay ratio of column norms and the flatness of that fit.

    A discretized bound state inside a band carries a small extended-state
    contamination that floors its column profile a few decades down, so the
    ratio is fitted only over the leading columns whose relative norm stays
    above ``floor``.  Returns (ratio, spread): the median of the
    successive-column ratios used and the maximum deviation from it.
    Extended states report ratio ~ 1 over the whole tube.
    """
    norms = model.column_norms(vec)
    top = float(np.max(norms))
    if top == 0.0:
        return math.nan, math.inf
    norms = norms / top
    # the far columns of a decayed state are pure contamination; fit only
    # well above that level (capped so extended states still get a fit)
    tail = norms[max(1, model.columns - 8):model.columns - 2]
    tail_floor = float(np.median(tail)) if tail.size else 0.0
    fit_floor = min(max(floor, 8.0 * tail_floor), 0.5)
    ratios = []
    for c in range(1, model.columns - 3):
        if norms[c + 1] <= fit_floor:
            break
        ratios.append(float(norms[c + 1] / norms[c]))
    if not ratios:
        return math.nan, math.inf
    med = float(np.median(ratios))
    spread = float(max(abs(r - med) for r in ratios))
    return med, spread


def find_decaying_state(model: DiscretizedModel, target: float,
                        count: int = 12) -> tuple[float, float, float]:
    """The eigenpair nearest target whose column profile is cleanly geometric.

    Returns (eigenvalue, decay_ratio, spread).  Inside a spectral band the
    truncated model surrounds the bound state with extended states, whose
    profiles stay flat (ratio ~ 1) or wander (large spread); the decay
    profile, not the eigenvalue position, identifies the bound state.
    """
    vals, vecs = eigs_near(model, target, count, return_vectors=True)
    best = None
    for i in range(len(vals)):
        ratio, spread = decay_fit(model, vecs[:, i])
        if not math.isfinite(ratio) or ratio > 0.95 or spread > 0.08:
            continue
        dist = abs(float(vals[i]) - target)
        if best is None or dist < best[0]:
            best = (dist, float(vals[i]), ratio, spread)
    if best is None:
        raise ConvergenceError(
            f"no exponentially decaying eigenvector found near {target}")
    return best[1], best[2], best[3]
