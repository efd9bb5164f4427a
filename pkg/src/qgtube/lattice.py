"""Tube geometry: canonical vertex coordinates and fundamental-domain tables.

The tube is the square lattice modulo the translation (alpha*delta,
beta*delta) with gcd(alpha, beta) = 1 and 0 < alpha < beta.  A vertex is
named by (column, ring): ring is the vertical index modulo beta*delta and
column counts slanted-column translates, with the canonical column-0
vertices at lattice points (s(n), n), s(n) = ceil(alpha*n/beta).  These
sit immediately right of (or on) the line through (0, 0) and
(alpha*delta, beta*delta), the loop the flux is measured across.

Derived tables:
  s(n)   horizontal shifts from the ring-0 column vertex to the ring-n one,
  r(n)   = s(n)*beta - n*alpha, the exponent giving Floquet-mode values
         z^r(n) on the column-0 vertices when delta = 1,
  chi(n) 1 when the up-neighbor of ring n stays in the same column (the
         vertex touches three fundamental-domain edges), else 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ValidationError


class VertexId(NamedTuple):
    column: int
    ring: int


class CrossingEdge(NamedTuple):
    """One directed edge crossing the loop between two adjacent columns."""

    tail: VertexId          # on the left (smaller-column) side
    head: VertexId          # on the right side
    orientation: str        # "horizontal" | "vertical"


@dataclass(frozen=True)
class TubeParams:
    alpha: int
    beta: int
    delta: int
    shifts: tuple[int, ...]                 # s(n), n = 0..beta*delta-1
    exponents: tuple[int, ...]              # r(n)
    boundary_degree_flags: tuple[int, ...]  # chi(n) in {0, 1}

    @property
    def rings(self) -> int:
        """Number of rings beta*delta = vertices per slanted column."""
        return self.beta * self.delta

    def shift(self, n: int) -> int:
        """s(n) extended to all integers: s(n + rings) = s(n) + alpha*delta."""
        return -((-self.alpha * n) // self.beta)

    def up_step(self, n: int) -> int:
        """Column drop of the up-neighbor of ring n; equals 1 - chi(n mod rings)."""
        return self.shift(n + 1) - self.shift(n)

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "delta": self.delta}


def make_params(alpha: int, beta: int, delta: int) -> TubeParams:
    """Validated tube parameters with the derived tables populated."""
    for name, v in (("alpha", alpha), ("beta", beta), ("delta", delta)):
        if not isinstance(v, (int,)) or isinstance(v, bool):
            raise ValidationError(f"{name} must be an integer, got {v!r}")
    if alpha <= 0 or delta <= 0:
        raise ValidationError("alpha and delta must be positive")
    if alpha >= beta:
        raise ValidationError(f"need 0 < alpha < beta, got alpha={alpha}, beta={beta}")
    if math.gcd(alpha, beta) != 1:
        raise ValidationError(f"gcd(alpha, beta) must be 1, got gcd={math.gcd(alpha, beta)}")
    rings = beta * delta
    s = [-((-alpha * n) // beta) for n in range(rings + 1)]   # s[rings] = alpha*delta
    shifts = tuple(s[:rings])
    exponents = tuple(s[n] * beta - n * alpha for n in range(rings))
    chi = tuple(1 - (s[n + 1] - s[n]) for n in range(rings))
    params = TubeParams(alpha=alpha, beta=beta, delta=delta, shifts=shifts,
                        exponents=exponents, boundary_degree_flags=chi)
    assert sum(chi) == (beta - alpha) * delta
    return params


def canonicalize(m: int, n: int, params: TubeParams) -> VertexId:
    """Canonical (column, ring) of the lattice point (m, n) on the tube.

    ring = n mod beta*delta; column = m - s(n) with s extended periodically,
    so the column is invariant under adding (alpha*delta, beta*delta).
    """
    ring = n % params.rings
    return VertexId(column=m - params.shift(n), ring=ring)


def lattice_point(v: VertexId, params: TubeParams) -> tuple[int, int]:
    """A lattice representative of v with ring in [0, beta*delta)."""
    return (v.column + params.shifts[v.ring % params.rings], v.ring % params.rings)


def neighbors(v: VertexId, params: TubeParams) -> tuple[VertexId, VertexId, VertexId, VertexId]:
    """The four nearest neighbors (h^-1 v, h v, v^-1 v, v v), canonicalized."""
    m, n = lattice_point(v, params)
    return (
        canonicalize(m - 1, n, params),
        canonicalize(m + 1, n, params),
        canonicalize(m, n - 1, params),
        canonicalize(m, n + 1, params),
    )


def crossing_edges(params: TubeParams) -> list[CrossingEdge]:
    """The (alpha+beta)*delta directed edges crossing the loop between columns 0 and 1.

    beta*delta horizontal edges run rightward from (0, n) to (1, n); for each
    ring n with chi(n) = 0 one vertical edge runs downward from (0, n+1) to
    (1, n).  Directions point from the left of the loop to the right, which
    is the orientation the energy flux is summed over.
    """
    rings = params.rings
    edges = [CrossingEdge(VertexId(0, n), VertexId(1, n), "horizontal")
             for n in range(rings)]
    for n in range(rings):
        if params.boundary_degree_flags[n] == 0:
            edges.append(CrossingEdge(VertexId(0, (n + 1) % rings),
                                      VertexId(1, n), "vertical"))
    return edges


def boundary_degree(n: int, params: TubeParams) -> int:
    """Degree of the column-0 vertex of ring n inside the half-tube.

    The left edge is always cut away and the up edge survives only when
    chi(n) = 1, so the degree is 2 + chi(n).
    """
    return 2 + params.boundary_degree_flags[n % params.rings]
