"""Column-to-column transfer operator and the indefinite energy-flux form.

State vectors hold the solution's values on two adjacent slanted columns,
ordered (column m, rings 0..n-1, then column m+1, rings 0..n-1).  The
propagator P advances the window one column using the nearest-neighbor
vertex relation

    u(left) + u(right) + u(down) + u(up) = 4*c(lam, 1) * u(center)

centered on the rear column of the new window.  The flux matrix J encodes
the energy flux across the loop separating the two columns as a Hermitian
form with signature (n, n); P is J-unitary, which is what pins the
rightward/leftward splitting of its eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .edge_ode import EdgePotential, TransferConstants, transfer_constants
from .errors import DegenerateStencilError, DirichletPointError
from .lattice import TubeParams, crossing_edges

SIGMA_D_GUARD = 1e-12


@dataclass(frozen=True)
class PropagatorBundle:
    lam: float
    P: np.ndarray                      # 2n x 2n, real
    J: np.ndarray                      # 2n x 2n, complex Hermitian
    signature: tuple[int, int]
    params: TubeParams = field(repr=False, default=None)
    constants: TransferConstants = field(repr=False, default=None)


def _column_stencil(params: TubeParams, fourc: float):
    """Matrices (M2, A, B) with M2 @ u(m+2) = A @ u(m) + B @ u(m+1).

    Row n is the vertex relation at (column m+1, ring n); the up/down
    neighbor of a ring lands on column m, m+1, or m+2 depending on the
    shift table, hence the accumulation into the three matrices.
    """
    rings = params.rings
    up = [params.up_step(n) for n in range(rings)]
    M2 = np.zeros((rings, rings))
    A = np.zeros((rings, rings))
    B = np.zeros((rings, rings))
    for n in range(rings):
        B[n, n] += fourc
        A[n, n] += -1.0                           # u(column m, ring n)
        M2[n, n] += 1.0                           # u(column m+2, ring n)
        if up[n] == 1:                            # up-neighbor of ring n
            A[n, (n + 1) % rings] += -1.0
        else:
            B[n, (n + 1) % rings] += -1.0
        if up[(n - 1) % rings] == 1:              # down-neighbor of ring n
            M2[n, (n - 1) % rings] += 1.0
        else:
            B[n, (n - 1) % rings] += -1.0
    return M2, A, B


def _flux_matrix(params: TubeParams, s_val: float) -> np.ndarray:
    """Hermitian J with u^* J v = sum of per-edge fluxes across the loop."""
    rings = params.rings
    J = np.zeros((2 * rings, 2 * rings), dtype=complex)
    pref = 1.0 / (2j * s_val)
    for edge in crossing_edges(params):
        p = edge.tail.ring                 # column 0 block
        w = rings + edge.head.ring         # column 1 block
        J[p, w] += pref
        J[w, p] -= pref
    return J


def build_propagator(lam: float, params: TubeParams,
                     constants: TransferConstants | None = None
                     ) -> PropagatorBundle:
    """Assemble P and J at energy lam; lam must avoid the Dirichlet spectrum."""
    if constants is None:
        constants = transfer_constants(lam, EdgePotential.zero())
    if abs(constants.s) < SIGMA_D_GUARD:
        raise DirichletPointError(
            f"lambda = {lam} lies in the edge Dirichlet spectrum", lam=lam)
    rings = params.rings
    M2, A, B = _column_stencil(params, 4.0 * constants.c)
    # M2 is unipotent (identity plus a broken subdiagonal cycle), so this
    # solve cannot fail for a correctly built stencil.
    try:
        lower = np.linalg.solve(M2, np.hstack([A, B]))
    except np.linalg.LinAlgError as exc:
        raise DegenerateStencilError(
            f"singular column solve at lambda = {lam}") from exc
    P = np.zeros((2 * rings, 2 * rings))
    P[:rings, rings:] = np.eye(rings)
    P[rings:, :] = lower
    J = _flux_matrix(params, constants.s)
    eig = np.linalg.eigvalsh(J)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(eig))))
    signature = (int(np.sum(eig > tol)), int(np.sum(eig < -tol)))
    return PropagatorBundle(lam=float(lam), P=P, J=J, signature=signature,
                            params=params, constants=constants)


def propagate(state: np.ndarray, steps: int, bundle: PropagatorBundle) -> np.ndarray:
    """Apply P^steps to the state; negative steps use the inverse."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (bundle.P.shape[0],):
        raise ValueError(f"state must have shape ({bundle.P.shape[0]},)")
    if steps == 0:
        return state.copy()
    return np.linalg.matrix_power(bundle.P, steps) @ state


def flux(state_a: np.ndarray, state_b: np.ndarray, bundle: PropagatorBundle) -> complex:
    """The flux form a^* J b; conjugate-symmetric, invariant under P."""
    a = np.asarray(state_a, dtype=complex)
    b = np.asarray(state_b, dtype=complex)
    return complex(np.vdot(a, bundle.J @ b))
