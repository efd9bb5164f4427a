"""Semi-infinite tube: boundary linear system, scattering, bound states.

Cutting the tube leaves the columns m >= 0 and exposes the beta*delta
column-0 vertices, each given a Robin condition a*u + b*(sum of outgoing
derivatives) = 0; a finite auxiliary graph may be glued to them.  Any
solution at energy lam restricts, away from the boundary, to a combination
of the tube's Floquet modes, so imposing the boundary and auxiliary vertex
conditions produces a homogeneous linear system F in the auxiliary vertex
values and the outgoing/incoming mode coefficients.

Scattering inverts the (aux, outgoing) block of F against the incoming
columns; a rank-deficient block signals a bound state, whose propagating
outgoing content is forced to zero by flux conservation.  Robin
coefficients realizing a prescribed single-mode bound state (embedded or
not) are constructed from the real root of the sector-0 dispersion
polynomial.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .bands import band_edge_values
from .dispersion import (LEFT_EVAN, LEFT_PROP, RIGHT_EVAN, RIGHT_PROP,
                         FloquetMode, ModeSet, cross_flux, mode_set,
                         require_not_band_edge, state_vector)
from .edge_ode import (EdgePotential, TransferConstants, dirichlet_spectrum,
                       reconstruct_edge, transfer_constants)
from .errors import (ConsistencyError, DirichletPointError, InfeasibleError,
                     ValidationError)
from .lattice import TubeParams, make_params

# Smallest singular value below which the bound-state system counts as
# rank-deficient, and the polish target for accepted candidates.
SV_THRESHOLD = 1e-6
SV_POLISH_TARGET = 1e-10

# Scan points closer than this to sigma_D or a band edge are skipped.
EXCLUSION_RADIUS = 1e-6

# |s(lam, L)| below this is treated as a Dirichlet point of that edge.
SIGMA_D_GUARD = 1e-9

# Verification profile resolution and decay-fit column range.
VERIFY_EDGE_SAMPLES = 4001
VERIFY_COLUMNS = 20


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class InternalEdge:
    u: int
    v: int
    length: float
    potential: EdgePotential


@dataclass(frozen=True)
class AttachmentEdge:
    vertex: int
    ring: int
    length: float
    potential: EdgePotential


@dataclass(frozen=True)
class AuxGraph:
    """Finite graph glued to the boundary rings of the half-tube."""

    vertex_robin: tuple[tuple[float, float], ...] = ()
    internal_edges: tuple[InternalEdge, ...] = ()
    attachment_edges: tuple[AttachmentEdge, ...] = ()

    @property
    def vertex_count(self) -> int:
        return len(self.vertex_robin)

    @classmethod
    def empty(cls) -> "AuxGraph":
        return cls()


@dataclass(frozen=True)
class HalfTubeConfig:
    params: TubeParams
    potential: EdgePotential
    boundary_robin: tuple[tuple[float, float], ...]
    aux: AuxGraph = AuxGraph.empty()

    def __post_init__(self):
        rings = self.params.rings
        if len(self.boundary_robin) != rings:
            raise ValidationError(
                f"boundary_robin needs {rings} pairs, got {len(self.boundary_robin)}")
        for n, (a, b) in enumerate(self.boundary_robin):
            if a == 0.0 and b == 0.0:
                raise ValidationError(f"boundary Robin pair {n} is (0, 0)")
        for v, (a, b) in enumerate(self.aux.vertex_robin):
            if a == 0.0 and b == 0.0:
                raise ValidationError(f"auxiliary Robin pair {v} is (0, 0)")
        gamma = self.aux.vertex_count
        for e in self.aux.internal_edges:
            if not (0 <= e.u < gamma and 0 <= e.v < gamma):
                raise ValidationError(f"internal edge {e} references a missing vertex")
            if e.length <= 0:
                raise ValidationError("edge lengths must be positive")
        for e in self.aux.attachment_edges:
            if not (0 <= e.vertex < gamma):
                raise ValidationError(f"attachment edge {e} references a missing vertex")
            if not (0 <= e.ring < rings):
                raise ValidationError(f"attachment edge {e} targets a missing ring")
            if e.length <= 0:
                raise ValidationError("edge lengths must be positive")

    def to_json(self) -> dict:
        aux_edges = []
        for e in self.aux.internal_edges:
            aux_edges.append({"from": e.u, "to": {"aux": e.v}, "length": e.length,
                              "potential": e.potential.to_json()})
        for e in self.aux.attachment_edges:
            aux_edges.append({"from": e.vertex, "to": {"ring": e.ring},
                              "length": e.length,
                              "potential": e.potential.to_json()})
        return {
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "delta": self.params.delta,
            "potential": self.potential.to_json(),
            "boundary_robin": [{"a": a, "b": b} for a, b in self.boundary_robin],
            "aux": {
                "vertices": [{"a": a, "b": b} for a, b in self.aux.vertex_robin],
                "edges": aux_edges,
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HalfTubeConfig":
        try:
            params = make_params(int(obj["alpha"]), int(obj["beta"]), int(obj["delta"]))
        except KeyError as exc:
            raise ValidationError(f"config missing key {exc}") from exc
        potential = EdgePotential.from_json(obj.get("potential", {"type": "zero"}))
        rings = params.rings
        robin_spec = obj.get("boundary_robin")
        if robin_spec is None:
            robin = tuple((0.0, 1.0) for _ in range(rings))     # Neumann default
        else:
            robin = tuple((float(r["a"]), float(r["b"])) for r in robin_spec)
        aux_spec = obj.get("aux") or {}
        vertex_robin = tuple((float(r["a"]), float(r["b"]))
                             for r in aux_spec.get("vertices", []))
        internal, attach = [], []
        for e in aux_spec.get("edges", []):
            pot = EdgePotential.from_json(e.get("potential", {"type": "zero"}))
            length = float(e.get("length", 1.0))
            to = e.get("to", {})
            if "aux" in to:
                internal.append(InternalEdge(int(e["from"]), int(to["aux"]), length, pot))
            elif "ring" in to:
                attach.append(AttachmentEdge(int(e["from"]), int(to["ring"]), length, pot))
            else:
                raise ValidationError(f"aux edge target {to!r} must name 'aux' or 'ring'")
        aux = AuxGraph(vertex_robin=vertex_robin, internal_edges=tuple(internal),
                       attachment_edges=tuple(attach))
        return cls(params=params, potential=potential, boundary_robin=robin, aux=aux)


def neumann_config(params: TubeParams,
                   potential: EdgePotential | None = None) -> HalfTubeConfig:
    """Plain half-tube: Neumann boundary conditions, no auxiliary graph."""
    return HalfTubeConfig(params=params,
                          potential=potential or EdgePotential.zero(),
                          boundary_robin=tuple((0.0, 1.0) for _ in range(params.rings)))


# ---------------------------------------------------------------------------
# channel basis

PROP = "propagating"
EVAN = "evanescent"


@dataclass(frozen=True)
class Channel:
    """A matched (rightward, leftward) mode pair in the flux-normalized basis."""

    index: int
    kind: str                       # PROP | EVAN
    plus: FloquetMode               # rightward (outgoing)
    minus: FloquetMode              # leftward (incoming)
    scale_plus: complex
    scale_minus: complex

    def value_at(self, column: int, ring: int, params: TubeParams,
                 outgoing: bool) -> complex:
        mode = self.plus if outgoing else self.minus
        scale = self.scale_plus if outgoing else self.scale_minus
        return scale * mode.z1 ** (column + params.shifts[ring]) * mode.z2 ** ring


def _phase_fix(x: np.ndarray) -> complex:
    """Unit factor making the largest-magnitude coordinate of x real positive."""
    i = int(np.argmax(np.abs(x)))
    a = x[i]
    if a == 0:
        return 1.0 + 0.0j
    return abs(a) / a


def _left_sort_key(m: FloquetMode):
    ang = cmath.phase(m.z1) % (2.0 * math.pi)
    return (m.ell, round(ang, 12), round(abs(m.z1), 12))


def _greedy_partner(left: FloquetMode, pool: list[FloquetMode],
                    used: set[int], reflect: bool) -> int:
    """Index in pool of the nearest conjugate (or circle-reflected) partner."""
    if reflect:
        t1, t2 = 1.0 / np.conj(left.z1), 1.0 / np.conj(left.z2)
    else:
        t1, t2 = np.conj(left.z1), np.conj(left.z2)
    best, best_d = -1, math.inf
    for i, cand in enumerate(pool):
        if i in used:
            continue
        d = abs(cand.z1 - t1) + abs(cand.z2 - t2)
        if d < best_d - 1e-15:
            best, best_d = i, d
    if best < 0:
        raise ConsistencyError("mode pairing ran out of rightward partners")
    return best


def channel_basis(ms: ModeSet, params: TubeParams,
                  constants: TransferConstants) -> list[Channel]:
    """The beta*delta flux-normalized channels of the mode set.

    Leftward (incoming) modes are ordered by (sector, arg z1, |z1|); each is
    paired greedily with its conjugate (propagating) or circle-reflected
    (evanescent) rightward partner.  Propagating members are scaled to
    self-flux +-1, evanescent pairs to unit cross-flux, with phases fixed by
    making the largest state-vector coordinate real positive.
    """
    require_not_band_edge(ms)
    lefts = sorted([m for m in ms.modes if m.leftward], key=_left_sort_key)
    right_prop = sorted([m for m in ms.modes if m.classification == RIGHT_PROP],
                        key=_left_sort_key)
    right_evan = sorted([m for m in ms.modes if m.classification == RIGHT_EVAN],
                        key=_left_sort_key)
    used_prop: set[int] = set()
    used_evan: set[int] = set()
    channels = []
    for idx, lm in enumerate(lefts):
        if lm.classification == LEFT_PROP:
            j = _greedy_partner(lm, right_prop, used_prop, reflect=False)
            used_prop.add(j)
            rm = right_prop[j]
            sp = _phase_fix(state_vector(rm, params)) / math.sqrt(rm.self_flux)
            sm = _phase_fix(state_vector(lm, params)) / math.sqrt(-lm.self_flux)
            kind = PROP
        else:
            j = _greedy_partner(lm, right_evan, used_evan, reflect=True)
            used_evan.add(j)
            rm = right_evan[j]
            t = cross_flux(rm, lm, ms.lam, params, constants)    # [u+, u-]
            if abs(t) < 1e-13:
                raise ConsistencyError(
                    f"vanishing cross-flux for a reflection pair at lambda = {ms.lam}")
            sp = _phase_fix(state_vector(rm, params)) / math.sqrt(abs(t))
            sm = 1.0 / (np.conj(sp) * t)
            kind = EVAN
        channels.append(Channel(index=idx, kind=kind, plus=rm, minus=lm,
                                scale_plus=complex(sp), scale_minus=complex(sm)))
    if len(channels) != params.rings:
        raise ConsistencyError(
            f"expected {params.rings} channels, got {len(channels)}")
    return channels


# ---------------------------------------------------------------------------
# boundary system


@dataclass(frozen=True)
class BoundarySystem:
    """Assembled F plus everything needed to interpret its columns."""

    lam: float
    config: HalfTubeConfig
    modes: ModeSet
    channels: list[Channel]
    F: np.ndarray                   # (gamma + rings) x (gamma + 2 rings)
    constants: TransferConstants = field(repr=False, default=None)

    @property
    def gamma(self) -> int:
        return self.config.aux.vertex_count

    @property
    def rings(self) -> int:
        return self.config.params.rings

    @property
    def prop_indices(self) -> list[int]:
        return [ch.index for ch in self.channels if ch.kind == PROP]


def _edge_constants(lam: float, config: HalfTubeConfig) -> dict:
    """Transfer constants per distinct aux edge, with Dirichlet guards."""
    out = {}
    for tag, e in _all_aux_edges(config):
        const = transfer_constants(lam, e.potential, e.length)
        if abs(const.s) < SIGMA_D_GUARD:
            raise DirichletPointError(
                f"lambda = {lam} lies in the Dirichlet spectrum of {tag} "
                f"(length {e.length})", lam=lam, edge=tag)
        out[tag] = const
    return out


def _all_aux_edges(config: HalfTubeConfig):
    for i, e in enumerate(config.aux.internal_edges):
        yield (f"aux internal edge {i}", e)
    for i, e in enumerate(config.aux.attachment_edges):
        yield (f"aux attachment edge {i}", e)


def boundary_system(lam: float, config: HalfTubeConfig,
                    modes: ModeSet | None = None) -> BoundarySystem:
    """Build the boundary system at lam; channels are flux-normalized."""
    constants = transfer_constants(lam, config.potential)
    if abs(constants.s) < SIGMA_D_GUARD:
        raise DirichletPointError(
            f"lambda = {lam} lies in the Dirichlet spectrum of the tube edges",
            lam=lam, edge="tube edge")
    if modes is None:
        modes = mode_set(lam, config.params, constants)
    channels = channel_basis(modes, config.params, constants)
    F = _assemble(lam, config, channels, constants)
    return BoundarySystem(lam=float(lam), config=config, modes=modes,
                          channels=channels, F=F, constants=constants)


def _assemble(lam: float, config: HalfTubeConfig, channels: list[Channel],
              constants: TransferConstants) -> np.ndarray:
    params = config.params
    rings, gamma = params.rings, config.aux.vertex_count
    edge_const = _edge_constants(lam, config)
    c1, s1 = constants.c, constants.s
    F = np.zeros((gamma + rings, gamma + 2 * rings), dtype=complex)

    attach_at_ring: dict[int, list[tuple[str, AttachmentEdge]]] = {}
    for tag, e in _all_aux_edges(config):
        if isinstance(e, AttachmentEdge):
            attach_at_ring.setdefault(e.ring, []).append((tag, e))

    def mode_cols():
        # column offset within F, channel, outgoing?
        for j, ch in enumerate(channels):
            yield gamma + j, ch, True
        for j, ch in enumerate(channels):
            yield gamma + rings + j, ch, False

    # Robin rows at the boundary vertices.  For a mode with multipliers
    # (z1, z2) and value val at v_n, the incident-edge derivative sum inside
    # the tube is val*(z1 + 1/z2 - 2c + chi_n*(z2 - c))/s: rightward and
    # downward edges always, the upward edge only when chi_n = 1.
    for n in range(rings):
        a_n, b_n = config.boundary_robin[n]
        chi = params.boundary_degree_flags[n]
        attached = attach_at_ring.get(n, [])
        for col, ch, outgoing in mode_cols():
            mode = ch.plus if outgoing else ch.minus
            val = ch.value_at(0, n, params, outgoing)
            dsum = val * (mode.z1 + 1.0 / mode.z2 - 2.0 * c1
                          + chi * (mode.z2 - c1)) / s1
            entry = a_n * val + b_n * dsum
            for tag, e in attached:
                ec = edge_const[tag]
                entry += b_n * (-(ec.c / ec.s) * val)
            F[n, col] = entry
        for tag, e in attached:
            ec = edge_const[tag]
            F[n, e.vertex] += b_n / ec.s

    # Robin rows at the auxiliary vertices.
    for v in range(gamma):
        a_v, b_v = config.aux.vertex_robin[v]
        row = rings + v
        F[row, v] += a_v
        for i, e in enumerate(config.aux.internal_edges):
            tag = f"aux internal edge {i}"
            ec = edge_const[tag]
            if e.u == v:
                F[row, v] += -b_v * ec.c / ec.s
                F[row, e.v] += b_v / ec.s
            if e.v == v:
                F[row, v] += -b_v * ec.c / ec.s
                F[row, e.u] += b_v / ec.s
        for i, e in enumerate(config.aux.attachment_edges):
            if e.vertex != v:
                continue
            tag = f"aux attachment edge {i}"
            ec = edge_const[tag]
            F[row, v] += -b_v * ec.c / ec.s
            for col, ch, outgoing in mode_cols():
                val = ch.value_at(0, e.ring, params, outgoing)
                F[row, col] += b_v * val / ec.s
    return F


def assemble_F(lam: float, config: HalfTubeConfig,
               modes: ModeSet | None = None) -> np.ndarray:
    """The (gamma + rings) x (gamma + 2 rings) boundary matrix at lam.

    Columns are ordered (auxiliary vertex values, outgoing coefficients,
    incoming coefficients) in the flux-normalized channel basis.
    """
    return boundary_system(lam, config, modes).F


# ---------------------------------------------------------------------------
# scattering


@dataclass(frozen=True)
class ScatteringResult:
    lam: float
    S: np.ndarray | None            # rings x rings, incoming -> outgoing
    aux_values: np.ndarray | None   # gamma x rings
    flux_residual: float
    singular: bool
    channels: list[Channel] = field(repr=False, default=None)
    prop_indices: tuple[int, ...] = ()


def conservation_residual(c_out: np.ndarray, c_in: np.ndarray,
                          channels: list[Channel]) -> float:
    """|flux quadratic form| of a solution in the normalized channel basis."""
    total = 0.0
    for j, ch in enumerate(channels):
        if ch.kind == PROP:
            total += abs(c_out[j]) ** 2 - abs(c_in[j]) ** 2
        else:
            total += 2.0 * float(np.real(np.conj(c_out[j]) * c_in[j]))
    return abs(total)


def scattering_matrix(lam: float, config: HalfTubeConfig) -> ScatteringResult:
    """Solve the reflection problem: incoming coefficients to outgoing ones.

    A numerically singular (aux, outgoing) block is reported via
    ``singular=True`` rather than an exception: it is the bound-state signal
    used by the scan.
    """
    sys = boundary_system(lam, config)
    gamma, rings = sys.gamma, sys.rings
    A = sys.F[:, :gamma + rings]
    B = sys.F[:, gamma + rings:]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] < 1e-10 * max(1.0, sv[0]):
        return ScatteringResult(lam=float(lam), S=None, aux_values=None,
                                flux_residual=math.inf, singular=True,
                                channels=sys.channels,
                                prop_indices=tuple(sys.prop_indices))
    X = np.linalg.solve(A, -B)
    aux_values = X[:gamma, :]
    S = X[gamma:, :]
    residual = 0.0
    for k in sys.prop_indices:
        c_in = np.zeros(rings, dtype=complex)
        c_in[k] = 1.0
        residual = max(residual,
                       conservation_residual(S[:, k], c_in, sys.channels))
    return ScatteringResult(lam=float(lam), S=S, aux_values=aux_values,
                            flux_residual=residual, singular=False,
                            channels=sys.channels,
                            prop_indices=tuple(sys.prop_indices))


# ---------------------------------------------------------------------------
# bound states


@dataclass(frozen=True)
class BoundStateCandidate:
    lam: float
    smallest_singular_value: float
    outgoing: np.ndarray
    aux_values: np.ndarray
    embedded: bool
    residual: float = math.nan
    decay_ratio: float = math.nan


def bound_state_matrix(sys: BoundarySystem) -> np.ndarray:
    """F with incoming columns deleted; inside the spectrum, extra rows force
    the propagating outgoing coefficients to vanish (the system is then
    overdetermined, as conservation demands)."""
    gamma, rings = sys.gamma, sys.rings
    M = sys.F[:, :gamma + rings]
    prop = sys.prop_indices
    if prop:
        extra = np.zeros((len(prop), gamma + rings), dtype=complex)
        for i, j in enumerate(prop):
            extra[i, gamma + j] = 1.0
        M = np.vstack([M, extra])
    return M


def smallest_singular_value(lam: float, config: HalfTubeConfig) -> float:
    sys = boundary_system(lam, config)
    return float(np.linalg.svd(bound_state_matrix(sys), compute_uv=False)[-1])


def candidate_at(lam: float, config: HalfTubeConfig,
                 verify: bool = True) -> BoundStateCandidate:
    """Bound-state candidate from the smallest singular pair at lam."""
    sys = boundary_system(lam, config)
    M = bound_state_matrix(sys)
    _, sv, vh = np.linalg.svd(M)
    vec = np.conj(vh[-1, :])
    vec = vec * _phase_fix(vec)
    gamma = sys.gamma
    cand = BoundStateCandidate(
        lam=float(lam), smallest_singular_value=float(sv[-1]),
        outgoing=vec[gamma:], aux_values=vec[:gamma],
        embedded=bool(sys.prop_indices))
    if verify:
        report = verify_bound_state(cand, config)
        cand = replace(cand, residual=report.residual,
                       decay_ratio=report.decay_ratio)
    return cand


def scan_exclusions(window: tuple[float, float],
                    config: HalfTubeConfig) -> list[float]:
    """sigma_D points of every edge plus band edges inside the window."""
    lo, hi = window
    pts = list(dirichlet_spectrum(config.potential, (lo, hi)))
    for _, e in _all_aux_edges(config):
        pts.extend(dirichlet_spectrum(e.potential, (lo, hi), e.length))
    pts.extend(band_edge_values((lo, hi), config.params, config.potential))
    return sorted(pts)


def bound_state_scan(lambda_window: tuple[float, float], config: HalfTubeConfig,
                     grid: int = 400, threads: int = 1) -> list[BoundStateCandidate]:
    """Scan the window for rank deficiencies of the bound-state system.

    Grid points within EXCLUSION_RADIUS of sigma_D or a band edge are
    skipped; local minima of the smallest singular value below SV_THRESHOLD
    are polished by golden-section search and returned as candidates.  The
    grid sweep parallelizes over ``threads`` workers; results do not depend
    on the worker count.
    """
    lo, hi = float(lambda_window[0]), float(lambda_window[1])
    if hi <= lo or grid < 3:
        raise ValidationError("bad scan window or grid")
    exclusions = scan_exclusions((lo - 1.0, hi + 1.0), config)

    def excluded(x: float) -> bool:
        return any(abs(x - p) <= EXCLUSION_RADIUS for p in exclusions)

    xs = np.linspace(lo, hi, grid)
    sig = np.full(grid, np.nan)
    live = [i for i in range(grid) if not excluded(float(xs[i]))]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, val in zip(live, pool.map(
                    lambda i: smallest_singular_value(float(xs[i]), config), live)):
                sig[i] = val
    else:
        for i in live:
            sig[i] = smallest_singular_value(float(xs[i]), config)

    candidates = []
    for i in range(grid):
        if not np.isfinite(sig[i]) or sig[i] >= SV_THRESHOLD:
            continue
        left = sig[i - 1] if i > 0 and np.isfinite(sig[i - 1]) else math.inf
        right = sig[i + 1] if i + 1 < grid and np.isfinite(sig[i + 1]) else math.inf
        if sig[i] > left or sig[i] > right:
            continue            # not a local minimum
        a = xs[i - 1] if i > 0 else xs[i]
        b = xs[i + 1] if i + 1 < grid else xs[i]

        def objective(x: float) -> float:
            return smallest_singular_value(float(x), config)

        lam_star = None
        if a < xs[i] < b and left < math.inf and right < math.inf:
            try:
                res = minimize_scalar(objective,
                                      bracket=(float(a), float(xs[i]), float(b)),
                                      method="golden", options={"xtol": 1e-13})
                lam_star = float(res.x)
            except ValueError:
                lam_star = None      # degenerate bracket; fall through to Brent
        if lam_star is None:
            res = minimize_scalar(objective, bounds=(float(a), float(b)),
                                  method="bounded", options={"xatol": 1e-13})
            lam_star = float(res.x)
        if excluded(lam_star):
            continue
        cand = candidate_at(lam_star, config)
        if cand.smallest_singular_value < SV_THRESHOLD:
            candidates.append(cand)
    # a minimum straddling grid points can be found twice; keep one
    deduped: list[BoundStateCandidate] = []
    for cand in sorted(candidates, key=lambda c: c.lam):
        if deduped and abs(cand.lam - deduped[-1].lam) < 1e-8:
            if cand.smallest_singular_value < deduped[-1].smallest_singular_value:
                deduped[-1] = cand
            continue
        deduped.append(cand)
    return deduped


# ---------------------------------------------------------------------------
# Robin design for prescribed single-mode bound states

_CASES = ("a", "b", "c", "d")


def real_axis_root(case: str, lam: float, params: TubeParams) -> float:
    """The real root z of z^b + z^-b + z^a + z^-a = 4*c(lam, 1) for the case.

    Case a roots lie in (0, 1); cases b, c, d in (-1, 0).  On either
    interval the map is strictly monotone, so the root is unique and found
    by bracketing bisection.
    """
    a, b = params.alpha, params.beta
    const = transfer_constants(lam, EdgePotential.zero())
    target = 4.0 * const.c

    def f_signed(t: float) -> float:
        z = t if case == "a" else -t
        return z ** b + z ** (-b) + z ** a + z ** (-a) - target

    t_hi = 1.0 - 1e-13
    t_lo = 0.5
    f_hi = f_signed(t_hi)
    f_lo = f_signed(t_lo)
    tries = 0
    while f_lo * f_hi > 0.0:
        t_lo /= 2.0
        f_lo = f_signed(t_lo)
        tries += 1
        if tries > 900:
            raise InfeasibleError(
                f"no real root bracket for case {case} at lambda = {lam}")
    t = brentq(f_signed, t_lo, t_hi, xtol=1e-16, rtol=8.9e-16)
    return float(t if case == "a" else -t)


def design_robin(case: str, lam: float, params: TubeParams,
                 potential: EdgePotential | None = None) -> HalfTubeConfig:
    """Robin coefficients making one decaying sector-0 Floquet mode a bound state.

    Cases: (a) lam < 0; (b) beta even, lam < 0; (c) beta even, lam > 0 with
    cos(sqrt(lam)) > 0; (d) beta odd with alpha even, lam > 0 with
    cos(sqrt(lam)) < 0.  Cases c and d give eigenvalues embedded in the
    continuous spectrum.  The boundary rows take b_n = 1 and
    a_n = -(z^b + z^a - 2c + (z^-a - c)*chi_n)/s, which annihilates the
    chosen mode's column of the boundary system.
    """
    if case not in _CASES:
        raise ValidationError(f"case must be one of {_CASES}, got {case!r}")
    potential = potential or EdgePotential.zero()
    if not potential.is_zero:
        raise ValidationError("Robin design requires the zero potential")
    lam = float(lam)
    const = transfer_constants(lam, potential)
    if abs(const.s) < SIGMA_D_GUARD:
        raise ValidationError(
            f"lambda = {lam} lies in the edge Dirichlet spectrum")
    if case == "a":
        if lam >= 0:
            raise ValidationError("case a requires lambda < 0")
    elif case == "b":
        if params.beta % 2 != 0:
            raise ValidationError("case b requires beta even")
        if lam >= 0:
            raise ValidationError("case b requires lambda < 0")
    elif case == "c":
        if params.beta % 2 != 0:
            raise ValidationError("case c requires beta even")
        if lam <= 0 or const.c <= 0:
            raise ValidationError(
                "case c requires lambda > 0 with cos(sqrt(lambda)) > 0")
    else:
        if params.beta % 2 != 1 or params.alpha % 2 != 0:
            raise ValidationError("case d requires beta odd and alpha even")
        if lam <= 0 or const.c >= 0:
            raise ValidationError(
                "case d requires lambda > 0 with cos(sqrt(lambda)) < 0")
    ms = mode_set(lam, params, const)
    if ms.band_edge:
        raise ValidationError(f"lambda = {lam} is a band edge")

    z = real_axis_root(case, lam, params)
    z1 = z ** params.beta
    z2 = z ** (-params.alpha)
    expected = {
        "a": (0.0 < z1 < 1.0) and (z2 > 1.0),
        "b": (0.0 < z1 < 1.0) and (z2 < -1.0),
        "c": (0.0 < z1 < 1.0) and (z2 < -1.0),
        "d": (-1.0 < z1 < 0.0) and (z2 > 1.0),
    }[case]
    if not expected:
        raise ConsistencyError(
            f"case {case} sign pattern violated: z1 = {z1}, z2 = {z2}")
    c1, s1 = const.c, const.s
    robin = []
    for n in range(params.rings):
        chi = params.boundary_degree_flags[n]
        a_n = -(z ** params.beta + z ** params.alpha - 2.0 * c1
                + (z ** (-params.alpha) - c1) * chi) / s1
        robin.append((float(a_n), 1.0))
    return HalfTubeConfig(params=params, potential=potential,
                          boundary_robin=tuple(robin))


# ---------------------------------------------------------------------------
# independent verification


@dataclass(frozen=True)
class VerificationReport:
    residual: float
    decay_ratio: float
    column_norms: tuple[float, ...]


def _fd_end_derivatives(profile: np.ndarray, h: float) -> tuple[complex, complex]:
    """(derivative into the edge at x=0, same at x=L) by one-sided 5-point stencils."""
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    d0 = complex(np.dot(c, profile[:5]))
    dL = complex(np.dot(c, profile[-1:-6:-1]))    # mirrored stencil, already inward
    return d0, dL


def verify_bound_state(candidate: BoundStateCandidate, config: HalfTubeConfig,
                       columns: int = VERIFY_COLUMNS) -> VerificationReport:
    """Reconstruct the candidate field and re-check every vertex condition.

    The field on the first ``columns`` columns (plus the auxiliary edges) is
    rebuilt from the outgoing coefficients; each edge is resampled with
    :func:`reconstruct_edge` and its endpoint derivatives are recovered by
    one-sided finite differences, so the check does not reuse the
    (value - c*value)/s algebra the system was assembled with.  Returns the
    maximum condition violation of the sup-normalized field and the decay
    ratio of successive column norms.
    """
    params = config.params
    rings = params.rings
    sys = boundary_system(candidate.lam, config)
    edge_const = _edge_constants(candidate.lam, config)
    del edge_const  # guards Dirichlet points; derivatives below are FD-based

    # vertex values of the mode sum on columns 0..columns
    values = np.zeros((columns + 1, rings), dtype=complex)
    for j, ch in enumerate(sys.channels):
        coef = candidate.outgoing[j]
        if coef == 0:
            continue
        base = np.array([ch.value_at(0, n, params, outgoing=True)
                         for n in range(rings)])
        for c in range(columns + 1):
            values[c] += coef * base * ch.plus.z1 ** c
    aux_vals = np.asarray(candidate.aux_values, dtype=complex)

    scale = max(float(np.max(np.abs(values[:3]))),
                float(np.max(np.abs(aux_vals))) if aux_vals.size else 0.0)
    if scale == 0.0:
        return VerificationReport(residual=0.0, decay_ratio=math.nan,
                                  column_norms=(0.0,) * (columns + 1))
    values /= scale
    aux_vals = aux_vals / scale

    # edge profiles; derivative contributions accumulate per vertex
    deriv_sum: dict = {}

    def add_edge(key_a, key_b, ua, ub, potential, length):
        prof = reconstruct_edge(ua, ub, candidate.lam, potential,
                                VERIFY_EDGE_SAMPLES, length)
        h = length / (VERIFY_EDGE_SAMPLES - 1)
        d0, dL = _fd_end_derivatives(prof, h)
        deriv_sum[key_a] = deriv_sum.get(key_a, 0.0) + d0
        deriv_sum[key_b] = deriv_sum.get(key_b, 0.0) + dL

    up = [params.up_step(n) for n in range(rings)]
    for c in range(columns):
        for n in range(rings):
            add_edge(("t", c, n), ("t", c + 1, n), values[c, n], values[c + 1, n],
                     config.potential, 1.0)
    for c in range(columns + 1):
        for n in range(rings):
            cu = c - up[n]
            if 0 <= cu <= columns:
                nu = (n + 1) % rings
                add_edge(("t", c, n), ("t", cu, nu), values[c, n], values[cu, nu],
                         config.potential, 1.0)
    for e in config.aux.internal_edges:
        add_edge(("a", e.u), ("a", e.v), aux_vals[e.u], aux_vals[e.v],
                 e.potential, e.length)
    for e in config.aux.attachment_edges:
        add_edge(("a", e.vertex), ("t", 0, e.ring), aux_vals[e.vertex],
                 values[0, e.ring], e.potential, e.length)

    residual = 0.0
    for n in range(rings):
        a_n, b_n = config.boundary_robin[n]
        residual = max(residual, abs(a_n * values[0, n]
                                     + b_n * deriv_sum.get(("t", 0, n), 0.0)))
    for c in range(1, columns - 1):
        for n in range(rings):
            residual = max(residual, abs(deriv_sum.get(("t", c, n), 0.0)))
    for v in range(config.aux.vertex_count):
        a_v, b_v = config.aux.vertex_robin[v]
        residual = max(residual, abs(a_v * aux_vals[v]
                                     + b_v * deriv_sum.get(("a", v), 0.0)))

    norms = tuple(float(np.max(np.abs(values[c]))) for c in range(columns + 1))
    ratios = [norms[c + 1] / norms[c]
              for c in range(4, columns - 1) if norms[c] > 1e-280]
    decay = float(np.median(ratios)) if ratios else math.nan
    return VerificationReport(residual=float(residual), decay_ratio=decay,
                              column_norms=norms)
