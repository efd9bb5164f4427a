"""Spectral toolkit for semi-infinite square-lattice quantum-graph tubes.

The library computes, at desk scale and with brute-force cross-checks:

* transfer constants of the edge operator -u'' + q(x)u (``edge_ode``),
* the tube geometry tables and neighbor maps (``lattice``),
* all Floquet modes of the complex dispersion relation (``dispersion``),
* the flux-unitary column propagator and the indefinite flux form
  (``propagator``),
* spectral bands and sector curves (``bands``),
* the half-tube boundary system, scattering operator, and (embedded)
  bound states (``halftube``),
* an independent finite-difference oracle (``oracle``).
"""

from .bands import (Band, band_function, export_dispersion_data, in_spectrum,
                    monotonic_segments, spectrum_bands)
from .dispersion import (FloquetMode, ModeSet, cross_flux, floquet_pair,
                         laurent_roots, mode_self_flux, mode_set, state_vector)
from .edge_ode import (EdgePotential, TransferConstants, dirichlet_spectrum,
                       reconstruct_edge, transfer_constants)
from .errors import (AccuracyError, BandEdgeError, ClassificationError,
                     ConsistencyError, ConvergenceError, DegenerateStencilError,
                     DirichletPointError, InfeasibleError, QGTubeError,
                     ResourceLimitError, ValidationError)
from .halftube import (AuxGraph, BoundStateCandidate, HalfTubeConfig,
                       ScatteringResult, assemble_F, bound_state_scan,
                       design_robin, neumann_config, scattering_matrix,
                       verify_bound_state)
from .lattice import (TubeParams, VertexId, canonicalize, crossing_edges,
                      make_params, neighbors)
from .oracle import DiscretizedModel, build_model, eigs_near
from .propagator import PropagatorBundle, build_propagator, flux, propagate

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AuxGraph", "Band", "BandEdgeError", "BoundStateCandidate",
    "ClassificationError", "ConsistencyError", "ConvergenceError",
    "DegenerateStencilError", "DirichletPointError", "DiscretizedModel",
    "EdgePotential", "FloquetMode", "HalfTubeConfig", "InfeasibleError",
    "ModeSet", "PropagatorBundle", "QGTubeError", "ResourceLimitError",
    "ScatteringResult", "TransferConstants", "TubeParams", "ValidationError",
    "VertexId", "assemble_F", "band_function", "bound_state_scan",
    "build_model", "build_propagator", "canonicalize", "cross_flux",
    "crossing_edges", "design_robin", "dirichlet_spectrum", "eigs_near",
    "export_dispersion_data", "floquet_pair", "flux", "in_spectrum",
    "laurent_roots", "make_params", "mode_self_flux", "mode_set",
    "monotonic_segments", "neighbors", "neumann_config", "propagate",
    "reconstruct_edge", "scattering_matrix", "spectrum_bands", "state_vector",
    "transfer_constants", "verify_bound_state",
]
