"""Command-line front end.

Every run echoes the fully resolved configuration into its output so
results are reproducible from the artifact alone.  Identical inputs write
byte-identical CSV/JSON: keys are sorted, ordering is fixed, and floats use
their shortest round-trip representation.

Exit codes: 0 success, 1 validation/config error, 2 numerical-tolerance
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bands as bands_mod
from . import halftube as ht
from . import oracle as oracle_mod
from .dispersion import mode_set
from .edge_ode import EdgePotential, dirichlet_spectrum, transfer_constants
from .errors import AccuracyError, ConvergenceError, QGTubeError, ValidationError
from .lattice import make_params
from .propagator import build_propagator, flux, propagate


class ToleranceFailure(Exception):
    """A requested check ran but missed its tolerance (exit code 2)."""


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _write_json(path: str | None, obj) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_csv(path: str, comments: list[str], header: list[str],
               rows: list[list]) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(","))
    except Exception as exc:
        raise ValidationError(f"window must be 'lo,hi', got {text!r}") from exc
    if hi <= lo:
        raise ValidationError(f"empty window {text!r}")
    return lo, hi


def _load_config(args) -> ht.HalfTubeConfig:
    if getattr(args, "config", None):
        if args.config == "-":
            raw = sys.stdin.read()
        else:
            with open(args.config) as fh:
                raw = fh.read()
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed config JSON: {exc}") from exc
        return ht.HalfTubeConfig.from_json(obj)
    if args.alpha is None or args.beta is None or args.delta is None:
        raise ValidationError("give --config or all of --alpha/--beta/--delta")
    params = make_params(args.alpha, args.beta, args.delta)
    return ht.neumann_config(params)


def _echo(config: ht.HalfTubeConfig, **extra) -> dict:
    out = {"config": config.to_json()}
    out.update(extra)
    return out


def _common(parser: argparse.ArgumentParser, needs_config: bool = False):
    parser.add_argument("--config", help="config JSON path ('-' for stdin)")
    if not needs_config:
        parser.add_argument("--alpha", type=int)
        parser.add_argument("--beta", type=int)
        parser.add_argument("--delta", type=int)
    parser.add_argument("--out", help="output path (default: stdout for JSON)")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the command's pass tolerance")
    parser.add_argument("--threads", type=int, default=1)


def _cmd_bands(args) -> int:
    config = _load_config(args)
    window = _parse_window(args.window)
    bands = bands_mod.spectrum_bands(window, config.params, config.potential)
    comments = [
        "qgtube bands",
        f"alpha={config.params.alpha} beta={config.params.beta} "
        f"delta={config.params.delta}",
        f"potential={json.dumps(config.potential.to_json(), sort_keys=True)}",
        f"window={repr(window[0])},{repr(window[1])}",
    ]
    rows = [[b.ell, b.segment_index, b.k_lo, b.k_hi, b.lambda_lo, b.lambda_hi]
            for b in bands]
    if not args.out:
        raise ValidationError("bands requires --out for the CSV table")
    _write_csv(args.out, comments,
               ["ell", "segment", "k_lo", "k_hi", "lambda_lo", "lambda_hi"], rows)
    if args.dispersion_out:
        curves = bands_mod.export_dispersion_data(args.grid, config.params,
                                                  config.potential)
        drows = []
        for cv in curves:
            for i in range(len(cv.k)):
                drows.append([cv.ell, float(cv.k[i]), float(cv.g[i]),
                              float(cv.k1[i]), float(cv.k2[i])])
        _write_csv(args.dispersion_out, comments, ["ell", "k", "g", "k1", "k2"],
                   drows)
    if args.svg:
        from . import plots
        plots.render_band_diagram(args.svg, config.params, config.potential,
                                  window, bands)
    if args.torus_svg:
        from . import plots
        plots.render_torus_lines(args.torus_svg, config.params)
    sys.stdout.write(f"wrote {len(bands)} bands to {args.out}\n")
    return 0


def _cmd_modes(args) -> int:
    config = _load_config(args)
    ms = mode_set(args.lam, config.params,
                  transfer_constants(args.lam, config.potential))
    payload = _echo(config, **{
        "lambda": args.lam,
        "band_edge": ms.band_edge,
        "num_propagating_pairs": ms.num_propagating_pairs,
        "modes": [{
            "ell": m.ell,
            "z": _cplx(m.z),
            "z1": _cplx(m.z1),
            "z2": _cplx(m.z2),
            "class": m.classification,
            "self_flux": m.self_flux,
        } for m in ms.modes],
    })
    _write_json(args.out, payload)
    return 0


def _cmd_propagator_check(args) -> int:
    config = _load_config(args)
    lam = args.lam
    constants = transfer_constants(lam, config.potential)
    bundle = build_propagator(lam, config.params, constants)
    ms = mode_set(lam, config.params, constants)
    eig = np.linalg.eigvals(bundle.P)
    z1 = ms.z1_values()
    from scipy.optimize import linear_sum_assignment
    cost = np.abs(eig[:, None] - z1[None, :])
    ridx, cidx = linear_sum_assignment(cost)
    match = float(cost[ridx, cidx].max())
    unitarity = float(np.max(np.abs(
        bundle.P.conj().T @ bundle.J @ bundle.P - bundle.J)))
    rng = np.random.default_rng(7)
    invariance = 0.0
    for _ in range(20):
        x = rng.standard_normal(2 * config.params.rings) \
            + 1j * rng.standard_normal(2 * config.params.rings)
        invariance = max(invariance, abs(flux(propagate(x, 1, bundle),
                                              propagate(x, 1, bundle), bundle)
                                         - flux(x, x, bundle)))
    tol = args.tol if args.tol is not None else 1e-8
    lines = ["   eig(P)                        nearest z1                    |diff|"]
    for i, j in sorted(zip(ridx, cidx), key=lambda t: t[0]):
        lines.append(f"  {eig[i]: .12f}   {z1[j]: .12f}   {cost[i, j]:.3e}")
    lines.append(f"eigenvalue match (optimal assignment): {match:.3e}")
    lines.append(f"flux unitarity |P*JP - J|_max:        {unitarity:.3e}")
    lines.append(f"flux invariance on random states:      {invariance:.3e}")
    lines.append(f"flux signature:                        {bundle.signature}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        _write_json(args.out, _echo(config, **{
            "lambda": lam,
            "eig_match": match,
            "flux_unitarity": unitarity,
            "flux_invariance": invariance,
            "signature": list(bundle.signature),
        }))
    rings = config.params.rings
    if (match > tol or unitarity > 1e-9 or invariance > 1e-9
            or bundle.signature != (rings, rings)):
        raise ToleranceFailure(f"propagator cross-check failed at lambda={lam}")
    return 0


def _cmd_scatter(args) -> int:
    config = _load_config(args)
    result = ht.scattering_matrix(args.lam, config)
    payload = _echo(config, **{
        "lambda": args.lam,
        "singular": result.singular,
        "flux_residual": (None if result.singular else result.flux_residual),
        "prop_channels": list(result.prop_indices),
        "channels": [{
            "index": ch.index,
            "kind": ch.kind,
            "z1_out": _cplx(ch.plus.z1),
            "z1_in": _cplx(ch.minus.z1),
        } for ch in result.channels],
        "S": (None if result.singular else
              {"shape": list(result.S.shape),
               "data": [[_cplx(v) for v in row] for row in result.S]}),
        "aux_values": (None if result.singular or result.aux_values.size == 0 else
                       [[_cplx(v) for v in row] for row in result.aux_values]),
    })
    _write_json(args.out, payload)
    if result.singular:
        sys.stdout.write("restricted system singular: bound state present\n")
    return 0


def _cmd_bound(args) -> int:
    config = _load_config(args)
    window = _parse_window(args.window)
    exclusions = ht.scan_exclusions(window, config)
    xs = np.linspace(window[0], window[1], args.grid)
    skipped = [float(x) for x in xs
               if any(abs(x - p) <= ht.EXCLUSION_RADIUS for p in exclusions)]
    candidates = ht.bound_state_scan(window, config, grid=args.grid,
                                     threads=args.threads)
    payload = _echo(config, **{
        "window": list(window),
        "grid": args.grid,
        "skipped_points": skipped,
        "candidates": [{
            "lambda": c.lam,
            "smallest_singular_value": c.smallest_singular_value,
            "embedded": c.embedded,
            "residual": c.residual,
            "decay_ratio": c.decay_ratio,
            "outgoing": [_cplx(v) for v in c.outgoing],
            "aux_values": [_cplx(v) for v in c.aux_values],
        } for c in candidates],
    })
    _write_json(args.out, payload)
    return 0


def _cmd_design_robin(args) -> int:
    if args.alpha is None or args.beta is None or args.delta is None:
        raise ValidationError("design-robin needs --alpha/--beta/--delta")
    params = make_params(args.alpha, args.beta, args.delta)
    config = ht.design_robin(args.case, args.lam, params)
    z = ht.real_axis_root(args.case, args.lam, params)
    payload = config.to_json()
    payload["designed"] = {
        "case": args.case,
        "lambda": args.lam,
        "z": z,
        "z1": z ** params.beta,
        "z2": z ** (-params.alpha),
    }
    _write_json(args.out, payload)
    return 0


def _cmd_oracle_verify(args) -> int:
    config = _load_config(args)
    model = oracle_mod.build_model(config, args.columns, args.points,
                                   far_end=args.far_end)
    vals = oracle_mod.eigs_near(model, args.lam, args.count)
    tol = args.tol if args.tol is not None else 1e-2
    try:
        best_val, ratio, spread = oracle_mod.find_decaying_state(
            model, args.lam, count=args.count)
        found = True
    except ConvergenceError:
        best_val, ratio, spread = None, None, None
        found = False
    ok = found and abs(best_val - args.lam) <= tol
    payload = _echo(config, **{
        "lambda": args.lam,
        "columns": args.columns,
        "points": args.points,
        "far_end": args.far_end,
        "eigenvalues_near": [float(v) for v in vals],
        "decaying_state": (None if not found else
                           {"eigenvalue": best_val, "decay_ratio": ratio,
                            "profile_spread": spread}),
        "tolerance": tol,
        "pass": bool(ok),
    })
    _write_json(args.out, payload)
    sys.stdout.write("oracle-verify: " + ("PASS" if ok else "FAIL") + "\n")
    if not ok:
        raise ToleranceFailure(
            f"no decaying eigenstate within {tol} of lambda={args.lam}")
    return 0


def _cmd_dirichlet(args) -> int:
    config = _load_config(args)
    window = _parse_window(args.window)
    values = dirichlet_spectrum(config.potential, window, args.length)
    _write_json(args.out, _echo(config, **{
        "window": list(window),
        "length": args.length,
        "values": values,
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgtube",
        description="spectra of semi-infinite square-lattice quantum-graph tubes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="band table, diagram, and dispersion export")
    _common(p)
    p.add_argument("--window", default="-10,150")
    p.add_argument("--svg", help="band-diagram figure path")
    p.add_argument("--torus-svg", dest="torus_svg",
                   help="torus Bloch-line figure path")
    p.add_argument("--dispersion-out", dest="dispersion_out",
                   help="CSV of sector curves and torus lines")
    p.add_argument("--grid", type=int, default=512)
    p.set_defaults(func=_cmd_bands)

    p = sub.add_parser("modes", help="Floquet modes at one energy")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("propagator-check",
                       help="eigenvalue cross-check and flux invariants")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_cmd_propagator_check)

    p = sub.add_parser("scatter", help="scattering operator at one energy")
    _common(p, needs_config=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("bound", help="bound-state scan over an energy window")
    _common(p, needs_config=True)
    p.add_argument("--window", required=True)
    p.add_argument("--grid", type=int, default=400)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("design-robin",
                       help="Robin coefficients realizing a single-mode bound state")
    _common(p)
    p.add_argument("--case", choices=["a", "b", "c", "d"], required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_cmd_design_robin)

    p = sub.add_parser("oracle-verify",
                       help="finite-difference check of a bound-state energy")
    _common(p, needs_config=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--columns", type=int, default=40)
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--count", type=int, default=12)
    p.add_argument("--far-end", dest="far_end", default="dirichlet",
                   choices=["dirichlet", "neumann"])
    p.set_defaults(func=_cmd_oracle_verify)

    p = sub.add_parser("dirichlet", help="edge Dirichlet spectrum in a window")
    _common(p)
    p.add_argument("--window", required=True)
    p.add_argument("--length", type=float, default=1.0)
    p.set_defaults(func=_cmd_dirichlet)

    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def main(argv=None) -> int:
    try:
        return run(argv)
    except ToleranceFailure as exc:
        sys.stderr.write(f"qgtube: tolerance failure: {exc}\n")
        return 2
    except AccuracyError as exc:
        sys.stderr.write(f"qgtube: tolerance failure: {exc}\n")
        return 2
    except QGTubeError as exc:
        sys.stderr.write(f"qgtube: error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"qgtube: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
