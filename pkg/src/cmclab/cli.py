"""Command-line front end.

Subcommands mirror the library surface: ``catalog`` samples model
surfaces to grid files, ``verify`` runs the structure-equation report on
one of them, ``solve-graph`` runs the Dirichlet solver with flux
diagnostics, ``spectrum``/``cheeger`` expose the eigenvalue machinery,
``predict`` prints the classification string, and ``run`` executes a
scenario file or builtin scenario.  The process exits 0 exactly when
every emitted check passed (and, for solve-graph, the solve converged).

Reports go to --out when given, otherwise under $CMCLAB_OUT or the
working directory for file outputs and stdout for report text.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .ambient import ConformalChart, ball_geometry
from .catalog import (check_descriptor, slice_surface, tilted_plane,
                      vertical_cylinder, vertical_plane)
from .errors import CmcLabError, ConfigError
from .graphs import (flux_check, geodesic_ball_problem, save_solution,
                     solve_graph, SolverParams)
from .immersion import induced_data, save_immersion, verify_structure
from .reporting import _plain, emit_report, render_text, VerificationReport
from .scenarios import predict, run_scenario
from .spectral import (cheeger_ball_family, cheeger_inequality_check,
                       dirichlet_lambda1_ball, dirichlet_lambda1_ball_2d,
                       rectangle_lambda1_closed_form, stability_spectrum)

_CATALOG_KINDS = ("slice", "vplane", "tilted", "cylinder")


def _chart_for(name: str, kappa0: float) -> ConformalChart:
    if name in ("flat", "euclidean"):
        return ConformalChart.flat()
    if name == "poincare":
        return ConformalChart.poincare_disk()
    if name == "hyperbolic":
        return ConformalChart.hyperbolic(kappa0)
    if name == "sphere":
        return ConformalChart.sphere(abs(kappa0) if kappa0 else 1.0)
    raise ConfigError(f"unknown chart {name!r} "
                      f"(flat, poincare, hyperbolic, sphere)")


def _build_surface(args):
    chart = _chart_for(args.chart, args.kappa0)
    if args.kind == "slice":
        return slice_surface(chart, t0=args.t0)
    if args.kind == "vplane":
        return vertical_plane(chart)
    if args.kind == "tilted":
        return tilted_plane(args.theta)
    if args.kind == "cylinder":
        return vertical_cylinder(chart, args.H)
    raise ConfigError(f"unknown catalog kind {args.kind!r}")


def _out_path(args, default_name: str):
    if args.out:
        return args.out
    base = os.environ.get("CMCLAB_OUT", "")
    return os.path.join(base, default_name) if base else default_name


def _finish_report(report: VerificationReport, args) -> int:
    """Print or write the report; exit status reflects overall_pass."""
    fmt = args.format
    if args.out or os.environ.get("CMCLAB_OUT"):
        suffix = "csv" if fmt == "csv" else "json"
        path = _out_path(args, f"{report.name}.{suffix}")
        emit_report(report, fmt, path)
        print(f"report written to {path}")
    print(render_text(report), end="")
    return 0 if report.overall_pass else 1


# ------------------------------------------------------------ subcommands


def _cmd_catalog(args) -> int:
    if args.kind is None:
        print("catalog kinds: " + ", ".join(_CATALOG_KINDS))
        print("  slice     horizontal leaf (needs --chart)")
        print("  vplane    vertical plane over a geodesic (flat/hyperbolic)")
        print("  tilted    tilted flat plane (needs --theta)")
        print("  cylinder  vertical cylinder over a 2H-circle (needs --H)")
        return 0
    imm = _build_surface(args)
    path = _out_path(args, f"{args.kind}.grid")
    save_immersion(imm, path, shape=(args.grid, args.grid))
    desc = imm.descriptor
    print(f"{args.kind}: wrote {args.grid}x{args.grid} samples to {path}")
    print(json.dumps(_plain({"kind": desc.kind,
                             "parameters": desc.parameters,
                             "expected": desc.expected}), sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    imm = _build_surface(args)
    data = induced_data(imm, shape=(args.grid, args.grid),
                        convention=args.convention)
    report = verify_structure(data, tol=args.tol)
    report.extend(check_descriptor(imm, shape=(args.grid, args.grid)).records)
    return _finish_report(report, args)


def _cmd_solve_graph(args) -> int:
    chart = _chart_for(args.chart, args.kappa0)
    solver = SolverParams(residual_tol=args.tol or 1e-10)
    problem = geodesic_ball_problem(chart, args.delta, args.H,
                                    resolution=args.grid, solver=solver)
    sol = solve_graph(problem)
    status = "converged" if sol.converged else "did not converge"
    print(f"solve-graph: {status} after {sol.iterations} iterations "
          f"(residual {sol.final_residual:.3e}, "
          f"max gradient {sol.max_gradient:.3e})")
    if sol.failure_note:
        print(f"  note: {sol.failure_note}")
    report = VerificationReport(
        name=f"solve-graph-d{args.delta:g}",
        provenance={"chart": chart.reference, "delta": args.delta,
                    "H": args.H, "grid": args.grid})
    from .reporting import CheckRecord
    values = {"converged": sol.converged, "iterations": sol.iterations,
              "max_gradient": sol.max_gradient}
    if sol.converged:
        diag = flux_check(sol)
        values.update({"flux": diag.flux, "volume": diag.volume,
                       "boundary_area": diag.boundary_area,
                       "flux_defect": diag.identity_defect,
                       "flux_ratio": diag.ratio})
    report.add(CheckRecord(
        check_id="graph_solution", operation="solve-graph",
        parameters={"delta": args.delta, "H": args.H, "grid": args.grid},
        max_residual=sol.final_residual, rms_residual=sol.final_residual,
        values=values,
        tolerance=problem.solver.residual_tol if sol.converged else None,
        passed=sol.converged))
    if args.solution_out:
        save_solution(sol, args.solution_out)
        print(f"solution written to {args.solution_out}")
    return _finish_report(report, args)


def _cmd_spectrum(args) -> int:
    rows = []
    if args.ball:
        kappa0, delta = args.ball
        res = dirichlet_lambda1_ball(kappa0, delta, args.grid or 2048)
        ref = dirichlet_lambda1_ball_2d(kappa0, delta,
                                        min(args.grid or 96, 128))
        rel = abs(res.lambda1 - ref.lambda1) / abs(res.lambda1)
        rows.append(("ball", f"kappa0={kappa0:g} delta={delta:g}",
                     res.lambda1, ref.lambda1, rel))
    elif args.stability:
        H, kappa0, L, r = args.stability
        res = stability_spectrum(H, kappa0, L, r, args.grid or 101)
        closed = rectangle_lambda1_closed_form(L, r) - (4 * H * H + kappa0)
        rel = abs(res.lambda1 - closed) / max(abs(closed), 1e-300)
        rows.append(("stability",
                     f"H={H:g} kappa0={kappa0:g} L={L:g} r={r:g}",
                     res.lambda1, closed, rel))
    else:
        print("spectrum: pass --ball KAPPA0 DELTA or --stability H KAPPA0 L R",
              file=sys.stderr)
        return 2
    print("problem,parameters,lambda1,reference,relative_error")
    for row in rows:
        print(f"{row[0]},{row[1]},{row[2]:.12g},{row[3]:.12g},{row[4]:.3e}")
    return 0


def _cmd_cheeger(args) -> int:
    family = cheeger_ball_family(args.kappa0, args.deltas)
    print("delta,boundary_length,volume,cheeger_constant,lower_bound"
          + (",lambda1,satisfied" if args.lambda1 else ""))
    status = 0
    for est in family:
        line = (f"{est.delta:g},{est.boundary_length:.12g},"
                f"{est.volume:.12g},{est.cheeger_constant:.12g},"
                f"{est.lower_bound:.12g}")
        if args.lambda1:
            lam = dirichlet_lambda1_ball(args.kappa0, est.delta,
                                         args.grid or 2048).lambda1
            chk = cheeger_inequality_check(est, lam)
            line += f",{lam:.12g},{str(chk.satisfied).lower()}"
            if not chk.satisfied:
                status = 1
        print(line)
    return status


def _cmd_predict(args) -> int:
    print(predict(args.H, args.c))
    return 0


def _cmd_run(args) -> int:
    report = run_scenario(args.scenario)
    return _finish_report(report, args)


def _cmd_ball(args) -> int:
    geom = ball_geometry(args.kappa0, args.delta)
    print(f"boundary_length={geom.boundary_length:.12g} "
          f"volume={geom.volume:.12g} ratio={geom.ratio:.12g}")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=101,
                        help="samples per side (default 101)")
    common.add_argument("--tol", type=float, default=None,
                        help="override the default tolerance")
    common.add_argument("--out", default=None,
                        help="output path (default: $CMCLAB_OUT or cwd)")
    common.add_argument("--format", choices=("structured", "csv"),
                        default="structured",
                        help="report format for file output")

    parser = argparse.ArgumentParser(
        prog="cmclab",
        description="numerical laboratory for constant-mean-curvature "
                    "surfaces over conformal base metrics")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    surf = argparse.ArgumentParser(add_help=False)
    surf.add_argument("--chart", default="poincare",
                      choices=("flat", "euclidean", "poincare",
                               "hyperbolic", "sphere"))
    surf.add_argument("--kappa0", type=float, default=-1.0,
                      help="model curvature for hyperbolic/sphere charts")
    surf.add_argument("--H", type=float, default=0.75,
                      help="mean curvature (cylinder)")
    surf.add_argument("--theta", type=float, default=math.pi / 3,
                      help="tilt angle in (0, pi/2] (tilted plane)")
    surf.add_argument("--t0", type=float, default=0.0,
                      help="height of the slice")

    p = sub.add_parser("catalog", parents=[common, surf],
                       help="sample a model surface to a grid file")
    p.add_argument("kind", nargs="?", choices=_CATALOG_KINDS)
    p.set_defaults(func=_cmd_catalog)

    p = sub.add_parser("verify", parents=[common, surf],
                       help="structure-equation report for a model surface")
    p.add_argument("kind", choices=_CATALOG_KINDS)
    p.add_argument("--convention", default="frame",
                   choices=("frame", "flipped", "nonpositive"))
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("solve-graph", parents=[common],
                       help="Dirichlet solve on a geodesic ball")
    p.add_argument("--chart", default="poincare",
                   choices=("flat", "euclidean", "poincare", "hyperbolic",
                            "sphere"))
    p.add_argument("--kappa0", type=float, default=-1.0)
    p.add_argument("--delta", type=float, required=True,
                   help="geodesic radius of the ball")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--solution-out", default=None,
                   help="also write the (x, y, u, W) solution file here")
    p.set_defaults(func=_cmd_solve_graph, grid=65)

    p = sub.add_parser("spectrum", parents=[common],
                       help="ball or stability eigenvalues (CSV on stdout)")
    p.add_argument("--ball", nargs=2, type=float,
                   metavar=("KAPPA0", "DELTA"))
    p.add_argument("--stability", nargs=4, type=float,
                   metavar=("H", "KAPPA0", "L", "R"))
    p.set_defaults(func=_cmd_spectrum, grid=None)

    p = sub.add_parser("cheeger", parents=[common],
                       help="Cheeger constants of a ball family")
    p.add_argument("--kappa0", type=float, default=-1.0)
    p.add_argument("--deltas", nargs="+", type=float, required=True)
    p.add_argument("--lambda1", action="store_true",
                   help="also verify the eigenvalue lower bound")
    p.set_defaults(func=_cmd_cheeger, grid=None)

    p = sub.add_parser("predict", parents=[common],
                       help="classification prediction for (H, c)")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("run", parents=[common],
                       help="run a scenario file or builtin scenario")
    p.add_argument("scenario",
                   help="path to a scenario TOML, or a builtin name "
                        "(catalog-all, lemma42)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("ball-geometry", parents=[common],
                       help="closed-form ball boundary length and volume")
    p.add_argument("--kappa0", type=float, default=-1.0)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=_cmd_ball)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CmcLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
