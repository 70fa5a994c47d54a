"""Command line front end.

Exit codes: 0 on success, 2 for input problems (unreadable files, bad
JSON, malformed flags, out-of-domain parameters), 3 when a mathematical
precondition or certificate fails (non-conformal chart, non-closed form,
seed constraint violation, degenerate data and the like).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, fileio, revolution, transforms
from .errors import (
    DomainError,
    GridMismatch,
    NotImaginary,
    NotUnit,
    ParseError,
    QuatSurfError,
)

INPUT_ERRORS = (ParseError, DomainError, NotUnit, NotImaginary,
                GridMismatch, OSError, ValueError)


def _floats(text: str, n: int, what: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != n:
        raise argparse.ArgumentTypeError(
            f"{what} needs {n} comma-separated numbers, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what}: non-numeric entry")


def _quat(text: str) -> np.ndarray:
    return _floats(text, 4, "quaternion")


def _ode(text: str) -> np.ndarray:
    return _floats(text, 5, "--ode")


def _motion(text: str) -> np.ndarray:
    return _floats(text, 12, "--motion")


def _emit(report: dict, path) -> None:
    text = fileio.report_text(report)
    if path:
        fileio.write_report(path, report)
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="quatsurf",
        description="conformal quaternionic surface calculus and"
                    " transform pipelines",
    )
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="conformality, curvature and"
                       " harmonicity certificates for a surface grid")
    a.add_argument("--input", required=True)
    a.add_argument("--output", help="write the JSON report here"
                   " (default: stdout)")
    a.add_argument("--tol", type=float,
                   help="fail (exit 3) if the conformality defect"
                   " exceeds this")

    g = sub.add_parser("generate-revolution", help="integrate the ODE and"
                       " sample the associated revolution chart")
    g.add_argument("--ode", type=_ode, required=True,
                   metavar="X0,PHI0,DPHI0,XEND,H")
    g.add_argument("--ny", type=int, default=9)
    g.add_argument("--hy", type=float)
    g.add_argument("--output", help="surface JSON path")
    g.add_argument("--phi-output", help="phi samples CSV path")
    g.add_argument("--profile-output", help="profile CSV path")
    g.add_argument("--report")

    b = sub.add_parser("backward", help="inverse-curvature potential and"
                       " tangent half-difference of a harmonic surface")
    b.add_argument("--input", required=True)
    b.add_argument("--mu0", type=_quat, default=np.zeros(4),
                   metavar="W,X,Y,Z")
    b.add_argument("--tol", type=float, default=1e-2)
    b.add_argument("--output", help="JSON path for the half-difference"
                   " field")
    b.add_argument("--report")

    d = sub.add_parser("darboux", help="coupled-system transform with"
                       " spectral parameter rho")
    d.add_argument("--input", required=True)
    d.add_argument("--rho", type=float, required=True)
    d.add_argument("--seed-lambda", type=_quat, metavar="W,X,Y,Z")
    d.add_argument("--seed-lambda-l", type=_quat,
                   default=np.array([1.0, 0.0, 0.0, 0.0]),
                   metavar="W,X,Y,Z")
    d.add_argument("--output", help="JSON path for the transformed"
                   " surface")
    d.add_argument("--report")

    t = sub.add_parser("piii-transform", help="transform an ODE solution"
                       " through the revolution surface family")
    t.add_argument("--ode", type=_ode, required=True,
                   metavar="X0,PHI0,DPHI0,XEND,H")
    t.add_argument("--rho", type=float, required=True)
    t.add_argument("--seed-lambda", type=_quat,
                   default=np.array([1.0, 0.0, 0.0, 0.0]),
                   metavar="W,X,Y,Z")
    t.add_argument("--ny", type=int, default=9)
    t.add_argument("--output", help="CSV path for the transformed phi")
    t.add_argument("--report")

    m = sub.add_parser("export-mesh", help="write the image surface as"
                       " OBJ or PLY")
    m.add_argument("--input", required=True)
    m.add_argument("--output", required=True)
    m.add_argument("--format", choices=("obj", "ply"), default="obj")

    e = sub.add_parser("equivariance", help="compare a transform before"
                       " and after a rigid motion")
    e.add_argument("--input", required=True)
    e.add_argument("--motion", type=_motion, required=True,
                   metavar="R0,R1,R2,R3,S0,S1,S2,S3,T0,T1,T2,T3")
    e.add_argument("--transform", choices=("ghimc", "backward", "darboux"),
                   default="ghimc")
    e.add_argument("--rho", type=float, default=1.0)
    e.add_argument("--mu0", type=_quat, default=np.zeros(4))
    e.add_argument("--seed-lambda", type=_quat)
    e.add_argument("--tol", type=float,
                   help="fail (exit 3) if the primary deviation exceeds"
                   " this")
    e.add_argument("--output")
    return p


def cmd_analyze(args) -> int:
    surface = fileio.read_surface(args.input)
    conf = analysis.conformality_residual(surface)
    sphere = analysis.mean_curvature(surface)
    hmag = np.linalg.norm(sphere.curvature, axis=-1)
    ghimc = analysis.ghimc_report(surface, sphere)
    char = analysis.inverse_curvature_characterization(surface, sphere)
    dw, energy = analysis.willmore_diagnostics(surface, sphere)
    report = {
        "conformality": conf.to_dict(),
        "curvature_checks": {k: float(v) for k, v in sphere.checks.items()},
        "curvature_magnitude": {
            "min": float(np.nanmin(hmag)), "max": float(np.nanmax(hmag)),
        },
        "branch_fraction": float(np.mean(sphere.branch_mask)),
        "harmonicity": ghimc.to_dict(),
        "characterization": char.to_dict(),
        "willmore": {"closedness": dw, "energy": energy},
    }
    _emit(report, args.output)
    if args.tol is not None and conf.max > args.tol:
        print(f"conformality defect {conf.max:.3e} exceeds"
              f" {args.tol:.1e}", file=sys.stderr)
        return 3
    return 0


def cmd_generate_revolution(args) -> int:
    x0, phi0, dphi0, xend, h = (float(v) for v in args.ode)
    sol = revolution.piii_integrate(x0, phi0, dphi0, xend, h)
    profile = revolution.profile_from_phi(sol)
    surface = revolution.surface_from_profile(profile, ny=args.ny,
                                              hy=args.hy)
    sphere = analysis.mean_curvature(surface)
    report = {
        "equation_residual": sol.residual(),
        "profile_certificates": profile.certificates,
        "harmonicity": analysis.ghimc_report(surface, sphere).to_dict(),
        "inverse_curvature_fit":
            revolution.inverse_curvature_fit(surface, sphere),
    }
    if args.output:
        fileio.write_surface(args.output, surface)
    if args.phi_output:
        fileio.write_phi_csv(args.phi_output, sol)
    if args.profile_output:
        fileio.write_profile_csv(args.profile_output, profile)
    _emit(report, args.report)
    return 0


def cmd_backward(args) -> int:
    surface = fileio.read_surface(args.input)
    sphere = analysis.mean_curvature(surface)
    result = transforms.backward_baecklund(surface, sphere, mu0=args.mu0,
                                           tol=args.tol)
    if args.output:
        fileio.write_surface(
            args.output,
            analysis.SurfaceGrid(surface.grid, result.h_bar.values))
    _emit({"certificates": result.certificates}, args.report)
    return 0


def cmd_darboux(args) -> int:
    surface = fileio.read_surface(args.input)
    sphere = analysis.mean_curvature(surface)
    dual = transforms.christoffel(surface)
    lam0 = args.seed_lambda
    data, fhat, ghat = transforms.darboux_solve(
        surface, dual, args.rho,
        lambda_inf0=None if lam0 is None else lam0,
        lambda_L0=args.seed_lambda_l)
    identities = transforms.darboux_identities(surface, sphere, fhat)
    report = {
        "dual_certificates": dual.certificates,
        "system_residuals": data.residuals,
        "identities": identities.to_dict(),
    }
    if args.output:
        fileio.write_surface(args.output, fhat)
    _emit(report, args.report)
    return 0


def cmd_piii_transform(args) -> int:
    x0, phi0, dphi0, xend, h = (float(v) for v in args.ode)
    sol = revolution.piii_integrate(x0, phi0, dphi0, xend, h)
    result = revolution.piii_transform(sol, args.rho,
                                       lambda0=args.seed_lambda,
                                       ny=args.ny)
    if args.output:
        fileio.write_phi_csv(args.output, result.phi_hat)
    _emit(result.report, args.report)
    return 0


def cmd_export_mesh(args) -> int:
    surface = fileio.read_surface(args.input)
    info = fileio.export_mesh(args.output, surface, fmt=args.format)
    print(fileio.report_text(info))
    return 0


def cmd_equivariance(args) -> int:
    surface = fileio.read_surface(args.input)
    r, s, t = args.motion[0:4], args.motion[4:8], args.motion[8:12]
    lam0 = args.seed_lambda
    report = transforms.equivariance_check(
        surface, r, s, t, transform=args.transform, rho=args.rho,
        mu0=args.mu0,
        lambda_inf0=None if lam0 is None else lam0)
    _emit(report, args.output)
    primary_key = {
        "ghimc": "relative_change",
        "backward": "h_bar_deviation",
        "darboux": "transform_deviation",
    }[args.transform]
    if args.tol is not None and report[primary_key] > args.tol:
        print(f"{primary_key} = {report[primary_key]:.3e} exceeds"
              f" {args.tol:.1e}", file=sys.stderr)
        return 3
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "generate-revolution": cmd_generate_revolution,
    "backward": cmd_backward,
    "darboux": cmd_darboux,
    "piii-transform": cmd_piii_transform,
    "export-mesh": cmd_export_mesh,
    "equivariance": cmd_equivariance,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except QuatSurfError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
