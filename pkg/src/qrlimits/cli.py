"""Command-line interface: ``qrlimits <command> [options]``.

Exit codes: 0 success, 1 computational or check failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import capacity as cap
from . import constants as C
from . import envelopes as env
from . import geometry as geo
from . import maps as mp
from . import metrics as met
from .errors import ArgumentError, ConvergenceError, DegeneratePointError, SamplingError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _context(args) -> C.ConstantsContext:
    try:
        if args.config:
            over = {"n": args.n} if args.n is not None else None
            return C.ConstantsContext.from_file(args.config, over)
        return C.ConstantsContext.from_mapping({"n": args.n} if args.n is not None else {})
    except (ArgumentError, OSError) as exc:
        raise UsageError(f"configuration: {exc}") from None


def _dim(args) -> int:
    return args.n if args.n is not None else 2


def _split_pair(vals, n):
    if len(vals) != 2 * n:
        raise UsageError(f"expected {2 * n} coordinates for two points in R^{n}, got {len(vals)}")
    return np.array(vals[:n]), np.array(vals[n:])


# -- metrics -----------------------------------------------------------------------

def sample_chain(n: int, samples: int, seed: int, k_tol: float = met.K_TOL) -> np.ndarray:
    """Rows ``(j, k_hat, rho, 2 j)`` for seeded uniform pairs in the unit ball."""
    ball = geo.Ball.unit(n)
    pts = geo.sample_region(ball, 2 * samples, seed)
    xs, ys = pts[:samples], pts[samples:]
    rows = np.empty((samples, 4))
    for i, (x, y) in enumerate(zip(xs, ys)):
        jv = met.j_dist(met.UNIT_BALL, x, y)
        rows[i] = (jv, met.k_dist_estimate(met.UNIT_BALL, x, y, k_tol), met.rho(x, y), 2 * jv)
    return rows


def cmd_metrics(args) -> int:
    n = _dim(args)
    chosen = [k for k in ("rho", "j", "k") if getattr(args, k) is not None]
    if args.chain:
        rows = sample_chain(n, args.samples, args.seed)
        lines = [f"# n: {n}", f"# seed: {args.seed}", "j,k,rho,two_j"]
        lines += [",".join(f"{v:.12g}" for v in row) for row in rows]
        _emit(args, "chain.csv", "\n".join(lines) + "\n")
        return EXIT_OK
    if not chosen:
        raise UsageError("metrics needs one of --rho, --j, --k or --chain")
    for kind in chosen:
        x, y = _split_pair(getattr(args, kind), n)
        if kind == "rho":
            v = met.rho(x, y)
        elif kind == "j":
            v = met.j_dist(met.UNIT_BALL, x, y)
        else:
            v = met.k_dist_estimate(met.UNIT_BALL, x, y, args.k_tol)
        print(f"{kind}={v:.10g}")
    return EXIT_OK


# -- verify ------------------------------------------------------------------------

def _check(name, ok, observed, bound, tol):
    return {"name": name, "pass": bool(ok), "observed": float(observed), "bound": float(bound), "tolerance": float(tol)}


def run_checks(ctx: C.ConstantsContext, seed: int = 0, samples: int = 200, full: bool = False) -> list:
    """Invariant checks over seeded samples; each record is one-sided."""
    out = []
    rng = np.random.default_rng(seed)
    for n in (2, 3):
        rows = sample_chain(n, samples, seed + n)
        j, k, rho, two_j = rows.T
        out.append(_check(f"chain_j_le_k_n{n}", np.all(j <= k + 1e-3), float(np.max(j - k)), 0.0, 1e-3))
        out.append(_check(f"chain_k_le_rho_n{n}", np.all(k <= rho + 1e-3), float(np.max(k - rho)), 0.0, 1e-3))
        out.append(_check(f"chain_rho_le_2j_n{n}", np.all(rho <= two_j + 1e-9), float(np.max(rho - two_j)), 0.0, 1e-9))

    worst = -np.inf
    for t in range(10):
        n = 2 + t % 2
        a = rng.uniform(0.05, 0.95)
        phi = rng.uniform(0.05, 1.5)
        r = rng.uniform(0.02, 0.98) * math.cos(phi)
        b = geo.random_rotation(n, rng)[:, 0]
        shell = geo.TruncatedConeSpec.shell(b, phi, r, a)
        pts = geo.sample_region(shell, max(50, samples), int(rng.integers(2**31)))
        diam = met.set_diameter(met.UNIT_BALL, "j", pts)
        worst = max(worst, diam - met.j_cone_diameter_bound(a, phi, r))
    out.append(_check("cone_shell_j_diameter", worst <= 0, worst, 0.0, 0.0))

    worst_lo, worst_hi, worst_seg = -np.inf, -np.inf, -np.inf
    for t in range(5):
        n = 2 + t % 2
        phi = rng.uniform(0.05, 1.5)
        r = rng.uniform(0.02, 0.98) * math.cos(phi)
        b = geo.random_rotation(n, rng)[:, 0]
        cone = geo.ConeSpec(b, phi)
        pts = geo.sample_cone_sphere(cone, r, max(50, samples), int(rng.integers(2**31)))
        s = met.s_bound(r, phi)
        r0 = met.rho_radial(0.0, 1 - r)
        rx = met.rho_many(np.zeros_like(pts), pts)
        worst_lo = max(worst_lo, float(np.max(r0 - rx)))
        worst_hi = max(worst_hi, float(np.max(rx - s)))
        seg = (1 - r) * b
        # balls are convex in rho, so the segment check reduces to its endpoints
        worst_seg = max(worst_seg, float(np.max(met.rho_many(np.tile(seg, (len(pts), 1)), pts) - s)))
    out.append(_check("sandwich_lower", worst_lo <= 1e-12, worst_lo, 0.0, 1e-12))
    out.append(_check("sandwich_upper", worst_hi <= 0, worst_hi, 0.0, 0.0))
    out.append(_check("segment_within_s", worst_seg <= 0, worst_seg, 0.0, 0.0))

    rings = [(2, 64, 0.05)] + ([(3, 64, 0.10)] if full else [(3, 32, 0.10)])
    for n, m, tol in rings:
        est = cap.capacity_estimate(cap.CondenserGrid.ring(n, 1 / math.e, 1.0, m), 1e-7)
        ex = cap.ring_capacity_exact(n, 1.0, math.e)
        rel = abs(est - ex) / ex
        out.append(_check(f"ring_capacity_n{n}_cells{m}", rel <= tol, rel, 0.0, tol))

    err = abs(ctx.c1 - 1 / math.log(1 + ctx.lambda_K))
    out.append(_check("c1_formula", err <= 1e-12, err, 0.0, 1e-12))
    out.append(_check("c3_formula", abs(ctx.c3 - 2**ctx.n * ctx.b_n) <= 1e-12, abs(ctx.c3 - 2**ctx.n * ctx.b_n), 0.0, 1e-12))
    N = C.n_bound(0.25, math.pi / 3, False, ctx)
    thr = C.saturation_delta(N, ctx)
    sat = C.beta(thr, N, ctx)
    out.append(_check("beta_saturation", sat == ctx.beta0, abs(sat - ctx.beta0), 0.0, 0.0))
    ds = np.geomspace(thr * 1e-6, thr * 1e2, 100)
    bs = np.array([C.beta(d, N, ctx) for d in ds])
    out.append(_check("beta_monotone", np.all(np.diff(bs) >= 0), float(np.min(np.diff(bs))), 0.0, 0.0))
    out.append(_check("beta_le_beta0", np.all(bs <= ctx.beta0), float(np.max(bs - ctx.beta0)), 0.0, 0.0))
    return out


def cmd_verify(args) -> int:
    ctx = _context(args)
    checks = run_checks(ctx, args.seed, args.samples, args.full)
    _emit(args, "verify.json", json.dumps(checks, indent=2) + "\n")
    failed = [c["name"] for c in checks if not c["pass"]]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- scan --------------------------------------------------------------------------

def cmd_scan(args) -> int:
    try:
        if args.profile:
            prof = env.RateProfile.from_csv(args.profile)
        else:
            prof = env.bundled_profile(args.bundled)
    except (ArgumentError, OSError) as exc:
        raise UsageError(f"profile: {exc}") from None
    ctx = _context(args) if (args.config or args.n is not None) else None
    kw = {"window": args.window, "threshold": args.threshold}
    theorem = args.theorem or prof.meta.get("theorem")
    if theorem == "tangential":
        kw["delta_floor"] = args.delta_floor
    else:
        kw["normalization"] = args.normalization
    v = env.scan(prof, ctx, theorem, args.phi, **kw)
    if args.out:
        _emit(args, "samples.csv", v.samples_csv())
        _emit(args, "report.txt", v.report_text())
    else:
        sys.stdout.write(v.samples_csv())
    print(f"verdict={v.verdict}")
    return EXIT_OK


# -- capacity ----------------------------------------------------------------------

def cmd_capacity(args) -> int:
    if args.grid:
        try:
            grid = cap.CondenserGrid.read(args.grid)
        except (ArgumentError, OSError) as exc:
            raise UsageError(f"grid: {exc}") from None
        exact = None
    else:
        inner, outer = args.ring
        n = _dim(args)
        grid = cap.CondenserGrid.ring(n, inner, outer, args.cells)
        exact = cap.ring_capacity_exact(n, inner, outer)
    res = cap.solve(grid, args.tol)
    lines = [f"capacity={res.value:.10g}", f"sweeps={res.sweeps}", f"levels={res.levels}", f"empty_c={res.empty_c}"]
    if exact is not None:
        lines += [f"exact={exact:.10g}", f"relative_error={(res.value - exact) / exact:.6g}"]
    _emit(args, "capacity.txt", "\n".join(lines) + "\n")
    return EXIT_OK


# -- constants ---------------------------------------------------------------------

def cmd_constants(args) -> int:
    ctx = _context(args)
    prov = ctx.provenance()
    lines = [f"{k}={v!r} [{prov[k]}]" for k, v in ctx.ledger().items()]
    if args.theorem:
        if args.phi is None:
            raise UsageError("--theorem needs --phi")
        for k, v in C.theorem_constants(args.theorem, args.phi, args.r, ctx).items():
            lines.append(f"{k}={v!r}")
    _emit(args, "constants.txt", "\n".join(lines) + "\n")
    return EXIT_OK


# -- boundary ----------------------------------------------------------------------

def cmd_boundary(args) -> int:
    n = _dim(args)
    if args.map == "singular_inner":
        if n != 2:
            raise UsageError("singular_inner is planar; use --n 2")
        m = mp.MapSpec.singular_inner()
    elif args.map == "mobius":
        a = np.zeros(n) if args.a is None else np.array(args.a, dtype=float)
        if a.size != n:
            raise UsageError(f"--a needs {n} coordinates")
        m = mp.MapSpec.mobius(a)
    else:
        m = mp.MapSpec.radial_stretch(args.alpha, n)
    curve = mp.ApproachCurve(args.curve, n, angle=args.angle, kappa=args.kappa)
    radii = mp.dyadic_radii(args.start, args.stop)
    rows = mp.boundary_scan(m, curve, radii)
    _emit(args, "boundary.csv", mp.scan_csv(m, curve, rows))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="ambient dimension (default 2)")
    common.add_argument("--config", default=None, help="constants file with 'key = value' lines")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="directory for output files (default: stdout)")

    p = argparse.ArgumentParser(prog="qrlimits", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("metrics", parents=[common], help="rho, j and k distances in the unit ball")
    s.add_argument("--rho", nargs="+", type=float, metavar="X", help="coordinates of x then y")
    s.add_argument("--j", nargs="+", type=float, metavar="X")
    s.add_argument("--k", nargs="+", type=float, metavar="X")
    s.add_argument("--k-tol", type=float, default=met.K_TOL)
    s.add_argument("--chain", action="store_true", help="emit j, k, rho, 2j for seeded random pairs")
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("verify", parents=[common], help="run the invariant checks, JSON report")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--full", action="store_true", help="include the n = 3 ring at 64 cells (about 2 minutes)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", parents=[common], help="divergence scan of a rate profile")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile", help="CSV with r,delta,<epsilon column>[,phi]")
    src.add_argument("--bundled", choices=env.BUNDLED)
    s.add_argument("--theorem", choices=C.THEOREMS, default=None)
    s.add_argument("--phi", type=float, default=None)
    s.add_argument("--window", type=int, default=env.DEFAULT_WINDOW)
    s.add_argument("--threshold", type=float, default=env.DEFAULT_THRESHOLD)
    s.add_argument("--normalization", choices=env.NORMALIZATIONS, default="statement")
    s.add_argument("--delta-floor", type=float, default=None)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("capacity", parents=[common], help="lattice condenser capacity")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--ring", nargs=2, type=float, metavar=("INNER", "OUTER"))
    src.add_argument("--grid", help="grid text file")
    s.add_argument("--cells", type=int, default=32, help="cells per outer radius for --ring")
    s.add_argument("--tol", type=float, default=cap.DEFAULT_TOL)
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("constants", parents=[common], help="constant ledger with provenance")
    s.add_argument("--theorem", choices=C.THEOREMS, default=None)
    s.add_argument("--phi", type=float, default=None)
    s.add_argument("--r", type=float, default=None)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("boundary", parents=[common], help="|f| along a curve approaching the boundary")
    s.add_argument("--map", choices=mp.MAP_KINDS, default="singular_inner")
    s.add_argument("--a", nargs="+", type=float, default=None, help="Mobius centre")
    s.add_argument("--alpha", type=float, default=2.0)
    s.add_argument("--curve", choices=mp.CURVE_KINDS, default="radial")
    s.add_argument("--angle", type=float, default=0.0)
    s.add_argument("--kappa", type=float, default=1.0)
    s.add_argument("--start", type=int, default=1, help="first dyadic exponent, r = 2^-start")
    s.add_argument("--stop", type=int, default=20)
    s.set_defaults(func=cmd_boundary)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArgumentError, ConvergenceError, SamplingError, DegeneratePointError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
