"""Command-line front end: ``isodt transform | scan | verify``.

Exit codes: 0 success, 1 numerical or verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time

import numpy as np

from . import connection as cn
from . import cylinder as cy
from . import darboux as db
from . import permute as pm
from . import quaternion as qt
from . import surface as sf
from . import sym
from .errors import IsodtError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Invalid flag combination (exit code 2)."""


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"``, ``"a"``, ``"bi"`` or ``"-i"`` into a complex number."""
    s = text.strip().replace(" ", "")
    if not s:
        raise argparse.ArgumentTypeError("empty complex number")
    try:
        if s.endswith("i"):
            body = s[:-1]
            # split at the last sign that is not part of an exponent
            m = re.match(r"^(.*?)([+-]?)([0-9.]*(?:[eE][+-]?[0-9]+)?)$", body)
            re_part, sign, mag = m.group(1), m.group(2), m.group(3)
            im = float(sign + (mag if mag else "1"))
            return complex(float(re_part) if re_part else 0.0, im)
        return complex(float(s), 0.0)
    except (ValueError, AttributeError):
        raise argparse.ArgumentTypeError(f"not a complex number of the form a+bi: {text!r}")


def parse_grid(text: str):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"grid must look like 64x128, got {text!r}")
    return int(m.group(1)), int(m.group(2))


# ----------------------------------------------------------------------------
# transform
# ----------------------------------------------------------------------------

MODES = ("onestep", "bianchi", "sym", "general")


def _second_seed(rho, x0):
    p = cy.CylinderSectionParams(rho, *cy.SECOND_SECTION_M)
    return qt.vec_scale(cy.analytic_seed(p, x0).array, qt.J)


def run_transform(args):
    """Build the requested transform; returns ``(DarbouxResult, metadata)``."""
    if args.rho == 0:
        raise UsageError("--rho must be nonzero")
    if args.mode not in ("sym", "general") and args.extension is not None:
        raise UsageError("--extension applies to --mode sym or general only")
    if args.mode != "general" and (args.m1 is not None or args.m2 is not None):
        raise UsageError("--m1/--m2 apply to --mode general only")
    if args.mode != "bianchi" and args.rho2 is not None:
        raise UsageError("--rho2 applies to --mode bianchi only")
    if args.x_min >= args.x_max:
        raise UsageError("--x-min must be below --x-max")
    if args.wraps < 1:
        raise UsageError("--wraps must be positive")
    if args.epsilon <= 0:
        raise UsageError("--epsilon must be positive")
    xr = (args.x_min, args.x_max)
    fam = cy.cylinder_family(args.nx, args.ny, xr, args.wraps)
    p = cy.CylinderSectionParams(args.rho, args.m0p, args.m1p)
    x0 = xr[0]
    phi1 = cn.integrate_section(fam, args.rho, cy.analytic_seed(p, x0), multiplier=cy.section_multiplier(p))
    meta = {"mode": args.mode, "rho": args.rho, "m0p": str(args.m0p), "m1p": str(args.m1p),
            "nx": args.nx, "ny": args.ny, "wraps": args.wraps, "x_range": f"{xr[0]!r},{xr[1]!r}"}
    r1 = db.darboux_transform(fam, phi1)
    if args.mode == "onestep":
        out = r1
        meta["multiplier"] = str(phi1.multiplier)
    elif args.mode == "bianchi":
        rho2 = args.rho if args.rho2 is None else args.rho2
        if rho2 == 0:
            raise UsageError("--rho2 must be nonzero")
        phi2 = cn.integrate_section(fam, rho2, _second_seed(rho2, x0))
        b = pm.bianchi_two_step(fam, phi1, phi2, first=r1)
        out = b.transform
        meta.update(rho2=rho2, parallelism_residual=b.info["parallelism_residual"])
    else:
        rule = args.extension or "frozen-seed"
        lf = sym.extend_section(fam, phi1, args.rho, rule,
                                seed_fn=lambda lam: cy.analytic_seed(p.with_rho(lam), x0))
        D = db.dress_family(fam, r1)
        phi11 = sym.sym_section(phi1, sym.lambda_derivative(lf, eps=args.epsilon), D)
        section = phi11
        if args.mode == "general":
            m1 = 1.0 if args.m1 is None else args.m1
            m2 = 0.0 if args.m2 is None else args.m2
            phit = cn.integrate_section(fam, args.rho, _second_seed(args.rho, x0))
            phi12 = pm.bianchi_type_section(phit, D)
            section = sym.general_two_step(phi11, phi12, m1, m2)
            meta.update(m1=str(m1), m2=str(m2))
        out = sym.sym_two_step(r1, section)
        status, details = sym.multiplier_check(lf, args.epsilon)
        meta.update(extension=rule, epsilon=args.epsilon, closedness=status,
                    multiplier=str(details["h1"]),
                    parallelism_residual=phi11.info["parallelism_residual"])
    meta["closure_residual"] = out.closure_residual()
    meta["singular_samples"] = int(out.mask.sum())
    return out, meta


def cmd_transform(args) -> int:
    out, meta = run_transform(args)
    welded = sf.write_obj(out.surface, args.out, out.mask, None)
    meta["welded"] = welded
    sf.write_metadata(args.out + ".meta", meta)
    if args.csv:
        sf.write_csv(out.surface, args.csv)
    print(f"wrote {args.out} (closure residual {meta['closure_residual']:.3g}, welded={welded})")
    return EXIT_OK


# ----------------------------------------------------------------------------
# scan
# ----------------------------------------------------------------------------

def cmd_scan(args) -> int:
    if not args.rho_min < args.rho_max:
        raise UsageError("--rho-min must be below --rho-max")
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    fam = cy.cylinder_family(args.nx, args.ny, (-0.5, 0.5))
    lams = np.linspace(args.rho_min, args.rho_max, args.steps + 1)
    rows = cn.scan_spectrum(fam, lams)
    if args.out:
        cn.write_scan_csv(rows, args.out)
        counts = {}
        for r in rows:
            counts[r.kind] = counts.get(r.kind, 0) + 1
        print(f"wrote {args.out}: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())))
    else:
        cn.write_scan_csv(rows, sys.stdout)
    return EXIT_OK


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------

def _check(report, name, value, tol, upper=True):
    ok = bool(value <= tol) if upper else bool(value >= tol)
    report.append({"name": name, "value": float(value), "tolerance": tol,
                   "kind": "max" if upper else "min", "passed": ok})


def _guard(report, name, fn):
    try:
        fn()
    except Exception as exc:  # reported, not raised
        report.append({"name": name, "value": None, "tolerance": None, "kind": "error",
                       "passed": False, "error": f"{type(exc).__name__}: {exc}"})


def run_verify(nx: int, ny: int, perturb_eta: float = 0.0):
    """Run the invariant suite on an ``nx x ny`` cylinder; returns report entries."""
    report = []
    xr = (-2.0, 2.0)
    f = cy.cylinder(nx, ny, xr)
    fd = cy.cylinder_dual_grid(nx, ny, xr)
    fam = cy.cylinder_family(nx, ny, xr)
    if perturb_eta:
        fam = cn.ConnectionFamily(fam.surface, fam.eta.perturbed(perturb_eta))
    x0 = xr[0]
    p1 = cy.CylinderSectionParams(0.75)
    state = {}

    def surfaces():
        _check(report, "cylinder mean curvature H = 1", np.abs(sf.mean_curvature(f) - 1.0).max(), 1e-3)
        _check(report, "dual mean curvature H^d = -1/4", np.abs(sf.mean_curvature(fd) + 0.25).max(), 1e-3)
        _check(report, "cylinder conformality", sf.conformality_residual(f), 1e-9)
        _check(report, "dual form closed", sf.closedness_residual(f), 1e-6)

    def flatness():
        worst = max(cn.curvature_residual(fam, lam) for lam in (-0.5, 0.75, 2.0))
        _check(report, "associated family flat", worst, 1e-6)

    def sections():
        phi = cn.integrate_section(fam, 0.75, cy.analytic_seed(p1, x0))
        exact = cy.analytic_section(p1, f)
        err = np.abs(phi.raw - exact.raw).max() / np.abs(exact.raw).max()
        _check(report, "integrated section matches closed form", err, 1e-6)
        state["phi1"] = phi

    def spectrum():
        worst = 0.0
        for rho in (-0.5, -0.25, 0.25, 0.75, 2.0):
            ms = cn.multipliers(fam, rho)
            hp, hm = cy.multiplier_formula(rho)
            want = np.sort_complex(np.array([hp, hm]))
            got = np.sort_complex(np.array(ms.values()))
            worst = max(worst, np.abs(want - got).max())
        _check(report, "multipliers match closed form", worst, 1e-6)
        kinds = [cn.classify_spectrum(fam, rho).kind for rho in (-0.25, 3.75)]
        _check(report, "Jordan point and resonance detected",
               0.0 if kinds == ["defective-real", "resonance"] else 1.0, 0.0)

    def one_step():
        r1 = db.darboux_transform(fam, state["phi1"])
        X, Y = r1.surface.mesh()
        _check(report, "one-step transform matches closed form",
               np.abs(r1.surface.values - cy.explicit_one_step(X, Y)).max(), 1e-5)
        _check(report, "Riccati equation", db.riccati_residual(f, fd, r1.T, 0.75), 1e-4)
        D = db.dress_family(fam, r1)
        _check(report, "dressing gauge equals d + lam eta^",
               max(D.gauge_residual(lam) for lam in (-0.5, 0.25, 2.0)), 1e-4)
        state.update(r1=r1, D=D)

    def permutability():
        phi2 = cn.integrate_section(fam, 2.0, cy.analytic_seed(cy.CylinderSectionParams(2.0), x0))
        b = pm.bianchi_two_step(fam, state["phi1"], phi2, first=state["r1"])
        r2 = db.darboux_transform(fam, phi2)
        cr = pm.cross_ratio(f.cover_values(b.phi12.values.shape[1]), state["r1"].surface.values,
                            b.transform.surface.values, r2.surface.values)
        re, im = pm.similarity_class(cr)
        _check(report, "cross-ratio equals rho2/rho1", max(np.abs(re - 8 / 3).max(), im.max()), 1e-4)

    def sym_step():
        lf = sym.extend_section(fam, state["phi1"], 0.75, "oracle",
                                seed_fn=lambda lam: cy.analytic_seed(p1.with_rho(lam), x0))
        phi11 = sym.sym_section(state["phi1"], sym.lambda_derivative(lf), state["D"])
        out = sym.sym_two_step(state["r1"], phi11)
        X, Y = out.surface.mesh()
        T = out.surface.values - state["r1"].surface.values
        _check(report, "Sym transform matches closed form", np.abs(T - cy.sym_rotational_T(X, Y)).max(), 1e-5)

    def mean_curvature_law():
        pm_ = cy.CylinderSectionParams(-0.5)
        r = db.darboux_transform(fam, cn.integrate_section(fam, -0.5, cy.analytic_seed(pm_, x0)))
        H = db.darboux_mean_curvature(f, fd, r.T, -0.5)
        _check(report, "Darboux mean curvature constant", H.std(), 1e-6)
        ob = db.cmc_obstruction(f, fd, r.T, -0.5, float(H.mean()))
        _check(report, "CMC obstruction vanishes", np.abs(ob).max(), 1e-6)

    for name, fn in (("surfaces", surfaces), ("flatness", flatness), ("sections", sections),
                     ("spectrum", spectrum), ("one-step", one_step), ("permutability", permutability),
                     ("sym", sym_step), ("mean curvature", mean_curvature_law)):
        if name in ("one-step", "permutability", "sym") and "phi1" not in state:
            report.append({"name": name, "value": None, "tolerance": None, "kind": "skipped",
                           "passed": False, "error": "needs the integrated section"})
            continue
        if name in ("permutability", "sym") and "r1" not in state:
            report.append({"name": name, "value": None, "tolerance": None, "kind": "skipped",
                           "passed": False, "error": "needs the one-step transform"})
            continue
        _guard(report, name, fn)
    return report


def cmd_verify(args) -> int:
    nx, ny = args.grid
    t0 = time.perf_counter()
    report = run_verify(nx, ny, args.perturb_eta)
    elapsed = time.perf_counter() - t0
    for e in report:
        tag = "PASS" if e["passed"] else "FAIL"
        if e["value"] is None:
            print(f"{tag}  {e['name']}: {e.get('error')}")
        else:
            op = "<=" if e["kind"] == "max" else ">="
            print(f"{tag}  {e['name']}: {e['value']:.3e} {op} {e['tolerance']:.0e}")
    ok = all(e["passed"] for e in report)
    print(f"{sum(e['passed'] for e in report)}/{len(report)} checks passed in {elapsed:.1f} s")
    doc = {"grid": [nx, ny], "passed": ok, "seconds": elapsed, "checks": report}
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=2)
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isodt", description="Darboux transforms of isothermic surfaces",
                                 allow_abbrev=False)
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="compute a transform of the round cylinder", allow_abbrev=False)
    t.add_argument("--mode", choices=MODES, default="onestep")
    t.add_argument("--rho", type=float, default=0.75)
    t.add_argument("--rho2", type=float, default=None, help="second parameter for --mode bianchi")
    t.add_argument("--m0p", type=parse_complex, default=1 + 0j)
    t.add_argument("--m1p", type=parse_complex, default=1 + 0j)
    t.add_argument("--m1", type=parse_complex, default=None, help="coefficient of the Sym section")
    t.add_argument("--m2", type=parse_complex, default=None, help="coefficient of the Bianchi-type section")
    t.add_argument("--nx", type=int, default=256)
    t.add_argument("--ny", type=int, default=512)
    t.add_argument("--wraps", type=int, default=1)
    t.add_argument("--x-min", type=float, default=-2.0)
    t.add_argument("--x-max", type=float, default=2.0)
    t.add_argument("--epsilon", type=float, default=1e-4)
    t.add_argument("--extension", choices=sym.RULES, default=None)
    t.add_argument("--out", default="transform.obj")
    t.add_argument("--csv", default=None, help="also write the grid as CSV")
    t.set_defaults(func=cmd_transform)

    s = sub.add_parser("scan", help="classify multipliers over a range of spectral parameters",
                       allow_abbrev=False)
    s.add_argument("--rho-min", type=float, default=-1.0)
    s.add_argument("--rho-max", type=float, default=4.0)
    s.add_argument("--steps", type=int, default=500)
    s.add_argument("--nx", type=int, default=16)
    s.add_argument("--ny", type=int, default=512)
    s.add_argument("--out", default=None, help="CSV path (default stdout)")
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("verify", help="run the invariant suite", allow_abbrev=False)
    v.add_argument("--grid", type=parse_grid, default=(128, 256))
    v.add_argument("--json", default=None, help="write a machine-readable report")
    v.add_argument("--perturb-eta", type=float, default=0.0, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"isodt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IsodtError as exc:
        print(f"isodt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
