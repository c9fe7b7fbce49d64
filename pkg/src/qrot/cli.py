"""Command-line entry point.

Subcommands wire profile and immersion files to the library operations and
write CSV/JSON reports.  Exit codes: 0 success, 2 validation failure,
3 numerical failure, 4 malformed JSON.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .flow import (FlowConfig, desitter_geodesic, perturb_immersion,
                   product_geodesic, refinement_study, slice_sphere,
                   stationarize)
from .immersion import (immersion_from_dict, immersion_to_dict,
                        induced_gram, integral_identity, stationarity_report,
                        trace_diagnostics)
from .profile import (QuadratureConfig, check_admissible, from_spec,
                      profile_to_warp, spec_to_profile, warp_to_profile,
                      WarpingFunction)
from .qsurface import RotationHypersurface, ncc_check
from .scalarfn import ExprError, ExprSyntaxError

FMT = "%.17g"


def _fmt(x):
    return FMT % float(x)


def _load_json(path):
    with open(path, "r") as fh:
        return json.load(fh)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _quadrature(args):
    if getattr(args, "step", None):
        return QuadratureConfig(step=args.step)
    return QuadratureConfig()


# ---------------------------------------------------------------------------
# subcommands

def cmd_profile(args):
    out = _outdir(args)
    spec = _load_json(args.input)
    obj, n = from_spec(spec)
    cfg = _quadrature(args)
    if isinstance(obj, WarpingFunction):
        prof, h = warp_to_profile(obj, cfg)
        table = prof.fn
        _write_csv(out / "r_table.csv", ["t", "r", "r1", "r2"],
                   [table.grid, table.values, table.d1, table.d2])
        _write_csv(out / "h_table.csv", ["s", "h", "h1", "h2"],
                   [h.grid, h.values, h.d1, h.d2])
        report = check_admissible(prof, grid_size=args.grid)
    else:
        report = check_admissible(obj, grid_size=args.grid)
        _write_json(out / "admissibility.json", report.to_dict())
        warp, h_tilde = profile_to_warp(obj, cfg, n=n)
        table = warp.fn
        _write_csv(out / "f_table.csv", ["s", "f", "f1", "f2"],
                   [table.grid, table.values, table.d1, table.d2])
        _write_csv(out / "h_tilde_table.csv", ["t", "s", "s1", "s2"],
                   [h_tilde.grid, h_tilde.values, h_tilde.d1, h_tilde.d2])
    _write_json(out / "admissibility.json", report.to_dict())
    return 0


def cmd_geometry(args):
    out = _outdir(args)
    spec = _load_json(args.input)
    prof, n = spec_to_profile(spec, _quadrature(args))
    surface = RotationHypersurface(prof, n)
    grid = surface.classification_grid(args.grid)
    r = np.asarray(prof.value(grid))
    r1 = np.asarray(prof.deriv1(grid))
    r2 = np.asarray(prof.deriv2(grid))
    alpha, beta = surface.shape_coefficients(grid)
    h = surface.mean_curvature(grid)
    rho = r1 / np.sqrt(1.0 - r1 ** 2)
    columns = [grid, r, r1, r2, alpha, beta, h, rho]
    header = ["t", "r", "r1", "r2", "alpha", "beta", "H", "rho"]
    # frames at the canonical point (t, r(t), 0, ..., 0)
    w = np.sqrt(1.0 - r1 ** 2)
    header += ["N0", "N1", "T0", "T1", "K0", "K1"]
    columns += [r1 / w, 1.0 / w, 1.0 / w, r1 / w, r / w, r1 * r / w]
    _write_csv(out / "geometry.csv", header, columns)
    return 0


def cmd_classify(args):
    out = _outdir(args)
    spec = _load_json(args.input)
    obj, n = from_spec(spec)
    cfg = _quadrature(args)
    if isinstance(obj, WarpingFunction):
        prof, _ = warp_to_profile(obj, cfg)
        ncc = ncc_check(obj, grid_size=args.grid, cfg=cfg)
    else:
        prof = obj
        ncc = ncc_check(prof, grid_size=args.grid)
    surface = RotationHypersurface(prof, n)
    cls = surface.classify(grid_size=args.grid, tol=args.tol)
    payload = cls.to_dict()
    payload["ncc"] = ncc.to_dict()
    if n == 1:
        payload["cmc_first_integral"] = surface.cmc_first_integral(
            grid_size=args.grid, tol=args.tol)
    _write_json(out / "classification.json", payload)
    _write_csv(out / "classification_residuals.csv",
               ["t", "umbilical_residual", "cmc_residual", "ppc_residual"],
               [cls.grid, cls.umbilical_residual, cls.cmc_residual,
                cls.ppc_residual])
    return 0


def cmd_immersion(args):
    out = _outdir(args)
    im = immersion_from_dict(_load_json(args.input))
    _, spacelike = induced_gram(im)
    payload = {
        "k": im.k,
        "n": im.ambient_n,
        "closed": im.domain.closed,
        "num_vertices": im.domain.num_vertices,
        "num_simplices": int(im.domain.simplices.shape[0]),
        "spacelike": bool(np.all(spacelike)),
        "constrained": im.constraint is not None,
    }
    _write_json(out / "validation.json", payload)
    return 0


def cmd_verify(args):
    out = _outdir(args)
    im = immersion_from_dict(_load_json(args.input))
    if im.constraint is None:
        raise ValidationError("verify needs an immersion with a "
                              "constraint_profile")
    report = stationarity_report(im)
    payload = report.to_dict()
    payload["trace_identities"] = {
        k: v for k, v in trace_diagnostics(im).items()
        if np.isscalar(v) or isinstance(v, float)
    }
    if im.domain.closed:
        payload["integral_identity"] = integral_identity(im)
    _write_json(out / "report.json", payload)
    report.write_csv(out / "report.csv")
    return 0


def cmd_flow(args):
    out = _outdir(args)
    im = immersion_from_dict(_load_json(args.input))
    overrides = {}
    if args.config:
        overrides.update(_load_json(args.config))
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.step is not None:
        overrides["step"] = args.step
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    cfg = FlowConfig(**overrides)
    final, trace = stationarize(im, cfg)
    _write_json(out / "final_immersion.json", immersion_to_dict(final))
    trace.write_csv(out / "flow_trace.csv")
    _write_json(out / "termination.json", trace.summary(cfg.tol))
    if trace.termination in ("spacelike_guard", "domain_exit", "quality_floor"):
        print(f"flow aborted: {trace.termination}", file=sys.stderr)
        return 3
    return 0


def _build_family(args, resolution=None):
    name = args.family
    if name == "slice-sphere":
        if args.input is None:
            raise ValidationError("slice-sphere needs --in PROFILE_SPEC")
        prof, n = spec_to_profile(_load_json(args.input), _quadrature(args))
        surface = RotationHypersurface(prof, n)
        res = resolution if resolution is not None else \
            (args.m if args.k == 1 else args.resolution)
        return slice_sphere(surface, args.t0, args.k, res)
    if name == "product-geodesic":
        m = resolution if resolution is not None else args.m
        return product_geodesic(args.a, turns=args.turns, m=m, n=args.n)
    if name == "desitter-geodesic":
        m = resolution if resolution is not None else args.m
        p = np.asarray(json.loads(args.p), dtype=float)
        v = np.asarray(json.loads(args.v), dtype=float)
        return desitter_geodesic(p, v, m=m)
    raise ValidationError(f"unknown family {name!r}")


def cmd_families(args):
    out = _outdir(args)
    im = _build_family(args)
    if args.perturb:
        im = perturb_immersion(im, args.perturb, seed=args.seed)
    _write_json(out / "family_immersion.json", immersion_to_dict(im))
    return 0


def cmd_study(args):
    out = _outdir(args)

    def constructor(level):
        if args.family == "slice-sphere" and args.k == 2:
            return _build_family(args, resolution=args.resolution + level)
        base = args.m
        return _build_family(args, resolution=base * 2 ** level)

    result = refinement_study(constructor, levels=args.refine)
    _write_json(out / "study.json", result)
    _write_csv(out / "study.csv", ["level", "h", "residual"],
               [np.arange(len(result["h"])), result["h"], result["residual"]])
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="qrot",
        description="Rotation Lorentzian hypersurfaces Q(r) and stationary "
                    "spacelike submanifolds")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--in", dest="input", required=True,
                           help="input JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--grid", type=int, default=512)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--step", type=float, default=None)

    p = sub.add_parser("profile", help="f <-> r conversion tables")
    common(p)
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("geometry", help="frame and curvature samples")
    common(p)
    p.set_defaults(handler=cmd_geometry)

    p = sub.add_parser("classify", help="umbilical / CMC / PPC / NCC report")
    common(p)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("immersion", help="validate an immersion file")
    common(p)
    p.set_defaults(handler=cmd_immersion)

    p = sub.add_parser("verify", help="stationarity residual report")
    common(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("flow", help="run the stationarizing flow")
    common(p)
    p.add_argument("--config", default=None, help="flow config JSON")
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(handler=cmd_flow)

    def family_args(p):
        p.add_argument("--family", required=True,
                       choices=["slice-sphere", "product-geodesic",
                                "desitter-geodesic"])
        p.add_argument("--in", dest="input", default=None,
                       help="profile spec for slice-sphere")
        p.add_argument("--t0", type=float, default=0.0)
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--m", type=int, default=128)
        p.add_argument("--resolution", type=int, default=2,
                       help="icosphere subdivisions for k = 2")
        p.add_argument("--a", type=float, default=0.0)
        p.add_argument("--turns", type=int, default=1)
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--p", default=None, help="JSON array")
        p.add_argument("--v", default=None, help="JSON array")
        p.add_argument("--out", required=True)
        p.add_argument("--grid", type=int, default=512)
        p.add_argument("--step", type=float, default=None)

    p = sub.add_parser("families", help="construct analytic families")
    family_args(p)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_families)

    p = sub.add_parser("study", help="refinement study of a family")
    family_args(p)
    p.add_argument("--refine", type=int, default=3)
    p.set_defaults(handler=cmd_study)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except json.JSONDecodeError as exc:
        doc = getattr(exc, "doc", "")
        print(f"malformed JSON at byte offset {exc.pos}: {exc.msg}",
              file=sys.stderr)
        return 4
    except ExprSyntaxError as exc:
        print(f"expression error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ExprError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
