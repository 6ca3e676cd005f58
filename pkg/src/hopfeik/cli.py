"""Command-line interface.

Subcommands: eval, scan, trace, link, index, verify.  Every command emits a
single JSON document (schema-stable, configuration echoed) except trace,
which can also write CSV/OBJ polylines.  Seeded commands are
byte-reproducible.  Exit codes: 0 success, 2 domain/usage error,
3 tolerance failure, 4 trace failure, 5 ill-conditioned linking.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .calculus import (
    DEFAULT_FD_STEP,
    EXCLUDE_AXIS,
    EXCLUDE_FOCAL,
    BoxRegion,
    SamplingSpec,
    ScalarField,
    TorusRegion,
    control_field,
    residual_scan,
)
from .coords import CartesianPoint, to_toroidal
from .errors import (
    DomainError,
    HopfeikError,
    LinkingConditionError,
    SamplingError,
    TraceError,
)
from .fibers import (
    Fiber,
    TraceOptions,
    component_count,
    gauss_linking,
    hopf_index,
    trace_fiber,
    trace_level_set,
    seed_on_level_set,
)
from .geometry import run_geometry_suite
from .hopf import HopfMapSpec, evaluate
from .symmetry import (
    BaseConformalMap,
    Dilation,
    Inversion,
    Rotation,
    TargetMap,
    Translation,
    compose_target,
    transform_base,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_TOLERANCE = 3
EXIT_TRACE = 4
EXIT_LINKING = 5


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        _atomic_write(output, text)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".hopfeik-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_floats(text: str, count: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise DomainError(f"{what} needs {count} comma-separated values, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise DomainError(f"cannot parse {what} {text!r}: {exc}") from None


def _parse_complex_list(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(p.strip().replace(" ", "")) for p in text.split(","))
    except ValueError as exc:
        raise DomainError(f"cannot parse coefficients {text!r}: {exc}") from None


def _parse_transform(spec_text: str):
    name, _, rest = spec_text.partition(":")
    if name == "rotz":
        (angle,) = _parse_floats(rest, 1, "rotz")
        return Rotation((0.0, 0.0, 1.0), angle)
    if name == "rot":
        vals = _parse_floats(rest, 4, "rot")
        return Rotation(vals[:3], vals[3])
    if name == "translate":
        return Translation(_parse_floats(rest, 3, "translate"))
    if name == "dilate":
        (s,) = _parse_floats(rest, 1, "dilate")
        return Dilation(s)
    if name == "invert":
        return Inversion()
    raise DomainError(
        f"unknown transform {name!r}; known: rotz:a | rot:x,y,z,a | translate:x,y,z | "
        f"dilate:s | invert"
    )


def _map_spec(args) -> HopfMapSpec:
    return HopfMapSpec(args.m, args.n)


def _build_field(args) -> tuple[ScalarField, dict]:
    """Resolve the field (map or control), then apply compositions/transforms."""
    config: dict = {}
    if getattr(args, "field", None):
        fld = control_field(args.field)
        config["map"] = None
        config["field_name"] = args.field
    else:
        if args.m is None or args.n is None:
            raise DomainError("either -m/-n or --field is required")
        spec = _map_spec(args)
        fld = ScalarField.from_map(spec)
        config["map"] = {"m": spec.m, "n": spec.n}
        config["field_name"] = None
    if getattr(args, "compose", None):
        F = TargetMap(numer=_parse_complex_list(args.compose))
        fld = compose_target(fld, F)
        config["compose"] = args.compose
    else:
        config["compose"] = None
    transforms = getattr(args, "transform", None) or []
    if transforms:
        T = BaseConformalMap.of(*(_parse_transform(t) for t in transforms))
        fld = transform_base(fld, T)
    config["transforms"] = list(transforms)
    return fld, config


def _sampling(args) -> SamplingSpec:
    if args.region == "box":
        lo, hi = args.box
        region = BoxRegion((lo,) * 3, (hi,) * 3)
    else:
        region = TorusRegion(eta_range=tuple(args.eta_range))
    return SamplingSpec(
        region=region,
        count=args.samples,
        exclude_focal=args.exclude_focal,
        exclude_axis=args.exclude_axis,
        seed=args.seed,
    )


def _trace_options(args) -> TraceOptions:
    return TraceOptions(
        initial_step=args.step,
        error_tol=args.error_tol,
        closure_tol=args.closure_tol,
        max_steps=args.max_steps,
    )


# ---------------------------------------------------------------------------
# Fiber export / import


def fibers_to_csv(fibers: list[Fiber]) -> str:
    lines = ["fiber_id,point_index,x,y,z"]
    for fid, f in enumerate(fibers):
        for i, (x, y, z) in enumerate(f.points):
            lines.append(f"{fid},{i},{float(x)!r},{float(y)!r},{float(z)!r}")
    return "\n".join(lines) + "\n"


def fibers_to_obj(fibers: list[Fiber]) -> str:
    lines = []
    offset = 1  # OBJ indices are 1-based
    for f in fibers:
        pts = f.closed_polyline()
        for x, y, z in pts:
            lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
        idx = " ".join(str(offset + i) for i in range(len(pts)))
        closing = f" {offset}" if f.closed else ""
        lines.append(f"l {idx}{closing}")
        offset += len(pts)
    return "\n".join(lines) + "\n"


def read_fibers_csv(path: str) -> dict[int, np.ndarray]:
    import csv

    rows: dict[int, list[tuple[int, float, float, float]]] = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            fid = int(rec["fiber_id"])
            rows.setdefault(fid, []).append(
                (int(rec["point_index"]), float(rec["x"]), float(rec["y"]), float(rec["z"]))
            )
    if not rows:
        raise DomainError(f"no fiber records in {path}")
    out = {}
    for fid, pts in rows.items():
        pts.sort(key=lambda t: t[0])
        out[fid] = np.array([(x, y, z) for _, x, y, z in pts])
    return out


# ---------------------------------------------------------------------------
# Commands


def cmd_eval(args) -> int:
    spec = _map_spec(args)
    x, y, z = _parse_floats(args.point, 3, "--point")
    p = CartesianPoint(x, y, z)
    value = evaluate(spec, p)
    t = to_toroidal(p)
    _emit(
        {
            "command": "eval",
            "config": {"m": spec.m, "n": spec.n, "point": [x, y, z]},
            "value": {"re": value.real, "im": value.imag},
            "modulus": abs(value),
            "phase": math.atan2(value.imag, value.real) % (2.0 * math.pi),
            "toroidal": {"eta": t.eta, "xi": t.xi, "phi": t.phi},
        },
        args.output,
    )
    return EXIT_OK


def cmd_scan(args) -> int:
    fld, field_config = _build_field(args)
    s = _sampling(args)
    report = residual_scan(fld, s, args.fd_step)
    doc = {
        "command": "scan",
        "map": field_config["map"],
        "field": report.field_label,
        "samples": report.samples,
        "used": report.used,
        "excluded": report.excluded,
        "h": report.h,
        "max": report.max,
        "mean": report.mean,
        "p99": report.p99,
        "seed": report.seed,
        "description": report.description,
        "config": {
            **field_config,
            "region": args.region,
            "exclude_focal": s.exclude_focal,
            "exclude_axis": s.exclude_axis,
            "fail_above": args.fail_above,
        },
    }
    _emit(doc, args.output)
    if args.fail_above is not None and report.max > args.fail_above:
        print(
            f"max normalized residual {report.max:.3e} exceeds --fail-above "
            f"{args.fail_above:.3e}",
            file=sys.stderr,
        )
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_trace(args) -> int:
    spec = _map_spec(args)
    opts = _trace_options(args)
    if args.all_components:
        fibers = trace_level_set(spec, args.eta0, args.sigma0, opts)
    else:
        fibers = [trace_fiber(spec, seed_on_level_set(spec, args.eta0, args.sigma0), opts)]
    payload = fibers_to_csv(fibers) if args.format == "csv" else fibers_to_obj(fibers)
    summary = {
        "command": "trace",
        "config": {
            "m": spec.m,
            "n": spec.n,
            "eta0": args.eta0,
            "sigma0": args.sigma0,
            "all_components": args.all_components,
            "format": args.format,
            "output": args.output,
        },
        "fibers": [
            {
                "id": i,
                "points": int(len(f.points)),
                "closed": f.closed,
                "winding_xi": f.winding_xi,
                "winding_phi": f.winding_phi,
                "arc_length": f.arc_length,
                "eta": f.eta,
                "sigma": f.sigma,
            }
            for i, f in enumerate(fibers)
        ],
    }
    if args.output is None:
        sys.stdout.write(payload)
    else:
        _atomic_write(args.output, payload)
        _emit(summary, None)
    return EXIT_OK


def cmd_link(args) -> int:
    fa = read_fibers_csv(args.a)
    fb = read_fibers_csv(args.b)
    ida = args.a_id if args.a_id is not None else min(fa)
    idb = args.b_id if args.b_id is not None else min(fb)
    if ida not in fa:
        raise DomainError(f"fiber id {ida} not present in {args.a}")
    if idb not in fb:
        raise DomainError(f"fiber id {idb} not present in {args.b}")
    result = gauss_linking(fa[ida], fb[idb], method=args.method)
    _emit(
        {
            "command": "link",
            "raw": result.raw,
            "rounded": result.rounded,
            "deviation": result.deviation,
            "expected": None,
            "config": {
                "a": args.a,
                "b": args.b,
                "a_id": ida,
                "b_id": idb,
                "method": args.method,
            },
        },
        args.output,
    )
    return EXIT_OK


def cmd_index(args) -> int:
    spec = _map_spec(args)
    result = hopf_index(
        spec,
        _trace_options(args),
        eta_a=args.eta_a,
        eta_b=args.eta_b,
        sigma_a=args.sigma_a,
        sigma_b=args.sigma_b,
        method=args.method,
    )
    g = component_count(spec)
    _emit(
        {
            "command": "index",
            "raw": result.raw,
            "rounded": result.rounded,
            "deviation": result.deviation,
            "expected": spec.m * spec.n,
            "components": g,
            "per_component_raw": result.raw / (g * g),
            "note": (
                "each level set has gcd(|m|,|n|) components; the index sums the "
                "pairwise linkings, i.e. per-component linking x gcd^2"
            ),
            "config": {
                "m": spec.m,
                "n": spec.n,
                "eta_a": args.eta_a,
                "eta_b": args.eta_b,
                "sigma_a": args.sigma_a,
                "sigma_b": args.sigma_b,
                "method": args.method,
            },
        },
        args.output,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = _map_spec(args)
    s = _sampling(args)
    suite = run_geometry_suite(spec, s, args.fd_step)
    checks = {
        "vertical_annihilation": {
            "max": suite.max_vertical_ratio,
            "tol": args.tol_vertical,
            "pass": suite.max_vertical_ratio < args.tol_vertical,
        },
        "coframe_duality": {
            "max": suite.max_duality_error,
            "tol": args.tol_duality,
            "pass": suite.max_duality_error < args.tol_duality,
        },
        "conformal_offdiag": {
            "max": suite.max_offdiag,
            "tol": args.tol_conformal,
            "pass": suite.max_offdiag < args.tol_conformal,
        },
        "conformal_proportionality": {
            "max": suite.max_proportionality,
            "tol": args.tol_conformal,
            "pass": suite.max_proportionality < args.tol_conformal,
        },
        "scale_positive": {
            "min": suite.min_scale,
            "pass": suite.min_scale > 0.0,
        },
    }
    ok = all(c["pass"] for c in checks.values())
    _emit(
        {
            "command": "verify",
            "map": {"m": spec.m, "n": spec.n},
            "checks": checks,
            "samples_used": suite.samples_used,
            "samples_skipped": suite.samples_skipped,
            "pass": ok,
            "config": {
                "samples": args.samples,
                "seed": args.seed,
                "h": args.fd_step,
                "region": args.region,
            },
        },
        args.output,
    )
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# Parser


def _add_map_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("-m", type=int, required=required, default=None, help="xi winding (nonzero integer)")
    p.add_argument("-n", type=int, required=required, default=None, help="phi winding (nonzero integer)")


def _add_sampling_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fd-step", type=float, default=DEFAULT_FD_STEP, help="central-difference step")
    p.add_argument("--region", choices=["box", "torus"], default="box")
    p.add_argument("--box", type=float, nargs=2, default=(-2.5, 2.5), metavar=("LO", "HI"))
    p.add_argument("--eta-range", type=float, nargs=2, default=(0.2, 3.0))
    p.add_argument("--exclude-focal", type=float, default=EXCLUDE_FOCAL)
    p.add_argument("--exclude-axis", type=float, default=EXCLUDE_AXIS)


def _add_trace_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step", type=float, default=None, help="initial arc-length step")
    p.add_argument("--error-tol", type=float, default=1e-9)
    p.add_argument("--closure-tol", type=float, default=1e-7)
    p.add_argument("--max-steps", type=int, default=200_000)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hopfeik",
        description="Toroidal Hopf maps solving the static complex eikonal equation",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a map at a point")
    _add_map_args(p)
    p.add_argument("--point", required=True, help="x,y,z")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="residual scan over a sampling region")
    _add_map_args(p, required=False)
    p.add_argument("--field", default=None, help="control field name (x+2iy, x+iy, const)")
    p.add_argument("--compose", default=None, help="target polynomial coefficients c0,c1,... (j notation)")
    p.add_argument("--transform", action="append", default=None, help="base transform, repeatable (rotz:a, rot:x,y,z,a, translate:x,y,z, dilate:s, invert)")
    _add_sampling_args(p)
    p.add_argument("--fail-above", type=float, default=None, help="exit 3 if max residual exceeds this")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("trace", help="trace fiber(s) and export CSV/OBJ polylines")
    _add_map_args(p)
    p.add_argument("--eta0", type=float, default=0.6, help="torus of the level set")
    p.add_argument("--sigma0", type=float, default=0.0, help="phase of the level value")
    p.add_argument("--all-components", action="store_true", help="trace every component of the level set")
    p.add_argument("--format", choices=["csv", "obj"], default="csv")
    _add_trace_args(p)
    p.add_argument("--output", default=None, help="write polylines here (JSON summary to stdout)")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("link", help="Gauss linking number of two exported fibers")
    p.add_argument("--a", required=True, help="CSV polyline file")
    p.add_argument("--b", required=True, help="CSV polyline file")
    p.add_argument("--a-id", type=int, default=None)
    p.add_argument("--b-id", type=int, default=None)
    p.add_argument("--method", choices=["solid-angle", "midpoint"], default="solid-angle")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("index", help="Hopf index via linking of two level sets")
    _add_map_args(p)
    p.add_argument("--eta-a", type=float, default=0.6)
    p.add_argument("--eta-b", type=float, default=1.2)
    p.add_argument("--sigma-a", type=float, default=0.0)
    p.add_argument("--sigma-b", type=float, default=0.5 * math.pi)
    p.add_argument("--method", choices=["solid-angle", "midpoint"], default="solid-angle")
    _add_trace_args(p)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("verify", help="geometry suite: splitting, duality, conformal checks")
    _add_map_args(p)
    _add_sampling_args(p)
    p.add_argument("--tol-vertical", type=float, default=1e-6)
    p.add_argument("--tol-duality", type=float, default=1e-10)
    p.add_argument("--tol-conformal", type=float, default=1e-6)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LinkingConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LINKING
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    except (DomainError, SamplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except HopfeikError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
