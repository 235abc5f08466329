"""Command-line surface: cxmetric type|radius|bounds|sweep|verify|bnw.

Exit codes: 0 when every checked invariant held, 1 when an invariant was
violated (bound crossing, non-monotone radii, failed candidate
verification), 2 for configuration errors. Reports go to stdout; --out
writes CSV (records) or JSON (full report) depending on the file suffix.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import corpus
from .checks import LeviProbe, random_admissible_bnw, verify_candidate, BNWSample, bnw_constant
from .domains import base_point, normalize_frame
from .errors import ConfigInvalid, CxMetricError
from .lines import boundary_radius, fit_loglog, line_type, max_radius
from .sibony import normal_candidate, sibony_lower_bound, tangential_candidate
from .sweep import (
    ScalingReport,
    SweepConfig,
    compute_record,
    report_to_csv,
    report_to_json,
    resolve_direction,
    resolve_point,
    sweep,
)


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--domain", required=True,
                        help="corpus id (ball:n, cxellipsoid:m1,..., shifted:..., "
                             "rotated:...) or path to a .json domain")
    parser.add_argument("--point", default="north",
                        help='boundary point: "north" or comma-separated complex values')
    parser.add_argument("--dir", dest="direction", default="tangent:1",
                        help='"normal", "tangent:j", or a comma-separated complex vector')
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", action="append", default=[],
                        help="output path (.csv or .json); may be repeated")


def _grid_args(parser: argparse.ArgumentParser):
    parser.add_argument("--delta-min", type=float, default=1e-4)
    parser.add_argument("--delta-max", type=float, default=1e-1)
    parser.add_argument("--count", type=int, default=16)
    parser.add_argument("--theta-samples", type=int, default=256)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cxmetric",
                                 description="invariant-metric estimates near convex "
                                             "boundary points in C^n")
    sub = ap.add_subparsers(dest="command", required=True)

    p_type = sub.add_parser("type", help="line type (vanishing order) of a direction")
    _common(p_type)
    p_type.add_argument("--order-cap", type=int, default=8)
    p_type.add_argument("--method", choices=("taylor", "regression"), default="taylor")

    p_rad = sub.add_parser("radius", help="section radius sweep and its scaling slope")
    _common(p_rad)
    _grid_args(p_rad)

    p_b = sub.add_parser("bounds", help="lower/upper bounds at a single delta")
    _common(p_b)
    p_b.add_argument("--delta", type=float, default=1e-2)
    p_b.add_argument("--theta-samples", type=int, default=256)
    p_b.add_argument("--methods", default="sibony,disc,oracle")
    p_b.add_argument("--upper", action="store_true",
                     help="upper bounds only (disc and recentered disc)")

    p_s = sub.add_parser("sweep", help="full delta sweep with fitted exponents")
    _common(p_s)
    _grid_args(p_s)
    p_s.add_argument("--methods", default="sibony,disc")
    p_s.add_argument("--order-cap", type=int, default=8)

    p_v = sub.add_parser("verify", help="candidate admissibility suite at one delta")
    _common(p_v)
    p_v.add_argument("--delta", type=float, default=1e-2)
    p_v.add_argument("--samples", type=int, default=10_000)
    p_v.add_argument("--tolerance", type=float, default=1e-8)

    p_w = sub.add_parser("bnw", help="convex-polynomial comparison constants")
    p_w.add_argument("--degree", type=int, default=6)
    p_w.add_argument("--count", type=int, default=1000)
    p_w.add_argument("--r", type=float, default=1.0)
    p_w.add_argument("--seed", type=int, default=0)
    p_w.add_argument("--out", action="append", default=[])
    return ap


def _write_outputs(paths, report: ScalingReport) -> None:
    for path in paths:
        if path.endswith(".csv"):
            payload = report_to_csv(report)
        elif path.endswith(".json"):
            payload = report_to_json(report)
        else:
            raise ConfigInvalid(f"output path must end in .csv or .json: {path!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)


def _write_json(paths, doc) -> None:
    for path in paths:
        if not path.endswith(".json"):
            raise ConfigInvalid(f"output path must end in .json: {path!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_type(args) -> int:
    domain = corpus.parse_domain(args.domain)
    frame = normalize_frame(domain, resolve_point(domain, args.point))
    kind, direction = resolve_direction(domain, frame, args.direction)
    if kind == "normal":
        raise ConfigInvalid("line type needs a tangential direction")
    est = line_type(domain, frame.P, direction, order_cap=args.order_cap,
                    method=args.method)
    print(f"line type m = {est.m} (method={est.method})")
    for k in sorted(est.coefficient_table):
        print(f"  order {k}: coefficient magnitude {est.coefficient_table[k]:.6e}")
    for note in est.warnings:
        print(f"  note: {note}")
    _write_json(args.out, {"m": est.m, "method": est.method,
                           "coefficient_table": {str(k): v for k, v in
                                                 est.coefficient_table.items()},
                           "fit_r2": est.fit_r2, "warnings": list(est.warnings)})
    return 0


def cmd_radius(args) -> int:
    domain = corpus.parse_domain(args.domain)
    frame = normalize_frame(domain, resolve_point(domain, args.point))
    kind, direction = resolve_direction(domain, frame, args.direction)
    deltas = np.geomspace(args.delta_min, args.delta_max, args.count)
    radii = []
    print("delta,R_xi")
    for d in deltas:
        center = base_point(frame.P, frame.nu, float(d), domain)
        if kind == "normal":
            r = boundary_radius(domain, center, direction, 0.0)
        else:
            r = max_radius(domain, center, direction, args.theta_samples).R
        radii.append(r)
        print(f"{d!r},{r!r}")
    slope, r2 = fit_loglog(deltas, np.asarray(radii))
    print(f"slope = {slope:.6f} (R^2 = {r2:.6f})")
    monotone = all(b >= a - 1e-12 for a, b in zip(radii, radii[1:]))
    if not monotone:
        print("INVARIANT VIOLATION: radius not nondecreasing in delta")
    _write_json([p for p in args.out if p.endswith(".json")],
                {"deltas": list(map(float, deltas)), "radii": list(map(float, radii)),
                 "slope": slope, "r2": r2, "monotone": monotone})
    return 0 if monotone else 1


def cmd_bounds(args) -> int:
    methods = ("disc", "recentered") if args.upper else \
        tuple(m.strip() for m in args.methods.split(",") if m.strip())
    config = SweepConfig(domain_id=args.domain, boundary_point=args.point,
                         direction=args.direction, methods=methods,
                         seed=args.seed, theta_samples=args.theta_samples)
    domain = corpus.parse_domain(args.domain)
    frame = normalize_frame(domain, resolve_point(domain, args.point))
    kind, direction = resolve_direction(domain, frame, args.direction)
    if kind == "normal":
        m_used = 1
    else:
        m_used = line_type(domain, frame.P, direction).m
    record = compute_record(domain, frame, kind, direction, args.delta,
                            m_used, config, args.seed)
    parts = [f"delta={record.delta:.6g}", f"m={record.m_used}"]
    for name in ("lower", "upper", "oracle"):
        v = getattr(record, name)
        if v is not None:
            parts.append(f"{name}={v:.8g}")
    print("  ".join(parts))
    violation = record.crossing_violation()
    if violation:
        print(f"INVARIANT VIOLATION: {violation}")
    report = ScalingReport(config=config, records=[record],
                           violations=[violation] if violation else [])
    _write_outputs(args.out, report)
    return 1 if violation else 0


def cmd_sweep(args) -> int:
    config = SweepConfig(domain_id=args.domain, boundary_point=args.point,
                         direction=args.direction, delta_min=args.delta_min,
                         delta_max=args.delta_max, count=args.count,
                         methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
                         seed=args.seed, theta_samples=args.theta_samples,
                         order_cap=args.order_cap)
    report = sweep(config)
    n_rec = len(report.records)
    print(f"{n_rec} records on [{config.delta_min:g}, {config.delta_max:g}]")
    if report.exponent_lower:
        print(f"exponent(lower) = {report.exponent_lower[0]:+.4f} "
              f"(R^2 = {report.exponent_lower[1]:.5f})")
    if report.exponent_upper:
        print(f"exponent(upper) = {report.exponent_upper[0]:+.4f} "
              f"(R^2 = {report.exponent_upper[1]:.5f})")
    if report.sandwich:
        s = report.sandwich
        print(f"sandwich: c = {s['c']:.6g}, C = {s['C']:.6g}, "
              f"C/c = {s['ratio']:.4g} (m = {s['m']})")
    for d in report.diagnostics:
        print(f"note: {d}")
    for v in report.violations:
        print(f"INVARIANT VIOLATION: {v}")
    _write_outputs(args.out, report)
    return 1 if report.violations else 0


def cmd_verify(args) -> int:
    domain = corpus.parse_domain(args.domain)
    frame = normalize_frame(domain, resolve_point(domain, args.point))
    kind, direction = resolve_direction(domain, frame, args.direction)
    probe = LeviProbe(tolerance=args.tolerance)
    candidates = [("normal_rational", normal_candidate(frame, args.delta))]
    if kind == "tangent":
        candidates.append(("tangential_exp", tangential_candidate(
            domain, frame, direction, args.delta, seed=args.seed)))
        candidates.append(("tangential_truncated", tangential_candidate(
            domain, frame, direction, args.delta, use_closed_form=False,
            seed=args.seed)))
    doc = {}
    all_ok = True
    for name, cand in candidates:
        rep = verify_candidate(cand, domain, sample_count=args.samples,
                               probe=probe, seed=args.seed)
        all_ok &= rep.passed
        print(f"{name}: {'PASS' if rep.passed else 'FAIL'} "
              f"(base={rep.base_value:.2e}, range=[{rep.u_min:.2e}, {rep.u_max:.6f}], "
              f"cr={'-' if rep.cr_residual is None else f'{rep.cr_residual:.2e}'}, "
              f"stencil_min={'-' if rep.logpsh_min is None else f'{rep.logpsh_min:.2e}'})")
        doc[name] = {"passed": rep.passed, "conditions": rep.conditions,
                     "base_value": rep.base_value, "u_min": rep.u_min,
                     "u_max": rep.u_max, "logpsh_min": rep.logpsh_min,
                     "trusted_samples": rep.trusted_samples,
                     "cr_residual": rep.cr_residual, "notes": list(rep.notes)}
    _write_json(args.out, doc)
    return 0 if all_ok else 1


def cmd_bnw(args) -> int:
    rng = np.random.default_rng(args.seed)
    samples = random_admissible_bnw(args.degree, args.count, rng, r=args.r)
    constants = np.array([bnw_constant(s) for s in samples])
    print(f"degree {args.degree}, {args.count} admissible samples on [0, {args.r!r}]")
    print(f"constants: min = {constants.min():.6f}, mean = {constants.mean():.6f}")
    ok = bool((constants > 0).all())
    ref1 = bnw_constant(BNWSample(coefficients=[1.0], r=1.0))
    ref2 = bnw_constant(BNWSample(coefficients=[1.0, -0.2], r=1.0))
    print(f"reference x^2 -> {ref1:.6f}; x^2 - 0.2 x^3 -> {ref2:.6f}")
    if not ok:
        print("INVARIANT VIOLATION: nonpositive constant found")
    _write_json(args.out, {"degree": args.degree, "count": args.count,
                           "min": float(constants.min()),
                           "mean": float(constants.mean()),
                           "reference": [ref1, ref2], "all_positive": ok})
    return 0 if ok else 1


COMMANDS = {"type": cmd_type, "radius": cmd_radius, "bounds": cmd_bounds,
            "sweep": cmd_sweep, "verify": cmd_verify, "bnw": cmd_bnw}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CxMetricError as exc:
        print(f"invariant violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
