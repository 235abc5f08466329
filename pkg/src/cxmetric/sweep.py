"""Delta sweeps: orchestrate bounds, fit scaling exponents, emit reports.

A sweep walks a log-spaced delta grid at one boundary configuration,
computing the requested lower/upper/oracle values per delta, then fits the
log-log slopes and the sandwich constants c <= F * delta^{1/m} <= C. All
sampling is seeded per record, so a fixed configuration produces
byte-identical CSV and JSON outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import corpus
from .discs import affine_disc_bound, recentered_disc_bound
from .domains import (
    ComplexDirection,
    ConvexDomain,
    as_points,
    base_point,
    complex_tangent_project,
    normalize_frame,
)
from .errors import ConfigInvalid, CxMetricError, DegenerateFit
from .lines import LineTypeEstimate, boundary_radius, fit_loglog, gradient_ratio, line_type, max_radius
from .sibony import normal_candidate, sibony_lower_bound, tangential_candidate

SCHEMA_VERSION = "v1"
CSV_COLUMNS = ("delta", "lower", "upper", "oracle", "m_used", "theta_star",
               "R_xi", "grad_ratio")
VALID_METHODS = ("sibony", "disc", "recentered", "oracle")


@dataclass(frozen=True)
class SweepConfig:
    """Configuration of one sweep; validated on construction."""

    domain_id: str
    boundary_point: str = "north"     # "north" or comma-separated complex vector
    direction: str = "normal"         # "normal" | "tangent:j" | complex vector
    delta_min: float = 1e-4
    delta_max: float = 1e-1
    count: int = 16
    methods: tuple = ("sibony", "disc")
    seed: int = 0
    theta_samples: int = 256
    order_cap: int = 8

    def __post_init__(self):
        if not (0 < self.delta_min < self.delta_max):
            raise ConfigInvalid("need 0 < delta_min < delta_max")
        if self.count < 8:
            raise ConfigInvalid("delta grid needs at least 8 points")
        bad = [m for m in self.methods if m not in VALID_METHODS]
        if bad:
            raise ConfigInvalid(f"unknown methods {bad}; valid: {VALID_METHODS}")

    def delta_grid(self) -> np.ndarray:
        return np.geomspace(self.delta_min, self.delta_max, self.count)


@dataclass
class BoundRecord:
    """Per-delta bound values and probe diagnostics."""

    delta: float
    lower: Optional[float]
    upper: Optional[float]
    oracle: Optional[float]
    m_used: int
    theta_star: Optional[float] = None
    R_xi: Optional[float] = None
    grad_ratio: Optional[float] = None

    def crossing_violation(self, slack: float = 1e-9) -> Optional[str]:
        if self.lower is not None and self.upper is not None and self.lower > self.upper + slack:
            return f"delta={self.delta:.6g}: lower {self.lower:.6g} > upper {self.upper:.6g}"
        if self.oracle is not None:
            if self.lower is not None and self.lower > self.oracle + slack:
                return f"delta={self.delta:.6g}: lower {self.lower:.6g} > oracle {self.oracle:.6g}"
            if self.upper is not None and self.oracle > self.upper + slack:
                return f"delta={self.delta:.6g}: oracle {self.oracle:.6g} > upper {self.upper:.6g}"
        return None


@dataclass
class ScalingReport:
    """Sweep result: records, fitted exponents, sandwich constants."""

    config: SweepConfig
    records: list
    exponent_lower: Optional[tuple] = None   # (slope, r2)
    exponent_upper: Optional[tuple] = None
    sandwich: Optional[dict] = None
    type_estimate: Optional[LineTypeEstimate] = None
    diagnostics: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    schema: str = SCHEMA_VERSION


def fit_exponent(records: Sequence[BoundRecord], fieldname: str) -> tuple[float, float]:
    """OLS slope and R^2 of log(field) against log(delta) over the records."""
    pairs = [(r.delta, getattr(r, fieldname)) for r in records
             if getattr(r, fieldname) is not None]
    if len({d for d, _ in pairs}) < 2:
        raise DegenerateFit(f"fewer than 2 distinct deltas carry {fieldname!r}")
    x = np.array([d for d, _ in pairs])
    y = np.array([v for _, v in pairs])
    return fit_loglog(x, y)


def sandwich_constants(records: Sequence[BoundRecord], m: int) -> tuple[float, float]:
    """c = min lower * delta^{1/m}, C = max upper * delta^{1/m} over records."""
    if not records:
        raise ConfigInvalid("no records")
    if m < 1:
        raise ConfigInvalid("m must be at least 1")
    lows = [r.lower * r.delta ** (1.0 / m) for r in records if r.lower is not None]
    highs = [r.upper * r.delta ** (1.0 / m) for r in records if r.upper is not None]
    c = min(lows) if lows else 0.0
    C = max(highs) if highs else np.inf
    return float(c), float(C)


def resolve_point(domain: ConvexDomain, spec: str) -> np.ndarray:
    if spec == "north":
        return corpus.north_anchor(domain)
    vec = corpus._parse_complex_vector(spec)
    if vec.shape != (domain.n,):
        raise ConfigInvalid(f"boundary point needs {domain.n} complex entries")
    return vec


def resolve_direction(domain: ConvexDomain, frame, spec: str):
    """Returns (kind, unit direction) with kind in {"normal", "tangent"}."""
    if spec == "normal":
        return "normal", frame.nu.xi
    if spec.startswith("tangent:"):
        try:
            j = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigInvalid(f"bad tangent index in {spec!r}") from exc
        if not (1 <= j <= domain.n):
            raise ConfigInvalid(f"tangent index must be in 1..{domain.n}")
        e = np.zeros(domain.n, dtype=complex)
        e[j - 1] = 1.0
        return "tangent", complex_tangent_project(frame.nu, e).xi
    vec = corpus._parse_complex_vector(spec)
    if vec.shape != (domain.n,):
        raise ConfigInvalid(f"direction needs {domain.n} complex entries")
    tang = vec - np.vdot(frame.nu.xi, vec) * frame.nu.xi
    if np.linalg.norm(tang) < 1e-8 * np.linalg.norm(vec):
        return "normal", frame.nu.xi
    return "tangent", complex_tangent_project(frame.nu, vec).xi


def sweep(config: SweepConfig, domain: Optional[ConvexDomain] = None) -> ScalingReport:
    """Run the sweep; per-delta failures become diagnostics, not aborts.

    Each record gets an independent seed derived from the configuration
    seed by index, so the report is deterministic and the per-delta
    computations are order-independent (they share no mutable state and may
    be distributed across threads without changing the output).
    """
    domain = domain or corpus.parse_domain(config.domain_id)
    report = ScalingReport(config=config, records=[])

    P = resolve_point(domain, config.boundary_point)
    frame = normalize_frame(domain, P)
    kind, direction = resolve_direction(domain, frame, config.direction)

    rng = np.random.default_rng(config.seed)
    convexity_violations = domain.midpoint_convexity_violations(rng, pairs=1000)
    if convexity_violations:
        report.violations.append(
            f"midpoint convexity failed at {convexity_violations}/1000 sampled pairs")

    if kind == "normal":
        m_used = 1
        report.type_estimate = None
    else:
        report.type_estimate = line_type(domain, frame.P, direction,
                                         order_cap=config.order_cap)
        m_used = report.type_estimate.m
        report.diagnostics.extend(report.type_estimate.warnings)

    seeds = np.random.SeedSequence(config.seed).generate_state(config.count)
    for idx, delta in enumerate(config.delta_grid()):
        try:
            record = compute_record(domain, frame, kind, direction, float(delta),
                                    m_used, config, int(seeds[idx]))
        except CxMetricError as exc:
            report.diagnostics.append(f"delta={delta:.6g}: {type(exc).__name__}: {exc}")
            continue
        violation = record.crossing_violation()
        if violation:
            report.violations.append(violation)
        report.records.append(record)

    radii = [r.R_xi for r in report.records if r.R_xi is not None]
    if any(b < a - 1e-12 for a, b in zip(radii, radii[1:])):
        report.violations.append("section radius is not nondecreasing in delta")

    try:
        report.exponent_lower = fit_exponent(report.records, "lower")
    except DegenerateFit:
        pass
    try:
        report.exponent_upper = fit_exponent(report.records, "upper")
    except DegenerateFit:
        pass
    for name, fit in (("lower", report.exponent_lower), ("upper", report.exponent_upper)):
        if fit is not None and fit[1] < 0.99:
            report.diagnostics.append(f"{name} exponent fit has R^2 = {fit[1]:.4f} < 0.99")

    if report.records:
        c, C = sandwich_constants(report.records, m_used)
        ratio = C / c if c > 0 else np.inf
        report.sandwich = {"c": c, "C": C, "ratio": ratio, "m": m_used}
        if c <= 0:
            report.violations.append("sandwich lower constant is not positive")
        scaled = [r.upper * r.delta ** (1.0 / m_used) for r in report.records
                  if r.upper is not None]
        d = np.diff(scaled)
        if len(d) and not ((d >= -1e-9).all() or (d <= 1e-9).all()):
            report.diagnostics.append(
                "sandwich ratio is non-monotone across the grid; the upper end "
                "may lie outside the asymptotic regime")
    return report


def compute_record(domain, frame, kind, direction, delta, m_used, config,
                   seed) -> BoundRecord:
    """Bounds and diagnostics for one delta; pure given its seed."""
    p_delta = base_point(frame.P, frame.nu, delta, domain)
    lower = upper = oracle = theta_star = R_xi = grad = None

    if kind == "normal":
        R_xi = boundary_radius(domain, p_delta, direction, 0.0)
        theta_star = 0.0
        if "sibony" in config.methods:
            lower = sibony_lower_bound(normal_candidate(frame, delta), direction)
    else:
        contact = max_radius(domain, p_delta, direction,
                             theta_samples=config.theta_samples)
        R_xi, theta_star = contact.R, contact.theta_star
        grad = gradient_ratio(domain, contact, delta, m_used)
        if "sibony" in config.methods:
            cand = tangential_candidate(domain, frame, direction, delta,
                                        seed=seed, theta_samples=config.theta_samples)
            lower = sibony_lower_bound(cand, direction)

    if "disc" in config.methods:
        upper = affine_disc_bound(domain, p_delta, direction, config.theta_samples)
    if "recentered" in config.methods:
        rec = recentered_disc_bound(domain, p_delta, direction, frame.nu.xi)
        upper = rec if upper is None else min(upper, rec)
    if "oracle" in config.methods and domain.oracle is not None:
        oracle = float(domain.oracle(p_delta, direction))

    return BoundRecord(delta=delta, lower=lower, upper=upper, oracle=oracle,
                       m_used=m_used, theta_star=theta_star, R_xi=R_xi,
                       grad_ratio=grad)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def report_to_csv(report: ScalingReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in report.records:
        lines.append(",".join(_csv_cell(getattr(r, col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def report_to_json(report: ScalingReport) -> str:
    cfg = report.config
    doc = {
        "schema": report.schema,
        "config": {
            "domain_id": cfg.domain_id,
            "boundary_point": cfg.boundary_point,
            "direction": cfg.direction,
            "delta_min": cfg.delta_min,
            "delta_max": cfg.delta_max,
            "count": cfg.count,
            "methods": list(cfg.methods),
            "seed": cfg.seed,
            "theta_samples": cfg.theta_samples,
            "order_cap": cfg.order_cap,
        },
        "records": [
            {col: _jsonable(getattr(r, col)) for col in CSV_COLUMNS}
            for r in report.records
        ],
        "exponent_lower": _jsonable(report.exponent_lower),
        "exponent_upper": _jsonable(report.exponent_upper),
        "sandwich": _jsonable(report.sandwich),
        "type_estimate": None if report.type_estimate is None else {
            "m": report.type_estimate.m,
            "method": report.type_estimate.method,
            "coefficient_table": _jsonable(report.type_estimate.coefficient_table),
            "fit_r2": _jsonable(report.type_estimate.fit_r2),
            "warnings": list(report.type_estimate.warnings),
        },
        "diagnostics": list(report.diagnostics),
        "violations": list(report.violations),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
