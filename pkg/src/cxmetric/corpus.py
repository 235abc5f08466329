"""Domain corpus: identifier grammar, JSON loading, derived transforms.

Identifier grammar (used by the CLI and tests):

* ``ball:n``               unit ball sum |z_j|^2 - 1 in C^n
* ``cxellipsoid:m1,...,mn``  complex ellipsoid sum |z_j|^{2 m_j} - 1
* ``shifted:<id>:<offset>``  translate by a complex offset vector
* ``rotated:<id>:<seed>``    apply a seeded random unitary
* a path ending in ``.json`` loads a custom polynomial domain

The JSON schema is ``{"n": int, "rho": [{"coeff": real, "powers":
[[p_j, q_j], ...]}], "bounding_box": [[lo, hi], ...] (optional)}`` where a
term means coeff * prod z_j^{p_j} conj(z_j)^{q_j}; terms must be closed
under conjugation so rho is real.
"""

from __future__ import annotations

import json
import os
from typing import Optional, Sequence

import numpy as np

from .discs import ball_metric_oracle
from .domains import (
    ConvexDomain,
    PolynomialDefiningFunction,
    TransformedDefiningFunction,
    as_points,
)
from .errors import ConfigInvalid

BOX_MARGIN = 0.1


def _symmetric_box(n: int, extent: float) -> np.ndarray:
    return np.tile([-extent, extent], (2 * n, 1)).astype(float)


def make_ball(n: int, radius: float = 1.0) -> ConvexDomain:
    """Unit ball (or a centered ball of the given radius)."""
    coeffs = [1.0] * n + [-(radius ** 2)]
    powers = []
    for j in range(n):
        pw = [[0, 0]] * n
        pw[j] = [1, 1]
        powers.append(pw)
    powers.append([[0, 0]] * n)
    rho = PolynomialDefiningFunction(n, coeffs, powers, name=f"ball:{n}")
    oracle = None
    if radius == 1.0:
        def oracle(z, xi):
            return ball_metric_oracle(z, xi)
    return ConvexDomain(rho=rho, bounding_box=_symmetric_box(n, radius + BOX_MARGIN),
                        ident=f"ball:{n}", oracle=oracle)


def make_cxellipsoid(exponents: Sequence[int]) -> ConvexDomain:
    """Complex ellipsoid sum_j |z_j|^{2 m_j} - 1."""
    ms = [int(m) for m in exponents]
    if any(m < 1 for m in ms):
        raise ConfigInvalid("cxellipsoid exponents must be positive integers")
    n = len(ms)
    coeffs = [1.0] * n + [-1.0]
    powers = []
    for j, m in enumerate(ms):
        pw = [[0, 0]] * n
        pw[j] = [m, m]
        powers.append(pw)
    powers.append([[0, 0]] * n)
    ident = "cxellipsoid:" + ",".join(str(m) for m in ms)
    rho = PolynomialDefiningFunction(n, coeffs, powers, name=ident)
    oracle = ball_metric_oracle if all(m == 1 for m in ms) else None
    return ConvexDomain(rho=rho, bounding_box=_symmetric_box(n, 1.0 + BOX_MARGIN),
                        ident=ident, oracle=oracle)


def transformed_domain(base: ConvexDomain, U: np.ndarray, shift=None,
                       ident: Optional[str] = None) -> ConvexDomain:
    """Image domain U * Omega + shift for a unitary U and complex shift.

    The defining function pulls back exactly (rho'(z) = rho(U^H (z - c)))
    and, when the base has a metric oracle, the oracle composes with the
    inverse map, preserving two-sided testability.
    """
    n = base.n
    U = np.asarray(U, dtype=complex)
    c = np.zeros(n, dtype=complex) if shift is None else as_points(shift)
    A = U.conj().T
    b = -A @ c
    rho = TransformedDefiningFunction(base.rho, A, b, name=ident or f"map({base.rho.name})")
    extent = float(np.max(np.abs(base.bounding_box))) * np.sqrt(2 * n)
    extent += float(np.max(np.abs(np.concatenate([c.real, c.imag])), initial=0.0))
    oracle = None
    if base.oracle is not None:
        base_oracle = base.oracle

        def oracle(z, xi):
            z = as_points(z)
            return base_oracle(A @ z + b, A @ np.asarray(xi, dtype=complex))
    return ConvexDomain(rho=rho, bounding_box=_symmetric_box(n, extent),
                        sample_budget=base.sample_budget,
                        ident=ident or (base.ident and f"map:{base.ident}"),
                        oracle=oracle)


def shifted_domain(base: ConvexDomain, offset) -> ConvexDomain:
    offset = as_points(offset)
    if offset.shape != (base.n,):
        raise ConfigInvalid(f"offset must have {base.n} complex entries")
    return transformed_domain(base, np.eye(base.n, dtype=complex), offset,
                              ident=f"shifted:{base.ident}")


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Seeded Haar-ish unitary via QR of a complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def rotated_domain(base: ConvexDomain, seed: int) -> ConvexDomain:
    return transformed_domain(base, random_unitary(base.n, seed),
                              ident=f"rotated:{base.ident}:{seed}")


def _parse_complex_vector(text: str) -> np.ndarray:
    try:
        return np.asarray([complex(tok.strip().replace(" ", ""))
                           for tok in text.split(",")], dtype=complex)
    except ValueError as exc:
        raise ConfigInvalid(f"cannot parse complex vector {text!r}: {exc}") from exc


def load_json_domain(path: str) -> ConvexDomain:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        n = int(doc["n"])
        terms = doc["rho"]
        coeffs = [float(t["coeff"]) for t in terms]
        powers = [t["powers"] for t in terms]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"malformed domain document {path!r}: {exc}") from exc
    rho = PolynomialDefiningFunction(n, coeffs, powers,
                                     name=doc.get("name", os.path.basename(path)))
    if "bounding_box" in doc:
        box = np.asarray(doc["bounding_box"], dtype=float)
    else:
        box = _symmetric_box(n, 2.0)
    return ConvexDomain(rho=rho, bounding_box=box, ident=doc.get("name", path))


def parse_domain(spec: str) -> ConvexDomain:
    """Resolve a corpus identifier or JSON path to a ConvexDomain."""
    if spec.endswith(".json"):
        if not os.path.exists(spec):
            raise ConfigInvalid(f"domain file not found: {spec}")
        return load_json_domain(spec)
    kind, _, rest = spec.partition(":")
    if kind == "ball":
        try:
            return make_ball(int(rest))
        except ValueError as exc:
            raise ConfigInvalid(f"bad ball dimension {rest!r}") from exc
    if kind == "cxellipsoid":
        try:
            return make_cxellipsoid([int(tok) for tok in rest.split(",")])
        except ValueError as exc:
            raise ConfigInvalid(f"bad cxellipsoid exponents {rest!r}") from exc
    if kind == "shifted":
        inner, _, offset = rest.rpartition(":")
        if not inner:
            raise ConfigInvalid(f"malformed shifted identifier {spec!r}")
        return shifted_domain(parse_domain(inner), _parse_complex_vector(offset))
    if kind == "rotated":
        inner, _, seed = rest.rpartition(":")
        if not inner:
            raise ConfigInvalid(f"malformed rotated identifier {spec!r}")
        try:
            return rotated_domain(parse_domain(inner), int(seed))
        except ValueError as exc:
            raise ConfigInvalid(f"bad rotation seed {seed!r}") from exc
    raise ConfigInvalid(f"unknown domain identifier {spec!r}")


def north_anchor(domain: ConvexDomain) -> np.ndarray:
    """Intersection of the positive last real axis with the boundary.

    Requires the origin to be interior; the crossing is then unique by
    convexity and found by bisection.
    """
    n = domain.n
    origin = np.zeros(n, dtype=complex)
    if float(domain.evaluate(origin)) >= 0:
        raise ConfigInvalid("north anchor needs the origin inside the domain")
    e_n = np.zeros(n, dtype=complex)
    e_n[-1] = 1.0
    lo, hi = 0.0, float(np.max(np.abs(domain.bounding_box)))
    if float(domain.evaluate(hi * e_n)) <= 0:
        raise ConfigInvalid("bounding box does not contain the north crossing")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(domain.evaluate(mid * e_n)) < 0:
            lo = mid
        else:
            hi = mid
    return lo * e_n
