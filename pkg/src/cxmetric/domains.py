"""Smoothly bounded convex domains in C^n and their boundary geometry.

A domain is given by a defining function rho with Omega = {rho < 0}. All
evaluators are vectorized: points are complex arrays of shape (..., n) and
values come back with shape (...,). Wirtinger derivatives follow the usual
convention d/dz = (d/dx - i d/dy)/2, so for real-valued rho the outward
normal is conj(grad)/|grad| viewed as a vector in C^n.

Everything here is immutable after construction and free of hidden state;
operations are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigInvalid,
    GradientVanishes,
    NotOnBoundary,
    OutsideDomain,
    ZeroProjection,
)

Array = np.ndarray

#: relative step for central-difference Wirtinger gradients
FD_STEP = 1e-5
#: |rho(P)| tolerance for "P is on the boundary"
BOUNDARY_TOL = 1e-8
#: gradient norm below which the boundary is considered degenerate
GRAD_FLOOR = 1e-10


def as_points(z) -> Array:
    return np.asarray(z, dtype=complex)


def finite_difference_wirtinger(fn: Callable[[Array], Array], z: Array,
                                step: float = FD_STEP) -> Array:
    """Central-difference Wirtinger gradient of a real-valued function.

    Uses h = step * (1 + |z|) per point, balancing truncation and roundoff
    at double precision. Supports batched z of shape (..., n).
    """
    z = as_points(z)
    n = z.shape[-1]
    h = step * (1.0 + np.linalg.norm(z, axis=-1))  # shape (...)
    grad = np.empty(z.shape, dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        hj = h[..., None] if z.ndim > 1 else h
        dx = (fn(z + hj * e) - fn(z - hj * e)) / (2.0 * h)
        dy = (fn(z + 1j * hj * e) - fn(z - 1j * hj * e)) / (2.0 * h)
        grad[..., j] = 0.5 * (dx - 1j * dy)
    return grad


class DefiningFunction:
    """Evaluator for rho with its Wirtinger first derivatives.

    If no analytic gradient is supplied, central finite differences are
    used. Corpus domains always ship analytic gradients so that downstream
    oracles are clean.
    """

    def __init__(self, n: int, evaluate: Callable[[Array], Array],
                 wirtinger_grad: Optional[Callable[[Array], Array]] = None,
                 name: str = ""):
        if n < 1:
            raise ConfigInvalid("dimension must be a positive integer")
        self.n = int(n)
        self.name = name
        self._evaluate = evaluate
        self._grad = wirtinger_grad

    @property
    def has_analytic_grad(self) -> bool:
        return self._grad is not None

    def evaluate(self, z) -> Array:
        z = as_points(z)
        return np.asarray(self._evaluate(z), dtype=float)

    def wirtinger_grad(self, z) -> Array:
        z = as_points(z)
        if self._grad is None:
            return finite_difference_wirtinger(self.evaluate, z)
        return np.asarray(self._grad(z), dtype=complex)

    def line_coeffs(self, P, xi, max_total: Optional[int] = None) -> Optional[Array]:
        """Exact coefficients of t -> rho(P + t*xi) in (t, conj t), if available.

        Returns a complex matrix C with C[a, b] the coefficient of
        t^a * conj(t)^b, or None when rho is not given in polynomial form.
        """
        return None


class PolynomialDefiningFunction(DefiningFunction):
    """rho given as a real polynomial sum_t c_t * prod_j z_j^p_tj conj(z_j)^q_tj.

    Terms must be closed under conjugation (swapping p and q) with equal real
    coefficients, so the sum is real-valued. This representation allows exact
    line restrictions, which removes all numerical ambiguity from line-type
    computations on the corpus.
    """

    def __init__(self, n: int, coeffs: Sequence[float], powers, name: str = ""):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.powers = np.asarray(powers, dtype=int)  # (terms, n, 2)
        if self.powers.ndim != 3 or self.powers.shape[1] != n or self.powers.shape[2] != 2:
            raise ConfigInvalid("powers must have shape (terms, n, 2)")
        if (self.powers < 0).any():
            raise ConfigInvalid("polynomial powers must be nonnegative")
        self._check_reality()
        super().__init__(n, self._eval_terms, self._grad_terms, name=name)

    def _check_reality(self):
        # every term must have a conjugate partner with the same coefficient
        keys = {}
        for c, pw in zip(self.coeffs, self.powers):
            keys[tuple(map(tuple, pw))] = keys.get(tuple(map(tuple, pw)), 0.0) + c
        for key, c in keys.items():
            swapped = tuple((q, p) for (p, q) in key)
            if abs(keys.get(swapped, 0.0) - c) > 1e-12 * max(1.0, abs(c)):
                raise ConfigInvalid(
                    "polynomial terms are not closed under conjugation")

    def _eval_terms(self, z: Array) -> Array:
        zc = np.conj(z)
        total = np.zeros(z.shape[:-1], dtype=complex)
        for c, pw in zip(self.coeffs, self.powers):
            total = total + c * np.prod(z ** pw[:, 0] * zc ** pw[:, 1], axis=-1)
        return total.real

    def _grad_terms(self, z: Array) -> Array:
        zc = np.conj(z)
        grad = np.zeros(z.shape, dtype=complex)
        for c, pw in zip(self.coeffs, self.powers):
            for j in range(self.n):
                p = pw[j, 0]
                if p == 0:
                    continue
                factor = c * p * z[..., j] ** (p - 1) * zc[..., j] ** pw[j, 1]
                for k in range(self.n):
                    if k == j:
                        continue
                    factor = factor * z[..., k] ** pw[k, 0] * zc[..., k] ** pw[k, 1]
                grad[..., j] += factor
        return grad

    def line_coeffs(self, P, xi, max_total: Optional[int] = None) -> Array:
        P = as_points(P)
        xi = as_points(xi)
        dz = int(self.powers[:, :, 0].sum(axis=1).max(initial=0))
        dq = int(self.powers[:, :, 1].sum(axis=1).max(initial=0))
        C = np.zeros((dz + 1, dq + 1), dtype=complex)
        for c, pw in zip(self.coeffs, self.powers):
            az = np.array([1.0 + 0j])
            ab = np.array([1.0 + 0j])
            for j in range(self.n):
                az = np.convolve(az, _binom_poly(P[j], xi[j], pw[j, 0]))
                ab = np.convolve(ab, _binom_poly(np.conj(P[j]), np.conj(xi[j]), pw[j, 1]))
            C[: len(az), : len(ab)] += c * np.outer(az, ab)
        return C


def _binom_poly(base: complex, step: complex, p: int) -> Array:
    """Coefficients of (base + step*t)^p as a polynomial in t."""
    return np.array([math.comb(p, k) * base ** (p - k) * step ** k
                     for k in range(p + 1)], dtype=complex)


class TransformedDefiningFunction(DefiningFunction):
    """rho'(z) = base(A z + b) for an affine change of variables.

    Used for shifted/rotated corpus domains and for affine-unitary
    invariance checks. Exact line restrictions delegate to the base with the
    transformed point and direction, so polynomial exactness survives.
    """

    def __init__(self, base: DefiningFunction, A: Array, b: Array, name: str = ""):
        self.base = base
        self.A = np.asarray(A, dtype=complex)
        self.b = np.asarray(b, dtype=complex)
        super().__init__(base.n, self._eval, self._grad if base.has_analytic_grad else None,
                         name=name or base.name)

    def _map(self, z: Array) -> Array:
        return z @ self.A.T + self.b

    def _eval(self, z: Array) -> Array:
        return self.base.evaluate(self._map(z))

    def _grad(self, z: Array) -> Array:
        # d/dz_j base(Az+b) = sum_k g_k(Az+b) A_kj
        return self.base.wirtinger_grad(self._map(z)) @ self.A

    def line_coeffs(self, P, xi, max_total: Optional[int] = None) -> Optional[Array]:
        P = as_points(P)
        xi = as_points(xi)
        return self.base.line_coeffs(self.A @ P + self.b, self.A @ xi, max_total)


@dataclass(frozen=True)
class ComplexDirection:
    """A direction vector in C^n with its Euclidean norm."""

    xi: Array

    def __post_init__(self):
        object.__setattr__(self, "xi", as_points(self.xi))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def is_unit(self) -> bool:
        return abs(self.norm - 1.0) <= 1e-12

    def unit(self) -> "ComplexDirection":
        nrm = self.norm
        if nrm <= 0.0:
            raise ZeroProjection("cannot normalize a zero direction")
        return ComplexDirection(self.xi / nrm)


def _dir_array(xi) -> Array:
    if isinstance(xi, ComplexDirection):
        return xi.xi
    return as_points(xi)


@dataclass(frozen=True)
class ConvexDomain:
    """A bounded convex domain {rho < 0} with a real bounding box.

    bounding_box has shape (2n, 2): one [lo, hi] interval per real
    coordinate in the order (x_1, y_1, ..., x_n, y_n). Convexity is not
    proven, only sampled; `midpoint_convexity_violations` reports how many
    random midpoints escape the domain.
    """

    rho: DefiningFunction
    bounding_box: Array
    sample_budget: int = 10_000
    ident: Optional[str] = None
    oracle: Optional[Callable[[Array, Array], float]] = field(default=None, repr=False)

    def __post_init__(self):
        box = np.asarray(self.bounding_box, dtype=float)
        if box.shape != (2 * self.rho.n, 2):
            raise ConfigInvalid("bounding_box must have shape (2n, 2)")
        object.__setattr__(self, "bounding_box", box)

    @property
    def n(self) -> int:
        return self.rho.n

    def evaluate(self, z) -> Array:
        return self.rho.evaluate(z)

    def contains(self, z) -> Array:
        return self.evaluate(z) < 0.0

    def diameter(self) -> float:
        widths = self.bounding_box[:, 1] - self.bounding_box[:, 0]
        return float(np.linalg.norm(widths))

    def _reals_to_points(self, x: Array) -> Array:
        return x[..., 0::2] + 1j * x[..., 1::2]

    def box_samples(self, rng: np.random.Generator, count: int) -> Array:
        lo = self.bounding_box[:, 0]
        hi = self.bounding_box[:, 1]
        x = rng.uniform(lo, hi, size=(count, 2 * self.n))
        return self._reals_to_points(x)

    def interior_samples(self, rng: np.random.Generator, count: int) -> Array:
        """Rejection sampling of the interior, uniform on the domain."""
        out = []
        have = 0
        for _ in range(200):
            z = self.box_samples(rng, max(4 * count, 256))
            z = z[self.contains(z)]
            if len(z):
                out.append(z)
                have += len(z)
            if have >= count:
                break
        else:
            raise ConfigInvalid("interior rejection sampling failed; check the bounding box")
        return np.concatenate(out)[:count]

    def midpoint_convexity_violations(self, rng: np.random.Generator,
                                      pairs: int = 10_000, tol: float = 1e-12) -> int:
        z = self.interior_samples(rng, pairs)
        w = self.interior_samples(rng, pairs)
        mids = 0.5 * (z + w)
        return int(np.count_nonzero(self.evaluate(mids) >= tol))

    def boundedness_ok(self) -> bool:
        """rho > 0 at the 2*(2n) face centers of the bounding box scaled by 2."""
        center = self.bounding_box.mean(axis=1)
        half = 0.5 * (self.bounding_box[:, 1] - self.bounding_box[:, 0])
        for k in range(2 * self.n):
            for sign in (-1.0, 1.0):
                x = center.copy()
                x[k] += sign * 2.0 * half[k]
                if self.evaluate(self._reals_to_points(x)) <= 0:
                    return False
        return True


@dataclass(frozen=True)
class BoundaryFrame:
    """Boundary point P, outward unit normal nu, and a unitary frame.

    The frame coordinates are w = U (z - P) with U nu = e_n, so the domain
    sits in {Re w_n < 0} and rho o from_frame(w) = c_lin * Re w_n + O(|w|^2)
    with c_lin = 2 |grad rho(P)| > 0.
    """

    P: Array
    nu: ComplexDirection
    U: Array
    c_lin: float

    @property
    def n(self) -> int:
        return len(self.P)

    @property
    def V(self) -> Array:
        """Inverse frame matrix (columns are the frame basis, last is nu)."""
        return self.U.conj().T

    def to_frame(self, z) -> Array:
        return (as_points(z) - self.P) @ self.U.T

    def from_frame(self, w) -> Array:
        return as_points(w) @ self.V.T + self.P

    def map_direction(self, xi) -> Array:
        return _dir_array(xi) @ self.U.T

    def base_point(self, delta: float) -> Array:
        return self.P - delta * self.nu.xi


def _unitary_completion(first_columns: Array) -> Array:
    """Unitary matrix whose leading columns are the given orthonormal set.

    Completion by modified Gram-Schmidt against the best-aligned coordinate
    vectors; deterministic for a given input.
    """
    cols = [np.asarray(c, dtype=complex) for c in first_columns]
    n = len(cols[0])
    used = set()
    basis = list(cols)
    # pick coordinate vectors least aligned with the span, largest residual first
    while len(basis) < n:
        best = None
        best_norm = -1.0
        for k in range(n):
            if k in used:
                continue
            v = np.zeros(n, dtype=complex)
            v[k] = 1.0
            for b in basis:
                v = v - np.vdot(b, v) * b
            nrm = np.linalg.norm(v)
            if nrm > best_norm:
                best_norm = nrm
                best = (k, v / nrm)
        used.add(best[0])
        # re-orthogonalize once for numerical hygiene
        v = best[1]
        for b in basis:
            v = v - np.vdot(b, v) * b
        basis.append(v / np.linalg.norm(v))
    return np.column_stack(basis)


def outward_normal(domain: ConvexDomain, P) -> ComplexDirection:
    """Unit outward normal conj(grad rho)/|grad rho| at a boundary point."""
    P = as_points(P)
    if abs(float(domain.evaluate(P))) > BOUNDARY_TOL:
        raise NotOnBoundary(f"|rho(P)| = {abs(float(domain.evaluate(P))):.3e} > {BOUNDARY_TOL}")
    g = domain.rho.wirtinger_grad(P)
    ng = float(np.linalg.norm(g))
    if ng < GRAD_FLOOR:
        raise GradientVanishes(f"|grad rho(P)| = {ng:.3e}")
    return ComplexDirection(np.conj(g) / ng)


def base_point(P, nu, delta: float, domain: Optional[ConvexDomain] = None) -> Array:
    """P_delta = P - delta * nu; checks interiority when a domain is given."""
    if delta <= 0:
        raise ConfigInvalid("delta must be positive")
    P = as_points(P)
    p_delta = P - delta * _dir_array(nu)
    if domain is not None and float(domain.evaluate(p_delta)) >= 0:
        raise OutsideDomain(f"rho(P - {delta} nu) = {float(domain.evaluate(p_delta)):.3e} >= 0")
    return p_delta


def normalize_frame(domain: ConvexDomain, P) -> BoundaryFrame:
    """Build the unitary boundary frame at P, after one Newton correction.

    The correction moves P along nu so that rho(P) = 0 to roughly machine
    precision; downstream radius computations assume an exact boundary point.
    """
    P = as_points(P).copy()
    r0 = float(domain.evaluate(P))
    if abs(r0) > BOUNDARY_TOL:
        raise NotOnBoundary(f"|rho(P)| = {abs(r0):.3e} > {BOUNDARY_TOL}")
    g = domain.rho.wirtinger_grad(P)
    ng = float(np.linalg.norm(g))
    if ng < GRAD_FLOOR:
        raise GradientVanishes(f"|grad rho(P)| = {ng:.3e}")
    nu = np.conj(g) / ng
    # one Newton step: d rho / dt along nu equals 2 |grad|
    P = P - (r0 / (2.0 * ng)) * nu
    g = domain.rho.wirtinger_grad(P)
    ng = float(np.linalg.norm(g))
    if ng < GRAD_FLOOR:
        raise GradientVanishes(f"|grad rho(P)| = {ng:.3e} after Newton correction")
    nu = np.conj(g) / ng
    V = _unitary_completion([nu])
    # put nu last so the normal maps to e_n
    V = np.column_stack([V[:, 1:], V[:, 0]])
    U = V.conj().T
    return BoundaryFrame(P=P, nu=ComplexDirection(nu), U=U, c_lin=2.0 * ng)


def align_frame(frame: BoundaryFrame, xi, theta_star: float) -> BoundaryFrame:
    """Rotate the tangential block so e^{i theta*} xi maps to e_1.

    After alignment the contact point of a maximal-radius probe sits on the
    positive Re w_1 axis, which is the normalization the tangential
    candidate construction assumes.
    """
    n = frame.n
    if n < 2:
        raise ConfigInvalid("tangential alignment needs n >= 2")
    eta = frame.map_direction(xi)
    if abs(eta[-1]) > 1e-10:
        raise ZeroProjection("direction is not complex-tangential in this frame")
    eta_t = np.exp(1j * theta_star) * eta[:-1]
    eta_t = eta_t / np.linalg.norm(eta_t)
    W = _unitary_completion([eta_t]).conj().T  # maps eta_t to e_1
    U_new = frame.U.copy()
    U_new[:-1, :] = W @ frame.U[:-1, :]
    return BoundaryFrame(P=frame.P, nu=frame.nu, U=U_new, c_lin=frame.c_lin)


def complex_tangent_project(nu, xi, unit: bool = True) -> ComplexDirection:
    """Hermitian projection of xi onto the complex tangent space at nu.

    Returns xi - <xi, nu> nu, renormalized to a unit vector by default.
    Raises ZeroProjection when xi is parallel to the complex normal.
    """
    nu = _dir_array(nu)
    xi = _dir_array(xi)
    t = xi - np.vdot(nu, xi) * nu
    nrm = float(np.linalg.norm(t))
    if nrm < 1e-12:
        raise ZeroProjection("direction is parallel to the complex normal")
    return ComplexDirection(t / nrm if unit else t)


def contains(domain: ConvexDomain, z) -> bool:
    return bool(domain.contains(z))


def evaluate(domain: ConvexDomain, z) -> float:
    return float(domain.evaluate(z))
