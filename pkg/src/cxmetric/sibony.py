"""Lower bounds for the invariant metric from explicit candidate functions.

The Sibony construction certifies F(P_delta, xi) >= sqrt of the Levi form at
P_delta of any admissible u: C^2 near the base, u(base) = 0, 0 <= u <= 1 on
the domain, log u plurisubharmonic. Two families are built here.

Normal direction: u = (1/9) |(w_n + delta)/(w_n - delta)|^2 in frame
coordinates. Convexity puts the domain in {Re w_n < 0}, making the inner
ratio holomorphic; the Levi form at the base along the normal is exactly
1/(36 delta^2), hence the bound 1/(6 delta).

Tangential direction: with Q the farthest section boundary point and g the
frame gradient of rho at Q, the affine functional f = (1/delta) (sum_{j<n}
g_j w_j + g_n (w_n + delta)) vanishes at the base and satisfies Re f <= Re
f(Q) on the domain (supporting hyperplane at Q). The candidate is |F|^2 / M
with F = e^f - 1 (or its truncated power sum), normalized by a sampled sup
M. Its Levi form at the base along the probe direction is |g_1|^2 /
(delta^2 M), which scales like delta^{-2/m}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .domains import (
    BoundaryFrame,
    ComplexDirection,
    ConvexDomain,
    _dir_array,
    align_frame,
    as_points,
    complex_tangent_project,
)
from .errors import (
    ConfigInvalid,
    FrameMisaligned,
    NegativeLevi,
    NormalizationUnstable,
)
from .lines import ContactPoint, max_radius, ray_radii

#: headroom applied to the sampled sup when normalizing candidates
SUP_HEADROOM = 1.05
#: largest allowed truncation order for the power-sum variant
N_CAP = 512


@dataclass
class ScalarCandidate:
    """An admissible function u with its base point and Levi evaluator.

    evaluate accepts (..., n) complex arrays. levi_at_base(xi) returns the
    Levi form of u at the base point along xi, computed analytically from
    the construction. holo, when present, is the holomorphic core H with
    u = |H|^2 (normalization folded in); verification exploits it because
    log |H|^2 is plurisubharmonic wherever H is holomorphic.
    """

    base_point: np.ndarray
    evaluate: Callable[[np.ndarray], np.ndarray]
    levi_at_base: Callable[[np.ndarray], float]
    provenance: str  # normal_rational | tangential_exp | tangential_truncated | user
    holo: Optional[Callable[[np.ndarray], np.ndarray]] = None
    deriv_scale: float = 1.0
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LinearFunctional:
    """Affine functional f(z) = <alpha, z - P> + const built from a contact point."""

    frame: BoundaryFrame
    coeffs: np.ndarray          # frame-coordinate coefficients a_j
    const: complex
    alpha: np.ndarray           # composite original-coordinate coefficients U^T a

    def __call__(self, z) -> np.ndarray:
        z = as_points(z)
        return (z - self.frame.P) @ self.alpha + self.const

    def derivative_along(self, xi) -> complex:
        return complex(np.sum(self.alpha * _dir_array(xi)))


@dataclass
class TangentialCandidateParams:
    """Construction record of a tangential candidate."""

    frame: BoundaryFrame
    contact: ContactPoint
    delta: float
    N: int                      # 0 sentinel means the exponential closed form
    M: float
    f: LinearFunctional
    sup_abs_f: float
    diagnostics: tuple = ()


def normal_candidate(frame: BoundaryFrame, delta: float) -> ScalarCandidate:
    """Rational normal-direction candidate with Levi form 1/(36 delta^2).

    u(z) = (1/9) |(w_n + delta)/(w_n - delta)|^2 where w_n is the last frame
    coordinate of z. The bound it certifies along the unit normal is exactly
    1/(6 delta), independent of the domain.
    """
    if delta <= 0:
        raise ConfigInvalid("delta must be positive")
    nu = frame.nu.xi
    P = frame.P
    base = frame.base_point(delta)

    def w_n(z):
        return (as_points(z) - P) @ np.conj(nu)

    def holo(z):
        w = w_n(z)
        return (w + delta) / (3.0 * (w - delta))

    def evaluate(z):
        h = holo(z)
        return (h * np.conj(h)).real

    def levi_at_base(xi):
        comp = complex(np.vdot(nu, _dir_array(xi)))
        return abs(comp) ** 2 / (36.0 * delta ** 2)

    return ScalarCandidate(
        base_point=base, evaluate=evaluate, levi_at_base=levi_at_base,
        provenance="normal_rational", holo=holo, deriv_scale=1.0 / delta,
        params={"delta": delta, "P": P.tolist(), "nu": nu.tolist()})


def linear_functional(domain: ConvexDomain, frame: BoundaryFrame,
                      contact: ContactPoint, delta: float) -> LinearFunctional:
    """Affine functional vanishing at P_delta, maximal on the contact plane.

    Requires the frame to be aligned so the contact point sits at
    (R, 0, ..., 0, -delta) in frame coordinates; raises FrameMisaligned
    otherwise. Re f <= Re f(Q) on the domain because the domain lies on one
    side of the real tangent plane at Q.
    """
    Qw = frame.to_frame(contact.Q)
    R = contact.R
    tol = 1e-8 * (1.0 + R)
    if abs(Qw[0].imag) > tol or abs(Qw[0].real - R) > tol:
        raise FrameMisaligned(f"contact point off the Re w_1 axis: {Qw[0]:.3e}")
    if frame.n > 2 and np.abs(Qw[1:-1]).max() > tol:
        raise FrameMisaligned("contact point has middle-coordinate components")
    if abs(Qw[-1] + delta) > tol:
        raise FrameMisaligned(f"contact normal coordinate {Qw[-1]:.3e} != -delta")
    g_w = frame.V.T @ domain.rho.wirtinger_grad(contact.Q)
    a = g_w / delta
    const = complex(g_w[-1])
    alpha = frame.U.T @ a
    f = LinearFunctional(frame=frame, coeffs=a, const=const, alpha=alpha)
    base_val = abs(complex(f(frame.base_point(delta))))
    if base_val > 1e-12 * (1.0 + float(np.linalg.norm(a))):
        raise FrameMisaligned(f"f(P_delta) = {base_val:.3e} does not vanish")
    return f


def truncation_order(sup_abs_f: float) -> tuple[int, tuple]:
    """Smallest N with the exponential tail sum_{k>N} S^k/k! below 1.

    S = 0 returns the 0 sentinel. Orders are capped at 512 with a
    diagnostic; beyond that the closed form should be used.
    """
    S = float(sup_abs_f)
    if S == 0.0:
        return 0, ()
    if S > 500.0:
        return N_CAP, ("TruncationCapped: sup |f| too large for the power sum",)
    tail = math.expm1(S)  # sum_{k >= 1} S^k / k!
    term = 1.0
    for N in range(1, N_CAP + 1):
        term *= S / N
        tail -= term
        if tail < 1.0:
            return N, ()
    return N_CAP, ("TruncationCapped: tail never dropped below 1 before the cap",)


def choose_truncation_n(f: LinearFunctional, domain: ConvexDomain,
                        samples: int = 4096, seed: int = 0) -> int:
    """Truncation order from a sampled sup of |f| over the domain.

    |f| is the modulus of an affine map, hence convex, so its sup over the
    closed domain is attained on the boundary; the sample is a star-shaped
    boundary cloud seen from the base point.
    """
    base = f.frame.base_point(_delta_of(f))
    pts = _boundary_cloud(domain, base, f.frame, samples, seed)
    S = float(np.abs(f(pts)).max())
    return truncation_order(S)[0]


def _delta_of(f: LinearFunctional) -> float:
    # f(P - delta nu) = 0 and f(P) = const give delta = const / a_n
    return float((f.const / f.coeffs[-1]).real)


def _boundary_cloud(domain: ConvexDomain, center, frame: BoundaryFrame,
                    count: int, seed: int) -> np.ndarray:
    """Seeded boundary sample, star-shaped from an interior center.

    Directions are drawn isotropically in frame coordinates so that
    congruent configurations (same domain up to an affine unitary map)
    produce identical clouds and hence identical sampled sups.
    """
    rng = np.random.default_rng(seed)
    n = domain.n
    g = rng.normal(size=(count, 2 * n))
    dirs_w = g[:, 0::2] + 1j * g[:, 1::2]
    dirs_w /= np.linalg.norm(dirs_w, axis=1)[:, None]
    dirs_z = dirs_w @ frame.V.T
    radii = ray_radii(domain, center, dirs_z)
    return as_points(center) + radii[:, None] * dirs_z


def tangential_candidate(domain: ConvexDomain, frame: BoundaryFrame, xi,
                         delta: float, use_closed_form: bool = True,
                         seed: int = 0, theta_samples: int = 256,
                         sup_dirs: int = 2048,
                         normalization_M: Optional[float] = None) -> ScalarCandidate:
    """Tangential candidate |F(f)|^2 / M with F = e^f - 1 or its power sum.

    The closed form is the limit of the truncated sums; both have the same
    value and derivative at the base point since f vanishes there, so they
    certify identical bounds for a common normalization. M is 1.05 times a
    sampled sup of |F|^2 taken over a boundary cloud plus a structured grid
    around the contact point, where the modulus peaks; boundary sampling is
    sound because |F o f|^2 is the squared modulus of a holomorphic map and
    obeys the maximum principle.
    """
    if delta <= 0:
        raise ConfigInvalid("delta must be positive")
    xi_t = complex_tangent_project(frame.nu, xi).xi
    base = frame.base_point(delta)
    contact = max_radius(domain, base, xi_t, theta_samples=theta_samples)
    aligned = align_frame(frame, xi_t, contact.theta_star)
    f = linear_functional(domain, aligned, contact, delta)

    def F_closed(v):
        return np.expm1(v)

    # structured boundary points: the theta-grid of the section plus an
    # imaginary-normal ladder around the contact point. Re f peaks at Q, and
    # |F|^2 peaks where additionally Im f passes odd multiples of pi; a
    # displacement i*s along the frame normal changes Im f by s*|a_n|, so the
    # ladder s_k = k pi / |a_n| brackets the true sup of |F|^2.
    line_dir = contact.line_direction
    thetas = 2.0 * np.pi * np.arange(theta_samples) / theta_samples
    plane_dirs = np.exp(1j * thetas)[:, None] * line_dir[None, :]
    plane_radii = ray_radii(domain, base, plane_dirs)
    plane_pts = base + plane_radii[:, None] * plane_dirs

    structured_list = [plane_pts, contact.Q[None, :]]
    a_n = complex(f.coeffs[-1])
    if abs(a_n) > 1e-12:
        normal_dir = aligned.V[:, -1]
        svals = (np.pi / abs(a_n)) * np.arange(-16, 17)
        targets = contact.Q[None, :] + 1j * svals[:, None] * normal_dir[None, :]
        ladder_dirs = targets - base
        norms = np.linalg.norm(ladder_dirs, axis=1)
        ladder_dirs = ladder_dirs / norms[:, None]
        ladder_radii = ray_radii(domain, base, ladder_dirs)
        structured_list.append(base + ladder_radii[:, None] * ladder_dirs)

    cloud1 = _boundary_cloud(domain, base, aligned, sup_dirs, seed)
    cloud2 = _boundary_cloud(domain, base, aligned, sup_dirs, seed + 1)
    structured = np.concatenate(structured_list)

    fvals = {"c1": f(cloud1), "c2": f(cloud2), "st": f(structured)}
    sup_abs_f = max(float(np.abs(v).max()) for v in fvals.values())
    N, trunc_diags = truncation_order(sup_abs_f)
    if use_closed_form:
        F, N_used = F_closed, 0
    else:
        F, N_used = _power_sum(N), N

    def G_at(points):
        Fv = F(f(points))
        return (Fv * np.conj(Fv)).real

    def G_angle(th):
        d = (np.exp(1j * th) * line_dir)[None, :]
        r = ray_radii(domain, base, d)[0]
        return float(G_at(base + r * d[0]))

    i_best = int(np.argmax(G_at(plane_pts)))
    width = 2.0 * np.pi / theta_samples
    polish = minimize_scalar(lambda th: -G_angle(th),
                             bounds=(thetas[i_best] - width, thetas[i_best] + width),
                             method="bounded", options={"xatol": 1e-8})
    structured_sup = max(float(G_at(structured).max()), float(-polish.fun))

    # deterministic local maximization of G over the boundary, started from
    # the best point seen anywhere; shared by both sup estimates so that the
    # stability comparison probes only the unstructured remainder
    all_pts = np.concatenate([cloud1, cloud2, structured])
    g_all = G_at(all_pts)
    d_best = all_pts[int(np.argmax(g_all))] - base
    d_best = d_best / np.linalg.norm(d_best)
    structured_sup = max(structured_sup,
                         _polish_boundary_max(domain, base, G_at, d_best))

    sup1 = max(float(G_at(cloud1).max()), structured_sup)
    sup2 = max(float(G_at(cloud2).max()), structured_sup)
    spread = abs(sup1 - sup2) / max(sup1, sup2)
    if spread > 0.20:
        raise NormalizationUnstable(
            f"sampled sups differ by {100 * spread:.1f}% between independent clouds")
    M = normalization_M if normalization_M is not None else max(1.0, SUP_HEADROOM * max(sup1, sup2))

    alpha = f.alpha

    def evaluate(z):
        Fv = F(f(z))
        return (Fv * np.conj(Fv)).real / M

    def holo(z):
        return F(f(z)) / math.sqrt(M)

    def levi_at_base(direction):
        return abs(complex(np.sum(alpha * _dir_array(direction)))) ** 2 / M

    params = TangentialCandidateParams(
        frame=aligned, contact=contact, delta=delta, N=N_used, M=M, f=f,
        sup_abs_f=sup_abs_f, diagnostics=trunc_diags)
    provenance = "tangential_exp" if use_closed_form else "tangential_truncated"
    return ScalarCandidate(
        base_point=base, evaluate=evaluate, levi_at_base=levi_at_base,
        provenance=provenance, holo=holo,
        deriv_scale=float(np.linalg.norm(alpha)),
        params={"delta": delta, "M": M, "N": N_used,
                "theta_star": contact.theta_star, "R": contact.R,
                "construction": params})


def _polish_boundary_max(domain: ConvexDomain, base, G_at, d0,
                         budget: int = 150) -> float:
    """Derivative-free local maximum of G over boundary points near one ray.

    Directions are parametrized as normalized perturbations of d0; each
    evaluation shoots the ray to the boundary. The objective is log1p(G) to
    keep the simplex well conditioned when G is enormous.
    """
    from scipy.optimize import minimize

    n = len(d0)
    base = as_points(base)

    def objective(x):
        d = d0 + (x[0::2] + 1j * x[1::2])
        nd = np.linalg.norm(d)
        if nd < 1e-9:
            return 0.0
        d = d / nd
        r = ray_radii(domain, base, d[None, :])[0]
        return -float(np.log1p(G_at(base + r * d)))

    simplex = np.zeros((2 * n + 1, 2 * n))
    for i in range(2 * n):
        simplex[i + 1, i] = 0.2
    res = minimize(objective, np.zeros(2 * n), method="Nelder-Mead",
                   options={"maxfev": budget, "xatol": 1e-9, "fatol": 1e-12,
                            "initial_simplex": simplex})
    return float(np.expm1(-res.fun))


def _power_sum(N: int):
    """Evaluator of the truncated sum sum_{k=1}^N v^k / k!.

    Direct summation suffers catastrophic cancellation once |v| is large
    (terms reach |v|^N/N! while the sum stays bounded), so for |v| > 20 the
    identity F_N = expm1(v) - sum_{k>N} v^k/k! is used instead, with the
    tail accumulated from its log-space leading term. Both routes are
    accurate wherever the candidate construction evaluates them.
    """
    from scipy.special import gammaln

    def F(v):
        v0 = np.asarray(v, dtype=complex)
        v = np.atleast_1d(v0).ravel()
        out = np.empty_like(v)
        small = np.abs(v) <= 20.0
        if small.any():
            vs = v[small]
            acc = np.zeros_like(vs)
            term = np.ones_like(vs)
            for k in range(1, N + 1):
                term = term * vs / k
                acc = acc + term
            out[small] = acc
        if (~small).any():
            vb = v[~small]
            ln_mag = (N + 1) * np.log(np.abs(vb)) - gammaln(N + 2)
            term = np.exp(ln_mag + 1j * (N + 1) * np.angle(vb))
            tail = np.zeros_like(vb)
            k = N + 1
            for _ in range(2000):
                tail = tail + term
                k += 1
                term = term * vb / k
                if float(np.abs(term).max()) < 1e-18 * (1.0 + float(np.abs(tail).max())):
                    break
            out[~small] = np.expm1(vb) - tail
        return out.reshape(v0.shape)

    return F


def sibony_lower_bound(candidate: ScalarCandidate, xi) -> float:
    """Certified lower bound sqrt(Levi form at the base along xi).

    The caller is responsible for the candidate having passed verification;
    the construction routines here produce admissible candidates by design.
    """
    levi = float(candidate.levi_at_base(xi))
    if levi < -1e-10:
        raise NegativeLevi(f"Levi form {levi:.3e} at the base point")
    return math.sqrt(max(levi, 0.0))


def mixed_lower_bound(a: float, delta: float) -> float:
    """Bound |a|/(6 delta) for directions a*nu + b*T with T real-tangential.

    Realized by the normal candidate: only the normal component of the
    direction enters its Levi form. Any real a is accepted; the bound uses
    the absolute value.
    """
    if delta <= 0:
        raise ConfigInvalid("delta must be positive")
    return abs(a) / (6.0 * delta)


def export_candidate(candidate: ScalarCandidate) -> dict:
    """JSON-serializable record {provenance, base_point, parameters}."""

    def _plain(value):
        if isinstance(value, np.ndarray):
            return [[float(v.real), float(v.imag)] for v in value]
        if isinstance(value, complex):
            return [value.real, value.imag]
        if isinstance(value, (int, float, str)) or value is None:
            return value
        if isinstance(value, (list, tuple)):
            return [_plain(v) for v in value]
        if isinstance(value, dict):
            return {k: _plain(v) for k, v in value.items()}
        return repr(value)

    params = {k: _plain(v) for k, v in candidate.params.items()
              if k != "construction"}
    construction = candidate.params.get("construction")
    if isinstance(construction, TangentialCandidateParams):
        params["f_coeffs"] = _plain(construction.f.coeffs)
        params["f_const"] = _plain(construction.f.const)
        params["frame_U"] = _plain(construction.frame.U.ravel())
        params["frame_P"] = _plain(construction.frame.P)
    return {
        "provenance": candidate.provenance,
        "base_point": _plain(candidate.base_point),
        "parameters": params,
    }
