"""Natural gradients, entropy production, Cramér–Rao checks and gradient flows."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curves import (
    ABS_CONT_TOL,
    ParamCurve,
    central_difference,
    default_fd_step,
    fisher_information,
    score,
    velocity,
)
from .errors import AbsoluteContinuityViolation, GradientUnavailable, StepRejected
from .simplex import BundleElement, ProbabilityVector, center, contrast_basis, inner_product
from .transport import ExpGeodesic

log = logging.getLogger(__name__)

GRAD_TOL = 1e-8
MAX_HALVINGS = 30
ARMIJO_C = 1e-4


@dataclass(frozen=True)
class Functional:
    """Scalar function on the simplex with an optional Euclidean gradient.

    ``value`` and ``euclidean_gradient`` receive a :class:`ProbabilityVector`.
    Off-support entries of the gradient are ignored.
    """

    name: str
    value: Callable[[ProbabilityVector], float]
    euclidean_gradient: Optional[Callable[[ProbabilityVector], np.ndarray]] = None
    fd_step: float = 1e-4

    def __call__(self, p: ProbabilityVector) -> float:
        return float(self.value(p))


def expectation_functional(g) -> Functional:
    g = np.asarray(g, dtype=float)
    return Functional("expectation", lambda p: p.expect(g), lambda p: g.copy())


def entropy(p: ProbabilityVector) -> float:
    w = p.weights[p.support]
    return float(-np.sum(w * np.log(w)))


def _entropy_euclidean_gradient(p: ProbabilityVector) -> np.ndarray:
    out = np.zeros(p.space.d)
    s = p.support
    out[s] = -(np.log(p.weights[s]) + 1.0)
    return out


def entropy_functional() -> Functional:
    return Functional("entropy", entropy, _entropy_euclidean_gradient)


def entropy_gradient(p: ProbabilityVector) -> BundleElement:
    """Natural gradient ``-log p - H(p)`` of the entropy, zero off the support."""
    s = p.support
    out = np.zeros(p.space.d)
    out[s] = -np.log(p.weights[s]) - entropy(p)
    return BundleElement(p, out)


def _fd_natural_gradient(G: Functional, p: ProbabilityVector) -> BundleElement:
    # Perturb along exponential geodesics so every probe stays on the face of p.
    face = [lab for lab, m in zip(p.space.labels, p.support) if m]
    if len(face) < 2:
        raise GradientUnavailable("no finite-difference gradient at a vertex")
    dirs = [center(b.values, p) for b in contrast_basis(p.space, face)]
    derivs = np.array([
        central_difference(lambda t, g=ExpGeodesic(p, v): G(g.point(t)), 0.0, G.fd_step)
        for v in dirs
    ])
    gram = np.array([[inner_product(p, a, b) for b in dirs] for a in dirs])
    if np.linalg.cond(gram) > 1e12:
        raise GradientUnavailable("gram matrix of the fibre basis is ill-conditioned")
    coef = np.linalg.solve(gram, derivs)
    return BundleElement(p, sum(c * v.score for c, v in zip(coef, dirs)))


def natural_gradient(G: Functional, p: ProbabilityVector) -> BundleElement:
    """Fibre element representing ``dG`` under the covariance pairing at ``p``."""
    if G.euclidean_gradient is None:
        return _fd_natural_gradient(G, p)
    return center(G.euclidean_gradient(p), p)


def directional_derivative_check(G: Functional, curve: ParamCurve, t: float) -> float:
    res = score(curve, t)
    h = min(default_fd_step(t), (t - curve.domain[0]) / 2, (curve.domain[1] - t) / 2)
    fd = float(central_difference(lambda x: G(curve.point(x)), t, h)) if h > 0 else 0.0
    return abs(fd - inner_product(res.base, natural_gradient(G, res.base), res.score))


def entropy_production(curve: ParamCurve, t: float) -> float:
    """Rate ``dH/dt`` along ``curve``, with the compensated limit at tangential zeros.

    Cells with weight at or below the support tolerance contribute zero when
    their velocity is negligible; otherwise the entropy is not differentiable.
    """
    p = curve.point(t)
    v = velocity(curve, t).values
    s = p.support
    if np.any(~s & (np.abs(v) > ABS_CONT_TOL)):
        raise AbsoluteContinuityViolation(
            f"zero cell with nonzero velocity at t={t!r}: entropy not differentiable")
    return float(-np.sum((np.log(p.weights[s]) + 1.0) * v[s]))


def cramer_rao_gap(curve: ParamCurve, g, t: float) -> tuple[float, float]:
    """Return ``(Cov(score, g)^2, I(t) Var(g))``; the first never exceeds the second."""
    res = score(curve, t)
    p = res.base
    g = np.asarray(g, dtype=float)
    gc = center(g, p).score
    lhs = float(np.dot(p.weights, res.values * gc)) ** 2
    rhs = fisher_information(curve, t) * float(np.dot(p.weights, gc * gc))
    return lhs, rhs


@dataclass
class FlowTrajectory:
    points: list = field(default_factory=list)
    values: list = field(default_factory=list)
    step: float = 0.0
    direction: str = "ascent"
    converged: bool = False

    @property
    def final(self) -> ProbabilityVector:
        return self.points[-1][1]

    def __len__(self) -> int:
        return len(self.points)


def natural_gradient_flow(G: Functional, p0: ProbabilityVector, step: float = 0.5,
                          n_steps: int = 200, direction: str = "ascent",
                          tol: float = GRAD_TOL) -> FlowTrajectory:
    """Explicit Euler steps in the exponential chart with Armijo step halving.

    Each iterate is ``exp(+-eta grad - psi) p_k``, so the support of ``p0``
    is preserved exactly; iterates carry a zero support tolerance so weights
    that shrink toward a face stay on the support.
    """
    if direction not in ("ascent", "descent"):
        raise ValueError("direction must be 'ascent' or 'descent'")
    if step <= 0:
        raise ValueError("step must be positive")
    if p0.is_vertex:
        raise GradientUnavailable("the fibre at a vertex is trivial; flow cannot start")
    sign = 1.0 if direction == "ascent" else -1.0
    traj = FlowTrajectory(step=step, direction=direction)
    p, t = p0, 0.0
    value = G(p)
    eps = np.finfo(float).eps
    for k in range(n_steps + 1):
        grad = natural_gradient(G, p)
        norm = grad.norm()
        traj.points.append((t, p, norm))
        traj.values.append(value)
        if norm < tol:
            traj.converged = True
            break
        if k == n_steps:
            break
        eta = step
        for _ in range(MAX_HALVINGS + 1):
            cand = ExpGeodesic(p, BundleElement(p, sign * eta * grad.score)).point(1.0)
            new_value = G(cand)
            gain = sign * (new_value - value)
            wanted = ARMIJO_C * eta * norm * norm
            if gain >= wanted or (gain >= 0 and wanted <= 8 * eps * max(1.0, abs(value))):
                break
            eta /= 2
        else:
            raise StepRejected(f"no improvement after {MAX_HALVINGS} halvings at step {k}")
        p = cand
        value, t = new_value, t + eta
    log.debug("flow %s stopped after %d points (converged=%s)", G.name, len(traj), traj.converged)
    return traj
