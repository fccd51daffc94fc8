"""Exponential and mixture transports, exponential geodesics and divergences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .curves import ParamCurve, central_difference, default_fd_step, score
from .errors import SupportMismatch, SupportNotNested
from .simplex import BundleElement, ProbabilityVector, center, inner_product


def _vector(u) -> np.ndarray:
    return np.asarray(u.score if isinstance(u, BundleElement) else u, dtype=float)


def e_transport(p: ProbabilityVector, q: ProbabilityVector, u: BundleElement) -> BundleElement:
    """Exponential transport: recenter ``u`` at ``q``."""
    return center(_vector(u), q)


def m_transport(p: ProbabilityVector, q: ProbabilityVector, u: BundleElement) -> BundleElement:
    """Mixture transport ``v`` solving ``p u = q v``.

    Cells of ``supp p`` outside ``supp q`` are tolerated only where ``u``
    vanishes; anywhere else the equation has no solution.
    """
    u = _vector(u)
    sp, sq = p.support, q.support
    offending = sp & ~sq
    if np.any(offending & (u != 0)):
        raise SupportNotNested("supp p is not contained in supp q where u is nonzero")
    v = np.zeros_like(u)
    both = sp & sq
    v[both] = p.weights[both] * u[both] / q.weights[both]
    return BundleElement(q, v)


def displacement(p: ProbabilityVector, q: ProbabilityVector) -> BundleElement:
    """Exponential chart ``s_p(q) = log(q/p) - E_p[log(q/p)]``; needs equal supports."""
    if not p.same_support(q):
        raise SupportMismatch("displacement requires supp p == supp q")
    s = p.support
    log_ratio = np.zeros(p.space.d)
    log_ratio[s] = np.log(q.weights[s]) - np.log(p.weights[s])
    return center(log_ratio, p)


def cumulant(p: ProbabilityVector, u) -> float:
    """``K_p(u) = log E_p[exp u]`` computed with a max-shifted log-sum-exp."""
    u = _vector(u)
    s = p.support
    return float(logsumexp(u[s], b=p.weights[s]))


def kl(p: ProbabilityVector, q: ProbabilityVector) -> float:
    if not p.support_within(q):
        raise SupportNotNested("KL(p||q) requires supp p within supp q")
    s = p.support
    return float(np.sum(p.weights[s] * (np.log(p.weights[s]) - np.log(q.weights[s]))))


@dataclass(frozen=True, eq=False)
class ExpGeodesic:
    """Exponential family ``t -> exp(t u - psi(t)) p`` through ``base``.

    Points keep exactly the support of ``base``; they are built with a zero
    support tolerance so that tiny but positive weights stay on the support.
    """

    base: ProbabilityVector
    direction: BundleElement

    def __post_init__(self):
        if not np.array_equal(self.direction.base.support, self.base.support):
            raise SupportMismatch("direction is not based at the geodesic base")

    def _log_weights(self, t: float) -> np.ndarray:
        s = self.base.support
        return t * self.direction.score[s] + np.log(self.base.weights[s])

    def psi(self, t: float) -> float:
        return float(logsumexp(self._log_weights(t)))

    def point(self, t: float) -> ProbabilityVector:
        s = self.base.support
        logw = self._log_weights(t)
        w = np.zeros(self.base.space.d)
        w[s] = np.exp(logw - logsumexp(logw))
        return ProbabilityVector(self.base.space, w / w.sum(), support_tol=0.0)

    def velocity(self, t: float) -> np.ndarray:
        q = self.point(t)
        u = self.direction.score
        return (u - q.expect(u)) * q.weights


def exp_geodesic_point(g: ExpGeodesic, t: float) -> ProbabilityVector:
    return g.point(t)


def geodesic_ode_residual(g: ExpGeodesic, t: float) -> float:
    """Sup-norm mismatch between a numerical derivative of the closed form and its ODE."""
    h = default_fd_step(t)
    fd = central_difference(lambda x: g.point(x).weights, t, h)
    return float(np.max(np.abs(fd - g.velocity(t))))


def duality_gap(p: ProbabilityVector, q: ProbabilityVector, u: BundleElement,
                w: BundleElement) -> float:
    if not p.support_within(q):
        raise SupportNotNested("duality needs supp p within supp q")
    lhs = inner_product(q, m_transport(p, q, u), w)
    rhs = inner_product(p, u, e_transport(q, p, w))
    return abs(lhs - rhs)


def cumulant_along(curve: ParamCurve, u_curve: Callable[[float], np.ndarray], t: float) -> float:
    return cumulant(curve.point(t), u_curve(t))


def cumulant_flow_derivative(curve: ParamCurve, u_curve: Callable[[float], np.ndarray],
                             t: float) -> float:
    """``d/dt K_gamma(u)`` as the expectation of score plus ``du/dt`` under the tilted model."""
    res = score(curve, t)
    p = res.base
    u = _vector(u_curve(t))
    u_dot = central_difference(lambda x: _vector(u_curve(x)), t, default_fd_step(t))
    s = p.support
    logw = u[s] + np.log(p.weights[s])
    tilted = np.exp(logw - logsumexp(logw))
    return float(np.dot(tilted, res.values[s] + u_dot[s]))
