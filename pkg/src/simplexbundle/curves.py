"""One-parameter models as curves in the closed simplex.

A curve returns raw weight vectors; :func:`score` splits the velocity into
the Fisher score on the support and an undetermined zero-set. Cells that
touch the boundary transversally (zero weight, nonzero velocity) have no
score and raise :class:`AbsoluteContinuityViolation`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AbsoluteContinuityViolation, OutOfDomain
from .simplex import (
    SUPPORT_TOL,
    BundleElement,
    ContrastVector,
    ProbabilityVector,
    SampleSpace,
    SupportIndicator,
    make_distribution,
)

ABS_CONT_TOL = 1e-6
ILL_CONDITIONED_BELOW = 1e-8
_EPS = np.finfo(float).eps


def default_fd_step(t: float) -> float:
    return max(1.0, abs(t)) * _EPS ** (1.0 / 3.0)


def central_difference(f: Callable[[float], np.ndarray], t: float, h: float,
                       richardson: bool = True) -> np.ndarray:
    """Central difference with an optional single Richardson refinement."""
    d_h = (np.asarray(f(t + h), float) - np.asarray(f(t - h), float)) / (2.0 * h)
    if not richardson:
        return d_h
    h2 = h / 2.0
    d_h2 = (np.asarray(f(t + h2), float) - np.asarray(f(t - h2), float)) / (2.0 * h2)
    return (4.0 * d_h2 - d_h) / 3.0


@dataclass(frozen=True, eq=False)
class ParamCurve:
    """A differentiable map ``t -> gamma(t)`` into the simplex of ``space``.

    Without ``deriv`` the velocity is a central difference of ``eval``.
    ``relations`` holds known binomial score relations as ``(alpha, beta)``
    exponent pairs; ``model_polys`` holds the implicit equations as text.
    """

    space: SampleSpace
    domain: tuple
    eval: Callable[[float], Sequence[float]]
    deriv: Optional[Callable[[float], Sequence[float]]] = None
    fd_step: Optional[float] = None
    richardson: bool = True
    name: str = "curve"
    relations: tuple = field(default=())
    model_polys: tuple = field(default=())
    support_tol: float = SUPPORT_TOL

    @property
    def diff_mode(self) -> str:
        return "analytic" if self.deriv is not None else "central_fd"

    def raw(self, t: float) -> np.ndarray:
        return np.asarray(self.eval(float(t)), dtype=float)

    def point(self, t: float) -> ProbabilityVector:
        a, b = self.domain
        if not a <= t <= b:
            raise OutOfDomain(f"t={t!r} outside [{a}, {b}]")
        return make_distribution(self.space, self.raw(t), support_tol=self.support_tol)

    def interior_grid(self, n: int, margin: float = 0.05) -> np.ndarray:
        a, b = self.domain
        pad = margin * (b - a)
        return np.linspace(a + pad, b - pad, n)


def velocity(curve: ParamCurve, t: float) -> ContrastVector:
    a, b = curve.domain
    t = float(t)
    if curve.deriv is not None:
        if not a <= t <= b:
            raise OutOfDomain(f"t={t!r} outside [{a}, {b}]")
        return ContrastVector(curve.space, curve.deriv(t))
    if not a < t < b:
        raise OutOfDomain(f"finite differences need t in the open interval ({a}, {b})")
    h = curve.fd_step if curve.fd_step is not None else default_fd_step(t)
    if curve.fd_step is None:
        h = min(h, (t - a) / 2.0, (b - t) / 2.0)
    elif not (t - h >= a - 1e-12 * h and t + h <= b + 1e-12 * h):
        raise OutOfDomain(f"t={t!r} too close to the boundary for step {h}")
    return ContrastVector(curve.space, central_difference(curve.raw, t, h, curve.richardson))


@dataclass(frozen=True, eq=False)
class ScoreResult:
    base: ProbabilityVector
    score: BundleElement
    determined_mask: SupportIndicator
    velocity: ContrastVector
    ill_conditioned: bool = False

    @property
    def values(self) -> np.ndarray:
        return self.score.score


def score(curve: ParamCurve, t: float) -> ScoreResult:
    """Fisher score of ``curve`` at ``t``: velocity over weight on the support.

    Raises
    ------
    AbsoluteContinuityViolation
        If a zero cell has velocity larger than ``ABS_CONT_TOL``.
    """
    p = curve.point(t)
    vel = velocity(curve, t)
    supp = p.support
    off = ~supp
    bad = off & (np.abs(vel.values) > ABS_CONT_TOL)
    if np.any(bad):
        cells = [lab for lab, m in zip(curve.space.labels, bad) if m]
        raise AbsoluteContinuityViolation(
            f"{curve.name}: cells {cells} have zero weight but nonzero velocity at t={t!r}")
    s = np.zeros(curve.space.d)
    s[supp] = vel.values[supp] / p.weights[supp]
    tol = max(ABS_CONT_TOL * curve.space.d, 1e-8)
    elem = BundleElement(p, s, tol=tol)
    small = supp & (p.weights < ILL_CONDITIONED_BELOW)
    return ScoreResult(p, elem, p.support_indicator, vel, bool(np.any(small)))


def fisher_information(curve: ParamCurve, t: float) -> float:
    res = score(curve, t)
    supp = res.base.support
    v = res.velocity.values[supp]
    return float(np.sum(v * v / res.base.weights[supp]))


def sqrt_embedding(curve: ParamCurve, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Image ``rho = 2 sqrt(gamma)`` on the radius-2 sphere and its derivative."""
    res = score(curve, t)
    rho = 2.0 * np.sqrt(res.base.weights)
    return rho, 0.5 * res.values * rho


def gradient_orthogonality(grad_f: Callable[[np.ndarray], np.ndarray], curve: ParamCurve,
                           t: float) -> float:
    """Covariance of the gradient of an implicit relation with the score.

    Vanishes whenever ``F(gamma(t)) == 0`` along the whole curve.
    """
    res = score(curve, t)
    g = np.asarray(grad_f(res.base.weights), dtype=float)
    p = res.base
    return float(np.dot(p.weights, (g - p.expect(g)) * res.values))


def curve_from_table(ts, weights, space: SampleSpace | None = None,
                     name: str = "table") -> ParamCurve:
    """Curve interpolating sampled rows on a uniform ``t`` grid.

    Velocities at interior nodes are plain central differences with the grid
    spacing as step.
    """
    ts = np.asarray(ts, dtype=float)
    w = np.asarray(weights, dtype=float)
    if ts.ndim != 1 or w.ndim != 2 or w.shape[0] != ts.size:
        raise ValueError("expected one weight row per t value")
    if ts.size < 2:
        raise ValueError("a sampled curve needs at least two rows")
    steps = np.diff(ts)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("sampled curves need a strictly increasing uniform t grid")
    space = space or SampleSpace.of_size(w.shape[1])

    def evaluate(t):
        return np.array([np.interp(t, ts, w[:, j]) for j in range(w.shape[1])])

    return ParamCurve(space, (float(ts[0]), float(ts[-1])), evaluate,
                      fd_step=float(steps[0]), richardson=False, name=name)
