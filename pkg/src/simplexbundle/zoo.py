"""Built-in one-parameter models, addressable by name.

====================  =========================================  ===========
name                  curve                                      domain
====================  =========================================  ===========
``line``              ``(t, t, 1 - 2t)``                         [0, 1/2]
``entropy3``          ``(t, (t - 1/2)^2, 3/4 - t^2)``            [0.1, 0.8]
``mixture``           ``(1 - t) p + t q``                        [0, 1]
``gibbs``             ``exp(-U / b^2 + b V) / Z(b)``             [-50, 50]
``indep2x2``          product measure on a 2x2 table             [0, 1]
``marghomo``          ``((1-th)^2, th(1-th), th(1-th), th^2)``   [0, 1]
====================  =========================================  ===========
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .curves import ParamCurve
from .errors import BetaZero, ModelNotFound
from .simplex import ProbabilityVector, SampleSpace, make_distribution

BETA_SWITCH = 0.05
GIBBS_RANGE = 50.0

TABLE_2X2 = SampleSpace(("11", "12", "21", "22"))
COLLAPSED_2X2 = SampleSpace(("11", "12", "22"))


def line_model() -> ParamCurve:
    return ParamCurve(
        SampleSpace.of_size(3), (0.0, 0.5),
        lambda t: np.array([t, t, 1.0 - 2.0 * t]),
        lambda t: np.array([1.0, 1.0, -2.0]),
        name="line",
        relations=(((1, 0, 0), (0, 1, 0)),),
        model_polys=("p1 - p2", "p3 + 2*p1 - 1"),
    )


def entropy_curve() -> ParamCurve:
    return ParamCurve(
        SampleSpace.of_size(3), (0.1, 0.8),
        lambda t: np.array([t, (t - 0.5) ** 2, 0.75 - t * t]),
        lambda t: np.array([1.0, 2.0 * (t - 0.5), -2.0 * t]),
        name="entropy3",
        model_polys=("p1 + p2 + p3 - 1",),
    )


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    p: ProbabilityVector
    q: ProbabilityVector

    def __post_init__(self):
        if self.p.space != self.q.space:
            raise ValueError("mixture endpoints live on different sample spaces")


def mixture_curve(spec: MixtureSpec) -> ParamCurve:
    p, q = spec.p.weights, spec.q.weights
    diff = q - p
    return ParamCurve(spec.p.space, (0.0, 1.0),
                      lambda t: p + t * diff, lambda t: diff.copy(), name="mixture")


@dataclass(frozen=True, eq=False)
class GibbsSpec:
    """Energies ``U >= 0`` with ``min U == 0`` and a linear potential ``V``."""

    U: np.ndarray
    V: np.ndarray
    space: Optional[SampleSpace] = None

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        V = np.array(self.V, dtype=float)
        if U.shape != V.shape or U.ndim != 1:
            raise ValueError("U and V must be vectors of the same length")
        if np.any(U < 0) or U.min() != 0:
            raise ValueError("U must be nonnegative with minimum 0")
        space = self.space or SampleSpace.of_size(U.size)
        if space.d != U.size:
            raise ValueError("U does not match the sample space")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "space", space)

    @property
    def ground(self) -> np.ndarray:
        return self.U == 0


def _softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(logits - logsumexp(logits))


def _gibbs_weights(spec: GibbsSpec, beta: float) -> np.ndarray:
    w = np.zeros(spec.U.size)
    ground = spec.ground
    if beta == 0.0:
        w[ground] = 1.0 / ground.sum()
    elif abs(beta) < BETA_SWITCH:
        # exp(-U / beta^2) < exp(-400 min U) underflows; keep only the ground block.
        w[ground] = _softmax(beta * spec.V[ground])
    else:
        w = _softmax(-spec.U / beta ** 2 + beta * spec.V)
    return w


def _gibbs_velocity(spec: GibbsSpec, beta: float) -> np.ndarray:
    w = _gibbs_weights(spec, beta)
    if abs(beta) < BETA_SWITCH:
        # Below the switch the excited cells are frozen at zero: only the V-part moves.
        stat = np.where(spec.ground, spec.V, 0.0)
    else:
        stat = 2.0 * spec.U / beta ** 3 + spec.V
    return w * (stat - np.dot(w, stat))


def gibbs_curve(spec: GibbsSpec) -> ParamCurve:
    return ParamCurve(spec.space, (-GIBBS_RANGE, GIBBS_RANGE),
                      lambda b: _gibbs_weights(spec, b), lambda b: _gibbs_velocity(spec, b),
                      name="gibbs")


def gibbs_log_partition(spec: GibbsSpec, beta: float) -> float:
    if beta == 0.0:
        return float(np.log(spec.ground.sum()))
    return float(logsumexp(-spec.U / beta ** 2 + beta * spec.V))


def gibbs_cumulant_derivative(spec: GibbsSpec, beta: float) -> float:
    """Derivative of ``log Z`` in ``beta``: the mean of ``2 U / beta^3 + V``."""
    if beta == 0.0:
        raise BetaZero("the cumulant derivative is only evaluated for beta != 0")
    w = _softmax(-spec.U / beta ** 2 + beta * spec.V)
    stat = 2.0 * spec.U / beta ** 3 + spec.V
    keep = w > 0
    return float(np.dot(w[keep], stat[keep]))


def _linear_path(slope: float, intercept: float):
    return (lambda t: intercept + slope * t), (lambda t: slope)


def independence_curve(row_path: Optional[Callable] = None, col_path: Optional[Callable] = None,
                       row_deriv: Optional[Callable] = None,
                       col_deriv: Optional[Callable] = None) -> ParamCurve:
    """Product measure ``(a, 1-a) x (b, 1-b)`` on the 2x2 table.

    ``row_path``/``col_path`` give the first-category probabilities ``a(t)``
    and ``b(t)``. Defaults: ``a = t``, ``b = 1/3``. Without derivatives of
    custom paths the velocity falls back to finite differences.
    """
    if row_path is None:
        row_path, row_deriv = _linear_path(1.0, 0.0)
    if col_path is None:
        col_path, col_deriv = _linear_path(0.0, 1.0 / 3.0)

    def evaluate(t):
        a, b = row_path(t), col_path(t)
        return np.array([a * b, a * (1 - b), (1 - a) * b, (1 - a) * (1 - b)])

    deriv = None
    if row_deriv is not None and col_deriv is not None:
        def deriv(t):
            a, b = row_path(t), col_path(t)
            da, db = row_deriv(t), col_deriv(t)
            return np.array([da * b + a * db, da * (1 - b) - a * db,
                             -da * b + (1 - a) * db, -da * (1 - b) - (1 - a) * db])

    return ParamCurve(TABLE_2X2, (0.0, 1.0), evaluate, deriv, name="indep2x2",
                      relations=(((1, 0, 0, 1), (0, 1, 1, 0)),),
                      model_polys=("p11*p22 - p12*p21",))


def marginal_homogeneity_curve(theta_path: Optional[Callable] = None,
                               theta_deriv: Optional[Callable] = None,
                               collapsed: bool = False) -> ParamCurve:
    """Independence plus symmetry, ``p11 = (1-th)^2, p12 = p21 = th(1-th), p22 = th^2``.

    With ``collapsed`` the curve lives on the three cells ``11, 12, 22``
    with weights proportional to ``((1-th)^2, th(1-th), th^2)``; rescaling
    keeps it inside ``p11 p22 = p12^2``.
    """
    if theta_path is None:
        theta_path, theta_deriv = _linear_path(1.0, 0.0)

    if collapsed:
        def evaluate(t):
            th = theta_path(t)
            raw = np.array([(1 - th) ** 2, th * (1 - th), th ** 2])
            return raw / raw.sum()

        deriv = None
        if theta_deriv is not None:
            def deriv(t):
                th, dth = theta_path(t), theta_deriv(t)
                raw = np.array([(1 - th) ** 2, th * (1 - th), th ** 2])
                draw = dth * np.array([-2 * (1 - th), 1 - 2 * th, 2 * th])
                tot, dtot = raw.sum(), draw.sum()
                return draw / tot - raw * dtot / tot ** 2

        return ParamCurve(COLLAPSED_2X2, (0.0, 1.0), evaluate, deriv, name="marghomo3",
                          relations=(((1, 0, 1), (0, 2, 0)),),
                          model_polys=("p11*p22 - p12^2",))

    def evaluate(t):
        th = theta_path(t)
        return np.array([(1 - th) ** 2, th * (1 - th), th * (1 - th), th ** 2])

    deriv = None
    if theta_deriv is not None:
        def deriv(t):
            th, dth = theta_path(t), theta_deriv(t)
            return dth * np.array([-2 * (1 - th), 1 - 2 * th, 1 - 2 * th, 2 * th])

    return ParamCurve(TABLE_2X2, (0.0, 1.0), evaluate, deriv, name="marghomo",
                      relations=(((1, 0, 0, 1), (0, 1, 1, 0)),
                                 ((1, 0, 0, 1), (0, 2, 0, 0)),
                                 ((0, 1, 0, 0), (0, 0, 1, 0))),
                      model_polys=("p11*p22 - p12*p21", "p12 - p21", "p11*p22 - p12^2"))


DEFAULT_GIBBS = {"U": [0, 0, 1], "V": [0, 1, 1.8]}
DEFAULT_MIXTURE = {"p": [0.5, 0.5, 0.0], "q": [0.25, 0.25, 0.5]}


def _mixture_from_params(params: dict) -> MixtureSpec:
    labels = params.get("labels")
    p = np.asarray(params["p"], dtype=float)
    space = SampleSpace(tuple(labels)) if labels else SampleSpace.of_size(p.size)
    return MixtureSpec(make_distribution(space, p), make_distribution(space, params["q"]))


def _gibbs_from_params(params: dict) -> GibbsSpec:
    labels = params.get("labels")
    return GibbsSpec(params["U"], params["V"], SampleSpace(tuple(labels)) if labels else None)


ZOO = ("line", "entropy3", "mixture", "gibbs", "indep2x2", "marghomo")


def get_curve(name: str, params: dict | str | None = None) -> ParamCurve:
    """Resolve a zoo curve by name; ``params`` is a dict or JSON text."""
    if isinstance(params, str):
        params = json.loads(params) if params.strip() else None
    if name == "line":
        return line_model()
    if name == "entropy3":
        return entropy_curve()
    if name == "mixture":
        return mixture_curve(_mixture_from_params(params or DEFAULT_MIXTURE))
    if name == "gibbs":
        return gibbs_curve(_gibbs_from_params(params or DEFAULT_GIBBS))
    if name == "indep2x2":
        return independence_curve()
    if name == "marghomo":
        return marginal_homogeneity_curve(collapsed=bool((params or {}).get("collapsed")))
    raise ModelNotFound(f"unknown model {name!r}; choose one of {', '.join(ZOO)}")
