"""Closed probability simplex, contrasts and the statistical bundle.

Every numeric vector is indexed by the order of a :class:`SampleSpace`,
fixed at construction. Values are immutable: arrays are copied and flagged
read-only, so the objects can be shared freely across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BaseMismatch, EmptySubset, NegativeWeight, NotNormalized

SUPPORT_TOL = 1e-12
NORM_TOL = 1e-9
ZERO_SUM_TOL = 1e-8


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _scaled_tol(tol: float, values: np.ndarray) -> float:
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    return tol * max(1.0, scale)


@dataclass(frozen=True)
class SampleSpace:
    """Finite ordered set of outcome labels."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        if not labels:
            raise ValueError("a sample space needs at least one label")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels!r}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, d: int) -> "SampleSpace":
        return cls(tuple(str(i) for i in range(1, d + 1)))

    @property
    def d(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.d

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def basis_vector(self, label) -> np.ndarray:
        e = np.zeros(self.d)
        e[self.index(label)] = 1.0
        return e


SpaceLike = Union[SampleSpace, int, Sequence]


def as_space(space: SpaceLike, d: int | None = None) -> SampleSpace:
    if isinstance(space, SampleSpace):
        return space
    if space is None:
        if d is None:
            raise ValueError("cannot infer a sample space")
        return SampleSpace.of_size(d)
    if isinstance(space, (int, np.integer)):
        return SampleSpace.of_size(int(space))
    return SampleSpace(tuple(space))


@dataclass(frozen=True)
class SupportIndicator:
    space: SampleSpace
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=int)
        if mask.shape != (self.space.d,):
            raise ValueError("mask length does not match the sample space")
        if np.any(mask * mask != mask):
            raise ValueError("support indicator must be 0/1 valued")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, m in zip(self.space.labels, self.mask) if m)

    def __str__(self) -> str:
        return "".join(str(int(m)) for m in self.mask)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportIndicator):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.space, str(self)))


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """A point of the closed simplex.

    The support is recomputed from ``weights`` and ``support_tol`` on every
    access. Build instances through :func:`make_distribution` when the
    weights may carry round-off; the constructor itself only validates.
    """

    space: SampleSpace
    weights: np.ndarray
    support_tol: float = SUPPORT_TOL

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.shape != (self.space.d,):
            raise ValueError(f"expected {self.space.d} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise NegativeWeight(f"negative weight in {w}")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"weights sum to {w.sum()!r}")
        object.__setattr__(self, "weights", w)

    @property
    def support(self) -> np.ndarray:
        return self.weights > self.support_tol

    @property
    def support_indicator(self) -> SupportIndicator:
        return SupportIndicator(self.space, self.support.astype(int))

    @property
    def is_vertex(self) -> bool:
        return int(self.support.sum()) == 1

    @property
    def is_interior(self) -> bool:
        return bool(self.support.all())

    def expect(self, u) -> float:
        u = np.asarray(u, dtype=float)
        s = self.support
        return float(np.dot(self.weights[s], u[s]))

    def same_support(self, other: "ProbabilityVector") -> bool:
        return bool(np.array_equal(self.support, other.support))

    def support_within(self, other: "ProbabilityVector") -> bool:
        return bool(np.all(other.support[self.support]))

    def __repr__(self) -> str:
        return f"ProbabilityVector({np.array2string(self.weights, precision=6)})"

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.space.labels),
                           "weights": [float(x) for x in self.weights]})


def make_distribution(space: SpaceLike, weights: Iterable[float], tol: float = NORM_TOL,
                      support_tol: float = SUPPORT_TOL) -> ProbabilityVector:
    """Validate ``weights`` as a point of the closed simplex.

    Weights in ``[-tol, 0)`` are clamped to zero and the vector renormalized.

    Raises
    ------
    NegativeWeight
        If some weight is below ``-tol``.
    NotNormalized
        If the clamped weights do not sum to one within ``tol``.
    """
    w = np.array(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=float)
    space = as_space(space, w.size)
    if w.shape != (space.d,):
        raise ValueError(f"expected {space.d} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < -tol):
        raise NegativeWeight(f"weight {w.min()!r} below -{tol}")
    w = np.where(w < 0, 0.0, w)
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise NotNormalized(f"weights sum to {total!r}")
    return ProbabilityVector(space, w / total, support_tol)


def distribution_from_json(text: str | dict, tol: float = NORM_TOL) -> ProbabilityVector:
    """Read ``{"labels": [...], "weights": [...]}``; labels are optional."""
    obj = json.loads(text) if isinstance(text, str) else text
    weights = obj["weights"]
    labels = obj.get("labels")
    space = SampleSpace(tuple(labels)) if labels else SampleSpace.of_size(len(weights))
    return make_distribution(space, weights, tol=tol)


@dataclass(frozen=True, eq=False)
class ContrastVector:
    space: SampleSpace
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.space.d,):
            raise ValueError("contrast length does not match the sample space")
        if abs(v.sum()) > _scaled_tol(ZERO_SUM_TOL, v):
            raise ValueError(f"contrast does not sum to zero (sum={v.sum()!r})")
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> np.ndarray:
        return self.values != 0

    def __repr__(self) -> str:
        return f"ContrastVector({np.array2string(self.values, precision=6)})"


@dataclass(frozen=True, eq=False)
class BundleElement:
    """A pair (p, u) of the statistical bundle, stored canonically.

    ``score`` is zeroed off ``supp base`` on construction, so two elements
    that represent the same reduced-bundle class compare equal.
    """

    base: ProbabilityVector
    score: np.ndarray
    tol: float = field(default=ZERO_SUM_TOL, repr=False)

    def __post_init__(self):
        s = np.array(self.score, dtype=float)
        if s.shape != (self.base.space.d,):
            raise ValueError("score length does not match the sample space")
        s[~self.base.support] = 0.0
        mean = float(np.dot(self.base.weights, s))
        if abs(mean) > _scaled_tol(self.tol, s):
            raise ValueError(f"E_p[score] = {mean!r} is not zero")
        s.setflags(write=False)
        object.__setattr__(self, "score", s)

    @property
    def space(self) -> SampleSpace:
        return self.base.space

    def norm(self) -> float:
        return float(np.sqrt(max(inner_product(self.base, self, self), 0.0)))

    def allclose(self, other: "BundleElement", atol: float = 1e-10) -> bool:
        return (same_base(self.base, other.base)
                and bool(np.allclose(self.score, other.score, rtol=0.0, atol=atol)))

    def __repr__(self) -> str:
        return f"BundleElement(score={np.array2string(self.score, precision=6)})"


def same_base(p: ProbabilityVector, q: ProbabilityVector, atol: float = 1e-12) -> bool:
    return (p.space == q.space and p.same_support(q)
            and bool(np.allclose(p.weights, q.weights, rtol=0.0, atol=atol)))


def center(u, p: ProbabilityVector) -> BundleElement:
    """Center ``u`` at ``p`` and zero it off the support of ``p``."""
    u = np.asarray(u.score if isinstance(u, BundleElement) else u, dtype=float)
    if u.shape != (p.space.d,):
        raise ValueError("vector length does not match the sample space")
    s = p.support
    out = np.zeros_like(u)
    out[s] = u[s] - p.expect(u)
    return BundleElement(p, out)


def inner_product(p: ProbabilityVector, u: BundleElement, v: BundleElement) -> float:
    """Covariance pairing E_p[u v] on the fibre at ``p``."""
    for elem in (u, v):
        if not same_base(p, elem.base):
            raise BaseMismatch("bundle element is not based at p")
    return float(np.dot(p.weights, u.score * v.score))


def contrast_basis(space: SampleSpace, subset: Iterable) -> list[ContrastVector]:
    """Basis ``e_x0 - e_y`` of the contrasts supported in ``subset``.

    ``x0`` is the first element of ``subset`` in the order of ``space``.
    """
    idx = sorted({space.index(lab) for lab in subset})
    if not idx:
        raise EmptySubset("contrast basis needs a nonempty subset")
    first, rest = idx[0], idx[1:]
    out = []
    for j in rest:
        v = np.zeros(space.d)
        v[first], v[j] = 1.0, -1.0
        out.append(ContrastVector(space, v))
    return out


def tangent_membership(p: ProbabilityVector, v, tol: float = NORM_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    if v.shape != (p.space.d,):
        raise ValueError("vector length does not match the sample space")
    if abs(v.sum()) > tol:
        return False
    return bool(np.all(np.abs(v[~p.support]) <= tol))
