"""Input checks for array-shaped data entering the estimator layer."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .errors import NegativeWeight, NotNormalized
from .simplex import NORM_TOL


def check_distribution_array(X, tol: float = NORM_TOL, ensure_2d: bool = True) -> np.ndarray:
    """Validate rows of ``X`` as simplex points.

    Tiny negatives (``>= -tol``) are clamped to zero and rows renormalized,
    matching :func:`simplexbundle.make_distribution`.
    """
    X = check_array(X, dtype=float, ensure_2d=ensure_2d, copy=True)
    if np.any(X < -tol):
        raise NegativeWeight("input contains negative weights")
    X[X < 0] = 0.0
    sums = X.sum(axis=-1, keepdims=True)
    if np.any(np.abs(sums - 1.0) > tol):
        raise NotNormalized("every row must sum to one")
    return X / sums


def check_parameter_grid(T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim == 2 and T.shape[1] == 1:
        T = T[:, 0]
    if T.ndim != 1:
        raise ValueError("parameter values must be a 1-d array or a single column")
    if not np.all(np.isfinite(T)):
        raise ValueError("parameter values must be finite")
    return T
