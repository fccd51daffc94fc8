"""scikit-learn compatible wrappers.

``ExponentialChart`` maps compositions sharing one support to centered
log-ratio coordinates at a reference point, the same job ``clr`` does for
strictly positive data, but with structural zeros kept in place.
``FisherScoreTransformer`` turns parameter values into score rows of a zoo
curve so the scores can feed a pipeline.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .curves import score
from .errors import SimplexError, SupportMismatch
from .simplex import NORM_TOL, SUPPORT_TOL, BundleElement, SampleSpace, make_distribution
from .transport import ExpGeodesic, displacement
from .validation import check_distribution_array, check_parameter_grid
from .zoo import get_curve


class ExponentialChart(TransformerMixin, BaseEstimator):
    """Exponential chart ``q -> log(q/p) - E_p[log(q/p)]`` at a fitted base ``p``.

    Parameters
    ----------
    base : array-like of shape (n_cells,), default=None
        Reference distribution. When ``None`` the base is the normalized
        geometric mean of the training rows on their common support.
    tol : float, default=1e-9
        Normalization tolerance for incoming rows.

    Attributes
    ----------
    base_ : ProbabilityVector
    support_ : ndarray of bool
    n_features_in_ : int
    """

    def __init__(self, base=None, tol=NORM_TOL):
        self.base = base
        self.tol = tol

    def fit(self, X, y=None):
        X = check_distribution_array(X, self.tol)
        self.n_features_in_ = X.shape[1]
        space = SampleSpace.of_size(X.shape[1])
        if self.base is not None:
            base = make_distribution(space, np.asarray(self.base, dtype=float), tol=self.tol)
        else:
            supp = X[0] > SUPPORT_TOL
            self._check_support(X, supp)
            logs = np.log(X[:, supp]).mean(axis=0)
            w = np.zeros(X.shape[1])
            w[supp] = np.exp(logs - logs.max())
            base = make_distribution(space, w / w.sum())
        self.base_ = base
        self.support_ = base.support
        return self

    @staticmethod
    def _check_support(X, supp):
        rows = X > SUPPORT_TOL
        if not np.all(rows == supp):
            raise SupportMismatch("all rows must share the support of the base")

    def transform(self, X):
        check_is_fitted(self, "base_")
        X = check_distribution_array(X, self.tol)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        space = self.base_.space
        return np.vstack([displacement(self.base_, make_distribution(space, row)).score
                          for row in X])

    def inverse_transform(self, S):
        check_is_fitted(self, "base_")
        S = np.atleast_2d(np.asarray(S, dtype=float))
        return np.vstack([ExpGeodesic(self.base_, BundleElement(self.base_, row)).point(1.0).weights
                          for row in S])


class FisherScoreTransformer(TransformerMixin, BaseEstimator):
    """Score rows ``s(t)`` of a named one-parameter model.

    Parameters
    ----------
    model : str, default="line"
        Zoo name, see :func:`simplexbundle.get_curve`.
    params : dict, default=None
        Model parameters (Gibbs ``U``/``V``, mixture ``p``/``q``).
    on_error : {"raise", "nan"}, default="raise"
        What to do at parameter values where no score exists.
    """

    def __init__(self, model="line", params=None, on_error="raise"):
        self.model = model
        self.params = params
        self.on_error = on_error

    def fit(self, X=None, y=None):
        if self.on_error not in ("raise", "nan"):
            raise ValueError("on_error must be 'raise' or 'nan'")
        self.curve_ = get_curve(self.model, self.params)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "curve_")
        T = check_parameter_grid(X)
        out = np.empty((T.size, self.curve_.space.d))
        for i, t in enumerate(T):
            try:
                out[i] = score(self.curve_, float(t)).values
            except SimplexError:
                if self.on_error == "raise":
                    raise
                out[i] = np.nan
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "curve_")
        return np.array([f"s_{lab}" for lab in self.curve_.space.labels], dtype=object)
