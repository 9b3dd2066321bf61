"""scikit-learn style front ends: fit fixes the geometry, predict maps v to I(v)."""
from __future__ import annotations


import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .density1d import Density1D, tabulated_density
from .errors import DegenerateModelError, InvalidParametersError
from .kernels import CurvatureParams
from .model import SearchOptions, model_cheeger_search, model_profile_table
from .profile import density_cheeger, density_profile_many


def _masses(X) -> np.ndarray:
    v = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
    if np.any((v < 0) | (v > 1)):
        raise InvalidParametersError("masses must lie in [0, 1]")
    return v


class ModelProfileEstimator(BaseEstimator):
    """Model profile I_{K,N,D}. ``D=None`` takes the Bonnet-Myers diameter when K > 0."""

    def __init__(self, K=1.0, N=2.0, D=None, n_phi=33, n_a=33, xtol=1e-6, n_starts=3):
        self.K = K
        self.N = N
        self.D = D
        self.n_phi = n_phi
        self.n_a = n_a
        self.xtol = xtol
        self.n_starts = n_starts

    def fit(self, X=None, y=None):
        self.params_ = CurvatureParams(self.K, self.N, self.D)
        self.options_ = SearchOptions(n_phi=self.n_phi, n_a=self.n_a, xtol=self.xtol,
                                      n_starts=self.n_starts)
        if self.params_.degenerate:
            raise DegenerateModelError("N=1 with K>0 has no admissible model density")
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        v = _masses(X)
        table = model_profile_table(self.params_, np.unique(v), self.options_)
        lookup = dict(zip(table.v.tolist(), table.values.tolist()))
        return np.array([lookup[x] for x in v.tolist()])

    def cheeger(self) -> float:
        check_is_fitted(self, "params_")
        if not hasattr(self, "cheeger_"):
            self.cheeger_ = model_cheeger_search(self.params_, self.options_).value
        return self.cheeger_


class DensityProfileEstimator(BaseEstimator):
    """Profile of one density, fitted from a Density1D or an (n, 2) table of (t, h) samples."""

    def __init__(self, n_sweep=256, refine_margin=1e-2):
        self.n_sweep = n_sweep
        self.refine_margin = refine_margin

    def fit(self, X, y=None):
        if isinstance(X, Density1D):
            self.density_ = X
        else:
            arr = check_array(X, dtype=float)
            if arr.shape[1] != 2:
                raise InvalidParametersError("table input needs two columns (t, h)")
            self.density_ = tabulated_density(arr[:, 0], arr[:, 1])
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "density_")
        pts = density_profile_many(self.density_, _masses(X), n_sweep=self.n_sweep,
                                   refine_margin=self.refine_margin)
        return np.array([p.value for p in pts])

    def cheeger(self) -> float:
        check_is_fitted(self, "density_")
        if not hasattr(self, "cheeger_"):
            self.cheeger_ = density_cheeger(self.density_)
        return self.cheeger_

