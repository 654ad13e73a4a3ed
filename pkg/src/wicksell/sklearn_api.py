"""scikit-learn style front end.

Wraps the fitters in an estimator with ``fit`` / ``get_params`` /
``set_params`` so the method plugs into pipelines, grid searches and
cross-validation like any other sklearn component.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .estimators import DEFAULT_M, FitOptions, ProfileSample, fit
from .profile_density import approx_profile_pdf, build_approximation


class WicksellSizeEstimator(BaseEstimator):
    """Estimate a 3-D sphere-diameter law from planar profile diameters.

    Parameters
    ----------
    family : str, default "weibull"
        Diameter-law family: "weibull", "lognormal" or "posnormal".
    method : str, default "ml"
        "ml", "ml-censored", "ml-weighted", "mom" or "mde".
    m : int, default 15
        Number of bands in the profile-density approximation.
    section : (float, float) or None
        Section dimensions, required by the weighted method.
    restarts : int, default 5
        Optimizer starts for the likelihood / distance fitters.

    Attributes
    ----------
    dist_ : SizeDistribution
        The fitted diameter law.
    result_ : FitResult
        Full fit diagnostics.
    scale_, shape_ : float
        Fitted parameters.

    Examples
    --------
    >>> est = WicksellSizeEstimator(family="weibull").fit(diameters)
    >>> est.dist_.mean_diameter()
    """

    def __init__(self, family="weibull", method="ml", m=DEFAULT_M,
                 section=None, restarts=5):
        self.family = family
        self.method = method
        self.m = m
        self.section = section
        self.restarts = restarts

    def _validate(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("expected a single column of profile diameters")
            X = X.ravel()
        return X

    def fit(self, X, y=None, censored=None):
        """Fit the diameter law to profile diameters X.

        ``censored`` optionally holds boundary-clipped measurements,
        used by the "ml-censored" method.
        """
        X = self._validate(X)
        sample = ProfileSample(
            interior=X,
            censored=np.asarray(censored, dtype=float) if censored is not None
            else np.empty(0),
            section=self.section,
        )
        self.result_ = fit(
            sample, self.family, self.method, approx=self.m,
            options=FitOptions(restarts=self.restarts),
        )
        self.dist_ = self.result_.dist
        self.scale_ = self.dist_.scale
        self.shape_ = self.dist_.shape
        self.n_features_in_ = 1
        return self

    def score_samples(self, X):
        """Log profile density log g(y) under the fitted law."""
        check_is_fitted(self, "dist_")
        X = self._validate(X)
        approx = build_approximation(self.m)
        with np.errstate(divide="ignore"):
            return np.log(approx_profile_pdf(self.dist_, approx, X))

    def score(self, X, y=None):
        """Mean profile log-likelihood of X."""
        return float(np.mean(self.score_samples(X)))

    def sample(self, n, seed=None):
        """Simulate profile diameters from the fitted law."""
        check_is_fitted(self, "dist_")
        from .simulation import simulate_profiles

        return simulate_profiles(self.dist_, n, seed)
