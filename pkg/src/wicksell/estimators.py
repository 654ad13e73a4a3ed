"""Point estimation of diameter-law parameters from profile measurements.

Methods: maximum likelihood on the band-sum profile density (ordinary,
censored, and section-weighted variants), method of moments, and
minimum-distance (Cramer-von Mises) estimation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .distributions import FAMILIES, SizeDistribution
from .errors import DataError, ParameterError
from .profile_density import (
    DEFAULT_M,
    _as_approx,
    approx_profile_pdf,
    build_approximation,
    profile_cdf,
    weighted_profile_pdf,
)


@dataclass
class ProfileSample:
    """Measured profile effective diameters from one section.

    ``interior`` are profiles fully inside the section; ``censored``
    are the measured sizes of profiles clipped by the section boundary,
    each a lower bound on the full profile diameter.
    """

    interior: np.ndarray
    censored: np.ndarray = field(default_factory=lambda: np.empty(0))
    section: tuple[float, float] | None = None
    unit: str = ""

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=float).ravel()
        self.censored = np.asarray(self.censored, dtype=float).ravel()
        if self.interior.size and np.any(self.interior <= 0):
            raise DataError("interior profile diameters must be positive")
        if self.censored.size and np.any(self.censored <= 0):
            raise DataError("censored measurements must be positive")
        if self.section is not None:
            s1, s2 = self.section
            if s1 <= 0 or s2 <= 0:
                raise DataError("section dimensions must be positive")
            if self.interior.size and np.max(self.interior) >= min(s1, s2):
                raise DataError(
                    "interior diameters must be smaller than the section"
                )

    @property
    def n_interior(self) -> int:
        return int(self.interior.size)


@dataclass
class FitResult:
    """Fitted diameter law plus diagnostics."""

    dist: SizeDistribution
    method: str
    logL: float | None = None
    m_used: int | None = None
    converged: bool = True
    iterations: int = 0
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "family": self.dist.family,
            "scale": self.dist.scale,
            "shape": self.dist.shape,
            "method": self.method,
            "logL": self.logL,
            "m": self.m_used,
            "converged": self.converged,
            "iterations": self.iterations,
            "flags": list(self.flags),
            "mean_diameter": self.dist.mean_diameter(),
        }


@dataclass
class FitOptions:
    """Knobs for the numerical fitters."""

    restarts: int = 5          # total optimizer starts (first is MoM)
    xatol: float = 1e-6
    logl_rtol: float = 1e-8
    max_iter: int = 2000
    k_bounds: tuple[float, float] = (0.05, 500.0)


def effective_diameters(areas, formula: str = "area-equivalent") -> np.ndarray:
    """Equivalent-circle diameters from measured profile areas.

    ``"area-equivalent"`` is Y = 2 sqrt(S/pi), the diameter of the
    circle with the same area.  ``"legacy"`` is the sqrt(S/(4 pi))
    variant found in some write-ups; it is off by a factor of 4 from
    area equivalence and is provided only for compatibility.
    """
    areas = np.asarray(areas, dtype=float).ravel()
    if areas.size and np.any(areas <= 0):
        raise DataError("profile areas must be positive")
    if formula == "area-equivalent":
        return 2.0 * np.sqrt(areas / np.pi)
    if formula == "legacy":
        return np.sqrt(areas / (4.0 * np.pi))
    raise ParameterError(f"unknown diameter formula {formula!r}")


# -- likelihood --------------------------------------------------------------

MODES = ("ordinary", "censored", "weighted")


def log_likelihood(
    sample: ProfileSample,
    dist: SizeDistribution,
    approx=DEFAULT_M,
    mode: str = "ordinary",
) -> float:
    """Log-likelihood of a profile sample under the fitted-band density.

    ordinary: sum log g(y_j) over interior profiles;
    censored: adds sum log(1 - G(y_j)) over boundary-clipped profiles;
    weighted: uses the section-weighted density g_w instead of g.

    Returns -inf (not an exception) when any observation has zero
    density.
    """
    if mode not in MODES:
        raise ParameterError(f"unknown likelihood mode {mode!r}")
    approx = _as_approx(approx)
    if sample.n_interior == 0 and not (mode == "censored" and sample.censored.size):
        raise DataError("sample has no interior measurements")
    if mode == "weighted":
        if sample.section is None:
            raise DataError("weighted likelihood requires section dimensions")
        dens = weighted_profile_pdf(
            dist, approx, sample.interior, *sample.section
        )
    else:
        dens = approx_profile_pdf(dist, approx, sample.interior)
    if np.any(dens <= 0):
        return -np.inf
    total = _stable_sum(np.log(dens))
    if mode == "censored" and sample.censored.size:
        surv = 1.0 - profile_cdf(dist, approx, sample.censored)
        if np.any(surv <= 0):
            return -np.inf
        total += _stable_sum(np.log(surv))
    return float(total)


def _stable_sum(values: np.ndarray) -> float:
    # order-independent up to ~1e-16 relative: pairwise over a sorted copy
    return float(np.sum(np.sort(values)))


# -- parameter transforms -----------------------------------------------------

def _to_vector(dist: SizeDistribution) -> np.ndarray:
    if dist.family == "lognormal":
        return np.array([dist.scale, math.log(dist.shape)])
    return np.array([math.log(dist.scale), math.log(dist.shape)])


def _from_vector(family: str, vec) -> SizeDistribution:
    if family == "lognormal":
        return SizeDistribution(family, vec[0], math.exp(vec[1]))
    return SizeDistribution(family, math.exp(vec[0]), math.exp(vec[1]))


# -- maximum likelihood -------------------------------------------------------

def _fit_ml_mode(sample, family, approx, mode, options):
    approx = _as_approx(approx)
    options = options or FitOptions()
    n_obs = sample.n_interior + (sample.censored.size if mode == "censored" else 0)
    if n_obs < 3:
        raise DataError("need at least 3 usable measurements for ML")

    def negloglik(vec):
        if np.any(np.abs(vec) > 50):
            return np.inf
        try:
            dist = _from_vector(family, vec)
        except ParameterError:
            return np.inf
        ll = log_likelihood(sample, dist, approx, mode)
        return np.inf if not np.isfinite(ll) else -ll

    starts = _ml_starts(sample, family, options)
    best = None
    total_iter = 0
    for vec0 in starts:
        f0 = negloglik(vec0)
        fatol = options.logl_rtol * max(1.0, abs(f0 if np.isfinite(f0) else 1.0))
        res = optimize.minimize(
            negloglik,
            vec0,
            method="Nelder-Mead",
            options={
                "xatol": options.xatol,
                "fatol": fatol,
                "maxiter": options.max_iter,
                "maxfev": options.max_iter,
            },
        )
        total_iter += res.nit
        if best is None or res.fun < best.fun:
            best = res
    flags = []
    converged = bool(best.success) and np.isfinite(best.fun)
    if not converged:
        flags.append("optimizer-not-converged")
    if np.any(np.abs(best.x) > 45):
        converged = False
        flags.append("parameter-at-bound")
    dist = _from_vector(family, np.clip(best.x, -50, 50))
    return FitResult(
        dist=dist,
        method={"ordinary": "ML", "censored": "ML_censored", "weighted": "ML_weighted"}[mode],
        logL=float(-best.fun) if np.isfinite(best.fun) else None,
        m_used=approx.m,
        converged=converged,
        iterations=total_iter,
        flags=tuple(flags),
    )


def _ml_starts(sample, family, options):
    try:
        mom = fit_mom(sample, family)
        vec0 = _to_vector(mom.dist)
    except (DataError, ParameterError):
        vec0 = _heuristic_start(sample, family)
    offsets = [
        np.zeros(2),
        np.array([0.25, 0.0]),
        np.array([-0.25, 0.0]),
        np.array([0.0, 0.3]),
        np.array([0.0, -0.3]),
        np.array([0.2, -0.2]),
        np.array([-0.2, 0.2]),
    ]
    n = max(1, int(options.restarts))
    return [vec0 + off for off in offsets[:n]]


def _heuristic_start(sample, family):
    y = sample.interior if sample.n_interior else sample.censored
    ybar = float(np.mean(y))
    # E(Y) ~ (pi/4) E(D) up to weighting; crude but only a start
    d0 = max(4.0 * ybar / math.pi, 1e-6)
    if family == "lognormal":
        return np.array([math.log(d0), math.log(0.5)])
    return np.array([math.log(d0), 0.0])


def fit_mle(sample, family, approx=DEFAULT_M, options=None) -> FitResult:
    """Ordinary ML: interior profiles only, censored list ignored."""
    return _fit_ml_mode(sample, family, approx, "ordinary", options)


def fit_mle_censored(sample, family, approx=DEFAULT_M, options=None) -> FitResult:
    """ML with boundary-clipped profiles entering as censored terms."""
    return _fit_ml_mode(sample, family, approx, "censored", options)


def fit_mle_weighted(sample, family, approx=DEFAULT_M, options=None) -> FitResult:
    """ML with the section-weighted density; needs section dimensions."""
    if sample.section is None:
        raise DataError("weighted fit requires section dimensions")
    return _fit_ml_mode(sample, family, approx, "weighted", options)


# -- method of moments --------------------------------------------------------

# ratio of second to squared first profile moment for a degenerate
# diameter: E(Y^2)/E(Y)^2 = (2/3) / (pi/4)^2
_MOM_RATIO_FLOOR = 32.0 / (3.0 * math.pi ** 2)


def _weibull_moment_ratio(k):
    return (
        _MOM_RATIO_FLOOR
        * special.gamma(1.0 + 3.0 / k)
        * special.gamma(1.0 + 1.0 / k)
        / special.gamma(1.0 + 2.0 / k) ** 2
    )


def fit_mom_from_moments(
    mean_y: float, mean_y2: float, family: str, options: FitOptions | None = None
) -> FitResult:
    """Solve the profile-moment equations for the diameter-law parameters.

    Uses E(Y) = (pi/4) E(D^2)/E(D) and E(Y^2) = (2/3) E(D^3)/E(D), the
    size-weighted sphere-profile moments.  For the log-normal family
    this yields closed forms; for weibull a one-dimensional root in the
    shape; for posnormal a two-dimensional least-squares match of the
    profile mean and variance.
    """
    options = options or FitOptions()
    if mean_y <= 0 or mean_y2 <= 0:
        raise DataError("profile moments must be positive")
    flags = []
    ratio = mean_y2 / mean_y ** 2

    if family == "lognormal":
        s2 = math.log(ratio) - math.log(_MOM_RATIO_FLOOR)
        if s2 <= 0:
            s2 = 0.0
            flags.append("variance-clamped")
        sigma = math.sqrt(s2) if s2 > 0 else 1e-8
        mu = math.log(4.0 * mean_y / math.pi) - 1.5 * s2
        dist = SizeDistribution("lognormal", mu, sigma)
        return FitResult(dist, "MoM", converged=True, flags=tuple(flags))

    if family == "weibull":
        klo, khi = options.k_bounds
        f = lambda k: _weibull_moment_ratio(k) - ratio
        if f(klo) < 0:
            k = klo
            flags.append("shape-at-bound")
        elif f(khi) > 0:
            k = khi
            flags.append("shape-at-bound")
        else:
            k = optimize.brentq(f, klo, khi, xtol=1e-12, rtol=1e-14)
        lam = (
            4.0
            * mean_y
            * special.gamma(1.0 + 1.0 / k)
            / (math.pi * special.gamma(1.0 + 2.0 / k))
        )
        dist = SizeDistribution("weibull", lam, k)
        return FitResult(dist, "MoM", converged="shape-at-bound" not in flags,
                         flags=tuple(flags))

    if family != "posnormal":
        raise ParameterError(f"unknown family {family!r}")

    var_y = mean_y2 - mean_y ** 2
    if var_y <= 0:
        var_y = 1e-12
        flags.append("variance-clamped")

    def residuals(vec):
        dist = _from_vector("posnormal", vec)
        ey = math.pi / 4.0 * dist.raw_moment(2) / dist.raw_moment(1)
        ey2 = 2.0 / 3.0 * dist.raw_moment(3) / dist.raw_moment(1)
        return [ey - mean_y, (ey2 - ey ** 2) - var_y]

    best = None
    for mu0, s0 in [(4 * mean_y / math.pi, math.sqrt(var_y) * 2),
                    (mean_y, mean_y), (2 * mean_y, mean_y / 2)]:
        vec0 = np.log([max(mu0, 1e-6), max(s0, 1e-6)])
        sol = optimize.least_squares(
            residuals, vec0, xtol=1e-15, ftol=1e-15, gtol=1e-15
        )
        if best is None or sol.cost < best.cost:
            best = sol
        if best.cost < 1e-20:
            break
    converged = best.cost < 1e-12 * max(1.0, mean_y ** 2)
    if not converged:
        flags.append("moment-match-residual")
    dist = _from_vector("posnormal", best.x)
    return FitResult(dist, "MoM", converged=converged, flags=tuple(flags))


def fit_mom(sample: ProfileSample, family: str, options=None) -> FitResult:
    """Method of moments on the interior profile diameters."""
    if sample.n_interior < 2:
        raise DataError("need at least 2 interior measurements for MoM")
    y = sample.interior
    return fit_mom_from_moments(
        float(np.mean(y)), float(np.mean(y ** 2)), family, options
    )


# -- minimum distance ---------------------------------------------------------

def cvm_distance(sample_y: np.ndarray, dist, approx) -> float:
    """Cramer-von Mises statistic between empirical and model profile CDFs."""
    y = np.sort(np.asarray(sample_y, dtype=float))
    n = y.size
    g = profile_cdf(dist, approx, y)
    j = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + np.sum((g - (2 * j - 1) / (2 * n)) ** 2))


def fit_mde(sample, family, approx=DEFAULT_M, options=None) -> FitResult:
    """Minimum Cramer-von Mises distance between empirical and model CDFs.

    Multi-start with explicit bound checks: the objective has flat
    plateaus far from the truth where one-start optimizers stall.
    """
    approx = _as_approx(approx)
    options = options or FitOptions()
    if sample.n_interior < 3:
        raise DataError("need at least 3 interior measurements for MDE")
    y = np.sort(sample.interior)

    def objective(vec):
        if np.any(np.abs(vec) > 50):
            return np.inf
        try:
            dist = _from_vector(family, vec)
        except ParameterError:
            return np.inf
        return cvm_distance(y, dist, approx)

    best = None
    total_iter = 0
    for vec0 in _ml_starts(sample, family, options):
        res = optimize.minimize(
            objective,
            vec0,
            method="Nelder-Mead",
            options={"xatol": options.xatol, "fatol": 1e-12,
                     "maxiter": options.max_iter, "maxfev": options.max_iter},
        )
        total_iter += res.nit
        if best is None or res.fun < best.fun:
            best = res
    flags = []
    converged = bool(best.success) and np.isfinite(best.fun)
    if not converged:
        flags.append("optimizer-not-converged")
    if np.any(np.abs(best.x) > 45):
        converged = False
        flags.append("parameter-at-bound")
    dist = _from_vector(family, np.clip(best.x, -50, 50))
    return FitResult(
        dist=dist,
        method="MDE",
        m_used=approx.m,
        converged=converged,
        iterations=total_iter,
        flags=tuple(flags),
    )


_METHOD_DISPATCH = {
    "ml": fit_mle,
    "ml-censored": fit_mle_censored,
    "ml-weighted": fit_mle_weighted,
    "mom": lambda sample, family, approx=DEFAULT_M, options=None: fit_mom(
        sample, family, options
    ),
    "mde": fit_mde,
}


def fit(sample, family, method="ml", approx=DEFAULT_M, options=None) -> FitResult:
    """Dispatch to one of the fitters by method tag."""
    try:
        fn = _METHOD_DISPATCH[method.lower()]
    except KeyError:
        raise ParameterError(f"unknown method {method!r}") from None
    return fn(sample, family, approx=approx, options=options)
