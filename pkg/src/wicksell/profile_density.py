"""Densities of circular profile diameters on a random planar section.

The workhorse is a finite-sum approximation built by replacing each
sphere with the solid of revolution of a regular 4m-gon.  The section
profile of such a solid falls in one of m bands, which turns the
classical improper integral into a short sum of CDF differences.  The
raw sum (``intermediate_profile_pdf``) slightly shortens the profiles;
multiplying the argument by the coefficient ``a = pi/(2m sin(pi/2m))``
restores the exact profile mean, giving ``approx_profile_pdf``.

``exact_profile_pdf`` evaluates the classical improper integral by
adaptive quadrature and serves as the oracle for the approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .distributions import SizeDistribution
from .errors import NumericalError, ParameterError


@dataclass(frozen=True)
class PolygonApproximation:
    """Precomputed coefficients of the m-term profile-density sum.

    ``p[i-1]`` is the probability that the profile falls in band i,
    ``x`` holds the band edges ``cos(i pi / 2m)`` for i = 0..m (so
    ``x[0] = 1`` and ``x[m] = 0``), and ``a`` rescales the density so
    its mean matches the true sphere-profile mean.
    """

    m: int
    p: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    a: float = 0.0


def build_approximation(m: int) -> PolygonApproximation:
    """Coefficients {p_i, x_i, a} for an m-band approximation."""
    if m < 1 or int(m) != m:
        raise ParameterError("number of bands m must be a positive integer")
    m = int(m)
    i = np.arange(m + 1)
    half = np.pi / (2.0 * m)
    sines = np.sin(i * half)
    p = np.diff(sines)
    x = np.cos(i * half)
    x[m] = 0.0
    a = np.pi / (2.0 * m * math.sin(half))
    return PolygonApproximation(m=m, p=p, x=x, a=a)


DEFAULT_M = 15


def _as_approx(approx) -> PolygonApproximation:
    if isinstance(approx, PolygonApproximation):
        return approx
    return build_approximation(int(approx))


def intermediate_profile_pdf(dist: SizeDistribution, approx, y_s):
    """Unscaled band-sum density g*(y_s); mean is (m/2) sin(pi/2m) E(D)."""
    approx = _as_approx(approx)
    y_s = np.asarray(y_s, dtype=float)
    scalar = y_s.ndim == 0
    y = np.atleast_1d(y_s).astype(float)
    out = np.zeros_like(y)
    pos = y > 0
    if np.any(pos):
        out[pos] = _band_sum_pdf(dist, approx, y[pos])
    return float(out[0]) if scalar else out


def _band_sum_pdf(dist, approx, y):
    """sum_i p_i (F(y/x_i) - F(y/x_{i-1})) / (x_{i-1} - x_i), over E(D)."""
    x, p, m = approx.x, approx.p, approx.m
    # F at y / x_i for i = 0..m; the last band has x_m = 0, where the
    # argument is infinite and F = 1 (explicit branch, no 1/0 arithmetic)
    fmat = np.empty((m + 1, y.size))
    with np.errstate(over="ignore"):
        # arguments are strictly positive here, so the masked public cdf
        # wrapper is bypassed (this is the optimizer's hot path)
        fmat[:m] = dist._cdf_pos(np.outer(1.0 / x[:m], y))
    fmat[m] = 1.0
    weights = p / (x[:-1] - x[1:])
    g = weights @ (fmat[1:] - fmat[:-1])
    return g / dist.mean_diameter()


def approx_profile_pdf(dist: SizeDistribution, approx, y):
    """Profile-diameter density g(y) = g*(y/a)/a, mean-preserving."""
    approx = _as_approx(approx)
    y = np.asarray(y, dtype=float)
    return intermediate_profile_pdf(dist, approx, y / approx.a) / approx.a


def exact_profile_pdf(dist: SizeDistribution, y, tol: float = 1e-9):
    """Profile density from the classical improper integral.

    g(y) = (y/E(D)) * integral_y^inf f(t)/sqrt(t^2 - y^2) dt.  The
    endpoint singularity is removed by s = sqrt(t^2 - y^2), after which
    the integrand is f(sqrt(y^2 + s^2))/sqrt(y^2 + s^2) on (0, inf).
    """
    y_arr = np.asarray(y, dtype=float)
    scalar = y_arr.ndim == 0
    ys = np.atleast_1d(y_arr)
    ed = dist.mean_diameter()
    out = np.zeros_like(ys)
    for j, yj in enumerate(ys):
        if yj <= 0:
            continue
        val, err = quad(
            lambda s: dist.pdf(math.sqrt(yj * yj + s * s))
            / math.sqrt(yj * yj + s * s),
            0.0,
            np.inf,
            epsabs=tol,
            epsrel=tol,
            limit=400,
        )
        if err > max(tol * 100, 1e-6 * abs(val)) and err > 1e-10:
            raise NumericalError(
                f"profile-density quadrature did not converge at y={yj}: "
                f"value {val}, error estimate {err}"
            )
        out[j] = yj * val / ed
    return float(out[0]) if scalar else out


def profile_cdf(dist: SizeDistribution, approx, y):
    """G(y), the CDF of the approximate profile density.

    Each band term integrates in closed form through the partial first
    moment of the diameter law, so no quadrature is needed:
    int_0^y F(u/c) du = y F(y/c) - c * E(D; D <= y/c).
    """
    approx = _as_approx(approx)
    y_in = np.asarray(y, dtype=float)
    scalar = y_in.ndim == 0
    y = np.atleast_1d(y_in).astype(float)
    out = np.zeros_like(y)
    out[np.isinf(y) & (y > 0)] = 1.0
    pos = (y > 0) & np.isfinite(y)
    if not np.any(pos):
        return float(out[0]) if scalar else out
    yp = y[pos] / approx.a
    x, p, m = approx.x, approx.p, approx.m
    imat = np.empty((m + 1, yp.size))
    with np.errstate(over="ignore"):
        z = np.outer(1.0 / x[:m], yp)
        imat[:m] = yp * dist._cdf_pos(z) - x[:m, None] * dist._p1_pos(z)
    imat[m] = yp
    weights = p / (x[:-1] - x[1:])
    g = (weights @ (imat[1:] - imat[:-1])) / dist.mean_diameter()
    out[pos] = np.clip(g, 0.0, 1.0)
    return float(out[0]) if scalar else out


def profile_mean(dist: SizeDistribution) -> float:
    """E(Y) = (pi/4) E(D^2)/E(D), exact for every m by construction."""
    return float(math.pi / 4.0 * dist.raw_moment(2) / dist.raw_moment(1))


# normalising constants of the weighted density, keyed by
# (family, scale, shape, s1, s2, m): expensive, reused across an
# optimizer's likelihood evaluations at the same parameter point
_WEIGHT_NORM_CACHE: dict = {}
_WEIGHT_NORM_CACHE_MAX = 4096


def _weight_norm(dist, approx, s1, s2):
    key = (dist.family, dist.scale, dist.shape, s1, s2, approx.m)
    z = _WEIGHT_NORM_CACHE.get(key)
    if z is None:
        # integrate only over the profile law's effective support: for a
        # section much larger than the particles, quadrature over the full
        # (0, smin) would miss the density spike entirely
        smin = min(s1, s2)
        hi = 2.0 * dist.mean_diameter()
        while profile_cdf(dist, approx, hi) < 1.0 - 1e-12 and hi < smin:
            hi *= 2.0
        upper = min(smin, hi)
        z, _ = quad(
            lambda u: (s1 - u) * (s2 - u) * approx_profile_pdf(dist, approx, u),
            0.0,
            upper,
            epsabs=1e-12,
            epsrel=1e-9,
            limit=200,
        )
        if len(_WEIGHT_NORM_CACHE) >= _WEIGHT_NORM_CACHE_MAX:
            _WEIGHT_NORM_CACHE.clear()
        _WEIGHT_NORM_CACHE[key] = z
    return z


def weighted_profile_pdf(dist: SizeDistribution, approx, y, s1: float, s2: float):
    """Density of in-section profiles, g_w(y) ~ (s1-y)(s2-y) g(y).

    The weight is the sampling probability of a profile whose
    circumscribed square must fit inside an s1 x s2 section.  Zero
    outside (0, min(s1, s2)).
    """
    if s1 <= 0 or s2 <= 0:
        raise ParameterError("section dimensions must be positive")
    approx = _as_approx(approx)
    y_in = np.asarray(y, dtype=float)
    scalar = y_in.ndim == 0
    y = np.atleast_1d(y_in).astype(float)
    out = np.zeros_like(y)
    inside = (y > 0) & (y < min(s1, s2))
    if np.any(inside):
        z = _weight_norm(dist, approx, float(s1), float(s2))
        w = (s1 - y[inside]) * (s2 - y[inside])
        out[inside] = w * approx_profile_pdf(dist, approx, y[inside]) / z
    return float(out[0]) if scalar else out
