"""Parametric families of 3-D particle diameters.

Three two-parameter families are supported, the ones common in
petrographic grain-size work:

* ``weibull``   -- scale ``lambda > 0``, shape ``k > 0``
* ``lognormal`` -- log-scale ``mu`` (any real, the scale is ``exp(mu)``),
  log-sd ``sigma > 0``
* ``posnormal`` -- a normal truncated to ``(0, inf)`` with positive mode,
  i.e. ``mu > 0`` and ``sigma > 0``

All densities live on ``(0, inf)``; the units are whatever length unit
the measurements use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ParameterError

FAMILIES = ("weibull", "lognormal", "posnormal")

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _norm_pdf(z):
    return np.exp(-0.5 * np.square(z)) / _SQRT2PI


@dataclass
class SizeDistribution:
    """A parametric law for sphere diameters.

    Parameters
    ----------
    family : str
        One of ``"weibull"``, ``"lognormal"``, ``"posnormal"``.
    scale : float
        lambda (weibull), mu of the log (lognormal, may be negative),
        or mu (posnormal, must be positive).
    shape : float
        k (weibull) or sigma (lognormal, posnormal).
    """

    family: str
    scale: float
    shape: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        self.scale = float(self.scale)
        self.shape = float(self.shape)
        if not np.isfinite(self.scale) or not np.isfinite(self.shape):
            raise ParameterError("parameters must be finite")
        if self.shape <= 0:
            raise ParameterError("shape parameter must be positive")
        if self.family != "lognormal" and self.scale <= 0:
            raise ParameterError(f"{self.family} scale parameter must be positive")

    # -- densities ---------------------------------------------------------

    def pdf(self, d):
        """Density f(d); zero for d <= 0."""
        d = np.asarray(d, dtype=float)
        scalar = d.ndim == 0
        d = np.atleast_1d(d)
        out = np.zeros_like(d)
        pos = (d > 0) & np.isfinite(d)
        if np.any(pos):
            out[pos] = self._pdf_pos(d[pos])
        return float(out[0]) if scalar else out

    def _pdf_pos(self, d):
        if self.family == "weibull":
            lam, k = self.scale, self.shape
            z = d / lam
            return (k / lam) * z ** (k - 1.0) * np.exp(-(z ** k))
        if self.family == "lognormal":
            mu, s = self.scale, self.shape
            return _norm_pdf((np.log(d) - mu) / s) / (d * s)
        mu, s = self.scale, self.shape
        return _norm_pdf((d - mu) / s) / (s * self._trunc_mass())

    def _trunc_mass(self):
        # P(N(mu, sigma^2) > 0)
        return special.ndtr(self.scale / self.shape)

    def cdf(self, d):
        """Distribution function F(d); zero for d <= 0."""
        d = np.asarray(d, dtype=float)
        scalar = d.ndim == 0
        d = np.atleast_1d(d)
        out = np.zeros_like(d)
        pos = d > 0
        if np.any(pos):
            out[pos] = self._cdf_pos(d[pos])
        if np.any(np.isinf(d)):
            out[np.isinf(d) & (d > 0)] = 1.0
        return float(out[0]) if scalar else out

    def _cdf_pos(self, d):
        if self.family == "weibull":
            return -np.expm1(-((d / self.scale) ** self.shape))
        if self.family == "lognormal":
            return special.ndtr((np.log(d) - self.scale) / self.shape)
        mu, s = self.scale, self.shape
        lo = special.ndtr(-mu / s)
        return (special.ndtr((d - mu) / s) - lo) / (1.0 - lo)

    # -- moments -----------------------------------------------------------

    def raw_moment(self, r: int) -> float:
        """E(D^r) for integer r >= 1."""
        if r < 1 or int(r) != r:
            raise ParameterError("moment order must be a positive integer")
        r = int(r)
        if self.family == "weibull":
            return float(self.scale ** r * special.gamma(1.0 + r / self.shape))
        if self.family == "lognormal":
            return float(np.exp(r * self.scale + 0.5 * r * r * self.shape ** 2))
        return self._truncnorm_moments(r)[r]

    def _truncnorm_moments(self, rmax: int):
        # recurrence for N(mu, sigma^2) truncated to (0, inf):
        # m_r = mu m_{r-1} + (r-1) sigma^2 m_{r-2}, the boundary term
        # vanishes for r >= 2 because the lower bound is 0
        mu, s = self.scale, self.shape
        hazard = _norm_pdf(mu / s) / self._trunc_mass()
        m = [1.0, mu + s * hazard]
        for r in range(2, rmax + 1):
            m.append(mu * m[r - 1] + (r - 1) * s * s * m[r - 2])
        return m

    def mean_diameter(self) -> float:
        """E(D). For weibull this is lambda * Gamma(1 + 1/k)."""
        return self.raw_moment(1)

    def median_diameter(self) -> float:
        if self.family == "weibull":
            return float(self.scale * math.log(2.0) ** (1.0 / self.shape))
        if self.family == "lognormal":
            return float(math.exp(self.scale))
        mu, s = self.scale, self.shape
        lo = special.ndtr(-mu / s)
        return float(mu + s * special.ndtri(0.5 * (1.0 + lo)))

    def partial_first_moment(self, z):
        """E(D; D <= z) = integral of t f(t) over (0, z], vectorized in z."""
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        out = np.zeros_like(z)
        pos = z > 0
        if np.any(pos):
            out[pos] = self._p1_pos(z[pos])
        return float(out[0]) if scalar else out

    def _p1_pos(self, z):
        if self.family == "weibull":
            lam, k = self.scale, self.shape
            c = 1.0 + 1.0 / k
            return lam * special.gamma(c) * special.gammainc(c, (z / lam) ** k)
        if self.family == "lognormal":
            mu, s = self.scale, self.shape
            return np.exp(mu + 0.5 * s * s) * special.ndtr((np.log(z) - mu) / s - s)
        mu, s = self.scale, self.shape
        alpha = -mu / s
        beta = (z - mu) / s
        num = mu * (special.ndtr(beta) - special.ndtr(alpha)) - s * (
            _norm_pdf(beta) - _norm_pdf(alpha)
        )
        return num / self._trunc_mass()

    def vw_mean_volume(self) -> float:
        """Volume-weighted mean sphere volume, (pi/6) E(D^6)/E(D^3)."""
        if self.family == "posnormal":
            m = self._truncnorm_moments(6)
            m3, m6 = m[3], m[6]
        else:
            m3, m6 = self.raw_moment(3), self.raw_moment(6)
        return float(math.pi / 6.0 * m6 / m3)

    # -- sampling ----------------------------------------------------------

    def sample(self, n: int, seed=None) -> np.ndarray:
        """n i.i.d. diameters from f, reproducible per seed."""
        rng = np.random.default_rng(seed)
        if n == 0:
            return np.empty(0)
        if self.family == "weibull":
            return self.scale * rng.weibull(self.shape, size=n)
        if self.family == "lognormal":
            return rng.lognormal(self.scale, self.shape, size=n)
        mu, s = self.scale, self.shape
        lo = special.ndtr(-mu / s)
        u = rng.random(n)
        return mu + s * special.ndtri(lo + u * (1.0 - lo))

    def sample_size_weighted(self, n: int, seed=None) -> np.ndarray:
        """n i.i.d. draws from the size-weighted law t f(t)/E(D).

        Exact transforms exist for weibull (a power of a gamma variate)
        and lognormal (mean shift of the log); posnormal falls back to
        inverse-CDF interpolation on a dense grid.
        """
        rng = np.random.default_rng(seed)
        if n == 0:
            return np.empty(0)
        if self.family == "weibull":
            lam, k = self.scale, self.shape
            # if T ~ t f(t)/E(D) then (T/lam)^k ~ Gamma(1 + 1/k)
            return lam * rng.gamma(1.0 + 1.0 / k, size=n) ** (1.0 / k)
        if self.family == "lognormal":
            return rng.lognormal(self.scale + self.shape ** 2, self.shape, size=n)
        grid, cdf = self._size_weighted_grid()
        return np.interp(rng.random(n), cdf, grid)

    def _size_weighted_grid(self, n_grid: int = 8192):
        mu, s = self.scale, self.shape
        hi = mu + 12.0 * s
        grid = np.linspace(0.0, hi, n_grid)
        cdf = self.partial_first_moment(grid) / self.mean_diameter()
        cdf[-1] = 1.0
        return grid, np.minimum(cdf, 1.0)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"family": self.family, "scale": self.scale, "shape": self.shape}

    @classmethod
    def from_dict(cls, d: dict) -> "SizeDistribution":
        return cls(d["family"], d["scale"], d["shape"])
