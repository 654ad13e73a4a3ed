"""Interval estimation and model selection.

Likelihood-ratio (Wilks) confidence regions with small-sample inflated
critical values, Monte-Carlo calibration of those critical values,
parametric bootstrap with bias correction, and AIC family comparison.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .distributions import SizeDistribution
from .errors import DataError, ParameterError
from .estimators import (
    DEFAULT_M,
    FitOptions,
    FitResult,
    ProfileSample,
    _from_vector,
    _to_vector,
    fit_mle,
    fit_mom,
    log_likelihood,
    _METHOD_DISPATCH,
)
from .profile_density import _as_approx
from .simulation import simulate_profiles


# -- critical values ----------------------------------------------------------

# small-sample inflation of the chi-square quantile level, calibrated by
# simulation: the deviance quantile sits slightly above its asymptote
# for small n.  Beyond ~1000 observations the plain quantile is used.
_LEVEL_INFLATION = ((18, 19, 0.02), (20, 50, 0.01), (51, 1000, 0.005))


def critical_value(p: float, n: int, dims: int = 2, family=None, **sim_kwargs):
    """Deviance threshold for a p-coverage region with n observations.

    For n >= 18, an inflated chi-square quantile (level p plus a
    simulation-calibrated bump that decays with n).  For smaller n the
    tabulated rule is unreliable and the threshold is simulated, which
    requires ``family`` (and accepts ``shape``, ``n_sims``, ``seed``).
    """
    if dims not in (1, 2):
        raise ParameterError("dims must be 1 or 2")
    if not 0 < p < 1:
        raise ParameterError("coverage must be in (0, 1)")
    if n < 18:
        warnings.warn(
            f"n={n} is below the tabulated range; simulating the critical value",
            stacklevel=2,
        )
        if family is None:
            raise ParameterError("simulation fallback needs a family")
        q, _ = simulate_critical_quantiles(
            family, sim_kwargs.pop("shape", 1.0), n, p, dims=dims, **sim_kwargs
        )
        return q
    level = p
    for lo, hi, bump in _LEVEL_INFLATION:
        if lo <= n <= hi:
            level = p + bump
            break
    return float(stats.chi2.ppf(level, dims))


def _profile_logl_mean_fixed(sample, family, approx, mean_d, options):
    """Max log-likelihood over the family with the mean diameter pinned."""

    def scale_for_shape(shape):
        if family == "weibull":
            from scipy.special import gamma

            return mean_d / gamma(1.0 + 1.0 / shape)
        if family == "lognormal":
            return math.log(mean_d) - 0.5 * shape ** 2
        # posnormal: solve mu from mean = mu + sigma * hazard(mu/sigma)
        def eq(mu):
            return SizeDistribution("posnormal", mu, shape).mean_diameter() - mean_d
        hi = mean_d
        lo = 1e-9 * max(mean_d, 1.0)
        if eq(lo) > 0:  # even mu -> 0+ gives a larger mean: no solution
            return None
        return optimize.brentq(eq, lo, hi, xtol=1e-12)

    def neg(log_shape):
        shape = math.exp(float(log_shape[0]))
        try:
            scale = scale_for_shape(shape)
            if scale is None or scale <= 0:
                return np.inf
            dist = SizeDistribution(family, scale, shape)
        except (ParameterError, ValueError):
            return np.inf
        ll = log_likelihood(sample, dist, approx)
        return np.inf if not np.isfinite(ll) else -ll

    start = np.array([0.0])
    try:
        mom = fit_mom(sample, family)
        start = np.array([math.log(mom.dist.shape)])
    except (DataError, ParameterError):
        pass
    res = optimize.minimize(
        neg, start, method="Nelder-Mead",
        options={"xatol": options.xatol, "fatol": 1e-7, "maxiter": 500},
    )
    return -res.fun


def simulate_critical_quantiles(
    family: str,
    shape: float,
    n: int,
    p: float,
    n_sims: int = 5000,
    seed=None,
    dims: int = 2,
    approx=DEFAULT_M,
    scale: float = 1.0,
):
    """Monte-Carlo quantile of the deviance 2(logL(theta-hat) - logL(theta)).

    Samples ``n_sims`` profile samples of size n from the given law,
    refits each by ML, and returns (quantile, mc_stderr).  ``dims=2``
    uses the full two-parameter deviance; ``dims=1`` profiles out the
    mean diameter.
    """
    if n < 5:
        raise ParameterError("n must be at least 5")
    if n_sims < 100:
        raise ParameterError("need at least 100 simulations")
    if family == "posnormal" and scale == 1.0:
        scale = 3.0 * shape  # keep the mode well inside the positive axis
    true = SizeDistribution(family, scale, shape)
    approx = _as_approx(approx)
    # quantile MC error dominates: a parameter tolerance of 1e-4 shifts
    # the deviance by ~n * xatol^2, negligible here
    options = FitOptions(restarts=1, xatol=1e-4)
    ss = np.random.SeedSequence(seed)
    deviances = np.empty(n_sims)
    for b, child in enumerate(ss.spawn(n_sims)):
        y = simulate_profiles(true, n, child)
        sample = ProfileSample(interior=y)
        fit = fit_mle(sample, family, approx, options)
        ll_true = log_likelihood(sample, true, approx)
        if dims == 2:
            ll_ref = ll_true
        else:
            ll_ref = _profile_logl_mean_fixed(
                sample, family, approx, true.mean_diameter(), options
            )
        deviances[b] = 2.0 * max(fit.logL - ll_ref, 0.0)
    q = float(np.quantile(deviances, p))
    # stderr of the sample quantile via a cheap nonparametric bootstrap
    rng = np.random.default_rng(ss.spawn(1)[0])
    reps = np.quantile(
        rng.choice(deviances, size=(200, n_sims), replace=True), p, axis=1
    )
    return q, float(np.std(reps))


# -- likelihood-ratio regions -------------------------------------------------

@dataclass
class ConfidenceRegion:
    """Accepted (scale, shape) points of a likelihood-ratio region."""

    family: str
    mle: tuple[float, float]
    logL_max: float
    coverage: float
    critical_value: float
    critical_value_1d: float
    n: int
    accepted: np.ndarray = field(repr=False)   # columns: scale, shape, logL
    proposal_sd: tuple[float, float] = (0.0, 0.0)
    flags: tuple[str, ...] = ()
    derived_ranges: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mle": list(self.mle),
            "logL_max": self.logL_max,
            "coverage": self.coverage,
            "critical_value": self.critical_value,
            "critical_value_1d": self.critical_value_1d,
            "n": self.n,
            "n_accepted": int(self.accepted.shape[0]),
            "flags": list(self.flags),
            "derived_ranges": {
                k: list(v) for k, v in self.derived_ranges.items()
            },
        }

    def accepted_tsv(self) -> str:
        lines = ["scale\tshape\tlogL"]
        for row in self.accepted:
            lines.append(f"{row[0]:.8g}\t{row[1]:.8g}\t{row[2]:.8g}")
        return "\n".join(lines) + "\n"


def _pilot_parameter_sd(sample, family, fit, approx, n_boot, seed, options):
    """Parameter stdevs from a small parametric bootstrap."""
    ss = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    reps = []
    for child in ss.spawn(n_boot):
        y = simulate_profiles(fit.dist, sample.n_interior, child)
        try:
            r = fit_mle(ProfileSample(interior=y), family, approx, options)
        except (DataError, ParameterError):
            continue
        if r.converged:
            reps.append((r.dist.scale, r.dist.shape))
    if len(reps) < max(10, n_boot // 4):
        raise DataError("pilot bootstrap failed too often")
    reps = np.asarray(reps)
    return np.std(reps, axis=0)


def likelihood_ratio_region(
    sample: ProfileSample,
    family: str,
    fit: FitResult,
    p: float = 0.95,
    n_points: int = 50000,
    seed=None,
    approx=DEFAULT_M,
    proposal_sd=None,
    pilot_n_boot: int = 200,
    functionals: dict | None = None,
) -> ConfidenceRegion:
    """Sampled Wilks confidence region around a converged ML fit.

    Candidate (scale, shape) points are drawn from positive-normal
    proposals centred at the MLE, with stdevs five times the pilot
    bootstrap estimate (or ``proposal_sd`` when given); points whose
    deviance clears the two-dimensional critical value are kept.
    ``functionals`` maps names to ``f(dist) -> float``; their ranges
    over the one-dimensional-threshold subset are recorded.
    """
    if not fit.converged:
        raise DataError("region requires a converged fit")
    if n_points < 100:
        raise ParameterError("need at least 100 candidate points")
    approx = _as_approx(approx)
    options = FitOptions(restarts=1)
    n = sample.n_interior
    crit2 = critical_value(p, n, 2, family=family)
    crit1 = critical_value(p, n, 1, family=family)
    ss = np.random.SeedSequence(seed)
    if proposal_sd is None:
        sd = _pilot_parameter_sd(
            sample, family, fit, approx, pilot_n_boot, ss.spawn(1)[0], options
        )
    else:
        sd = np.asarray(proposal_sd, dtype=float)
    widths = 5.0 * sd
    center = np.array([fit.dist.scale, fit.dist.shape])
    flags = []
    rng = np.random.default_rng(ss.spawn(1)[0])
    for attempt in range(2):
        pts = _positive_normal_points(rng, center, widths, n_points, family)
        logls = np.array(
            [
                log_likelihood(
                    sample, SizeDistribution(family, sc, sh), approx
                )
                for sc, sh in pts
            ]
        )
        keep = 2.0 * (fit.logL - logls) <= crit2
        if keep.sum() >= 2:
            break
        widths = widths * 2.0
        flags.append("proposal-widened")
    else:
        flags.append("degenerate-region")
    accepted = np.column_stack([pts[keep], logls[keep]])
    # the MLE itself always belongs to the region
    accepted = np.vstack([[center[0], center[1], fit.logL], accepted])
    region = ConfidenceRegion(
        family=family,
        mle=(float(center[0]), float(center[1])),
        logL_max=float(fit.logL),
        coverage=p,
        critical_value=crit2,
        critical_value_1d=crit1,
        n=n,
        accepted=accepted,
        proposal_sd=(float(sd[0]), float(sd[1])),
        flags=tuple(flags),
    )
    if functionals is None:
        functionals = {"mean_diameter": lambda d: d.mean_diameter()}
    for name, fn in functionals.items():
        region.derived_ranges[name] = scalar_range(region, fn, p, n)
    return region


def _positive_normal_points(rng, center, widths, n_points, family):
    """Proposal draws, truncated to the valid parameter domain."""
    out = np.empty((n_points, 2))
    have = 0
    while have < n_points:
        draw = rng.normal(center, widths, size=(2 * (n_points - have), 2))
        ok = draw[:, 1] > 0
        if family != "lognormal":
            ok &= draw[:, 0] > 0
        draw = draw[ok][: n_points - have]
        out[have : have + draw.shape[0]] = draw
        have += draw.shape[0]
    return out


def scalar_range(region: ConfidenceRegion, functional, p=None, n=None):
    """[min, max] of a scalar functional over the dims=1 subset.

    ``functional`` maps a SizeDistribution to a float.  Points kept are
    those whose deviance clears the one-dimensional critical value.
    """
    if region.accepted.size == 0:
        raise DataError("region has no accepted points")
    crit1 = region.critical_value_1d
    if p is not None and n is not None and p != region.coverage:
        crit1 = critical_value(p, n, 1, family=region.family)
    dev = 2.0 * (region.logL_max - region.accepted[:, 2])
    keep = dev <= crit1
    vals = [
        functional(SizeDistribution(region.family, sc, sh))
        for sc, sh in region.accepted[keep, :2]
    ]
    return [float(np.min(vals)), float(np.max(vals))]


# -- parametric bootstrap -----------------------------------------------------

@dataclass
class BootstrapResult:
    method: str
    n_boot: int
    point: dict                 # bias-corrected, per quantity
    raw: dict                   # the original estimates
    interval: dict              # percentile interval of corrected replicates
    coverage: float
    n_failed: int
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_boot": self.n_boot,
            "point": self.point,
            "raw": self.raw,
            "interval": {k: list(v) for k, v in self.interval.items()},
            "coverage": self.coverage,
            "n_failed": self.n_failed,
            "flags": list(self.flags),
        }


def bootstrap_estimate(
    sample: ProfileSample,
    family: str,
    method: str = "ml",
    n_boot: int = 2000,
    p: float = 0.95,
    seed=None,
    approx=DEFAULT_M,
    options=None,
) -> BootstrapResult:
    """Parametric bootstrap with additive bias correction.

    Fits the sample, simulates ``n_boot`` same-size samples from the
    fitted law (reusing the section geometry for the weighted method),
    refits each, and reports 2*theta-hat - mean(theta*) along with the
    percentile interval of the reflected replicates 2*theta-hat -
    theta* (the basic bootstrap interval).
    """
    if n_boot < 200:
        raise ParameterError("n_boot must be at least 200")
    approx = _as_approx(approx)
    options = options or FitOptions(restarts=1)
    fitter = _METHOD_DISPATCH[method.lower()]
    base = fitter(sample, family, approx=approx, options=options)
    quantities = {
        "scale": lambda d: d.scale,
        "shape": lambda d: d.shape,
        "mean_diameter": lambda d: d.mean_diameter(),
    }
    raw = {k: fn(base.dist) for k, fn in quantities.items()}
    ss = np.random.SeedSequence(seed)
    reps = {k: [] for k in quantities}
    n_failed = 0
    use_section = method.lower() in ("ml-weighted", "ml-censored")
    from .simulation import simulate_bounded_section

    for child in ss.spawn(n_boot):
        try:
            if use_section and sample.section is not None:
                boot = simulate_bounded_section(
                    base.dist, sample.n_interior, *sample.section, seed=child
                )
                if method.lower() == "ml-weighted":
                    boot = ProfileSample(
                        interior=boot.interior, section=sample.section
                    )
            else:
                y = simulate_profiles(base.dist, sample.n_interior, child)
                boot = ProfileSample(interior=y)
            r = fitter(boot, family, approx=approx, options=options)
            if not r.converged:
                n_failed += 1
                continue
        except (DataError, ParameterError):
            n_failed += 1
            continue
        for k, fn in quantities.items():
            reps[k].append(fn(r.dist))
    flags = []
    if n_failed > 0.1 * n_boot:
        flags.append("many-replicate-failures")
    alpha = 1.0 - p
    point, interval = {}, {}
    for k in quantities:
        arr = np.asarray(reps[k])
        corrected = 2.0 * raw[k] - arr
        point[k] = float(np.mean(corrected))
        interval[k] = [
            float(np.quantile(corrected, alpha / 2)),
            float(np.quantile(corrected, 1 - alpha / 2)),
        ]
    return BootstrapResult(
        method=base.method,
        n_boot=n_boot,
        point=point,
        raw=raw,
        interval=interval,
        coverage=p,
        n_failed=n_failed,
        flags=tuple(flags),
    )


# -- model choice -------------------------------------------------------------

def aic_compare(sample, families, approx=DEFAULT_M, options=None):
    """AIC ranking of candidate families by ordinary ML.

    All families here have two parameters, so the ranking is the
    likelihood ranking; AIC is still reported for completeness.
    Returns a list of dicts sorted by AIC, plus failures with reasons.
    """
    if len(families) < 2:
        raise ParameterError("need at least 2 families to compare")
    approx = _as_approx(approx)
    rows, failures = [], []
    for family in families:
        try:
            r = fit_mle(sample, family, approx, options)
        except (DataError, ParameterError) as exc:
            failures.append({"family": family, "reason": str(exc)})
            continue
        if not r.converged or r.logL is None:
            failures.append({"family": family, "reason": "fit did not converge"})
            continue
        rows.append({
            "family": family,
            "logL": r.logL,
            "k_params": 2,
            "aic": 2 * 2 - 2 * r.logL,
            "fit": r,
        })
    rows.sort(key=lambda row: row["aic"])
    if rows:
        best = rows[0]["aic"]
        for row in rows:
            row["delta_aic"] = row["aic"] - best
    return {"ranking": rows, "failures": failures}
