import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy import stats

from ..exceptions import EstimatorError
from ..utils.seeding import derive_rng
from ..utils.version_checker import minimum_required_version
from .samples import EstimateReport

__all__ = [
    "MEDIAN",
    "IVW",
    "LOGNORMAL",
    "ESTIMATORS",
    "median_estimate",
    "ivw_estimate",
    "lognormal_median",
    "lognormal_estimate",
    "estimate",
    "point_estimate",
    "RobustnessReport",
    "scan_count_robustness",
]

logger = logging.getLogger(__name__)

MEDIAN = "median"
IVW = "ivw"
LOGNORMAL = "lognormal"

MIN_LOGNORMAL_SAMPLES = 10


def _require_samples(samples, minimum=1):
    if len(samples) < minimum:
        raise EstimatorError(f"need at least {minimum} linewidth samples, got {len(samples)} (no accepted scans?)")


@minimum_required_version("scipy", "1.7")
def _bootstrap_interval(values, statistic, confidence, n_resamples, seed):
    if values.size == 1 or np.all(values == values[0]):
        return float(values[0]), float(values[0])
    result = stats.bootstrap(
        (values,),
        statistic,
        n_resamples=n_resamples,
        confidence_level=confidence,
        method="percentile",
        vectorized=True,
        batch=500,
        random_state=derive_rng(seed),
    )
    return float(result.confidence_interval.low), float(result.confidence_interval.high)


def median_estimate(samples, confidence=0.99, n_resamples=2000, seed=0):
    """Sample median with a seeded percentile-bootstrap confidence interval."""
    _require_samples(samples)
    value = float(np.median(samples.fwhms))
    lo, hi = _bootstrap_interval(samples.fwhms, np.median, confidence, n_resamples, seed)
    return EstimateReport(MEDIAN, value, lo, hi, len(samples), samples.k_rejected)


def ivw_estimate(samples, confidence=0.99):
    """Inverse-variance weighted mean Σ(x/s²)/Σ(1/s²) and its standard error 1/sqrt(Σ(1/s²))."""
    _require_samples(samples)
    if np.any(samples.stderrs <= 0):
        raise EstimatorError("inverse-variance weighting needs strictly positive standard errors")
    weights = 1.0 / samples.stderrs**2
    value = float(np.sum(weights * samples.fwhms) / np.sum(weights))
    stderr = float(1.0 / np.sqrt(np.sum(weights)))
    z = stats.norm.ppf(0.5 + 0.5 * confidence)
    return EstimateReport(IVW, value, value - z * stderr, value + z * stderr, len(samples), samples.k_rejected, stderr)


def _log_moments(samples):
    _require_samples(samples, MIN_LOGNORMAL_SAMPLES)
    logs = np.log(samples.fwhms)
    # maximum likelihood: population (ddof=0) spread of the logs
    return float(logs.mean()), float(logs.std())


def lognormal_median(samples):
    """Median exp(μ_ln) of the maximum-likelihood lognormal fit."""
    mu_ln, _ = _log_moments(samples)
    return float(np.exp(mu_ln))


def lognormal_estimate(samples, confidence=0.99):
    mu_ln, sigma_ln = _log_moments(samples)
    half = stats.norm.ppf(0.5 + 0.5 * confidence) * sigma_ln / np.sqrt(len(samples))
    return EstimateReport(
        LOGNORMAL,
        float(np.exp(mu_ln)),
        float(np.exp(mu_ln - half)),
        float(np.exp(mu_ln + half)),
        len(samples),
        samples.k_rejected,
    )


ESTIMATORS = (MEDIAN, IVW, LOGNORMAL)


def _check_method(method):
    if method not in ESTIMATORS:
        raise EstimatorError(f"unknown estimator {method!r}, choose from {list(ESTIMATORS)}")


def estimate(samples, method=MEDIAN, confidence=0.99, seed=0):
    """Full report (value and confidence interval) of one of the classical estimators."""
    _check_method(method)
    if method == MEDIAN:
        return median_estimate(samples, confidence, seed=seed)
    if method == IVW:
        return ivw_estimate(samples.with_positive_stderr(), confidence)
    return lognormal_estimate(samples, confidence)


def point_estimate(samples, method=MEDIAN):
    """Estimator value without the interval, for sweeps that only need the number."""
    _check_method(method)
    if method == MEDIAN:
        _require_samples(samples)
        return float(np.median(samples.fwhms))
    if method == IVW:
        return ivw_estimate(samples.with_positive_stderr()).value_mhz
    return lognormal_median(samples)


@dataclass(frozen=True)
class RobustnessReport:
    estimator: str
    values: Dict[int, float]
    relative_spread: float

    def to_dict(self):
        return {
            "estimator": self.estimator,
            "values": {str(k): v for k, v in self.values.items()},
            "relative_spread": self.relative_spread,
        }


def scan_count_robustness(samples, scan_counts, method=MEDIAN):
    """Estimate from the first ``k`` samples for each ``k``; spread is (max - min) relative
    to the estimate from the largest ``k``."""
    scan_counts = sorted(int(k) for k in scan_counts)
    values = {}
    for k in scan_counts:
        values[k] = point_estimate(samples.head(k), method)
    reference = values[scan_counts[-1]]
    spread = (max(values.values()) - min(values.values())) / reference
    logger.info("%s over %s scans: relative spread %.3f", method, scan_counts, spread)
    return RobustnessReport(method, values, float(spread))
