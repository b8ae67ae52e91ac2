import logging
from functools import lru_cache

import numpy as np
from lmfit.models import ConstantModel, VoigtModel

from ..lineshape import TIED_FWHM_FACTOR, VoigtParams, voigt_fwhm
from ..utils.parallel import ordered_map
from .config import FREE, AcceptanceRule, FitConfig
from .result import (
    REASON_NO_ERRORBARS,
    REASON_NOT_CONVERGED,
    REASON_OK,
    REASON_REJECTED,
    REASON_TOO_FEW_BINS,
    FitBatch,
    FitResult,
)

__all__ = ["accept_scan", "initial_guess", "fit_voigt_scan", "fit_batch"]

logger = logging.getLogger(__name__)

# fewest non-empty bins a free (sigma, gamma) fit is attempted on
MIN_FREE_BINS = 4
_FIT_CHUNK = 64


def accept_scan(scan, rule=AcceptanceRule()):
    """At least one bin holds ``rule.min_counts_per_bin`` counts."""
    return bool(scan.counts.size) and int(scan.counts.max()) >= rule.min_counts_per_bin


@lru_cache(maxsize=None)
def _line_model():
    return VoigtModel() + ConstantModel()


def initial_guess(scan, config=FitConfig()):
    """Moment-based starting point: centroid, total area, width from the second moment,
    baseline from the median bin."""
    x = scan.frequencies
    y = scan.counts.astype(float)
    total = y.sum()
    if total > 0:
        center = float(np.sum(x * y) / total)
        variance = float(np.sum(y * (x - center) ** 2) / total)
    else:
        center, variance = scan.window.midpoint, 0.0
    # a single populated bin still spreads over its own width
    variance = max(variance, scan.window.bin_width**2 / 12.0)
    width = np.sqrt(variance) * 2.0 * np.sqrt(2.0 * np.log(2.0)) / TIED_FWHM_FACTOR
    return VoigtParams(
        amplitude=float(total * scan.window.bin_width),
        center=center,
        sigma=max(width, config.sigma_min),
        gamma=max(width, config.sigma_min),
        offset=float(np.median(y)),
    )


def _make_params(scan, guess, config):
    params = _line_model().make_params(
        amplitude=guess.amplitude, center=guess.center, sigma=guess.sigma, c=guess.offset
    )
    params["amplitude"].set(min=0.0)
    params["center"].set(min=scan.window.lo, max=scan.window.hi)
    params["sigma"].set(min=config.sigma_min)
    params["c"].set(min=0.0)
    if config.mode == FREE:
        params["gamma"].set(expr="", value=guess.gamma, min=0.0, vary=True)
    return params


def _stderr(param):
    return 0.0 if param.stderr is None or not np.isfinite(param.stderr) else float(param.stderr)


def fit_voigt_scan(scan, config=FitConfig(), rule=AcceptanceRule()):
    """Least-squares Voigt fit of one scan.

    Scans that fail ``rule`` are still fitted but come back with ``accepted=False``.
    Failures are reported through ``converged``/``reason`` and never raised.
    """
    accepted = accept_scan(scan, rule)
    nonzero = int(np.count_nonzero(scan.counts))
    if nonzero == 0 or (config.mode == FREE and nonzero < MIN_FREE_BINS):
        return FitResult(index=scan.index, accepted=False, converged=False, reason=REASON_TOO_FEW_BINS)

    guess = initial_guess(scan, config)
    params = _make_params(scan, guess, config)
    y = scan.counts.astype(float)
    weights = 1.0 / np.sqrt(np.maximum(y, 1.0)) if config.weighted else None
    n_varys = sum(1 for p in params.values() if p.vary)
    try:
        out = _line_model().fit(
            y,
            params,
            x=scan.frequencies,
            weights=weights,
            method="leastsq",
            max_nfev=config.max_iterations * (n_varys + 1),
            fit_kws={"ftol": config.ftol, "xtol": config.ftol},
        )
    except ValueError as error:
        logger.debug("scan %d: fit raised %s", scan.index, error)
        return FitResult(index=scan.index, accepted=False, converged=False, reason=REASON_NOT_CONVERGED)

    fitted = out.params
    sigma, gamma = float(fitted["sigma"].value), float(fitted["gamma"].value)
    converged = bool(out.success) and np.isfinite(sigma) and np.isfinite(gamma)
    if not converged:
        return FitResult(
            index=scan.index, accepted=False, converged=False, reason=REASON_NOT_CONVERGED, nfev=int(out.nfev)
        )

    voigt = VoigtParams(
        amplitude=float(fitted["amplitude"].value),
        center=float(fitted["center"].value),
        sigma=sigma,
        gamma=gamma,
        offset=float(fitted["c"].value),
    )
    stderrs = {
        "amplitude": _stderr(fitted["amplitude"]),
        "center": _stderr(fitted["center"]),
        "sigma": _stderr(fitted["sigma"]),
        "gamma": _stderr(fitted["gamma"]),
        "offset": _stderr(fitted["c"]),
    }
    return FitResult(
        index=scan.index,
        accepted=accepted,
        converged=True,
        reason=REASON_OK if out.errorbars else REASON_NO_ERRORBARS,
        params=voigt,
        fwhm=float(voigt_fwhm(sigma, gamma)),
        stderr_fwhm=_stderr(fitted["fwhm"]),
        stderrs=stderrs,
        rss=float(np.sum(out.residual**2)),
        nfev=int(out.nfev),
    )


def _fit_or_reject(scan, rule, config):
    if not accept_scan(scan, rule):
        return FitResult(index=scan.index, accepted=False, converged=False, reason=REASON_REJECTED)
    return fit_voigt_scan(scan, config, rule)


def _fit_chunk(job):
    scans, rule, config = job
    return [_fit_or_reject(scan, rule, config) for scan in scans]


def fit_batch(scans, rule=AcceptanceRule(), config=FitConfig(), workers=None):
    """Filter and fit every scan; per-scan failures are recorded, never raised."""
    scans = list(scans)
    jobs = [(scans[i : i + _FIT_CHUNK], rule, config) for i in range(0, len(scans), _FIT_CHUNK)]
    batch = FitBatch(tuple(r for chunk in ordered_map(_fit_chunk, jobs, workers) for r in chunk))
    logger.debug("fitted batch: %s", batch.summary())
    return batch
