import logging

import numpy as np

from ..lineshape import truncated_cauchy_quantile
from ..utils.parallel import ordered_map
from ..utils.seeding import derive_rng
from .scan import SYNTHETIC, Scan, SynthTrace

__all__ = ["draw_photon_count", "derive_scan_rng", "synth_scan_traced", "synth_scan", "synth_batch"]

logger = logging.getLogger(__name__)

_BATCH_CHUNK = 256


def draw_photon_count(mean_photons, photon_sigma, rng, size=None):
    """N(n̄, σ) draw, clamped at zero and rounded to the nearest integer."""
    assert mean_photons >= 0 and photon_sigma >= 0
    draws = np.rint(np.maximum(rng.normal(mean_photons, photon_sigma, size=size), 0.0)).astype(np.int64)
    return int(draws) if size is None else draws


def derive_scan_rng(seed, index):
    return derive_rng(seed, index)


def synth_scan_traced(model, rng, index=0):
    window = model.window
    n_signal = draw_photon_count(model.mean_photons, model.photon_sigma, rng)
    signal_frequencies = np.atleast_1d(truncated_cauchy_quantile(rng.random(n_signal), model.gamma, window))
    n_noise = int(rng.poisson(model.noise_mean))
    noise_frequencies = rng.uniform(window.lo, window.hi, size=n_noise)

    counts = np.bincount(window.bin_index(signal_frequencies), minlength=window.n_bins)
    counts += np.bincount(window.bin_index(noise_frequencies), minlength=window.n_bins)
    scan = Scan(window=window, counts=counts, provenance=SYNTHETIC, index=index)
    return scan, SynthTrace(signal=n_signal, noise=n_noise, signal_frequencies=signal_frequencies)


def synth_scan(model, rng, index=0):
    return synth_scan_traced(model, rng, index)[0]


def _synth_range(job):
    model, start, stop = job
    return [synth_scan(model, derive_scan_rng(model.seed, i), index=i) for i in range(start, stop)]


def synth_batch(model, k, workers=None):
    """``k`` scans, scan ``i`` drawn from the stream derived from (``model.seed``, ``i``)."""
    assert k >= 1, "a batch needs at least one scan"
    jobs = [(model, start, min(start + _BATCH_CHUNK, k)) for start in range(0, k, _BATCH_CHUNK)]
    scans = [scan for chunk in ordered_map(_synth_range, jobs, workers) for scan in chunk]
    logger.debug("synthesized %d scans (fwhm=%.3f MHz, nbar=%.2f)", k, model.true_fwhm, model.mean_photons)
    return scans
