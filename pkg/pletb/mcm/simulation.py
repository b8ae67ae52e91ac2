import hashlib
import json
import logging
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..estimators import LinewidthHistogram, build_linewidth_histogram
from ..exceptions import DegenerateModelError
from ..fitting import fit_batch
from ..synth import ScanModel, synth_batch

__all__ = ["SimulatedLinewidths", "simulate_linewidths", "expected_histogram", "clear_simulation_cache"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimulatedLinewidths:
    """Usable fitted FWHMs of ``n_scans`` simulated scans at one (γ, n̄) grid point."""

    fwhms: np.ndarray
    n_scans: int

    @property
    def acceptance_rate(self):
        return self.fwhms.size / self.n_scans


@lru_cache(maxsize=512)
def _simulate(gamma, nbar, photon_sigma, noise_mean, window, rule, fit_config, replicas, seed):
    model = ScanModel(gamma, nbar, photon_sigma, noise_mean, window, seed)
    fwhms = fit_batch(synth_batch(model, replicas), rule, fit_config).fwhms()
    fwhms.setflags(write=False)
    return fwhms


def _cache_path(cache_dir, key):
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
    return os.path.join(cache_dir, f"sim-{digest}.npz")


def simulate_linewidths(gamma, nbar, settings, replicas, seed):
    """Run the synth + fit pipeline ``replicas`` times at (γ FWHM, n̄).

    The result only depends on its arguments, so it is memoized in-process and, with
    ``settings.cache_dir``, on disk.
    """
    args = (
        float(gamma),
        float(nbar),
        float(settings.photon_sigma),
        float(settings.noise_mean),
        settings.window,
        settings.rule,
        settings.fit_config,
        int(replicas),
        int(seed),
    )
    path = None
    if settings.cache_dir:
        key = {
            "gamma": args[0],
            "nbar": args[1],
            "photon_sigma": args[2],
            "noise_mean": args[3],
            "window": settings.window.to_dict(),
            "rule": settings.rule.to_dict(),
            "fit_config": settings.fit_config.to_dict(),
            "replicas": args[7],
            "seed": args[8],
        }
        path = _cache_path(settings.cache_dir, key)
        if os.path.exists(path):
            with np.load(path) as stored:
                return SimulatedLinewidths(stored["fwhms"], int(stored["n_scans"]))
    fwhms = _simulate(*args)
    if path is not None:
        os.makedirs(settings.cache_dir, exist_ok=True)
        np.savez(path, fwhms=fwhms, n_scans=int(replicas))
    return SimulatedLinewidths(fwhms, int(replicas))


def clear_simulation_cache():
    _simulate.cache_clear()


def expected_histogram(gamma, nbar, settings, k, seed, replicas=None, acceptance_rate=1.0):
    """E_i(γ, n̄): simulated linewidth occurrences scaled to ``k`` observed scans by k/M."""
    replicas = settings.replicas_for(k, acceptance_rate) if replicas is None else replicas
    simulated = simulate_linewidths(gamma, nbar, settings, replicas, seed)
    if simulated.fwhms.size == 0:
        raise DegenerateModelError(
            f"no simulated scan at gamma={gamma:g} MHz, nbar={nbar:g} passed the filter and converged "
            f"({replicas} replicas)"
        )
    raw = build_linewidth_histogram(simulated.fwhms, settings.binning)
    scale = k / simulated.n_scans
    return LinewidthHistogram(settings.binning, raw.counts * scale, raw.overflow * scale, k)
