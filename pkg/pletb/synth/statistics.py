import numpy as np

from ..exceptions import EstimatorError

__all__ = ["estimate_noise_mean", "estimate_photon_statistics"]


def _totals(scans):
    totals = np.array([scan.total for scan in scans], dtype=float)
    if totals.size == 0:
        raise EstimatorError("photon statistics need at least one scan")
    return totals


def estimate_noise_mean(off_resonance_scans):
    """Poisson background mean per scan, from scans recorded far from resonance."""
    return float(_totals(off_resonance_scans).mean())


def estimate_photon_statistics(scans, noise_mean=0.0):
    """(n̄, σ_n) of the signal counts, given total = signal + Poisson(noise_mean)."""
    totals = _totals(scans)
    mean_photons = max(float(totals.mean()) - noise_mean, 0.0)
    variance = float(totals.var(ddof=1)) if totals.size > 1 else 0.0
    return mean_photons, float(np.sqrt(max(variance - noise_mean, 0.0)))
