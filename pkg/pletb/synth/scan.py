from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DomainError
from ..lineshape import DEFAULT_WINDOW, FrequencyWindow
from ..utils.seeding import check_seed

__all__ = ["SYNTHETIC", "INGESTED", "ScanModel", "Scan", "SynthTrace"]

SYNTHETIC = "synthetic"
INGESTED = "ingested"


@dataclass(frozen=True)
class ScanModel:
    """Sampling model of one PLE sweep.

    ``true_fwhm`` is the Lorentzian FWHM in MHz (the Cauchy half-width is half of it),
    ``mean_photons``/``photon_sigma`` parametrize the normal law of signal counts in the
    window and ``noise_mean`` is the Poisson mean of background counts in the window.
    """

    true_fwhm: float
    mean_photons: float
    photon_sigma: float = 6.0
    noise_mean: float = 2.0
    window: FrequencyWindow = DEFAULT_WINDOW
    seed: int = 0

    def __post_init__(self):
        if not self.true_fwhm > 0:
            raise DomainError(f"true FWHM must be positive, got {self.true_fwhm}")
        if self.mean_photons < 0 or self.photon_sigma < 0 or self.noise_mean < 0:
            raise DomainError("mean photons, photon sigma and noise mean must be non-negative")
        object.__setattr__(self, "seed", check_seed(self.seed))

    @property
    def gamma(self):
        return 0.5 * self.true_fwhm

    def with_seed(self, seed):
        return ScanModel(self.true_fwhm, self.mean_photons, self.photon_sigma, self.noise_mean, self.window, seed)

    def to_dict(self):
        return {
            "true_fwhm": self.true_fwhm,
            "mean_photons": self.mean_photons,
            "photon_sigma": self.photon_sigma,
            "noise_mean": self.noise_mean,
            "window": self.window.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class Scan:
    window: FrequencyWindow
    counts: np.ndarray
    provenance: str = SYNTHETIC
    index: int = 0

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.shape[0] != self.window.n_bins:
            raise DomainError(f"scan needs {self.window.n_bins} bins, got shape {counts.shape}")
        if np.any(counts < 0):
            raise DomainError("scan counts must be non-negative")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def frequencies(self):
        return self.window.centers

    def __eq__(self, other):
        if not isinstance(other, Scan):
            return NotImplemented
        return (
            self.window == other.window
            and self.provenance == other.provenance
            and self.index == other.index
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None


@dataclass(frozen=True)
class SynthTrace:
    """Draws behind one synthetic scan, exposed for conservation checks."""

    signal: int
    noise: int
    signal_frequencies: np.ndarray = field(repr=False)
