from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError

__all__ = ["VoigtParams", "FrequencyWindow", "DEFAULT_WINDOW"]


@dataclass(frozen=True)
class VoigtParams:
    """Voigt line: area ``amplitude`` (counts·MHz), ``center`` (MHz), Gaussian ``sigma`` and
    Lorentzian half-width ``gamma`` (MHz), constant ``offset`` (counts per bin)."""

    amplitude: float
    center: float
    sigma: float
    gamma: float
    offset: float = 0.0

    def __post_init__(self):
        if self.sigma < 0 or self.gamma < 0:
            raise DomainError(f"sigma and gamma must be non-negative, got sigma={self.sigma}, gamma={self.gamma}")
        if self.sigma == 0 and self.gamma == 0:
            raise DomainError("sigma and gamma cannot both be zero")
        if self.amplitude < 0:
            raise DomainError(f"amplitude must be non-negative, got {self.amplitude}")

    def to_dict(self):
        return {
            "amplitude": self.amplitude,
            "center": self.center,
            "sigma": self.sigma,
            "gamma": self.gamma,
            "offset": self.offset,
        }


@dataclass(frozen=True)
class FrequencyWindow:
    """Scan window in MHz relative to the nominal resonance, split into equal bins."""

    lo: float = -75.0
    hi: float = 75.0
    bin_width: float = 2.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"window hi must exceed lo, got [{self.lo}, {self.hi}]")
        if not self.bin_width > 0:
            raise DomainError(f"bin width must be positive, got {self.bin_width}")
        # the bin count is the span rounded to the nearest whole number of bins
        if round(self.span / self.bin_width) < 1:
            raise DomainError(f"window [{self.lo}, {self.hi}] is narrower than one {self.bin_width} MHz bin")

    @property
    def n_bins(self):
        return int(round(self.span / self.bin_width))

    @property
    def span(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def edges(self):
        return self.lo + self.bin_width * np.arange(self.n_bins + 1)

    @property
    def centers(self):
        return self.lo + self.bin_width * (np.arange(self.n_bins) + 0.5)

    def bin_index(self, frequencies):
        """Bin index of each frequency; ``hi`` itself falls into the last bin."""
        index = np.floor((np.asarray(frequencies, dtype=float) - self.lo) / self.bin_width).astype(np.int64)
        return np.clip(index, 0, self.n_bins - 1)

    def shifted(self, offset):
        return FrequencyWindow(self.lo - offset, self.hi - offset, self.bin_width)

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "bin_width": self.bin_width}


DEFAULT_WINDOW = FrequencyWindow()
