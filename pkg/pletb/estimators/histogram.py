from dataclasses import asdict, dataclass

import numpy as np

from ..exceptions import ConfigError

__all__ = ["BinningScheme", "LinewidthHistogram", "build_linewidth_histogram"]


@dataclass(frozen=True)
class BinningScheme:
    """Raw linewidth bins (MHz FWHM): one bin for everything up to ``narrow_cutoff``, then
    ``base_bin_width`` bins up to ``range_hi``. FWHMs above ``range_hi`` go to overflow."""

    narrow_cutoff: float = 15.0
    base_bin_width: float = 5.0
    range_hi: float = 150.0
    min_expected: float = 5.0

    def __post_init__(self):
        if not self.narrow_cutoff > 0 or not self.base_bin_width > 0:
            raise ConfigError("narrow_cutoff and base_bin_width must be positive")
        if not self.range_hi > self.narrow_cutoff:
            raise ConfigError(f"range_hi ({self.range_hi}) must exceed narrow_cutoff ({self.narrow_cutoff})")
        if self.min_expected < 1:
            raise ConfigError(f"min_expected must be at least 1, got {self.min_expected}")

    @property
    def edges(self):
        inner = np.arange(self.narrow_cutoff, self.range_hi, self.base_bin_width)
        return np.concatenate([[0.0], inner, [self.range_hi]])

    @property
    def n_bins(self):
        return self.edges.size - 1

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class LinewidthHistogram:
    """Occurrences per raw linewidth bin plus overflow above the binning range.

    Bins are closed on the right, so the first bin holds every FWHM ≤ ``narrow_cutoff``.
    ``k_total`` is the number of scans behind the histogram, rejected ones included.
    """

    binning: BinningScheme
    counts: np.ndarray
    overflow: float = 0.0
    k_total: int = 0

    @property
    def edges(self):
        return self.binning.edges

    @property
    def total(self):
        return float(self.counts.sum() + self.overflow)

    def occupancy(self):
        """Raw bins followed by the overflow bin, the vector the χ² comparison works on."""
        return np.append(np.asarray(self.counts, dtype=float), float(self.overflow))

    def to_dict(self):
        return {
            "edges_mhz": self.edges.tolist(),
            "counts": np.asarray(self.counts).tolist(),
            "overflow": self.overflow,
            "k_total": self.k_total,
        }


def build_linewidth_histogram(samples, binning=BinningScheme()):
    """Histogram of the FWHMs of a :class:`LinewidthSampleSet` (or a plain array)."""
    fwhms = np.asarray(getattr(samples, "fwhms", samples), dtype=float)
    k_total = int(getattr(samples, "k_total", fwhms.size))
    edges = binning.edges
    index = np.searchsorted(edges, fwhms, side="left") - 1
    index = np.maximum(index, 0)
    inside = index < binning.n_bins
    counts = np.bincount(index[inside], minlength=binning.n_bins).astype(float)
    return LinewidthHistogram(binning, counts, float(np.count_nonzero(~inside)), k_total)
