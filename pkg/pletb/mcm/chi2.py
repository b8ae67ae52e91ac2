import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..estimators import BinningScheme
from ..exceptions import BinningError, CannotBinError

__all__ = ["MergedHistograms", "merge_bins", "chi2_statistic"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MergedHistograms:
    observed: np.ndarray
    expected: np.ndarray
    # raw bin indices making up each merged bin, narrowest first
    groups: Tuple[Tuple[int, ...], ...]
    # the narrow bin is below min_expected and could not be merged
    flagged: bool = False


def _vector(histogram):
    return np.asarray(histogram.occupancy() if hasattr(histogram, "occupancy") else histogram, dtype=float)


def merge_bins(observed, expected, binning=BinningScheme()):
    """Merge adjacent bins until every expected count reaches ``binning.min_expected``.

    Bin 0 is the narrow (≤ cutoff) bin and is never merged into another bin. The rest are
    walked from the broad end inward; a group closes once its expected count reaches the
    threshold. A leftover group next to the narrow bin joins the closest closed group or,
    with none, the narrow bin itself.
    """
    o = _vector(observed)
    e = _vector(expected)
    assert o.shape == e.shape, "observed and expected histograms must share their raw binning"
    if e.sum() < binning.min_expected:
        raise CannotBinError(f"total expected count {e.sum():.3f} is below min_expected={binning.min_expected}")

    groups = []
    pending = []
    acc = 0.0
    for i in range(e.size - 1, 0, -1):
        pending.append(i)
        acc += e[i]
        if acc >= binning.min_expected:
            groups.append(sorted(pending))
            pending, acc = [], 0.0
    narrow = [0]
    if pending:
        if groups:
            groups[-1] = sorted(groups[-1] + pending)
        else:
            narrow = sorted(narrow + pending)
    groups.append(narrow)
    groups.reverse()

    merged_o = np.array([o[g].sum() for g in groups])
    merged_e = np.array([e[g].sum() for g in groups])
    flagged = bool(merged_e[0] < binning.min_expected)
    if flagged:
        logger.warning("narrow bin holds only %.3f expected counts (< %g)", merged_e[0], binning.min_expected)
    return MergedHistograms(merged_o, merged_e, tuple(tuple(g) for g in groups), flagged)


def chi2_statistic(observed, expected):
    """S = Σ (O_i - E_i)² / E_i."""
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    assert o.shape == e.shape, "observed and expected must have the same length"
    if np.any(e <= 0):
        raise BinningError("expected count of zero reached the chi-square sum; bins were not merged")
    return float(np.sum((o - e) ** 2 / e))
