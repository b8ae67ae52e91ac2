from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..lineshape import VoigtParams

__all__ = [
    "REASON_OK",
    "REASON_REJECTED",
    "REASON_TOO_FEW_BINS",
    "REASON_NOT_CONVERGED",
    "REASON_NO_ERRORBARS",
    "FitResult",
    "FitBatch",
]

REASON_OK = "ok"
REASON_REJECTED = "rejected"
REASON_TOO_FEW_BINS = "too_few_bins"
REASON_NOT_CONVERGED = "not_converged"
# converged, but the covariance matrix could not be estimated
REASON_NO_ERRORBARS = "no_errorbars"


@dataclass(frozen=True)
class FitResult:
    index: int
    accepted: bool
    converged: bool
    reason: str = REASON_OK
    params: Optional[VoigtParams] = None
    fwhm: float = float("nan")
    stderr_fwhm: float = 0.0
    stderrs: Dict[str, float] = field(default_factory=dict)
    rss: float = float("nan")
    nfev: int = 0

    def __post_init__(self):
        assert not self.accepted or self.converged, "an accepted fit must have converged"
        assert not self.converged or self.fwhm > 0, "a converged fit must have a positive FWHM"
        assert self.stderr_fwhm >= 0

    @property
    def usable(self):
        return self.accepted and self.converged

    def to_dict(self):
        return {
            "index": self.index,
            "accepted": self.accepted,
            "converged": self.converged,
            "reason": self.reason,
            "fwhm_mhz": self.fwhm,
            "stderr_fwhm_mhz": self.stderr_fwhm,
            "params": None if self.params is None else self.params.to_dict(),
            "stderrs": dict(self.stderrs),
            "rss": self.rss,
        }


@dataclass(frozen=True)
class FitBatch:
    """Fits of a scan batch in scan order, with rejection and failure bookkeeping."""

    results: Tuple[FitResult, ...] = ()

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    def __getitem__(self, item):
        return self.results[item]

    @property
    def n_scans(self):
        return len(self.results)

    @property
    def n_rejected(self):
        return sum(1 for r in self.results if r.reason == REASON_REJECTED)

    @property
    def n_failed(self):
        return sum(1 for r in self.results if r.reason != REASON_REJECTED and not r.converged)

    @property
    def n_used(self):
        return len(self.usable())

    @property
    def acceptance_rate(self):
        return self.n_used / self.n_scans if self.results else 0.0

    def usable(self):
        return [r for r in self.results if r.usable]

    def fwhms(self):
        return np.array([r.fwhm for r in self.usable()], dtype=float)

    def stderrs(self):
        return np.array([r.stderr_fwhm for r in self.usable()], dtype=float)

    def head(self, k):
        """Fits of the first ``k`` scans."""
        return FitBatch(self.results[:k])

    def summary(self):
        return {
            "n_scans": self.n_scans,
            "n_used": self.n_used,
            "n_rejected": self.n_rejected,
            "n_failed": self.n_failed,
        }
