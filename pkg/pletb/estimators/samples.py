from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from ..exceptions import EstimatorError

__all__ = ["LinewidthSampleSet", "EstimateReport"]


@dataclass(frozen=True, eq=False)
class LinewidthSampleSet:
    """Fitted FWHMs (MHz) and their standard errors, one per usable scan.

    ``k_total`` counts every scan that went into the set, rejected or failed ones included.
    """

    fwhms: np.ndarray
    stderrs: np.ndarray
    k_total: int = 0
    k_rejected: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        fwhms = np.asarray(self.fwhms, dtype=float).ravel()
        stderrs = np.asarray(self.stderrs, dtype=float).ravel()
        if fwhms.shape != stderrs.shape:
            raise EstimatorError(f"got {fwhms.size} FWHMs but {stderrs.size} standard errors")
        if np.any(~(fwhms > 0)):
            raise EstimatorError("all FWHMs must be positive")
        if np.any(~(stderrs >= 0)):
            raise EstimatorError("standard errors must be non-negative")
        object.__setattr__(self, "fwhms", fwhms)
        object.__setattr__(self, "stderrs", stderrs)
        object.__setattr__(self, "k_total", max(int(self.k_total), fwhms.size + int(self.k_rejected)))

    @classmethod
    def from_values(cls, fwhms, stderrs=None, **kwargs):
        fwhms = np.asarray(fwhms, dtype=float)
        stderrs = np.zeros_like(fwhms) if stderrs is None else stderrs
        return cls(fwhms, stderrs, **kwargs)

    @classmethod
    def from_fits(cls, batch, metadata=None):
        """Accepted and converged fits only; everything else counts as rejected."""
        return cls(
            fwhms=batch.fwhms(),
            stderrs=batch.stderrs(),
            k_total=batch.n_scans,
            k_rejected=batch.n_scans - batch.n_used,
            metadata=dict(metadata or {}),
        )

    def __len__(self):
        return int(self.fwhms.size)

    def head(self, k):
        """The first ``k`` samples, in scan order."""
        k = min(k, len(self))
        return LinewidthSampleSet(self.fwhms[:k], self.stderrs[:k], k_total=k, metadata=self.metadata)

    def with_positive_stderr(self):
        keep = self.stderrs > 0
        return LinewidthSampleSet(
            self.fwhms[keep],
            self.stderrs[keep],
            k_total=self.k_total,
            k_rejected=self.k_rejected + int(np.count_nonzero(~keep)),
            metadata=self.metadata,
        )


@dataclass(frozen=True)
class EstimateReport:
    estimator: str
    value_mhz: float
    ci_lo: float
    ci_hi: float
    k_used: int
    k_rejected: int
    stderr: Optional[float] = None

    def to_dict(self):
        out = {
            "estimator": self.estimator,
            "value_mhz": self.value_mhz,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "k_used": self.k_used,
            "k_rejected": self.k_rejected,
        }
        if self.stderr is not None:
            out["stderr"] = self.stderr
        return out
