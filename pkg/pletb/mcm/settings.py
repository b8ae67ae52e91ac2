from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from ..estimators import BinningScheme
from ..exceptions import ConfigError
from ..fitting import AcceptanceRule, FitConfig
from ..lineshape import DEFAULT_WINDOW, FrequencyWindow

__all__ = ["DELTA_TWO_PARAMS", "DELTA_ONE_PARAM", "delta_for", "GridSpec", "MCMSettings"]

# χ² quantiles at 99% for two (γ, n̄) and one free parameter
DELTA_TWO_PARAMS = 9.21
DELTA_ONE_PARAM = 6.63
MIN_ACCEPTANCE_RATE = 0.05


def delta_for(confidence=0.99, params=2):
    """S_min offset that bounds a ``confidence`` region for ``params`` free parameters."""
    return float(stats.chi2.ppf(confidence, params))


def _axis(lo, hi, step):
    # inclusive of hi up to rounding
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass(frozen=True)
class GridSpec:
    """(γ, n̄) search grid; γ is the FWHM in MHz, n̄ the mean signal counts per scan."""

    gamma_lo: float = 10.0
    gamma_hi: float = 40.0
    gamma_step: float = 1.0
    nbar_lo: float = 10.0
    nbar_hi: float = 60.0
    nbar_step: float = 2.0

    def __post_init__(self):
        if not (self.gamma_lo > 0 and self.gamma_hi >= self.gamma_lo and self.gamma_step > 0):
            raise ConfigError(f"invalid linewidth axis {self.gamma_lo}..{self.gamma_hi} step {self.gamma_step}")
        if not (self.nbar_lo >= 0 and self.nbar_hi >= self.nbar_lo and self.nbar_step > 0):
            raise ConfigError(f"invalid photon axis {self.nbar_lo}..{self.nbar_hi} step {self.nbar_step}")

    @property
    def gammas(self):
        return _axis(self.gamma_lo, self.gamma_hi, self.gamma_step)

    @property
    def nbars(self):
        return _axis(self.nbar_lo, self.nbar_hi, self.nbar_step)

    @property
    def shape(self):
        return self.gammas.size, self.nbars.size

    def to_dict(self):
        return {
            "gamma_lo": self.gamma_lo,
            "gamma_hi": self.gamma_hi,
            "gamma_step": self.gamma_step,
            "nbar_lo": self.nbar_lo,
            "nbar_hi": self.nbar_hi,
            "nbar_step": self.nbar_step,
        }


@dataclass(frozen=True)
class MCMSettings:
    """Everything the simulated side of the χ² comparison shares with the observed side.

    ``photon_sigma`` and ``noise_mean`` stay fixed during the grid search. ``replicas``
    fixes the simulated scans per cell; ``None`` picks max(k, ⌈10·k / acceptance⌉).
    """

    window: FrequencyWindow = DEFAULT_WINDOW
    rule: AcceptanceRule = field(default_factory=AcceptanceRule)
    fit_config: FitConfig = field(default_factory=FitConfig)
    binning: BinningScheme = field(default_factory=BinningScheme)
    photon_sigma: float = 6.0
    noise_mean: float = 2.0
    replicas: Optional[int] = None
    delta: float = DELTA_TWO_PARAMS
    max_masked_fraction: float = 0.1
    workers: Optional[int] = None
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.photon_sigma < 0 or self.noise_mean < 0:
            raise ConfigError("photon_sigma and noise_mean must be non-negative")
        if self.replicas is not None and self.replicas < 1:
            raise ConfigError(f"replicas must be at least 1, got {self.replicas}")
        if self.delta < 0:
            raise ConfigError(f"delta must be non-negative, got {self.delta}")

    def replicas_for(self, k, acceptance_rate=1.0):
        if self.replicas is not None:
            return self.replicas
        # acceptance rates below the floor count as the floor
        acceptance_rate = max(acceptance_rate, MIN_ACCEPTANCE_RATE)
        return max(k, int(np.ceil(10 * k / acceptance_rate)))

    def to_dict(self):
        return {
            "window": self.window.to_dict(),
            "rule": self.rule.to_dict(),
            "fit_config": self.fit_config.to_dict(),
            "binning": self.binning.to_dict(),
            "photon_sigma": self.photon_sigma,
            "noise_mean": self.noise_mean,
            "replicas": self.replicas,
            "delta": self.delta,
            "max_masked_fraction": self.max_masked_fraction,
        }
