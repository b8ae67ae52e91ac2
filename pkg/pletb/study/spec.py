from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..estimators import ESTIMATORS
from ..exceptions import ConfigError
from ..fitting import AcceptanceRule, FitConfig
from ..lineshape import DEFAULT_WINDOW, FrequencyWindow
from ..mcm import BinningScheme, GridSpec, MCMSettings

__all__ = ["MCM", "SWEEP_ESTIMATORS", "DESK_REPETITIONS", "FULL_REPETITIONS", "SweepSpec"]

MCM = "mcm"
SWEEP_ESTIMATORS = tuple(ESTIMATORS) + (MCM,)

DESK_REPETITIONS = 50
FULL_REPETITIONS = 200


@dataclass(frozen=True)
class SweepSpec:
    """A (γ, n̄) sweep: ``repetitions`` independent batches of ``k`` scans per cell.

    ``mcm_grid`` fixes the MCM search grid for every cell; without it each cell searches
    γ in [γ/2, 2γ] and n̄ in [0.4·n̄, 2.4·n̄] around its own truth.
    """

    gammas: Tuple[float, ...] = (20.0,)
    nbars: Tuple[float, ...] = (25.0,)
    k: int = 2000
    repetitions: int = DESK_REPETITIONS
    estimator: str = "median"
    photon_sigma: float = 6.0
    noise_mean: float = 2.0
    seed: int = 0
    window: FrequencyWindow = DEFAULT_WINDOW
    rule: AcceptanceRule = field(default_factory=AcceptanceRule)
    fit_config: FitConfig = field(default_factory=FitConfig)
    binning: BinningScheme = field(default_factory=BinningScheme)
    mcm_grid: Optional[GridSpec] = None
    mcm_replicas: Optional[int] = None
    max_drop_fraction: float = 0.2
    confidence: float = 0.99
    workers: Optional[int] = None
    cache_dir: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "nbars", tuple(float(n) for n in self.nbars))
        if not self.gammas or not self.nbars:
            raise ConfigError("sweep axes must not be empty")
        if self.repetitions < 1 or self.k < 1:
            raise ConfigError("repetitions and k must be at least 1")
        if self.estimator not in SWEEP_ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}, choose from {list(SWEEP_ESTIMATORS)}")
        if not 0 < self.confidence < 1:
            raise ConfigError(f"confidence must lie in (0, 1), got {self.confidence}")

    def mcm_settings(self):
        return MCMSettings(
            window=self.window,
            rule=self.rule,
            fit_config=self.fit_config,
            binning=self.binning,
            photon_sigma=self.photon_sigma,
            noise_mean=self.noise_mean,
            # same replica count in every repetition and prefix
            replicas=self.mcm_replicas or 10 * self.k,
            cache_dir=self.cache_dir,
        )

    def grid_for(self, gamma, nbar):
        if self.mcm_grid is not None:
            return self.mcm_grid
        return GridSpec(
            gamma_lo=max(1.0, round(gamma / 2)),
            gamma_hi=round(2 * gamma),
            gamma_step=1.0,
            nbar_lo=max(2.0, 2 * round(0.2 * nbar)),
            nbar_hi=2 * round(1.2 * nbar),
            nbar_step=2.0,
        )

    def to_dict(self):
        return {
            "gammas": list(self.gammas),
            "nbars": list(self.nbars),
            "k": self.k,
            "repetitions": self.repetitions,
            "estimator": self.estimator,
            "photon_sigma": self.photon_sigma,
            "noise_mean": self.noise_mean,
            "seed": self.seed,
            "window": self.window.to_dict(),
            "rule": self.rule.to_dict(),
            "fit_config": self.fit_config.to_dict(),
            "binning": self.binning.to_dict(),
            "mcm_grid": None if self.mcm_grid is None else self.mcm_grid.to_dict(),
            "mcm_replicas": self.mcm_replicas,
            "max_drop_fraction": self.max_drop_fraction,
            "confidence": self.confidence,
        }
