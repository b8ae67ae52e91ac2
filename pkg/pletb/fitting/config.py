from dataclasses import asdict, dataclass

from ..exceptions import ConfigError

__all__ = ["TIED", "FREE", "AT_LEAST_ONE_BIN", "AcceptanceRule", "FitConfig"]

TIED = "tied"
FREE = "free"
AT_LEAST_ONE_BIN = "at-least-one-bin"


@dataclass(frozen=True)
class AcceptanceRule:
    min_counts_per_bin: int = 3
    mode: str = AT_LEAST_ONE_BIN

    def __post_init__(self):
        if self.min_counts_per_bin < 1:
            raise ConfigError(f"min_counts_per_bin must be at least 1, got {self.min_counts_per_bin}")
        if self.mode != AT_LEAST_ONE_BIN:
            raise ConfigError(f"unknown acceptance mode {self.mode!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class FitConfig:
    """Voigt least-squares settings.

    ``mode`` ties gamma to sigma (``tied``, FWHM = 3.6013σ) or fits both (``free``).
    Counts are fitted unweighted unless ``weighted`` asks for Poisson weights.
    """

    mode: str = TIED
    weighted: bool = False
    ftol: float = 1e-8
    max_iterations: int = 200
    sigma_min: float = 1e-3

    def __post_init__(self):
        if self.mode not in (TIED, FREE):
            raise ConfigError(f"fit mode must be {TIED!r} or {FREE!r}, got {self.mode!r}")
        if not self.ftol > 0 or self.max_iterations < 1 or not self.sigma_min > 0:
            raise ConfigError("ftol and sigma_min must be positive and max_iterations at least 1")

    def to_dict(self):
        return asdict(self)
