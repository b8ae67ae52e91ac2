import json
import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from ..estimators import BinningScheme
from ..exceptions import ConfigError, DomainError
from ..fitting import AcceptanceRule, FitConfig
from ..lineshape import DEFAULT_WINDOW, FrequencyWindow
from ..mcm import DELTA_TWO_PARAMS, GridSpec
from ..utils.seeding import check_seed

__all__ = ["OUTPUT_DIR_ENV", "RunConfig", "load_run_config"]

OUTPUT_DIR_ENV = "PLETB_OUTPUT_DIR"

_NESTED = {
    "window": FrequencyWindow,
    "rule": AcceptanceRule,
    "fit_config": FitConfig,
    "binning": BinningScheme,
    "grid": GridSpec,
}


def _default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV, "pletb-output")


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one CLI run; written verbatim into every manifest."""

    window: FrequencyWindow = DEFAULT_WINDOW
    rule: AcceptanceRule = field(default_factory=AcceptanceRule)
    fit_config: FitConfig = field(default_factory=FitConfig)
    binning: BinningScheme = field(default_factory=BinningScheme)
    grid: GridSpec = field(default_factory=GridSpec)
    true_fwhm: float = 20.0
    mean_photons: float = 25.0
    photon_sigma: Optional[float] = None
    noise_mean: float = 2.0
    scans: int = 2000
    replicas: Optional[int] = None
    delta: float = DELTA_TWO_PARAMS
    confidence: float = 0.99
    resonance_mhz: float = 0.0
    seed: int = 0
    threads: Optional[int] = None
    output_dir: str = field(default_factory=_default_output_dir)
    cache_dir: Optional[str] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "seed", check_seed(self.seed))
        except AssertionError as error:
            raise ConfigError(str(error)) from None
        if self.scans < 1:
            raise ConfigError(f"scans must be at least 1, got {self.scans}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if not 0 < self.confidence < 1:
            raise ConfigError(f"confidence must lie in (0, 1), got {self.confidence}")

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.to_dict() if f.name in _NESTED else value
        return out

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        try:
            for key, value in data.items():
                kwargs[key] = _NESTED[key](**value) if key in _NESTED else value
            return cls(**kwargs)
        except (TypeError, DomainError) as error:
            raise ConfigError(f"invalid config: {error}") from None

    def updated(self, **overrides):
        """Copy with every non-None override applied; nested sections take partial dicts."""
        changes = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key in _NESTED and isinstance(value, dict):
                try:
                    value = replace(getattr(self, key), **value)
                except DomainError as error:
                    raise ConfigError(str(error)) from None
            changes[key] = value
        try:
            return replace(self, **changes)
        except DomainError as error:
            raise ConfigError(str(error)) from None


def load_run_config(path=None):
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as error:
        raise ConfigError(f"{path}: not valid JSON ({error})") from None
    return RunConfig.from_dict(data)
