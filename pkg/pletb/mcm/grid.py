import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..estimators import LinewidthSampleSet, build_linewidth_histogram
from ..exceptions import BinningError, CannotBinError, DegenerateModelError, GridSearchError
from ..utils.parallel import ordered_map
from ..utils.seeding import derive_seed
from .chi2 import chi2_statistic, merge_bins
from .settings import GridSpec, MCMSettings
from .simulation import expected_histogram

__all__ = ["MCMGrid", "MCMResult", "grid_search", "confidence_region", "run_mcm"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MCMGrid:
    """χ² surface S over the (γ, n̄) grid; masked cells hold NaN and a reason."""

    gammas: np.ndarray
    nbars: np.ndarray
    S: np.ndarray
    replicas: int
    scale: float
    masked: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        assert self.S.shape == (self.gammas.size, self.nbars.size)
        assert np.all(np.diff(self.gammas) > 0) and np.all(np.diff(self.nbars) > 0), "grid axes must increase"
        assert np.all(np.isnan(self.S) | (self.S >= 0))

    @property
    def valid(self):
        return ~np.isnan(self.S)

    def to_dict(self):
        return {
            "gammas_mhz": self.gammas.tolist(),
            "nbars": self.nbars.tolist(),
            "S": [[None if np.isnan(s) else float(s) for s in row] for row in self.S],
            "replicas": self.replicas,
            "scale": self.scale,
            "masked": [{"gamma_index": i, "nbar_index": j, "reason": r} for (i, j), r in sorted(self.masked.items())],
        }

    def rows(self):
        """(γ, n̄, S) triples in row-major order."""
        for i, gamma in enumerate(self.gammas):
            for j, nbar in enumerate(self.nbars):
                yield float(gamma), float(nbar), float(self.S[i, j])


@dataclass(frozen=True, eq=False)
class MCMResult:
    gamma: float
    nbar: float
    S_min: float
    region: np.ndarray
    gamma_ci: Tuple[float, float]
    nbar_ci: Tuple[float, float]
    boundary_hit: bool
    delta: float

    @property
    def relative_ci_width(self):
        return (self.gamma_ci[1] - self.gamma_ci[0]) / self.gamma

    def contains(self, gamma):
        return self.gamma_ci[0] <= gamma <= self.gamma_ci[1]

    def to_dict(self):
        return {
            "gamma_mhz": self.gamma,
            "nbar": self.nbar,
            "S_min": self.S_min,
            "gamma_ci_mhz": list(self.gamma_ci),
            "nbar_ci": list(self.nbar_ci),
            "boundary_hit": self.boundary_hit,
            "delta": self.delta,
            "region_size": int(self.region.sum()),
            "relative_ci_width": self.relative_ci_width,
        }


def _evaluate_cell(job):
    observed, k, gamma, nbar, settings, replicas, seed = job
    try:
        expected = expected_histogram(gamma, nbar, settings, k, seed, replicas=replicas)
        merged = merge_bins(observed, expected, settings.binning)
        return chi2_statistic(merged.observed, merged.expected), None
    except (DegenerateModelError, CannotBinError, BinningError) as error:
        return float("nan"), error.code


def grid_search(observed, grid=GridSpec(), settings=MCMSettings(), seed=0):
    """Evaluate S(γ, n̄) on every grid cell against the ``observed`` histogram.

    Cell (i, j) simulates with the seed derived from (``seed``, i·n_nbar + j), so the
    surface does not depend on evaluation order or worker count.
    """
    assert observed.binning == settings.binning, "observed histogram must use the search binning"
    gammas, nbars = grid.gammas, grid.nbars
    k = observed.k_total
    if k < 1:
        raise GridSearchError("observed histogram holds no scans")
    acceptance = observed.total / k
    replicas = settings.replicas_for(k, acceptance)
    occupancy = observed.occupancy()
    jobs = [
        (occupancy, k, float(g), float(n), settings, replicas, derive_seed(seed, i * nbars.size + j))
        for i, g in enumerate(gammas)
        for j, n in enumerate(nbars)
    ]
    logger.info("MCM grid %dx%d, %d replicas per cell, k=%d", gammas.size, nbars.size, replicas, k)
    values = ordered_map(_evaluate_cell, jobs, settings.workers)

    S = np.full((gammas.size, nbars.size), np.nan)
    masked = {}
    for index, (value, reason) in enumerate(values):
        i, j = divmod(index, nbars.size)
        S[i, j] = value
        if reason is not None:
            masked[(i, j)] = reason
    if masked:
        logger.warning("%d of %d grid cells masked", len(masked), S.size)
    if len(masked) > settings.max_masked_fraction * S.size:
        raise GridSearchError(
            f"{len(masked)} of {S.size} grid cells could not be evaluated "
            f"(limit {settings.max_masked_fraction:.0%}): {sorted(set(masked.values()))}"
        )
    return MCMGrid(gammas, nbars, S, replicas, k / replicas, masked)


def _touches_edge(indices, size):
    return size > 1 and (indices.min() == 0 or indices.max() == size - 1)


def confidence_region(grid, delta=9.21):
    """Cells with S ≤ S_min + ``delta``; masked cells never enter the region."""
    valid = grid.valid
    S_min = float(np.nanmin(grid.S))
    region = valid & (np.where(valid, grid.S, np.inf) <= S_min + delta)
    i_best, j_best = np.unravel_index(np.nanargmin(grid.S), grid.S.shape)
    rows, cols = np.nonzero(region)
    boundary_hit = _touches_edge(rows, grid.gammas.size) or _touches_edge(cols, grid.nbars.size)
    if boundary_hit:
        logger.warning("confidence region reaches the edge of the search grid; widen the grid")
    return MCMResult(
        gamma=float(grid.gammas[i_best]),
        nbar=float(grid.nbars[j_best]),
        S_min=S_min,
        region=region,
        gamma_ci=(float(grid.gammas[rows].min()), float(grid.gammas[rows].max())),
        nbar_ci=(float(grid.nbars[cols].min()), float(grid.nbars[cols].max())),
        boundary_hit=bool(boundary_hit),
        delta=float(delta),
    )


def run_mcm(samples, grid=GridSpec(), settings=MCMSettings(), seed=0):
    """Grid search plus confidence region for an observed :class:`LinewidthSampleSet`."""
    assert isinstance(samples, LinewidthSampleSet)
    observed = build_linewidth_histogram(samples, settings.binning)
    surface = grid_search(observed, grid, settings, seed)
    return surface, confidence_region(surface, settings.delta)
