import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from ..estimators import LinewidthSampleSet, estimate
from ..exceptions import ConfigError, PletbError
from ..fitting import fit_batch
from ..mcm import run_mcm
from ..synth import ScanModel, synth_batch
from ..utils.parallel import ordered_map
from ..utils.seeding import derive_seed
from .spec import MCM, SweepSpec

__all__ = [
    "CellStats",
    "StudyReport",
    "StabilityReport",
    "ThresholdResult",
    "observe",
    "bias_sweep",
    "stability_curve",
    "consistency_probability",
    "consistency_threshold",
    "mcm_quality_sweep",
]

logger = logging.getLogger(__name__)

# seed path prefixes keeping observed batches apart from bootstrap and MCM library draws
OBSERVE_STREAM = 0
ESTIMATE_STREAM = 1


@dataclass(frozen=True)
class _Prediction:
    value: float
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None


@dataclass(frozen=True)
class CellStats:
    gamma: float
    nbar: float
    n_reps: int
    n_dropped: int
    mean: float
    signed_bias: float
    std: float
    consistency: float
    flagged: bool
    degenerate: bool
    ci_width: Optional[float] = None
    coverage: Optional[float] = None
    scans_needed: Optional[int] = None

    @property
    def bias(self):
        return abs(self.signed_bias)

    @property
    def relative_bias(self):
        return self.bias / self.gamma

    @property
    def relative_std(self):
        return self.std / self.gamma

    def to_dict(self):
        return {
            "gamma_mhz": self.gamma,
            "nbar": self.nbar,
            "n_reps": self.n_reps,
            "n_dropped": self.n_dropped,
            "mean_mhz": self.mean,
            "signed_bias_mhz": self.signed_bias,
            "bias_mhz": self.bias,
            "relative_bias": self.relative_bias,
            "std_mhz": self.std,
            "relative_std": self.relative_std,
            "consistency": self.consistency,
            "ci_width": self.ci_width,
            "coverage": self.coverage,
            "scans_needed": self.scans_needed,
            "flagged": self.flagged,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class StudyReport:
    """Per-(γ, n̄) statistics of one estimator over repeated synthetic batches."""

    kind: str
    spec: SweepSpec
    cells: Tuple[CellStats, ...]
    precision: float = 0.02

    METRICS = (
        "bias",
        "relative_bias",
        "signed_bias",
        "std",
        "relative_std",
        "consistency",
        "ci_width",
        "coverage",
        "scans_needed",
        "n_dropped",
    )

    def cell(self, gamma, nbar):
        for cell in self.cells:
            if cell.gamma == float(gamma) and cell.nbar == float(nbar):
                return cell
        raise KeyError((gamma, nbar))

    def matrix(self, metric):
        """``metric`` as a γ-rows × n̄-columns array; missing values are NaN."""
        out = np.full((len(self.spec.gammas), len(self.spec.nbars)), np.nan)
        for cell in self.cells:
            value = getattr(cell, metric)
            if value is not None:
                out[self.spec.gammas.index(cell.gamma), self.spec.nbars.index(cell.nbar)] = value
        return out

    def thresholds(self, confidence=0.99):
        """Per γ, the smallest swept n̄ whose consistency reaches ``confidence``.

        Returns {γ: (n̄*, resolved)}; unresolved rows report the top of the n̄ range.
        """
        consistency = self.matrix("consistency")
        out = {}
        for i, gamma in enumerate(self.spec.gammas):
            passing = np.nonzero(consistency[i] >= confidence)[0]
            if passing.size:
                out[gamma] = (self.spec.nbars[passing[0]], True)
            else:
                out[gamma] = (self.spec.nbars[-1], False)
        return out

    def to_dict(self):
        return {
            "kind": self.kind,
            "spec": self.spec.to_dict(),
            "precision": self.precision,
            "cells": [cell.to_dict() for cell in self.cells],
        }


@dataclass(frozen=True, eq=False)
class StabilityReport:
    gamma: float
    nbars: Tuple[float, ...]
    ks: Tuple[int, ...]
    # n̄ rows × k columns
    std: np.ndarray
    n_dropped: np.ndarray

    @property
    def relative_std(self):
        return self.std / self.gamma

    def stable_from(self, nbar, tolerance=0.03):
        """Smallest k from which the relative std stays below ``tolerance``, or None."""
        row = self.relative_std[self.nbars.index(float(nbar))]
        for j in range(len(self.ks)):
            if np.all(row[j:] < tolerance):
                return self.ks[j]
        return None

    def to_dict(self):
        return {
            "gamma_mhz": self.gamma,
            "nbars": list(self.nbars),
            "ks": list(self.ks),
            "std_mhz": self.std.tolist(),
            "relative_std": self.relative_std.tolist(),
            "n_dropped": self.n_dropped.tolist(),
        }


@dataclass(frozen=True)
class ThresholdResult:
    gamma: float
    nbar: float
    bracketed: bool
    step: float
    precision: float
    confidence: float
    probabilities: Dict[float, float] = field(default_factory=dict)

    def to_dict(self):
        return {
            "gamma_mhz": self.gamma,
            "nbar_threshold": self.nbar,
            "bracketed": self.bracketed,
            "step": self.step,
            "precision": self.precision,
            "confidence": self.confidence,
            "probabilities": {str(n): p for n, p in sorted(self.probabilities.items())},
        }


def observe(spec, gamma, nbar, k, seed):
    """Synthesize and fit ``k`` scans: the pipeline every estimator in a study sees."""
    model = ScanModel(gamma, nbar, spec.photon_sigma, spec.noise_mean, spec.window, seed)
    return fit_batch(synth_batch(model, k), spec.rule, spec.fit_config)


def _predict(spec, batch, gamma, nbar, cell, rep):
    samples = LinewidthSampleSet.from_fits(batch)
    seed = derive_seed(spec.seed, ESTIMATE_STREAM, cell, rep)
    if spec.estimator == MCM:
        grid = spec.grid_for(gamma, nbar)
        _, result = run_mcm(samples, grid, spec.mcm_settings(), seed)
        return _Prediction(result.gamma, *result.gamma_ci)
    report = estimate(samples, spec.estimator, spec.confidence, seed=seed)
    return _Prediction(report.value_mhz, report.ci_lo, report.ci_hi)


def _run_repetition(job):
    spec, cell, rep, gamma, nbar, ks = job
    batch = observe(spec, gamma, nbar, max(ks), derive_seed(spec.seed, OBSERVE_STREAM, cell, rep))
    outcome = {}
    for k in ks:
        try:
            outcome[k] = _predict(spec, batch.head(k), gamma, nbar, cell, rep)
        except PletbError as error:
            outcome[k] = error.code
    return outcome


def _run(spec, ks):
    """Every repetition of every cell; returns {(cell, k): [prediction or error code, ...]}."""
    cells = [(g, n) for g in spec.gammas for n in spec.nbars]
    jobs = [
        (spec, index, rep, gamma, nbar, tuple(ks))
        for index, (gamma, nbar) in enumerate(cells)
        for rep in range(spec.repetitions)
    ]
    logger.info(
        "%s sweep: %d cells x %d repetitions, k=%s", spec.estimator, len(cells), spec.repetitions, list(ks)
    )
    grouped = defaultdict(list)
    for job, outcome in zip(jobs, ordered_map(_run_repetition, jobs, spec.workers)):
        for k, prediction in outcome.items():
            grouped[(job[1], k)].append(prediction)
    return cells, grouped


def _cell_stats(spec, gamma, nbar, predictions, precision):
    ok = [p for p in predictions if isinstance(p, _Prediction)]
    n_dropped = len(predictions) - len(ok)
    flagged = n_dropped > spec.max_drop_fraction * len(predictions)
    values = np.array([p.value for p in ok], dtype=float)
    if flagged:
        logger.warning("gamma=%g nbar=%g: %d of %d repetitions dropped", gamma, nbar, n_dropped, len(predictions))
    if values.size == 0:
        nan = float("nan")
        return CellStats(gamma, nbar, 0, n_dropped, nan, nan, nan, 0.0, True, True)
    degenerate = values.size < 2
    std = 0.0 if degenerate else float(values.std(ddof=1))
    with_ci = [p for p in ok if p.ci_lo is not None]
    ci_width = coverage = None
    if with_ci:
        ci_width = float(np.mean([(p.ci_hi - p.ci_lo) / gamma for p in with_ci]))
        coverage = float(np.mean([p.ci_lo <= gamma <= p.ci_hi for p in with_ci]))
    return CellStats(
        gamma=gamma,
        nbar=nbar,
        n_reps=int(values.size),
        n_dropped=n_dropped,
        mean=float(values.mean()),
        signed_bias=float(values.mean() - gamma),
        std=std,
        consistency=float(np.mean(np.abs(values - gamma) / gamma <= precision)),
        flagged=flagged,
        degenerate=degenerate,
        ci_width=ci_width,
        coverage=coverage,
    )


def bias_sweep(spec, precision=0.02):
    """Mean bias |⟨γ̂⟩ - γ| and spread of ``spec.estimator`` on every (γ, n̄) cell."""
    cells, grouped = _run(spec, (spec.k,))
    stats = tuple(
        _cell_stats(spec, gamma, nbar, grouped[(index, spec.k)], precision)
        for index, (gamma, nbar) in enumerate(cells)
    )
    return StudyReport("bias", spec, stats, precision)


def stability_curve(gamma, nbars, ks, repetitions=50, base=SweepSpec()):
    """Standard deviation of the prediction after the first ``k`` scans, per n̄ and k."""
    ks = tuple(sorted(int(k) for k in ks))
    spec = replace(base, gammas=(gamma,), nbars=tuple(nbars), k=ks[-1], repetitions=repetitions)
    cells, grouped = _run(spec, ks)
    std = np.zeros((len(spec.nbars), len(ks)))
    dropped = np.zeros((len(spec.nbars), len(ks)), dtype=int)
    for j, _ in enumerate(spec.nbars):
        for c, k in enumerate(ks):
            stats = _cell_stats(spec, spec.gammas[0], spec.nbars[j], grouped[(j, k)], 0.02)
            std[j, c] = stats.std
            dropped[j, c] = stats.n_dropped
    return StabilityReport(spec.gammas[0], spec.nbars, ks, std, dropped)


def consistency_probability(gamma, nbar, k=2000, repetitions=100, precision=0.02, base=SweepSpec(), cell=0):
    """Fraction of repetitions whose prediction lies within ``precision`` of ``gamma``."""
    spec = replace(base, gammas=(gamma,), nbars=(nbar,), k=k, repetitions=repetitions)
    _, grouped = _run(replace(spec, seed=derive_seed(base.seed, cell)), (k,))
    return _cell_stats(spec, float(gamma), float(nbar), grouped[(0, k)], precision).consistency


def consistency_threshold(
    gamma, nbars, precision=0.02, confidence=0.99, k=2000, repetitions=100, base=SweepSpec()
):
    """Smallest swept n̄ at which ≥ ``confidence`` of the repetitions land within
    ``precision`` of the truth, found by bisection over the sorted ``nbars`` grid."""
    nbars = sorted(float(n) for n in nbars)
    probabilities = {}

    def passes(i):
        if nbars[i] not in probabilities:
            probabilities[nbars[i]] = consistency_probability(gamma, nbars[i], k, repetitions, precision, base, cell=i)
        return probabilities[nbars[i]] >= confidence

    def step_at(i):
        return nbars[i] - nbars[i - 1] if i > 0 else (nbars[1] - nbars[0] if len(nbars) > 1 else 0.0)

    if not passes(len(nbars) - 1):
        logger.warning("gamma=%g: threshold above the searched n̄ range (max %g)", gamma, nbars[-1])
        return ThresholdResult(gamma, nbars[-1], False, step_at(len(nbars) - 1), precision, confidence, probabilities)
    if passes(0):
        logger.warning("gamma=%g: threshold at or below the searched n̄ range (min %g)", gamma, nbars[0])
        return ThresholdResult(gamma, nbars[0], False, step_at(0), precision, confidence, probabilities)
    lo, hi = 0, len(nbars) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(gamma, nbars[hi], True, step_at(hi), precision, confidence, probabilities)


def mcm_quality_sweep(spec, ks=(250, 500, 1000, 2000), precision=0.02):
    """MCM bias, mean relative CI width and scans needed per (γ, n̄).

    Scans needed is the smallest ``k`` whose mean relative CI half-width is within
    ``precision``; ``None`` when no listed ``k`` gets there.
    """
    if spec.estimator != MCM:
        raise ConfigError(f"mcm_quality_sweep needs estimator={MCM!r}, got {spec.estimator!r}")
    ks = tuple(sorted(set(int(k) for k in ks) | {spec.k}))
    cells, grouped = _run(spec, ks)
    stats = []
    for index, (gamma, nbar) in enumerate(cells):
        cell = _cell_stats(spec, gamma, nbar, grouped[(index, spec.k)], precision)
        needed = None
        for k in ks:
            widths = [(p.ci_hi - p.ci_lo) / (2 * gamma) for p in grouped[(index, k)] if isinstance(p, _Prediction)]
            if widths and np.mean(widths) <= precision:
                needed = k
                break
        stats.append(replace(cell, scans_needed=needed))
    return StudyReport("mcm-quality", spec, tuple(stats), precision)
