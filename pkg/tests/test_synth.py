import numpy as np
import pytest
from scipy import stats

from pletb.exceptions import DomainError, EstimatorError
from pletb.fitting import AcceptanceRule, accept_scan
from pletb.lineshape import DEFAULT_WINDOW, FrequencyWindow, truncated_cauchy_cdf
from pletb.synth import (
    INGESTED,
    Scan,
    ScanModel,
    derive_scan_rng,
    draw_photon_count,
    estimate_noise_mean,
    estimate_photon_statistics,
    synth_batch,
    synth_scan,
    synth_scan_traced,
)
from pletb.utils.seeding import derive_rng


def test_draw_photon_count_degenerate_normal():
    draws = draw_photon_count(25, 0, derive_rng(1), size=100)
    assert np.all(draws == 25)


def test_draw_photon_count_is_clamped():
    draws = draw_photon_count(0, 6, derive_rng(2), size=10_000)
    assert draws.min() >= 0
    assert draws.dtype == np.int64


def test_draw_photon_count_mean():
    draws = draw_photon_count(25, 6, derive_rng(3), size=200_000)
    assert draws.mean() == pytest.approx(25, rel=5e-3)


def test_synth_scan_conserves_photons():
    model = ScanModel(true_fwhm=20, mean_photons=25, photon_sigma=6, noise_mean=2, seed=11)
    for index in range(20):
        scan, trace = synth_scan_traced(model, derive_scan_rng(model.seed, index), index)
        assert scan.total == trace.signal + trace.noise
        assert scan.counts.shape == (DEFAULT_WINDOW.n_bins,)
        assert scan.index == index


def test_synth_scan_narrow_line_hits_central_bin():
    model = ScanModel(true_fwhm=0.01, mean_photons=40, photon_sigma=0, noise_mean=0)
    scan = synth_scan(model, derive_rng(5))
    assert scan.total == 40
    assert scan.counts[DEFAULT_WINDOW.bin_index(0.0)] == 40


def test_synth_scan_is_deterministic():
    model = ScanModel(true_fwhm=20, mean_photons=25, seed=9)
    assert synth_scan(model, derive_scan_rng(9, 3)) == synth_scan(model, derive_scan_rng(9, 3))


def test_synth_batch_first_scan_uses_stream_zero():
    model = ScanModel(true_fwhm=20, mean_photons=25, seed=4)
    (scan,) = synth_batch(model, 1)
    assert scan == synth_scan(model, derive_scan_rng(4, 0), index=0)


def test_synth_batch_seeds_differ():
    a = synth_batch(ScanModel(20, 25, seed=1), 10)
    b = synth_batch(ScanModel(20, 25, seed=2), 10)
    assert any(not np.array_equal(x.counts, y.counts) for x, y in zip(a, b))


def test_synth_batch_independent_of_workers():
    model = ScanModel(true_fwhm=15, mean_photons=30, seed=21)
    serial = synth_batch(model, 600)
    parallel = synth_batch(model, 600, workers=2)
    assert serial == parallel
    assert [scan.index for scan in serial] == list(range(600))


def test_acceptance_fraction_is_fixed_per_seed(record_property):
    model = ScanModel(true_fwhm=20, mean_photons=25, seed=2000)
    rule = AcceptanceRule(min_counts_per_bin=3)
    fraction = np.mean([accept_scan(scan, rule) for scan in synth_batch(model, 2000)])
    record_property("acceptance_fraction", float(fraction))
    assert fraction == np.mean([accept_scan(scan, rule) for scan in synth_batch(model, 2000, workers=2)])
    assert 0.0 < fraction < 1.0


def test_signal_frequencies_follow_truncated_cauchy():
    window = FrequencyWindow(-75, 75, 2)
    model = ScanModel(true_fwhm=20, mean_photons=100_000, photon_sigma=0, noise_mean=0, window=window)
    _, trace = synth_scan_traced(model, derive_rng(13))
    assert trace.signal == 100_000
    result = stats.kstest(trace.signal_frequencies, lambda x: truncated_cauchy_cdf(x, model.gamma, window))
    assert result.statistic < 0.01


def test_background_counts_are_poisson():
    model = ScanModel(true_fwhm=20, mean_photons=0, photon_sigma=0, noise_mean=2, seed=17)
    totals = np.array([scan.total for scan in synth_batch(model, 5000)])
    observed = np.array([np.sum(totals == n) for n in range(7)] + [np.sum(totals >= 7)])
    probabilities = np.append(stats.poisson.pmf(np.arange(7), 2), stats.poisson.sf(6, 2))
    _, p_value = stats.chisquare(observed, probabilities * totals.size)
    assert p_value > 1e-3


def test_scan_validation():
    with pytest.raises(DomainError):
        Scan(DEFAULT_WINDOW, np.zeros(10))
    with pytest.raises(DomainError):
        Scan(DEFAULT_WINDOW, -np.ones(75))
    scan = Scan(DEFAULT_WINDOW, np.zeros(75), provenance=INGESTED)
    with pytest.raises(ValueError):
        scan.counts[0] = 1


def test_scan_model_validation():
    with pytest.raises(DomainError):
        ScanModel(true_fwhm=0, mean_photons=25)
    with pytest.raises(DomainError):
        ScanModel(true_fwhm=20, mean_photons=-1)


def test_estimate_photon_statistics_recovers_model():
    model = ScanModel(true_fwhm=20, mean_photons=25, photon_sigma=6, noise_mean=2, seed=23)
    scans = synth_batch(model, 4000)
    mean_photons, photon_sigma = estimate_photon_statistics(scans, noise_mean=2)
    assert mean_photons == pytest.approx(25, rel=0.03)
    assert photon_sigma == pytest.approx(6, rel=0.1)


def test_estimate_noise_mean():
    model = ScanModel(true_fwhm=20, mean_photons=0, photon_sigma=0, noise_mean=3, seed=29)
    assert estimate_noise_mean(synth_batch(model, 3000)) == pytest.approx(3, rel=0.05)
    with pytest.raises(EstimatorError):
        estimate_noise_mean([])
