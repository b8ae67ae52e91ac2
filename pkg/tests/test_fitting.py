import numpy as np
import pytest

from pletb.exceptions import ConfigError
from pletb.fitting import (
    FREE,
    TIED,
    AcceptanceRule,
    FitBatch,
    FitConfig,
    accept_scan,
    fit_batch,
    fit_voigt_scan,
    initial_guess,
)
from pletb.lineshape import DEFAULT_WINDOW, TIED_FWHM_FACTOR, VoigtParams, voigt_fwhm, voigt_value
from pletb.synth import Scan, ScanModel, synth_batch


def make_scan(counts, index=0):
    return Scan(DEFAULT_WINDOW, np.asarray(counts), index=index)


def single_bin_scan(value, position=37):
    counts = np.zeros(DEFAULT_WINDOW.n_bins, dtype=int)
    counts[position] = value
    return make_scan(counts)


def noiseless_scan(sigma, gamma, center=0.0, amplitude=4e5, offset=0.0):
    params = VoigtParams(amplitude=amplitude, center=center, sigma=sigma, gamma=gamma, offset=offset)
    return make_scan(np.rint(voigt_value(DEFAULT_WINDOW.centers, params)))


@pytest.mark.parametrize(
    "counts, expected",
    [
        (np.zeros(75), False),
        (np.eye(1, 75, 10)[0] * 3, True),
        (np.eye(1, 75, 10)[0] * 2 + np.eye(1, 75, 50)[0] * 2, False),
    ],
)
def test_accept_scan(counts, expected):
    assert accept_scan(make_scan(counts), AcceptanceRule(min_counts_per_bin=3)) is expected


def test_tied_fit_recovers_noiseless_linewidth():
    sigma = 20.0 / TIED_FWHM_FACTOR
    scan = noiseless_scan(sigma, sigma, center=3.0)
    assert scan.counts.max() > 5000
    result = fit_voigt_scan(scan, FitConfig(mode=TIED))
    assert result.converged and result.accepted
    assert result.fwhm == pytest.approx(20.0, rel=0.01)
    assert result.params.center == pytest.approx(3.0, abs=0.1)
    assert result.params.gamma == pytest.approx(result.params.sigma)


def test_free_fit_recovers_noiseless_linewidth():
    scan = noiseless_scan(sigma=2.0, gamma=8.0, offset=5.0)
    result = fit_voigt_scan(scan, FitConfig(mode=FREE))
    assert result.converged
    assert result.fwhm == pytest.approx(voigt_fwhm(2.0, 8.0), rel=0.03)
    assert result.params.gamma == pytest.approx(8.0, rel=0.05)


def test_single_bin_scan_fits_narrow_line():
    result = fit_voigt_scan(single_bin_scan(3))
    assert result.converged
    assert result.fwhm < DEFAULT_WINDOW.bin_width


def symmetric_scan(index=0):
    counts = np.zeros(75, dtype=int)
    counts[30:45] = [1, 2, 3, 5, 8, 12, 15, 16, 15, 12, 8, 5, 3, 2, 1]
    return make_scan(counts, index)


def test_symmetric_scan_is_centred():
    result = fit_voigt_scan(symmetric_scan())
    assert result.converged
    assert abs(result.params.center - DEFAULT_WINDOW.centers[37]) < DEFAULT_WINDOW.bin_width


def test_degenerate_scans_are_reported_not_raised():
    empty = fit_voigt_scan(make_scan(np.zeros(75)))
    assert not empty.converged and empty.reason == "too_few_bins"
    sparse = fit_voigt_scan(single_bin_scan(5), FitConfig(mode=FREE))
    assert not sparse.converged and sparse.reason == "too_few_bins"


def test_initial_guess_uses_moments():
    guess = initial_guess(single_bin_scan(6, position=40))
    assert guess.center == pytest.approx(DEFAULT_WINDOW.centers[40])
    assert guess.sigma > 0 and guess.gamma > 0


def test_fit_batch_bookkeeping():
    scans = [single_bin_scan(2), symmetric_scan(), make_scan(np.zeros(75))]
    scans = [Scan(s.window, s.counts, index=i) for i, s in enumerate(scans)]
    batch = fit_batch(scans)
    assert [r.index for r in batch] == [0, 1, 2]
    assert batch[0].reason == batch[2].reason == "rejected"
    assert batch[1].usable
    assert batch.n_scans == 3 and batch.n_rejected == 2 and batch.n_used == 1
    assert batch.fwhms().shape == (1,)


def test_fit_batch_empty_and_all_rejected():
    assert fit_batch([]) == FitBatch(())
    batch = fit_batch([single_bin_scan(1)] * 4)
    assert batch.summary() == {"n_scans": 4, "n_used": 0, "n_rejected": 4, "n_failed": 0}
    assert batch.acceptance_rate == 0.0


def test_fit_batch_on_synthetic_scans():
    model = ScanModel(true_fwhm=20, mean_photons=60, seed=3)
    batch = fit_batch(synth_batch(model, 40))
    assert batch.n_used >= 30
    assert 10 < np.median(batch.fwhms()) < 30
    assert np.all(batch.stderrs() >= 0)
    assert batch.head(10).n_scans == 10


def test_fit_config_validation():
    with pytest.raises(ConfigError):
        FitConfig(mode="lorentzian")
    with pytest.raises(ConfigError):
        AcceptanceRule(min_counts_per_bin=0)


@pytest.mark.ci_skip
def test_high_signal_scans_are_accepted_and_converge():
    batch = fit_batch(synth_batch(ScanModel(true_fwhm=20, mean_photons=176, seed=41), 500))
    assert batch.n_rejected == 0
    assert batch.n_used >= 0.99 * batch.n_scans


@pytest.mark.ci_skip
def test_free_and_tied_fits_agree_at_high_signal():
    scans = synth_batch(ScanModel(true_fwhm=20, mean_photons=176, seed=42), 300)
    tied = np.median(fit_batch(scans, config=FitConfig(mode=TIED)).fwhms())
    free = np.median(fit_batch(scans, config=FitConfig(mode=FREE)).fwhms())
    assert free == pytest.approx(tied, rel=0.05)


@pytest.mark.ci_skip
def test_fwhm_stderr_shrinks_with_signal():
    stderrs = [
        np.median(fit_batch(synth_batch(ScanModel(true_fwhm=20, mean_photons=nbar, seed=43), 300)).stderrs())
        for nbar in (30, 80, 176)
    ]
    assert stderrs[0] > stderrs[1] > stderrs[2]
