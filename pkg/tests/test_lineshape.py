import numpy as np
import pytest
from scipy import integrate, optimize, special

from pletb.exceptions import DegenerateShapeError, DomainError
from pletb.lineshape import (
    DEFAULT_WINDOW,
    FrequencyWindow,
    VoigtParams,
    faddeeva,
    gaussian_value,
    lifetime_to_linewidth,
    linewidth_to_lifetime,
    lorentzian_value,
    truncated_cauchy_cdf,
    truncated_cauchy_quantile,
    voigt_fwhm,
    voigt_value,
)


def test_faddeeva_known_values():
    assert faddeeva(0) == 1 + 0j
    w_i = faddeeva(1j)
    assert w_i.real == pytest.approx(0.4275836, abs=1e-6)
    assert abs(w_i.imag) < 1e-12


def test_faddeeva_reflection_symmetry():
    re, im = np.meshgrid(np.linspace(-4, 4, 9), np.linspace(-3, 3, 7))
    z = (re + 1j * im).ravel()
    np.testing.assert_allclose(faddeeva(-np.conj(z)), np.conj(faddeeva(z)), rtol=1e-10, atol=1e-15)


def test_faddeeva_on_imaginary_axis_is_scaled_erfc():
    x = np.linspace(0, 5, 51)
    w = faddeeva(1j * x)
    np.testing.assert_allclose(w.real, special.erfcx(x), rtol=1e-10)
    np.testing.assert_allclose(w.imag, 0.0, atol=1e-12)


def test_faddeeva_vectorized():
    w = faddeeva(np.array([0, 1j, 2 + 1j]))
    assert w.shape == (3,)
    assert w[0] == 1


@pytest.mark.parametrize("z", [complex(np.nan, 0), complex(0, np.inf)])
def test_faddeeva_rejects_non_finite(z):
    with pytest.raises(DomainError):
        faddeeva(z)


def test_voigt_peak_of_pure_gaussian():
    params = VoigtParams(amplitude=7.0, center=1.5, sigma=2.0, gamma=0.0)
    assert voigt_value(1.5, params) == pytest.approx(7.0 / (2.0 * np.sqrt(2 * np.pi)))


@pytest.mark.parametrize("sigma, gamma", [(1.0, 0.5), (3.0, 3.0), (0.5, 4.0)])
def test_voigt_integrates_to_amplitude(sigma, gamma):
    params = VoigtParams(amplitude=3.0, center=-2.0, sigma=sigma, gamma=gamma, offset=0.0)
    area, _ = integrate.quad(lambda x: voigt_value(x, params), -np.inf, np.inf, limit=500)
    assert area == pytest.approx(3.0, rel=1e-4)


def test_voigt_lorentzian_limit():
    gamma = 5.0
    params = VoigtParams(amplitude=10.0, center=0.0, sigma=0.01 * gamma, gamma=gamma)
    for x in (0.0, gamma, -gamma):
        assert voigt_value(x, params) == pytest.approx(lorentzian_value(x, 10.0, 0.0, gamma), rel=1e-2)


def test_voigt_gaussian_limit():
    x = np.linspace(-10, 10, 41)
    params = VoigtParams(amplitude=4.0, center=1.0, sigma=2.0, gamma=1e-9, offset=0.5)
    np.testing.assert_allclose(voigt_value(x, params), gaussian_value(x, 4.0, 1.0, 2.0, 0.5), rtol=1e-6)


@pytest.mark.parametrize("sigma, gamma", [(1.0, 0.0), (2.0, 2.0), (0.5, 6.0)])
def test_voigt_value_is_symmetric_about_center(sigma, gamma):
    params = VoigtParams(amplitude=5.0, center=-3.25, sigma=sigma, gamma=gamma, offset=0.2)
    dx = np.linspace(0, 30, 61)
    np.testing.assert_allclose(voigt_value(-3.25 + dx, params), voigt_value(-3.25 - dx, params), rtol=1e-12)


def test_voigt_value_needs_sigma():
    with pytest.raises(DegenerateShapeError):
        voigt_value(0.0, VoigtParams(amplitude=1.0, center=0.0, sigma=0.0, gamma=1.0))


def test_voigt_params_invariants():
    with pytest.raises(DomainError):
        VoigtParams(amplitude=1.0, center=0.0, sigma=0.0, gamma=0.0)
    with pytest.raises(DomainError):
        VoigtParams(amplitude=-1.0, center=0.0, sigma=1.0, gamma=1.0)


@pytest.mark.parametrize(
    "sigma, gamma, expected",
    [(1.0, 1.0, 3.6013), (1.0, 0.0, 2.3548), (0.0, 1.0, 2.0)],
)
def test_voigt_fwhm_reference_values(sigma, gamma, expected):
    assert voigt_fwhm(sigma, gamma) == pytest.approx(expected, abs=1e-3)


def test_voigt_fwhm_rejects_zero_widths():
    with pytest.raises(DomainError):
        voigt_fwhm(0.0, 0.0)


@pytest.mark.parametrize("sigma, gamma", [(1.0, 0.1), (1.0, 1.0), (1.0, 5.0), (0.3, 2.0), (4.0, 0.7)])
def test_voigt_fwhm_matches_half_maximum(sigma, gamma):
    params = VoigtParams(amplitude=1.0, center=0.0, sigma=sigma, gamma=gamma)
    half = voigt_value(0.0, params) / 2
    x_half = optimize.brentq(lambda x: voigt_value(x, params) - half, 0.0, 20 * (sigma + gamma), xtol=1e-12)
    assert voigt_fwhm(sigma, gamma) == pytest.approx(2 * x_half, rel=2e-4)


WIDTH_GRID = np.geomspace(0.1, 100.0, 5)


@pytest.mark.parametrize("sigma", WIDTH_GRID)
@pytest.mark.parametrize("gamma", WIDTH_GRID)
def test_voigt_fwhm_matches_half_maximum_over_width_grid(sigma, gamma):
    params = VoigtParams(amplitude=1.0, center=0.0, sigma=sigma, gamma=gamma)
    half = voigt_value(0.0, params) / 2
    x_half = optimize.brentq(lambda x: voigt_value(x, params) - half, 0.0, 5 * (sigma + gamma), xtol=1e-12)
    assert voigt_fwhm(sigma, gamma) == pytest.approx(2 * x_half, rel=2e-4)


def test_truncated_cauchy_quantile_endpoints():
    window = FrequencyWindow(-75, 75, 2)
    assert truncated_cauchy_quantile(0.5, 10.0, window) == pytest.approx(0.0, abs=1e-12)
    assert truncated_cauchy_quantile(0.0, 10.0, window) == pytest.approx(-75.0)
    assert truncated_cauchy_quantile(1.0, 10.0, window) == pytest.approx(75.0)


def test_truncated_cauchy_quantile_inverts_cdf():
    window = FrequencyWindow(-20, 40, 1)
    x = np.linspace(-19.5, 39.5, 50)
    np.testing.assert_allclose(truncated_cauchy_quantile(truncated_cauchy_cdf(x, 3.0, window), 3.0, window), x)


@pytest.mark.parametrize("gamma", [0.5, 10.0, 400.0])
def test_truncated_cauchy_quantile_strictly_increasing(gamma):
    u = np.linspace(1e-3, 1 - 1e-3, 999)
    assert np.all(np.diff(truncated_cauchy_quantile(u, gamma, DEFAULT_WINDOW)) > 0)


@pytest.mark.parametrize("u", [-0.1, 1.5, np.nan])
def test_truncated_cauchy_quantile_rejects_bad_probabilities(u):
    with pytest.raises(DomainError):
        truncated_cauchy_quantile(u, 10.0, DEFAULT_WINDOW)


def test_lifetime_to_linewidth():
    assert lifetime_to_linewidth(10.57) == pytest.approx(15.1, abs=0.05)
    assert lifetime_to_linewidth(1 / (2 * np.pi)) == pytest.approx(1000.0)
    assert lifetime_to_linewidth(105.7) == pytest.approx(lifetime_to_linewidth(10.57) / 10)
    assert linewidth_to_lifetime(lifetime_to_linewidth(3.2)) == pytest.approx(3.2)
    with pytest.raises(DomainError):
        lifetime_to_linewidth(0.0)


def test_frequency_window_bins():
    window = FrequencyWindow()
    assert window.n_bins == 75
    assert window.centers[0] == pytest.approx(-74.0)
    assert window.edges[-1] == pytest.approx(75.0)
    np.testing.assert_array_equal(window.bin_index([-75.0, -73.0, 0.0, 75.0]), [0, 1, 37, 74])
    assert window.shifted(100.0) == FrequencyWindow(-175.0, -25.0, 2.0)


@pytest.mark.parametrize("lo, hi, bin_width", [(0, 0, 1), (10, 0, 1), (0, 10, 0), (0, 1, 5)])
def test_frequency_window_rejects_invalid(lo, hi, bin_width):
    with pytest.raises(DomainError):
        FrequencyWindow(lo, hi, bin_width)
