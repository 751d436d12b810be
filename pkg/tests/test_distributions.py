import numpy as np
import pytest
from scipy import integrate, stats

from risknet.distributions import SQRT_2_OVER_PI, InnovationDist, skewt_absmoment
from risknet.exceptions import DomainException

SKEWT = [InnovationDist('skewt', 8.0, 1.0), InnovationDist('skewt', 5.0, 1.3), InnovationDist('skewt', 12.0, 0.8)]


@pytest.mark.parametrize('dist', SKEWT, ids=lambda d: f'nu={d.shape},xi={d.skew}')
def test_standardized_moments(dist):
    mean, _ = integrate.quad(lambda x: x * dist.pdf(x), -np.inf, np.inf)
    second, _ = integrate.quad(lambda x: x * x * dist.pdf(x), -np.inf, np.inf)
    assert mean == pytest.approx(0.0, abs=1e-7)
    assert second == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize('dist', SKEWT, ids=lambda d: f'nu={d.shape},xi={d.skew}')
def test_abs_moment_matches_quadrature(dist):
    below, _ = integrate.quad(lambda x: -x * dist.pdf(x), -np.inf, 0.0)
    above, _ = integrate.quad(lambda x: x * dist.pdf(x), 0.0, np.inf)
    expected = below + above
    assert dist.abs_moment() == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize('dist', SKEWT, ids=lambda d: f'nu={d.shape},xi={d.skew}')
def test_cdf_and_ppf_agree(dist):
    p = np.linspace(0.001, 0.999, 41)
    np.testing.assert_allclose(dist.cdf(dist.ppf(p)), p, atol=1e-10)
    x = np.linspace(-4, 4, 17)
    cumulative = [integrate.quad(dist.pdf, -np.inf, v)[0] for v in x]
    np.testing.assert_allclose(dist.cdf(x), cumulative, atol=1e-7)


def test_symmetric_skewt_is_unit_variance_t():
    dist = InnovationDist('skewt', 6.0, 1.0)
    scale = np.sqrt(6.0 / 4.0)
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(dist.logpdf(x), stats.t.logpdf(x * scale, 6.0) + np.log(scale), atol=1e-12)
    assert dist.cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert dist.median() == pytest.approx(0.0, abs=1e-12)


def test_normal_family():
    dist = InnovationDist('normal')
    assert dist.num_params == 0
    assert dist.abs_moment() == SQRT_2_OVER_PI
    assert float(dist.logpdf(0.0)) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-15)
    assert dist.with_params([]) is dist


def test_right_skew_moves_mass_right():
    dist = InnovationDist('skewt', 8.0, 1.5)
    assert dist.median() < 0.0
    assert float(dist.cdf(0.0)) > 0.5


def test_rvs_is_seeded():
    dist = InnovationDist('skewt', 7.0, 1.1)
    first = dist.rvs(100, np.random.default_rng(1))
    second = dist.rvs(100, np.random.default_rng(1))
    np.testing.assert_array_equal(first, second)


@pytest.mark.parametrize('kwargs', [
    {'family': 'laplace'},
    {'family': 'skewt', 'shape': 2.0},
    {'family': 'skewt', 'shape': 8.0, 'skew': 0.0},
    {'family': 'skewt', 'shape': float('nan')},
])
def test_invalid_parameters(kwargs):
    with pytest.raises(DomainException):
        InnovationDist(**kwargs)


def test_median_maps_to_half():
    dist = InnovationDist('skewt', 5.0, 1.5)
    assert float(dist.cdf(dist.median())) == pytest.approx(0.5, abs=1e-10)


def test_abs_moment_matches_monte_carlo():
    dist = InnovationDist('skewt', 5.0, 2.0)
    draws = dist.rvs(400_000, np.random.default_rng(31))
    standard_error = np.abs(draws).std() / np.sqrt(draws.size)
    assert skewt_absmoment(dist) == pytest.approx(np.abs(draws).mean(), abs=5 * standard_error)
    assert skewt_absmoment(InnovationDist('normal')) == SQRT_2_OVER_PI
