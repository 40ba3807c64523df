import numpy as np
import pytest

from speciation.fitting import RankDeficientFitError, polyfit


def test_exact_line():
    x = np.linspace(0.1, 0.3, 10)
    fit = polyfit(x, 2.0 - 3.0 * x, 1)
    np.testing.assert_allclose(fit.coefficients, [2.0, -3.0], atol=1e-12)
    assert fit.sigma < 1e-12 and fit.max0 < 1e-12 and fit.n == 10


def test_quadratic_and_call():
    x = np.linspace(0, 1, 7)
    fit = polyfit(x, 1 + x + x ** 2, 2)
    assert fit(0.5) == pytest.approx(1.75)


def test_sigma_is_rms():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    fit = polyfit(x, y, 1)
    resid = y - fit(x)
    assert fit.sigma == pytest.approx(np.sqrt(np.mean(resid ** 2)))
    assert fit.max0 == pytest.approx(np.max(np.abs(resid)))


def test_too_few_points():
    with pytest.raises(ValueError, match="at least 3"):
        polyfit([0.0, 1.0], [1.0, 2.0], 1)


def test_rank_deficient():
    with pytest.raises(RankDeficientFitError):
        polyfit([1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 3.0, 4.0], 2)
