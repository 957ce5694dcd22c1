import logging

import numpy as np
import pytest

from viscolub.quadrature import ORDER, composite_gauss_legendre, integrate


def test_single_panel_is_exact_for_degree_2n_minus_1():
    degree = 2 * ORDER - 1
    result = composite_gauss_legendre(lambda t: t**degree, np.asarray(0.0), np.asarray(1.0), 1)
    assert result == pytest.approx(1 / (degree + 1), rel=1e-14)


def test_batch_of_intervals():
    upper = np.array([0.5, 1.0, 2.0, 3.0])
    result = integrate(np.exp, 0.0, upper)
    np.testing.assert_allclose(result, np.expm1(upper), rtol=1e-13)


def test_degenerate_interval_is_zero():
    result = integrate(np.cos, np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    np.testing.assert_array_equal(result, [0.0, 0.0])


def test_stacked_integrands_share_one_evaluation(mocker):
    calls = mocker.Mock(side_effect=lambda t: np.stack([t, t * t]))
    first, second = integrate(calls, 0.0, np.array([1.0, 2.0]))
    np.testing.assert_allclose(first, [0.5, 2.0], rtol=1e-14)
    np.testing.assert_allclose(second, [1 / 3, 8 / 3], rtol=1e-14)
    # one coarse and one refined pass suffice for polynomials
    assert calls.call_count == 2


def test_panels_are_refined_for_peaked_integrands(mocker):
    runge = mocker.Mock(side_effect=lambda t: 1 / (1 + 400 * (t - 0.5) ** 2))
    result = integrate(runge, 0.0, 1.0)
    assert result == pytest.approx(np.arctan(10) / 10, rel=1e-12)
    assert runge.call_count > 2


def test_budget_exhaustion_is_logged(caplog):
    with caplog.at_level(logging.WARNING):
        result = integrate(lambda t: np.sqrt(np.abs(t - 0.3)), 0.0, 1.0, max_panels=4)

    assert np.isfinite(result)
    assert any("Quadrature stopped at 4 panels" in record.message for record in caplog.records)
