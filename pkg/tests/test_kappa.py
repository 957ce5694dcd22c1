import numpy as np
import pytest

from viscolub import FluidParams, KappaQuery, closure_moments, dk_dh, dk_dq, f_eval, gap_flux, kappa_solve, phi, psi
from viscolub.constitutive import stress_antiderivative
from viscolub.errors import InvalidGap


NEWTONIAN = FluidParams(nu=1.0, r=0.0, lambda_star=0.0)
VISCOELASTIC = FluidParams(nu=1.0, r=0.2, lambda_star=0.1)
STRONG = FluidParams(nu=1.0, r=0.2, lambda_star=2.0)


def random_queries(rng, count=100):
    return KappaQuery(
        h=rng.uniform(0.2, 3.0, count),
        q=rng.uniform(-10.0, 10.0, count),
        s=rng.uniform(-3.0, 3.0, count),
    )


def test_gap_must_be_positive():
    with pytest.raises(InvalidGap):
        KappaQuery(h=np.array([1.0, 0.0]), q=0.0, s=0.0)


def test_f_eval_examples():
    assert f_eval(KappaQuery(1.3, 0.0, 0.0), 0.0, VISCOELASTIC) == 0.0

    h, q, s, kappa = 1.5, 2.0, -0.5, 0.3
    expected = q * h**2 / 2 + kappa * h + s
    assert f_eval(KappaQuery(h, q, s), kappa, NEWTONIAN) == pytest.approx(expected, abs=1e-12)

    kappa = phi(-1.0, VISCOELASTIC)
    assert f_eval(KappaQuery(1.0, 0.0, 1.0), kappa, VISCOELASTIC) == pytest.approx(0.0, abs=1e-12)


def test_f_eval_matches_legendre_transform():
    # int_0^h psi(q t + kappa) dt = [y psi(y) - Phi(psi(y))] / q between kappa and q h + kappa
    h, q, s, kappa = 1.2, 3.0, 0.4, -1.1

    def primitive(y):
        shear = psi(y, STRONG)
        return y * shear - stress_antiderivative(shear, STRONG)

    expected = (primitive(q * h + kappa) - primitive(kappa)) / q + s
    assert f_eval(KappaQuery(h, q, s), kappa, STRONG) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("params", [VISCOELASTIC, STRONG])
def test_kappa_examples(params):
    h, q, s = 1.7, 3.0, 0.8
    assert kappa_solve(KappaQuery(h, q, 0.0), params) == pytest.approx(-q * h / 2, abs=1e-12)
    assert kappa_solve(KappaQuery(h, 0.0, s), params) == pytest.approx(phi(-s / h, params), abs=1e-12)


def test_kappa_newtonian_closed_form():
    h, q, s = 0.8, -4.0, 1.5
    assert kappa_solve(KappaQuery(h, q, s), NEWTONIAN) == pytest.approx(-(q * h / 2 + s / h), abs=1e-12)


def test_root_certificate(rng):
    queries = random_queries(rng)
    for params in (VISCOELASTIC, STRONG):
        kappa = kappa_solve(queries, params)
        residual = np.abs(f_eval(queries, kappa, params))
        assert np.all(residual <= 1e-10 * np.maximum(1.0, np.abs(queries.s)))


def test_partials_match_central_differences(rng):
    queries = random_queries(rng)
    h, q, s = queries.arrays()
    for params in (VISCOELASTIC, STRONG):
        slope_q = dk_dq(queries, params)
        slope_h = dk_dh(queries, params)
        assert np.all(slope_q < 0)

        dq = 1e-5 * np.maximum(1.0, np.abs(q))
        numeric_q = (kappa_solve(KappaQuery(h, q + dq, s), params) - kappa_solve(KappaQuery(h, q - dq, s), params)) / (
            2 * dq
        )
        dh = 1e-5 * h
        numeric_h = (kappa_solve(KappaQuery(h + dh, q, s), params) - kappa_solve(KappaQuery(h - dh, q, s), params)) / (
            2 * dh
        )
        assert np.max(np.abs(slope_q - numeric_q) / np.maximum(1.0, np.abs(numeric_q))) <= 1e-6
        assert np.max(np.abs(slope_h - numeric_h) / np.maximum(1.0, np.abs(numeric_h))) <= 1e-6


def test_kappa_slope_bracket(rng):
    queries = random_queries(rng)
    h = queries.arrays()[0]
    m, big_m = STRONG.compliance_bounds
    slope = dk_dq(queries, STRONG)
    assert np.all(slope >= -big_m * h / (2 * m) - 1e-12)
    assert np.all(slope <= -m * h / (2 * big_m) + 1e-12)


def test_newtonian_partials():
    h, q, s = 1.4, 2.5, -0.7
    kq = KappaQuery(h, q, s)
    assert dk_dq(kq, NEWTONIAN) == pytest.approx(-h / 2, rel=1e-12)
    assert dk_dh(kq, NEWTONIAN) == pytest.approx(-(q * h / 2 - s / h) / h, rel=1e-12)
    assert dk_dh(KappaQuery(h, 0.0, 0.0), VISCOELASTIC) == 0.0


def test_gap_flux_examples():
    h, s = 1.3, 0.9
    assert gap_flux(KappaQuery(h, 0.0, s), STRONG) == pytest.approx(s * h / 2, abs=1e-12)
    assert gap_flux(KappaQuery(h, 0.0, 0.0), STRONG) == 0.0

    q = -2.0
    assert gap_flux(KappaQuery(h, q, s), NEWTONIAN) == pytest.approx(s * h / 2 - q * h**3 / 12, abs=1e-12)


def test_gap_flux_decreases_with_gradient(rng):
    queries = random_queries(rng, count=30)
    h, q, s = queries.arrays()
    dq = 1e-5 * np.maximum(1.0, np.abs(q))
    upper = gap_flux(KappaQuery(h, q + dq, s), STRONG)
    lower = gap_flux(KappaQuery(h, q - dq, s), STRONG)
    slope = (upper - lower) / (2 * dq)
    assert np.all(slope < 0)

    # the exact slope is the mobility U
    mobility = closure_moments(queries, STRONG).mobility
    np.testing.assert_allclose(slope, mobility, rtol=1e-5)


def test_moments_orthogonality(rng):
    moments = closure_moments(random_queries(rng, count=20), STRONG)
    assert np.max(np.abs(moments.orthogonality) / (moments.h * moments.i0)) <= 1e-12
