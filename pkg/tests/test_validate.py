import json
import logging

import numpy as np
import pytest

from viscolub import FluidParams, GapProfile, RunConfig, SolverChoice, build_fields, parse_config
from viscolub.errors import InvalidParameters, RheologyOutOfRange
from viscolub.validate import (
    SHEAR_LIMIT,
    CheckResult,
    bracket_coefficients,
    check_brackets,
    check_smallness,
    oracle_couette,
    oracle_deviations,
    oracle_newtonian,
    run_all,
    solve_case,
)


DERIVED_CHECKS = (
    "constitutive.slope_differences",
    "constitutive.compliance_bounds",
    "kappa.dk_dq_differences",
    "kappa.dk_dh_differences",
    "kappa.flux_monotone",
    "fields.shear_profile",
    "fields.regularity",
)


def couette_run(lambda_star=0.1, r=0.2, solver=SolverChoice.POINTWISE, n=32, m=32):
    return RunConfig(
        fluid=FluidParams(nu=1.0, r=r, lambda_star=lambda_star, s=1.0),
        gap=GapProfile.constant(1.0),
        n=n,
        m=m,
        solver=solver,
    )


def test_check_result_rejects_nan():
    check = CheckResult.at_most("nan", float("nan"), 1.0, "finite")
    assert not check.passed
    assert CheckResult.at_most("edge", 1.0, 1.0, "inclusive").passed


def test_couette_case_passes(couette_config):
    report = run_all(parse_config(couette_config))
    assert report.verdict, [check for check in report.checks if not check.passed]
    assert report.exit_code == 0
    # lambda* s / h = 0.1 is above 1/12: the only warning
    assert [check.name for check in report.warnings] == ["smallness.shear_rate"]
    assert report.deviations["couette"] <= 1e-8
    assert report.deviations["newtonian"] is None

    payload = report.to_dict()
    assert payload["verdict"] is True
    assert payload["error"] is None
    assert {check["name"] for check in payload["checks"]} >= {"fields.trace", "oracle.couette"}


def test_slider_with_both_solvers_passes():
    config = RunConfig(
        fluid=FluidParams(nu=1.0, r=0.2, lambda_star=1.0, s=1.0),
        gap=GapProfile.linear_slider(1.0, 2.0),
        flux=0.6,
        n=64,
        m=64,
        solver=SolverChoice.BOTH,
    )
    report = run_all(config)
    assert report.verdict, [check for check in report.checks if check.hard and not check.passed]
    assert report.deviations["ode_vs_pointwise"] <= 1e-6
    assert report.deviations["couette"] is None
    names = {check.name for check in report.checks}
    assert {"reynolds.flux_constancy.ode", "reynolds.flux_constancy.pointwise"} <= names


@pytest.mark.parametrize(("factor", "expected"), [(1 - 1e-3, True), (1 + 1e-3, False)])
def test_shear_rate_smallness_threshold(factor, expected):
    config = couette_run(lambda_star=SHEAR_LIMIT * factor, r=0.1)
    outcome = solve_case(config)
    block = check_smallness(outcome.fields, outcome.params)

    assert block.quantities["shear_rate"] == pytest.approx(SHEAR_LIMIT * factor, rel=1e-8)
    by_name = {check.name: check for check in block.checks}
    assert by_name["smallness.shear_rate"].passed is expected
    assert all(check.passed for name, check in by_name.items() if name != "smallness.shear_rate")
    assert all(not check.hard for check in block.checks)


def test_smallness_failure_is_only_a_warning(caplog):
    config = couette_run(lambda_star=1.0)
    with caplog.at_level(logging.WARNING):
        report = run_all(config)

    assert report.verdict
    assert report.exit_code == 0
    assert "smallness.shear_rate" in {check.name for check in report.warnings}
    assert any("Smallness hypothesis not met" in record.message for record in caplog.records)


def test_smallness_locations_are_on_the_grid():
    outcome = solve_case(couette_run(lambda_star=1.0))
    block = check_smallness(outcome.fields, outcome.params)
    for x, z in block.locations.values():
        assert 0.0 <= x <= 1.0
        assert 0.0 <= z <= 1.0


def test_chi():
    params = FluidParams(nu=3.0, r=0.2, lambda_star=1.0)
    assert params.chi == pytest.approx(0.5 * np.sqrt(0.16))


def test_bracket_coefficients():
    low, high = bracket_coefficients(FluidParams(nu=2.0, r=0.0, lambda_star=1.0))
    assert low == pytest.approx(1 / 24)
    assert high == pytest.approx(1 / 24)

    low, _ = bracket_coefficients(FluidParams(nu=1.0, r=0.25, lambda_star=1.0))
    assert low < 0


def test_brackets_hold_along_a_solution():
    params = FluidParams(nu=1.0, r=0.2, lambda_star=2.0, s=1.0)
    gap = GapProfile.cosine_bump(1.0, 0.5)
    outcome = solve_case(RunConfig(fluid=params, gap=gap, flux=0.1, n=32, m=16))
    block = check_brackets(outcome.primary, gap, params)

    assert block.satisfiable
    assert all(check.passed for check in block.checks)
    low, high = block.mobility_bracket
    assert low * (1 - 1e-8) <= block.mobility_range[0] <= block.mobility_range[1] <= high * (1 + 1e-8)


def test_refused_configuration_is_reported():
    config = couette_run(r=0.25)
    report = run_all(config)
    assert not report.verdict
    assert report.exit_code == RheologyOutOfRange.exit_code
    assert report.error.startswith("RheologyOutOfRange")
    assert report.to_dict()["checks"] == []


def test_out_of_range_file_parses_without_solvability(tmp_path, couette_config):
    path = tmp_path / "large_r.ini"
    path.write_text(couette_config.read_text().replace("r = 0.2", "r = 0.25"), encoding="utf-8")
    config = parse_config(path, require_solvable=False)
    assert run_all(config).exit_code == 4


def test_newtonian_oracle_constant_gap():
    params = FluidParams(nu=1.0, r=0.0, lambda_star=0.0, s=1.0)
    ps = oracle_newtonian(GapProfile.constant(1.0), params, flux=0.0, n=16)
    np.testing.assert_allclose(ps.q, 6.0)
    np.testing.assert_allclose(ps.dq, 0.0)
    np.testing.assert_allclose(ps.p, 6.0 * (ps.x - 0.5), atol=1e-13)


def test_newtonian_oracle_needs_newtonian_fluid():
    with pytest.raises(InvalidParameters):
        oracle_newtonian(GapProfile.constant(1.0), FluidParams(nu=1.0, r=0.1, lambda_star=0.5))


def test_newtonian_solvers_match_oracle():
    config = RunConfig(
        fluid=FluidParams(nu=1.0, r=0.1, lambda_star=0.0, s=1.0),
        gap=GapProfile.linear_slider(1.0, 2.0),
        flux=0.6,
        n=32,
        m=16,
        solver=SolverChoice.BOTH,
    )
    deviations = oracle_deviations(solve_case(config))
    assert deviations["newtonian"] <= 1e-9
    assert deviations["ode_vs_pointwise"] <= 1e-6


def test_couette_oracle_closed_forms():
    params = FluidParams(nu=2.0, r=0.2, lambda_star=0.5, s=1.5)
    fields = oracle_couette(params, h=0.5, n=16, m=8)
    shear = -1.5 / 0.5
    assert fields.shape == (17, 9)
    np.testing.assert_allclose(fields.u1[:, -1], 0.0, atol=1e-15)
    np.testing.assert_array_equal(fields.u1[:, 0], 1.5)
    np.testing.assert_allclose(fields.sigma12, 0.2 * 2.0 * shear / (1 + 0.25 * shear**2))
    np.testing.assert_allclose(fields.sigma11, -0.5 * shear * fields.sigma12)
    np.testing.assert_array_equal(fields.p, 0.0)


def slider_run(fluid, flux, gap=None, n=32, m=32):
    return RunConfig(
        fluid=fluid,
        gap=GapProfile.linear_slider(1.0, 2.0) if gap is None else gap,
        flux=flux,
        n=n,
        m=m,
        solver=SolverChoice.POINTWISE,
    )


def test_report_is_deterministic(couette_config):
    config = parse_config(couette_config)
    first, second = (json.dumps(run_all(config).to_dict(), sort_keys=True) for _ in range(2))
    assert first == second


def test_every_check_names_its_reference():
    report = run_all(slider_run(FluidParams(nu=1.0, r=0.2, lambda_star=1.0, s=1.0), 0.6))
    assert report.checks
    assert all(check.reference.strip() for check in report.checks)

    by_name = {check.name: check for check in report.checks}
    missing = [name for name in DERIVED_CHECKS if name not in by_name]
    assert not missing
    assert all(by_name[name].passed and by_name[name].hard for name in DERIVED_CHECKS)


def test_table_gap_passes():
    gap = GapProfile.from_table([0.0, 0.25, 0.5, 0.75, 1.0], [1.0, 1.1, 1.3, 1.6, 2.0])
    report = run_all(slider_run(FluidParams(nu=1.0, r=0.2, lambda_star=1.0, s=1.0), 0.6, gap=gap))
    assert report.verdict, [check for check in report.checks if check.hard and not check.passed]
    assert report.exit_code == 0


def test_strongly_elastic_slider_passes():
    # the shear rate turns over within a thin layer of each column
    report = run_all(slider_run(FluidParams(nu=1.0, r=0.2, lambda_star=3.0, s=3.0), 0.0, m=128))
    assert report.verdict, [check for check in report.checks if check.hard and not check.passed]
    assert report.exit_code == 0
    assert all(check.name.startswith(("smallness.", "brackets.")) for check in report.warnings)


def test_smallness_takes_a_richardson_step():
    outcome = solve_case(slider_run(FluidParams(nu=1.0, r=0.2, lambda_star=1.0, s=1.0), 0.6, m=16))
    refined = build_fields(outcome.primary, outcome.gap, outcome.params, 32)
    plain = check_smallness(outcome.fields, outcome.params)
    fine = check_smallness(refined, outcome.params)
    block = check_smallness(outcome.fields, outcome.params, refined)

    for name, value in block.quantities.items():
        coarse, finer = plain.quantities[name], fine.quantities[name]
        assert finer >= coarse - 1e-9
        assert value == pytest.approx(finer + max(finer - coarse, 0.0) / 3, rel=1e-14)
    assert block.locations == fine.locations
