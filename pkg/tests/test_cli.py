from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import NoOpNotifier
from viscolub import cli, parse_config
from viscolub.cli import FIELD_COLUMNS, PRESSURE_COLUMNS, RESCALED_COLUMNS, main, write_csv
from viscolub.errors import StepFailure
from viscolub.notify import RunNotifier
from viscolub.validate import CheckResult, ValidationReport


pytestmark = pytest.mark.usefixtures("restore_root_logger")


def read_csv(path):
    header, *rows = path.read_text(encoding="utf-8").split("\n")[:-1]
    return header.split(","), np.array([[float(v) for v in row.split(",")] for row in rows])


def test_write_csv_format(tmp_path):
    path = write_csv(tmp_path / "nested" / "t.csv", ("a", "b"), [np.array([0.1, 1 / 3]), np.array([[1e22], [2.0]])])
    text = path.read_bytes().decode()
    assert text == "a,b\n0.10000000000000001,1e+22\n0.33333333333333331,2\n"
    assert "\r" not in text


def test_solve_writes_outputs(couette_config, tmp_path):
    assert main(["solve", "--config", str(couette_config)]) == 0

    out = tmp_path / "out"
    header, pressure = read_csv(out / "pressure.csv")
    assert tuple(header) == PRESSURE_COLUMNS
    assert pressure.shape == (33, 3)
    assert np.max(np.abs(pressure[:, 1:])) <= 1e-10

    header, fields = read_csv(out / "fields.csv")
    assert tuple(header) == FIELD_COLUMNS
    assert fields.shape == (33 * 33, 7)
    x, z, u1 = fields[:, 0], fields[:, 1], fields[:, 2]
    np.testing.assert_allclose(u1, 1 - z, atol=1e-9)
    assert x[0] == x[32] == 0.0

    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["verdict"] is True
    assert report["deviations"]["couette"] <= 1e-8


def test_out_and_grid_overrides(couette_config, tmp_path):
    target = tmp_path / "elsewhere"
    assert main(["solve", "--config", str(couette_config), "--out", str(target), "--grid", "16,8"]) == 0
    _, pressure = read_csv(target / "pressure.csv")
    _, fields = read_csv(target / "fields.csv")
    assert pressure.shape[0] == 17
    assert fields.shape[0] == 17 * 9


def test_validate_prints_report(couette_config, capsys):
    assert main(["validate", "--config", str(couette_config), "-q"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] is True
    assert report["residuals"]["differentiation"] == "spectral"
    assert report["smallness"]["chi"] == pytest.approx(0.4 / 6)


def test_failed_check_exits_with_5(couette_config, mocker):
    failed = ValidationReport(checks=[CheckResult.at_most("fields.trace", 1.0, 0.0, "sigma11 + sigma22 = 0")])
    mocker.patch("viscolub.cli.run_all", return_value=failed)
    assert main(["solve", "--config", str(couette_config)]) == 5


def test_rescale(couette_config, tmp_path):
    assert main(["rescale", "--config", str(couette_config), "--epsilon", "0.1", "--epsilon", "0.5"]) == 0
    header, scaled = read_csv(tmp_path / "out" / "fields_eps_0.1.csv")
    assert tuple(header) == RESCALED_COLUMNS
    y, u1, sigma12 = scaled[:, 1], scaled[:, 3], scaled[:, 6]
    np.testing.assert_allclose(u1, 1 - y / 0.1, atol=1e-9)
    np.testing.assert_allclose(sigma12, 10 * -0.2 / 1.01, rtol=1e-9)
    assert (tmp_path / "out" / "fields_eps_0.5.csv").exists()


def test_rescale_needs_an_epsilon(couette_config):
    assert main(["rescale", "--config", str(couette_config)]) == 2


def test_rescale_rejects_bad_epsilon_before_solving(couette_config, mocker):
    solve = mocker.spy(cli, "solve_case")
    assert main(["rescale", "--config", str(couette_config), "--epsilon", "0.5", "--epsilon", "1.5"]) == 3
    solve.assert_not_called()


def test_oracle_compare(couette_config, capsys):
    assert main(["oracle-compare", "--config", str(couette_config)]) == 0
    deviations = json.loads(capsys.readouterr().out)
    assert deviations["ode_vs_pointwise"] <= 1e-6
    assert deviations["couette"] <= 1e-8
    assert deviations["newtonian"] is None


def test_dump_config_round_trips(couette_config, tmp_path, capsys):
    assert main(["solve", "--config", str(couette_config), "--dump-config", "--grid", "64,16"]) == 0
    dumped = tmp_path / "dumped.ini"
    dumped.write_text(capsys.readouterr().out, encoding="utf-8")

    config = parse_config(dumped)
    assert (config.n, config.m) == (64, 16)
    assert config == parse_config(couette_config).with_overrides(grid=(64, 16))
    assert not (tmp_path / "out").exists()


def test_dump_config_skips_solvability(tmp_path, couette_config):
    path = tmp_path / "large_r.ini"
    path.write_text(couette_config.read_text().replace("r = 0.2", "r = 0.25"), encoding="utf-8")
    assert main(["solve", "--config", str(path), "--dump-config"]) == 0
    assert main(["solve", "--config", str(path)]) == 3


def test_unreadable_config(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "missing.ini")]) == 2


def test_solver_failure_exit_code(couette_config, mocker):
    mocker.patch("viscolub.validate.solve_q_pointwise", side_effect=StepFailure("stalled"))
    assert main(["solve", "--config", str(couette_config)]) == 4


def test_warnings_are_notified(couette_config, mocker):
    noop = NoOpNotifier()
    original_init = RunNotifier.__init__

    def init_with_noop(self, *args, **kwargs):
        original_init(self, *args, **kwargs)
        self.add(noop)

    mocker.patch.object(RunNotifier, "__init__", init_with_noop)
    # lambda* s / h = 0.1 exceeds the 1/12 shear-rate bound: one smallness warning
    assert main(["validate", "--config", str(couette_config), "-q"]) == 0
    assert len(noop.calls) == 1
    assert noop.calls[0]["title"] == "viscolub validate on couette.ini: exit 0"
    assert "smallness.shear_rate" in noop.calls[0]["body"]
