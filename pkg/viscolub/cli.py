"""Command line: ``viscolub {solve,validate,rescale,oracle-compare} --config FILE``.

Exit codes: 0 success, 2 unreadable config, 3 violated constraint, 4 solver failure,
5 a hard validation check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger

from viscolub.config import SolverChoice, dump_config, parse_config
from viscolub.errors import ConstraintError, ParseError, ViscolubError
from viscolub.fields import rescale_to_epsilon
from viscolub.logs import configure_logging
from viscolub.notify import RunNotifier
from viscolub.validate import oracle_deviations, run_all, solve_case


if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from viscolub._arrays import FloatArray
    from viscolub.config import RunConfig
    from viscolub.fields import LimitFields
    from viscolub.reynolds import PressureSolution

__all__ = ["cmd_oracle_compare", "cmd_rescale", "cmd_solve", "cmd_validate", "main", "write_csv"]

PRESSURE_COLUMNS: Final = ("x", "q", "p")
FIELD_COLUMNS: Final = ("x", "z", "u1", "u2", "sigma11", "sigma12", "sigma22")
RESCALED_COLUMNS: Final = ("x", "y", "p", "u1", "u2", "sigma11", "sigma12", "sigma22")


def write_csv(path: Path, columns: Sequence[str], values: Sequence[FloatArray]) -> Path:
    """Comma-separated, 17 significant digits, LF line endings, one header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([np.asarray(v, dtype=float).ravel() for v in values])
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        np.savetxt(handle, table, fmt="%.17g", delimiter=",", header=",".join(columns), comments="", newline="\n")
    logger.info(f"Wrote {path} ({table.shape[0]} rows)")
    return path


def write_pressure(directory: Path, ps: PressureSolution) -> Path:
    return write_csv(directory / "pressure.csv", PRESSURE_COLUMNS, [ps.x, ps.q, ps.p])


def write_fields(directory: Path, fields: LimitFields) -> Path:
    values = [fields.x_grid, fields.z, fields.u1, fields.u2, fields.sigma11, fields.sigma12, fields.sigma22]
    return write_csv(directory / "fields.csv", FIELD_COLUMNS, values)


def write_rescaled(directory: Path, fields: LimitFields) -> Path:
    values = [fields.x_grid, fields.z, fields.p, fields.u1, fields.u2, fields.sigma11, fields.sigma12, fields.sigma22]
    return write_csv(directory / f"fields_eps_{fields.epsilon:g}.csv", RESCALED_COLUMNS, values)


def _dump_json(payload: object) -> str:
    return json.dumps(payload, indent=2, sort_keys=False)


def cmd_solve(config: RunConfig) -> int:
    """Solve, write pressure.csv, fields.csv and report.json (plus any configured rescalings)."""
    outcome = solve_case(config)
    write_pressure(config.output, outcome.primary)
    write_fields(config.output, outcome.fields)
    for epsilon in config.epsilons:
        write_rescaled(config.output, rescale_to_epsilon(outcome.fields, epsilon))

    report = run_all(config, outcome=outcome)
    report_path = config.output / "report.json"
    report_path.write_text(_dump_json(report.to_dict()) + "\n", encoding="utf-8")
    logger.info(f"Wrote {report_path}")
    return report.exit_code


def cmd_validate(config: RunConfig) -> int:
    report = run_all(config)
    print(_dump_json(report.to_dict()))  # noqa: T201
    return report.exit_code


def cmd_rescale(config: RunConfig, epsilons: Sequence[float] = ()) -> int:
    """Write ``fields_eps_<epsilon>.csv`` for every requested epsilon (default: the configured list)."""
    epsilons = tuple(epsilons) or config.epsilons
    if not epsilons:
        raise ParseError(["rescale needs --epsilon or [output] epsilon"])
    if bad := [eps for eps in epsilons if not (math.isfinite(eps) and 0 < eps <= 1)]:
        raise ConstraintError(f"epsilon must be in (0, 1], got {eps}" for eps in bad)
    fields = solve_case(config).fields
    for epsilon in epsilons:
        write_rescaled(config.output, rescale_to_epsilon(fields, epsilon))
    return 0


def cmd_oracle_compare(config: RunConfig) -> int:
    """Run both pressure solvers and print their deviations from each other and from the closed forms."""
    outcome = solve_case(config.with_overrides(solver=SolverChoice.BOTH))
    print(_dump_json(oracle_deviations(outcome)))  # noqa: T201
    return 0


def _grid(value: str) -> tuple[int, int]:
    try:
        n, m = (int(part) for part in value.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected N,M, got {value!r}") from exc
    return n, m


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="run configuration file")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] directory)")
    common.add_argument("--grid", type=_grid, metavar="N,M", help="grid size (overrides [grid])")
    common.add_argument("--solver", choices=[choice.value for choice in SolverChoice], help="pressure solver")
    common.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    common.add_argument("--notify", action="append", default=[], metavar="URL", help="apprise URL (repeatable)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="count", default=0)

    parser = argparse.ArgumentParser(prog="viscolub", description="Thin-film viscoelastic lubrication solver.")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("solve", parents=[common], help="solve and write CSV fields and a report")
    commands.add_parser("validate", parents=[common], help="solve and print the validation report")
    rescale = commands.add_parser("rescale", parents=[common], help="write fields rescaled to a finite gap")
    rescale.add_argument("--epsilon", type=float, action="append", default=[], help="gap scale in (0, 1]")
    commands.add_parser("oracle-compare", parents=[common], help="compare the solvers with closed-form oracles")
    return parser


def _dispatch(args: argparse.Namespace) -> Callable[[RunConfig], int]:
    if args.command == "solve":
        return cmd_solve
    if args.command == "validate":
        return cmd_validate
    if args.command == "rescale":
        return lambda config: cmd_rescale(config, args.epsilon)
    return cmd_oracle_compare


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose - args.quiet)

    try:
        config = parse_config(args.config, require_solvable=not args.dump_config).with_overrides(
            output=args.out,
            grid=args.grid,
            solver=SolverChoice(args.solver) if args.solver else None,
            notify_urls=args.notify,
        )
    except ViscolubError as exc:
        logger.error(f"{args.config}: {exc}")
        return exc.exit_code

    if args.dump_config:
        sys.stdout.write(dump_config(config))
        return 0

    notifier = RunNotifier(config.notify_urls)
    try:
        code = _dispatch(args)(config)
    except ViscolubError as exc:
        logger.error(f"{args.command} failed: {type(exc).__name__}: {exc}")
        code = exc.exit_code
    finally:
        notifier.close()

    notifier.send(title=f"viscolub {args.command} on {args.config.name}: exit {code}")
    return code
