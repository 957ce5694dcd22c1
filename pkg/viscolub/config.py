"""Run configuration: INI-style ``[section]`` files with ``key = value`` entries.

Every problem in a file is collected before anything is raised, so one run of the tool lists all
of them: syntax and unknown/missing keys as :class:`~viscolub.errors.ParseError`, violated
numeric constraints as :class:`~viscolub.errors.ConstraintError`.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Final

from loguru import logger

from viscolub.constitutive import REYNOLDS_LIMIT, FluidParams
from viscolub.errors import ConstraintError, InvalidGap, InvalidParameters, ParseError
from viscolub.fields import MIN_COLUMN
from viscolub.reynolds import MIN_GRID, GapKind, GapProfile, default_flux


if TYPE_CHECKING:
    from collections.abc import Iterable

__all__ = ["RunConfig", "SolverChoice", "dump_config", "parse_config"]

DEFAULT_GRID: Final = 128

_GAP_KEYS: Final[dict[GapKind, tuple[str, ...]]] = {
    GapKind.CONSTANT: ("h0",),
    GapKind.LINEAR: ("h1", "h2"),
    GapKind.COSINE: ("h0", "amplitude"),
    GapKind.TABLE: ("x", "h"),
}

_SECTIONS: Final[dict[str, frozenset[str]]] = {
    "fluid": frozenset({"nu", "r", "lambda_star", "s", "rho"}),
    "gap": frozenset({"kind", "length", "h0", "h1", "h2", "amplitude", "x", "h"}),
    "flux": frozenset({"Q"}),
    "grid": frozenset({"N", "M"}),
    "solver": frozenset({"method"}),
    "output": frozenset({"directory", "epsilon"}),
    "notify": frozenset({"urls"}),
}


class SolverChoice(str, Enum):
    ODE = "ode"
    POINTWISE = "pointwise"
    BOTH = "both"

    @property
    def runs_ode(self) -> bool:
        return self is not SolverChoice.POINTWISE

    @property
    def runs_pointwise(self) -> bool:
        return self is not SolverChoice.ODE


@dataclass(frozen=True)
class RunConfig:
    fluid: FluidParams
    gap: GapProfile
    flux: float | None = None
    n: int = DEFAULT_GRID
    m: int = DEFAULT_GRID
    solver: SolverChoice = SolverChoice.POINTWISE
    output: Path = Path("out")
    epsilons: tuple[float, ...] = ()
    notify_urls: tuple[str, ...] = ()

    @property
    def effective_flux(self) -> float:
        return default_flux(self.gap, self.fluid) if self.flux is None else self.flux

    def with_overrides(
        self,
        *,
        output: Path | None = None,
        grid: tuple[int, int] | None = None,
        solver: SolverChoice | None = None,
        notify_urls: Iterable[str] = (),
    ) -> RunConfig:
        """Apply command-line overrides; the grid is re-validated."""
        changes: dict[str, object] = {}
        if output is not None:
            changes["output"] = output
        if grid is not None:
            problems = _grid_problems(*grid)
            if problems:
                raise ConstraintError(problems)
            changes["n"], changes["m"] = grid
        if solver is not None:
            changes["solver"] = solver
        if notify_urls:
            changes["notify_urls"] = (*self.notify_urls, *notify_urls)
        return dataclasses.replace(self, **changes)


def _grid_problems(n: int, m: int) -> list[str]:
    problems = []
    if n < MIN_GRID:
        problems.append(f"[grid] N must be >= {MIN_GRID}, got {n}")
    if m < MIN_COLUMN:
        problems.append(f"[grid] M must be >= {MIN_COLUMN}, got {m}")
    return problems


class _Reader:
    """Typed access to a parsed file that records problems instead of raising."""

    def __init__(self, parser: configparser.ConfigParser) -> None:
        self.parser = parser
        self.problems: list[str] = []

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def text(self, section: str, key: str, default: str | None = None) -> str | None:
        if self.has(section, key):
            return self.parser.get(section, key).strip()
        if default is None:
            self.problems.append(f"[{section}] {key} is required")
        return default

    def number(self, section: str, key: str, default: float | None = None) -> float | None:
        raw = self.text(section, key, None if default is None else repr(default))
        if raw is None:
            return None
        try:
            return float(raw)
        except ValueError:
            self.problems.append(f"[{section}] {key} is not a number: {raw!r}")
            return None

    def integer(self, section: str, key: str, default: int) -> int | None:
        raw = self.text(section, key, str(default))
        try:
            return int(raw or "")
        except ValueError:
            self.problems.append(f"[{section}] {key} is not an integer: {raw!r}")
            return None

    def numbers(self, section: str, key: str, *, required: bool = True) -> tuple[float, ...] | None:
        if not self.has(section, key):
            if required:
                self.problems.append(f"[{section}] {key} is required")
                return None
            return ()
        raw = self.parser.get(section, key)
        try:
            return tuple(float(item) for item in raw.split(",") if item.strip())
        except ValueError:
            self.problems.append(f"[{section}] {key} is not a comma-separated list of numbers: {raw!r}")
            return None

    def unknown_keys(self) -> None:
        if self.parser.defaults():
            self.problems.append(f"unknown keys in [DEFAULT]: {', '.join(sorted(self.parser.defaults()))}")
        for section in self.parser.sections():
            if section not in _SECTIONS:
                self.problems.append(f"unknown section [{section}]")
                continue
            for key in self.parser.options(section):
                if key not in _SECTIONS[section]:
                    self.problems.append(f"[{section}] unknown key {key!r}")


def _read_fluid(reader: _Reader) -> dict[str, float | None]:
    values = {key: reader.number("fluid", key) for key in ("nu", "r", "lambda_star", "s")}
    values["rho"] = reader.number("fluid", "rho", 1.0)
    return values


def _read_gap(reader: _Reader) -> tuple[GapKind | None, dict[str, object]]:
    raw_kind = reader.text("gap", "kind")
    if raw_kind is None:
        return None, {}
    try:
        kind = GapKind(raw_kind)
    except ValueError:
        reader.problems.append(f"[gap] kind must be one of {', '.join(k.value for k in GapKind)}, got {raw_kind!r}")
        return None, {}

    for key in _SECTIONS["gap"] - {"kind", "length", *_GAP_KEYS[kind]}:
        if reader.has("gap", key):
            reader.problems.append(f"[gap] {key} is not used by kind {kind.value}")

    if kind is GapKind.TABLE:
        values: dict[str, object] = {"xs": reader.numbers("gap", "x"), "hs": reader.numbers("gap", "h")}
        if reader.has("gap", "length"):
            values["length"] = reader.number("gap", "length")
        return kind, values

    values = {key: reader.number("gap", key) for key in _GAP_KEYS[kind]}
    values["length"] = reader.number("gap", "length", 1.0)
    return kind, values


def _build_gap(kind: GapKind, values: dict[str, object]) -> GapProfile:
    if kind is GapKind.TABLE:
        gap = GapProfile.from_table(values["xs"], values["hs"])  # type: ignore[arg-type]
        if "length" in values and values["length"] != gap.length:
            raise InvalidParameters(f"[gap] length {values['length']} does not match the last table x {gap.length}")
        return gap
    return GapProfile(kind, **values)  # type: ignore[arg-type]


def parse_config(path: str | Path, *, require_solvable: bool = True) -> RunConfig:
    """Read and validate a run configuration.

    Args:
        path: UTF-8 INI-style file.
        require_solvable: also demand r < 2/9, which the pressure solvers need.

    Raises:
        ParseError: unreadable file, unknown sections or keys, missing keys, malformed values.
        ConstraintError: values that parse but violate a numeric constraint.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        with Path(path).open(encoding="utf-8") as handle:
            parser.read_file(handle)
    except (OSError, UnicodeDecodeError, configparser.Error) as exc:
        raise ParseError([f"{path}: {exc}"]) from exc

    reader = _Reader(parser)
    reader.unknown_keys()
    fluid = _read_fluid(reader)
    kind, gap_values = _read_gap(reader)
    flux = reader.number("flux", "Q") if reader.has("flux", "Q") else None
    n = reader.integer("grid", "N", DEFAULT_GRID)
    m = reader.integer("grid", "M", DEFAULT_GRID)
    method = reader.text("solver", "method", SolverChoice.POINTWISE.value)
    directory = reader.text("output", "directory", "out")
    epsilons = reader.numbers("output", "epsilon", required=False)
    urls = reader.text("notify", "urls", "")

    solver = None
    try:
        solver = SolverChoice(method)
    except ValueError:
        reader.problems.append(f"[solver] method must be one of ode, pointwise, both; got {method!r}")

    if reader.problems:
        raise ParseError(reader.problems)

    problems = _grid_problems(n, m)  # type: ignore[arg-type]
    problems += [f"[output] epsilon must be in (0, 1], got {eps}" for eps in epsilons or () if not 0 < eps <= 1]
    if flux is not None and not math.isfinite(flux):
        problems.append(f"[flux] Q must be finite, got {flux}")

    params = gap = None
    try:
        params = FluidParams(**fluid)  # type: ignore[arg-type]
    except InvalidParameters as exc:
        problems.append(f"[fluid] {exc}")
    if kind is not None:
        try:
            gap = _build_gap(kind, gap_values)
        except (InvalidParameters, InvalidGap) as exc:
            problems.append(f"[gap] {exc}")
    if params is not None and require_solvable and not params.reynolds_admissible:
        problems.append(f"[fluid] r must be < 2/9 to solve the Reynolds problem, got {params.r}")
    if problems or params is None or gap is None or solver is None:
        raise ConstraintError(problems)

    config = RunConfig(
        fluid=params,
        gap=gap,
        flux=flux,
        n=n,  # type: ignore[arg-type]
        m=m,  # type: ignore[arg-type]
        solver=solver,
        output=Path(directory or "out"),
        epsilons=epsilons or (),
        notify_urls=tuple(url.strip() for url in (urls or "").split(",") if url.strip()),
    )
    logger.debug(f"Parsed {path}: {config.gap.kind.value} gap, N={config.n}, M={config.m}, solver={solver.value}")
    return config


def _floats(values: Iterable[float]) -> str:
    return ", ".join(repr(float(v)) for v in values)


def dump_config(config: RunConfig) -> str:
    """Render ``config`` in the format :func:`parse_config` reads back to an equal RunConfig."""
    fluid, gap = config.fluid, config.gap
    lines = ["[fluid]"]
    lines += [f"{key} = {getattr(fluid, key)!r}" for key in ("nu", "r", "lambda_star", "s", "rho")]

    lines += ["", "[gap]", f"kind = {gap.kind.value}"]
    if gap.kind is GapKind.TABLE:
        lines += [f"x = {_floats(gap.table_x)}", f"h = {_floats(gap.table_h)}"]
    else:
        lines.append(f"length = {gap.length!r}")
        lines += [f"{key} = {getattr(gap, key)!r}" for key in _GAP_KEYS[gap.kind]]

    if config.flux is not None:
        lines += ["", "[flux]", f"Q = {config.flux!r}"]
    lines += ["", "[grid]", f"N = {config.n}", f"M = {config.m}"]
    lines += ["", "[solver]", f"method = {config.solver.value}"]
    lines += ["", "[output]", f"directory = {config.output}"]
    if config.epsilons:
        lines.append(f"epsilon = {_floats(config.epsilons)}")
    if config.notify_urls:
        lines += ["", "[notify]", f"urls = {', '.join(config.notify_urls)}"]
    return "\n".join(lines) + "\n"
