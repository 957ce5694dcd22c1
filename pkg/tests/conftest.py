from __future__ import annotations

import logging
from collections.abc import Generator
from typing import TYPE_CHECKING, Any, cast

import numpy as np
import pytest
from apprise import NotifyBase, NotifyType

from viscolub import FluidParams, GapProfile, logger


if TYPE_CHECKING:
    from logging import _SysExcInfoType

    import loguru
    from pytest import LogCaptureFixture


class NoOpNotifier(NotifyBase):
    """Notifier that records what it was asked to send."""

    secure_protocol = False
    protocol = ("noop", "dummy")

    calls: list[dict]

    def __init__(self, **kwargs):
        super().__init__(secure=False, **kwargs)
        self.calls = []

    def url(self, privacy: bool = False, *args: Any, **kwargs: Any) -> str:
        return "noop://"

    def send(self, body: str, title: str = "", notify_type: NotifyType = NotifyType.INFO, **kwargs: Any) -> bool:
        self.calls.append({"title": title, "body": body})
        return True


def _create_log_record(record: loguru.Record) -> logging.LogRecord:
    log_record = logging.LogRecord(
        name=record["name"] or "viscolub",
        level=record["level"].no,
        pathname=str(record["file"].path),
        lineno=record["line"],
        msg=record["message"],
        args=(),
        exc_info=cast("_SysExcInfoType | None", record["exception"]),
        func=record["function"],
    )
    log_record.levelname = record["level"].name
    return log_record


@pytest.fixture
def caplog(caplog: LogCaptureFixture) -> Generator[LogCaptureFixture, None, None]:
    """pytest's caplog, fed by a loguru sink that writes straight into its handler."""

    def sink(message: loguru.Message) -> None:
        log_record = _create_log_record(message.record)
        if log_record.levelno >= caplog.handler.level:
            caplog.handler.emit(log_record)

    handler_id = logger.add(sink, format="{message}", level=0, catch=False)
    try:
        yield caplog
    finally:
        logger.remove(handler_id)


@pytest.fixture(autouse=True)
def silence_logger():
    logger.remove()  # Silence any output
    try:
        yield
    finally:
        logger.remove()  # And restore any handlers we added


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def viscoelastic() -> FluidParams:
    return FluidParams(nu=1.0, r=0.2, lambda_star=0.1, s=1.0)


@pytest.fixture
def newtonian() -> FluidParams:
    return FluidParams(nu=1.0, r=0.2, lambda_star=0.0, s=1.0)


@pytest.fixture
def slider() -> GapProfile:
    return GapProfile.linear_slider(1.0, 2.0)


COUETTE_CONFIG = """\
[fluid]
nu = 1.0
r = 0.2
lambda_star = 0.1
s = 1.0

[gap]
kind = constant
h0 = 1.0
length = 1.0

[grid]
N = 32
M = 32
"""


@pytest.fixture
def couette_config(tmp_path):
    path = tmp_path / "couette.ini"
    path.write_text(COUETTE_CONFIG + f"\n[output]\ndirectory = {tmp_path / 'out'}\n", encoding="utf-8")
    return path


@pytest.fixture
def restore_root_logger() -> Generator[None, None, None]:
    """Undo the standard-logging interception installed by ``configure_logging``."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    try:
        yield
    finally:
        root.handlers[:] = handlers
        root.setLevel(level)
        logging.captureWarnings(capture=False)
