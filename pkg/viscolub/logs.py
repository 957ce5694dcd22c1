from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, ClassVar, Final

from loguru import logger


if TYPE_CHECKING:
    from types import FrameType

__all__ = ["InterceptHandler", "configure_logging", "level_for"]

LEVELS: Final = ("TRACE", "DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
DEFAULT_LEVEL: Final = "INFO"
FORMAT: Final = "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | {name}:{line} - {message}"


class InterceptHandler(logging.Handler):
    """Route standard-library log records (numpy, scipy, ``py.warnings``) into loguru.

    The reported location is the first frame outside :mod:`logging` and this module, so loguru
    shows where the record was really emitted.
    """

    LOGGING_DIRECTORY: ClassVar[str] = Path(logging.__file__).parent.resolve().as_posix().lower()
    CURRENT_FILENAME: ClassVar[str] = Path(__file__).resolve().as_posix().lower()

    def _should_ignore_this_frame(self, frame: FrameType) -> bool:
        filename = frame.f_code.co_filename
        if filename.endswith("<string>"):
            return True
        resolved = Path(filename).resolve().as_posix().lower()
        return resolved == self.CURRENT_FILENAME or resolved.startswith(self.LOGGING_DIRECTORY)

    def emit(self, record: logging.LogRecord) -> None:
        # A record reaching several handlers through propagation is forwarded once
        if getattr(record, "_viscolub_forwarded", False):
            return
        record._viscolub_forwarded = True

        try:
            level: str | int = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 0
        while frame is not None and self._should_ignore_this_frame(frame):
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def level_for(verbosity: int) -> str:
    """Map ``-v``/``-q`` counts (positive is more verbose) onto a loguru level name."""
    index = LEVELS.index(DEFAULT_LEVEL) - verbosity
    return LEVELS[min(max(index, 0), len(LEVELS) - 1)]


class _State:
    sink_id: int | None = None


_state = _State()


def configure_logging(verbosity: int = 0) -> str:
    """Install the stderr sink and the interception of standard logging and warnings.

    Calling it again replaces the sink installed by the previous call; other sinks are left alone.
    Returns the level in effect.
    """
    level = level_for(verbosity)
    if _state.sink_id is not None:
        try:
            logger.remove(_state.sink_id)
        except ValueError:
            logger.trace("Previous stderr sink was already removed")
    _state.sink_id = logger.add(sys.stderr, level=level, format=FORMAT, backtrace=False, diagnose=False)

    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    logging.captureWarnings(capture=True)
    return level
