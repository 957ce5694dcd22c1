"""Batched apprise notifications of the warnings and errors raised during one run."""

from __future__ import annotations

from typing import TYPE_CHECKING

import apprise
from apprise import NotifyType
from apprise.common import NotifyFormat
from loguru import logger


if TYPE_CHECKING:
    from collections.abc import Iterable

    import loguru
    from apprise import NotifyBase

__all__ = ["RunNotifier"]


class RunNotifier:
    """Accumulate every log record at or above ``trigger_level`` and deliver them as one message.

    The sink is attached on construction; :meth:`close` detaches it. With no services configured
    :meth:`send` just drops the buffer.
    """

    def __init__(
        self,
        urls: Iterable[str] = (),
        *,
        trigger_level: int | str = "WARNING",
        notify_type: str | NotifyType = NotifyType.WARNING,
        body_format: str | NotifyFormat = NotifyFormat.TEXT,
    ) -> None:
        self.trigger_level: int = trigger_level if isinstance(trigger_level, int) else logger.level(trigger_level).no
        self.notify_type = notify_type
        self.body_format = body_format
        self.apprise_obj: apprise.Apprise = apprise.Apprise()
        self.buffer: list[loguru.Message] = []
        for url in urls:
            self.add(url)
        self._sink_id: int | None = logger.add(self.accumulate_log, level=0, format="{level}: {message}", catch=False)

    def add(self, service: str | NotifyBase) -> bool:
        """Register an apprise URL or a notification plugin instance."""
        added = bool(self.apprise_obj.add(service))
        if not added:
            logger.warning(f"Could not register notification service {service!r}")
        return added

    def accumulate_log(self, message: loguru.Message) -> None:
        if message.record["level"].no >= self.trigger_level:
            self.buffer.append(message)

    def clear(self) -> None:
        self.buffer.clear()

    def send(self, title: str = "viscolub run") -> bool:
        """Deliver the buffered records; returns True when a notification went out."""
        if not self.buffer:
            logger.trace("No records to notify")
            return False

        if not len(self.apprise_obj):
            logger.trace("No notification services configured; discarding buffered records")
            self.clear()
            return False

        body = "".join(self.buffer).replace("\r", "")
        try:
            sent = bool(
                self.apprise_obj.notify(
                    title=title, body=body, notify_type=self.notify_type, body_format=self.body_format
                )
            )
        except Exception as exc:  # noqa: BLE001
            logger.warning(f"Failed to send notification: {exc}")
            return False

        if sent:
            self.clear()
        return sent

    def close(self) -> None:
        if self._sink_id is None:
            return
        try:
            logger.remove(self._sink_id)
        except ValueError:
            logger.trace("Notification sink was already removed")
        self._sink_id = None
