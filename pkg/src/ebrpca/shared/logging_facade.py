"""Logging facade for ebrpca.

Library modules log through `get_logger("<module>")`, a child of the
package logger `ebrpca`, and never attach handlers. Entry points call
`configure_logging` once. With `web_buffer=True` recent records are also
kept in memory together with their level, so an embedding tool can show
the warnings of a sweep (iteration caps, failed trials) without parsing
stderr.

Usage:
    from ebrpca.shared.logging_facade import configure_logging, get_message_stack
    configure_logging(console=False, web_buffer=True)
    ...
    print(get_message_stack(min_level=logging.WARNING))
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Deque, List, Optional, Tuple

PACKAGE_LOGGER = "ebrpca"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class InMemoryLogHandler(logging.Handler):
    """Keeps the last `maxlen` formatted records as (level, text) pairs."""

    def __init__(self, maxlen: int = 1000):
        super().__init__()
        self._records: Deque[Tuple[int, str]] = deque(maxlen=maxlen)

    def emit(self, record: logging.LogRecord) -> None:
        try:
            text = self.format(record)
        except Exception:
            text = record.getMessage()
        self._records.append((record.levelno, text))

    def get_messages(self, min_level: int = logging.NOTSET) -> List[str]:
        return [text for level, text in self._records if level >= min_level]

    def clear(self) -> None:
        self._records.clear()


@dataclass
class _FacadeState:
    buffer: Optional[InMemoryLogHandler] = None
    catalog: Optional[Any] = None
    lang: str = "en"


_root = logging.getLogger(PACKAGE_LOGGER)
_root.addHandler(logging.NullHandler())
_state = _FacadeState()


def configure_logging(*, console: bool = True, web_buffer: bool = False,
                      level: int = logging.INFO, buffer_maxlen: int = 1000) -> None:
    """(Re)configure the handlers of the `ebrpca` logger.

    Previous handlers are dropped, so repeated calls do not duplicate output.
    `console` logs to stderr; `web_buffer` keeps the last `buffer_maxlen`
    records for `get_message_stack`.
    """
    for handler in list(_root.handlers):
        _root.removeHandler(handler)
    _root.setLevel(level)
    _root.propagate = False

    handlers: List[logging.Handler] = []
    if console:
        handlers.append(logging.StreamHandler())
    _state.buffer = InMemoryLogHandler(maxlen=buffer_maxlen) if web_buffer else None
    if _state.buffer is not None:
        handlers.append(_state.buffer)

    formatter = logging.Formatter(LOG_FORMAT)
    for handler in handlers or [logging.NullHandler()]:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        _root.addHandler(handler)


def configure_i18n(catalog: Optional[Any] = None, default_lang: str = "en") -> None:
    """Set the catalog and language used by `print_translated_error`."""
    if catalog is None:
        from ebrpca.domain.i18n import MessageCatalog

        catalog = MessageCatalog()
    _state.catalog = catalog
    _state.lang = default_lang


def get_logger(child: Optional[str] = None) -> logging.Logger:
    """`ebrpca` itself, or `ebrpca.<child>`."""
    return _root.getChild(child) if child else _root


def print_message(msg: str) -> None:
    _root.info(msg)


def print_error(msg: str) -> None:
    _root.error(msg)


def print_translated_error(exc: Any, lang: Optional[str] = None) -> str:
    """Log an `ExceptionNode` in the configured language; returns the text."""
    if _state.catalog is None:
        configure_i18n(default_lang=_state.lang)
    text = _state.catalog.format_exception(exc, lang=lang or _state.lang)
    _root.error(text)
    return text


def get_message_stack(min_level: int = logging.NOTSET) -> str:
    """Buffered messages at or above `min_level`, one per line ('' without a buffer)."""
    if _state.buffer is None:
        return ""
    return "\n".join(_state.buffer.get_messages(min_level))


def clear_message_stack() -> None:
    if _state.buffer is not None:
        _state.buffer.clear()


__all__ = [
    "PACKAGE_LOGGER",
    "LOG_FORMAT",
    "configure_logging",
    "configure_i18n",
    "get_logger",
    "print_message",
    "print_error",
    "print_translated_error",
    "get_message_stack",
    "clear_message_stack",
    "InMemoryLogHandler",
]
