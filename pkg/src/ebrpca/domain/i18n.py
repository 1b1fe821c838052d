"""Localized error texts.

Each language is one XML file `ebrpca/locales/<lang>.xml`:

    <messages lang="en">
      <message id="1:1002">Matrix contains a non-finite entry ({value})</message>
    </messages>

Message ids are "<category>:<code>"; the category is the thousands digit of
the code. Templates may use {value}, {location}, {code} and {typ}.
"""
from __future__ import annotations

import importlib.resources as resources
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

_SUFFIX = ".xml"


@dataclass(frozen=True)
class MessageKey:
    typ_value: int
    code: int

    @classmethod
    def for_code(cls, code: int) -> "MessageKey":
        return cls(typ_value=int(code) // 1000, code=int(code))

    def to_id(self) -> str:
        return f"{self.typ_value}:{self.code}"


def _read_messages(root: ET.Element) -> Dict[str, str]:
    return {node.get("id"): (node.text or "").strip() for node in root.iter("message") if node.get("id")}


class MessageCatalog:
    """Lazily parsed message tables, one per language."""

    def __init__(self, package: str = "ebrpca.locales") -> None:
        self.package = package
        self._tables: Dict[str, Dict[str, str]] = {}

    def languages(self) -> List[str]:
        """Languages with a message file in the locale package."""
        return sorted(entry.name[:-len(_SUFFIX)] for entry in resources.files(self.package).iterdir()
                      if entry.name.endswith(_SUFFIX))

    def _table(self, lang: str) -> Dict[str, str]:
        table = self._tables.get(lang)
        if table is None:
            try:
                with resources.as_file(resources.files(self.package) / f"{lang}{_SUFFIX}") as path:
                    table = _read_messages(ET.parse(path).getroot())
            except (FileNotFoundError, ET.ParseError):
                table = {}
            self._tables[lang] = table
        return table

    def get_template(self, lang: str, key: MessageKey) -> Optional[str]:
        return self._table(lang).get(key.to_id())

    def format_exception(self, exc: Any, lang: str = "en", *, include_location: bool = True) -> str:
        """Render an ExceptionNode.

        The localized template wins; without one the exception's own message
        is used, and without that "<typ> (code=N)". When both a template and a
        message exist the message is appended as detail.
        """
        template = self.get_template(lang, MessageKey.for_code(exc.code))
        location = getattr(exc, "location", "")
        text = template or exc.message or f"{exc.typ.name} (code={exc.code})"
        try:
            text = text.format(typ=exc.typ.name, code=int(exc.code), value=getattr(exc, "value", ""),
                               location=location)
        except (KeyError, IndexError, ValueError):
            pass
        if template and exc.message:
            text += f": {exc.message}"
        if include_location and location:
            text += f" (at {location})"
        return text


__all__ = ["MessageKey", "MessageCatalog"]
