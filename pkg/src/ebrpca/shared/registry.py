"""Simple registry for named components (solvers).

Adapters register themselves under a kind ("solver") and a name ("EB",
"MAP", "PCP"); the experiment harness resolves the names listed in an
experiment config through it.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Type


class Registry:
    def __init__(self):
        self._data: Dict[str, Dict[str, Type]] = {}

    def register(self, kind: str, name: str, cls: Type) -> None:
        self._data.setdefault(kind, {})[name.upper()] = cls

    def get(self, kind: str, name: str) -> Optional[Type]:
        return self._data.get(kind, {}).get(name.upper())

    def names(self, kind: str) -> List[str]:
        return sorted(self._data.get(kind, {}))


registry = Registry()
