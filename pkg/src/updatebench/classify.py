"""Heuristic commit-message classification into nine update types.

The keyword table is data, not code: a plain-text file of ordered
`keyword -> Type` lines, first match wins. This approximates manual
coding of commit intent and is labeled as an approximation in reports.
"""

from __future__ import annotations

import re
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path


class UpdateType(Enum):
    FIXING_BUG = "FixingBug"
    ADDING_NEW_FEATURE = "AddingNewFeature"
    REFACTORING_METHOD = "RefactoringMethod"
    ADJUSTING_BUILD = "AdjustingBuild"
    MAINTAINING_COMPATIBILITY = "MaintainingCompatibility"
    IMPROVING_PERFORMANCE = "ImprovingPerformance"
    OPTIMIZING_TEST_CASE = "OptimizingTestCase"
    ALTERING_DOCUMENTATION = "AlteringDocumentation"
    OTHER = "Other"


_BY_VALUE = {t.value: t for t in UpdateType}


class KeywordTable:
    """Ordered (compiled pattern, UpdateType) entries."""

    def __init__(self, entries: list[tuple[str, UpdateType]]):
        self.entries = [
            (keyword, re.compile(r"\b" + re.escape(keyword)), t) for keyword, t in entries
        ]

    @classmethod
    def parse(cls, text: str) -> "KeywordTable":
        entries = []
        for line_no, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "->" not in line:
                raise ValueError(f"keyword table line {line_no}: expected 'keyword -> Type'")
            keyword, type_name = (part.strip() for part in line.split("->", 1))
            if type_name not in _BY_VALUE:
                raise ValueError(f"keyword table line {line_no}: unknown type {type_name!r}")
            entries.append((keyword.lower(), _BY_VALUE[type_name]))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "KeywordTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_table() -> KeywordTable:
    text = resources.files("updatebench").joinpath("data/update_types.txt").read_text("utf-8")
    return KeywordTable.parse(text)


def classify(message: str, table: KeywordTable | None = None) -> UpdateType:
    """First matching keyword (in table order) decides; no match -> Other."""
    table = table or default_table()
    lowered = message.lower()
    for _, pattern, update_type in table.entries:
        if pattern.search(lowered):
            return update_type
    return UpdateType.OTHER
