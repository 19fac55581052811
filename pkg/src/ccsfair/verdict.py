from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check.

    ``ok`` is True on success, False when a violation was found (``witness``
    then shows it) and None when the search was cut short without a verdict.
    """

    status: str
    ok: bool | None
    witness: Any = None
    detail: str = ""
    explored: int = 0
    truncated: bool = False

    @property
    def exit_code(self) -> int:
        return {True: 0, False: 1, None: 2}[self.ok]
