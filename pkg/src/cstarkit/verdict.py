"""Tri-valued decisions with the evidence that backs them."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Dict, Optional

from .errors import ExactnessError


class Answer(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    """Yes carries a witness, No an obstruction, Unknown a route naming the bound hit."""
    answer: Answer
    route: str
    witness: Optional[Dict[str, Any]] = None
    obstruction: Optional[Dict[str, Any]] = None

    def __post_init__(self):
        if self.answer == Answer.YES and self.witness is None:
            raise ExactnessError(f"Yes verdict on route {self.route!r} without a witness")
        if self.answer == Answer.NO and self.obstruction is None:
            raise ExactnessError(f"No verdict on route {self.route!r} without an obstruction")

    @classmethod
    def yes(cls, route: str, **witness: Any) -> "Verdict":
        return cls(Answer.YES, route, witness=witness)

    @classmethod
    def no(cls, route: str, **obstruction: Any) -> "Verdict":
        return cls(Answer.NO, route, obstruction=obstruction)

    @classmethod
    def unknown(cls, route: str) -> "Verdict":
        return cls(Answer.UNKNOWN, route)

    @property
    def decided(self) -> bool:
        return self.answer != Answer.UNKNOWN

    def with_route(self, route: str) -> "Verdict":
        return Verdict(self.answer, route, self.witness, self.obstruction)

    def to_dict(self) -> dict:
        return {
            "answer": self.answer.value,
            "route": self.route,
            "witness": self.witness,
            "obstruction": self.obstruction,
        }
