"""JSON report schema for the CLI, as pydantic models."""

from __future__ import annotations

import hashlib
import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .graph import Graph, format_graph
from .verdict import Verdict


class InputDigest(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str = Field(description="Graph file path or matrix shorthand")
    vertices: List[str]
    sha256: str = Field(description="SHA-256 of the canonical graph text")

    @classmethod
    def of(cls, source: str, g: Graph) -> "InputDigest":
        digest = hashlib.sha256(format_graph(g).encode("utf-8")).hexdigest()
        return cls(source=source, vertices=list(g.vertices), sha256=digest)


class VerdictModel(BaseModel):
    answer: Literal["Yes", "No", "Unknown"]
    route: str
    witness: Optional[Dict[str, Any]] = None
    obstruction: Optional[Dict[str, Any]] = None

    @classmethod
    def of(cls, v: Verdict) -> "VerdictModel":
        return cls.model_validate(v.to_dict())


class Report(BaseModel):
    command: Literal["analyze", "ktheory", "ideals", "classify", "stability"]
    inputs: List[InputDigest] = Field(default_factory=list)
    results: Dict[str, Any] = Field(default_factory=dict)
    verdicts: List[VerdictModel] = Field(default_factory=list)
    exit_code: int = 0

    def to_json(self) -> str:
        """Deterministic JSON: sorted keys, two-space indent."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)


def report_schema() -> Dict[str, Any]:
    return Report.model_json_schema()
