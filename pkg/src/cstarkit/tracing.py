"""
Trace: structured run recording for cstarkit commands.

Captures each computation step of a CLI run (parse, lattice, K-theory,
decision) with timing and a short summary. Supports JSON serialization
and pretty-printing.
"""

import json
import os
import time
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Iterator, List, Optional

from . import config


@dataclass
class StepRecord:
    """Record of a single timed computation step."""
    name: str
    duration_s: float = 0.0
    summary: Optional[str] = None
    # Step-specific data for the JSON trace
    metadata: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


@dataclass
class RunTrace:
    """Full trace of one CLI command."""
    trace_id: str = field(default_factory=lambda: str(uuid.uuid4())[:8])
    command: str = ""
    inputs: List[str] = field(default_factory=list)

    steps: List[StepRecord] = field(default_factory=list)
    outcome: str = ""
    exit_code: Optional[int] = None

    started_at: str = ""
    ended_at: str = ""
    duration_s: float = 0.0

    def __post_init__(self):
        if not self.started_at:
            self.started_at = datetime.now().isoformat(timespec="seconds")
        self._t0 = time.perf_counter()

    @contextmanager
    def step(self, name: str) -> Iterator[StepRecord]:
        """Time one step; the yielded record can be annotated inside the block."""
        rec = StepRecord(name=name)
        t0 = time.perf_counter()
        try:
            yield rec
        except Exception as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            raise
        finally:
            rec.duration_s = time.perf_counter() - t0
            self.steps.append(rec)

    def finish(self, outcome: str, exit_code: int) -> None:
        self.outcome = outcome
        self.exit_code = exit_code
        self.ended_at = datetime.now().isoformat(timespec="seconds")
        self.duration_s = time.perf_counter() - self._t0

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the trace to a dict (JSON-safe)."""
        return {
            "trace_id": self.trace_id,
            "command": self.command,
            "inputs": list(self.inputs),
            "steps": [dict(s.__dict__) for s in self.steps],
            "outcome": self.outcome,
            "exit_code": self.exit_code,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "duration_s": self.duration_s,
        }

    def save(self, path: Optional[str] = None) -> str:
        """Save trace to JSON inside TRACES_DIR. Returns the file path."""
        if path is None:
            os.makedirs(config.TRACES_DIR, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            path = os.path.join(config.TRACES_DIR, f"trace_{timestamp}_{self.trace_id}.json")
        else:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, default=str)
        return path

    def pretty_print(self) -> None:
        print(f"{'━' * 60}")
        print(f"🏁 {self.command}  trace_id={self.trace_id}")
        for name in self.inputs:
            print(f"  Input: {name[:100]}{'...' if len(name) > 100 else ''}")
        print(f"{'━' * 60}")
        for rec in self.steps:
            status = "❌" if rec.error else "✓"
            print(f"  ┌─ {rec.name} ({rec.duration_s:.3f}s) {status}")
            if rec.summary:
                print(f"  │  {rec.summary[:200]}")
            if rec.error:
                print(f"  │  {rec.error[:200]}")
            print("  └─")
        print(f"{'═' * 60}")
        print(f"📊 Outcome: {self.outcome or '(none)'} | exit {self.exit_code} | {self.duration_s:.3f}s")
        print(f"{'═' * 60}")
