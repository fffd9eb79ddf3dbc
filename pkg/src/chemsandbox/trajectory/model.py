"""Trajectory data model and its transcript serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .. import canonjson
from ..reward import TaskSpec, render_transcript

STEP_KINDS = ("think", "tool_call", "observation", "answer")
PROVENANCES = ("raw", "refined")


@dataclass(frozen=True)
class Step:
    """``content`` is free text for think/answer and wire-format JSON text otherwise."""

    kind: str
    content: str

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise ValueError(f"step kind must be one of {STEP_KINDS}, got {self.kind!r}")
        if not isinstance(self.content, str):
            raise TypeError("step content must be text; encode payloads with canonical JSON")

    @classmethod
    def tool_call(cls, name: str, arguments: dict, call_id: str = "") -> "Step":
        return cls("tool_call", canonjson.dumps({"id": call_id, "name": name, "arguments": arguments}))

    @classmethod
    def observation(cls, result: dict) -> "Step":
        return cls("observation", canonjson.dumps(result))

    def payload(self):
        return json.loads(self.content)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "content": self.content}


@dataclass(frozen=True)
class Trajectory:
    task: TaskSpec
    steps: tuple[Step, ...]
    provenance: str = "raw"
    session: str | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        object.__setattr__(self, "steps", tuple(self.steps))

    def with_steps(self, steps, provenance: str | None = None) -> "Trajectory":
        return replace(self, steps=tuple(steps), provenance=provenance or self.provenance)

    def transcript(self) -> str:
        return render_transcript((s.kind, s.content) for s in self.steps)

    def to_dict(self) -> dict:
        out = {
            "task": self.task.to_dict(),
            "steps": [s.to_dict() for s in self.steps],
            "provenance": self.provenance,
        }
        if self.session is not None:
            out["session"] = self.session
        return out

    def to_json(self) -> str:
        return canonjson.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Trajectory":
        return cls(
            TaskSpec.from_dict(data["task"]),
            tuple(Step(s["kind"], s["content"]) for s in data["steps"]),
            data.get("provenance", "raw"),
            data.get("session"),
        )


def load_trajectories(text: str) -> list[Trajectory]:
    return [Trajectory.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
