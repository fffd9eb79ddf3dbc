"""Dispatch core shared by the HTTP and stdio transports."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .. import canonjson
from ..errors import ChemError, SchemaViolation, UnknownSession, UnknownTool
from .tools import ToolRegistry, default_registry


@dataclass(frozen=True)
class ToolCall:
    id: str
    name: str
    arguments: dict

    @classmethod
    def from_dict(cls, data: Any) -> "ToolCall":
        if not isinstance(data, dict):
            raise SchemaViolation("a call must be a JSON object", path="$")
        for key in ("name", "arguments"):
            if key not in data:
                raise SchemaViolation(f"call is missing {key!r}", path=key)
        if not isinstance(data["name"], str):
            raise SchemaViolation("call name must be a string", path="name")
        return cls(str(data.get("id", "")), data["name"], data["arguments"])

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "arguments": self.arguments}


@dataclass(frozen=True)
class ToolResult:
    id: str
    ok: bool
    value: dict | None = None
    error: dict | None = None

    def to_dict(self) -> dict:
        if self.ok:
            return {"id": self.id, "ok": True, "value": self.value}
        return {"id": self.id, "ok": False, "error": self.error}

    def to_json(self) -> str:
        return canonjson.dumps(self.to_dict())


@dataclass(frozen=True)
class TraceRecord:
    session: str
    seq: int
    timestamp: float
    call: dict
    result: dict
    latency_ms: float

    def to_dict(self) -> dict:
        return {
            "session": self.session,
            "seq": self.seq,
            "timestamp": self.timestamp,
            "call": self.call,
            "result": self.result,
            "latency_ms": self.latency_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TraceRecord":
        return cls(data["session"], data["seq"], data["timestamp"], data["call"], data["result"], data["latency_ms"])


class _Session:
    def __init__(self, name: str, path: Path | None) -> None:
        self.name = name
        self.lock = threading.Lock()
        self.records: list[TraceRecord] = []
        self.path = path


class SandboxService:
    """Validates calls, dispatches them to tool handlers and traces every result.

    Handlers are pure, so the only shared mutable state is the per-session
    trace, which each session guards with its own lock.
    """

    def __init__(self, registry: ToolRegistry | None = None, trace_dir: str | Path | None = None) -> None:
        self.registry = registry or default_registry()
        self.trace_dir = Path(trace_dir) if trace_dir is not None else None
        if self.trace_dir is not None:
            self.trace_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, _Session] = {}
        self._sessions_lock = threading.Lock()

    # -- registry ----------------------------------------------------------

    def list_tools(self) -> list[dict]:
        return [t.to_dict() for t in self.registry.tools]

    # -- sessions ----------------------------------------------------------

    def open_session(self, session: str) -> None:
        self._session(session)

    def _session(self, name: str) -> _Session:
        with self._sessions_lock:
            sess = self._sessions.get(name)
            if sess is None:
                path = None
                if self.trace_dir is not None:
                    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in name)
                    path = self.trace_dir / f"{safe}.jsonl"
                sess = self._sessions[name] = _Session(name, path)
            return sess

    def export_trace(self, session: str) -> list[TraceRecord]:
        with self._sessions_lock:
            sess = self._sessions.get(session)
        if sess is None:
            raise UnknownSession(f"no session named {session!r}", session=session)
        with sess.lock:
            return list(sess.records)

    # -- dispatch ----------------------------------------------------------

    def execute(self, call: ToolCall) -> ToolResult:
        """Validate and run ``call`` without tracing it."""
        try:
            tool = self.registry.get(call.name)
            if tool is None:
                raise UnknownTool(f"no tool named {call.name!r}", tool=call.name)
            problems = self.registry.argument_errors(call.name, call.arguments)
            if problems:
                path, message = problems[0]
                raise SchemaViolation(f"{path}: {message}", path=path)
            value = tool.handler(call.arguments)
            # round-trip through canonical JSON so that results are plain data
            value = json.loads(canonjson.dumps(value))
            problems = self.registry.result_errors(call.name, value)
            if problems:
                raise RuntimeError(f"result failed its schema at {problems[0][0]}")
            return ToolResult(call.id, True, value=value)
        except ChemError as exc:
            return ToolResult(call.id, False, error=exc.to_dict())
        except Exception as exc:  # noqa: BLE001 - surfaced structurally, never partial
            return ToolResult(call.id, False, error={"code": "internal", "message": f"{type(exc).__name__}: {exc}"})

    def invoke(self, call: ToolCall | dict, session: str = "default") -> ToolResult:
        start = time.perf_counter()
        if not isinstance(call, ToolCall):
            raw = call
            try:
                call = ToolCall.from_dict(raw)
            except SchemaViolation as exc:
                cid = str(raw.get("id", "")) if isinstance(raw, dict) else ""
                result = ToolResult(cid, False, error=exc.to_dict())
                self._record(session, {"id": cid, "name": None, "arguments": None}, result, start)
                return result
        result = self.execute(call)
        self._record(session, call.to_dict(), result, start)
        return result

    def _record(self, session: str, call: dict, result: ToolResult, start: float) -> None:
        sess = self._session(session)
        latency = (time.perf_counter() - start) * 1000.0
        with sess.lock:
            record = TraceRecord(sess.name, len(sess.records) + 1, time.time(), call, result.to_dict(), latency)
            sess.records.append(record)
            if sess.path is not None:
                with sess.path.open("a", encoding="utf-8") as fh:
                    fh.write(canonjson.dumps(record.to_dict()) + "\n")


def load_trace(path: str | Path) -> list[TraceRecord]:
    text = Path(path).read_text(encoding="utf-8")
    return [TraceRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class ReplayMismatch:
    seq: int
    expected: str
    actual: str

    def to_dict(self) -> dict:
        return {"seq": self.seq, "expected": self.expected, "actual": self.actual}


def replay_trace(records: list[TraceRecord], service: SandboxService | None = None) -> list[ReplayMismatch]:
    """Re-execute each traced call and report results that differ byte-wise."""
    service = service or SandboxService()
    out = []
    for rec in records:
        call = rec.call
        if call.get("name") is None:
            continue
        live = service.execute(ToolCall(call["id"], call["name"], call["arguments"])).to_json()
        expected = canonjson.dumps(rec.result)
        if live != expected:
            out.append(ReplayMismatch(rec.seq, expected, live))
    return out
