"""Validation, replay, reflective refinement and SFT emission."""

from __future__ import annotations

import hashlib
import json
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Protocol

from .. import canonjson
from ..errors import RewriterViolation, SandboxUnavailable, TokenizerFailure
from ..grpo import TokenSequence
from ..reward.transcript import _TAG, grammar_violations
from ..sandbox_service import SandboxService, ToolCall, default_registry
from .model import Step, Trajectory


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    step: int | None
    message: str

    def to_dict(self) -> dict:
        return {"step": self.step, "message": self.message}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


def _grammar(steps: tuple[Step, ...]) -> list[Violation]:
    out = []
    for message in grammar_violations([s.kind for s in steps]):
        index = None
        if message.startswith("segment "):
            index = int(message.split()[1].rstrip(":"))
            message = message.split(": ", 1)[1]
        out.append(Violation(index, message))
    return out


def validate(t: Trajectory, registry=None) -> ValidationReport:
    """Grammar, schema and payload checks; the report lists every violation."""
    registry = registry or default_registry()
    report = ValidationReport(_grammar(t.steps))
    for i, step in enumerate(t.steps):
        if step.kind in ("think", "answer"):
            if _TAG.search(step.content):
                report.violations.append(Violation(i, "text contains transcript markup"))
            continue
        try:
            payload = json.loads(step.content)
        except json.JSONDecodeError as exc:
            report.violations.append(Violation(i, f"{step.kind} payload is not JSON ({exc.msg})"))
            continue
        if step.kind == "tool_call":
            if not isinstance(payload, dict) or not isinstance(payload.get("name"), str) or "arguments" not in payload:
                report.violations.append(Violation(i, "tool_call needs name and arguments"))
            elif payload["name"] not in registry:
                report.violations.append(Violation(i, f"unregistered tool {payload['name']!r}"))
            else:
                for path, msg in registry.argument_errors(payload["name"], payload["arguments"]):
                    report.violations.append(Violation(i, f"argument {path}: {msg}"))
        else:
            if not isinstance(payload, dict) or not isinstance(payload.get("ok"), bool):
                report.violations.append(Violation(i, "observation needs a boolean ok field"))
                continue
            call = t.steps[i - 1] if i else None
            if call is None or call.kind != "tool_call":
                continue  # already reported by the grammar
            try:
                call_payload = json.loads(call.content)
                name = call_payload["name"]
            except (json.JSONDecodeError, KeyError, TypeError):
                continue
            if payload.get("id", "") != call_payload.get("id", ""):
                report.violations.append(Violation(i, "observation id does not echo the call id"))
            if payload["ok"] and name in registry:
                for path, msg in registry.result_errors(name, payload.get("value")):
                    report.violations.append(Violation(i, f"value {path}: {msg}"))
    return report


# -- replay ------------------------------------------------------------------


class HttpSandbox:
    """Minimal client for a running sandbox server."""

    def __init__(self, base_url: str, timeout: float = 10.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def invoke(self, call: ToolCall | dict, session: str = "default") -> dict:
        body = canonjson.dumps(call.to_dict() if isinstance(call, ToolCall) else call).encode()
        req = urllib.request.Request(
            self.base_url + "/invoke", data=body,
            headers={"Content-Type": "application/json", "X-Session": session},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read())
        except (urllib.error.URLError, OSError) as exc:
            raise SandboxUnavailable(f"sandbox at {self.base_url} is unreachable: {exc}") from None


@dataclass(frozen=True)
class Mismatch:
    step: int
    reason: str
    recorded: str
    live: str

    def to_dict(self) -> dict:
        return {"step": self.step, "reason": self.reason, "recorded": self.recorded, "live": self.live}


@dataclass
class ReplayReport:
    mismatches: list[Mismatch] = field(default_factory=list)
    calls: int = 0

    @property
    def clean(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {"clean": self.clean, "calls": self.calls, "mismatches": [m.to_dict() for m in self.mismatches]}


def _live_result(sandbox, call: dict, session: str) -> dict:
    if sandbox is None:
        raise SandboxUnavailable("no sandbox given for replay")
    result = sandbox.invoke(call, session=session)
    return result if isinstance(result, dict) else result.to_dict()


def replay(t: Trajectory, sandbox: SandboxService | HttpSandbox | None, session: str | None = None) -> ReplayReport:
    """Re-run every tool call and compare with the recorded observation.

    Comparison is on canonical JSON; an observation that no longer parses is
    a mismatch as well.
    """
    session = session or t.session or "replay"
    report = ReplayReport()
    for i, step in enumerate(t.steps):
        if step.kind != "tool_call" or i + 1 >= len(t.steps) or t.steps[i + 1].kind != "observation":
            continue
        try:
            call = json.loads(step.content)
        except json.JSONDecodeError:
            report.mismatches.append(Mismatch(i, "tool_call payload is not JSON", step.content, ""))
            continue
        report.calls += 1
        live = _live_result(sandbox, call, session)
        live_text = canonjson.dumps(live)
        recorded = t.steps[i + 1].content
        try:
            recorded_norm = canonjson.normalize(recorded)
        except (json.JSONDecodeError, ValueError):
            report.mismatches.append(Mismatch(i + 1, "recorded observation is not valid JSON", recorded, live_text))
            continue
        if recorded_norm != live_text:
            reason = "result differs"
            if not live.get("ok") and live.get("error", {}).get("code") == "unknown_tool":
                reason = f"unknown tool {call.get('name')!r}"
            report.mismatches.append(Mismatch(i + 1, reason, recorded_norm, live_text))
    return report


def record_trajectory(task, plan, sandbox: SandboxService, session: str = "record") -> Trajectory:
    """Execute ``plan`` (a list of ``("think", text)``, ``("call", name, args)``,
    ``("answer", text)`` entries) against ``sandbox`` and capture observations."""
    steps: list[Step] = []
    n = 0
    for entry in plan:
        if entry[0] == "call":
            n += 1
            _, name, args = entry
            call = Step.tool_call(name, args, f"c{n}")
            steps.append(call)
            result = sandbox.invoke(json.loads(call.content), session=session)
            steps.append(Step.observation(result.to_dict()))
        else:
            steps.append(Step(entry[0], entry[1]))
    return Trajectory(task, tuple(steps), "raw", session)


# -- refinement --------------------------------------------------------------


class Rewriter(Protocol):
    def rewrite(self, trajectory: Trajectory, instructions: str) -> dict[int, str]:
        """Replacement texts keyed by step index."""


class IdentityRewriter:
    def rewrite(self, trajectory: Trajectory, instructions: str) -> dict[int, str]:
        return {}


class RuleBasedRewriter:
    """Fills verified tool results into the reasoning text around each call."""

    def rewrite(self, trajectory: Trajectory, instructions: str) -> dict[int, str]:
        steps = trajectory.steps
        out: dict[int, str] = {}
        for i, step in enumerate(steps):
            if step.kind != "think":
                continue
            seen = []
            j = i - 1
            while j >= 0 and steps[j].kind in ("tool_call", "observation"):
                if steps[j].kind == "observation" and steps[j - 1].kind == "tool_call":
                    seen.append(_describe(steps[j - 1], steps[j]))
                j -= 1
            planned = []
            j = i + 1
            while j < len(steps) and steps[j].kind in ("tool_call", "observation"):
                if steps[j].kind == "tool_call":
                    planned.append(_plan(steps[j]))
                j += 1
            parts = []
            if seen:
                parts.append("Verified: " + "; ".join(reversed(seen)) + ".")
            if planned:
                parts.append("Next I will " + " then ".join(planned) + ".")
            if not parts:
                parts.append("All needed results are verified; stating the answer.")
            out[i] = " ".join(parts)
        return out


def _plan(call: Step) -> str:
    try:
        payload = json.loads(call.content)
        return f"call {payload['name']} on {canonjson.dumps(payload['arguments'])}"
    except (json.JSONDecodeError, KeyError, TypeError):
        return "call a tool"


def _describe(call: Step, obs: Step) -> str:
    try:
        name = json.loads(call.content)["name"]
        result = json.loads(obs.content)
    except (json.JSONDecodeError, KeyError, TypeError):
        return "a tool returned an unreadable result"
    if result.get("ok"):
        return f"{name} returned {canonjson.dumps(result.get('value'))}"
    return f"{name} failed with {result.get('error', {}).get('code', 'an error')}"


def refine(t: Trajectory, rewriter: Rewriter, instructions: str = "") -> Trajectory:
    """Replace think/answer texts via ``rewriter``; protected payloads never change."""
    edits = rewriter.rewrite(t, instructions)
    steps = list(t.steps)
    for index, text in sorted(edits.items()):
        if not isinstance(index, int) or not 0 <= index < len(steps):
            raise RewriterViolation(f"rewriter addressed nonexistent step {index!r}", step=index)
        if steps[index].kind not in ("think", "answer"):
            raise RewriterViolation(f"step {index} is a protected {steps[index].kind}", step=index)
        if not isinstance(text, str) or _TAG.search(text):
            raise RewriterViolation(f"replacement for step {index} is not plain text", step=index)
        steps[index] = Step(steps[index].kind, text)
    return t.with_steps(steps, provenance="refined")


# -- SFT emission ------------------------------------------------------------


class ByteTokenizer:
    """UTF-8 bytes as token ids; invertible and concatenation-compatible."""

    vocab_size = 256

    def encode(self, text: str) -> list[int]:
        return list(text.encode("utf-8"))

    def decode(self, tokens) -> str:
        return bytes(tokens).decode("utf-8")


def _encode(tokenizer, piece: str) -> list[int]:
    try:
        ids = list(tokenizer.encode(piece))
    except Exception as exc:  # noqa: BLE001 - any tokenizer fault is reported uniformly
        raise TokenizerFailure(f"tokenizer failed: {exc}") from None
    if any(not isinstance(x, int) for x in ids):
        raise TokenizerFailure("tokenizer returned non-integer ids")
    return ids


def emit_sft(trajectories, tokenizer=None, mask_observations: bool = True) -> list[TokenSequence]:
    """Tokenize each transcript piece by piece so the mask aligns with segments.

    Observation segments (tags included) are masked out when
    ``mask_observations`` is set; everything else counts toward the loss.
    """
    tokenizer = tokenizer or ByteTokenizer()
    out = []
    for t in trajectories:
        tokens: list[int] = []
        mask: list[bool] = []
        for k, step in enumerate(t.steps):
            if k:
                ids = _encode(tokenizer, "\n")
                tokens += ids
                mask += [True] * len(ids)
            ids = _encode(tokenizer, f"<{step.kind}>{step.content}</{step.kind}>")
            tokens += ids
            mask += [not (mask_observations and step.kind == "observation")] * len(ids)
        out.append(TokenSequence(tuple(tokens), tuple(mask)))
    return out


def dataset_manifest(lines: list[str], config: dict) -> dict:
    body = "".join(line + "\n" for line in lines).encode("utf-8")
    return {"count": len(lines), "sha256": hashlib.sha256(body).hexdigest(), "config": config}
