"""Transcript markup and its grammar.

A transcript is a sequence of tagged segments separated only by whitespace::

    <think>..</think> (<tool_call>{json}</tool_call> <observation>{json}</observation>)*
    ... repeated one or more times ...
    <answer>..</answer>

Tags do not nest and segment bodies may not contain any tag text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

KINDS = ("think", "tool_call", "observation", "answer")
_TAG = re.compile(r"<(/?)(think|tool_call|observation|answer)>")


@dataclass(frozen=True)
class Segment:
    kind: str
    content: str
    start: int  # offset of the opening tag
    end: int  # offset just past the closing tag


@dataclass
class FormatReport:
    ok: int
    diagnostics: list[str] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "diagnostics": list(self.diagnostics)}


def render_segment(kind: str, content: str) -> str:
    return f"<{kind}>{content}</{kind}>"


def render_transcript(segments) -> str:
    """Join ``(kind, content)`` pairs with newlines."""
    return "\n".join(render_segment(kind, content) for kind, content in segments)


def segment_transcript(text: str) -> tuple[list[Segment], list[str]]:
    """Split into segments; the diagnostics list covers lexical problems only."""
    segments: list[Segment] = []
    problems: list[str] = []
    pos = 0
    open_tag: tuple[str, int, int] | None = None
    for m in _TAG.finditer(text):
        closing, kind = m.group(1) == "/", m.group(2)
        if open_tag is None:
            if closing:
                problems.append(f"offset {m.start()}: closing </{kind}> without an opening tag")
                continue
            gap = text[pos:m.start()]
            if gap.strip():
                problems.append(f"offset {pos}: text outside any segment")
            open_tag = (kind, m.start(), m.end())
        else:
            okind, ostart, obody = open_tag
            if not closing:
                problems.append(f"offset {m.start()}: <{kind}> nested inside <{okind}>")
                continue
            if kind != okind:
                problems.append(f"offset {m.start()}: </{kind}> closes <{okind}>")
                continue
            segments.append(Segment(kind, text[obody:m.start()], ostart, m.end()))
            open_tag = None
            pos = m.end()
    if open_tag is not None:
        problems.append(f"offset {open_tag[1]}: <{open_tag[0]}> is never closed")
    elif text[pos:].strip():
        problems.append(f"offset {pos}: text outside any segment")
    return segments, problems


def grammar_violations(kinds: list[str]) -> list[str]:
    """Positions where the segment-kind sequence leaves the grammar."""
    out = []
    if not kinds:
        return ["transcript has no segments"]
    if kinds[0] != "think":
        out.append(f"segment 0: expected think, found {kinds[0]}")
    answers = [i for i, k in enumerate(kinds) if k == "answer"]
    if not answers:
        out.append("no answer segment")
    elif len(answers) > 1:
        out.append(f"segment {answers[1]}: more than one answer segment")
    elif answers[0] != len(kinds) - 1:
        out.append(f"segment {answers[0]}: answer is not the last segment")
    for i, k in enumerate(kinds):
        prev = kinds[i - 1] if i else None
        if k == "observation" and prev != "tool_call":
            out.append(f"segment {i}: observation not preceded by a tool_call")
        if k == "tool_call":
            if prev not in ("think", "observation"):
                out.append(f"segment {i}: tool_call must follow think or observation")
            if i + 1 >= len(kinds) or kinds[i + 1] != "observation":
                out.append(f"segment {i}: tool_call not followed by an observation")
    return out


def tool_call_violations(index: int, payload_text: str, registry) -> list[str]:
    try:
        payload = json.loads(payload_text)
    except json.JSONDecodeError as exc:
        return [f"segment {index}: tool_call is not JSON ({exc.msg})"]
    if not isinstance(payload, dict) or "name" not in payload or "arguments" not in payload:
        return [f"segment {index}: tool_call must be an object with name and arguments"]
    name = payload["name"]
    if not isinstance(name, str) or name not in registry:
        return [f"segment {index}: unregistered tool {name!r}"]
    return [f"segment {index}: {name} argument {path}: {msg}" for path, msg in registry.argument_errors(name, payload["arguments"])]


def check_format(transcript: str, registry=None) -> FormatReport:
    """1 when the transcript obeys the grammar and every tool call validates."""
    if registry is None:
        from ..sandbox_service.tools import default_registry

        registry = default_registry()
    segments, diags = segment_transcript(transcript)
    diags = list(diags)
    diags += grammar_violations([s.kind for s in segments])
    for i, seg in enumerate(segments):
        if seg.kind == "tool_call":
            diags += tool_call_violations(i, seg.content, registry)
        elif seg.kind == "observation":
            try:
                json.loads(seg.content)
            except json.JSONDecodeError as exc:
                diags.append(f"segment {i}: observation is not JSON ({exc.msg})")
    return FormatReport(0 if diags else 1, diags, segments)


def extract_answer(transcript: str) -> str | None:
    """Body of the last answer segment, or None when there is none."""
    segments, _ = segment_transcript(transcript)
    answers = [s.content for s in segments if s.kind == "answer"]
    return answers[-1].strip() if answers else None
