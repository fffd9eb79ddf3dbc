from __future__ import annotations

import json

import pytest

from chemsandbox.errors import RewriterViolation, SandboxUnavailable, TokenizerFailure
from chemsandbox.reward import check_format
from chemsandbox.sandbox_service import SandboxService
from chemsandbox.sandbox_service.tools import ToolRegistry, default_registry
from chemsandbox.trajectory import (
    ByteTokenizer,
    HttpSandbox,
    IdentityRewriter,
    RuleBasedRewriter,
    Step,
    Trajectory,
    dataset_manifest,
    emit_sft,
    load_trajectories,
    refine,
    replay,
    validate,
)
from oracles import corrupt_char, sample_trajectories

SERVICE = SandboxService()
TRAJECTORIES = sample_trajectories(SERVICE)


def test_recorded_trajectories_validate_and_replay():
    for t in TRAJECTORIES:
        assert validate(t).ok, validate(t).to_dict()
        assert check_format(t.transcript()).ok == 1
        report = replay(t, SandboxService())
        assert report.clean and report.calls == sum(s.kind == "tool_call" for s in t.steps)


def test_observation_before_call():
    t = TRAJECTORIES[0]
    steps = list(t.steps)
    steps.insert(1, steps[2])
    violations = validate(t.with_steps(steps)).violations
    assert any(v.step == 1 and "observation" in v.message for v in violations)


def test_schema_failure_names_field():
    t = TRAJECTORIES[0]
    steps = list(t.steps)
    steps[1] = Step.tool_call("apply_edit", {"kind": "add", "new_group": "amino"}, "c1")
    violations = validate(t.with_steps(steps)).violations
    assert any(v.step == 1 and "smiles" in v.message for v in violations)


def test_missing_answer_and_markup():
    t = TRAJECTORIES[0]
    assert not validate(t.with_steps(t.steps[:-1])).ok
    marked = t.with_steps([Step("think", "a <answer>x</answer>"), *t.steps[1:]])
    assert any("markup" in v.message for v in validate(marked).violations)


def test_observation_must_echo_call():
    t = TRAJECTORIES[0]
    obs = t.steps[2].payload()
    steps = list(t.steps)
    steps[2] = Step.observation({**obs, "id": "zzz"})
    assert any("echo" in v.message for v in validate(t.with_steps(steps)).violations)
    steps[2] = Step.observation({**obs, "value": {"smiles": 5}})
    assert any(v.step == 2 for v in validate(t.with_steps(steps)).violations)


def test_validate_implies_format():
    for t in TRAJECTORIES:
        for cut in range(1, len(t.steps) + 1):
            sub = t.with_steps(t.steps[:cut])
            if validate(sub).ok:
                assert check_format(sub.transcript()).ok == 1


@pytest.mark.parametrize("which", range(len(TRAJECTORIES)))
def test_any_single_character_corruption_is_localized(which):
    t = TRAJECTORIES[which]
    for i, step in enumerate(t.steps):
        if step.kind != "observation":
            continue
        for pos in range(0, len(step.content), 7):
            steps = list(t.steps)
            steps[i] = Step("observation", corrupt_char(step.content, pos))
            report = replay(t.with_steps(steps), SERVICE)
            assert [m.step for m in report.mismatches] == [i]


def test_renamed_tool_is_a_mismatch():
    registry = default_registry()
    renamed = ToolRegistry(tuple(tool for tool in registry.tools if tool.name != "logp"))
    report = replay(TRAJECTORIES[1], SandboxService(renamed))
    assert [m.step for m in report.mismatches] == [2, 4]
    assert all("logp" in m.reason for m in report.mismatches)


def test_replay_without_sandbox():
    with pytest.raises(SandboxUnavailable):
        replay(TRAJECTORIES[0], None)
    with pytest.raises(SandboxUnavailable):
        replay(TRAJECTORIES[0], HttpSandbox("http://127.0.0.1:9", timeout=0.5))


def test_identity_refine():
    for t in TRAJECTORIES:
        out = refine(t, IdentityRewriter())
        assert out.provenance == "refined" and out.steps == t.steps
        assert refine(out, IdentityRewriter()) == out


def test_rule_based_refine_keeps_payloads():
    for t in TRAJECTORIES:
        out = refine(t, RuleBasedRewriter())
        assert len(out.steps) == len(t.steps)
        for before, after in zip(t.steps, out.steps):
            if before.kind in ("tool_call", "observation"):
                assert after.content.encode() == before.content.encode()
        assert validate(out).ok and replay(out, SERVICE).clean
    assert "CCN" in refine(TRAJECTORIES[0], RuleBasedRewriter()).steps[2].content


class _Rogue:
    def __init__(self, edits):
        self.edits = edits

    def rewrite(self, trajectory, instructions):
        return self.edits


@pytest.mark.parametrize("edits", [{2: '{"ok":true}'}, {1: "x"}, {99: "x"}, {-1: "x"}, {0: "<think>x</think>"}])
def test_rewriter_violations(edits):
    with pytest.raises(RewriterViolation):
        refine(TRAJECTORIES[0], _Rogue(edits))


def test_sft_round_trip_and_mask():
    tok = ByteTokenizer()
    seqs = emit_sft(TRAJECTORIES, tok)
    for t, seq in zip(TRAJECTORIES, seqs):
        text = t.transcript()
        assert tok.decode(seq.tokens) == text
        spans = [f"<observation>{s.content}</observation>" for s in t.steps if s.kind == "observation"]
        assert seq.loss_mask.count(False) == sum(len(s.encode()) for s in spans)
    assert emit_sft([]) == []


def test_mask_offsets_by_hand():
    t = Trajectory(
        TRAJECTORIES[0].task,
        (Step("think", "go"), Step.tool_call("logp", {"smiles": "C"}, "c1"), Step.observation({"id": "c1", "ok": True, "value": {"logp": 0.5}}), Step("answer", "C")),
    )
    (seq,) = emit_sft([t])
    text = t.transcript()
    start = text.index("<observation>")
    end = text.index("</observation>") + len("</observation>")
    expected = [not (start <= i < end) for i in range(len(text))]
    assert list(seq.loss_mask) == expected
    (unmasked,) = emit_sft([t], mask_observations=False)
    assert all(unmasked.loss_mask)


def test_tokenizer_failure():
    class Broken:
        def encode(self, text):
            raise RuntimeError("nope")

    class Floaty:
        def encode(self, text):
            return [0.5]

    for tok in (Broken(), Floaty()):
        with pytest.raises(TokenizerFailure):
            emit_sft(TRAJECTORIES[:1], tok)


def test_jsonl_round_trip_and_manifest():
    lines = [t.to_json() for t in TRAJECTORIES]
    loaded = load_trajectories("\n".join(lines))
    assert [t.to_json() for t in loaded] == lines
    manifest = dataset_manifest(lines, {"mask_observations": True})
    assert manifest["count"] == 3 and len(manifest["sha256"]) == 64
    assert manifest == dataset_manifest(lines, {"mask_observations": True})
    assert json.loads(lines[0])["provenance"] == "raw"


def test_step_validation():
    with pytest.raises(ValueError):
        Step("shout", "x")
    with pytest.raises(TypeError):
        Step("think", {"a": 1})
    with pytest.raises(ValueError):
        Trajectory(TRAJECTORIES[0].task, (), provenance="cooked")
