from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from chemsandbox.errors import ConfigError
from chemsandbox.molgraph import mol_from_smiles
from chemsandbox.reward import (
    RewardConfig,
    TaskSpec,
    check_format,
    extract_answer,
    load_config,
    render_transcript,
    score,
    score_batch,
)
from chemsandbox.reward.scoring import DEFAULT_PROFILES, structural_similarity
from oracles import corpus_smiles, fuzz_reward_cases, random_rendering, recomposed_total

CALL = json.dumps({"name": "canonical_smiles", "arguments": {"smiles": "OCC"}})
OBS = json.dumps({"ok": True, "value": {"smiles": "CCO"}})


def transcript(*pairs):
    return render_transcript(pairs)


def edit_task(**kw):
    return TaskSpec.from_dict({"kind": "edit", "source": "CCO", **kw})


# -- format -------------------------------------------------------------------------


def test_two_tool_calls_accepted():
    text = transcript(("think", "a"), ("tool_call", CALL), ("observation", OBS),
                      ("tool_call", CALL), ("observation", OBS), ("answer", "CCO"))
    report = check_format(text)
    assert report.ok == 1 and report.diagnostics == []


def test_multiple_think_blocks_accepted():
    text = transcript(("think", "a"), ("tool_call", CALL), ("observation", OBS), ("think", "b"), ("answer", "CCO"))
    assert check_format(text).ok == 1


@pytest.mark.parametrize(
    "pairs, fragment",
    [
        ((("think", "a"), ("tool_call", CALL), ("observation", OBS)), "no answer"),
        ((("think", "a"), ("tool_call", json.dumps({"name": "launch", "arguments": {}})), ("observation", OBS), ("answer", "C")), "unregistered"),
        ((("think", "a"), ("tool_call", json.dumps({"name": "canonical_smiles", "arguments": {}})), ("observation", OBS), ("answer", "C")), "smiles"),
        ((("think", "a"), ("tool_call", "{not json"), ("observation", OBS), ("answer", "C")), "not JSON"),
        ((("think", "a"), ("tool_call", CALL), ("observation", "plain text"), ("answer", "C")), "observation is not JSON"),
        ((("answer", "C"),), "expected think"),
        ((("think", "a"), ("tool_call", CALL), ("answer", "C")), "not followed by an observation"),
        ((("think", "a"), ("observation", OBS), ("answer", "C")), "not preceded"),
        ((("think", "a"), ("answer", "C"), ("think", "b")), "not the last"),
        ((("think", "a"), ("answer", "C"), ("answer", "C")), "more than one answer"),
    ],
)
def test_format_violations(pairs, fragment):
    report = check_format(transcript(*pairs))
    assert report.ok == 0
    assert any(fragment in d for d in report.diagnostics), report.diagnostics


@pytest.mark.parametrize(
    "text",
    [
        "<think>a <answer>x</answer></think>",
        "<think>a</think> stray <answer>x</answer>",
        "<think>a</think><answer>x",
        "</think><answer>x</answer>",
        "<think>a</answer>",
        "",
    ],
)
def test_lexical_violations(text):
    assert check_format(text).ok == 0


def test_extract_answer():
    assert extract_answer(transcript(("think", "a"), ("answer", "  CCO "))) == "CCO"
    assert extract_answer("<think>x</think>") is None


# -- scoring ---------------------------------------------------------------------------


def test_exact_target_match_with_groups():
    task = edit_task(target="CC(=O)O", required_groups=[["carboxyl", 1]])
    b = score(task, transcript(("think", "t"), ("answer", "OC(C)=O")))
    assert (b.sim_scaffold, b.fidelity_func, b.r_format) == (1.0, 1.0, 1)
    assert b.r_total == pytest.approx(1.0)


def test_optimize_unchanged_candidate_has_zero_shift():
    task = TaskSpec.from_dict({"kind": "optimize", "source": "c1ccccc1O", "property": {"name": "logp", "direction": 1}})
    assert score(task, "Oc1ccccc1").delta_prop == 0.0


def test_missing_required_group():
    task = edit_task(required_groups=[["carboxyl", 1]])
    assert score(task, "CC").fidelity_func == 0.0


def test_partial_group_satisfaction():
    task = edit_task(required_groups=[["carboxyl", 1], ["amino", 1], ["hydroxyl", 2]])
    assert score(task, "NCC(=O)O").fidelity_func == pytest.approx(2 / 3)


def test_unparseable_candidate_keeps_format_reward():
    task = edit_task(target="CCN")
    b = score(task, transcript(("think", "t"), ("answer", "C1CC")))
    assert b.r_format == 1 and b.r_chem == 0.0 and b.error
    assert b.r_total == pytest.approx(0.5)


def test_bare_smiles_gets_no_format_reward():
    b = score(edit_task(target="CCN"), "CCN")
    assert b.r_format == 0 and b.sim_scaffold == 1.0


def test_react_task_validity():
    task = TaskSpec.from_dict({"kind": "react", "reaction": {"reactants": ["CC(=O)OC", "O"], "products": ["CC(=O)O", "CO"]}})
    assert score(task, "CC(=O)O").valid_rxn == 1
    assert score(task, "CC(=O)OC.O>>CC(=O)O.CO").valid_rxn == 1
    assert score(task, "c1ccccc1").valid_rxn == 0
    strict = RewardConfig(allow_subset_products=False)
    assert score(task, "CC(=O)O", strict).valid_rxn == 0


def test_acyclic_similarity_discriminates():
    ethanol = mol_from_smiles("CCO")
    assert structural_similarity(mol_from_smiles("CCCO"), ethanol) < 1.0
    assert structural_similarity(mol_from_smiles("CCO"), ethanol) == 1.0


def test_scaffold_similarity_ignores_side_chains():
    ref = mol_from_smiles("Cc1ccccc1")
    assert structural_similarity(mol_from_smiles("CCc1ccccc1"), ref) == 1.0


def test_logp_monotone_in_chain_length():
    task = TaskSpec.from_dict({"kind": "optimize", "source": "CCO", "property": {"name": "logp", "direction": 1}})
    shifts = [score(task, "C" * n + "O").delta_prop for n in range(2, 12)]
    assert shifts == sorted(shifts)
    assert shifts[-1] == 1.0


def test_direction_flips_sign():
    up = TaskSpec.from_dict({"kind": "optimize", "source": "CCO", "property": {"name": "logp", "direction": 1}})
    down = TaskSpec.from_dict({"kind": "optimize", "source": "CCO", "property": {"name": "logp", "direction": -1}})
    assert score(up, "CCCO").delta_prop == -score(down, "CCCO").delta_prop > 0


@pytest.mark.parametrize("factor", [0.001, 0.5, 3.0, 1000.0])
def test_lambda_scaling_preserves_argmax(factor):
    task = edit_task(target="CC(=O)O", required_groups=[["carboxyl", 1]])
    candidates = ["CC(=O)O", transcript(("think", "x"), ("answer", "CCC(=O)O")), "CCO", transcript(("think", "x"), ("answer", "CC"))]
    base = RewardConfig(lambda_format=0.3, lambda_chem=0.7)
    scaled = RewardConfig(lambda_format=0.3 * factor, lambda_chem=0.7 * factor)
    a = [score(task, c, base).r_total for c in candidates]
    b = [score(task, c, scaled).r_total for c in candidates]
    assert a.index(max(a)) == b.index(max(b))


def test_exact_match_reaches_component_maximum():
    rng = random.Random(5)
    for smiles in corpus_smiles()[:40]:
        task = edit_task(target=smiles)
        best = score(task, random_rendering(mol_from_smiles(smiles), rng)).sim_scaffold
        assert best == 1.0


# -- batch -----------------------------------------------------------------------------


def test_score_batch_basics():
    assert score_batch([]) == []
    task = edit_task(target="CCN")
    first, second = score_batch([(task, "CCN"), (task, "CCN")])
    assert first == second


def test_score_batch_records_failures():
    task = TaskSpec.from_dict({"kind": "optimize", "source": "CCO", "property": {"name": "mw", "direction": 1}})
    out = score_batch([(task, "CCCO"), (edit_task(target="CCN"), "CCN")])
    assert out[0].error and "mw" in out[0].error and out[0].r_total == 0.0
    assert out[1].error is None and out[1].sim_scaffold == 1.0


# -- config ----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "raw",
    [
        {"lambda_format": -1},
        {"lambda_format": 0, "lambda_chem": 0},
        {"w_str": float("nan")},
        {"w_str": True},
        {"property_scales": {"logp": 0}},
        {"property_scales": {"colour": 1}},
        {"task_profile": {"edit": []}},
        {"task_profile": {"edit": ["str", "bogus"]}},
        {"w_str": 0, "w_func": 0},
        {"lambda_three": 1},
    ],
)
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        RewardConfig.from_dict(raw)


def test_weights_normalize():
    cfg = RewardConfig(w_str=3, w_func=1)
    assert cfg.weights("edit") == {"str": 0.75, "func": 0.25}
    assert sum(RewardConfig(lambda_format=2, lambda_chem=6).lambdas()) == 1.0


def test_load_config(tmp_path):
    path = tmp_path / "reward.json"
    path.write_text(json.dumps({"lambda_format": 1, "lambda_chem": 3, "property_scales": {"qed": 0.5}}))
    cfg = load_config(path)
    assert cfg.lambdas() == (0.25, 0.75) and cfg.property_scales == {"logp": 2.0, "qed": 0.5}


@pytest.mark.parametrize(
    "raw",
    [
        {"kind": "stir"},
        {"kind": "edit", "source": "CCO"},
        {"kind": "optimize", "source": "CCO"},
        {"kind": "optimize", "source": "CCO", "property": {"name": "logp", "direction": 2}},
        {"kind": "react"},
        {"kind": "edit", "source": "CCO", "required_groups": [["hydroxyl", 0]]},
    ],
)
def test_task_validation(raw):
    with pytest.raises(ConfigError):
        TaskSpec.from_dict(raw)


def test_task_round_trip():
    raw = {"kind": "optimize", "source": "CCO", "target": "CCCO", "required_groups": [["hydroxyl", 1]],
           "property": {"name": "qed", "direction": -1}}
    assert TaskSpec.from_dict(TaskSpec.from_dict(raw).to_dict()) == TaskSpec.from_dict(raw)


# -- fuzzed invariants -----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fuzzed_bounds_and_recomposition(seed):
    for task_raw, candidate, cfg_raw in fuzz_reward_cases(5, seed):
        task, cfg = TaskSpec.from_dict(task_raw), RewardConfig.from_dict(cfg_raw)
        b = score(task, candidate, cfg)
        assert b.r_format in (0, 1) and b.valid_rxn in (0, 1)
        assert 0.0 <= b.sim_scaffold <= 1.0 and 0.0 <= b.fidelity_func <= 1.0
        assert -1.0 <= b.delta_prop <= 1.0 and -1.0 <= b.r_chem <= 1.0
        assert abs(b.r_total - recomposed_total(b, cfg_raw, task.kind, DEFAULT_PROFILES)) <= 1e-12


@given(
    st.dictionaries(st.sampled_from(["str", "func", "opt", "rxn"]), st.floats(1e-6, 1e3), min_size=1),
    st.sampled_from([1.0, -1.0]),
)
def test_weighted_mean_never_rounds_out_of_range(weights, value):
    from chemsandbox.reward import combine_chem

    components = {c: value for c in ("str", "func", "opt", "rxn")}
    assert combine_chem(components, weights) == value


def test_format_scope_answer_only():
    task = edit_task(target="CCN")
    sloppy = transcript(("think", "x"), ("tool_call", '{"name": "nope", "arguments": {}}'), ("observation", OBS), ("answer", "CCN"))
    assert score(task, sloppy).r_format == 0
    assert score(task, sloppy, RewardConfig(format_scope="answer")).r_format == 1
    assert score(task, "<think>x</think>", RewardConfig(format_scope="answer")).r_format == 0
    with pytest.raises(ConfigError):
        RewardConfig(format_scope="vibes")
