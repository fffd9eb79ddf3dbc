from __future__ import annotations

import json

import pytest

from chemsandbox.errors import EmptyStore, InvalidProduct, NoMatch, TemplateError
from chemsandbox.molgraph import canonical_smiles, mol_from_smiles
from chemsandbox.rxnstore import (
    ConditionSet,
    TemplateStore,
    apply_template,
    check_reaction_validity,
    default_store,
    load_records,
    reaction_fingerprint,
    recommend_conditions,
    retrieve_templates,
    template_from_dict,
)
from chemsandbox.rxnstore.seed import generate_records, render_records
from oracles import DATA

STORE = default_store()


def mols(*smiles):
    return [mol_from_smiles(s) for s in smiles]


def outcome_sets(template, reactants):
    return [sorted(canonical_smiles(m) for m in o) for o in apply_template(template, reactants)]


def test_seed_store_size():
    assert len(STORE.templates) >= 25
    assert len(STORE.records) == 200
    assert len({t.id for t in STORE.templates}) == len(STORE.templates)


def test_template_file_declares_consistent_maps():
    for raw in json.loads((DATA / "templates.json").read_text()):
        assert {"id", "name", "reactant_patterns", "product_fragments", "map"} <= set(raw)
        template = template_from_dict(raw)
        products = {q.map_label for p in template.product_fragments for q in p.query_atoms if q.map_label}
        assert products <= set(template.map)


def test_ester_hydrolysis_example():
    t = STORE.template("T01_ester_hydrolysis")
    assert outcome_sets(t, mols("CC(=O)OC", "O")) == [sorted(["CC(=O)O", "CO"])]


def test_symmetric_sites_deduplicate():
    t = STORE.template("T01_ester_hydrolysis")
    # two equivalent ester groups: two matches, one distinct outcome
    assert len(outcome_sets(t, mols("COC(=O)C(=O)OC", "O"))) == 1


def test_distinct_sites_give_distinct_outcomes():
    t = STORE.template("T01_ester_hydrolysis")
    assert len(outcome_sets(t, mols("COC(=O)CCC(=O)OCC", "O"))) == 2


def test_no_match():
    with pytest.raises(NoMatch):
        apply_template(STORE.template("T01_ester_hydrolysis"), mols("CCC", "O"))
    with pytest.raises(NoMatch):
        apply_template(STORE.template("T01_ester_hydrolysis"), mols("CC(=O)OC"))


def test_invalid_product_is_raised_not_emitted():
    bad = template_from_dict({
        "id": "X_bad", "name": "overbond",
        "reactant_patterns": ["[CH4:1]"], "product_fragments": ["[C:1](=O)(=O)=O"],
    })
    with pytest.raises(InvalidProduct):
        apply_template(bad, mols("C"))


@pytest.mark.parametrize(
    "raw",
    [
        {"id": "x", "name": "x", "reactant_patterns": ["[C:1]"], "product_fragments": ["[C:2]"]},
        {"id": "x", "name": "x", "reactant_patterns": ["[C:1][O:1]"], "product_fragments": ["[C:1]"]},
        {"id": "x", "name": "x", "reactant_patterns": ["[Q]"], "product_fragments": ["C"]},
        {"id": "x", "name": "x", "reactant_patterns": ["[C:1]"], "product_fragments": ["[C:1]"], "map": {"1": [0, 3]}},
        {"name": "x", "reactant_patterns": ["C"], "product_fragments": ["C"]},
    ],
)
def test_template_validation(raw):
    with pytest.raises(TemplateError):
        template_from_dict(raw)


@pytest.mark.parametrize("template_id", [t.id for t in STORE.templates])
def test_every_template_round_trips(template_id):
    t = STORE.template(template_id)
    reactants = mols(*t.exemplar_reactants)
    outcomes = apply_template(t, reactants)
    assert outcomes
    for outcome in outcomes:
        for m in outcome:
            text = canonical_smiles(m)
            assert canonical_smiles(mol_from_smiles(text)) == text
        assert check_reaction_validity(reactants, list(outcome)).valid


def test_records_round_trip_through_validity():
    for rec in STORE.records[::5]:
        result = check_reaction_validity(list(rec.reactants), list(rec.products))
        assert result.valid


def test_records_file_is_reproducible():
    assert render_records(generate_records()) == (DATA / "records.jsonl").read_text()


def test_retrieve_examples():
    hits = retrieve_templates(mols("CC(=O)OC", "O"), k=5)
    assert hits[0].template.id == "T01_ester_hydrolysis" and hits[0].coverage == 1.0
    assert retrieve_templates(mols("FC(F)(F)F"), k=5) == []


def test_retrieve_tie_break_by_id():
    raw = {"name": "n", "reactant_patterns": ["[OX2;H1:1]"], "product_fragments": ["[O:1]"], "exemplar_reactants": ["CO"]}
    store = TemplateStore([template_from_dict({**raw, "id": "B"}), template_from_dict({**raw, "id": "A"})])
    assert [h.template.id for h in store.retrieve_templates(mols("CCO"), k=2)] == ["A", "B"]


def test_retrieve_is_deterministic():
    query = mols("CC(=O)O", "CCO")
    first = [h.to_dict() for h in retrieve_templates(query, k=10)]
    assert first == [h.to_dict() for h in retrieve_templates(query, k=10)]


def test_recommend_conditions():
    rec = STORE.records[0]
    hits = recommend_conditions(list(rec.reactants), list(rec.products), k=3)
    assert hits[0].record_id == rec.id and hits[0].similarity == 1.0
    assert [h.similarity for h in hits] == sorted((h.similarity for h in hits), reverse=True)
    small = TemplateStore(STORE.templates, STORE.records[:2])
    assert len(small.recommend_conditions(list(rec.reactants), list(rec.products), k=10)) == 2


def test_validity_examples():
    assert check_reaction_validity(mols("CC(=O)OC", "O"), mols("CC(=O)O", "CO")).template_id == "T01_ester_hydrolysis"
    assert not check_reaction_validity(mols("CC(=O)OC", "O"), mols("c1ccccc1", "CO")).valid
    assert not check_reaction_validity(mols("CC(=O)OC", "O"), []).valid
    assert not check_reaction_validity(mols("CC(=O)OC", "O"), mols("CC(=O)O")).valid
    assert check_reaction_validity(mols("CC(=O)OC", "O"), mols("CC(=O)O"), allow_subset=True).valid


def test_empty_store():
    empty = TemplateStore([], [])
    with pytest.raises(EmptyStore):
        empty.retrieve_templates(mols("C"))
    with pytest.raises(EmptyStore):
        empty.recommend_conditions(mols("C"), mols("C"))
    with pytest.raises(EmptyStore):
        empty.check_reaction_validity(mols("C"), mols("C"))


def test_reaction_fingerprint_layout():
    fp = reaction_fingerprint(mols("CCO"), mols("CC=O"))
    assert fp.width == 4096
    assert reaction_fingerprint(mols("O", "CCO"), mols("CC=O")) == reaction_fingerprint(mols("CCO", "O"), mols("CC=O"))


def test_condition_set_requires_a_field():
    with pytest.raises(ValueError):
        ConditionSet()


def test_records_load_from_jsonl():
    line = json.dumps({"reactants": ["CCO"], "products": ["CC=O"], "conditions": {"reagents": ["PCC"]}})
    (rec,) = load_records(line)
    assert rec.id == "R0001" and rec.conditions.reagents == ("PCC",)
