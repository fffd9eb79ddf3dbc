"""Template and reaction-record store: retrieval, condition lookup, validity checks."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

from ..descriptors.fingerprint import WIDTH, Fingerprint, morgan_fingerprint, tanimoto
from ..errors import ChemError, EmptyStore
from ..molgraph import Molecule, canonical_smiles, mol_from_smiles
from ..patterns import find_matches
from ..patterns.library import data_text
from .templates import ReactionTemplate, apply_template, product_key, template_from_dict

RXN_ALGORITHM_ID = f"rxn-or-fold-{2 * WIDTH}-v1"


@dataclass(frozen=True)
class ConditionSet:
    reagents: tuple[str, ...] = ()
    solvent: str | None = None
    catalyst: str | None = None
    temperature: float | None = None

    def __post_init__(self) -> None:
        if not (self.reagents or self.solvent or self.catalyst or self.temperature is not None):
            raise ValueError("a condition set needs at least one populated field")

    @classmethod
    def from_dict(cls, data: dict) -> "ConditionSet":
        return cls(tuple(data.get("reagents", ())), data.get("solvent"), data.get("catalyst"), data.get("temperature"))

    def to_dict(self) -> dict:
        return {"reagents": list(self.reagents), "solvent": self.solvent, "catalyst": self.catalyst, "temperature": self.temperature}


def _or_fold(mols) -> Fingerprint:
    bits = 0
    for mol in mols:
        bits |= morgan_fingerprint(mol).bits
    return Fingerprint(bits)


def reaction_fingerprint(reactants, products) -> Fingerprint:
    """Reactant-side OR-fold followed by product-side OR-fold (2 x 2048 bits)."""
    return Fingerprint(
        _or_fold(reactants).bits | (_or_fold(products).bits << WIDTH),
        width=2 * WIDTH,
        algorithm_id=RXN_ALGORITHM_ID,
    )


@dataclass(frozen=True)
class ReactionRecord:
    id: str
    reactants: tuple[Molecule, ...]
    products: tuple[Molecule, ...]
    conditions: ConditionSet
    fingerprint: Fingerprint
    template_id: str | None = None

    def __post_init__(self) -> None:
        if not self.reactants or not self.products:
            raise ValueError("a reaction record needs reactants and products")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "template_id": self.template_id,
            "reactants": [canonical_smiles(m) for m in self.reactants],
            "products": [canonical_smiles(m) for m in self.products],
            "conditions": self.conditions.to_dict(),
        }


def record_from_dict(data: dict, default_id: str = "") -> ReactionRecord:
    reactants = tuple(mol_from_smiles(s) for s in data["reactants"])
    products = tuple(mol_from_smiles(s) for s in data["products"])
    return ReactionRecord(
        data.get("id", default_id),
        reactants,
        products,
        ConditionSet.from_dict(data["conditions"]),
        reaction_fingerprint(reactants, products),
        data.get("template_id"),
    )


@dataclass(frozen=True)
class TemplateHit:
    template: ReactionTemplate
    coverage: float
    similarity: float

    @property
    def score(self) -> tuple[float, float]:
        return (self.coverage, self.similarity)

    def to_dict(self) -> dict:
        return {"template_id": self.template.id, "name": self.template.name, "coverage": self.coverage, "similarity": self.similarity}


@dataclass(frozen=True)
class ConditionHit:
    record_id: str
    conditions: ConditionSet
    similarity: float

    def to_dict(self) -> dict:
        return {"record_id": self.record_id, "conditions": self.conditions.to_dict(), "similarity": self.similarity}


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    template_id: str | None

    def to_dict(self) -> dict:
        return {"valid": self.valid, "template_id": self.template_id}


class TemplateStore:
    """Immutable after construction; safe to share between threads."""

    def __init__(self, templates, records=()) -> None:
        self.templates: tuple[ReactionTemplate, ...] = tuple(sorted(templates, key=lambda t: t.id))
        self.records: tuple[ReactionRecord, ...] = tuple(records)
        self._by_id = {t.id: t for t in self.templates}
        self._exemplar_fp = {
            t.id: _or_fold([mol_from_smiles(s) for s in t.exemplar_reactants]) for t in self.templates
        }

    def template(self, template_id: str) -> ReactionTemplate:
        return self._by_id[template_id]

    def retrieve_templates(self, reactants: list[Molecule], k: int = 5) -> list[TemplateHit]:
        """Templates whose patterns each match a distinct input, best first.

        Ranked by the share of inputs the template consumes, then by
        similarity of the inputs to the template's exemplar reactants, then id.
        """
        if not self.templates:
            raise EmptyStore("the template store is empty")
        if k < 1:
            raise ValueError("k must be at least 1")
        if not reactants:
            return []
        query_fp = _or_fold(reactants)
        hits = []
        for template in self.templates:
            n = len(template.reactant_patterns)
            if n > len(reactants):
                continue
            ok = [[bool(find_matches(m, p)) for m in reactants] for p in template.reactant_patterns]
            if not any(all(ok[p][r] for p, r in enumerate(assign)) for assign in itertools.permutations(range(len(reactants)), n)):
                continue
            coverage = n / len(reactants)
            hits.append(TemplateHit(template, coverage, tanimoto(query_fp, self._exemplar_fp[template.id])))
        hits.sort(key=lambda h: (-h.coverage, -h.similarity, h.template.id))
        return hits[:k]

    def recommend_conditions(self, reactants: list[Molecule], products: list[Molecule], k: int = 3) -> list[ConditionHit]:
        """Conditions of the nearest stored reactions by reaction-fingerprint Tanimoto."""
        if not self.records:
            raise EmptyStore("the reaction record store is empty")
        fp = reaction_fingerprint(reactants, products)
        scored = [(tanimoto(fp, r.fingerprint), i, r) for i, r in enumerate(self.records)]
        scored.sort(key=lambda x: (-x[0], x[1]))
        return [ConditionHit(r.id, r.conditions, sim) for sim, _, r in scored[:k]]

    def check_reaction_validity(self, reactants: list[Molecule], products: list[Molecule], allow_subset: bool = False) -> ValidityResult:
        """Whether some template turns ``reactants`` into exactly ``products``.

        With ``allow_subset`` the given products need only be contained in a
        template outcome (by-products may be omitted).
        """
        if not self.templates:
            raise EmptyStore("the template store is empty")
        if not products or not reactants:
            return ValidityResult(False, None)
        target = product_key(products)
        for template in self.templates:
            try:
                outcomes = apply_template(template, reactants)
            except ChemError:
                continue
            for outcome in outcomes:
                key = product_key(outcome)
                if key == target or (allow_subset and _is_submultiset(target, key)):
                    return ValidityResult(True, template.id)
        return ValidityResult(False, None)


def _is_submultiset(small: tuple[str, ...], big: tuple[str, ...]) -> bool:
    pool = list(big)
    for item in small:
        if item not in pool:
            return False
        pool.remove(item)
    return True


def load_templates(text: str) -> list[ReactionTemplate]:
    return [template_from_dict(d) for d in json.loads(text)]


def load_records(text: str) -> list[ReactionRecord]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip():
            out.append(record_from_dict(json.loads(line), default_id=f"R{n:04d}"))
    return out


@lru_cache(maxsize=1)
def default_store() -> TemplateStore:
    templates = load_templates(data_text("templates.json"))
    try:
        records = load_records(data_text("records.jsonl"))
    except FileNotFoundError:
        records = []
    return TemplateStore(templates, records)
