"""The tool registry: JSON schemas, sample payloads and handlers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from jsonschema import Draft202012Validator

from ..descriptors import logp, morgan_fingerprint, murcko_scaffold, property_vector, qed, tanimoto
from ..editor import EditRequest, apply_edit
from ..molgraph import canonical_smiles, molecular_weight, parse_smiles
from ..patterns import contains_ring_system, count_functional_group, functional_group_counts, group_names, ring_systems
from ..rxnstore import apply_template, default_store


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    argument_schema: dict
    result_schema: dict
    sample_arguments: dict
    handler: Callable[[dict], dict] = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "argument_schema": self.argument_schema,
            "result_schema": self.result_schema,
            "sample_arguments": self.sample_arguments,
        }


def _obj(props: dict, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(props) if required is None else required,
        "additionalProperties": False,
    }


SMILES = {"type": "string", "minLength": 1}
SMILES_LIST = {"type": "array", "items": SMILES, "minItems": 1}
NUMBER = {"type": "number"}
COUNT = {"type": "integer", "minimum": 0}
K = {"type": "integer", "minimum": 1, "maximum": 100}
SMILES_ARG = _obj({"smiles": SMILES})


def _mol(args: dict, key: str = "smiles"):
    return parse_smiles(args[key])[0]


def _mols(args: dict, key: str):
    return [parse_smiles(s)[0] for s in args[key]]


def _parse(args):
    mol, diag = parse_smiles(args["smiles"])
    return {
        "canonical": canonical_smiles(mol),
        "atoms": len(mol.atoms),
        "bonds": len(mol.bonds),
        "warnings": diag.to_records(),
        "stripped_features": list(diag.stripped_features),
    }


def _edit(args):
    req = EditRequest.from_dict({k: v for k, v in args.items() if k != "smiles"})
    return apply_edit(_mol(args), req).to_dict()


def _retrieve(args):
    hits = default_store().retrieve_templates(_mols(args, "reactants"), args.get("k", 5))
    return {"templates": [h.to_dict() for h in hits]}


def _apply_template(args):
    store = default_store()
    try:
        template = store.template(args["template_id"])
    except KeyError:
        from ..errors import TemplateError

        raise TemplateError(f"unknown template id {args['template_id']!r}") from None
    outcomes = apply_template(template, _mols(args, "reactants"))
    return {"outcomes": [[canonical_smiles(m) for m in o] for o in outcomes]}


def _conditions(args):
    hits = default_store().recommend_conditions(_mols(args, "reactants"), _mols(args, "products"), args.get("k", 3))
    return {"conditions": [h.to_dict() for h in hits]}


def _validity(args):
    result = default_store().check_reaction_validity(
        _mols(args, "reactants"), _mols(args, "products"), args.get("allow_subset", False)
    )
    return result.to_dict()


def _fingerprint(args):
    fp = morgan_fingerprint(_mol(args))
    return {"algorithm_id": fp.algorithm_id, "width": fp.width, "hex": fp.to_hex(), "popcount": fp.popcount}


_NULLABLE_STR = {"type": ["string", "null"]}
_CONDITION_SET = _obj(
    {
        "reagents": {"type": "array", "items": {"type": "string"}},
        "solvent": _NULLABLE_STR,
        "catalyst": _NULLABLE_STR,
        "temperature": {"type": ["number", "null"]},
    }
)


def _build() -> tuple[ToolDescriptor, ...]:
    groups = group_names()
    group = {"type": "string", "enum": groups}
    T = ToolDescriptor
    tools = [
        T("parse_smiles", "Parse and validate SMILES; report size and stripped features.", SMILES_ARG,
          _obj({"canonical": SMILES, "atoms": COUNT, "bonds": COUNT,
                "warnings": {"type": "array", "items": {"type": "object"}},
                "stripped_features": {"type": "array", "items": {"type": "string"}}}),
          {"smiles": "C[C@H](O)CC"}, _parse),
        T("canonical_smiles", "Canonical SMILES of a molecule.", SMILES_ARG, _obj({"smiles": SMILES}),
          {"smiles": "OCC"}, lambda a: {"smiles": canonical_smiles(_mol(a))}),
        T("molecular_weight", "Average molecular weight in daltons.", SMILES_ARG, _obj({"molecular_weight": NUMBER}),
          {"smiles": "CCO"}, lambda a: {"molecular_weight": molecular_weight(_mol(a))}),
        T("count_functional_group", "Count occurrences of a named functional group.",
          _obj({"smiles": SMILES, "group": group}), _obj({"group": {"type": "string"}, "count": COUNT}),
          {"smiles": "OC(=O)c1ccccc1C(=O)O", "group": "carboxyl"},
          lambda a: {"group": a["group"], "count": count_functional_group(_mol(a), a["group"])}),
        T("functional_group_counts", "Counts of every library functional group.", SMILES_ARG,
          _obj({"counts": {"type": "object", "additionalProperties": COUNT}}),
          {"smiles": "NCC(=O)O"}, lambda a: {"counts": functional_group_counts(_mol(a))}),
        T("list_functional_groups", "Names of the functional groups in the library.", _obj({}),
          _obj({"groups": {"type": "array", "items": {"type": "string"}}}), {}, lambda a: {"groups": list(groups)}),
        T("ring_systems", "Fused ring systems with their atoms and ring counts.", SMILES_ARG,
          _obj({"ring_systems": {"type": "array", "items": _obj(
              {"atoms": {"type": "array", "items": COUNT}, "ring_count": COUNT, "aromatic": {"type": "boolean"}})}}),
          {"smiles": "c1ccc2ccccc2c1-c1ccccc1"},
          lambda a: {"ring_systems": [r.to_dict() for r in ring_systems(_mol(a))]}),
        T("contains_ring_system", "Whether the molecule contains the query ring system.",
          _obj({"smiles": SMILES, "query": SMILES}), _obj({"contains": {"type": "boolean"}}),
          {"smiles": "c1ccc2ccccc2c1", "query": "c1ccccc1"},
          lambda a: {"contains": contains_ring_system(_mol(a), _mol(a, "query"))}),
        T("murcko_scaffold", "Ring systems plus linkers, side chains removed.", SMILES_ARG,
          _obj({"scaffold": {"type": "string"}}), {"smiles": "CCc1ccccc1"},
          lambda a: {"scaffold": canonical_smiles(murcko_scaffold(_mol(a)))}),
        T("fingerprint", "Morgan fingerprint (radius 2, 2048 bits) as hex.", SMILES_ARG,
          _obj({"algorithm_id": {"type": "string"}, "width": COUNT, "hex": {"type": "string"}, "popcount": COUNT}),
          {"smiles": "CCO"}, _fingerprint),
        T("tanimoto", "Tanimoto similarity of Morgan fingerprints.",
          _obj({"smiles_a": SMILES, "smiles_b": SMILES}),
          _obj({"similarity": {"type": "number", "minimum": 0, "maximum": 1}}),
          {"smiles_a": "CCO", "smiles_b": "CCN"},
          lambda a: {"similarity": tanimoto(morgan_fingerprint(_mol(a, "smiles_a")), morgan_fingerprint(_mol(a, "smiles_b")))}),
        T("logp", "Atom-contribution octanol/water logP.", SMILES_ARG, _obj({"logp": NUMBER}),
          {"smiles": "c1ccccc1O"}, lambda a: {"logp": logp(_mol(a))}),
        T("qed", "Quantitative estimate of drug-likeness.", SMILES_ARG,
          _obj({"qed": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}),
          {"smiles": "CC(=O)Nc1ccc(O)cc1"}, lambda a: {"qed": qed(_mol(a))}),
        T("property_vector", "MW, logP, QED, HBD, HBA, PSA, rotatable bonds, aromatic rings.", SMILES_ARG,
          _obj({"mw": NUMBER, "logp": NUMBER, "qed": NUMBER, "hbd": COUNT, "hba": COUNT, "psa": NUMBER,
                "rotatable_bonds": COUNT, "aromatic_rings": COUNT}),
          {"smiles": "CC(=O)Oc1ccccc1C(=O)O"}, lambda a: property_vector(_mol(a)).to_dict()),
        T("apply_edit", "Add, delete or substitute a functional group.",
          _obj({"smiles": SMILES, "kind": {"type": "string", "enum": ["add", "delete", "substitute"]},
                "target_group": {"type": "string"}, "new_group": {"type": "string"},
                "site": {"type": "integer", "minimum": 0}, "occurrence": {"type": "integer", "minimum": 1},
                "keep_largest_fragment": {"type": "boolean"}}, ["smiles", "kind"]),
          _obj({"smiles": {"type": "string"}, "changed_atoms": {"type": "array", "items": COUNT},
                "audit": {"type": "string"}}),
          {"smiles": "CCO", "kind": "substitute", "target_group": "hydroxyl", "new_group": "amino"}, _edit),
        T("retrieve_templates", "Reaction templates applicable to the reactants, best first.",
          _obj({"reactants": SMILES_LIST, "k": K}, ["reactants"]),
          _obj({"templates": {"type": "array", "items": _obj(
              {"template_id": {"type": "string"}, "name": {"type": "string"},
               "coverage": NUMBER, "similarity": NUMBER})}}),
          {"reactants": ["CC(=O)OC", "O"], "k": 3}, _retrieve),
        T("apply_template", "Apply a stored template; every distinct product set.",
          _obj({"template_id": {"type": "string"}, "reactants": SMILES_LIST}),
          _obj({"outcomes": {"type": "array", "items": {"type": "array", "items": SMILES}}}),
          {"template_id": "T01_ester_hydrolysis", "reactants": ["CC(=O)OC", "O"]}, _apply_template),
        T("recommend_conditions", "Conditions of the most similar stored reactions.",
          _obj({"reactants": SMILES_LIST, "products": SMILES_LIST, "k": K}, ["reactants", "products"]),
          _obj({"conditions": {"type": "array", "items": _obj(
              {"record_id": {"type": "string"}, "conditions": _CONDITION_SET, "similarity": NUMBER})}}),
          {"reactants": ["CC(=O)OC", "O"], "products": ["CC(=O)O", "CO"], "k": 2}, _conditions),
        T("check_reaction_validity", "Whether a stored template maps the reactants onto the products.",
          _obj({"reactants": SMILES_LIST, "products": {"type": "array", "items": SMILES},
                "allow_subset": {"type": "boolean"}}, ["reactants", "products"]),
          _obj({"valid": {"type": "boolean"}, "template_id": _NULLABLE_STR}),
          {"reactants": ["CC(=O)OC", "O"], "products": ["CC(=O)O", "CO"]}, _validity),
    ]
    return tuple(tools)


class ToolRegistry:
    """Name-indexed tools with compiled validators. Read-only after construction."""

    def __init__(self, tools: tuple[ToolDescriptor, ...] | None = None) -> None:
        self.tools = tools if tools is not None else _build()
        names = [t.name for t in self.tools]
        if len(set(names)) != len(names):
            raise ValueError("tool names must be unique")
        self._by_name = {t.name: t for t in self.tools}
        self._validators: dict[str, tuple[Draft202012Validator, Draft202012Validator]] = {}
        for t in self.tools:
            Draft202012Validator.check_schema(t.argument_schema)
            Draft202012Validator.check_schema(t.result_schema)
            self._validators[t.name] = (Draft202012Validator(t.argument_schema), Draft202012Validator(t.result_schema))

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def get(self, name: str) -> ToolDescriptor | None:
        return self._by_name.get(name)

    def names(self) -> list[str]:
        return [t.name for t in self.tools]

    def argument_errors(self, name: str, arguments: Any) -> list[tuple[str, str]]:
        """``(field path, message)`` for each schema violation, in a stable order."""
        return _errors(self._validators[name][0], arguments)

    def result_errors(self, name: str, value: Any) -> list[tuple[str, str]]:
        return _errors(self._validators[name][1], value)


def _errors(validator: Draft202012Validator, value: Any) -> list[tuple[str, str]]:
    out = []
    for err in validator.iter_errors(value):
        path = list(err.absolute_path)
        if err.validator == "required":
            missing = err.message.split("'")[1] if "'" in err.message else ""
            path.append(missing)
        elif err.validator == "additionalProperties" and "'" in err.message:
            path.append(err.message.split("'")[1])
        out.append(("/".join(str(p) for p in path) or "$", err.message))
    return sorted(out)


_DEFAULT: ToolRegistry | None = None


def default_registry() -> ToolRegistry:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ToolRegistry()
    return _DEFAULT
