"""Deterministic generation of the bundled reaction records.

Each template is applied to its exemplar reactants, then again with one
exemplar at a time swapped for a corpus molecule matching that pattern. The first valid outcome becomes a record carrying the
template's conditions. Running ``python -m chemsandbox.rxnstore.seed``
rewrites ``data/records.jsonl``; a test checks the file is reproducible.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from ..errors import ChemError
from ..molgraph import canonical_smiles, mol_from_smiles
from ..patterns import has_match
from ..patterns.library import data_text
from .store import load_templates
from .templates import apply_template

PER_TEMPLATE = 10
TOTAL = 200
MAX_SUBSTRATE_ATOMS = 30


def _corpus() -> list[str]:
    return [line.split()[0] for line in data_text("corpus.smi").splitlines() if line.strip() and not line.startswith("#")]


def generate_records() -> list[dict]:
    templates = load_templates(data_text("templates.json"))
    corpus = [mol_from_smiles(s) for s in _corpus()]
    corpus = [m for m in corpus if len(m.atoms) <= MAX_SUBSTRATE_ATOMS]
    per_template: list[list[dict]] = []
    for template in templates:
        exemplar = [mol_from_smiles(s) for s in template.exemplar_reactants]
        candidates = [exemplar]
        for slot, pattern in enumerate(template.reactant_patterns):
            for mol in corpus:
                if has_match(mol, pattern):
                    candidates.append(exemplar[:slot] + [mol] + exemplar[slot + 1:])
        rows: list[dict] = []
        seen: set[tuple[str, ...]] = set()
        for reactants in candidates:
            key = tuple(canonical_smiles(m) for m in reactants)
            if key in seen:
                continue
            seen.add(key)
            try:
                outcome = apply_template(template, reactants)[0]
            except ChemError:
                continue
            rows.append({
                "template_id": template.id,
                "reactants": list(key),
                "products": [canonical_smiles(m) for m in outcome],
                "conditions": template.conditions,
            })
            if len(rows) == PER_TEMPLATE:
                break
        per_template.append(rows)
    # round-robin so truncation keeps every template represented
    records: list[dict] = []
    depth = max(len(r) for r in per_template)
    for level in range(depth):
        for rows in per_template:
            if level < len(rows):
                records.append(rows[level])
    records = records[:TOTAL]
    for n, rec in enumerate(records, 1):
        rec["id"] = f"R{n:04d}"
    return [{"id": r["id"], **{k: v for k, v in r.items() if k != "id"}} for r in records]


def render_records(records: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    target = Path(argv[0]) if argv else Path(__file__).resolve().parent.parent / "data" / "records.jsonl"
    records = generate_records()
    target.write_text(render_records(records))
    print(f"wrote {len(records)} records to {target}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
