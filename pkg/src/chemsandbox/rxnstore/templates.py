"""Reaction templates as mapped graph rewrites.

Reactant patterns carry ``:n`` map labels. Every matched atom whose label
reappears in a product fragment survives with its element and aromaticity,
takes a charge override if the fragment gives one, and has its hydrogen
count rebalanced against its new bonds. Matched atoms without a surviving
label are deleted; unlabeled product atoms are created. Atoms of the input
molecules outside the match are carried over unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import ChemError, InvalidProduct, NoMatch, SizeLimitExceeded, TemplateError
from ..molgraph import DraftAtom, DraftBond, Molecule, canonical_smiles, draft_from_molecule, finalize, induced_submolecule
from ..molgraph.elements import SYMBOL_BY_NUMBER, allowed_valences
from ..molgraph.model import BondOrder
from ..patterns import Pattern, compile_pattern, find_matches

MAX_COMBINATIONS = 20000


@dataclass(frozen=True)
class ReactionTemplate:
    id: str
    name: str
    reactant_patterns: tuple[Pattern, ...]
    product_fragments: tuple[Pattern, ...]
    provenance: str = ""
    exemplar_reactants: tuple[str, ...] = ()
    conditions: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def map(self) -> dict[int, tuple[int, int]]:
        """Label -> (reactant pattern index, query atom index)."""
        out = {}
        for p, pattern in enumerate(self.reactant_patterns):
            for label, q in pattern.map_labels.items():
                out[label] = (p, q)
        return out

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "provenance": self.provenance,
            "reactant_patterns": [p.source_text for p in self.reactant_patterns],
            "product_fragments": [p.source_text for p in self.product_fragments],
            "map": {str(k): list(v) for k, v in sorted(self.map.items())},
            "exemplar_reactants": list(self.exemplar_reactants),
            "conditions": self.conditions,
        }


def template_from_dict(data: dict) -> ReactionTemplate:
    try:
        reactants = tuple(compile_pattern(s) for s in data["reactant_patterns"])
        products = tuple(compile_pattern(s) for s in data["product_fragments"])
        tid, name = data["id"], data["name"]
    except KeyError as exc:
        raise TemplateError(f"template record lacks {exc.args[0]!r}") from None
    except ChemError as exc:
        raise TemplateError(f"template {data.get('id')!r}: {exc.message}") from None
    if not reactants or not products:
        raise TemplateError(f"template {tid!r} needs reactant patterns and product fragments")
    seen: set[int] = set()
    for pattern in reactants:
        for q in pattern.query_atoms:
            if q.map_label is not None:
                if q.map_label in seen:
                    raise TemplateError(f"template {tid!r}: label {q.map_label} used twice on the reactant side")
                seen.add(q.map_label)
    used: set[int] = set()
    for pattern in products:
        for q in pattern.query_atoms:
            if q.map_label is None:
                if q.atomic_number is None:
                    raise TemplateError(f"template {tid!r}: new product atoms need an element")
                continue
            if q.map_label not in seen:
                raise TemplateError(f"template {tid!r}: product label {q.map_label} has no reactant atom")
            if q.map_label in used:
                raise TemplateError(f"template {tid!r}: product label {q.map_label} used twice")
            used.add(q.map_label)
        for bond in pattern.query_bonds:
            if len(bond.orders) not in (1, 2) or (len(bond.orders) == 2 and bond.orders != frozenset({BondOrder.SINGLE, BondOrder.AROMATIC})):
                raise TemplateError(f"template {tid!r}: product bonds must have a definite order")
    template = ReactionTemplate(
        tid, name, reactants, products, data.get("provenance", ""),
        tuple(data.get("exemplar_reactants", ())), dict(data.get("conditions", {})),
    )
    if "map" in data:
        declared = {int(k): tuple(v) for k, v in data["map"].items()}
        if declared != template.map:
            raise TemplateError(f"template {tid!r}: declared map disagrees with pattern labels")
    return template


def _fill_hydrogens(element: str, charge: int, bond_sum: int) -> int:
    for v in sorted(allowed_valences(element, charge)):
        if v >= bond_sum:
            return v - bond_sum
    raise InvalidProduct(f"{element}{charge:+d} cannot carry {bond_sum} bond orders")


def _rewrite(template: ReactionTemplate, mols: list[Molecule], combo: tuple[tuple[int, ...], ...]) -> list[Molecule]:
    atoms: list[DraftAtom] = []
    bonds: dict[tuple[int, int], BondOrder] = {}
    offsets = []
    for mol in mols:
        offsets.append(len(atoms))
        draft_atoms, draft_bonds = draft_from_molecule(mol)
        base = offsets[-1]
        atoms.extend(draft_atoms)
        for b in draft_bonds:
            bonds[(min(b.a, b.b) + base, max(b.a, b.b) + base)] = b.order
    original = dict(bonds)

    def bond_sum(i: int) -> int:
        return sum(order.valence for (a, b), order in bonds.items() if i in (a, b))

    label_atom: dict[int, int] = {}
    matched: set[int] = set()
    for p, pattern in enumerate(template.reactant_patterns):
        mapping = combo[p]
        for q, query in enumerate(pattern.query_atoms):
            g = offsets[p] + mapping[q]
            matched.add(g)
            if query.map_label is not None:
                label_atom[query.map_label] = g
        for qb in pattern.query_bonds:
            a, b = offsets[p] + mapping[qb.a], offsets[p] + mapping[qb.b]
            bonds.pop((min(a, b), max(a, b)), None)

    old_sum = {g: sum(o.valence for (a, b), o in original.items() if g in (a, b)) for g in matched}
    survivors: dict[int, object] = {}
    new_atoms: list[tuple[int, object]] = []
    for fragment in template.product_fragments:
        local = []
        for query in fragment.query_atoms:
            if query.map_label is not None:
                g = label_atom[query.map_label]
                survivors[g] = query
            else:
                atoms.append(DraftAtom(
                    SYMBOL_BY_NUMBER[query.atomic_number],
                    query.charge or 0,
                    None,
                    None,
                    bool(query.aromatic),
                ))
                g = len(atoms) - 1
                new_atoms.append((g, query))
            local.append(g)
        for qb in fragment.query_bonds:
            a, b = sorted((local[qb.a], local[qb.b]))
            if len(qb.orders) == 1:
                order = next(iter(qb.orders))
            else:
                order = original.get((a, b), BondOrder.SINGLE)
            bonds[(a, b)] = order

    doomed = matched - survivors.keys()
    for key in [k for k in bonds if k[0] in doomed or k[1] in doomed]:
        del bonds[key]

    for g, query in survivors.items():
        atom = atoms[g]
        new_sum = bond_sum(g)
        charge_changed = query.charge is not None and query.charge != atom.charge
        if query.hcount is not None:
            h = query.hcount
        elif charge_changed:
            h = _fill_hydrogens(atom.element, query.charge, new_sum)
        else:
            h = atom.hcount + old_sum[g] - new_sum
        if h < 0:
            raise InvalidProduct(f"atom {g} would need {h} hydrogens")
        if query.charge is not None:
            atom.charge = query.charge
        atom.hcount = h
    for g, query in new_atoms:
        atom = atoms[g]
        atom.hcount = query.hcount if query.hcount is not None else _fill_hydrogens(atom.element, atom.charge, bond_sum(g))

    keep = [i for i in range(len(atoms)) if i not in doomed]
    index = {old: new for new, old in enumerate(keep)}
    draft_bonds = [DraftBond(index[a], index[b], order) for (a, b), order in sorted(bonds.items())]
    try:
        whole = finalize([atoms[i] for i in keep], draft_bonds)
    except ChemError as exc:
        raise InvalidProduct(f"template {template.id}: {exc.message}", template=template.id) from None
    return [induced_submolecule(whole, comp)[0] for comp in whole.components]


ProductSet = tuple[Molecule, ...]


def product_key(products) -> tuple[str, ...]:
    """Sorted canonical SMILES of every connected piece of the given molecules."""
    keys = []
    for mol in products:
        for comp in mol.components:
            keys.append(canonical_smiles(induced_submolecule(mol, comp)[0]))
    return tuple(sorted(keys))


def apply_template(template: ReactionTemplate, reactants: list[Molecule]) -> list[ProductSet]:
    """Every distinct product set obtainable by one application of ``template``.

    Reactant patterns are assigned to distinct input molecules in all
    possible ways; inputs left unassigned do not appear in the products.
    Outcomes are deduplicated by canonical form and sorted.
    """
    k = len(template.reactant_patterns)
    if len(reactants) < k:
        raise NoMatch(f"template {template.id} needs {k} reactants, got {len(reactants)}", template=template.id)
    hits = {
        (p, r): find_matches(reactants[r], template.reactant_patterns[p])
        for p in range(k)
        for r in range(len(reactants))
    }
    outcomes: dict[tuple[str, ...], ProductSet] = {}
    failures: list[str] = []
    matched_any = False
    combos_seen = 0
    for assign in itertools.permutations(range(len(reactants)), k):
        lists = [hits[(p, assign[p])] for p in range(k)]
        if any(not lst for lst in lists):
            continue
        matched_any = True
        mols = [reactants[r] for r in assign]
        for combo in itertools.product(*lists):
            combos_seen += 1
            if combos_seen > MAX_COMBINATIONS:
                raise SizeLimitExceeded(f"template {template.id} has more than {MAX_COMBINATIONS} match combinations")
            try:
                products = _rewrite(template, mols, combo)
            except InvalidProduct as exc:
                failures.append(exc.message)
                continue
            key = product_key(products)
            if key not in outcomes:
                outcomes[key] = tuple(sorted(products, key=canonical_smiles))
    if not matched_any:
        raise NoMatch(f"template {template.id} does not match the reactants", template=template.id)
    if not outcomes:
        raise InvalidProduct(
            f"template {template.id} matched but every rewrite was invalid",
            template=template.id,
            diagnostics=sorted(set(failures))[:5],
        )
    return [outcomes[key] for key in sorted(outcomes)]
