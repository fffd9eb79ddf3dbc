"""Add, delete and substitute functional groups with valence-checked results."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..errors import (
    ChemError,
    EditError,
    EmptyResult,
    InvalidFragment,
    NoFreeValence,
    NoMatch,
    WouldDisconnect,
)
from ..molgraph import (
    DraftBond,
    Molecule,
    canonical_smiles,
    draft_from_molecule,
    finalize,
    induced_submolecule,
    mol_from_smiles,
)
from ..molgraph.model import BondOrder
from ..patterns import compile_pattern, find_matches, functional_group_counts, functional_groups
from ..patterns.library import data_text

EDIT_KINDS = ("add", "delete", "substitute")


@dataclass(frozen=True)
class EditRequest:
    kind: str
    target_group: str | None = None
    new_group: str | None = None
    site: int | None = None
    occurrence: int = 1  # 1-based ordinal in deterministic match order
    keep_largest_fragment: bool = False

    def __post_init__(self) -> None:
        if self.kind not in EDIT_KINDS:
            raise EditError(f"edit kind must be one of {EDIT_KINDS}, got {self.kind!r}")
        if self.kind in ("delete", "substitute") and not self.target_group:
            raise EditError(f"{self.kind} needs target_group")
        if self.kind in ("add", "substitute") and not self.new_group:
            raise EditError(f"{self.kind} needs new_group")
        if self.occurrence < 1:
            raise EditError("occurrence is 1-based")

    @classmethod
    def from_dict(cls, data: dict) -> "EditRequest":
        return cls(
            kind=data["kind"],
            target_group=data.get("target_group"),
            new_group=data.get("new_group"),
            site=data.get("site"),
            occurrence=data.get("occurrence") or 1,
            keep_largest_fragment=bool(data.get("keep_largest_fragment", False)),
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target_group": self.target_group,
            "new_group": self.new_group,
            "site": self.site,
            "occurrence": self.occurrence,
            "keep_largest_fragment": self.keep_largest_fragment,
        }


@dataclass(frozen=True)
class EditResult:
    molecule: Molecule
    changed_atoms: frozenset[int]
    audit: str

    def to_dict(self) -> dict:
        return {
            "smiles": canonical_smiles(self.molecule),
            "changed_atoms": sorted(self.changed_atoms),
            "audit": self.audit,
        }


@lru_cache(maxsize=1)
def fragment_library() -> dict[str, str]:
    out = {}
    for raw in data_text("fragments.tsv").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            name, smiles = line.split("\t")
            out[name] = smiles
    return out


def resolve_fragment(name_or_smiles: str) -> Molecule:
    """Fragment by library name, else parsed as SMILES; atom 0 must carry an H."""
    text = fragment_library().get(name_or_smiles, name_or_smiles)
    try:
        frag = mol_from_smiles(text)
    except ChemError as exc:
        raise InvalidFragment(f"fragment {name_or_smiles!r} is neither a library name nor valid SMILES: {exc.message}") from None
    if len(frag.components) != 1:
        raise InvalidFragment(f"fragment {name_or_smiles!r} must be a single connected piece")
    if frag.atoms[0].total_h < 1:
        raise InvalidFragment(f"fragment {name_or_smiles!r} has no open attachment point on its first atom")
    return frag


def _target_sets(mol: Molecule, target: str) -> list[tuple[int, ...]]:
    """Deletable atom sets for a group name or pattern text, in match order."""
    groups = functional_groups()
    if target in groups:
        patterns = groups[target].patterns
    else:
        try:
            patterns = (compile_pattern(target),)
        except ChemError as exc:
            raise NoMatch(f"target {target!r} is not a known group or valid pattern: {exc.message}") from None
    found: set[tuple[int, ...]] = set()
    for pattern in patterns:
        core = [
            q for q, query in enumerate(pattern.query_atoms)
            if not (query.atomic_number == 6 and query.aromatic is None)
        ] or list(range(len(pattern.query_atoms)))
        for mapping in find_matches(mol, pattern):
            found.add(tuple(sorted(mapping[q] for q in core)))
    return sorted(found)


def _add(mol: Molecule, fragment: Molecule, site: int | None) -> tuple[Molecule, frozenset[int], str]:
    n = len(mol.atoms)
    if site is None:
        site = next((i for i, a in enumerate(mol.atoms) if a.total_h > 0), None)
        if site is None:
            raise NoFreeValence("no atom has a free valence")
    if not 0 <= site < n:
        raise NoFreeValence(f"site {site} is out of range for {n} atoms", site=site)
    if mol.atoms[site].total_h < 1:
        raise NoFreeValence(f"atom {site} ({mol.atoms[site].element}) has no free valence", site=site)
    atoms, bonds = draft_from_molecule(mol)
    frag_atoms, frag_bonds = draft_from_molecule(fragment)
    atoms[site].hcount -= 1
    frag_atoms[0].hcount -= 1
    atoms.extend(frag_atoms)
    bonds.extend(DraftBond(b.a + n, b.b + n, b.order) for b in frag_bonds)
    bonds.append(DraftBond(site, n, BondOrder.SINGLE))
    try:
        result = finalize(atoms, bonds)
    except ChemError as exc:
        raise InvalidFragment(f"attaching fragment at atom {site} is invalid: {exc.message}") from None
    changed = frozenset({site, *range(n, n + len(fragment.atoms))})
    return result, changed, f"attached {canonical_smiles(fragment)} at atom {site}"


def _delete(mol: Molecule, target: str, occurrence: int, keep_largest: bool) -> tuple[Molecule, frozenset[int], str]:
    sets = _target_sets(mol, target)
    if len(sets) < occurrence:
        raise NoMatch(f"{target!r} matches {len(sets)} time(s); occurrence {occurrence} requested", group=target)
    doomed = set(sets[occurrence - 1])
    keep = [i for i in range(len(mol.atoms)) if i not in doomed]
    if not keep:
        raise EmptyResult(f"deleting {target!r} leaves nothing")
    cut = {v for i in doomed for v in mol.adjacency[i] if v not in doomed}
    result, index = induced_submolecule(mol, keep)
    dropped = ""
    if len(result.components) > len(mol.components):
        if not keep_largest:
            raise WouldDisconnect(f"deleting {target!r} would split the molecule", group=target)
        largest = max(result.components, key=lambda comp: (len(comp), -min(comp)))
        survivors = [old for old in keep if index[old] in set(largest)]
        dropped = f"; dropped {len(keep) - len(survivors)} atom(s) in smaller fragments"
        result, sub_index = induced_submolecule(result, [index[old] for old in survivors])
        index = {old: sub_index[index[old]] for old in survivors}
    changed = frozenset(index[c] for c in cut if c in index)
    audit = f"deleted {target} atoms {sorted(doomed)} and capped {len(changed)} cut atom(s) with hydrogen{dropped}"
    return result, changed, audit


def apply_edit(mol: Molecule, req: EditRequest) -> EditResult:
    """Apply an add, delete or substitute edit; the result is always a valid molecule."""
    if req.kind == "add":
        result, changed, audit = _add(mol, resolve_fragment(req.new_group), req.site)
        return EditResult(result, changed, audit)
    if req.kind == "delete":
        result, changed, audit = _delete(mol, req.target_group, req.occurrence, req.keep_largest_fragment)
        return EditResult(result, changed, audit)
    fragment = resolve_fragment(req.new_group)
    stripped, cut, audit = _delete(mol, req.target_group, req.occurrence, req.keep_largest_fragment)
    if not cut:
        raise EmptyResult(f"deleting {req.target_group!r} left no attachment point")
    site = min(cut)
    result, added, audit_add = _add(stripped, fragment, site)
    return EditResult(result, cut | added, f"{audit}; {audit_add}")


def edit_distance_report(a: Molecule, b: Molecule) -> dict[str, int]:
    """Per functional group, count in ``b`` minus count in ``a``."""
    ca, cb = functional_group_counts(a), functional_group_counts(b)
    return {name: cb[name] - ca[name] for name in ca}


__all__ = [
    "EDIT_KINDS",
    "EditRequest",
    "EditResult",
    "apply_edit",
    "edit_distance_report",
    "fragment_library",
    "resolve_fragment",
]
