"""Bemis-Murcko style scaffolds by side-chain pruning."""

from __future__ import annotations

from ..molgraph.build import induced_submolecule
from ..molgraph.model import BondOrder, Molecule
from .fingerprint import morgan_fingerprint, tanimoto


def scaffold_atoms(mol: Molecule) -> set[int]:
    """Atoms surviving iterative removal of terminal non-ring atoms.

    A terminal atom is kept while it is double-bonded to a kept atom, so
    exocyclic and linker carbonyls survive. Components without rings are
    dropped entirely.
    """
    keep = set()
    for comp in mol.components:
        if any(mol.in_ring[i] for i in comp):
            keep.update(comp)
    changed = True
    while changed:
        changed = False
        for i in sorted(keep):
            if mol.in_ring[i]:
                continue
            live = [(v, o) for v, o in mol.neighbors[i] if v in keep]
            if len(live) > 1:
                continue
            if len(live) == 1 and live[0][1] is BondOrder.DOUBLE:
                continue
            keep.discard(i)
            changed = True
    return keep


def murcko_scaffold(mol: Molecule) -> Molecule:
    """Ring systems plus linkers; acyclic input gives the empty molecule."""
    return induced_submolecule(mol, scaffold_atoms(mol))[0]


def scaffold_similarity(a: Molecule, b: Molecule) -> float:
    """Tanimoto of scaffold fingerprints; empty vs empty is 1.0, empty vs non-empty 0.0."""
    return tanimoto(morgan_fingerprint(murcko_scaffold(a)), morgan_fingerprint(murcko_scaffold(b)))
