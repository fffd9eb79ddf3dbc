"""Molecular graph model, SMILES I/O and canonicalization."""

from .build import DraftAtom, DraftBond, draft_from_molecule, finalize, induced_submolecule, relax_hydrogens
from .canon import (
    atom_symbol,
    canonical_ranks,
    canonical_smiles,
    graphs_isomorphic,
    molecular_weight,
    write_smiles,
)
from .model import Atom, Bond, BondOrder, Diagnostic, Molecule, ParseDiagnostics
from .smiles import mol_from_smiles, parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Diagnostic",
    "DraftAtom",
    "DraftBond",
    "Molecule",
    "ParseDiagnostics",
    "atom_symbol",
    "canonical_ranks",
    "canonical_smiles",
    "draft_from_molecule",
    "finalize",
    "graphs_isomorphic",
    "induced_submolecule",
    "mol_from_smiles",
    "molecular_weight",
    "parse_smiles",
    "relax_hydrogens",
    "write_smiles",
]
