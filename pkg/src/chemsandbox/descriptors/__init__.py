"""Fingerprints, similarity, scaffolds and property calculators."""

from .fingerprint import ALGORITHM_ID, RADIUS, WIDTH, Fingerprint, atom_invariants, morgan_fingerprint, tanimoto
from .properties import (
    PropertyVector,
    alert_count,
    aromatic_ring_count,
    atom_logp_contributions,
    desirability,
    hbond_acceptors,
    hbond_donors,
    logp,
    parse_typing_rules,
    property_vector,
    qed,
    qed_from_properties,
    qed_inputs,
    rotatable_bonds,
    tpsa,
)
from .scaffold import murcko_scaffold, scaffold_atoms, scaffold_similarity

__all__ = [
    "ALGORITHM_ID",
    "Fingerprint",
    "PropertyVector",
    "RADIUS",
    "WIDTH",
    "alert_count",
    "aromatic_ring_count",
    "atom_invariants",
    "atom_logp_contributions",
    "desirability",
    "hbond_acceptors",
    "hbond_donors",
    "logp",
    "morgan_fingerprint",
    "murcko_scaffold",
    "parse_typing_rules",
    "property_vector",
    "qed",
    "qed_from_properties",
    "qed_inputs",
    "rotatable_bonds",
    "scaffold_atoms",
    "scaffold_similarity",
    "tanimoto",
]
