"""SMARTS-subset matching, the functional-group library and ring systems."""

from .library import (
    FunctionalGroupDef,
    count_functional_group,
    data_text,
    functional_group_counts,
    functional_groups,
    get_group,
    group_names,
    parse_library,
)
from .match import MAX_TARGET_ATOMS, find_matches, has_match, unique_atom_sets
from .ringsys import RingSystem, contains_ring_system, perceive_rings, ring_systems
from .smarts import AtomQuery, BondQuery, Pattern, compile_pattern, pattern_from_molecule

__all__ = [
    "AtomQuery",
    "BondQuery",
    "FunctionalGroupDef",
    "MAX_TARGET_ATOMS",
    "Pattern",
    "RingSystem",
    "compile_pattern",
    "contains_ring_system",
    "count_functional_group",
    "data_text",
    "find_matches",
    "functional_group_counts",
    "functional_groups",
    "get_group",
    "group_names",
    "has_match",
    "parse_library",
    "pattern_from_molecule",
    "perceive_rings",
    "ring_systems",
    "unique_atom_sets",
]
