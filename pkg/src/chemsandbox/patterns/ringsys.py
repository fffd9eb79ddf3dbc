"""Ring perception helpers: SSSR access, fused ring systems, ring-system containment."""

from __future__ import annotations

from dataclasses import dataclass

from .. import _kernels
from ..errors import QueryNotRingSystem
from ..molgraph.build import induced_submolecule
from ..molgraph.model import Molecule


@dataclass(frozen=True)
class RingSystem:
    atom_indices: frozenset[int]
    ring_count: int
    aromatic: bool

    def to_dict(self) -> dict:
        return {"atoms": sorted(self.atom_indices), "ring_count": self.ring_count, "aromatic": self.aromatic}


def perceive_rings(mol: Molecule) -> list[tuple[int, ...]]:
    """Smallest set of smallest rings; ``|bonds| - |atoms| + components`` entries."""
    return list(mol.rings)


def ring_systems(mol: Molecule) -> list[RingSystem]:
    """Groups of rings sharing at least one atom (fused and spiro rings merge)."""
    rings = [set(r) for r in mol.rings]
    parent = list(range(len(rings)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[int, int] = {}
    for k, ring in enumerate(rings):
        for atom in ring:
            if atom in owner:
                parent[find(k)] = find(owner[atom])
            else:
                owner[atom] = k
    grouped: dict[int, list[int]] = {}
    for k in range(len(rings)):
        grouped.setdefault(find(k), []).append(k)
    systems = []
    for members in grouped.values():
        atoms = frozenset().union(*(rings[k] for k in members))
        aromatic = all(all(mol.atoms[i].aromatic for i in rings[k]) for k in members)
        systems.append(RingSystem(atoms, len(members), aromatic))
    return sorted(systems, key=lambda s: min(s.atom_indices))


def _prune_to_rings(mol: Molecule) -> Molecule:
    """Drop every non-ring atom by repeatedly removing terminal chain atoms."""
    keep = set(range(len(mol.atoms)))
    changed = True
    while changed:
        changed = False
        for i in sorted(keep):
            if not mol.in_ring[i] and sum(1 for v in mol.adjacency[i] if v in keep) <= 1:
                keep.discard(i)
                changed = True
    return induced_submolecule(mol, keep)[0]


def contains_ring_system(mol: Molecule, query: Molecule) -> bool:
    """Whether a single ring system of ``mol`` contains ``query``'s ring skeleton.

    Atoms are compared on element, aromaticity and charge, bonds on exact
    order; hydrogen counts are ignored.
    """
    skeleton = _prune_to_rings(query)
    if not skeleton.atoms or not all(skeleton.in_ring):
        raise QueryNotRingSystem("query does not reduce to ring atoms only")
    systems = ring_systems(mol)
    if not systems:
        return False
    nq, nt = len(skeleton.atoms), len(mol.atoms)
    cand = []
    for qa in skeleton.atoms:
        for t, ta in enumerate(mol.atoms):
            ok = (
                mol.in_ring[t]
                and ta.element == qa.element
                and ta.aromatic == qa.aromatic
                and ta.formal_charge == qa.formal_charge
            )
            cand.append(1 if ok else 0)
    order: list[int] = []
    seen = [False] * nq
    for s in range(nq):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v in skeleton.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    position = {q: k for k, q in enumerate(order)}
    back_ptr, back_atom, back_mask = [0], [], []
    for k, q in enumerate(order):
        for v, order_ in skeleton.neighbors[q]:
            if position[v] < k:
                back_atom.append(v)
                back_mask.append(1 << int(order_))
        back_ptr.append(len(back_atom))
    indptr, nbrs, codes = mol.csr
    found = _kernels.subgraph_matches(nq, nt, order, cand, back_ptr, back_atom, back_mask, indptr, nbrs, codes)
    for mapping in found:
        hit = set(mapping)
        if any(hit <= system.atom_indices for system in systems):
            return True
    return False
