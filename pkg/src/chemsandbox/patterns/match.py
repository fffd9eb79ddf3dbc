"""Substructure search: candidate filtering in Python, backtracking in the kernel."""

from __future__ import annotations

from .. import _kernels
from ..errors import SizeLimitExceeded
from ..molgraph.model import Molecule
from .smarts import Pattern, ring_membership

MAX_TARGET_ATOMS = 256


def _search_order(pattern: Pattern, cand_counts: list[int]) -> list[int]:
    """Most constrained atom first, then breadth-first so each atom has a mapped neighbour."""
    n = len(pattern.query_atoms)
    order: list[int] = []
    seen = [False] * n
    while len(order) < n:
        start = min((i for i in range(n) if not seen[i]), key=lambda i: (cand_counts[i], i))
        seen[start] = True
        queue = [start]
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v in sorted(pattern.neighbors[u], key=lambda v: (cand_counts[v], v)):
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    return order


def candidate_matrix(mol: Molecule, pattern: Pattern, stop_on_empty: bool = False) -> list[list[bool]]:
    """Row q flags the molecule atoms query atom q may map to.

    With ``stop_on_empty`` the matrix is cut short at the first row with no
    candidates, since no match can exist then.
    """
    counts = ring_membership(mol) if any(q.ring_count is not None for q in pattern.query_atoms) else None
    rows = []
    for q, query in enumerate(pattern.query_atoms):
        need = len(pattern.neighbors[q])
        row = [mol.degree(t) >= need and query.matches(mol, t, counts) for t in range(len(mol.atoms))]
        rows.append(row)
        if stop_on_empty and not any(row):
            break
    return rows


def find_matches(mol: Molecule, pattern: Pattern) -> list[tuple[int, ...]]:
    """All injective maps from query atoms to molecule atoms, sorted.

    Each tuple lists the matched molecule atom for query atom 0, 1, ...
    Automorphic duplicates are kept; see ``unique_atom_sets``.
    """
    nt = len(mol.atoms)
    if nt > MAX_TARGET_ATOMS:
        raise SizeLimitExceeded(
            f"substructure search is capped at {MAX_TARGET_ATOMS} atoms, got {nt}", limit=MAX_TARGET_ATOMS
        )
    nq = len(pattern.query_atoms)
    if nq == 0 or nt == 0 or nq > nt:
        return []
    matrix = candidate_matrix(mol, pattern, stop_on_empty=True)
    counts = [sum(row) for row in matrix]
    if len(matrix) < nq or min(counts) == 0:
        return []
    order = _search_order(pattern, counts)
    position = {q: k for k, q in enumerate(order)}
    back_ptr = [0]
    back_atom: list[int] = []
    back_mask: list[int] = []
    for k, q in enumerate(order):
        for bond in pattern.query_bonds:
            other = bond.b if bond.a == q else bond.a if bond.b == q else None
            if other is None or position[other] >= k:
                continue
            back_atom.append(other)
            back_mask.append(sum(1 << int(o) for o in bond.orders))
        back_ptr.append(len(back_atom))
    flat = [1 if ok else 0 for row in matrix for ok in row]
    indptr, nbrs, codes = mol.csr
    found = _kernels.subgraph_matches(nq, nt, order, flat, back_ptr, back_atom, back_mask, indptr, nbrs, codes)
    return sorted(tuple(m) for m in found)


def unique_atom_sets(matches: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Distinct matched atom sets, each sorted, in sorted order."""
    return sorted({tuple(sorted(m)) for m in matches})


def has_match(mol: Molecule, pattern: Pattern) -> bool:
    return bool(find_matches(mol, pattern))
