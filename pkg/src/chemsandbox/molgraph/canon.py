"""Canonical labeling, SMILES writing and the brute-force isomorphism oracle.

Canonical ranks come from Morgan-style refinement followed by an
individualize-and-refine search over every tie, keeping the labeling whose
certificate (atom labels plus ranked edge list) is lexicographically
smallest. Automorphisms found along the way prune equivalent branches.
"""

from __future__ import annotations

import math

from .. import _kernels
from ..errors import SizeLimitExceeded
from .elements import ATOMIC_WEIGHT, ORGANIC_SUBSET, allowed_valences, organic_implicit_h
from .model import BondOrder, Molecule

ISOMORPHISM_ATOM_CAP = 24


def _seed_invariants(mol: Molecule) -> list[tuple]:
    in_ring = mol.in_ring
    return [
        (
            mol.degree(i),
            a.atomic_number,
            a.isotope or 0,
            a.formal_charge,
            a.total_h,
            int(in_ring[i]),
            int(a.aromatic),
        )
        for i, a in enumerate(mol.atoms)
    ]


def _dense(keys: list) -> list[int]:
    index = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [index[k] for k in keys]


class _Search:
    def __init__(self, mol: Molecule) -> None:
        self.mol = mol
        self.n = len(mol.atoms)
        self.indptr, self.nbrs, self.codes = mol.csr
        self.labels = [
            (a.atomic_number, a.isotope or 0, a.formal_charge, a.total_h, int(a.aromatic))
            for a in mol.atoms
        ]
        self.edges = [(b.begin, b.end, int(b.order)) for b in mol.bonds]
        self.best_cert: tuple | None = None
        self.best_ranks: list[int] | None = None
        self.first_cert: tuple | None = None
        self.first_ranks: list[int] | None = None
        self.automorphisms: list[list[int]] = []

    def refine(self, ranks: list[int]) -> list[int]:
        return _kernels.refine_ranks(ranks, self.indptr, self.nbrs, self.codes)

    def certificate(self, ranks: list[int]) -> tuple:
        order = sorted(range(self.n), key=ranks.__getitem__)
        atoms = tuple(self.labels[a] for a in order)
        edges = tuple(
            sorted(
                (min(ranks[a], ranks[b]), max(ranks[a], ranks[b]), code)
                for a, b, code in self.edges
            )
        )
        return atoms, edges

    def _record_automorphism(self, ranks_a: list[int], ranks_b: list[int]) -> None:
        by_rank = [0] * self.n
        for atom, r in enumerate(ranks_b):
            by_rank[r] = atom
        perm = [by_rank[ranks_a[atom]] for atom in range(self.n)]
        if any(p != i for i, p in enumerate(perm)):
            self.automorphisms.append(perm)

    def leaf(self, ranks: list[int]) -> None:
        cert = self.certificate(ranks)
        if self.first_cert is None:
            self.first_cert, self.first_ranks = cert, ranks
        elif cert == self.first_cert:
            self._record_automorphism(self.first_ranks, ranks)
        if self.best_cert is None or cert < self.best_cert:
            self.best_cert, self.best_ranks = cert, ranks
        elif cert == self.best_cert and self.best_ranks is not self.first_ranks:
            self._record_automorphism(self.best_ranks, ranks)

    def _same_orbit(self, a: int, explored: list[int], prefix: list[int]) -> bool:
        gens = [g for g in self.automorphisms if all(g[p] == p for p in prefix)]
        if not gens:
            return False
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in gens:
            for x, y in enumerate(g):
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry
        ra = find(a)
        return any(find(b) == ra for b in explored)

    def visit(self, ranks: list[int], prefix: list[int]) -> None:
        ranks = self.refine(ranks)
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = [r for r, c in counts.items() if c > 1]
        if not tied:
            self.leaf(ranks)
            return
        cell = min(tied)
        members = [a for a in range(self.n) if ranks[a] == cell]
        explored: list[int] = []
        for a in members:
            if explored and self._same_orbit(a, explored, prefix):
                continue
            split = [2 * r + (1 if (r == cell and x != a) else 0) for x, r in enumerate(ranks)]
            self.visit(split, prefix + [a])
            explored.append(a)

    def run(self) -> list[int]:
        seed = _dense(_seed_invariants(self.mol))
        self.visit(seed, [])
        assert self.best_ranks is not None
        return self.best_ranks


def canonical_ranks(mol: Molecule) -> list[int]:
    """A labeling 0..n-1 that depends only on the molecular graph."""
    if not mol.atoms:
        return []
    return _Search(mol).run()


# -- writer -----------------------------------------------------------------


def _needs_bracket(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    if atom.formal_charge or atom.isotope is not None or atom.element not in ORGANIC_SUBSET:
        return True
    return organic_implicit_h(atom.element, mol.bond_sum(i), atom.aromatic) != atom.total_h


def atom_symbol(mol: Molecule, i: int) -> str:
    atom = mol.atoms[i]
    sym = atom.element.lower() if atom.aromatic else atom.element
    if not _needs_bracket(mol, i):
        return sym
    out = "["
    if atom.isotope is not None:
        out += str(atom.isotope)
    out += sym
    h = atom.total_h
    if h:
        out += "H" if h == 1 else f"H{h}"
    c = atom.formal_charge
    if c:
        sign = "+" if c > 0 else "-"
        out += sign if abs(c) == 1 else f"{sign}{abs(c)}"
    return out + "]"


def _bond_symbol(mol: Molecule, a: int, b: int, order: BondOrder) -> str:
    if order is BondOrder.SINGLE:
        return "-" if mol.atoms[a].aromatic and mol.atoms[b].aromatic else ""
    if order is BondOrder.DOUBLE:
        return "="
    if order is BondOrder.TRIPLE:
        return "#"
    return ""


def _digit(d: int) -> str:
    return str(d) if d < 10 else f"%{d}"


def write_smiles(mol: Molecule, ranks: list[int]) -> str:
    """Render ``mol`` as SMILES, visiting atoms in order of ``ranks``."""
    n = len(mol.atoms)
    if n == 0:
        return ""
    visited = [False] * n
    sorted_nbrs = [sorted((v for v, _ in row), key=ranks.__getitem__) for row in mol.neighbors]
    pieces = []
    roots = sorted((min(comp, key=ranks.__getitem__) for comp in mol.components), key=ranks.__getitem__)
    for root in roots:
        children: dict[int, list[int]] = {}
        ring_bonds: dict[int, list[int]] = {}
        seen_edges: set[tuple[int, int]] = set()
        preorder: dict[int, int] = {}
        stack = [(root, -1, iter(sorted_nbrs[root]))]
        visited[root] = True
        preorder[root] = 0
        children[root] = []
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for v in it:
                if v == parent:
                    continue
                edge = (min(u, v), max(u, v))
                if edge in seen_edges:
                    continue
                seen_edges.add(edge)
                if visited[v]:
                    ring_bonds.setdefault(u, []).append(v)
                    ring_bonds.setdefault(v, []).append(u)
                    continue
                visited[v] = True
                preorder[v] = len(preorder)
                children[u].append(v)
                children[v] = []
                stack.append((v, u, iter(sorted_nbrs[v])))
                advanced = True
                break
            if not advanced:
                stack.pop()

        free_digits = list(range(1, 100))
        open_digit: dict[tuple[int, int], int] = {}

        def emit(u: int) -> str:
            text = atom_symbol(mol, u)
            partners = ring_bonds.get(u, [])
            closing = sorted((v for v in partners if preorder[v] < preorder[u]), key=lambda v: open_digit[(v, u)])
            opening = sorted((v for v in partners if preorder[v] > preorder[u]), key=ranks.__getitem__)
            released = []
            for v in closing:
                d = open_digit.pop((v, u))
                text += _digit(d)
                released.append(d)
            for v in opening:
                d = free_digits.pop(0)
                open_digit[(u, v)] = d
                text += _bond_symbol(mol, u, v, mol.bond_order(u, v)) + _digit(d)
            for d in released:
                free_digits.append(d)
            free_digits.sort()
            kids = children[u]
            for k, v in enumerate(kids):
                piece = _bond_symbol(mol, u, v, mol.bond_order(u, v)) + emit(v)
                text += f"({piece})" if k < len(kids) - 1 else piece
            return text

        pieces.append(emit(root))
    return ".".join(pieces)


def canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES, identical for isomorphic molecules."""
    return write_smiles(mol, canonical_ranks(mol))


# -- oracle -----------------------------------------------------------------


def _oracle_label(mol: Molecule, i: int) -> tuple:
    a = mol.atoms[i]
    return (a.element, a.formal_charge, a.explicit_h, a.implicit_h, a.aromatic, a.isotope, mol.degree(i))


def graphs_isomorphic(a: Molecule, b: Molecule, max_atoms: int = ISOMORPHISM_ATOM_CAP) -> bool:
    """Exhaustive backtracking isomorphism test, independent of canonicalization."""
    if len(a.atoms) > max_atoms or len(b.atoms) > max_atoms:
        raise SizeLimitExceeded(
            f"isomorphism oracle is capped at {max_atoms} heavy atoms",
            limit=max_atoms,
        )
    n = len(a.atoms)
    if n != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    la = [_oracle_label(a, i) for i in range(n)]
    lb = [_oracle_label(b, i) for i in range(n)]
    if sorted(la) != sorted(lb):
        return False

    order: list[int] = []
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v in a.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)

    mapping: dict[int, int] = {}
    used = [False] * n

    def consistent(u: int, v: int) -> bool:
        for w, x in mapping.items():
            if a.bond_order(u, w) != b.bond_order(v, x):
                return False
        return True

    def extend(k: int) -> bool:
        if k == n:
            return True
        u = order[k]
        mapped_nbr = next((w for w in a.adjacency[u] if w in mapping), None)
        pool = b.adjacency[mapping[mapped_nbr]] if mapped_nbr is not None else range(n)
        for v in pool:
            if used[v] or lb[v] != la[u] or not consistent(u, v):
                continue
            mapping[u] = v
            used[v] = True
            if extend(k + 1):
                return True
            del mapping[u]
            used[v] = False
        return False

    return extend(0)


# -- weights ------------------------------------------------------------------


def molecular_weight(mol: Molecule) -> float:
    """Average molecular mass in daltons, implicit and explicit H included.

    Isotope-labelled atoms contribute their integer mass number.
    """
    # fsum is exactly rounded, so the result does not depend on atom order.
    terms = []
    for atom in mol.atoms:
        terms.append(float(atom.isotope) if atom.isotope is not None else ATOMIC_WEIGHT[atom.element])
        terms.append(atom.total_h * ATOMIC_WEIGHT["H"])
    return math.fsum(terms)


def valence_report(mol: Molecule) -> list[dict]:
    """Per-atom valence bookkeeping, mostly for tool output."""
    out = []
    for i, atom in enumerate(mol.atoms):
        out.append(
            {
                "atom": i,
                "element": atom.element,
                "valence": mol.bond_sum(i) + atom.total_h,
                "allowed": list(allowed_valences(atom.element, atom.formal_charge)),
            }
        )
    return out
