"""Immutable molecular graph types."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

from ..errors import ValenceError
from . import rings as _rings
from .elements import (
    ATOMIC_NUMBER,
    MAX_ABS_CHARGE,
    MAX_EXPLICIT_H,
    allowed_valences,
)


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        return 1 if self is BondOrder.AROMATIC else int(self)

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    explicit_h: int = 0
    isotope: int | None = None
    aromatic: bool = False
    index: int = 0
    implicit_h: int = 0

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h

    @property
    def atomic_number(self) -> int:
        return ATOMIC_NUMBER[self.element]


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder

    @property
    def endpoints(self) -> frozenset[int]:
        return frozenset((self.begin, self.end))

    def other(self, atom: int) -> int:
        return self.end if atom == self.begin else self.begin


@dataclass(frozen=True)
class Diagnostic:
    position: int
    code: str
    message: str

    def to_dict(self) -> dict:
        return {"position": self.position, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class ParseDiagnostics:
    warnings: tuple[Diagnostic, ...] = ()
    stripped_features: tuple[str, ...] = ()

    def to_records(self) -> list[dict]:
        return [w.to_dict() for w in self.warnings]


@dataclass(frozen=True)
class Molecule:
    """A validated molecular graph.

    Instances are immutable; derived topology (neighbours, rings) is computed
    lazily and cached. Construction re-checks valences so that no invalid
    molecule can exist; builders in ``build`` do the heavier aromaticity work.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    stereo_stripped: bool = False

    def __post_init__(self) -> None:
        seen: set[tuple[int, int]] = set()
        n = len(self.atoms)
        for i, atom in enumerate(self.atoms):
            if atom.index != i:
                raise ValueError(f"atom {i} carries index {atom.index}")
            if atom.element not in ATOMIC_NUMBER:
                raise ValueError(f"unsupported element {atom.element!r}")
            if abs(atom.formal_charge) > MAX_ABS_CHARGE:
                raise ValueError(f"charge out of range on atom {i}")
            if not 0 <= atom.total_h <= MAX_EXPLICIT_H or atom.explicit_h < 0 or atom.implicit_h < 0:
                raise ValueError(f"hydrogen count out of range on atom {i}")
        for bond in self.bonds:
            a, b = bond.begin, bond.end
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError(f"bad bond endpoints {a}-{b}")
            if a > b:
                raise ValueError("bond endpoints must be stored in ascending order")
            if (a, b) in seen:
                raise ValueError(f"duplicate bond {a}-{b}")
            seen.add((a, b))
        bond_sum = [0] * n
        for bond in self.bonds:
            bond_sum[bond.begin] += bond.order.valence
            bond_sum[bond.end] += bond.order.valence
        for i, atom in enumerate(self.atoms):
            allowed = allowed_valences(atom.element, atom.formal_charge)
            total = bond_sum[i] + atom.total_h
            ok = total in allowed or (atom.aromatic and total + 1 in allowed)
            if not ok:
                raise ValenceError(
                    f"atom {i} ({atom.element}) has valence {total}, allowed {allowed}",
                    atom=i,
                    valence=total,
                    allowed=allowed,
                )

    # -- topology -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, BondOrder], ...], ...]:
        """Per atom, ``(neighbour, order)`` pairs sorted by neighbour index."""
        nb: list[list[tuple[int, BondOrder]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            nb[bond.begin].append((bond.end, bond.order))
            nb[bond.end].append((bond.begin, bond.order))
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(v for v, _ in row) for row in self.neighbors)

    @cached_property
    def bond_index(self) -> dict[tuple[int, int], BondOrder]:
        out: dict[tuple[int, int], BondOrder] = {}
        for bond in self.bonds:
            out[(bond.begin, bond.end)] = bond.order
            out[(bond.end, bond.begin)] = bond.order
        return out

    def bond_order(self, a: int, b: int) -> BondOrder | None:
        return self.bond_index.get((a, b))

    def degree(self, atom: int) -> int:
        return len(self.neighbors[atom])

    def bond_sum(self, atom: int) -> int:
        return sum(order.valence for _, order in self.neighbors[atom])

    @cached_property
    def rings(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_rings.sssr(self.adjacency))

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        """Every bond lying on some cycle (i.e. every non-bridge)."""
        return frozenset({(b.begin, b.end) for b in self.bonds} - _rings.bridges(self.adjacency))

    @cached_property
    def in_ring(self) -> tuple[bool, ...]:
        flags = [False] * len(self.atoms)
        for a, b in self.ring_bonds:
            flags[a] = flags[b] = True
        return tuple(flags)

    def is_ring_bond(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.ring_bonds

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(c) for c in _rings.components(self.adjacency))

    @cached_property
    def csr(self) -> tuple[list[int], list[int], list[int]]:
        """``(indptr, neighbours, bond codes)`` arrays for the kernels."""
        indptr = [0]
        nbrs: list[int] = []
        codes: list[int] = []
        for row in self.neighbors:
            for v, order in row:
                nbrs.append(v)
                codes.append(int(order))
            indptr.append(len(nbrs))
        return indptr, nbrs, codes

    @property
    def heavy_atom_count(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        from .canon import canonical_smiles

        try:
            text = canonical_smiles(self)
        except Exception:  # pragma: no cover - repr must never fail
            text = f"<{len(self.atoms)} atoms>"
        return f"Molecule({text!r})"
