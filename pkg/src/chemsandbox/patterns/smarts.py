"""Compiler for the supported SMARTS subset.

Atom primitives: element symbols (upper case aliphatic, lower case
aromatic), ``#n``, ``*``, ``a``, ``A``, ``H<n>``, ``X<n>``, ``D<n>``,
``R``/``R<n>``, charges (``+``, ``-``, ``+2``, ``--``, ``+0``) and a trailing
``:n`` map label. Primitives are combined by ``;``, ``&`` or adjacency, all
meaning AND. Bonds: ``- = # : ~``; an omitted bond means single or aromatic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import PatternSyntaxError, UnsupportedPredicate
from ..molgraph.elements import ATOMIC_NUMBER, AROMATIC_SYMBOLS, SYMBOL_BY_NUMBER
from ..molgraph.model import BondOrder, Molecule

SINGLE_OR_AROMATIC = frozenset({BondOrder.SINGLE, BondOrder.AROMATIC})
ANY_BOND = frozenset(BondOrder)
_BOND_SYMBOLS = {
    "-": frozenset({BondOrder.SINGLE}),
    "=": frozenset({BondOrder.DOUBLE}),
    "#": frozenset({BondOrder.TRIPLE}),
    ":": frozenset({BondOrder.AROMATIC}),
    "~": ANY_BOND,
}
# Real SMARTS syntax this subset deliberately leaves out.
_UNSUPPORTED_ATOM = {",": "OR", "!": "negation", "$": "recursive SMARTS", "@": "chirality",
                     "r": "ring size", "v": "valence", "x": "ring connectivity", "^": "hybridization"}
_UNSUPPORTED_BOND = {"/": "directional bond", "\\": "directional bond", "!": "negation",
                     ",": "OR", "@": "ring bond", "$": "recursive SMARTS"}
# Two-letter element symbols outside the supported set; recognised so that
# e.g. [Na] is not misread as aromatic N.
_FOREIGN_ELEMENTS = {"Na", "Li", "Mg", "Si", "Se", "Zn", "Fe", "Ca", "Al", "Sn", "Cu", "Mn", "Co",
                     "Ni", "Pt", "Pd", "As", "Te", "Hg", "Ag", "Au", "Ge", "Ti", "Cr", "He", "Ne", "Ar"}


@dataclass(frozen=True)
class AtomQuery:
    """Conjunction of atom constraints; ``None`` fields are wildcards."""

    atomic_number: int | None = None
    aromatic: bool | None = None
    charge: int | None = None
    hcount: int | None = None
    connections: int | None = None  # X: heavy neighbours plus hydrogens
    degree: int | None = None  # D: heavy neighbours
    ring_count: int | None = None  # R<n>: number of SSSR rings containing the atom
    in_ring: bool | None = None
    map_label: int | None = None

    @property
    def element(self) -> str | None:
        return None if self.atomic_number is None else SYMBOL_BY_NUMBER[self.atomic_number]

    def matches(self, mol: Molecule, i: int, ring_counts: list[int] | None = None) -> bool:
        atom = mol.atoms[i]
        if self.atomic_number is not None and atom.atomic_number != self.atomic_number:
            return False
        if self.aromatic is not None and atom.aromatic != self.aromatic:
            return False
        if self.charge is not None and atom.formal_charge != self.charge:
            return False
        if self.hcount is not None and atom.total_h != self.hcount:
            return False
        deg = mol.degree(i)
        if self.degree is not None and deg != self.degree:
            return False
        if self.connections is not None and deg + atom.total_h != self.connections:
            return False
        if self.in_ring is not None and mol.in_ring[i] != self.in_ring:
            return False
        if self.ring_count is not None:
            counts = ring_counts if ring_counts is not None else ring_membership(mol)
            if counts[i] != self.ring_count:
                return False
        return True


@dataclass(frozen=True)
class BondQuery:
    a: int
    b: int
    orders: frozenset = SINGLE_OR_AROMATIC

    def matches(self, order: BondOrder | None) -> bool:
        return order is not None and order in self.orders


@dataclass(frozen=True)
class Pattern:
    query_atoms: tuple[AtomQuery, ...]
    query_bonds: tuple[BondQuery, ...]
    source_text: str = ""
    neighbors: tuple[tuple[int, ...], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        nb: list[list[int]] = [[] for _ in self.query_atoms]
        for bond in self.query_bonds:
            nb[bond.a].append(bond.b)
            nb[bond.b].append(bond.a)
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(x)) for x in nb))

    def __len__(self) -> int:
        return len(self.query_atoms)

    def bond_between(self, a: int, b: int) -> BondQuery | None:
        for bond in self.query_bonds:
            if {bond.a, bond.b} == {a, b}:
                return bond
        return None

    @property
    def map_labels(self) -> dict[int, int]:
        """Map label -> query atom index."""
        return {q.map_label: i for i, q in enumerate(self.query_atoms) if q.map_label is not None}


def ring_membership(mol: Molecule) -> list[int]:
    counts = [0] * len(mol.atoms)
    for ring in mol.rings:
        for i in ring:
            counts[i] += 1
    return counts


class _Compiler:
    def __init__(self, text: str) -> None:
        self.s = text
        self.i = 0
        self.atoms: list[AtomQuery] = []
        self.bonds: list[BondQuery] = []

    def fail(self, message: str) -> PatternSyntaxError:
        return PatternSyntaxError(f"{message} at position {self.i}", position=self.i)

    def unsupported(self, what: str) -> UnsupportedPredicate:
        return UnsupportedPredicate(f"{what} at position {self.i} is outside the supported subset", position=self.i)

    def read_int(self) -> int | None:
        start = self.i
        while self.i < len(self.s) and self.s[self.i].isdigit():
            self.i += 1
        return int(self.s[start:self.i]) if self.i > start else None

    def add_bond(self, a: int, b: int, orders: frozenset | None) -> None:
        if a == b or any({x.a, x.b} == {a, b} for x in self.bonds):
            raise self.fail("duplicate or self bond")
        self.bonds.append(BondQuery(a, b, orders if orders is not None else SINGLE_OR_AROMATIC))

    def compile(self) -> Pattern:
        s = self.s
        prev: int | None = None
        pending: frozenset | None = None
        branches: list[int] = []
        rings: dict[int, tuple[int, frozenset | None]] = {}
        while self.i < len(s):
            ch = s[self.i]
            if ch == "(":
                if prev is None or pending is not None:
                    raise self.fail("branch without a preceding atom")
                branches.append(prev)
                self.i += 1
            elif ch == ")":
                if not branches or pending is not None:
                    raise self.fail("unbalanced ')'")
                prev = branches.pop()
                self.i += 1
            elif ch in _BOND_SYMBOLS:
                if prev is None or pending is not None:
                    raise self.fail("misplaced bond symbol")
                pending = _BOND_SYMBOLS[ch]
                self.i += 1
            elif ch in _UNSUPPORTED_BOND and ch not in ",!$":
                raise self.unsupported(_UNSUPPORTED_BOND[ch])
            elif ch == ".":
                raise self.unsupported("disconnected query")
            elif ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.fail("ring closure without a preceding atom")
                if ch == "%":
                    self.i += 1
                    num = None
                    if s[self.i:self.i + 2].isdigit() and len(s[self.i:self.i + 2]) == 2:
                        num = int(s[self.i:self.i + 2])
                        self.i += 2
                    if num is None:
                        raise self.fail("'%' needs two digits")
                else:
                    num = int(ch)
                    self.i += 1
                if num in rings:
                    other, other_orders = rings.pop(num)
                    if pending is not None and other_orders is not None and pending != other_orders:
                        raise self.fail("conflicting ring-closure bonds")
                    self.add_bond(other, prev, pending if pending is not None else other_orders)
                else:
                    rings[num] = (prev, pending)
                pending = None
            else:
                if pending is not None and prev is None:
                    raise self.fail("bond without a preceding atom")
                idx = self.atom()
                if prev is not None:
                    self.add_bond(prev, idx, pending)
                prev, pending = idx, None
        if pending is not None or branches:
            raise self.fail("unexpected end of pattern")
        if rings:
            raise self.fail(f"ring closure {min(rings)} never closed")
        if not self.atoms:
            raise self.fail("empty pattern")
        return Pattern(tuple(self.atoms), tuple(self.bonds), self.s)

    def atom(self) -> int:
        s, ch = self.s, self.s[self.i]
        if ch == "[":
            query = self.bracket()
        elif s[self.i:self.i + 2] in ("Cl", "Br"):
            query = AtomQuery(ATOMIC_NUMBER[s[self.i:self.i + 2]], aromatic=False)
            self.i += 2
        elif ch in "BCNOPSFI":
            query = AtomQuery(ATOMIC_NUMBER[ch], aromatic=False)
            self.i += 1
        elif ch in AROMATIC_SYMBOLS:
            query = AtomQuery(ATOMIC_NUMBER[AROMATIC_SYMBOLS[ch]], aromatic=True)
            self.i += 1
        elif ch == "*":
            query = AtomQuery()
            self.i += 1
        elif ch == "a":
            query = AtomQuery(aromatic=True)
            self.i += 1
        elif ch == "A":
            query = AtomQuery(aromatic=False)
            self.i += 1
        elif ch in _UNSUPPORTED_ATOM:
            raise self.unsupported(_UNSUPPORTED_ATOM[ch])
        else:
            raise self.fail(f"unexpected character {ch!r}")
        self.atoms.append(query)
        return len(self.atoms) - 1

    def bracket(self) -> AtomQuery:
        s = self.s
        self.i += 1
        fields: dict[str, object] = {}

        def put(key: str, value: object) -> None:
            if key in fields and fields[key] != value:
                raise self.fail(f"conflicting {key} constraints")
            fields[key] = value

        while True:
            if self.i >= len(s):
                raise self.fail("unterminated bracket atom")
            ch = s[self.i]
            if ch == "]":
                self.i += 1
                break
            if ch in ";&":
                self.i += 1
                continue
            if ch == ":":
                self.i += 1
                label = self.read_int()
                if label is None:
                    raise self.fail("map label needs a number")
                put("map_label", label)
                continue
            two = s[self.i:self.i + 2]
            if two in ("Cl", "Br"):
                put("atomic_number", ATOMIC_NUMBER[two])
                put("aromatic", False)
                self.i += 2
            elif two in _FOREIGN_ELEMENTS:
                raise self.unsupported(f"element {two}")
            elif ch == "H":
                self.i += 1
                n = self.read_int()
                put("hcount", 1 if n is None else n)
            elif ch in "XD":
                self.i += 1
                n = self.read_int()
                put("connections" if ch == "X" else "degree", 1 if n is None else n)
            elif ch == "R":
                self.i += 1
                n = self.read_int()
                if n is None:
                    put("in_ring", True)
                elif n == 0:
                    put("in_ring", False)
                else:
                    put("ring_count", n)
            elif ch == "#":
                self.i += 1
                n = self.read_int()
                if n is None or n not in SYMBOL_BY_NUMBER:
                    raise self.fail("unsupported or missing atomic number after '#'")
                put("atomic_number", n)
            elif ch in "+-":
                sign = 1 if ch == "+" else -1
                self.i += 1
                n = self.read_int()
                if n is None:
                    n = 1
                    while self.i < len(s) and s[self.i] == ch:
                        n += 1
                        self.i += 1
                put("charge", sign * n)
            elif ch in "BCNOPSFI":
                put("atomic_number", ATOMIC_NUMBER[ch])
                put("aromatic", False)
                self.i += 1
            elif ch in AROMATIC_SYMBOLS:
                put("atomic_number", ATOMIC_NUMBER[AROMATIC_SYMBOLS[ch]])
                put("aromatic", True)
                self.i += 1
            elif ch == "a":
                put("aromatic", True)
                self.i += 1
            elif ch == "A":
                put("aromatic", False)
                self.i += 1
            elif ch == "*":
                self.i += 1
            elif ch in _UNSUPPORTED_ATOM:
                raise self.unsupported(_UNSUPPORTED_ATOM[ch])
            else:
                raise self.fail(f"unknown atom primitive {ch!r}")
        return AtomQuery(**fields)  # type: ignore[arg-type]


def compile_pattern(text: str) -> Pattern:
    """Compile SMARTS-subset text into a ``Pattern``."""
    if not isinstance(text, str) or not text:
        raise PatternSyntaxError("empty pattern", position=0)
    if not text.isascii() or text.strip() != text:
        raise PatternSyntaxError("pattern must be ASCII without surrounding whitespace", position=0)
    return _Compiler(text).compile()


def pattern_from_molecule(mol: Molecule, *, match_hydrogens: bool = False) -> Pattern:
    """Exact-structure query: element, aromaticity, charge and bond order."""
    atoms = tuple(
        AtomQuery(
            atomic_number=a.atomic_number,
            aromatic=a.aromatic,
            charge=a.formal_charge,
            hcount=a.total_h if match_hydrogens else None,
        )
        for a in mol.atoms
    )
    bonds = tuple(BondQuery(b.begin, b.end, frozenset({b.order})) for b in mol.bonds)
    return Pattern(atoms, bonds, "")
