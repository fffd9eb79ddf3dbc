"""SMILES reader.

Supported: organic-subset atoms, bracket atoms (isotope, H count, charge),
bonds ``- = # :``, branches, ring closures (``%nn`` included) and ``.``.
Stereo markers and atom classes are read, dropped, and reported.
"""

from __future__ import annotations

from ..errors import RingBondMismatch, SmilesSyntaxError, UnsupportedFeature
from .build import DraftAtom, DraftBond, finalize
from .elements import (
    AROMATIC_SYMBOLS,
    ATOMIC_NUMBER,
    MAX_ABS_CHARGE,
    MAX_EXPLICIT_H,
)
from .model import BondOrder, Diagnostic, Molecule, ParseDiagnostics

_BOND_CHARS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}
_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = "BCNOPSFI"


class _Parser:
    def __init__(self, text: str) -> None:
        self.s = text
        self.i = 0
        self.atoms: list[DraftAtom] = []
        self.bonds: list[DraftBond] = []
        self.bond_keys: set[tuple[int, int]] = set()
        self.warnings: list[Diagnostic] = []
        self.stripped: list[str] = []

    # -- helpers -------------------------------------------------------------

    def error(self, message: str, expected: str | None = None) -> SmilesSyntaxError:
        if expected:
            message = f"{message} at position {self.i}; expected {expected}"
        else:
            message = f"{message} at position {self.i}"
        return SmilesSyntaxError(message, position=self.i)

    def strip(self, feature: str, message: str, pos: int) -> None:
        if feature not in self.stripped:
            self.stripped.append(feature)
        self.warnings.append(Diagnostic(pos, f"stripped_{feature}", message))

    def add_bond(self, a: int, b: int, symbol: str | None, pos: int, ring: bool = False) -> None:
        key = (min(a, b), max(a, b))
        if a == b:
            raise RingBondMismatch(f"ring closure bonds atom {a} to itself", position=pos)
        if key in self.bond_keys:
            raise RingBondMismatch(f"duplicate bond between atoms {a} and {b}", position=pos)
        self.bond_keys.add(key)
        if symbol is None:
            if self.atoms[a].aromatic and self.atoms[b].aromatic:
                self.bonds.append(DraftBond(a, b, BondOrder.AROMATIC, implicit=True))
            else:
                self.bonds.append(DraftBond(a, b, BondOrder.SINGLE))
        else:
            self.bonds.append(DraftBond(a, b, _BOND_CHARS[symbol]))

    def read_int(self) -> int | None:
        start = self.i
        while self.i < len(self.s) and self.s[self.i].isdigit():
            self.i += 1
        if self.i == start:
            return None
        return int(self.s[start:self.i])

    # -- grammar -------------------------------------------------------------

    def parse(self) -> tuple[list[DraftAtom], list[DraftBond]]:
        s = self.s
        prev: int | None = None
        pending: tuple[str, int] | None = None
        branches: list[tuple[int, int]] = []
        rings: dict[int, tuple[int, str | None, int]] = {}
        expect_atom = True  # start of string, after '(' or '.'
        while self.i < len(s):
            ch = s[self.i]
            pos = self.i
            if ch == "(":
                if prev is None or expect_atom:
                    raise self.error("branch opened without a preceding atom", "atom")
                if pending is not None:
                    raise self.error("bond symbol before '('", "atom")
                branches.append((prev, pos))
                self.i += 1
                expect_atom = True
            elif ch == ")":
                if not branches:
                    raise self.error("unbalanced ')'")
                if pending is not None or expect_atom:
                    raise self.error("empty branch or dangling bond before ')'", "atom")
                prev = branches.pop()[0]
                self.i += 1
            elif ch in _BOND_CHARS:
                if pending is not None:
                    raise self.error("two consecutive bond symbols", "atom")
                if prev is None:
                    raise self.error("bond symbol without a preceding atom", "atom")
                if ch in "/\\":
                    self.strip("stereo", f"directional bond '{ch}' read as single", pos)
                pending = (ch, pos)
                self.i += 1
            elif ch == "$":
                raise UnsupportedFeature(f"quadruple bond at position {pos}", position=pos)
            elif ch == ".":
                if pending is not None or branches or prev is None or expect_atom:
                    raise self.error("unexpected '.'", "atom")
                prev = None
                expect_atom = True
                self.i += 1
            elif ch.isdigit() or ch == "%":
                if prev is None or expect_atom:
                    raise self.error("ring-closure digit without a preceding atom", "atom")
                if ch == "%":
                    self.i += 1
                    if self.i + 2 > len(s) or not s[self.i:self.i + 2].isdigit():
                        raise self.error("'%' must be followed by two digits", "two digits")
                    num = int(s[self.i:self.i + 2])
                    self.i += 2
                else:
                    num = int(ch)
                    self.i += 1
                symbol = pending[0] if pending else None
                pending = None
                if num in rings:
                    other, other_symbol, _ = rings.pop(num)
                    chosen = _merge_ring_bond(other_symbol, symbol, pos)
                    self.add_bond(other, prev, chosen, pos, ring=True)
                else:
                    rings[num] = (prev, symbol, pos)
            elif ch == "[":
                idx = self.bracket_atom()
                self.attach(idx, prev, pending)
                prev, pending, expect_atom = idx, None, False
            elif ch in "*":
                raise UnsupportedFeature(f"wildcard atom at position {pos}", position=pos)
            else:
                idx = self.organic_atom()
                self.attach(idx, prev, pending)
                prev, pending, expect_atom = idx, None, False
        if pending is not None:
            self.i = pending[1]
            raise self.error("dangling bond at end of input", "atom")
        if branches:
            self.i = branches[-1][1]
            raise self.error("unclosed branch", "')'")
        if expect_atom:
            raise self.error("unexpected end of input", "atom")
        if rings:
            num, (_, _, pos) = min(rings.items(), key=lambda kv: kv[1][2])
            raise RingBondMismatch(f"ring closure {num} opened at position {pos} is never closed", position=pos)
        return self.atoms, self.bonds

    def attach(self, idx: int, prev: int | None, pending: tuple[str, int] | None) -> None:
        if prev is not None:
            self.add_bond(prev, idx, pending[0] if pending else None, self.atoms[idx].position or 0)

    def organic_atom(self) -> int:
        s, pos = self.s, self.i
        two = s[pos:pos + 2]
        if two in _ORGANIC_TWO:
            element, aromatic = two, False
            self.i += 2
        elif s[pos] in _ORGANIC_ONE:
            element, aromatic = s[pos], False
            self.i += 1
        elif s[pos] in AROMATIC_SYMBOLS:
            element, aromatic = AROMATIC_SYMBOLS[s[pos]], True
            self.i += 1
        elif s[pos].isupper():
            raise UnsupportedFeature(
                f"element symbol {s[pos]!r} at position {pos} must be written in brackets or is unsupported",
                position=pos,
            )
        else:
            raise self.error(f"unexpected character {s[pos]!r}", "atom, bond, branch or ring digit")
        self.atoms.append(DraftAtom(element, aromatic=aromatic, position=pos))
        return len(self.atoms) - 1

    def bracket_atom(self) -> int:
        s = self.s
        start = self.i
        self.i += 1
        isotope = self.read_int()
        if self.i >= len(s):
            raise self.error("unterminated bracket atom", "element symbol")
        ch = s[self.i]
        if ch == "*":
            raise UnsupportedFeature(f"wildcard atom at position {self.i}", position=self.i)
        if ch.isupper():
            symbol = ch
            if self.i + 1 < len(s) and s[self.i + 1].islower():
                symbol += s[self.i + 1]
            self.i += len(symbol)
            aromatic = False
            if symbol == "H":
                raise UnsupportedFeature(f"explicit hydrogen atom at position {start}", position=start)
            if symbol not in ATOMIC_NUMBER:
                raise UnsupportedFeature(f"element {symbol!r} at position {start} is not supported", position=start)
            element = symbol
        elif ch.islower():
            two = s[self.i:self.i + 2]
            if two in ("se", "as", "te"):
                raise UnsupportedFeature(f"aromatic {two!r} at position {self.i} is not supported", position=self.i)
            if ch not in AROMATIC_SYMBOLS:
                raise self.error(f"unknown aromatic symbol {ch!r}", "element symbol")
            element = AROMATIC_SYMBOLS[ch]
            aromatic = True
            self.i += 1
        else:
            raise self.error("missing element symbol in bracket atom", "element symbol")

        if self.i < len(s) and s[self.i] == "@":
            cpos = self.i
            self.i += 1
            if self.i < len(s) and s[self.i] == "@":
                self.i += 1
            elif s[self.i:self.i + 2] in ("TH", "AL", "SP", "TB", "OH"):
                self.i += 2
                if self.read_int() is None:
                    raise self.error("chirality class needs a number", "digit")
            self.strip("stereo", "tetrahedral/extended chirality ignored", cpos)

        hcount = 0
        if self.i < len(s) and s[self.i] == "H":
            self.i += 1
            n = self.read_int()
            hcount = 1 if n is None else n
        if hcount > MAX_EXPLICIT_H:
            raise self.error(f"hydrogen count {hcount} exceeds {MAX_EXPLICIT_H}")

        charge = 0
        if self.i < len(s) and s[self.i] in "+-":
            sign = 1 if s[self.i] == "+" else -1
            sym = s[self.i]
            self.i += 1
            n = self.read_int()
            if n is not None:
                charge = sign * n
            else:
                charge = sign
                while self.i < len(s) and s[self.i] == sym:
                    charge += sign
                    self.i += 1
        if abs(charge) > MAX_ABS_CHARGE:
            raise self.error(f"formal charge {charge} out of range")

        if self.i < len(s) and s[self.i] == ":":
            cpos = self.i
            self.i += 1
            if self.read_int() is None:
                raise self.error("atom class needs a number", "digit")
            self.strip("atom_class", "atom-map/class label ignored", cpos)

        if self.i >= len(s) or s[self.i] != "]":
            raise self.error("malformed bracket atom", "']'")
        self.i += 1
        self.atoms.append(
            DraftAtom(element, charge, hcount, isotope, aromatic, position=start)
        )
        return len(self.atoms) - 1


def _merge_ring_bond(first: str | None, second: str | None, pos: int) -> str | None:
    if first is None:
        return second
    if second is None:
        return first
    a, b = _BOND_CHARS[first], _BOND_CHARS[second]
    if a != b:
        raise RingBondMismatch(
            f"ring closure bond symbols {first!r} and {second!r} disagree", position=pos
        )
    return first


def parse_smiles(text: str) -> tuple[Molecule, ParseDiagnostics]:
    """Parse SMILES text into a validated molecule plus diagnostics."""
    if not isinstance(text, str) or not text:
        raise SmilesSyntaxError("empty SMILES input", position=0)
    if not text.isascii():
        bad = next(i for i, c in enumerate(text) if not c.isascii())
        raise SmilesSyntaxError(f"non-ASCII character at position {bad}", position=bad)
    text_stripped = text.strip()
    if text_stripped != text:
        raise SmilesSyntaxError("surrounding whitespace is not allowed", position=0)
    parser = _Parser(text)
    atoms, bonds = parser.parse()
    mol = finalize(atoms, bonds, stereo_stripped="stereo" in parser.stripped)
    return mol, ParseDiagnostics(tuple(parser.warnings), tuple(parser.stripped))


def mol_from_smiles(text: str) -> Molecule:
    """Shorthand for ``parse_smiles(text)[0]``."""
    return parse_smiles(text)[0]
