"""Named functional groups loaded from the bundled tab-separated library."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..errors import PatternSyntaxError, UnknownGroup
from ..molgraph.model import Molecule
from .match import find_matches, unique_atom_sets
from .smarts import Pattern, compile_pattern

COUNT_MODES = ("all-matches", "unique-atom-sets")


@dataclass(frozen=True)
class FunctionalGroupDef:
    name: str
    patterns: tuple[Pattern, ...]
    count_mode: str = "unique-atom-sets"

    @property
    def pattern(self) -> Pattern:
        return self.patterns[0]

    @property
    def source_text(self) -> str:
        return "|".join(p.source_text for p in self.patterns)

    def matches(self, mol: Molecule) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = []
        for p in self.patterns:
            out.extend(find_matches(mol, p))
        return out

    def count(self, mol: Molecule) -> int:
        found = self.matches(mol)
        if self.count_mode == "all-matches":
            return len(found)
        return len(unique_atom_sets(found))


def data_text(name: str) -> str:
    return (resources.files("chemsandbox") / "data" / name).read_text(encoding="utf-8")


def parse_library(text: str) -> dict[str, FunctionalGroupDef]:
    """Parse ``name<TAB>pattern<TAB>count_mode`` records; '#' starts a comment."""
    groups: dict[str, FunctionalGroupDef] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise PatternSyntaxError(f"line {lineno}: expected 2 or 3 tab-separated fields")
        name, pattern_text = parts[0], parts[1]
        mode = parts[2] if len(parts) == 3 else "unique-atom-sets"
        if mode not in COUNT_MODES:
            raise PatternSyntaxError(f"line {lineno}: unknown count mode {mode!r}")
        if name in groups:
            raise PatternSyntaxError(f"line {lineno}: duplicate group name {name!r}")
        patterns = tuple(compile_pattern(alt) for alt in pattern_text.split("|"))
        groups[name] = FunctionalGroupDef(name, patterns, mode)
    return groups


@lru_cache(maxsize=1)
def functional_groups() -> dict[str, FunctionalGroupDef]:
    return parse_library(data_text("functional_groups.tsv"))


def group_names() -> list[str]:
    return list(functional_groups())


def get_group(name: str) -> FunctionalGroupDef:
    try:
        return functional_groups()[name]
    except KeyError:
        raise UnknownGroup(f"unknown functional group {name!r}", group=name) from None


def count_functional_group(mol: Molecule, group: str) -> int:
    """Occurrences of a named group, deduplicated per the group's count mode."""
    return get_group(group).count(mol)


def functional_group_counts(mol: Molecule) -> dict[str, int]:
    return {name: g.count(mol) for name, g in functional_groups().items()}
