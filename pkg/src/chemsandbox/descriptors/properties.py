"""Rule-based physicochemical descriptors: logP, TPSA, H-bond counts, QED."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

from ..errors import PatternSyntaxError, UntypedAtom
from ..molgraph.canon import molecular_weight
from ..molgraph.model import BondOrder, Molecule
from ..patterns.library import data_text
from ..patterns.match import find_matches
from ..patterns.smarts import Pattern, compile_pattern

QED_PROPERTIES = ("MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS")


@dataclass(frozen=True)
class TypingRule:
    priority: int
    pattern: Pattern
    contribution: float


@dataclass(frozen=True)
class PropertyVector:
    mw: float
    logp: float
    qed: float
    hbd: int
    hba: int
    psa: float
    rotatable_bonds: int
    aromatic_rings: int

    def to_dict(self) -> dict:
        return asdict(self)


def _records(name: str):
    for lineno, raw in enumerate(data_text(name).splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line.split("\t")


def parse_typing_rules(text: str) -> tuple[TypingRule, ...]:
    """``priority<TAB>pattern<TAB>contribution`` records, sorted by priority."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise PatternSyntaxError(f"line {lineno}: expected priority, pattern, contribution")
        rules.append(TypingRule(int(parts[0]), compile_pattern(parts[1]), float(parts[2])))
    return tuple(sorted(rules, key=lambda r: r.priority))


@lru_cache(maxsize=1)
def logp_rules() -> tuple[TypingRule, ...]:
    return parse_typing_rules(data_text("logp_rules.tsv"))


@lru_cache(maxsize=1)
def hydrogen_rules() -> tuple[TypingRule, ...]:
    return parse_typing_rules(data_text("logp_hydrogens.tsv"))


def _anchored_hits(mol: Molecule, pattern: Pattern) -> set[int]:
    return {m[0] for m in find_matches(mol, pattern)}


def assign_types(mol: Molecule, rules: tuple[TypingRule, ...], atoms=None) -> dict[int, TypingRule]:
    """First matching rule per atom, the atom sitting at query position 0."""
    pending = set(range(len(mol.atoms)) if atoms is None else atoms)
    typed: dict[int, TypingRule] = {}
    for rule in rules:
        if not pending:
            break
        for atom in _anchored_hits(mol, rule.pattern) & pending:
            typed[atom] = rule
        pending -= typed.keys()
    return typed


def atom_logp_contributions(mol: Molecule, rules=None, h_rules=None) -> list[float]:
    rules = logp_rules() if rules is None else rules
    h_rules = hydrogen_rules() if h_rules is None else h_rules
    heavy = assign_types(mol, rules)
    missing = sorted(set(range(len(mol.atoms))) - heavy.keys())
    if missing:
        raise UntypedAtom(f"no logP typing rule matches atom {missing[0]}", atom=missing[0])
    bearing = [i for i, a in enumerate(mol.atoms) if a.total_h]
    hyd = assign_types(mol, h_rules, bearing)
    out = []
    for i, atom in enumerate(mol.atoms):
        value = heavy[i].contribution
        if atom.total_h:
            if i not in hyd:
                raise UntypedAtom(f"no hydrogen typing rule matches atom {i}", atom=i)
            value += atom.total_h * hyd[i].contribution
        out.append(value)
    return out


def logp(mol: Molecule) -> float:
    """Additive atom-contribution octanol/water partition estimate."""
    return math.fsum(atom_logp_contributions(mol))


# -- polar surface, H-bonding, flexibility ----------------------------------------


@lru_cache(maxsize=1)
def _psa_table() -> dict[tuple, float]:
    table = {}
    for _, parts in _records("psa.tsv"):
        element, arom, charge, h, single, double, triple, arom_bonds, value = parts
        key = (element, arom == "1", int(charge), int(h), int(single), int(double), int(triple), int(arom_bonds))
        table[key] = float(value)
    return table


def tpsa(mol: Molecule) -> float:
    """Topological polar surface area from N and O environment contributions."""
    table = _psa_table()
    terms = []
    for i, atom in enumerate(mol.atoms):
        if atom.element not in ("N", "O"):
            continue
        counts = {order: 0 for order in BondOrder}
        for _, order in mol.neighbors[i]:
            counts[order] += 1
        key = (
            atom.element, atom.aromatic, atom.formal_charge, atom.total_h,
            counts[BondOrder.SINGLE], counts[BondOrder.DOUBLE], counts[BondOrder.TRIPLE], counts[BondOrder.AROMATIC],
        )
        terms.append(table.get(key, 0.0))
    return math.fsum(terms)


@lru_cache(maxsize=1)
def _hbond_rules() -> dict[str, tuple[Pattern, ...]]:
    kinds: dict[str, list[Pattern]] = {"donor": [], "acceptor": [], "exclude": []}
    for lineno, parts in _records("hbond_rules.tsv"):
        if len(parts) != 2 or parts[0] not in kinds:
            raise PatternSyntaxError(f"hbond_rules.tsv line {lineno}: bad record")
        kinds[parts[0]].append(compile_pattern(parts[1]))
    return {k: tuple(v) for k, v in kinds.items()}


def _anchored_union(mol: Molecule, patterns) -> set[int]:
    out: set[int] = set()
    for p in patterns:
        out |= _anchored_hits(mol, p)
    return out


def hbond_donors(mol: Molecule) -> int:
    """Heavy atoms (N, O) carrying at least one hydrogen."""
    return len(_anchored_union(mol, _hbond_rules()["donor"]))


def hbond_acceptors(mol: Molecule) -> int:
    rules = _hbond_rules()
    return len(_anchored_union(mol, rules["acceptor"]) - _anchored_union(mol, rules["exclude"]))


def _is_amide_bond(mol: Molecule, a: int, b: int) -> bool:
    for c, n in ((a, b), (b, a)):
        if mol.atoms[c].element == "C" and mol.atoms[n].element == "N":
            if any(order is BondOrder.DOUBLE and mol.atoms[v].element == "O" for v, order in mol.neighbors[c]):
                return True
    return False


def rotatable_bonds(mol: Molecule) -> int:
    """Acyclic single bonds between non-terminal heavy atoms, amide C-N excluded."""
    count = 0
    for bond in mol.bonds:
        if bond.order is not BondOrder.SINGLE or mol.is_ring_bond(bond.begin, bond.end):
            continue
        if mol.degree(bond.begin) < 2 or mol.degree(bond.end) < 2:
            continue
        if _is_amide_bond(mol, bond.begin, bond.end):
            continue
        count += 1
    return count


def aromatic_ring_count(mol: Molecule) -> int:
    return sum(1 for ring in mol.rings if all(mol.atoms[i].aromatic for i in ring))


# -- QED -----------------------------------------------------------------------


@lru_cache(maxsize=1)
def qed_parameters() -> dict[str, tuple[float, ...]]:
    params = {}
    for _, parts in _records("qed_params.tsv"):
        params[parts[0]] = tuple(float(x) for x in parts[1:])
    missing = set(QED_PROPERTIES) - params.keys()
    if missing:
        raise PatternSyntaxError(f"qed_params.tsv lacks {sorted(missing)}")
    return params


@lru_cache(maxsize=1)
def structural_alerts() -> tuple[tuple[str, Pattern], ...]:
    return tuple((parts[0], compile_pattern(parts[1])) for _, parts in _records("alerts.tsv"))


def alert_count(mol: Molecule) -> int:
    """Number of distinct alert patterns present."""
    return sum(1 for _, p in structural_alerts() if find_matches(mol, p))


def desirability(name: str, x: float) -> float:
    a, b, c, d, e, f, dmax = qed_parameters()[name]

    def sigmoid(z: float) -> float:
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        ez = math.exp(z)
        return ez / (1.0 + ez)

    rise = sigmoid((x - c + d / 2) / e)
    fall = 1.0 - sigmoid((x - c - d / 2) / f)
    return (a + b * rise * fall) / dmax


def qed_from_properties(values: dict[str, float]) -> float:
    """Unweighted geometric mean of the eight desirabilities, in (0, 1]."""
    logs = []
    for name in QED_PROPERTIES:
        d = desirability(name, float(values[name]))
        logs.append(math.log(min(max(d, 1e-300), 1.0)))
    return min(1.0, math.exp(math.fsum(logs) / len(logs)))


def qed_inputs(mol: Molecule) -> dict[str, float]:
    return {
        "MW": molecular_weight(mol),
        "ALOGP": logp(mol),
        "HBA": hbond_acceptors(mol),
        "HBD": hbond_donors(mol),
        "PSA": tpsa(mol),
        "ROTB": rotatable_bonds(mol),
        "AROM": aromatic_ring_count(mol),
        "ALERTS": alert_count(mol),
    }


def qed(mol: Molecule) -> float:
    return qed_from_properties(qed_inputs(mol))


def property_vector(mol: Molecule) -> PropertyVector:
    inputs = qed_inputs(mol)
    return PropertyVector(
        mw=inputs["MW"],
        logp=inputs["ALOGP"],
        qed=qed_from_properties(inputs),
        hbd=int(inputs["HBD"]),
        hba=int(inputs["HBA"]),
        psa=inputs["PSA"],
        rotatable_bonds=int(inputs["ROTB"]),
        aromatic_rings=int(inputs["AROM"]),
    )
