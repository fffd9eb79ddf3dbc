"""Turn a loosely specified draft graph into a validated ``Molecule``.

The SMILES parser, the editor, the scaffold pruner and the template engine
all produce drafts; this module is the single place where valences,
kekulizability and the aromatic ring rule are enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import AromaticityError, ValenceError
from .elements import (
    AROMATIC_ELEMENTS,
    DEFAULT_VALENCES,
    ORGANIC_SUBSET,
    allowed_valences,
    organic_implicit_h,
)
from .model import Atom, Bond, BondOrder, Molecule
from .rings import bridges, sssr


@dataclass
class DraftAtom:
    element: str
    charge: int = 0
    hcount: int | None = None  # None: derive from default valence
    isotope: int | None = None
    aromatic: bool = False
    position: int | None = None


@dataclass
class DraftBond:
    a: int
    b: int
    order: BondOrder
    implicit: bool = False  # aromatic only because both ends were lowercase


def draft_from_molecule(mol: Molecule) -> tuple[list[DraftAtom], list[DraftBond]]:
    """Explicit-H draft of an existing molecule, for editing."""
    atoms = [
        DraftAtom(a.element, a.formal_charge, a.total_h, a.isotope, a.aromatic) for a in mol.atoms
    ]
    bonds = [DraftBond(b.begin, b.end, b.order) for b in mol.bonds]
    return atoms, bonds


def relax_hydrogens(atoms: list[DraftAtom]) -> None:
    """Let neutral organic-subset atoms recompute H from their new bonding."""
    for atom in atoms:
        if atom.charge == 0 and atom.isotope is None and atom.element in ORGANIC_SUBSET:
            atom.hcount = None


def _kekulize(pi_atoms: set[int], arom_adj: dict[int, list[int]]) -> bool:
    """Find a perfect matching of ``pi_atoms`` over aromatic bonds."""
    partner: dict[int, int] = {}

    def free_nbrs(u: int) -> list[int]:
        return [v for v in arom_adj.get(u, ()) if v in pi_atoms and v not in partner]

    def solve() -> bool:
        best = None
        best_opts: list[int] = []
        for u in sorted(pi_atoms):
            if u in partner:
                continue
            opts = free_nbrs(u)
            if not opts:
                return False
            if best is None or len(opts) < len(best_opts):
                best, best_opts = u, opts
                if len(opts) == 1:
                    break
        if best is None:
            return True
        for v in best_opts:
            partner[best] = v
            partner[v] = best
            if solve():
                return True
            del partner[best]
            del partner[v]
        return False

    return solve()


def _pi_electrons(element: str, charge: int, pi: int) -> int:
    if pi:
        return 1
    if element in ("N", "O", "S", "P") and charge <= 0:
        return 2
    if element == "C" and charge < 0:
        return 2
    return 0


def finalize(
    atoms: list[DraftAtom],
    bonds: list[DraftBond],
    stereo_stripped: bool = False,
) -> Molecule:
    n = len(atoms)
    adj: list[list[int]] = [[] for _ in range(n)]
    for bond in bonds:
        adj[bond.a].append(bond.b)
        adj[bond.b].append(bond.a)
    bridge_set = bridges(adj)

    orders: list[BondOrder] = []
    for bond in bonds:
        order = bond.order
        key = (min(bond.a, bond.b), max(bond.a, bond.b))
        if order is BondOrder.AROMATIC:
            both = atoms[bond.a].aromatic and atoms[bond.b].aromatic
            if not both or key in bridge_set:
                if bond.implicit:
                    order = BondOrder.SINGLE
                else:
                    raise AromaticityError(
                        f"aromatic bond {bond.a}-{bond.b} is not inside an aromatic ring",
                        position=atoms[bond.b].position,
                    )
        orders.append(order)

    bond_sum = [0] * n
    arom_adj: dict[int, list[int]] = {}
    for bond, order in zip(bonds, orders):
        bond_sum[bond.a] += order.valence
        bond_sum[bond.b] += order.valence
        if order is BondOrder.AROMATIC:
            arom_adj.setdefault(bond.a, []).append(bond.b)
            arom_adj.setdefault(bond.b, []).append(bond.a)

    hydrogens = [0] * n
    pi = [0] * n
    for i, atom in enumerate(atoms):
        allowed = allowed_valences(atom.element, atom.charge)
        b = bond_sum[i]
        if atom.aromatic:
            if atom.element not in AROMATIC_ELEMENTS:
                raise AromaticityError(f"{atom.element} cannot be aromatic", position=atom.position)
            if len(arom_adj.get(i, ())) < 2:
                raise AromaticityError(
                    f"aromatic atom {i} is not part of an aromatic ring", position=atom.position
                )
            if atom.hcount is None:
                h = organic_implicit_h(atom.element, b, True)
                if h is None:
                    raise ValenceError(
                        f"atom {i} ({atom.element}) has valence {b}, allowed {allowed}",
                        atom=i, valence=b, allowed=allowed, position=atom.position,
                    )
                hydrogens[i] = h
                pi[i] = 1 if DEFAULT_VALENCES[atom.element][0] - b - 1 >= 0 else 0
            else:
                total = b + atom.hcount
                if total + 1 in allowed:
                    pi[i] = 1
                elif total not in allowed:
                    raise ValenceError(
                        f"atom {i} ({atom.element}) has valence {total}, allowed {allowed}",
                        atom=i, valence=total, allowed=allowed, position=atom.position,
                    )
                hydrogens[i] = atom.hcount
        else:
            if atom.hcount is None:
                h = organic_implicit_h(atom.element, b, False)
                if h is None or atom.charge != 0:
                    raise ValenceError(
                        f"atom {i} ({atom.element}) has valence {b}, allowed {allowed}",
                        atom=i, valence=b, allowed=allowed, position=atom.position,
                    )
                hydrogens[i] = h
            else:
                total = b + atom.hcount
                if total not in allowed:
                    raise ValenceError(
                        f"atom {i} ({atom.element}) has valence {total}, allowed {allowed}",
                        atom=i, valence=total, allowed=allowed, position=atom.position,
                    )
                hydrogens[i] = atom.hcount

    pi_atoms = {i for i in range(n) if pi[i]}
    if pi_atoms and not _kekulize(pi_atoms, arom_adj):
        first = min(pi_atoms)
        raise AromaticityError(
            "aromatic system cannot be kekulized", position=atoms[first].position
        )

    aromatic_atoms = {i for i in range(n) if atoms[i].aromatic}
    if aromatic_atoms:
        _check_aromatic_rings(atoms, adj, orders, bonds, pi, aromatic_atoms)

    final_atoms = []
    for i, atom in enumerate(atoms):
        h = hydrogens[i]
        writable = (
            atom.charge == 0
            and atom.isotope is None
            and atom.element in ORGANIC_SUBSET
            and organic_implicit_h(atom.element, bond_sum[i], atom.aromatic) == h
            and (
                not atom.aromatic
                or pi[i] == (1 if DEFAULT_VALENCES[atom.element][0] - bond_sum[i] - 1 >= 0 else 0)
            )
        )
        final_atoms.append(
            Atom(
                element=atom.element,
                formal_charge=atom.charge,
                explicit_h=0 if writable else h,
                isotope=atom.isotope,
                aromatic=atom.aromatic,
                index=i,
                implicit_h=h if writable else 0,
            )
        )
    final_bonds = sorted(
        (Bond(min(b.a, b.b), max(b.a, b.b), order) for b, order in zip(bonds, orders)),
        key=lambda x: (x.begin, x.end),
    )
    return Molecule(tuple(final_atoms), tuple(final_bonds), stereo_stripped)


def _check_aromatic_rings(atoms, adj, orders, bonds, pi, aromatic_atoms) -> None:
    arom_bond = set()
    for bond, order in zip(bonds, orders):
        if order is BondOrder.AROMATIC:
            arom_bond.add((min(bond.a, bond.b), max(bond.a, bond.b)))

    def ring_edges(ring):
        return {
            (min(ring[k], ring[(k + 1) % len(ring)]), max(ring[k], ring[(k + 1) % len(ring)]))
            for k in range(len(ring))
        }

    def electrons(members) -> int:
        return sum(_pi_electrons(atoms[i].element, atoms[i].charge, pi[i]) for i in members)

    candidates = [
        ring
        for ring in sssr(adj)
        if all(atoms[i].aromatic for i in ring) and ring_edges(ring) <= arom_bond
    ]
    ok: set[int] = set()
    for ring in candidates:
        if electrons(ring) % 4 == 2:
            ok.update(ring)
    if not aromatic_atoms <= ok:
        # fused pairs sharing a bond (azulene-type peripheries)
        for i in range(len(candidates)):
            for j in range(i + 1, len(candidates)):
                ei, ej = ring_edges(candidates[i]), ring_edges(candidates[j])
                if ei & ej:
                    members = set(candidates[i]) | set(candidates[j])
                    if electrons(members) % 4 == 2:
                        ok.update(members)
    bad = sorted(aromatic_atoms - ok)
    if bad:
        raise AromaticityError(
            f"atom {bad[0]} is not on a ring satisfying the 4n+2 rule",
            position=atoms[bad[0]].position,
        )


def induced_submolecule(mol: Molecule, keep) -> tuple[Molecule, dict[int, int]]:
    """Molecule on the atoms in ``keep``, each cut bond replaced by hydrogens.

    Returns the new molecule and the old-to-new index map.
    """
    kept = sorted(set(keep))
    index = {old: new for new, old in enumerate(kept)}
    atoms, _ = draft_from_molecule(mol)
    bonds: list[DraftBond] = []
    for bond in mol.bonds:
        a_in, b_in = bond.begin in index, bond.end in index
        if a_in and b_in:
            bonds.append(DraftBond(index[bond.begin], index[bond.end], bond.order))
        elif a_in:
            atoms[bond.begin].hcount += bond.order.valence
        elif b_in:
            atoms[bond.end].hcount += bond.order.valence
    return finalize([atoms[i] for i in kept], bonds), index
