"""Element data: supported symbols, default valences, standard atomic weights."""

from __future__ import annotations

ATOMIC_NUMBER: dict[str, int] = {
    "B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "P": 15, "S": 16, "Cl": 17, "Br": 35, "I": 53,
}
SYMBOL_BY_NUMBER = {z: s for s, z in ATOMIC_NUMBER.items()}

# IUPAC 2021 standard atomic weights, abridged to three decimals.
ATOMIC_WEIGHT: dict[str, float] = {
    "H": 1.008, "B": 10.81, "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.998,
    "P": 30.974, "S": 32.06, "Cl": 35.45, "Br": 79.904, "I": 126.904,
}

DEFAULT_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,), "C": (4,), "N": (3,), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}

ORGANIC_SUBSET = frozenset(DEFAULT_VALENCES)
AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
AROMATIC_ELEMENTS = frozenset(AROMATIC_SYMBOLS.values())

MAX_ABS_CHARGE = 4
MAX_EXPLICIT_H = 8


def allowed_valences(element: str, charge: int) -> tuple[int, ...]:
    """Total valences (bond orders + H) permitted for an element at a charge.

    Charge shifts valence up for the pnictogens, chalcogens and halogens
    (onium ions), down for carbon whichever the sign, and against the sign
    for boron (borate anions are tetravalent).
    """
    base = DEFAULT_VALENCES[element]
    if charge == 0:
        return base
    if element == "C":
        vals = tuple(v - abs(charge) for v in base)
    elif element == "B":
        vals = tuple(v - charge for v in base)
    else:
        vals = tuple(v + charge for v in base)
    return tuple(v for v in vals if v >= 0)


def organic_implicit_h(element: str, bond_sum: int, aromatic: bool) -> int | None:
    """Implicit hydrogen count of an unbracketed atom, or None if impossible.

    Aromatic atoms only use the lowest default valence: one unit goes to the
    ring pi system when room is left, otherwise the atom is a lone-pair donor
    (pyrrole-type n, furan o, thiophene s).
    """
    if aromatic:
        v0 = DEFAULT_VALENCES[element][0]
        if v0 - bond_sum - 1 >= 0:
            return v0 - bond_sum - 1
        if v0 == bond_sum:
            return 0
        return None
    for v in DEFAULT_VALENCES[element]:
        if v >= bond_sum:
            return v - bond_sum
    return None
