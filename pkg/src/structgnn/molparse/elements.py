"""Element table and implicit-hydrogen rules."""

from __future__ import annotations

from typing import Final

# Ordering here fixes the element one-hot layout used by the featurizers.
ELEMENTS: Final = ("B", "C", "N", "O", "F", "Si", "P", "S", "Cl", "Br", "I", "H")
ELEMENT_INDEX: Final = {sym: i for i, sym in enumerate(ELEMENTS)}

ATOMIC_NUMBER: Final = {
    "H": 1, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9,
    "Si": 14, "P": 15, "S": 16, "Cl": 17, "Br": 35, "I": 53,
}

# Standard atomic weights (IUPAC conventional values).
ATOMIC_MASS: Final = {
    "H": 1.008, "B": 10.81, "C": 12.011, "N": 14.007, "O": 15.999,
    "F": 18.998, "Si": 28.085, "P": 30.974, "S": 32.06, "Cl": 35.45,
    "Br": 79.904, "I": 126.904,
}

DEFAULT_VALENCES: Final = {
    "H": (1,), "B": (3,), "C": (4,), "N": (3,), "O": (2,), "F": (1,),
    "Si": (4,), "P": (3, 5), "S": (2, 4, 6), "Cl": (1,), "Br": (1,), "I": (1,),
}

ORGANIC_SUBSET: Final = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_SYMBOLS: Final = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
HALOGENS: Final = frozenset({"F", "Cl", "Br", "I"})


def allowed_valences(element: str, charge: int = 0) -> tuple[int, ...]:
    """Valence table entries for ``element`` after the charge adjustment.

    Positive charge raises N/O capacity by one and negative charge lowers it;
    other elements are shifted by ``|charge|`` only when checking bracket
    atoms, see :func:`max_valence`.
    """
    vals = DEFAULT_VALENCES[element]
    if element in ("N", "O") and charge:
        shift = 1 if charge > 0 else -1
        vals = tuple(v + shift for v in vals)
    return vals


def max_valence(element: str, charge: int = 0) -> int:
    vals = allowed_valences(element, charge)
    if element in ("N", "O"):
        return max(vals)
    return max(vals) + abs(charge)


def implicit_hydrogens(element: str, bond_orders: list[int], aromatic: bool) -> int | None:
    """Implicit H count for an organic-subset atom, or None on valence overflow.

    ``bond_orders`` uses 1/2/3 for single/double/triple and 4 for aromatic.

    Non-aromatic atoms take the smallest table valence that is at least the
    bond-order sum. Aromatic bonds count 1 each; an aromatic atom additionally
    needs one pi bond unless its lowest valence is already saturated, in which
    case it is treated as a lone-pair donor (furan O, thiophene S,
    N-substituted pyrrole N) and gets no hydrogens. For carbon and pyridine-type
    nitrogen this agrees with counting aromatic bonds as 1.5 and rounding down.
    """
    vals = DEFAULT_VALENCES[element]
    n_arom = sum(1 for o in bond_orders if o == 4)
    total = sum(o for o in bond_orders if o != 4) + n_arom
    if aromatic and n_arom:
        lowest = vals[0]
        if lowest >= total + 1:
            return lowest - total - 1
        if lowest >= total:
            return 0
        for v in vals:
            if v >= total:
                return 0
        return None
    for v in vals:
        if v >= total:
            return v - total
    return None
