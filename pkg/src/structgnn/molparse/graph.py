"""Immutable molecular graph types."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .elements import ATOMIC_MASS


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)


class Chirality(IntEnum):
    NONE = 0
    CW = 1   # "@@"
    CCW = 2  # "@"


@dataclass(frozen=True, slots=True)
class Atom:
    element: str
    formal_charge: int = 0
    explicit_h: int | None = None
    implicit_h: int = 0
    aromatic: bool = False
    chirality: Chirality = Chirality.NONE
    isotope: int | None = None
    bracket: bool = False

    @property
    def total_h(self) -> int:
        return (self.explicit_h or 0) + self.implicit_h

    @property
    def mass(self) -> float:
        return ATOMIC_MASS[self.element]


@dataclass(frozen=True, slots=True)
class Bond:
    begin: int
    end: int
    order: BondOrder
    in_ring: bool = False

    def other(self, atom: int) -> int:
        return self.end if atom == self.begin else self.begin


@dataclass(frozen=True)
class RingInfo:
    """SSSR rings and fused ring systems, both as sorted atom-index tuples."""

    rings: tuple[tuple[int, ...], ...] = ()
    ring_systems: tuple[tuple[int, ...], ...] = ()
    ring_bonds: tuple[tuple[int, ...], ...] = ()

    @property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(a for r in self.rings for a in r)


@dataclass(frozen=True)
class MolGraph:
    """A connected molecule with hydrogens folded into heavy-atom counts.

    ``stereo_order`` records, per atom, the neighbor order as written in the
    source SMILES (``-1`` standing for a bracket hydrogen). Only chiral atoms
    need it; it lets writers re-express ``@``/``@@`` after reordering.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...]
    ring_info: RingInfo = field(default_factory=RingInfo)
    stereo_order: tuple[tuple[int, ...], ...] = ()

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def neighbors(self, atom: int) -> list[int]:
        return [n for n, _ in self.adjacency[atom]]

    def degree(self, atom: int) -> int:
        return len(self.adjacency[atom])

    def bond_between(self, a: int, b: int) -> Bond | None:
        for n, bi in self.adjacency[a]:
            if n == b:
                return self.bonds[bi]
        return None

    def bond_orders(self, atom: int) -> list[BondOrder]:
        return [self.bonds[bi].order for _, bi in self.adjacency[atom]]

    def element_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for a in self.atoms:
            counts[a.element] = counts.get(a.element, 0) + 1
        return counts


def build_adjacency(n_atoms: int, bonds: list[Bond] | tuple[Bond, ...]):
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for i, b in enumerate(bonds):
        adj[b.begin].append((b.end, i))
        adj[b.end].append((b.begin, i))
    return tuple(tuple(a) for a in adj)
