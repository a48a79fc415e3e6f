"""Functional-group hyper-atoms and the node set built from them.

Five group kinds are matched in fixed priority (sulfonamide, ester, acid,
amine, ring); each atom is claimed by at most one group and unclaimed atoms
stay plain. Candidates are visited in canonical-rank order so the partition
does not depend on how the SMILES was written.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .featurize import ATOM_FDIM, atom_features
from .molparse import BondOrder, MolGraph, RingInfo
from .molparse.canon import canonical_chirality, canonical_order
from .molparse.elements import ATOMIC_MASS, ELEMENT_INDEX, ELEMENTS


class Kind(str, enum.Enum):
    RING = "Ring"
    ACID = "Acid"
    AMINE = "Amine"
    ESTER = "Ester"
    SULFONAMIDE = "Sulfonamide"


KIND_SLOTS = (Kind.RING, Kind.ACID, Kind.AMINE, Kind.ESTER, Kind.SULFONAMIDE, "plain")

# counts | internal edges | charge | H | aromatic | mass | external valence
HYPER_SUMMARY_DIM = len(ELEMENTS) + 6
HYPER_FDIM = HYPER_SUMMARY_DIM + len(KIND_SLOTS) + ATOM_FDIM


@dataclass(frozen=True)
class Substructure:
    kind: Kind
    atom_indices: tuple[int, ...]
    internal_bond_indices: tuple[int, ...]


@dataclass
class SubstructureSet:
    substructures: list[Substructure] = field(default_factory=list)
    plain_atoms: list[int] = field(default_factory=list)

    def as_records(self) -> list[dict]:
        return [{"kind": s.kind.value, "atoms": list(s.atom_indices)} for s in self.substructures]


def _double_oxygens(mol: MolGraph, atom: int) -> list[int]:
    return [
        w
        for w, bi in mol.adjacency[atom]
        if mol.atoms[w].element == "O" and mol.bonds[bi].order is BondOrder.DOUBLE
    ]


def _single_neighbors(mol: MolGraph, atom: int, element: str) -> list[int]:
    return [
        w
        for w, bi in mol.adjacency[atom]
        if mol.atoms[w].element == element and mol.bonds[bi].order is BondOrder.SINGLE
    ]


def _is_carbonyl_carbon(mol: MolGraph, atom: int) -> bool:
    return mol.atoms[atom].element == "C" and bool(_double_oxygens(mol, atom))


def extract_substructures(
    mol: MolGraph, rings: RingInfo | None = None, order: list[int] | None = None
) -> SubstructureSet:
    """Partition atoms into functional-group hyper-atoms and plain atoms.

    Pattern definitions (heavy atoms only):

    - Sulfonamide: S(=O)(=O)-N, claims S, both O and N
    - Ester: C(=O)-O-C, claims the carbonyl C, carbonyl O and ester O
    - Acid: C(=O)-O-H, claims C and both O
    - Amine: a non-aromatic N with only single bonds, not bonded to a
      carbonyl carbon
    - Ring: the still-unclaimed atoms of each fused ring system
    """
    if rings is None:
        rings = mol.ring_info
    if order is None:
        order = canonical_order(mol)
    by_rank = sorted(range(mol.n_atoms), key=lambda i: order[i])
    claimed = [False] * mol.n_atoms
    found: list[tuple[Kind, list[int]]] = []

    def free(atoms: list[int]) -> list[int]:
        return sorted((a for a in atoms if not claimed[a]), key=lambda a: order[a])

    def claim(kind: Kind, atoms: list[int]) -> None:
        for a in atoms:
            claimed[a] = True
        found.append((kind, atoms))

    for s in by_rank:
        if claimed[s] or mol.atoms[s].element != "S":
            continue
        oxygens = free(_double_oxygens(mol, s))
        nitrogens = free(_single_neighbors(mol, s, "N"))
        if len(oxygens) >= 2 and nitrogens:
            claim(Kind.SULFONAMIDE, [s, oxygens[0], oxygens[1], nitrogens[0]])

    for c in by_rank:
        if claimed[c] or mol.atoms[c].element != "C":
            continue
        carbonyl = free(_double_oxygens(mol, c))
        if not carbonyl:
            continue
        ester_o = [
            o
            for o in free(_single_neighbors(mol, c, "O"))
            if mol.degree(o) == 2 and all(mol.atoms[w].element == "C" for w in mol.neighbors(o))
        ]
        if ester_o:
            claim(Kind.ESTER, [c, carbonyl[0], ester_o[0]])

    for c in by_rank:
        if claimed[c] or mol.atoms[c].element != "C":
            continue
        carbonyl = free(_double_oxygens(mol, c))
        if not carbonyl:
            continue
        hydroxyl = [
            o
            for o in free(_single_neighbors(mol, c, "O"))
            if mol.degree(o) == 1 and mol.atoms[o].total_h >= 1
        ]
        if hydroxyl:
            claim(Kind.ACID, [c, carbonyl[0], hydroxyl[0]])

    for n in by_rank:
        atom = mol.atoms[n]
        if claimed[n] or atom.element != "N" or atom.aromatic:
            continue
        if any(o is not BondOrder.SINGLE for o in mol.bond_orders(n)):
            continue
        if any(_is_carbonyl_carbon(mol, w) for w in mol.neighbors(n)):
            continue
        claim(Kind.AMINE, [n])

    systems = sorted(rings.ring_systems, key=lambda sys: min(order[a] for a in sys))
    for system in systems:
        atoms = free(list(system))
        if atoms:
            claim(Kind.RING, atoms)

    subs = []
    for kind, atoms in found:
        members = set(atoms)
        internal = tuple(
            bi for bi, b in enumerate(mol.bonds) if b.begin in members and b.end in members
        )
        subs.append(Substructure(kind, tuple(sorted(atoms)), internal))
    plain = [i for i in range(mol.n_atoms) if not claimed[i]]
    return SubstructureSet(subs, plain)


def external_valence(mol: MolGraph, sub: Substructure) -> int:
    members = set(sub.atom_indices)
    return sum(1 for b in mol.bonds if (b.begin in members) != (b.end in members))


def hyperatom_features(mol: MolGraph, sub: Substructure) -> np.ndarray:
    """Generalized feature row for a hyper-atom (atom-feature block left at 0)."""
    row = np.zeros(HYPER_FDIM)
    for a in sub.atom_indices:
        row[ELEMENT_INDEX[mol.atoms[a].element]] += 1.0
    off = len(ELEMENTS)
    internal = sub.internal_bond_indices
    row[off] = len(internal)
    row[off + 1] = sum(mol.atoms[a].formal_charge for a in sub.atom_indices)
    row[off + 2] = sum(mol.atoms[a].total_h for a in sub.atom_indices)
    row[off + 3] = float(
        bool(internal) and all(mol.bonds[bi].order is BondOrder.AROMATIC for bi in internal)
    )
    row[off + 4] = sum(ATOMIC_MASS[mol.atoms[a].element] for a in sub.atom_indices) / 100.0
    row[off + 5] = external_valence(mol, sub)
    row[HYPER_SUMMARY_DIM + KIND_SLOTS.index(sub.kind)] = 1.0
    return row


def plain_atom_features(mol: MolGraph, atom_index: int, chirality=None) -> np.ndarray:
    row = np.zeros(HYPER_FDIM)
    row[HYPER_SUMMARY_DIM + KIND_SLOTS.index("plain")] = 1.0
    row[HYPER_SUMMARY_DIM + len(KIND_SLOTS):] = atom_features(mol, atom_index, chirality)
    return row


def node_set(
    mol: MolGraph, subs: SubstructureSet | None = None, order: list[int] | None = None
) -> np.ndarray:
    """Rows for every hyper-atom (in match order) then every plain atom (by index)."""
    if order is None:
        order = canonical_order(mol)
    if subs is None:
        subs = extract_substructures(mol, order=order)
    tags = canonical_chirality(mol, order)
    rows = [hyperatom_features(mol, s) for s in subs.substructures]
    rows += [plain_atom_features(mol, i, tags[i]) for i in subs.plain_atoms]
    return np.stack(rows)
