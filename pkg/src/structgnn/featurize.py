"""Atom, bond and molecule-level feature vectors.

Layouts are fixed; column names are exposed through :data:`ATOM_FEATURE_NAMES`,
:data:`BOND_FEATURE_NAMES` and :data:`GLOBAL_FEATURE_NAMES`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .molparse import BondOrder, Chirality, MolGraph
from .molparse.canon import canonical_chirality, canonical_order
from .molparse.elements import ATOMIC_MASS, ATOMIC_NUMBER, ELEMENT_INDEX, ELEMENTS, HALOGENS

DEGREES = tuple(range(7))
CHARGES = (-2, -1, 0, 1, 2)
HCOUNTS = tuple(range(5))
HYBRIDIZATIONS = ("sp", "sp2", "sp3", "other")

ATOM_FEATURE_NAMES: tuple[str, ...] = (
    tuple(f"element_{e}" for e in ELEMENTS)
    + tuple(f"degree_{d}" for d in DEGREES)
    + tuple(f"charge_{c:+d}" for c in CHARGES)
    + ("chirality_none", "chirality_cw", "chirality_ccw")
    + tuple(f"num_h_{h}" for h in HCOUNTS)
    + tuple(f"hybridization_{h}" for h in HYBRIDIZATIONS)
    + ("aromatic", "mass_over_100")
)
BOND_FEATURE_NAMES: tuple[str, ...] = (
    "single", "double", "triple", "aromatic", "in_ring", "conjugated",
)
GLOBAL_FEATURE_NAMES: tuple[str, ...] = (
    "mol_weight",
    "heavy_atoms",
    "aromatic_rings",
    "rings",
    "hbond_donors",
    "hbond_acceptors",
    "rotatable_bonds",
    "fraction_sp3_carbon",
    "formal_charge",
    "halogens",
)

ATOM_FDIM = len(ATOM_FEATURE_NAMES)
BOND_FDIM = len(BOND_FEATURE_NAMES)
GLOBAL_FDIM = len(GLOBAL_FEATURE_NAMES)


def _clamp(value: int, buckets: tuple[int, ...]) -> int:
    return buckets.index(min(max(value, buckets[0]), buckets[-1]))


def hybridization(mol: MolGraph, atom_index: int) -> str:
    """Rule-based hybridization: aromatic -> sp2, triple or two doubles -> sp,
    one double -> sp2, otherwise sp3. Hydrogen atoms are "other"."""
    atom = mol.atoms[atom_index]
    if atom.element == "H":
        return "other"
    if atom.aromatic:
        return "sp2"
    orders = mol.bond_orders(atom_index)
    n_double = sum(1 for o in orders if o is BondOrder.DOUBLE)
    if any(o is BondOrder.TRIPLE for o in orders) or n_double >= 2:
        return "sp"
    if n_double == 1:
        return "sp2"
    return "sp3"


def atom_features(
    mol: MolGraph, atom_index: int, chirality: Chirality | None = None
) -> np.ndarray:
    """Feature row for one atom.

    ``chirality`` overrides the tag as written; :func:`atom_feature_matrix`
    passes the canonical-frame tag so rows do not depend on input order.
    """
    atom = mol.atoms[atom_index]
    if chirality is None:
        chirality = atom.chirality
    row = np.zeros(ATOM_FDIM)
    off = 0
    row[off + ELEMENT_INDEX[atom.element]] = 1.0
    off += len(ELEMENTS)
    row[off + _clamp(mol.degree(atom_index), DEGREES)] = 1.0
    off += len(DEGREES)
    row[off + _clamp(atom.formal_charge, CHARGES)] = 1.0
    off += len(CHARGES)
    row[off + int(chirality)] = 1.0
    off += 3
    row[off + _clamp(atom.total_h, HCOUNTS)] = 1.0
    off += len(HCOUNTS)
    row[off + HYBRIDIZATIONS.index(hybridization(mol, atom_index))] = 1.0
    off += len(HYBRIDIZATIONS)
    row[off] = float(atom.aromatic)
    row[off + 1] = atom.mass / 100.0
    return row


def atom_feature_matrix(mol: MolGraph, order: list[int] | None = None) -> np.ndarray:
    tags = canonical_chirality(mol, order)
    return np.stack([atom_features(mol, i, tags[i]) for i in range(mol.n_atoms)])


def _has_multiple_bond(mol: MolGraph, atom_index: int) -> bool:
    return any(o is not BondOrder.SINGLE for o in mol.bond_orders(atom_index))


def is_conjugated(mol: MolGraph, bond_index: int) -> bool:
    b = mol.bonds[bond_index]
    a1, a2 = mol.atoms[b.begin], mol.atoms[b.end]
    if a1.aromatic and a2.aromatic:
        return True
    return _has_multiple_bond(mol, b.begin) and _has_multiple_bond(mol, b.end)


def bond_features(mol: MolGraph, bond_index: int) -> np.ndarray:
    b = mol.bonds[bond_index]
    row = np.zeros(BOND_FDIM)
    row[int(b.order) - 1] = 1.0
    row[4] = float(b.in_ring)
    row[5] = float(is_conjugated(mol, bond_index))
    return row


def bond_feature_matrix(mol: MolGraph) -> np.ndarray:
    if mol.n_bonds == 0:
        return np.zeros((0, BOND_FDIM))
    return np.stack([bond_features(mol, i) for i in range(mol.n_bonds)])


def is_rotatable(mol: MolGraph, bond_index: int) -> bool:
    b = mol.bonds[bond_index]
    if b.order is not BondOrder.SINGLE or b.in_ring:
        return False
    return mol.degree(b.begin) >= 2 and mol.degree(b.end) >= 2


def global_descriptors(mol: MolGraph) -> np.ndarray:
    """The ten raw (unstandardized) molecule-level descriptors."""
    atoms = mol.atoms
    weight = sum(a.mass + a.total_h * ATOMIC_MASS["H"] for a in atoms)
    heavy = sum(1 for a in atoms if a.element != "H")
    rings = mol.ring_info.rings
    arom_rings = sum(
        1
        for bonds in mol.ring_info.ring_bonds
        if all(mol.bonds[bi].order is BondOrder.AROMATIC for bi in bonds)
    )
    donors = sum(a.total_h for a in atoms if a.element in ("N", "O"))
    acceptors = sum(1 for a in atoms if a.element in ("N", "O"))
    rotatable = sum(1 for bi in range(mol.n_bonds) if is_rotatable(mol, bi))
    carbons = [i for i, a in enumerate(atoms) if a.element == "C"]
    sp3 = sum(1 for i in carbons if hybridization(mol, i) == "sp3")
    frac_sp3 = sp3 / len(carbons) if carbons else 0.0
    charge = sum(a.formal_charge for a in atoms)
    halogens = sum(1 for a in atoms if a.element in HALOGENS)
    return np.array(
        [weight, heavy, arom_rings, len(rings), donors, acceptors, rotatable, frac_sp3, charge, halogens],
        dtype=float,
    )


@dataclass
class Standardizer:
    """Column-wise z-scoring with statistics fixed at fit time.

    Zero-variance columns map to 0.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, matrix: np.ndarray) -> Standardizer:
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(mean=matrix.mean(axis=0), std=matrix.std(axis=0))

    @classmethod
    def identity(cls, width: int) -> Standardizer:
        return cls(mean=np.zeros(width), std=np.ones(width))

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        safe = np.where(self.std > 0, self.std, 1.0)
        out = (matrix - self.mean) / safe
        return np.where(self.std > 0, out, 0.0)


def _hash(*parts: object) -> int:
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=4).digest()
    return int.from_bytes(digest, "little")


def morgan_identifiers(mol: MolGraph, radius: int = 2) -> list[set[int]]:
    """Per-round sets of circular atom-environment identifiers."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    ring_atoms = mol.ring_info.ring_atoms
    ids = [
        _hash(
            ATOMIC_NUMBER[a.element],
            mol.degree(i),
            a.total_h,
            a.formal_charge,
            a.aromatic,
            i in ring_atoms,
        )
        for i, a in enumerate(mol.atoms)
    ]
    rounds = [set(ids)]
    for r in range(1, radius + 1):
        ids = [
            _hash(
                r,
                ids[i],
                tuple(sorted((int(mol.bonds[bi].order), ids[w]) for w, bi in mol.adjacency[i])),
            )
            for i in range(mol.n_atoms)
        ]
        rounds.append(set(ids))
    return rounds


def morgan_fingerprint(mol: MolGraph, radius: int = 2, n_bits: int = 2048) -> np.ndarray:
    """ECFP-style bit vector folded to ``n_bits`` by modulo."""
    if n_bits <= 0 or n_bits & (n_bits - 1):
        raise ValueError("n_bits must be a power of two")
    fp = np.zeros(n_bits)
    for ids in morgan_identifiers(mol, radius):
        for ident in ids:
            fp[ident % n_bits] = 1.0
    return fp


__all__ = [
    "ATOM_FDIM",
    "ATOM_FEATURE_NAMES",
    "BOND_FDIM",
    "BOND_FEATURE_NAMES",
    "GLOBAL_FDIM",
    "GLOBAL_FEATURE_NAMES",
    "Standardizer",
    "atom_feature_matrix",
    "atom_features",
    "bond_feature_matrix",
    "bond_features",
    "global_descriptors",
    "hybridization",
    "morgan_fingerprint",
    "morgan_identifiers",
]
