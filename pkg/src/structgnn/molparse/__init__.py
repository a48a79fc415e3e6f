"""SMILES parsing, ring perception and canonicalization."""

from .canon import (
    canonical_chirality,
    canonical_order,
    canonical_ranks,
    canonical_smiles,
    is_symmetric,
    random_smiles,
    write_smiles,
)
from .graph import Atom, Bond, BondOrder, Chirality, MolGraph, RingInfo
from .rings import perceive_rings
from .smiles import parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Chirality",
    "MolGraph",
    "RingInfo",
    "canonical_chirality",
    "canonical_order",
    "canonical_ranks",
    "canonical_smiles",
    "is_symmetric",
    "parse_smiles",
    "perceive_rings",
    "random_smiles",
    "write_smiles",
]
