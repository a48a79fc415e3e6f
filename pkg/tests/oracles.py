"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import json
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


def corpus() -> list[str]:
    return [line.split()[0] for line in (FIXTURES / "corpus.smi").read_text().splitlines() if line.strip()]


def parser_oracle() -> list[dict]:
    return json.loads((FIXTURES / "parser_oracle.json").read_text())["molecules"]


def _labels(mol):
    return [
        (a.element, a.formal_charge, a.total_h, a.aromatic, a.isotope, mol.degree(i))
        for i, a in enumerate(mol.atoms)
    ]


def _bond_map(mol):
    return {frozenset((b.begin, b.end)): b.order for b in mol.bonds}


def has_nontrivial_automorphism(mol) -> bool:
    """Backtracking search for a label- and bond-preserving permutation other than the identity."""
    n = mol.n_atoms
    lab = _labels(mol)
    bonds = _bond_map(mol)
    perm = [-1] * n
    used = [False] * n

    def rec(i: int) -> bool:
        if i == n:
            return any(perm[k] != k for k in range(n))
        for j in range(n):
            if used[j] or lab[j] != lab[i]:
                continue
            if any(bonds.get(frozenset((i, k))) != bonds.get(frozenset((j, perm[k]))) for k in range(i)):
                continue
            perm[i], used[j] = j, True
            if rec(i + 1):
                return True
            perm[i], used[j] = -1, False
        return False

    return rec(0)


def isomorphic(a, b) -> bool:
    """Exhaustive isomorphism test for small graphs (labels, degrees and bond orders)."""
    if a.n_atoms != b.n_atoms or a.n_bonds != b.n_bonds:
        return False
    la, lb = _labels(a), _labels(b)
    if sorted(la) != sorted(lb):
        return False
    ba, bb = _bond_map(a), _bond_map(b)
    n = a.n_atoms
    perm = [-1] * n
    used = [False] * n

    def rec(i: int) -> bool:
        if i == n:
            return True
        for j in range(n):
            if used[j] or lb[j] != la[i]:
                continue
            if any(ba.get(frozenset((i, k))) != bb.get(frozenset((j, perm[k]))) for k in range(i)):
                continue
            perm[i], used[j] = j, True
            if rec(i + 1):
                return True
            perm[i], used[j] = -1, False
        return False

    return rec(0)
